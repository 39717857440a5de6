//! Built-in catalog of planar systems with a limit cycle around the origin.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::kappa::KappaForm;
use crate::{Mat2, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Symm,
    SymmRad,
    SymmPhase,
    Asymm,
    Vdp,
    VdpYuan,
}

impl ModelKind {
    pub const ALL: [ModelKind; 6] = [
        ModelKind::Symm,
        ModelKind::SymmRad,
        ModelKind::SymmPhase,
        ModelKind::Asymm,
        ModelKind::Vdp,
        ModelKind::VdpYuan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Symm => "symm",
            ModelKind::SymmRad => "symm_rad",
            ModelKind::SymmPhase => "symm_phase",
            ModelKind::Asymm => "asymm",
            ModelKind::Vdp => "vdp",
            ModelKind::VdpYuan => "vdp_yuan",
        }
    }

    /// Parameter names accepted by the model, with their defaults.
    pub fn defaults(self) -> &'static [(&'static str, f64)] {
        use std::f64::consts::PI;
        match self {
            ModelKind::Symm => &[("beta", 10.0), ("k", 1.0), ("omega", -1.0), ("lambda", 0.0)],
            ModelKind::SymmRad => &[("beta", 10.0), ("k", 1.0), ("omega", -1.0)],
            ModelKind::SymmPhase => &[("beta", 10.0), ("k", 1.0), ("omega", -1.0), ("lambda", 0.2)],
            ModelKind::Asymm => &[
                ("beta", 10.0),
                ("k", 0.01),
                ("omega", -PI / 10.0),
                ("a", 1.5),
                ("mu", 2.0),
            ],
            ModelKind::Vdp | ModelKind::VdpYuan => &[("mu", 1.0)],
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let valid: Vec<_> = ModelKind::ALL.iter().map(|k| k.name()).collect();
                Error::InvalidParameter(format!(
                    "unknown model '{s}' (valid models: {})",
                    valid.join(", ")
                ))
            })
    }
}

/// A model name plus parameter overrides; unspecified parameters take the
/// catalog defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub name: ModelKind,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl ModelSpec {
    pub fn new(name: ModelKind) -> Self {
        Self { name, params: BTreeMap::new() }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    /// Defaults merged with overrides, in catalog order.
    pub fn resolved_params(&self) -> Result<BTreeMap<String, f64>> {
        let defaults = self.name.defaults();
        for key in self.params.keys() {
            if !defaults.iter().any(|(k, _)| k == key) {
                let valid: Vec<_> = defaults.iter().map(|(k, _)| *k).collect();
                return Err(Error::InvalidParameter(format!(
                    "model '{}' has no parameter '{key}' (valid: {})",
                    self.name,
                    valid.join(", ")
                )));
            }
        }
        Ok(defaults
            .iter()
            .map(|(k, v)| (k.to_string(), *self.params.get(*k).unwrap_or(v)))
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Dynamics {
    /// `k x (beta - r^2) - omega y (1 - lambda x)` and its partner; covers
    /// symm, symm_rad (lambda = 0) and symm_phase.
    Symm { beta: f64, k: f64, omega: f64, lambda: f64 },
    /// `kappa grad H` with `H = mu^2/2 r^2 - a/3 x^3 + x^4/4`,
    /// `p = k (beta - 2H)`, `w = omega`.
    Asymm { beta: f64, k: f64, omega: f64, a: f64, mu: f64 },
    /// Generalized van der Pol with forcing `h(x)`.
    Vdp { mu: f64, yuan: bool },
}

/// A validated catalog model.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    spec: ModelSpec,
    params: BTreeMap<String, f64>,
    dynamics: Dynamics,
}

pub fn make_model(spec: &ModelSpec) -> Result<Model> {
    let params = spec.resolved_params()?;
    let get = |k: &str| params[k];
    for (k, v) in &params {
        if !v.is_finite() {
            return Err(Error::InvalidParameter(format!("{k} must be finite, got {v}")));
        }
    }
    let dynamics = match spec.name {
        ModelKind::Symm | ModelKind::SymmRad | ModelKind::SymmPhase => {
            let beta = get("beta");
            let k = get("k");
            let lambda = params.get("lambda").copied().unwrap_or(0.0);
            if beta <= 0.0 {
                return Err(Error::InvalidParameter(format!("{} requires beta > 0, got {beta}", spec.name)));
            }
            if k <= 0.0 {
                return Err(Error::InvalidParameter(format!("{} requires k > 0, got {k}", spec.name)));
            }
            if lambda * lambda >= 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "{} requires lambda^2 < 1, got lambda = {lambda}",
                    spec.name
                )));
            }
            // With f(x, y) = x the angular speed vanishes at x = 1 / lambda,
            // which must stay outside the cycle r = sqrt(beta).
            if lambda * lambda * beta >= 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "{} requires lambda^2 beta < 1 so that the limit cycle carries no fixed point, got lambda = {lambda}, beta = {beta}",
                    spec.name
                )));
            }
            Dynamics::Symm { beta, k, omega: get("omega"), lambda }
        }
        ModelKind::Asymm => {
            let (beta, k, a, mu) = (get("beta"), get("k"), get("a"), get("mu"));
            if mu * mu <= a * a {
                return Err(Error::InvalidParameter(format!(
                    "asymm requires mu^2 > a^2 for a single extremum of H, got mu = {mu}, a = {a}"
                )));
            }
            if beta <= 0.0 {
                return Err(Error::InvalidParameter(format!("asymm requires beta > 0, got {beta}")));
            }
            if k <= 0.0 {
                return Err(Error::InvalidParameter(format!("asymm requires k > 0, got {k}")));
            }
            Dynamics::Asymm { beta, k, omega: get("omega"), a, mu }
        }
        ModelKind::Vdp | ModelKind::VdpYuan => {
            let mu = get("mu");
            if mu <= 0.0 {
                return Err(Error::InvalidParameter(format!("{} requires mu > 0, got {mu}", spec.name)));
            }
            Dynamics::Vdp { mu, yuan: spec.name == ModelKind::VdpYuan }
        }
    };
    Ok(Model { spec: spec.clone(), params, dynamics })
}

/// Closed-form H and kappa for models that are written directly as
/// `kappa grad H`.
pub trait AnalyticForm: Send + Sync {
    fn h(&self, p: Vec2) -> f64;
    fn grad_h(&self, p: Vec2) -> Vec2;
    fn hessian_h(&self, p: Vec2) -> Mat2;
    fn kappa(&self, p: Vec2) -> KappaForm;
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        self.spec.name
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    /// Resolved parameters (defaults plus overrides).
    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.get(name).copied()
    }

    /// The H value assigned to the limit cycle: `beta / 2` where `p = k (beta - 2H)`
    /// vanishes, and `None` for models without a closed-form H.
    pub fn h_limit_cycle(&self) -> Option<f64> {
        match self.dynamics {
            Dynamics::Symm { beta, .. } | Dynamics::Asymm { beta, .. } => Some(beta / 2.0),
            Dynamics::Vdp { .. } => None,
        }
    }

    pub fn analytic(&self) -> Option<&dyn AnalyticForm> {
        match self.dynamics {
            Dynamics::Symm { .. } | Dynamics::Asymm { .. } => Some(self),
            Dynamics::Vdp { .. } => None,
        }
    }

    /// Forcing term `h(x)` of the van der Pol family and its derivative.
    fn vdp_forcing(mu: f64, yuan: bool, x: f64) -> (f64, f64) {
        if yuan {
            let m2 = mu * mu;
            (
                m2 / 4.0 * x.powi(3) - m2 / 16.0 * x.powi(5),
                3.0 * m2 / 4.0 * x * x - 5.0 * m2 / 16.0 * x.powi(4),
            )
        } else {
            (0.0, 0.0)
        }
    }
}

impl VectorField for Model {
    fn rhs(&self, q: Vec2) -> Vec2 {
        let (x, y) = (q.x, q.y);
        match self.dynamics {
            Dynamics::Symm { beta, k, omega, lambda } => {
                let radial = k * (beta - x * x - y * y);
                let rot = omega * (1.0 - lambda * x);
                Vec2::new(radial * x - rot * y, radial * y + rot * x)
            }
            Dynamics::Asymm { omega, .. } => {
                let g = self.grad_h(q);
                let p = self.kappa(q).p;
                Vec2::new(p * g.x - omega * g.y, p * g.y + omega * g.x)
            }
            Dynamics::Vdp { mu, yuan } => {
                let (h, _) = Self::vdp_forcing(mu, yuan, x);
                Vec2::new(y, mu * (1.0 - x * x) * y - x + h)
            }
        }
    }

    fn analytic_jacobian(&self, q: Vec2) -> Option<Mat2> {
        let (x, y) = (q.x, q.y);
        Some(match self.dynamics {
            Dynamics::Symm { beta, k, omega, lambda } => {
                let radial = k * (beta - x * x - y * y);
                Mat2::new(
                    radial - 2.0 * k * x * x + omega * lambda * y,
                    -2.0 * k * x * y - omega * (1.0 - lambda * x),
                    -2.0 * k * x * y + omega * (1.0 - 2.0 * lambda * x),
                    radial - 2.0 * k * y * y,
                )
            }
            Dynamics::Asymm { k, omega, .. } => {
                let g = self.grad_h(q);
                let hess = self.hessian_h(q);
                let p = self.kappa(q).p;
                // d p = -2k grad H
                Mat2::new(
                    -2.0 * k * g.x * g.x + p * hess[(0, 0)] - omega * hess[(1, 0)],
                    -2.0 * k * g.x * g.y + p * hess[(0, 1)] - omega * hess[(1, 1)],
                    -2.0 * k * g.x * g.y + p * hess[(1, 0)] + omega * hess[(0, 0)],
                    -2.0 * k * g.y * g.y + p * hess[(1, 1)] + omega * hess[(0, 1)],
                )
            }
            Dynamics::Vdp { mu, yuan } => {
                let (_, dh) = Self::vdp_forcing(mu, yuan, x);
                Mat2::new(0.0, 1.0, -2.0 * mu * x * y - 1.0 + dh, mu * (1.0 - x * x))
            }
        })
    }
}

impl AnalyticForm for Model {
    fn h(&self, q: Vec2) -> f64 {
        let (x, y) = (q.x, q.y);
        match self.dynamics {
            Dynamics::Symm { .. } => 0.5 * (x * x + y * y),
            Dynamics::Asymm { a, mu, .. } => {
                0.5 * mu * mu * (x * x + y * y) - a / 3.0 * x.powi(3) + 0.25 * x.powi(4)
            }
            Dynamics::Vdp { .. } => f64::NAN,
        }
    }

    fn grad_h(&self, q: Vec2) -> Vec2 {
        let (x, y) = (q.x, q.y);
        match self.dynamics {
            Dynamics::Symm { .. } => q,
            Dynamics::Asymm { a, mu, .. } => {
                Vec2::new(mu * mu * x - a * x * x + x.powi(3), mu * mu * y)
            }
            Dynamics::Vdp { .. } => Vec2::new(f64::NAN, f64::NAN),
        }
    }

    fn hessian_h(&self, q: Vec2) -> Mat2 {
        match self.dynamics {
            Dynamics::Symm { .. } => Mat2::identity(),
            Dynamics::Asymm { a, mu, .. } => {
                let m2 = mu * mu;
                Mat2::new(m2 - 2.0 * a * q.x + 3.0 * q.x * q.x, 0.0, 0.0, m2)
            }
            Dynamics::Vdp { .. } => Mat2::from_element(f64::NAN),
        }
    }

    fn kappa(&self, q: Vec2) -> KappaForm {
        match self.dynamics {
            Dynamics::Symm { beta, k, omega, lambda } => {
                KappaForm::new(k * (beta - 2.0 * self.h(q)), omega * (1.0 - lambda * q.x))
            }
            Dynamics::Asymm { beta, k, omega, .. } => {
                KappaForm::new(k * (beta - 2.0 * self.h(q)), omega)
            }
            Dynamics::Vdp { .. } => KappaForm::new(f64::NAN, f64::NAN),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{curl, divergence, fd_jacobian, jacobian, ops};
    use crate::kappa::{apply_kappa, perp};
    use std::f64::consts::PI;

    fn model(kind: ModelKind) -> Model {
        make_model(&ModelSpec::new(kind)).unwrap()
    }

    fn asymm_default() -> Model {
        model(ModelKind::Asymm)
    }

    #[test]
    fn symm_rad_values() {
        let m = model(ModelKind::SymmRad);
        assert_eq!(m.rhs(Vec2::new(1.0, 0.0)), Vec2::new(9.0, -1.0));
        let s = 10f64.sqrt();
        let v = m.rhs(Vec2::new(s, 0.0));
        assert!(v.x.abs() < 1e-12 && (v.y + s).abs() < 1e-12);
    }

    #[test]
    fn fixed_point_at_origin_for_every_model() {
        for kind in ModelKind::ALL {
            let v = model(kind).rhs(Vec2::zeros());
            assert!(v.norm() < 1e-12, "{kind}");
        }
    }

    #[test]
    fn asymm_matches_direct_substitution() {
        // Expanded by hand from kappa grad H with the default parameters:
        // H = 2 r^2 - 0.5 x^3 + x^4 / 4, grad H = (4x - 1.5x^2 + x^3, 4y).
        let (x, y) = (0.1f64, 0.1f64);
        let h = 2.0 * (x * x + y * y) - 0.5 * x.powi(3) + 0.25 * x.powi(4);
        let hx = 4.0 * x - 1.5 * x * x + x.powi(3);
        let hy = 4.0 * y;
        let p = 0.01 * (10.0 - 2.0 * h);
        let w = -PI / 10.0;
        let expected = Vec2::new(p * hx - w * hy, p * hy + w * hx);
        let got = asymm_default().rhs(Vec2::new(x, y));
        assert!((got - expected).norm() < 1e-14);
        // Freeze the number itself too.
        assert!((got.x - 0.163_958_573_143_591_75).abs() < 1e-12, "{}", got.x);
        assert!((got.y - (-0.081_581_676_428_566_01)).abs() < 1e-12, "{}", got.y);
    }

    #[test]
    fn analytic_jacobians_match_finite_differences() {
        let mut state = 12345u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 * 10.0 - 5.0
        };
        for kind in ModelKind::ALL {
            let m = model(kind);
            for _ in 0..200 {
                let p = Vec2::new(next(), next());
                let a = m.analytic_jacobian(p).unwrap();
                let n = fd_jacobian(&m, p, 1e-5).unwrap();
                let scale = a.abs().max().max(1.0);
                assert!((a - n).abs().max() / scale < 1e-5, "{kind} at {p:?}: {a} vs {n}");
            }
        }
    }

    #[test]
    fn jacobian_examples() {
        let j = jacobian(&model(ModelKind::SymmRad), Vec2::zeros()).unwrap();
        assert_eq!(j, Mat2::new(10.0, 1.0, -1.0, 10.0));
        let vdp = make_model(&ModelSpec::new(ModelKind::Vdp).with("mu", 2.0)).unwrap();
        assert_eq!(jacobian(&vdp, Vec2::zeros()).unwrap(), Mat2::new(0.0, 1.0, -1.0, 2.0));
        let asymm = make_model(&ModelSpec::new(ModelKind::Asymm).with("k", 1.0)).unwrap();
        let j = jacobian(&asymm, Vec2::zeros()).unwrap();
        let expected = Mat2::new(40.0, 4.0 * PI / 10.0, -4.0 * PI / 10.0, 40.0);
        assert!((j - expected).abs().max() < 1e-12);
    }

    #[test]
    fn div_and_curl_examples() {
        let m = model(ModelKind::SymmRad);
        assert_eq!(divergence(&m, Vec2::zeros()).unwrap(), 20.0);
        assert_eq!(curl(&m, Vec2::zeros()).unwrap(), -2.0);
        let vdp = make_model(&ModelSpec::new(ModelKind::Vdp).with("mu", 2.0)).unwrap();
        assert_eq!(divergence(&vdp, Vec2::zeros()).unwrap(), 2.0);
        assert_eq!(curl(&vdp, Vec2::zeros()).unwrap(), -2.0);
    }

    #[test]
    fn symm_phase_rotational_part_is_not_divergence_free() {
        let m = model(ModelKind::SymmPhase);
        let (omega, lambda) = (-1.0, 0.2);
        let rot = |q: Vec2| m.kappa(q).w * perp(m.grad_h(q));
        for q in [Vec2::new(0.3, 1.2), Vec2::new(-2.0, 0.7), Vec2::new(1.0, -1.5)] {
            let d = ops::divergence(rot, q, 1e-4);
            assert!((d - omega * lambda * q.y).abs() < 1e-7, "{d}");
        }
    }

    #[test]
    fn symm_family_kappa_closes_the_field() {
        for kind in [ModelKind::Symm, ModelKind::SymmRad, ModelKind::SymmPhase, ModelKind::Asymm] {
            let m = model(kind);
            for i in -10..=10 {
                for j in -10..=10 {
                    let q = Vec2::new(0.3 * i as f64, 0.3 * j as f64);
                    let v = apply_kappa(m.kappa(q), m.grad_h(q));
                    assert!((v - m.rhs(q)).norm() <= 1e-12 * (1.0 + v.norm()), "{kind} {q:?}");
                }
            }
        }
    }

    #[test]
    fn symm_rad_divergence_and_curl_relations() {
        let m = model(ModelKind::SymmRad);
        let (beta, omega) = (10.0, -1.0);
        for q in [Vec2::new(0.5, 0.2), Vec2::new(-1.3, 2.2), Vec2::new(2.9, -0.4)] {
            let h = m.h(q);
            assert!((divergence(&m, q).unwrap() - (2.0 * beta - 8.0 * h)).abs() < 1e-12);
            assert!((curl(&m, q).unwrap() - 2.0 * omega).abs() < 1e-12);
        }
    }

    #[test]
    fn parameter_validation() {
        let err = make_model(&ModelSpec::new(ModelKind::Asymm).with("mu", 1.0)).unwrap_err();
        assert!(err.to_string().contains("mu^2 > a^2"), "{err}");
        assert!(make_model(&ModelSpec::new(ModelKind::SymmRad).with("beta", -1.0)).is_err());
        assert!(make_model(&ModelSpec::new(ModelKind::SymmPhase).with("lambda", 1.0)).is_err());
        let err = make_model(&ModelSpec::new(ModelKind::SymmPhase).with("lambda", 0.5)).unwrap_err();
        assert!(err.to_string().contains("lambda^2 beta < 1"), "{err}");
        assert!(make_model(&ModelSpec::new(ModelKind::SymmRad).with("lambda", 0.2)).is_err());
        let err = "duffing".parse::<ModelKind>().unwrap_err();
        assert!(err.to_string().contains("vdp_yuan"));
    }

    #[test]
    fn limit_cycle_energy_levels() {
        assert_eq!(model(ModelKind::SymmRad).h_limit_cycle(), Some(5.0));
        assert_eq!(asymm_default().h_limit_cycle(), Some(5.0));
        assert_eq!(model(ModelKind::Vdp).h_limit_cycle(), None);
    }
}
