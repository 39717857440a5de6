//! Decomposition of the Jacobian at the fixed point, `J0 = kappa0 F0`, and
//! the pointwise split of `J` into a geometric and a dynamic part.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{curl, divergence, jacobian, VectorField, FD_STEP};
use crate::kappa::{embed_c, perp, KappaForm};
use crate::models::AnalyticForm;
use crate::{Mat2, Vec2};

/// Off-diagonal mismatch above which `F0` carries a warning.
pub const ASYMMETRY_WARN: f64 = 1e-6;

/// `H0(x, y) = (A x^2 + B y^2 + 2 C x y) / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticForm {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl QuadraticForm {
    pub fn from_matrix(m: &Mat2) -> Self {
        Self { a: m[(0, 0)], b: m[(1, 1)], c: 0.5 * (m[(0, 1)] + m[(1, 0)]) }
    }

    pub fn matrix(&self) -> Mat2 {
        Mat2::new(self.a, self.c, self.c, self.b)
    }

    pub fn eval(&self, p: Vec2) -> f64 {
        0.5 * (self.a * p.x * p.x + self.b * p.y * p.y + 2.0 * self.c * p.x * p.y)
    }

    pub fn trace(&self) -> f64 {
        self.a + self.b
    }

    pub fn is_psd(&self) -> bool {
        self.a >= 0.0 && self.b >= 0.0 && self.a * self.b - self.c * self.c >= -1e-9
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { a: self.a * s, b: self.b * s, c: self.c * s }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearDecomposition {
    pub j0: Mat2,
    pub kappa0: KappaForm,
    pub f0: QuadraticForm,
    /// `|F01 - F10|` before symmetrization.
    pub f0_asymmetry: f64,
    pub eigenvalues: [Complex64; 2],
    pub warning: Option<String>,
}

/// Flat document form with matrices as row lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearDecompositionDoc {
    pub j0: [[f64; 2]; 2],
    pub p0: f64,
    pub w0: f64,
    pub f0: [[f64; 2]; 2],
    pub f0_asymmetry: f64,
    /// `[re, im]` pairs.
    pub eigenvalues: [[f64; 2]; 2],
    /// Coefficients of `x^2`, `y^2` and `x y` in `H0`.
    pub h0_coeffs: H0Coeffs,
    pub classification: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct H0Coeffs {
    pub xx: f64,
    pub yy: f64,
    pub xy: f64,
}

fn rows(m: &Mat2) -> [[f64; 2]; 2] {
    [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
}

impl LinearDecomposition {
    /// Product `kappa0 F0`, which reproduces `J0`.
    pub fn reconstruct(&self) -> Mat2 {
        self.kappa0.matrix() * self.f0.matrix()
    }

    /// Focus when the eigenvalues are complex, node otherwise; stable or
    /// unstable by the sign of the real part.
    pub fn classification(&self) -> &'static str {
        let re = self.eigenvalues[0].re;
        let focus = self.eigenvalues[0].im != 0.0;
        match (focus, re > 0.0, re < 0.0) {
            (true, true, _) => "unstable focus",
            (true, _, true) => "stable focus",
            (true, _, _) => "center",
            (false, true, _) => "unstable node",
            (false, _, true) => "stable node",
            (false, _, _) => "degenerate",
        }
    }

    pub fn to_document(&self) -> LinearDecompositionDoc {
        LinearDecompositionDoc {
            j0: rows(&self.j0),
            p0: self.kappa0.p,
            w0: self.kappa0.w,
            f0: rows(&self.f0.matrix()),
            f0_asymmetry: self.f0_asymmetry,
            eigenvalues: self.eigenvalues.map(|z| [z.re, z.im]),
            h0_coeffs: H0Coeffs { xx: 0.5 * self.f0.a, yy: 0.5 * self.f0.b, xy: self.f0.c },
            classification: self.classification().to_string(),
            warning: self.warning.clone(),
        }
    }
}

/// `(p, w) = (div, curl) / 2` at the origin.
pub fn kappa0_at_origin<F: VectorField + ?Sized>(field: &F) -> Result<KappaForm> {
    let o = Vec2::zeros();
    let k = KappaForm::new(0.5 * divergence(field, o)?, 0.5 * curl(field, o)?);
    if k.det() == 0.0 {
        return Err(Error::DegenerateDecomposition);
    }
    Ok(k)
}

pub fn eigenvalues(m: &Mat2) -> [Complex64; 2] {
    let half_tr = 0.5 * m.trace();
    let disc = Complex64::new(half_tr * half_tr - m.determinant(), 0.0).sqrt();
    [half_tr + disc, half_tr - disc]
}

pub fn decompose_linear<F: VectorField + ?Sized>(field: &F) -> Result<LinearDecomposition> {
    let j0 = jacobian(field, Vec2::zeros())?;
    let kappa0 = kappa0_at_origin(field)?;
    let raw = kappa0.inverse()?.matrix() * j0;
    let f0_asymmetry = (raw[(0, 1)] - raw[(1, 0)]).abs();
    let f0 = QuadraticForm::from_matrix(&raw);
    let warning = (f0_asymmetry > ASYMMETRY_WARN)
        .then(|| format!("F0 was not symmetric (off-diagonal mismatch {f0_asymmetry:e}); symmetrized"));
    Ok(LinearDecomposition { j0, kappa0, f0, f0_asymmetry, eigenvalues: eigenvalues(&j0), warning })
}

/// Terms of `J = kappa Hess(H) + Q (Lambda S) Q^T` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobianSplit {
    pub j: Mat2,
    /// `kappa Hess(H)`.
    pub j_h: Mat2,
    /// `J - J_H`.
    pub j_kappa: Mat2,
    /// `Q = embed_c(grad H)`.
    pub q: Mat2,
    /// `[[dp/dH, S dp/dphi], [dw/dH, S dw/dphi]]`: derivatives of `(p, w)`
    /// along the gradient and along the contour, in units of `|grad H|`.
    pub lambda_s: Mat2,
    /// `|J - J_H - Q (Lambda S) Q^T|` (Frobenius).
    pub residual: f64,
}

/// Splits the Jacobian into the part due to the curvature of H and the part
/// due to the variation of kappa, using the closed-form H and kappa of the
/// model. Gradients of `(p, w)` are taken by central differences.
pub fn jacobian_split<F, A>(field: &F, point: Vec2, analytic: &A) -> Result<JacobianSplit>
where
    F: VectorField + ?Sized,
    A: AnalyticForm + ?Sized,
{
    let j = jacobian(field, point)?;
    let kappa = analytic.kappa(point);
    let j_h = kappa.matrix() * analytic.hessian_h(point);
    let j_kappa = j - j_h;

    let g = analytic.grad_h(point);
    let q = embed_c(g);
    let h = FD_STEP;
    let ex = Vec2::new(h, 0.0);
    let ey = Vec2::new(0.0, h);
    let diff = |d: Vec2| {
        let plus = analytic.kappa(point + d);
        let minus = analytic.kappa(point - d);
        ((plus.p - minus.p) / (2.0 * h), (plus.w - minus.w) / (2.0 * h))
    };
    let (px, wx) = diff(ex);
    let (py, wy) = diff(ey);
    let grad_p = Vec2::new(px, py);
    let grad_w = Vec2::new(wx, wy);

    let lambda_s = {
        let n2 = g.norm_squared();
        if n2 == 0.0 {
            Mat2::zeros()
        } else {
            let t = perp(g);
            Mat2::new(grad_p.dot(&g) / n2, grad_p.dot(&t) / n2, grad_w.dot(&g) / n2, grad_w.dot(&t) / n2)
        }
    };
    let residual = (j - j_h - q * lambda_s * q.transpose()).norm();
    if !(residual <= 1e-6) {
        return Err(Error::IdentityViolation { residual });
    }
    Ok(JacobianSplit { j, j_h, j_kappa, q, lambda_s, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FnField;
    use crate::models::{make_model, ModelKind, ModelSpec};
    use std::f64::consts::PI;

    fn model(spec: ModelSpec) -> crate::models::Model {
        make_model(&spec).unwrap()
    }

    #[test]
    fn kappa0_examples() {
        let k = kappa0_at_origin(&model(ModelSpec::new(ModelKind::Asymm).with("k", 1.0))).unwrap();
        assert!((k.p - 40.0).abs() < 1e-12 && (k.w - 4.0 * -PI / 10.0).abs() < 1e-12);
        let mu = 1.7;
        let k = kappa0_at_origin(&model(ModelSpec::new(ModelKind::Vdp).with("mu", mu))).unwrap();
        assert_eq!((k.p, k.w), (mu / 2.0, -1.0));
        let k = kappa0_at_origin(&model(ModelSpec::new(ModelKind::SymmRad).with("omega", -2.5))).unwrap();
        assert_eq!((k.p, k.w), (10.0, -2.5));
    }

    #[test]
    fn asymm_kappa0_scales_with_k() {
        // J0 = mu^2 [[k beta, -omega], [omega, k beta]] for general k.
        let k = kappa0_at_origin(&model(ModelSpec::new(ModelKind::Asymm))).unwrap();
        assert!((k.p - 4.0 * 0.01 * 10.0).abs() < 1e-12);
        assert!((k.w - 4.0 * -PI / 10.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_fixed_point() {
        let shear = FnField::new(|p: Vec2| Vec2::new(p.y, 0.0));
        // div = 0, curl = -1: fine. A pure strain has neither.
        assert!(kappa0_at_origin(&shear).is_ok());
        let strain = FnField::new(|p: Vec2| Vec2::new(p.x, -p.y));
        assert!(matches!(kappa0_at_origin(&strain), Err(Error::DegenerateDecomposition)));
    }

    #[test]
    fn asymm_f0_is_identity() {
        for k in [1.0, 0.01] {
            let d = decompose_linear(&model(ModelSpec::new(ModelKind::Asymm).with("k", k))).unwrap();
            assert!((d.f0.matrix() - Mat2::identity()).abs().max() < 1e-9);
            let mu2 = 4.0;
            let lam = d.eigenvalues;
            assert!((lam[0].re - mu2 * k * 10.0).abs() < 1e-9);
            assert!((lam[0].im.abs() - mu2 * PI / 10.0).abs() < 1e-9);
            assert_eq!(lam[0].conj(), lam[1]);
        }
    }

    #[test]
    fn vdp_f0_closed_form() {
        for mu in [0.5, 1.0, 2.0, 3.3] {
            let d = decompose_linear(&model(ModelSpec::new(ModelKind::Vdp).with("mu", mu))).unwrap();
            let s = 2.0 / (mu * mu + 4.0);
            let expected = Mat2::new(2.0, -mu, -mu, 2.0 + mu * mu) * s;
            assert!((d.f0.matrix() - expected).abs().max() < 1e-12);
            assert!(d.f0_asymmetry < 1e-12 && d.warning.is_none());
        }
    }

    #[test]
    fn trace_two_and_reconstruction_for_all_models() {
        for kind in ModelKind::ALL {
            let d = decompose_linear(&model(ModelSpec::new(kind))).unwrap();
            assert!((d.f0.trace() - 2.0).abs() < 1e-9, "{kind}");
            assert!((d.reconstruct() - d.j0).abs().max() < 1e-9, "{kind}");
            assert!(d.f0.is_psd(), "{kind}");
        }
    }

    #[test]
    fn fd_jacobian_reconstruction() {
        let m = model(ModelSpec::new(ModelKind::VdpYuan).with("mu", 1.3));
        let fd = FnField::new(|p: Vec2| m.rhs(p));
        let d = decompose_linear(&fd).unwrap();
        assert!((d.reconstruct() - d.j0).abs().max() < 1e-4);
    }

    #[test]
    fn symm_rad_f0_identity_and_eigenvalues() {
        let d = decompose_linear(&model(ModelSpec::new(ModelKind::SymmRad))).unwrap();
        assert_eq!(d.f0.matrix(), Mat2::identity());
        assert!((d.eigenvalues[0] - Complex64::new(10.0, 1.0)).norm() < 1e-12);
        assert_eq!(d.classification(), "unstable focus");
    }

    #[test]
    fn scaling_covariance() {
        let d = decompose_linear(&model(ModelSpec::new(ModelKind::Vdp).with("mu", 1.4))).unwrap();
        for c in [0.1, 3.0, 250.0] {
            let j = d.kappa0.scaled(1.0 / c).matrix() * d.f0.scaled(c).matrix();
            assert!((j - d.j0).abs().max() < 1e-12);
        }
    }

    #[test]
    fn split_on_symm_rad_cycle() {
        let m = model(ModelSpec::new(ModelKind::SymmRad));
        let r = 10f64.sqrt();
        let s = jacobian_split(&m, Vec2::new(r * 0.6, r * 0.8), &m).unwrap();
        assert!((s.lambda_s[(0, 0)] + 2.0).abs() < 1e-8);
        assert!(s.lambda_s[(1, 0)].abs() < 1e-8);
        assert!(s.residual < 1e-6);
    }

    #[test]
    fn split_at_origin_has_no_dynamic_part() {
        let m = model(ModelSpec::new(ModelKind::Asymm));
        let s = jacobian_split(&m, Vec2::zeros(), &m).unwrap();
        assert_eq!(s.q, Mat2::zeros());
        let d = decompose_linear(&m).unwrap();
        assert!((s.j_h - d.kappa0.matrix() * d.f0.matrix()).abs().max() < 1e-12);
    }

    #[test]
    fn split_is_consistent_for_phase_and_asymm() {
        for kind in [ModelKind::SymmPhase, ModelKind::Asymm] {
            let m = model(ModelSpec::new(kind));
            for p in [Vec2::new(0.7, -1.1), Vec2::new(-2.0, 0.4), Vec2::new(1.5, 1.5)] {
                let s = jacobian_split(&m, p, &m).unwrap();
                assert!(s.residual < 1e-6, "{kind}: {}", s.residual);
            }
        }
    }

    #[test]
    fn constant_kappa_has_no_dynamic_part() {
        struct Linear;
        impl AnalyticForm for Linear {
            fn h(&self, p: Vec2) -> f64 { 0.5 * (2.0 * p.x * p.x + p.y * p.y) }
            fn grad_h(&self, p: Vec2) -> Vec2 { Vec2::new(2.0 * p.x, p.y) }
            fn hessian_h(&self, _: Vec2) -> Mat2 { Mat2::new(2.0, 0.0, 0.0, 1.0) }
            fn kappa(&self, _: Vec2) -> KappaForm { KappaForm::new(0.3, -1.2) }
        }
        let lin = Linear;
        let field = FnField::new(|p: Vec2| crate::kappa::apply_kappa(lin.kappa(p), lin.grad_h(p)));
        let s = jacobian_split(&field, Vec2::new(0.4, -0.9), &lin).unwrap();
        assert!(s.j_kappa.abs().max() < 1e-9);
        assert_eq!(s.lambda_s, Mat2::zeros());
    }
}
