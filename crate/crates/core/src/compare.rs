//! The SA-SDE potential of the generalized van der Pol oscillator and
//! pointwise `(p, w)` comparisons along curves.
//!
//! With `u = x`, `v = y - mu x + mu x^3 / 4` and `rho = (u^2 + v^2) / 2`
//! the potential is `psi = rho (rho - 4)`, so that
//! `grad psi = (u^2 + v^2 - 4) g` with `g = grad rho`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::kappa::{cross, kappa_from};
use crate::levelset::LevelSet;
use crate::Vec2;

/// Gradients below this norm are flagged as singular.
pub const SINGULAR_GRADIENT: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SasdePotential {
    pub mu: f64,
}

impl SasdePotential {
    pub fn new(mu: f64) -> Self {
        Self { mu }
    }

    pub fn uv(&self, p: Vec2) -> Vec2 {
        Vec2::new(p.x, p.y - self.mu * p.x + 0.25 * self.mu * p.x.powi(3))
    }

    pub fn rho(&self, p: Vec2) -> f64 {
        0.5 * self.uv(p).norm_squared()
    }

    pub fn psi(&self, p: Vec2) -> f64 {
        let rho = self.rho(p);
        rho * (rho - 4.0)
    }

    /// `grad rho = (u + mu v (3/4 x^2 - 1), v)`.
    pub fn grad_rho(&self, p: Vec2) -> Vec2 {
        let uv = self.uv(p);
        Vec2::new(uv.x + self.mu * uv.y * (0.75 * p.x * p.x - 1.0), uv.y)
    }

    /// `u^2 + v^2 - 4`: the factor that vanishes on the limit cycle.
    pub fn cycle_factor(&self, p: Vec2) -> f64 {
        self.uv(p).norm_squared() - 4.0
    }

    pub fn grad(&self, p: Vec2) -> Vec2 {
        self.grad_rho(p) * self.cycle_factor(p)
    }

    /// Closed curve `rho = level`, parametrized as a circle in `(u, v)`.
    /// Counterclockwise in `(u, v)`, hence in `(x, y)` as well.
    pub fn contour(&self, level: f64, n: usize) -> Vec<Vec2> {
        let a = (2.0 * level).sqrt();
        (0..n)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                let (u, v) = (a * t.cos(), a * t.sin());
                Vec2::new(u, v + self.mu * u - 0.25 * self.mu * u.powi(3))
            })
            .collect()
    }

    /// The zero-gradient curve `u^2 + v^2 = 4`.
    pub fn critical_curve(&self, n: usize) -> Vec<Vec2> {
        self.contour(2.0, n)
    }
}

pub fn sasde_psi(mu: f64, p: Vec2) -> f64 {
    SasdePotential::new(mu).psi(p)
}

pub fn sasde_grad(mu: f64, p: Vec2) -> Vec2 {
    SasdePotential::new(mu).grad(p)
}

/// `(p, w)` at one curve point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Components {
    pub p: f64,
    pub w: f64,
    /// Gradient too small to solve for kappa; `p` and `w` are NaN.
    pub singular: bool,
}

/// Solves `x' = kappa grad` for kappa at every point of `curve`.
pub fn components_from_gradient<F: VectorField + ?Sized>(
    field: &F,
    curve: &[Vec2],
    grad: impl Fn(Vec2) -> Vec2,
) -> Vec<Components> {
    curve
        .iter()
        .map(|x| {
            let g = grad(*x);
            let singular = !(g.norm() >= SINGULAR_GRADIENT);
            match (singular, kappa_from(field.rhs(*x), g)) {
                (false, Some(k)) => Components { p: k.p, w: k.w, singular: false },
                _ => Components { p: f64::NAN, w: f64::NAN, singular: true },
            }
        })
        .collect()
}

/// Components read off a traced contour: its prescribed `p` and the
/// estimated `w`.
pub fn components_from_level(level: &LevelSet) -> Vec<Components> {
    level
        .w_estimates
        .iter()
        .map(|w| Components { p: level.p_level, w: *w, singular: !w.is_finite() })
        .collect()
}

/// SA-SDE components in factored form, `w = n / s` with the smooth
/// numerator `n = (g x x') / |g|^2` and `s = u^2 + v^2 - 4`, so that zeros
/// of `w` can be told apart from its poles on the limit cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SasdeComponents {
    pub components: Components,
    pub w_numerator: f64,
    pub cycle_factor: f64,
}

pub fn sasde_components<F: VectorField + ?Sized>(field: &F, potential: &SasdePotential, curve: &[Vec2]) -> Vec<SasdeComponents> {
    let base = components_from_gradient(field, curve, |x| potential.grad(x));
    curve
        .iter()
        .zip(base)
        .map(|(x, components)| {
            let g = potential.grad_rho(*x);
            SasdeComponents {
                components,
                w_numerator: cross(g, field.rhs(*x)) / g.norm_squared(),
                cycle_factor: potential.cycle_factor(*x),
            }
        })
        .collect()
}

/// Sign changes between cyclically consecutive finite values.
pub fn sign_changes(values: &[f64]) -> usize {
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite() && *v != 0.0).collect();
    let n = finite.len();
    if n < 2 {
        return 0;
    }
    (0..n).filter(|&i| finite[i].signum() != finite[(i + 1) % n].signum()).count()
}

/// Zero crossings of `w` (its numerator changes sign) and poles (the
/// cycle factor changes sign) along a closed curve.
pub fn w_crossings(components: &[SasdeComponents]) -> (usize, usize) {
    let num: Vec<f64> = components.iter().map(|c| c.w_numerator).collect();
    let den: Vec<f64> = components.iter().map(|c| c.cycle_factor).collect();
    (sign_changes(&num), sign_changes(&den))
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Stats {
    pub count: usize,
    pub mean: f64,
    pub variance: f64,
    pub min: f64,
    pub max: f64,
}

impl Stats {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let v: Vec<f64> = values.into_iter().filter(|x| x.is_finite()).collect();
        let n = v.len();
        if n == 0 {
            return Self { count: 0, mean: f64::NAN, variance: f64::NAN, min: f64::NAN, max: f64::NAN };
        }
        let mean = v.iter().sum::<f64>() / n as f64;
        let variance = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        Self {
            count: n,
            mean,
            variance,
            min: v.iter().copied().fold(f64::INFINITY, f64::min),
            max: v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ComponentStats {
    pub p: Stats,
    pub w: Stats,
    pub singular: usize,
}

impl ComponentStats {
    pub fn of(c: &[Components]) -> Self {
        Self {
            p: Stats::of(c.iter().map(|c| c.p)),
            w: Stats::of(c.iter().map(|c| c.w)),
            singular: c.iter().filter(|c| c.singular).count(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct VarianceReport {
    pub a: ComponentStats,
    pub b: ComponentStats,
}

pub fn variance_report(a: &[Components], b: &[Components]) -> Result<VarianceReport> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!(
            "component lists must share the curve ({} vs {} points)",
            a.len(),
            b.len()
        )));
    }
    Ok(VarianceReport { a: ComponentStats::of(a), b: ComponentStats::of(b) })
}

/// Least-squares fit `f ~ c + d x + e y + xx x^2 + yy y^2 + xy x y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticFit {
    pub c: f64,
    pub x: f64,
    pub y: f64,
    pub xx: f64,
    pub yy: f64,
    pub xy: f64,
}

impl QuadraticFit {
    /// `(xx, yy, xy)` scaled so that `xx + yy = 1`.
    pub fn normalized(&self) -> [f64; 3] {
        let s = self.xx + self.yy;
        [self.xx / s, self.yy / s, self.xy / s]
    }
}

/// The two near-origin Hamiltonians of the linearized van der Pol
/// oscillator, each as `(xx, yy, xy)` scaled to `xx + yy = 1`: one from
/// `F0 = kappa0^-1 J0`, one from the SA-SDE potential. They differ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearForms {
    pub from_kappa0: [f64; 3],
    pub from_potential: [f64; 3],
}

pub fn linear_forms(mu: f64) -> LinearForms {
    let k = 4.0 + mu * mu;
    let s = 2.0 + mu * mu;
    LinearForms {
        from_kappa0: [2.0 / k, (2.0 + mu * mu) / k, -2.0 * mu / k],
        from_potential: [(1.0 + mu * mu) / s, 1.0 / s, -2.0 * mu / s],
    }
}

/// Fits a quadratic to `f` sampled on a polar grid over the disc of the
/// given radius around the origin.
pub fn fit_quadratic(f: impl Fn(Vec2) -> f64, radius: f64) -> Result<QuadraticFit> {
    let (nr, nt) = (20, 48);
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for i in 1..=nr {
        let r = radius * i as f64 / nr as f64;
        for j in 0..nt {
            let t = 2.0 * std::f64::consts::PI * j as f64 / nt as f64;
            let (x, y) = (r * t.cos(), r * t.sin());
            rows.extend_from_slice(&[1.0, x, y, x * x, y * y, x * y]);
            rhs.push(f(Vec2::new(x, y)));
        }
    }
    let n = rhs.len();
    let a = DMatrix::from_row_slice(n, 6, &rows);
    let b = DVector::from_vec(rhs);
    let sol = a
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::Shape(format!("quadratic fit failed: {e}")))?;
    Ok(QuadraticFit { c: sol[0], x: sol[1], y: sol[2], xx: sol[3], yy: sol[4], xy: sol[5] })
}
