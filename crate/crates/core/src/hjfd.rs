//! Finite-difference reference solvers for `p(H) |grad H|^2 = x' . grad H`
//! in polar coordinates, with `p` linear in H.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::Vec2;

/// `p(H) = p0 - q H`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PLinear {
    pub p0: f64,
    pub q: f64,
}

impl PLinear {
    pub fn eval(&self, h: f64) -> f64 {
        self.p0 - self.q * h
    }

    /// H at which `p` changes sign.
    pub fn h_zero(&self) -> f64 {
        self.p0 / self.q
    }

    fn validate(&self) -> Result<()> {
        if !self.p0.is_finite() || !self.q.is_finite() || self.q == 0.0 {
            return Err(Error::InvalidParameter(format!(
                "p(H) = p0 - q H needs finite p0 and q != 0, got p0 = {}, q = {}",
                self.p0, self.q
            )));
        }
        Ok(())
    }
}

/// Where the radial velocity entering the update at node `n` is sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RdotSampling {
    /// At `r_n`.
    Node,
    /// At `r_n - dr / 2`; second order in the radial quadrature.
    #[default]
    Midpoint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HjRadialSolution {
    pub dr: f64,
    /// Nodes `0, dr, 2 dr, ...` up to the last computed node (the terminating
    /// node included, with NaN H).
    pub r_grid: Vec<f64>,
    pub h_values: Vec<f64>,
    /// Sorted real roots at each node; `None` at the origin and where the
    /// discriminant is negative.
    pub roots: Vec<Option<(f64, f64)>>,
    /// First radius without a real root.
    pub r_terminate: Option<f64>,
}

impl HjRadialSolution {
    /// Number of nodes carrying a valid H.
    pub fn valid_len(&self) -> usize {
        self.h_values.iter().take_while(|h| h.is_finite()).count()
    }

    /// Chosen-branch H at radius `r` by linear interpolation, if valid.
    pub fn h_at(&self, r: f64) -> Option<f64> {
        let n = self.valid_len();
        let x = r / self.dr;
        let i = x.floor() as usize;
        if i + 1 >= n {
            return (i + 1 == n && x == i as f64).then(|| self.h_values[i]);
        }
        let t = x - i as f64;
        Some(self.h_values[i] * (1.0 - t) + self.h_values[i + 1] * t)
    }
}

/// Real roots of `-q H^2 + b H - c = 0`, sorted, via the cancellation-free
/// form of the quadratic formula.
pub fn quadratic_roots(q: f64, b: f64, c: f64) -> Option<(f64, f64)> {
    let disc = b * b - 4.0 * q * c;
    if !(disc >= 0.0) {
        return None;
    }
    let t = 0.5 * (b + b.signum() * disc.sqrt());
    if t == 0.0 {
        return Some((0.0, 0.0));
    }
    let (r1, r2) = (t / q, c / t);
    Some(if r1 <= r2 { (r1, r2) } else { (r2, r1) })
}

/// One radial update: roots of
/// `-q H_n^2 + (p0 + q H_{n-1}) H_n - (rdot dr + p0 H_{n-1}) = 0`.
pub fn radial_roots(p: PLinear, h_prev: f64, rdot_dr: f64) -> Option<(f64, f64)> {
    quadratic_roots(p.q, p.p0 + p.q * h_prev, rdot_dr + p.p0 * h_prev)
}

fn nearest(roots: (f64, f64), target: f64) -> f64 {
    if (roots.0 - target).abs() <= (roots.1 - target).abs() {
        roots.0
    } else {
        roots.1
    }
}

fn validate_grid(dr: f64, r_max: f64) -> Result<()> {
    if !(dr > 0.0) || !dr.is_finite() {
        return Err(Error::InvalidParameter(format!("dr must be positive, got {dr}")));
    }
    if !(r_max > dr) || !r_max.is_finite() {
        return Err(Error::InvalidParameter(format!("r_max must exceed dr, got {r_max}")));
    }
    Ok(())
}

/// Marches the radial scheme outward from `H(0) = 0`, following the root
/// nearest the linear extrapolation of the previous two nodes, until the
/// discriminant turns negative or `r_max` is reached.
pub fn solve_radial(rdot: impl Fn(f64) -> f64, p: PLinear, dr: f64, r_max: f64) -> Result<HjRadialSolution> {
    solve_radial_with(rdot, p, dr, r_max, RdotSampling::default())
}

pub fn solve_radial_with(
    rdot: impl Fn(f64) -> f64,
    p: PLinear,
    dr: f64,
    r_max: f64,
    sampling: RdotSampling,
) -> Result<HjRadialSolution> {
    p.validate()?;
    validate_grid(dr, r_max)?;
    let n_max = (r_max / dr).round() as usize;
    let mut sol = HjRadialSolution {
        dr,
        r_grid: vec![0.0],
        h_values: vec![0.0],
        roots: vec![None],
        r_terminate: None,
    };
    for n in 1..=n_max {
        let r = n as f64 * dr;
        let r_s = match sampling {
            RdotSampling::Node => r,
            RdotSampling::Midpoint => r - 0.5 * dr,
        };
        let h_prev = sol.h_values[n - 1];
        let guess = if n >= 2 { 2.0 * h_prev - sol.h_values[n - 2] } else { h_prev };
        let roots = radial_roots(p, h_prev, rdot(r_s) * dr);
        sol.r_grid.push(r);
        sol.roots.push(roots);
        match roots {
            Some(rs) => sol.h_values.push(nearest(rs, guess)),
            None => {
                sol.h_values.push(f64::NAN);
                sol.r_terminate = Some(r);
                break;
            }
        }
    }
    Ok(sol)
}

/// Radial and angular velocity of the field at polar `(r, theta)`.
pub fn polar_velocity<F: VectorField + ?Sized>(field: &F, r: f64, theta: f64) -> (f64, f64) {
    let (s, c) = theta.sin_cos();
    let v = field.rhs(Vec2::new(r * c, r * s));
    (v.x * c + v.y * s, (v.y * c - v.x * s) / r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarGrid {
    pub dr: f64,
    pub r_max: f64,
    pub n_theta: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Forward2d {
    pub r: Vec<f64>,
    pub theta: Vec<f64>,
    /// `h[i][j]` at `(r[i], theta[j])`; NaN where invalid.
    pub h: Vec<Vec<f64>>,
    pub valid: Vec<Vec<bool>>,
}

impl Forward2d {
    pub fn point(&self, i: usize, j: usize) -> Vec2 {
        let (s, c) = self.theta[j].sin_cos();
        Vec2::new(self.r[i] * c, self.r[i] * s)
    }
}

/// Marches outward ring by ring. The angular term is frozen at the previous
/// ring with an upwind difference in theta (by the sign of the angular
/// velocity), which turns each node into the radial quadratic with an
/// effective radial velocity
/// `rdot + thetadot H_theta / H_r - p H_theta^2 / (r^2 H_r)`.
/// A node is invalid when it has no real root, depends on an invalid
/// node, or blows past `10 p0 / q`.
///
/// The coupling is explicit: where `|thetadot| dr / (p H_r dtheta)` exceeds
/// one (small radii, fine angular grids) perturbations grow and the mask
/// collapses.
pub fn solve_forward_2d<F: VectorField + ?Sized>(field: &F, p: PLinear, grid: &PolarGrid) -> Result<Forward2d> {
    p.validate()?;
    validate_grid(grid.dr, grid.r_max)?;
    if grid.n_theta < 3 {
        return Err(Error::InvalidParameter(format!("n_theta must be at least 3, got {}", grid.n_theta)));
    }
    let nr = (grid.r_max / grid.dr).round() as usize + 1;
    let nt = grid.n_theta;
    let dr = grid.dr;
    let dth = 2.0 * PI / nt as f64;
    let r: Vec<f64> = (0..nr).map(|i| i as f64 * dr).collect();
    let theta: Vec<f64> = (0..nt).map(|j| j as f64 * dth).collect();
    let blowup = 10.0 * (p.p0 / p.q).abs();

    let mut h = vec![vec![0.0; nt]];
    let mut valid = vec![vec![true; nt]];
    for n in 1..nr {
        let r_s = r[n] - 0.5 * dr;
        let mut row = vec![f64::NAN; nt];
        let mut ok = vec![false; nt];
        for j in 0..nt {
            let (rdot, thdot) = polar_velocity(field, r_s, theta[j]);
            let prev = &h[n - 1];
            let prev_ok = &valid[n - 1];
            // Marching in r, H_theta is transported with speed
            // thdot / (p H_r): look downstream in theta for thdot > 0.
            let nb = if thdot > 0.0 { (j + 1) % nt } else { (j + nt - 1) % nt };
            if !prev_ok[j] || !prev_ok[nb] {
                continue;
            }
            let d = if thdot > 0.0 { (prev[nb] - prev[j]) / dth } else { (prev[j] - prev[nb]) / dth };
            let (slope, guess) = if n >= 2 {
                if !valid[n - 2][j] {
                    continue;
                }
                let a = (prev[j] - h[n - 2][j]) / dr;
                (a, prev[j] + a * dr)
            } else {
                (0.0, prev[j])
            };
            let correction = if slope != 0.0 {
                (thdot * d - p.eval(prev[j]) * d * d / (r_s * r_s)) / slope
            } else {
                0.0
            };
            let Some(roots) = radial_roots(p, prev[j], (rdot + correction) * dr) else { continue };
            let value = nearest(roots, guess);
            if value.abs() > blowup || !value.is_finite() {
                continue;
            }
            row[j] = value;
            ok[j] = true;
        }
        h.push(row);
        valid.push(ok);
    }
    Ok(Forward2d { r, theta, h, valid })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialRecovery {
    pub r: Vec<f64>,
    pub psi: Vec<f64>,
    pub h: Vec<f64>,
    /// Index of the ψ maximum, where the H branch switches.
    pub switch_index: usize,
}

/// With `p = 1` the scheme reduces to `psi_n = psi_{n-1} + rdot dr`;
/// H follows from `psi = H (beta - H)`, taking the lower root up to the
/// maximum of ψ and the upper root beyond it.
pub fn recover_potential(rdot: impl Fn(f64) -> f64, dr: f64, r_max: f64, beta: f64) -> Result<PotentialRecovery> {
    validate_grid(dr, r_max)?;
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
    }
    let n = (r_max / dr).round() as usize;
    let r: Vec<f64> = (0..=n).map(|i| i as f64 * dr).collect();
    let mut psi = Vec::with_capacity(n + 1);
    psi.push(0.0);
    for i in 1..=n {
        psi.push(psi[i - 1] + rdot(r[i - 1]) * dr);
    }
    let switch_index = psi
        .iter()
        .enumerate()
        .fold(0, |best, (i, v)| if *v > psi[best] { i } else { best });
    let h = psi
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let mut disc = beta * beta - 4.0 * v;
            if disc < 0.0 {
                if disc < -1e-9 {
                    return Err(Error::BranchDomain { value: disc });
                }
                disc = 0.0;
            }
            let s = if i <= switch_index { -1.0 } else { 1.0 };
            Ok(0.5 * (beta + s * disc.sqrt()))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(PotentialRecovery { r, psi, h, switch_index })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{make_model, AnalyticForm, ModelKind, ModelSpec};

    const P: PLinear = PLinear { p0: 0.5, q: 0.1 };

    fn symm_rdot(k: f64, beta: f64) -> impl Fn(f64) -> f64 {
        move |r| k * r * (beta - r * r)
    }

    #[test]
    fn first_node_roots() {
        let dr = 1e-3;
        let sol = solve_radial(|_| P.p0 - P.q * dr, P, dr, 0.01).unwrap();
        let (lo, hi) = sol.roots[1].unwrap();
        assert!((lo - dr).abs() < 1e-9 && (hi - (P.h_zero() - dr)).abs() < 1e-9);
        assert_eq!(sol.h_values[0], 0.0);
    }

    #[test]
    fn vieta_at_every_node() {
        let dr = 1e-3;
        let sol = solve_radial(symm_rdot(0.05, 10.0), P, dr, 4.0).unwrap();
        for n in 1..sol.valid_len() {
            let (lo, hi) = sol.roots[n].unwrap();
            let hp = sol.h_values[n - 1];
            let rdot = symm_rdot(0.05, 10.0)(sol.r_grid[n] - 0.5 * dr);
            assert!((lo + hi - (P.p0 + P.q * hp) / P.q).abs() < 1e-9);
            assert!((lo * hi - (rdot * dr + P.p0 * hp) / P.q).abs() < 1e-9);
        }
    }

    #[test]
    fn radial_branch_matches_half_r_squared() {
        let beta: f64 = 10.0;
        let sol = solve_radial(symm_rdot(0.05, beta), P, 1e-3, 4.0).unwrap();
        let rt = sol.r_terminate.expect("terminates");
        assert!(rt < beta.sqrt() && rt >= 0.95 * beta.sqrt(), "{rt}");
        let mut worst = 0.0f64;
        for (r, h) in sol.r_grid.iter().zip(&sol.h_values) {
            if *r >= 0.1 && *r <= 0.9 * beta.sqrt() {
                worst = worst.max((h - 0.5 * r * r).abs() / (0.5 * r * r));
            }
        }
        assert!(worst < 0.01, "{worst}");
        let increasing = sol.h_values[..sol.valid_len()].windows(2).all(|w| w[1] >= w[0]);
        assert!(increasing);
    }

    #[test]
    fn halving_dr_halves_the_error() {
        let err = |dr: f64| {
            let sol = solve_radial(symm_rdot(0.05, 10.0), P, dr, 4.0).unwrap();
            sol.r_grid
                .iter()
                .zip(&sol.h_values)
                .filter(|(r, _)| **r >= 0.1 && **r <= 2.5)
                .map(|(r, h)| (h - 0.5 * r * r).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(2e-3) / err(1e-3);
        assert!((1.7..=2.3).contains(&ratio), "{ratio}");
    }

    #[test]
    fn node_sampling_is_less_accurate() {
        let beta: f64 = 10.0;
        let run = |s| solve_radial_with(symm_rdot(0.05, beta), P, 1e-3, 4.0, s).unwrap().h_at(1.0).unwrap();
        assert!((run(RdotSampling::Midpoint) - 0.5).abs() < (run(RdotSampling::Node) - 0.5).abs());
    }

    #[test]
    fn rejects_degenerate_p() {
        assert!(solve_radial(|r| r, PLinear { p0: 1.0, q: 0.0 }, 1e-3, 1.0).is_err());
        assert!(solve_radial(|r| r, P, -1.0, 1.0).is_err());
    }

    #[test]
    fn symmetric_2d_matches_radial_rays() {
        let m = make_model(&ModelSpec::new(ModelKind::SymmRad).with("k", 0.05)).unwrap();
        let grid = PolarGrid { dr: 1e-3, r_max: 3.5, n_theta: 16 };
        let sol2 = solve_forward_2d(&m, P, &grid).unwrap();
        let rad = solve_radial(|r| polar_velocity(&m, r, 0.0).0, P, 1e-3, 3.5).unwrap();
        let nv = rad.valid_len();
        for j in 0..grid.n_theta {
            for i in 0..nv {
                assert!((sol2.h[i][j] - rad.h_values[i]).abs() < 1e-9, "ray {j}, node {i}: {} vs {}", sol2.h[i][j], rad.h_values[i]);
            }
            for i in nv..sol2.r.len() {
                assert!(!sol2.valid[i][j]);
            }
        }
    }

    #[test]
    fn asymm_2d_correlates_near_origin() {
        let m = make_model(&ModelSpec::new(ModelKind::Asymm)).unwrap();
        let (k, beta) = (0.01, 10.0);
        let p = PLinear { p0: k * beta, q: 2.0 * k };
        let grid = PolarGrid { dr: 1e-3, r_max: 0.75, n_theta: 16 };
        let sol = solve_forward_2d(&m, p, &grid).unwrap();
        let (mut est, mut tru) = (Vec::new(), Vec::new());
        for i in 1..sol.r.len() {
            for j in 0..grid.n_theta {
                if sol.valid[i][j] {
                    est.push(sol.h[i][j]);
                    tru.push(m.h(sol.point(i, j)));
                }
            }
        }
        assert!(est.len() > sol.r.len() * grid.n_theta / 2);
        let c = pearson(&est, &tru);
        assert!(c > 0.99, "{c}");
    }

    fn pearson(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let ma = a.iter().sum::<f64>() / n;
        let mb = b.iter().sum::<f64>() / n;
        let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
        let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
        cov / (va * vb).sqrt()
    }

    #[test]
    fn potential_recovery_symm_rad() {
        let beta: f64 = 10.0;
        let rec = recover_potential(symm_rdot(1.0, beta), 1e-3, 0.95 * beta.sqrt(), beta).unwrap();
        assert_eq!((rec.psi[0], rec.h[0]), (0.0, 0.0));
        let scale = beta * beta / 4.0;
        for (r, psi) in rec.r.iter().zip(&rec.psi) {
            let exact = 0.5 * r * r * (beta - 0.5 * r * r);
            assert!((psi - exact).abs() < 0.01 * scale);
        }
        let full = recover_potential(symm_rdot(1.0, beta), 1e-3, 4.0, beta).unwrap();
        let peak = full.psi[full.switch_index];
        assert!((peak - scale).abs() < 0.01 * scale);
        assert!((full.h[full.switch_index] - beta / 2.0).abs() < 0.1);
        let r_out = full.r[full.r.len() - 1];
        assert!((full.h[full.r.len() - 1] - 0.5 * r_out * r_out).abs() < 0.1);
    }

    #[test]
    fn potential_domain_error() {
        let err = recover_potential(|_| 100.0, 1e-2, 1.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::BranchDomain { .. }));
    }
}
