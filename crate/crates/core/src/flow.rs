//! Fixed-step RK4 integration and limit-cycle detection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::geometry::{hausdorff, resample_closed_curve, signed_area};
use crate::kappa::cross;
use crate::Vec2;

/// States beyond this norm are treated as a blow-up.
const DIVERGENCE_NORM: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub points: Vec<Vec2>,
    pub dt: f64,
    pub t0: f64,
}

impl Trajectory {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.points.len()).map(|i| self.t0 + i as f64 * self.dt)
    }

    pub fn last(&self) -> Vec2 {
        *self.points.last().expect("trajectory is never empty")
    }
}

/// One classical Runge-Kutta step.
#[inline]
pub fn rk4_step<F: VectorField + ?Sized>(field: &F, x: Vec2, dt: f64) -> Vec2 {
    let k1 = field.rhs(x);
    let k2 = field.rhs(x + k1 * (0.5 * dt));
    let k3 = field.rhs(x + k2 * (0.5 * dt));
    let k4 = field.rhs(x + k3 * dt);
    x + (k1 + (k2 + k3) * 2.0 + k4) * (dt / 6.0)
}

fn checked_step<F: VectorField + ?Sized>(field: &F, x: Vec2, dt: f64, step: usize) -> Result<Vec2> {
    let next = rk4_step(field, x, dt);
    if next.x.is_finite() && next.y.is_finite() && next.norm() < DIVERGENCE_NORM {
        Ok(next)
    } else {
        Err(Error::Divergence { step })
    }
}

fn validate_step(dt: f64, x0: Vec2) -> Result<()> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    if !x0.x.is_finite() || !x0.y.is_finite() {
        return Err(Error::InvalidParameter(format!("initial point must be finite, got {x0:?}")));
    }
    Ok(())
}

/// Integrates `n_steps` RK4 steps from `x0`; the result holds `n_steps + 1`
/// points.
pub fn integrate<F: VectorField + ?Sized>(field: &F, x0: Vec2, dt: f64, n_steps: usize) -> Result<Trajectory> {
    match integrate_partial(field, x0, dt, n_steps)? {
        (traj, None) => Ok(traj),
        (_, Some(e)) => Err(e),
    }
}

/// As [`integrate`], but a divergence hands back the points computed before
/// it alongside the error.
pub fn integrate_partial<F: VectorField + ?Sized>(
    field: &F,
    x0: Vec2,
    dt: f64,
    n_steps: usize,
) -> Result<(Trajectory, Option<Error>)> {
    validate_step(dt, x0)?;
    let mut points = Vec::with_capacity(n_steps + 1);
    points.push(x0);
    let mut x = x0;
    for step in 1..=n_steps {
        match checked_step(field, x, dt, step) {
            Ok(next) => x = next,
            Err(e) => return Ok((Trajectory { points, dt, t0: 0.0 }, Some(e))),
        }
        points.push(x);
    }
    Ok((Trajectory { points, dt, t0: 0.0 }, None))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LimitCycleOptions {
    pub seed: [f64; 2],
    pub dt: f64,
    pub transient_time: f64,
    pub closure_tol: f64,
    pub max_loops: usize,
    /// Longest time allowed between two section crossings.
    pub max_time: f64,
    /// Resolution of the cycle when it serves as a level-set reference.
    pub n_reference: usize,
}

impl Default for LimitCycleOptions {
    fn default() -> Self {
        Self {
            seed: [0.1, 0.1],
            dt: 1e-3,
            transient_time: 50.0,
            closure_tol: 1e-4,
            max_loops: 50,
            max_time: 1000.0,
            n_reference: 1024,
        }
    }
}

impl LimitCycleOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("dt", self.dt),
            ("closure_tol", self.closure_tol),
            ("max_time", self.max_time),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.transient_time >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "transient_time must be non-negative, got {}",
                self.transient_time
            )));
        }
        if self.max_loops < 2 {
            return Err(Error::InvalidParameter("max_loops must be at least 2".into()));
        }
        if self.n_reference < 16 {
            return Err(Error::InvalidParameter(format!(
                "n_reference must be at least 16, got {}",
                self.n_reference
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitCycle {
    /// One loop, closure implied (the last point is not repeated).
    pub points: Vec<Vec2>,
    pub period: f64,
    /// +1 counterclockwise, -1 clockwise.
    pub orientation: i32,
    /// Distance between the first point and the point one step past the last.
    pub closure_error: f64,
    /// Hausdorff distance between the last two detected loops.
    pub loop_distance: f64,
}

impl LimitCycle {
    pub fn resampled(&self, n: usize) -> Result<Vec<Vec2>> {
        resample_closed_curve(&self.points, n)
    }
}

/// Integrates past the transient, then cuts the orbit at successive crossings
/// of the half-line from the origin through the post-transient state. Returns
/// the first loop that matches its predecessor within `closure_tol`.
///
/// The returned loop is re-integrated from the last crossing with the step
/// rescaled to divide the period exactly, so that stepping once past the last
/// point lands back on the first.
pub fn find_limit_cycle<F: VectorField + ?Sized>(field: &F, opts: &LimitCycleOptions) -> Result<LimitCycle> {
    opts.validate()?;
    let seed = Vec2::new(opts.seed[0], opts.seed[1]);
    validate_step(opts.dt, seed)?;
    if seed.norm() == 0.0 {
        return Err(Error::InvalidParameter("seed must differ from the fixed point".into()));
    }
    let dt = opts.dt;
    let mut step = 0usize;
    let mut x = seed;
    let n_transient = (opts.transient_time / dt).round() as usize;
    for _ in 0..n_transient {
        step += 1;
        x = checked_step(field, x, dt, step)?;
    }
    if x.norm() < 1e-3 {
        return Err(Error::NoCycle { max_time: opts.transient_time });
    }

    let axis = x / x.norm();
    let sense = cross(x, field.rhs(x)).signum();
    if sense == 0.0 {
        return Err(Error::NoCycle { max_time: opts.max_time });
    }
    let max_steps = (opts.max_time / dt).ceil() as usize;

    // Each loop starts at the interpolated crossing point.
    let mut previous: Option<(Vec<Vec2>, f64)> = None;
    let mut loop_points = vec![x];
    let mut t = 0.0;
    let mut t_cross = 0.0;
    let mut best = f64::INFINITY;
    let mut since_cross = 0usize;
    let mut loops = 0usize;
    loop {
        step += 1;
        since_cross += 1;
        let next = checked_step(field, x, dt, step)?;
        let c0 = sense * cross(axis, x);
        let c1 = sense * cross(axis, next);
        if c0 < 0.0 && c1 >= 0.0 {
            let tau = c0 / (c0 - c1);
            let hit = x + (next - x) * tau;
            if hit.dot(&axis) > 0.0 {
                let t_hit = t + tau * dt;
                let period = t_hit - t_cross;
                let finished = std::mem::replace(&mut loop_points, vec![hit]);
                loops += 1;
                if let Some((prev, _)) = &previous {
                    let d = hausdorff(prev, &finished);
                    best = best.min(d);
                    if d < opts.closure_tol {
                        return close_loop(field, finished[0], period, dt, d);
                    }
                }
                if loops >= opts.max_loops {
                    return Err(Error::NonConvergence { loops, distance: best });
                }
                previous = Some((finished, period));
                t_cross = t_hit;
                since_cross = 0;
            }
        }
        loop_points.push(next);
        x = next;
        t += dt;
        if since_cross > max_steps {
            return Err(Error::NoCycle { max_time: opts.max_time });
        }
    }
}

fn close_loop<F: VectorField + ?Sized>(
    field: &F,
    start: Vec2,
    period: f64,
    dt: f64,
    loop_distance: f64,
) -> Result<LimitCycle> {
    let n = (period / dt).round().max(3.0) as usize;
    let h = period / n as f64;
    let traj = integrate(field, start, h, n)?;
    let mut points = traj.points;
    let end = points.pop().expect("n >= 3");
    let closure_error = (end - points[0]).norm();
    let orientation = if signed_area(&points) >= 0.0 { 1 } else { -1 };
    if let Some(p) = points.iter().find(|p| p.norm() <= 1e-3 || field.rhs(**p).norm() == 0.0) {
        return Err(Error::NumericalDomain { x: p.x, y: p.y });
    }
    Ok(LimitCycle { points, period, orientation, closure_error, loop_distance })
}
