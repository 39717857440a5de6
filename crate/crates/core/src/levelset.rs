//! Reconstruction of contours of H by tracing the pseudo-complement of the
//! velocity, starting from the limit cycle.
//!
//! Each new contour is traced against the previous one (the reference). At
//! every step the distance vectors to nearby reference points give candidate
//! gradients of magnitude `|dH| / |ds|`; the prescribed `p` of the target
//! contour and the magnitude condition `|x'| = |kappa| |grad H|` fix `|w|`,
//! and the candidate whose angle to the velocity best matches
//! `atan2(w, p)` wins. The point then moves by `epsilon` along
//! `R kappa^-1 x'`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::flow::LimitCycle;
use crate::geometry::{
    arc_length_stations, contains, diameter, interpolate_closed, mean_std, nearest_index,
    outward_normal, signed_area, winding_number,
};
use crate::kappa::{apply_kappa, perp, KappaForm};
use crate::Vec2;

/// Distance below which a point counts as lying on the reference.
pub const COINCIDENT_TOL: f64 = 1e-9;

/// One closed contour of H.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSet {
    /// 0 for the limit cycle, negative inward.
    pub level_index: i32,
    pub p_level: f64,
    pub h_assigned: f64,
    pub points: Vec<Vec2>,
    /// Estimated `w` at each point; NaN where no estimate exists.
    pub w_estimates: Vec<f64>,
    /// Selected gradient candidate at each point.
    pub grad_estimates: Vec<Vec2>,
    /// Gap between the start and the end of the final traced cycle.
    pub closure_error: f64,
}

impl LevelSet {
    pub fn kappa_at(&self, i: usize) -> KappaForm {
        KappaForm::new(self.p_level, self.w_estimates[i])
    }

    pub fn orientation(&self) -> i32 {
        if signed_area(&self.points) >= 0.0 {
            1
        } else {
            -1
        }
    }
}

/// A gradient guess from one reference point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub index: usize,
    /// `|point - ref_j|`.
    pub ds: f64,
    /// Unit vector from `ref_j` to the point.
    pub v: Vec2,
    /// `dH / ds * v`: points up the H landscape whatever the sign of `dH`.
    pub grad: Vec2,
}

fn candidate(point: Vec2, reference: Vec2, index: usize, dh: f64) -> Result<Candidate> {
    let d = point - reference;
    let ds = d.norm();
    if ds < COINCIDENT_TOL {
        return Err(Error::CoincidentPoint { index });
    }
    let v = d / ds;
    Ok(Candidate { index, ds, v, grad: v * (dh / ds) })
}

/// Candidate gradients from every reference point. `dh` is the H step from
/// the reference to `point`.
pub fn estimate_gradient_candidates(point: Vec2, reference: &[Vec2], dh: f64) -> Result<Vec<Candidate>> {
    if dh == 0.0 {
        return Err(Error::InvalidParameter("dH must be non-zero".into()));
    }
    reference
        .iter()
        .enumerate()
        .map(|(j, r)| candidate(point, *r, j, dh))
        .collect()
}

/// The `k` candidates with the smallest `ds`, ordered by reference index.
/// Distant reference points can satisfy the angle condition as well, so the
/// matching is meant to see only the neighbourhood of the point.
pub fn nearest_candidates(point: Vec2, reference: &[Vec2], dh: f64, k: usize) -> Result<Vec<Candidate>> {
    let mut all = estimate_gradient_candidates(point, reference, dh)?;
    all.sort_by(|a, b| a.ds.total_cmp(&b.ds).then(a.index.cmp(&b.index)));
    all.truncate(k);
    all.sort_by_key(|c| c.index);
    Ok(all)
}

/// Wraps an angle to `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut a = a % (2.0 * PI);
    if a <= -PI {
        a += 2.0 * PI;
    } else if a > PI {
        a -= 2.0 * PI;
    }
    a
}

/// Result of the angle matching at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WEstimate {
    pub w: f64,
    pub grad: Vec2,
    /// Index of the winning reference point (the start of the refined
    /// segment when the winner lies between two points).
    pub index: usize,
    /// Signed angle mismatch `alpha_delta - alpha_r` of the winner.
    pub mismatch: f64,
}

/// Both signed `w` for one gradient guess, with their angle mismatches.
/// `None` when `|x'|^2 ds^2 / dH^2 < p^2`; the deficit is returned instead.
fn w_options(vel_angle: f64, vel_norm2: f64, grad: Vec2, ds: f64, p: f64, dh: f64) -> std::result::Result<[(f64, f64); 2], f64> {
    let disc = vel_norm2 * ds * ds / (dh * dh) - p * p;
    if disc < 0.0 {
        return Err(-disc);
    }
    let root = disc.sqrt();
    let alpha_delta = wrap_angle(vel_angle - grad.y.atan2(grad.x));
    let option = |w: f64| (w, wrap_angle(alpha_delta - w.atan2(p)));
    Ok([option(root), option(-root)])
}

/// Chooses among `candidates` the `(w, grad)` pair whose rotation angle
/// `atan2(w, p)` best matches the angle from the gradient to the velocity.
/// Ties go to the smaller `ds`.
pub fn estimate_w(velocity: Vec2, candidates: &[Candidate], p_level: f64, dh: f64) -> Result<WEstimate> {
    let vel_angle = velocity.y.atan2(velocity.x);
    let vel_norm2 = velocity.norm_squared();
    let mut best: Option<(f64, f64, WEstimate)> = None;
    let mut deficit = f64::INFINITY;
    for c in candidates {
        match w_options(vel_angle, vel_norm2, c.grad, c.ds, p_level, dh) {
            Err(d) => deficit = deficit.min(d),
            Ok(opts) => {
                for (w, mismatch) in opts {
                    let obj = mismatch * mismatch;
                    let better = match &best {
                        None => true,
                        Some((o, ds, _)) => obj < *o || (obj == *o && c.ds < *ds),
                    };
                    if better {
                        best = Some((obj, c.ds, WEstimate { w, grad: c.grad, index: c.index, mismatch }));
                    }
                }
            }
        }
    }
    best.map(|b| b.2).ok_or(Error::NoValidW { deficit })
}

/// `R kappa^-1 v`: equals `R grad H`, a contour tangent, when `v = kappa grad H`.
pub fn pseudo_complement(velocity: Vec2, kappa: KappaForm) -> Result<Vec2> {
    Ok(perp(apply_kappa(kappa.inverse()?, velocity)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceOptions {
    pub epsilon: f64,
    pub cycles: usize,
    /// Number of reference points around the nearest one searched per step;
    /// `None` scans the whole reference.
    pub window: Option<usize>,
    /// Subdivisions per reference segment when refining the winner.
    pub subdivisions: usize,
    pub n_reference: usize,
    pub max_steps: usize,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            epsilon: 1e-3,
            cycles: 3,
            window: Some(64),
            subdivisions: 16,
            n_reference: 1024,
            max_steps: 10_000_000,
        }
    }
}

impl TraceOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.cycles == 0 {
            return Err(Error::InvalidParameter("cycles must be at least 1".into()));
        }
        if self.n_reference < 16 {
            return Err(Error::InvalidParameter(format!(
                "n_reference must be at least 16, got {}",
                self.n_reference
            )));
        }
        if matches!(self.window, Some(w) if w < 3) {
            return Err(Error::InvalidParameter("window must cover at least 3 points".into()));
        }
        Ok(())
    }
}

/// Per-step matching against one reference contour.
struct Matcher<'a> {
    reference: &'a [Vec2],
    p: f64,
    dh: f64,
    window: Option<usize>,
    subdivisions: usize,
}

impl Matcher<'_> {
    fn point_on(&self, j: usize, u: f64) -> (Vec2, usize) {
        // u in [-1, 1]: negative on the segment before j, positive after.
        let n = self.reference.len();
        let r = self.reference;
        if u < 0.0 {
            let a = r[(j + n - 1) % n];
            (r[j] + (a - r[j]) * (-u), (j + n - 1) % n)
        } else {
            let b = r[(j + 1) % n];
            (r[j] + (b - r[j]) * u, j)
        }
    }

    fn candidates(&self, x: Vec2, near: usize) -> Result<Vec<Candidate>> {
        let n = self.reference.len();
        match self.window {
            Some(k) if k < n => {
                let start = near + n - k / 2;
                (0..k)
                    .map(|i| {
                        let j = (start + i) % n;
                        candidate(x, self.reference[j], j, self.dh)
                    })
                    .collect()
            }
            _ => estimate_gradient_candidates(x, self.reference, self.dh),
        }
    }

    /// Discrete winner, then a root search of the angle mismatch along the
    /// two reference segments next to it.
    fn estimate(&self, x: Vec2, velocity: Vec2, near: usize) -> Result<WEstimate> {
        let cands = self.candidates(x, near)?;
        let coarse = estimate_w(velocity, &cands, self.p, self.dh)?;
        if self.subdivisions == 0 {
            return Ok(coarse);
        }
        let vel_angle = velocity.y.atan2(velocity.x);
        let vel_norm2 = velocity.norm_squared();
        let eval = |u: f64, sign: usize| -> Option<(f64, Vec2, f64, usize)> {
            let (q, seg) = self.point_on(coarse.index, u);
            let c = candidate(x, q, seg, self.dh).ok()?;
            let opts = w_options(vel_angle, vel_norm2, c.grad, c.ds, self.p, self.dh).ok()?;
            let (w, m) = opts[sign];
            Some((w, c.grad, m, seg))
        };

        let m = self.subdivisions as i64;
        let mut best = coarse;
        for sign in 0..2 {
            let samples: Vec<(f64, Option<(f64, Vec2, f64, usize)>)> =
                (-m..=m).map(|k| {
                    let u = k as f64 / m as f64;
                    (u, eval(u, sign))
                }).collect();
            for s in &samples {
                if let (_, Some((w, grad, mis, seg))) = s {
                    if mis.abs() < best.mismatch.abs() {
                        best = WEstimate { w: *w, grad: *grad, index: *seg, mismatch: *mis };
                    }
                }
            }
            for pair in samples.windows(2) {
                let (ua, Some(a)) = pair[0] else { continue };
                let (ub, Some(b)) = pair[1] else { continue };
                if a.2.signum() == b.2.signum() || a.2.abs() > 1.0 || b.2.abs() > 1.0 {
                    continue;
                }
                let (mut lo, mut hi, mut f_lo) = (ua, ub, a.2);
                let mut found = None;
                for _ in 0..40 {
                    let mid = 0.5 * (lo + hi);
                    let Some(e) = eval(mid, sign) else { break };
                    found = Some(e);
                    if e.2.signum() == f_lo.signum() {
                        lo = mid;
                        f_lo = e.2;
                    } else {
                        hi = mid;
                    }
                }
                if let Some((w, grad, mis, seg)) = found {
                    if mis.abs() < best.mismatch.abs() {
                        best = WEstimate { w, grad, index: seg, mismatch: mis };
                    }
                }
            }
        }
        Ok(best)
    }

    /// Unit step direction along the contour, oriented with the flow.
    fn direction(&self, velocity: Vec2, est: &WEstimate) -> Result<Vec2> {
        let mut t = pseudo_complement(velocity, KappaForm::new(self.p, est.w))?;
        if t.dot(&velocity) < 0.0 {
            t = -t;
        }
        let n = t.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::SingularKappa);
        }
        Ok(t / n)
    }

    fn nearest_from(&self, x: Vec2, near: usize) -> usize {
        let n = self.reference.len();
        let k = self.window.unwrap_or(n).min(n);
        let start = near + n - k / 2;
        let mut best = (near, (self.reference[near] - x).norm_squared());
        for i in 0..k {
            let j = (start + i) % n;
            let d = (self.reference[j] - x).norm_squared();
            if d < best.1 {
                best = (j, d);
            }
        }
        best.0
    }
}

/// Places the start point on the normal through reference point 0, where
/// the oriented step direction stops pushing away from the reference and
/// starts pulling back (a stable balance of the tracer).
fn seed_point<F: VectorField + ?Sized>(field: &F, matcher: &Matcher<'_>, orientation: i32) -> Option<Vec2> {
    // Station 0 first; other stations help where |w| is small next to |p| and
    // the drift only touches zero.
    let n = matcher.reference.len();
    (0..SEED_STATIONS).find_map(|k| seed_at(field, matcher, orientation, k * n / SEED_STATIONS))
}

const SEED_STATIONS: usize = 8;

fn seed_at<F: VectorField + ?Sized>(
    field: &F,
    matcher: &Matcher<'_>,
    orientation: i32,
    i: usize,
) -> Option<Vec2> {
    let r = matcher.reference;
    let normal = outward_normal(r, i, orientation) * matcher.dh.signum();
    let reach = 0.5 * diameter(r);
    let drift = |d: f64| -> f64 {
        let x = r[i] + normal * d;
        let v = field.rhs(x);
        let near = matcher.nearest_from(x, i);
        match matcher.estimate(x, v, near).and_then(|e| matcher.direction(v, &e)) {
            Ok(t) => t.dot(&normal),
            // Too close to the reference for a real w: move away.
            Err(_) => 1.0,
        }
    };
    let mut d = 1e-4 * reach;
    let mut prev = (d, drift(d));
    while d < reach {
        d *= 1.05;
        let cur = (d, drift(d));
        if prev.1 > 0.0 && cur.1 <= 0.0 {
            let (mut lo, mut hi) = (prev.0, cur.0);
            for _ in 0..50 {
                let mid = 0.5 * (lo + hi);
                if drift(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Some(r[i] + normal * (0.5 * (lo + hi)));
        }
        prev = cur;
    }
    None
}

fn partial_level(level_index: i32, p: f64, h: f64, trace: &[(Vec2, f64, Vec2)]) -> Box<LevelSet> {
    Box::new(LevelSet {
        level_index,
        p_level: p,
        h_assigned: h,
        points: trace.iter().map(|t| t.0).collect(),
        w_estimates: trace.iter().map(|t| t.1).collect(),
        grad_estimates: trace.iter().map(|t| t.2).collect(),
        closure_error: f64::NAN,
    })
}

/// Traces the contour one `dh` step away from `reference` (inward when
/// `dh < 0`), on which `p = p_level`. The final of `opts.cycles` windings
/// around the origin is resampled to `opts.n_reference` points.
pub fn trace_level<F: VectorField + ?Sized>(
    field: &F,
    reference: &LevelSet,
    p_level: f64,
    dh: f64,
    opts: &TraceOptions,
) -> Result<LevelSet> {
    opts.validate()?;
    if dh == 0.0 || !dh.is_finite() {
        return Err(Error::InvalidParameter(format!("dH must be non-zero, got {dh}")));
    }
    if reference.points.len() < 3 {
        return Err(Error::Shape("reference contour needs at least 3 points".into()));
    }
    let level_index = reference.level_index + if dh < 0.0 { -1 } else { 1 };
    let h_assigned = reference.h_assigned + dh;
    let matcher = Matcher {
        reference: &reference.points,
        p: p_level,
        dh,
        window: opts.window,
        subdivisions: opts.subdivisions,
    };
    let abort = |steps: usize, reason: String, trace: &[(Vec2, f64, Vec2)]| Error::AbortedTrace {
        steps,
        reason,
        partial: partial_level(level_index, p_level, h_assigned, trace),
    };

    let Some(mut x) = seed_point(field, &matcher, reference.orientation()) else {
        return Err(abort(0, "no stable start point along the reference normal".into(), &[]));
    };
    let mut near = nearest_index(&reference.points, x);
    let turn = 2.0 * PI;
    let record_from = turn * (opts.cycles - 1) as f64;
    let stop_at = turn * opts.cycles as f64;
    let mut winding = 0.0f64;
    // Every step is kept so an abort can hand back what was traced so far.
    let mut path: Vec<(Vec2, f64, Vec2)> = Vec::new();
    let mut record_start: Option<usize> = None;

    for steps in 0..opts.max_steps {
        let v = field.rhs(x);
        if !v.x.is_finite() || !v.y.is_finite() {
            return Err(abort(steps, format!("non-finite velocity at ({}, {})", x.x, x.y), &path));
        }
        let est = match matcher.estimate(x, v, near) {
            Ok(e) => e,
            Err(e) => return Err(abort(steps, e.to_string(), &path)),
        };
        let t = match matcher.direction(v, &est) {
            Ok(t) => t,
            Err(e) => return Err(abort(steps, e.to_string(), &path)),
        };
        if record_start.is_none() && winding.abs() >= record_from {
            record_start = Some(path.len());
        }
        path.push((x, est.w, est.grad));
        let next = x + t * opts.epsilon;
        winding += wrap_angle(next.y.atan2(next.x) - x.y.atan2(x.x));
        near = matcher.nearest_from(next, near);
        x = next;
        if winding.abs() >= stop_at {
            let cycle = &path[record_start.unwrap_or(0)..];
            let closure_error = (x - cycle[0].0).norm();
            return finish(level_index, p_level, h_assigned, cycle, closure_error, opts.n_reference);
        }
    }
    Err(Error::Stagnation { steps: opts.max_steps, winding })
}

fn finish(
    level_index: i32,
    p_level: f64,
    h_assigned: f64,
    trace: &[(Vec2, f64, Vec2)],
    closure_error: f64,
    n: usize,
) -> Result<LevelSet> {
    let pts: Vec<Vec2> = trace.iter().map(|t| t.0).collect();
    let ws: Vec<f64> = trace.iter().map(|t| t.1).collect();
    let gs: Vec<Vec2> = trace.iter().map(|t| t.2).collect();
    let stations = arc_length_stations(&pts, n)?;
    Ok(LevelSet {
        level_index,
        p_level,
        h_assigned,
        points: stations.iter().map(|s| interpolate_closed(&pts, *s)).collect(),
        w_estimates: stations.iter().map(|s| interpolate_closed(&ws, *s)).collect(),
        grad_estimates: stations.iter().map(|s| interpolate_closed(&gs, *s)).collect(),
        closure_error,
    })
}

/// Fills in `w` and the gradient on `level` by matching against an adjacent
/// `reference`; `dh` is the H step from the reference to `level`.
pub fn estimate_along<F: VectorField + ?Sized>(
    field: &F,
    level: &mut LevelSet,
    reference: &[Vec2],
    dh: f64,
    opts: &TraceOptions,
) -> Result<()> {
    let matcher = Matcher {
        reference,
        p: level.p_level,
        dh,
        window: opts.window,
        subdivisions: opts.subdivisions,
    };
    let mut ws = Vec::with_capacity(level.points.len());
    let mut gs = Vec::with_capacity(level.points.len());
    for x in &level.points {
        let near = nearest_index(reference, *x);
        let est = matcher.estimate(*x, field.rhs(*x), near)?;
        ws.push(est.w);
        gs.push(est.grad);
    }
    level.w_estimates = ws;
    level.grad_estimates = gs;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagateOptions {
    pub dh: f64,
    pub dp: f64,
    pub n_inward: usize,
    pub n_outward: usize,
    /// H assigned to the limit cycle.
    pub h_lc: f64,
    pub trace: TraceOptions,
}

impl PropagateOptions {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("dH", self.dh), ("dP", self.dp)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !self.h_lc.is_finite() {
            return Err(Error::InvalidParameter("h_lc must be finite".into()));
        }
        self.trace.validate()
    }
}

/// All contours of one run, ordered by `level_index`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSetRun {
    pub options: PropagateOptions,
    pub levels: Vec<LevelSet>,
    pub h_limit_cycle: f64,
}

impl LevelSetRun {
    pub fn level(&self, index: i32) -> Option<&LevelSet> {
        self.levels.iter().find(|l| l.level_index == index)
    }
}

/// Completed levels plus the error that stopped propagation, if any.
#[derive(Debug)]
pub struct Propagation {
    pub run: LevelSetRun,
    pub error: Option<Error>,
    /// Set when inward propagation stopped at the fixed-point neighbourhood.
    pub stopped_near_center: bool,
}

/// Traces `n_inward` contours inside and `n_outward` outside the limit cycle.
/// Level `l` gets `p = -l dP` and `H = H_LC + l dH`, so `p > 0` inside.
pub fn propagate<F: VectorField + ?Sized>(field: &F, cycle: &LimitCycle, opts: &PropagateOptions) -> Result<Propagation> {
    opts.validate()?;
    let n_ref = opts.trace.n_reference;
    let points = cycle.resampled(n_ref)?;
    let mut lc = LevelSet {
        level_index: 0,
        p_level: 0.0,
        h_assigned: opts.h_lc,
        w_estimates: vec![f64::NAN; points.len()],
        grad_estimates: vec![Vec2::new(f64::NAN, f64::NAN); points.len()],
        points,
        closure_error: cycle.closure_error,
    };

    let mut inner: Vec<LevelSet> = Vec::new();
    let mut outer: Vec<LevelSet> = Vec::new();
    let mut error = None;
    let mut stopped_near_center = false;

    // An aborted trace ends its direction only.
    for (count, sign, out) in [(opts.n_inward, -1.0, &mut inner), (opts.n_outward, 1.0, &mut outer)] {
        for _ in 0..count {
            let reference = out.last().unwrap_or(&lc);
            if sign < 0.0 && diameter(&reference.points) < 10.0 * opts.trace.epsilon {
                stopped_near_center = true;
                break;
            }
            let index = reference.level_index + sign as i32;
            let p = -(index as f64) * opts.dp;
            match trace_level(field, reference, p, sign * opts.dh, &opts.trace) {
                Ok(level) => {
                    let done = sign < 0.0 && diameter(&level.points) < 10.0 * opts.trace.epsilon;
                    out.push(level);
                    if done {
                        stopped_near_center = true;
                        break;
                    }
                }
                Err(e) => {
                    error.get_or_insert(e);
                    break;
                }
            }
        }
    }

    if let Some(neighbour) = inner.first().or(outer.first()) {
        let dh = if neighbour.level_index < 0 { opts.dh } else { -opts.dh };
        let reference = neighbour.points.clone();
        if let Err(e) = estimate_along(field, &mut lc, &reference, dh, &opts.trace) {
            error.get_or_insert(e);
        }
    }

    let mut levels: Vec<LevelSet> = inner.into_iter().rev().collect();
    levels.push(lc);
    levels.extend(outer);
    Ok(Propagation {
        run: LevelSetRun { options: *opts, levels, h_limit_cycle: opts.h_lc },
        error,
        stopped_near_center,
    })
}

/// Statistics of a known H along a contour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelError {
    pub mean: f64,
    pub std: f64,
    /// Largest `|H(x) - h_assigned|`.
    pub max_abs_dev: f64,
}

pub fn level_error(level: &LevelSet, h: impl Fn(Vec2) -> f64) -> LevelError {
    let values: Vec<f64> = level.points.iter().map(|p| h(*p)).collect();
    let (mean, std) = mean_std(&values);
    let max_abs_dev = values.iter().map(|v| (v - level.h_assigned).abs()).fold(0.0, f64::max);
    LevelError { mean, std, max_abs_dev }
}

/// Pointwise consistency of the estimates on one contour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelDiagnostics {
    /// Fraction of points with orthogonality residual below 0.05.
    pub orthogonality_pass: f64,
    pub max_orthogonality: f64,
    /// Fraction of points where `kappa grad` reproduces the velocity within 5%.
    pub reconstruction_pass: f64,
    pub max_reconstruction: f64,
    pub winding: i32,
}

pub const ORTHOGONALITY_TOL: f64 = 0.05;
pub const RECONSTRUCTION_TOL: f64 = 0.05;

/// `|g . (v - p g)| / (|g| |v|)`: vanishes when the rotational part of the
/// velocity is orthogonal to the gradient.
pub fn orthogonality_residual(velocity: Vec2, grad: Vec2, p: f64) -> f64 {
    (grad.dot(&(velocity - grad * p))).abs() / (grad.norm() * velocity.norm())
}

pub fn diagnostics<F: VectorField + ?Sized>(field: &F, level: &LevelSet) -> LevelDiagnostics {
    let n = level.points.len();
    let mut ortho_ok = 0usize;
    let mut recon_ok = 0usize;
    let mut max_o = 0.0f64;
    let mut max_r = 0.0f64;
    let mut counted = 0usize;
    for i in 0..n {
        let g = level.grad_estimates[i];
        let w = level.w_estimates[i];
        if !w.is_finite() || !g.x.is_finite() {
            continue;
        }
        counted += 1;
        let v = field.rhs(level.points[i]);
        let o = orthogonality_residual(v, g, level.p_level);
        let r = (apply_kappa(level.kappa_at(i), g) - v).norm() / v.norm();
        max_o = max_o.max(o);
        max_r = max_r.max(r);
        ortho_ok += (o < ORTHOGONALITY_TOL) as usize;
        recon_ok += (r < RECONSTRUCTION_TOL) as usize;
    }
    let frac = |k: usize| if counted == 0 { f64::NAN } else { k as f64 / counted as f64 };
    LevelDiagnostics {
        orthogonality_pass: frac(ortho_ok),
        max_orthogonality: max_o,
        reconstruction_pass: frac(recon_ok),
        max_reconstruction: max_r,
        winding: winding_number(&level.points, Vec2::zeros()),
    }
}

/// True if every point of `inner` is enclosed by `outer`.
pub fn nested_inside(inner: &LevelSet, outer: &LevelSet) -> bool {
    inner.points.iter().all(|p| contains(&outer.points, *p))
}
