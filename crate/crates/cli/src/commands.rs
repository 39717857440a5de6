use kappa_core::compare::{
    components_from_level, fit_quadratic, linear_forms, sasde_components, variance_report, w_crossings, ComponentStats, SasdePotential,
};
use kappa_core::flow::{find_limit_cycle, integrate_partial};
use kappa_core::geometry::{hausdorff, mean_std};
use kappa_core::hjfd::{polar_velocity, recover_potential, solve_forward_2d, solve_radial_with, PLinear, PolarGrid};
use kappa_core::levelset::{diagnostics, level_error, propagate};
use kappa_core::compare::LinearForms;
use kappa_core::linearize::{decompose_linear, LinearDecompositionDoc};
use kappa_core::{make_model, Error, LevelSet, Model, ModelKind, PropagateOptions};
use serde::Serialize;

use crate::config::{Rdot, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{num, Meta, Sink};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    LimitCycle,
    Decompose,
    Linearize,
    Hj,
    Compare,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::LimitCycle => "limit-cycle",
            Command::Decompose => "decompose",
            Command::Linearize => "linearize",
            Command::Hj => "hj",
            Command::Compare => "compare",
        }
    }
}

fn positive(name: &str, v: f64) -> CliResult<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Validation(format!("{name} must be positive, got {v}")))
    }
}

/// Runs `command`; on success returns the files written.
pub fn run(command: Command, config: &RunConfig) -> CliResult<Vec<std::path::PathBuf>> {
    let mut config = config.clone();
    if command == Command::Compare {
        set_compare_mu(&mut config)?;
    }
    let model = make_model(config.model_spec()?)?;
    // Echo every parameter, defaults included.
    if let Some(spec) = config.model.as_mut() {
        spec.params = model.params().clone();
    }
    let mut sink = Sink::new(config.output_dir(), Meta::new(command.name(), &config))?;
    let outcome = match command {
        Command::Simulate => simulate(&model, &config, &mut sink),
        Command::LimitCycle => limit_cycle(&model, &config, &mut sink),
        Command::Decompose => decompose(&model, &config, &mut sink),
        Command::Linearize => linearize(&model, &config, &mut sink),
        Command::Hj => hj(&model, &config, &mut sink),
        Command::Compare => compare(&model, &config, &mut sink),
    };
    outcome.map(|_| sink.written)
}

fn simulate(model: &Model, config: &RunConfig, sink: &mut Sink) -> CliResult<()> {
    let s = &config.simulate;
    positive("simulate.dt", s.dt)?;
    positive("simulate.t_end", s.t_end)?;
    if s.stride == 0 {
        return Err(CliError::Validation("simulate.stride must be at least 1".into()));
    }
    let n = (s.t_end / s.dt).round() as usize;
    let (traj, err) = integrate_partial(model, s.x0.into(), s.dt, n)?;
    let last = traj.points.len() - 1;
    let rows: Vec<Vec<String>> = traj
        .points
        .iter()
        .zip(traj.times())
        .enumerate()
        .filter(|(i, _)| i % s.stride == 0 || *i == last)
        .map(|(_, (p, t))| vec![num(t), num(p.x), num(p.y)])
        .collect();
    let name = if err.is_some() { "trajectory.partial.csv" } else { "trajectory.csv" };
    sink.csv(name, &[], &["t", "x", "y"], &rows)?;
    err.map_or(Ok(()), |e| Err(e.into()))
}

fn cycle(model: &Model, config: &RunConfig) -> CliResult<kappa_core::LimitCycle> {
    Ok(find_limit_cycle(model, &config.limit_cycle)?)
}

#[derive(Serialize)]
struct HStats {
    mean: f64,
    std: f64,
    max_abs_dev: f64,
}

#[derive(Serialize)]
struct CycleSummary {
    period: f64,
    orientation: i32,
    closure_error: f64,
    loop_distance: f64,
    n_points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    h_true: Option<HStats>,
}

fn limit_cycle(model: &Model, config: &RunConfig, sink: &mut Sink) -> CliResult<()> {
    let lc = cycle(model, config)?;
    let analytic = model.analytic();
    let mut columns = vec!["point_index", "x", "y"];
    if analytic.is_some() {
        columns.push("h_true");
    }
    let rows: Vec<Vec<String>> = lc
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut r = vec![i.to_string(), num(p.x), num(p.y)];
            if let Some(a) = analytic {
                r.push(num(a.h(*p)));
            }
            r
        })
        .collect();
    sink.csv("limit_cycle.csv", &[], &columns, &rows)?;
    let h_true = analytic.map(|a| {
        let h: Vec<f64> = lc.points.iter().map(|p| a.h(*p)).collect();
        let (mean, std) = mean_std(&h);
        let target = model.h_limit_cycle().unwrap_or(mean);
        HStats { mean, std, max_abs_dev: h.iter().map(|v| (v - target).abs()).fold(0.0, f64::max) }
    });
    sink.json(
        "limit_cycle.json",
        &CycleSummary {
            period: lc.period,
            orientation: lc.orientation,
            closure_error: lc.closure_error,
            loop_distance: lc.loop_distance,
            n_points: lc.points.len(),
            h_true,
        },
    )
}

fn propagate_options(model: &Model, config: &RunConfig) -> PropagateOptions {
    let l = &config.levelset;
    PropagateOptions {
        dh: l.dh,
        dp: l.dp,
        n_inward: l.n_inward,
        n_outward: l.n_outward,
        h_lc: l.h_lc.or(model.h_limit_cycle()).unwrap_or(0.0),
        trace: config.trace_options(),
    }
}

fn level_rows(levels: &[&LevelSet]) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for l in levels {
        for (i, (p, w)) in l.points.iter().zip(&l.w_estimates).enumerate() {
            rows.push(vec![
                l.level_index.to_string(),
                num(l.p_level),
                num(l.h_assigned),
                i.to_string(),
                num(p.x),
                num(p.y),
                num(*w),
            ]);
        }
    }
    rows
}

const LEVEL_COLUMNS: [&str; 7] = ["level_index", "p_level", "h_assigned", "point_index", "x", "y", "w_est"];

#[derive(Serialize)]
struct LevelSummary {
    level_index: i32,
    p_level: f64,
    h_assigned: f64,
    closure_error: f64,
    w_mean: f64,
    w_std: f64,
    orthogonality_pass: f64,
    reconstruction_pass: f64,
    winding: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    h_true: Option<HStats>,
}

#[derive(Serialize)]
struct DecomposeSummary {
    h_limit_cycle: f64,
    levels: Vec<LevelSummary>,
    stopped_near_center: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    aborted: Option<String>,
}

fn summarize(model: &Model, l: &LevelSet) -> LevelSummary {
    let d = diagnostics(model, l);
    let (w_mean, w_std) = mean_std(&l.w_estimates);
    LevelSummary {
        level_index: l.level_index,
        p_level: l.p_level,
        h_assigned: l.h_assigned,
        closure_error: l.closure_error,
        w_mean,
        w_std,
        orthogonality_pass: d.orthogonality_pass,
        reconstruction_pass: d.reconstruction_pass,
        winding: d.winding,
        h_true: model.analytic().map(|a| {
            let e = level_error(l, |p| a.h(p));
            HStats { mean: e.mean, std: e.std, max_abs_dev: e.max_abs_dev }
        }),
    }
}

fn decompose(model: &Model, config: &RunConfig, sink: &mut Sink) -> CliResult<()> {
    let lc = cycle(model, config)?;
    let opts = propagate_options(model, config);
    let prop = propagate(model, &lc, &opts)?;
    let mut levels: Vec<&LevelSet> = prop.run.levels.iter().collect();
    let partial = match &prop.error {
        Some(Error::AbortedTrace { partial, .. }) if !partial.points.is_empty() => Some(partial.as_ref()),
        _ => None,
    };
    levels.extend(partial);
    let notes: Vec<String> = partial
        .map(|p| vec![format!("level {} is incomplete: the trace aborted", p.level_index)])
        .unwrap_or_default();
    let name = if prop.error.is_some() { "levelset.partial.csv" } else { "levelset.csv" };
    sink.csv(name, &notes, &LEVEL_COLUMNS, &level_rows(&levels))?;
    let summary = DecomposeSummary {
        h_limit_cycle: prop.run.h_limit_cycle,
        levels: prop.run.levels.iter().map(|l| summarize(model, l)).collect(),
        stopped_near_center: prop.stopped_near_center,
        aborted: prop.error.as_ref().map(|e| e.to_string()),
    };
    sink.json("decompose_summary.json", &summary)?;
    prop.error.map_or(Ok(()), |e| Err(e.into()))
}

#[derive(Serialize)]
struct LinearizeDoc {
    #[serde(flatten)]
    decomposition: LinearDecompositionDoc,
    /// Reported for the van der Pol models.
    #[serde(skip_serializing_if = "Option::is_none")]
    analytic_forms: Option<LinearForms>,
}

fn linearize(model: &Model, config: &RunConfig, sink: &mut Sink) -> CliResult<()> {
    let lin = decompose_linear(model)?;
    let mu = config
        .model
        .as_ref()
        .filter(|m| matches!(m.name, ModelKind::Vdp | ModelKind::VdpYuan))
        .and_then(|m| m.params.get("mu").copied());
    sink.json(
        "linearize.json",
        &LinearizeDoc { decomposition: lin.to_document(), analytic_forms: mu.map(linear_forms) },
    )
}

#[derive(Serialize)]
struct HjSummary {
    dr: f64,
    p0: f64,
    q: f64,
    h_zero: f64,
    valid_nodes: usize,
    r_terminate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    valid_2d_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    psi_max: Option<f64>,
}

fn hj(model: &Model, config: &RunConfig, sink: &mut Sink) -> CliResult<()> {
    let c = &config.hj;
    let p = PLinear { p0: c.p0, q: c.q };
    let rdot = |r: f64| match c.rdot {
        Rdot::Model => polar_velocity(model, r, c.theta).0,
        Rdot::Constant(v) => v,
    };
    let sol = solve_radial_with(rdot, p, c.dr, c.r_max, c.sampling)?;
    // Node 0 is the boundary H = 0 and has no roots; rows start at node 1.
    let rows: Vec<Vec<String>> = (1..sol.r_grid.len())
        .map(|i| {
            let (lo, hi) = sol.roots[i].unwrap_or((f64::NAN, f64::NAN));
            let valid = sol.h_values[i].is_finite();
            vec![num(sol.r_grid[i]), num(sol.h_values[i]), num(lo), num(hi), (valid as u8).to_string()]
        })
        .collect();
    let notes = vec!["boundary node r = 0 carries H = 0".to_string()];
    sink.csv("hj_radial.csv", &notes, &["r", "H", "root_lo", "root_hi", "valid"], &rows)?;

    let mut summary = HjSummary {
        dr: c.dr,
        p0: c.p0,
        q: c.q,
        h_zero: p.h_zero(),
        valid_nodes: sol.valid_len(),
        r_terminate: sol.r_terminate,
        valid_2d_fraction: None,
        psi_max: None,
    };

    if let Some(n_theta) = c.n_theta {
        let grid = PolarGrid { dr: c.dr, r_max: c.r_max, n_theta };
        let f = solve_forward_2d(model, p, &grid)?;
        let analytic = model.analytic();
        let mut rows = Vec::new();
        let mut valid = 0usize;
        for i in 0..f.r.len() {
            for j in 0..f.theta.len() {
                let truth = analytic.map_or(f64::NAN, |a| a.h(f.point(i, j)));
                valid += f.valid[i][j] as usize;
                rows.push(vec![num(f.r[i]), num(f.theta[j]), num(f.h[i][j]), num(truth), (f.valid[i][j] as u8).to_string()]);
            }
        }
        summary.valid_2d_fraction = Some(valid as f64 / rows.len() as f64);
        sink.csv("hj_2d.csv", &[], &["r", "theta", "H_est", "H_true", "valid"], &rows)?;
    }

    if let Some(beta) = c.potential_beta {
        let rec = recover_potential(rdot, c.dr, c.r_max, beta)?;
        let rows: Vec<Vec<String>> = (0..rec.r.len()).map(|i| vec![num(rec.r[i]), num(rec.psi[i]), num(rec.h[i])]).collect();
        summary.psi_max = Some(rec.psi[rec.switch_index]);
        sink.csv("hj_potential.csv", &[], &["r", "psi", "H"], &rows)?;
    }
    sink.json("hj_summary.json", &summary)
}

fn set_compare_mu(config: &mut RunConfig) -> CliResult<()> {
    let mu = config
        .compare
        .mu
        .ok_or_else(|| CliError::Validation("compare.mu is required".into()))?;
    let spec = config.model.get_or_insert_with(|| kappa_core::ModelSpec::new(kappa_core::ModelKind::VdpYuan));
    if !spec.name.defaults().iter().any(|(k, _)| *k == "mu") {
        return Err(CliError::Validation(format!("compare needs a van der Pol model, got '{}'", spec.name)));
    }
    match spec.params.get("mu") {
        Some(m) if *m != mu => Err(CliError::Validation(format!("model mu = {m} disagrees with compare.mu = {mu}"))),
        _ => {
            spec.params.insert("mu".into(), mu);
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct CompareSummary {
    mu: f64,
    hausdorff_to_critical_curve: f64,
    levelset: ComponentStats,
    sasde: ComponentStats,
    sasde_w_zero_crossings: usize,
    sasde_cycle_factor_sign_changes: usize,
    /// `(xx, yy, xy)` of psi near the origin, scaled to `xx + yy = 1`.
    sasde_quadratic_fit: [f64; 3],
    analytic_forms: LinearForms,
    #[serde(skip_serializing_if = "Option::is_none")]
    levelset_error: Option<String>,
}

fn compare(model: &Model, config: &RunConfig, sink: &mut Sink) -> CliResult<()> {
    let mu = config.compare.mu.expect("checked before");
    let opts = propagate_options(model, config);
    if opts.n_inward + opts.n_outward == 0 {
        return Err(CliError::Validation("compare needs at least one level beside the cycle".into()));
    }
    let lc = cycle(model, config)?;
    let prop = propagate(model, &lc, &opts)?;
    let level = prop.run.level(0).expect("cycle level");
    if level.w_estimates.iter().all(|w| !w.is_finite()) {
        return Err(prop.error.map_or_else(|| CliError::Numerical("no w estimate on the cycle".into()), Into::into));
    }
    let potential = SasdePotential::new(mu);
    let ours = components_from_level(level);
    let sa = sasde_components(model, &potential, &level.points);
    let theirs: Vec<_> = sa.iter().map(|c| c.components).collect();
    let report = variance_report(&ours, &theirs)?;
    let (zeros, poles) = w_crossings(&sa);

    let mut s = 0.0;
    let mut rows = Vec::with_capacity(level.points.len());
    for (i, x) in level.points.iter().enumerate() {
        if i > 0 {
            s += (x - level.points[i - 1]).norm();
        }
        rows.push(vec![
            num(s),
            num(x.x),
            num(x.y),
            num(ours[i].p),
            num(ours[i].w),
            num(theirs[i].p),
            num(theirs[i].w),
            (theirs[i].singular as u8).to_string(),
        ]);
    }
    let columns = ["s_arclength", "x", "y", "p_levelset", "w_levelset", "p_sasde", "w_sasde", "sasde_singular"];
    sink.csv("compare_components.csv", &[format!("mu = {}", num(mu))], &columns, &rows)?;

    let fit = fit_quadratic(|x| potential.psi(x), 0.1)?;
    sink.json(
        "compare_summary.json",
        &CompareSummary {
            mu,
            hausdorff_to_critical_curve: hausdorff(&level.points, &potential.critical_curve(2048)),
            levelset: report.a,
            sasde: report.b,
            sasde_w_zero_crossings: zeros,
            sasde_cycle_factor_sign_changes: poles,
            sasde_quadratic_fit: fit.normalized(),
            analytic_forms: linear_forms(mu),
            levelset_error: prop.error.as_ref().map(|e| e.to_string()),
        },
    )
}
