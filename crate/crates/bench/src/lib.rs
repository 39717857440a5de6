//! Shared fixtures for the benchmarks.

use kappa_core::flow::find_limit_cycle;
use kappa_core::{make_model, LevelSet, LimitCycleOptions, Model, ModelKind, ModelSpec};

pub fn model(kind: ModelKind) -> Model {
    make_model(&ModelSpec::new(kind)).expect("catalog defaults are valid")
}

/// The limit cycle of `m` as a level-0 reference with `n` points.
pub fn cycle_level(m: &Model, n: usize) -> LevelSet {
    let lc = find_limit_cycle(m, &LimitCycleOptions::default()).expect("catalog models have a cycle");
    let points = lc.resampled(n).expect("resampling a closed loop");
    LevelSet {
        level_index: 0,
        p_level: 0.0,
        h_assigned: m.h_limit_cycle().unwrap_or(0.0),
        w_estimates: vec![f64::NAN; n],
        grad_estimates: vec![kappa_core::Vec2::new(f64::NAN, f64::NAN); n],
        points,
        closure_error: lc.closure_error,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_cycle_has_the_requested_size() {
        let l = cycle_level(&model(ModelKind::SymmRad), 256);
        assert_eq!(l.points.len(), 256);
        assert!((l.points[0].norm() - 10f64.sqrt()).abs() < 1e-3);
    }
}
