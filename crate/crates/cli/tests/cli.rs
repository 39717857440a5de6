use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn kappa(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kappa"))
        .args(args)
        .arg("--output")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, json: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, json).unwrap();
    path.to_string_lossy().into_owned()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Data rows of a CSV, header comments and the column row skipped.
fn rows(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn linearize_asymm_has_identity_f0() {
    let dir = tempfile::tempdir().unwrap();
    let out = kappa(dir.path(), &["linearize", "--model", "asymm"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json(&dir.path().join("linearize.json"));
    let f0 = &doc["f0"];
    for (i, j, v) in [(0, 0, 1.0), (0, 1, 0.0), (1, 0, 0.0), (1, 1, 1.0)] {
        assert!((f0[i][j].as_f64().unwrap() - v).abs() < 1e-9);
    }
    assert_eq!(doc["meta"]["command"], "linearize");
    assert_eq!(doc["meta"]["config"]["model"]["params"]["mu"].as_f64(), Some(2.0));
    assert!(doc.get("analytic_forms").is_none());
}

#[test]
fn linearize_vdp_reports_both_forms() {
    let dir = tempfile::tempdir().unwrap();
    let out = kappa(dir.path(), &["linearize", "--model", "vdp"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json(&dir.path().join("linearize.json"));
    let h0 = &doc["h0_coeffs"];
    let (xx, yy) = (h0["xx"].as_f64().unwrap(), h0["yy"].as_f64().unwrap());
    let from_kappa0 = doc["analytic_forms"]["from_kappa0"][0].as_f64().unwrap();
    assert!((xx / (xx + yy) - from_kappa0).abs() < 1e-9);
    assert!(doc["analytic_forms"]["from_potential"].is_array());
}

#[test]
fn hj_first_row_carries_the_boundary_roots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"hj": {"p0": 0.5, "q": 0.1, "dr": 0.001, "r_max": 0.01, "rdot": {"constant": 0.4999}}}"#);
    let out = kappa(dir.path(), &["hj", "--config", &cfg, "--model", "symm"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let first = &rows(&dir.path().join("hj_radial.csv"))[0];
    assert!((first[2] - 0.001).abs() < 1e-9 && (first[3] - 4.999).abs() < 1e-9, "{first:?}");
}

#[test]
fn hj_model_rdot_terminates_inside_the_cycle() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"model": {"name": "symm_rad", "params": {"k": 0.05}}, "hj": {"n_theta": 8, "r_max": 3.5, "potential_beta": 10}}"#,
    );
    let out = kappa(dir.path(), &["hj", "--config", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let s = json(&dir.path().join("hj_summary.json"));
    let rt = s["r_terminate"].as_f64().unwrap();
    assert!(rt > 0.95 * 10f64.sqrt() && rt < 10f64.sqrt(), "{rt}");
    assert!(dir.path().join("hj_2d.csv").exists() && dir.path().join("hj_potential.csv").exists());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"model": {"name": "symm_rad"}, "levelset": {"dP": 0.4, "n_inward": 1, "n_outward": 1}}"#);
    let snapshot = |out: &Output| {
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        ["levelset.csv", "decompose_summary.json"].map(|f| fs::read(dir.path().join(f)).unwrap())
    };
    let a = snapshot(&kappa(dir.path(), &["decompose", "--config", &cfg]));
    let b = snapshot(&kappa(dir.path(), &["decompose", "--config", &cfg]));
    assert_eq!(a, b);

    let text = String::from_utf8(a[0].clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(concat!("# kappa ", env!("CARGO_PKG_VERSION"))));
    assert_eq!(lines.next(), Some("# command: decompose"));
    assert!(lines.next().unwrap().starts_with("# config: {"));
    assert_eq!(lines.next(), Some("level_index,p_level,h_assigned,point_index,x,y,w_est"));
    let levels: std::collections::BTreeSet<i64> = rows(&dir.path().join("levelset.csv")).iter().map(|r| r[0] as i64).collect();
    assert_eq!(levels.into_iter().collect::<Vec<_>>(), vec![-1, 0, 1]);
}

#[test]
fn flags_override_the_document() {
    let dir = tempfile::tempdir().unwrap();
    let other = dir.path().join("elsewhere");
    let cfg = write_config(
        dir.path(),
        &format!(r#"{{"model": {{"name": "vdp", "params": {{"mu": 3}}}}, "output_dir": "{}"}}"#, other.display()),
    );
    let out = kappa(dir.path(), &["linearize", "--config", &cfg, "--model", "symm_rad"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!other.exists());
    let doc = json(&dir.path().join("linearize.json"));
    assert_eq!(doc["meta"]["config"]["model"]["name"], "symm_rad");
    assert_eq!(doc["p0"].as_f64(), Some(10.0));
}

#[test]
fn validation_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = kappa(dir.path(), &["simulate", "--model", "lorenz"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("vdp_yuan"));

    let cfg = write_config(dir.path(), r#"{"levelset": {"dH": -0.2}}"#);
    assert_eq!(kappa(dir.path(), &["decompose", "--config", &cfg, "--model", "symm_rad"]).status.code(), Some(2));

    let cfg = write_config(dir.path(), r#"{"model": {"name": "symm", "params": {"lambda": 0.9}}}"#);
    assert_eq!(kappa(dir.path(), &["linearize", "--config", &cfg]).status.code(), Some(2));

    let cfg = write_config(dir.path(), "{ not json");
    assert_eq!(kappa(dir.path(), &["linearize", "--config", &cfg]).status.code(), Some(2));

    assert_eq!(kappa(dir.path(), &["compare", "--model", "vdp_yuan"]).status.code(), Some(2));
    assert_eq!(kappa(dir.path(), &["linearize"]).status.code(), Some(2));
    assert_eq!(kappa(dir.path(), &["frobnicate"]).status.code(), Some(2));
}

#[test]
fn divergence_keeps_a_partial_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"model": {"name": "vdp"}, "simulate": {"dt": 0.5, "x0": [10, 10], "t_end": 100}}"#);
    let out = kappa(dir.path(), &["simulate", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(3));
    assert!(dir.path().join("trajectory.partial.csv").exists());
    assert!(!dir.path().join("trajectory.csv").exists());
}

#[test]
fn simulate_writes_strided_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"model": {"name": "symm_rad"}, "simulate": {"dt": 0.01, "t_end": 1, "stride": 10}}"#);
    let out = kappa(dir.path(), &["simulate", "--config", &cfg]);
    assert!(out.status.success());
    let r = rows(&dir.path().join("trajectory.csv"));
    assert_eq!(r.len(), 11);
    assert_eq!(r[0], vec![0.0, 0.1, 0.1]);
    assert!((r[10][0] - 1.0).abs() < 1e-12);
}

#[test]
fn compare_on_vdp_yuan() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"compare": {"mu": 1}, "levelset": {"n_inward": 1, "n_outward": 1}}"#);
    let out = kappa(dir.path(), &["compare", "--config", &cfg, "--model", "vdp_yuan"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let s = json(&dir.path().join("compare_summary.json"));
    assert!(s["hausdorff_to_critical_curve"].as_f64().unwrap() < 0.1);
    assert_eq!(s["levelset"]["p"]["variance"].as_f64(), Some(0.0));
    assert_eq!(s["mu"].as_f64(), Some(1.0));
    let r = rows(&dir.path().join("compare_components.csv"));
    assert_eq!(r.len(), 1024);
}

#[test]
fn limit_cycle_of_asymm_sits_on_h_5() {
    let dir = tempfile::tempdir().unwrap();
    let out = kappa(dir.path(), &["limit-cycle", "--model", "asymm"]);
    assert!(out.status.success());
    let s = json(&dir.path().join("limit_cycle.json"));
    assert!((s["h_true"]["mean"].as_f64().unwrap() - 5.0).abs() < 0.05);
}

#[test]
fn aborted_decompose_keeps_partial_levels() {
    // Inward tracing on asymm runs out of stable start points near the centre.
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"model": {"name": "asymm"}, "levelset": {"n_inward": 30, "n_outward": 0}}"#);
    let out = kappa(dir.path(), &["decompose", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("levelset.partial.csv").exists());
    let s = json(&dir.path().join("decompose_summary.json"));
    assert!(s["aborted"].is_string());
    assert!(s["levels"].as_array().unwrap().len() > 5);
}
