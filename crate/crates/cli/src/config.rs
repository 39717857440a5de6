use std::path::{Path, PathBuf};

use kappa_core::hjfd::RdotSampling;
use kappa_core::{LimitCycleOptions, ModelKind, ModelSpec, TraceOptions};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// One JSON document configures every command; each command reads only the
/// blocks it needs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: Option<ModelSpec>,
    pub simulate: SimulateConfig,
    pub limit_cycle: LimitCycleOptions,
    pub levelset: LevelsetConfig,
    pub hj: HjConfig,
    pub compare: CompareConfig,
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub x0: [f64; 2],
    pub dt: f64,
    pub t_end: f64,
    /// Write every `stride`-th step (the last step is always written).
    pub stride: usize,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self { x0: [0.1, 0.1], dt: 1e-3, t_end: 50.0, stride: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LevelsetConfig {
    #[serde(rename = "dH")]
    pub dh: f64,
    #[serde(rename = "dP")]
    pub dp: f64,
    pub epsilon: f64,
    pub cycles: usize,
    pub n_inward: usize,
    pub n_outward: usize,
    /// H on the limit cycle; defaults to the model's closed form, else 0.
    pub h_lc: Option<f64>,
    /// `null` scans the whole reference at every step.
    pub window: Option<usize>,
    pub subdivisions: usize,
}

impl Default for LevelsetConfig {
    fn default() -> Self {
        let t = TraceOptions::default();
        Self {
            dh: 0.2,
            dp: 0.02,
            epsilon: t.epsilon,
            cycles: t.cycles,
            n_inward: 5,
            n_outward: 5,
            h_lc: None,
            window: t.window,
            subdivisions: t.subdivisions,
        }
    }
}

/// Radial velocity fed to the radial scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rdot {
    /// The model's radial velocity along the ray at `hj.theta`.
    Model,
    Constant(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HjConfig {
    pub dr: f64,
    pub r_max: f64,
    pub p0: f64,
    pub q: f64,
    pub rdot: Rdot,
    pub theta: f64,
    pub sampling: RdotSampling,
    /// Also run the 2D forward scheme on this many rays.
    pub n_theta: Option<usize>,
    /// Also recover the potential with `p = 1` for this beta.
    pub potential_beta: Option<f64>,
}

impl Default for HjConfig {
    fn default() -> Self {
        Self {
            dr: 1e-3,
            r_max: 4.0,
            p0: 0.5,
            q: 0.1,
            rdot: Rdot::Model,
            theta: 0.0,
            sampling: RdotSampling::default(),
            n_theta: None,
            potential_beta: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareConfig {
    /// Required by `compare`; there is no default.
    pub mu: Option<f64>,
}

/// Values given on the command line; they win over the document.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub model: Option<String>,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_path(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Validation(m) => CliError::Validation(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Validation(format!("invalid config: {e}")))
    }

    /// Applies the overrides. A `--model` naming a different model than the
    /// document drops the document's parameters, which belong to the other
    /// model.
    pub fn apply(mut self, o: &Overrides) -> CliResult<Self> {
        if let Some(name) = &o.model {
            let kind: ModelKind = name.parse()?;
            match &self.model {
                Some(spec) if spec.name == kind => {}
                _ => self.model = Some(ModelSpec::new(kind)),
            }
        }
        if let Some(dir) = &o.output {
            self.output_dir = Some(dir.clone());
        }
        Ok(self)
    }

    pub fn model_spec(&self) -> CliResult<&ModelSpec> {
        self.model.as_ref().ok_or_else(|| {
            let valid: Vec<_> = ModelKind::ALL.iter().map(|k| k.name()).collect();
            CliError::Validation(format!("no model given; use --model or \"model\" (valid: {})", valid.join(", ")))
        })
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output_dir.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    pub fn trace_options(&self) -> TraceOptions {
        let l = &self.levelset;
        TraceOptions {
            epsilon: l.epsilon,
            cycles: l.cycles,
            window: l.window,
            subdivisions: l.subdivisions,
            n_reference: self.limit_cycle.n_reference,
            ..TraceOptions::default()
        }
    }
}
