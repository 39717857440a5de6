use thiserror::Error;

use crate::levelset::LevelSet;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value while evaluating the field at ({x}, {y})")]
    NumericalDomain { x: f64, y: f64 },

    #[error("shape error: {0}")]
    Shape(String),

    #[error("integration diverged at step {step}")]
    Divergence { step: usize },

    #[error("no Poincaré crossing within {max_time} time units")]
    NoCycle { max_time: f64 },

    #[error("limit cycle did not converge after {loops} loops (best loop distance {distance:e})")]
    NonConvergence { loops: usize, distance: f64 },

    #[error("degenerate linear decomposition: divergence and curl both vanish at the fixed point")]
    DegenerateDecomposition,

    #[error("jacobian split identity violated: residual {residual:e}")]
    IdentityViolation { residual: f64 },

    #[error("point coincides with reference point {index}")]
    CoincidentPoint { index: usize },

    #[error("no candidate admits a real w (smallest deficit {deficit:e})")]
    NoValidW { deficit: f64 },

    #[error("kappa is singular (p = w = 0)")]
    SingularKappa,

    #[error("level trace aborted after {steps} steps: {reason}")]
    AbortedTrace {
        steps: usize,
        reason: String,
        partial: Box<LevelSet>,
    },

    #[error("level trace stagnated: winding {winding:.3} rad after {steps} steps")]
    Stagnation { steps: usize, winding: f64 },

    #[error("potential outside the invertible range: beta^2 - 4 psi = {value:e}")]
    BranchDomain { value: f64 },
}
