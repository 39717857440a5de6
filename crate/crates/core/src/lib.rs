//! Geometric decomposition `x' = kappa grad H` of planar systems with a limit
//! cycle around an unstable fixed point at the origin.
//!
//! The crate is organised by stage: [`models`] and [`field`] describe the
//! vector fields, [`flow`] finds the limit cycle, [`levelset`] reconstructs
//! contours of H from it, [`linearize`] handles the fixed point, [`hjfd`]
//! holds the finite-difference Hamilton-Jacobi reference solvers and
//! [`compare`] contrasts the result with the SA-SDE potential of the
//! generalized van der Pol oscillator.

pub mod compare;
pub mod error;
pub mod field;
pub mod flow;
pub mod geometry;
pub mod hjfd;
pub mod kappa;
pub mod levelset;
pub mod linearize;
pub mod models;

pub type Vec2 = nalgebra::Vector2<f64>;
pub type Mat2 = nalgebra::Matrix2<f64>;

pub use error::{Error, Result};
pub use field::{FnField, VectorField};
pub use flow::{LimitCycle, LimitCycleOptions, Trajectory};
pub use hjfd::{HjRadialSolution, PLinear};
pub use kappa::KappaForm;
pub use levelset::{LevelSet, LevelSetRun, PropagateOptions, TraceOptions};
pub use linearize::{LinearDecomposition, QuadraticForm};
pub use models::{make_model, AnalyticForm, Model, ModelKind, ModelSpec};
