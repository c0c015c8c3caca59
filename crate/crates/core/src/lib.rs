//! Wavefront tracking for hyperbolic balance laws on a strip with boundary
//! null-control synthesis.

pub mod calibration;
pub mod control;
pub mod engine;
pub mod error;
pub mod export;
pub mod functionals;
pub mod hypsys;
pub mod riemann;
pub mod solution;
pub mod splitting;
pub mod state;
pub mod zerowave;

pub use error::{Error, Result};
pub use solution::{FrontSolution, Mode, Orientation};
pub use state::{PiecewiseState, State, StepFn};
