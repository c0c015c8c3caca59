//! Zero-wave solutions on the lattice `x = jh`, the rightward reading of a
//! system, and the checks relating forward and rightward records.

mod audit;
mod determinacy;
mod rightward;
mod swap;

pub use audit::{audit, AuditReport};
pub use determinacy::{determinacy_check, DeterminacyReport};
pub use rightward::{family_perm, make_rightward, RightwardSystem};
pub use swap::swap_view;

use crate::engine::{run, RunSpec};
use crate::error::Result;
use crate::hypsys::SystemDef;
use crate::riemann::SolverParams;
use crate::solution::{FrontSolution, Mode};
use crate::state::{PiecewiseState, StepFn};

/// Front tracking with stationary zero-waves on `x = jh`; the strip length is
/// taken from the domain of `ubar`.
pub fn run_eh(
    sys: &SystemDef,
    params: &SolverParams,
    ubar: &PiecewiseState,
    g1: &StepFn,
    g2: &StepFn,
    horizon: f64,
) -> Result<FrontSolution> {
    let spec = RunSpec::new(params.clone(), Mode::ZeroWave, ubar.b - ubar.a, horizon, ubar.clone(), g1.clone(), g2.clone());
    run(sys, spec)
}
