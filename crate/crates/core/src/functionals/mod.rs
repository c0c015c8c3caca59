//! Functionals on front-tracking solutions: Glimm interaction functionals,
//! the two-solution stability functional and weak/entropy residuals.

mod gamma;
mod glimm;
mod residual;
mod series;

pub use gamma::{gamma, shock_decomposition, tau_hat_at};
pub use glimm::{potential, tv_after, FunctionalSample, GlimmSetup, GlimmValues, GlimmWeights, WaveItem};
pub use residual::{entropy_residual, test_family, weak_residual, TestFunction};
pub use series::{
    check_monotone, glimm, glimm_setup, glimm_values, tau_hat, wave_items, FunctionalSeries, MonotoneReport, Region, Violation,
};

use crate::state::PiecewiseState;

/// Total variation: sum of jump norms over the breakpoints.
pub fn tv(ps: &PiecewiseState) -> f64 {
    ps.tv()
}

/// Exact L¹ distance of two piecewise constant functions.
pub fn l1_dist(a: &PiecewiseState, b: &PiecewiseState) -> f64 {
    a.l1_dist(b)
}
