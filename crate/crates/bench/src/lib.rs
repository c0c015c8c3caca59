//! Shared inputs for the benchmarks.

use wavetrack::calibration::{compatible_data, random_data};
use wavetrack::engine::RunSpec;
use wavetrack::hypsys::SystemDef;
use wavetrack::riemann::SolverParams;
use wavetrack::Mode;

/// Seeded three-jump run on `(0, 1)` with `TV = 0.05`.
pub fn random_run(sys: &SystemDef, seed: u64, mode: Mode, eps: f64, h: f64, horizon: f64) -> RunSpec {
    let ubar = random_data(sys, seed, 3, 0.05, 1.0).expect("small data stays in the ball");
    let (g1, g2) = compatible_data(sys, &ubar, horizon);
    RunSpec::new(SolverParams::new(sys, eps, h), mode, 1.0, horizon, ubar, g1, g2)
}
