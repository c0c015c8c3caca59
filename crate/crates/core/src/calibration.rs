//! Seeded run suites and the constants measured on them. Frozen values live
//! in per-system fixture files; the same suites are re-run to check them.

use crate::engine::{run, RunSpec};
use crate::error::Result;
use crate::functionals::{check_monotone, gamma, glimm_setup, tau_hat_at, FunctionalSeries, GlimmWeights};
use crate::hypsys::{wave_curve, SystemDef};
use crate::riemann::SolverParams;
use crate::solution::{EventKind, FrontSolution, Mode};
use crate::state::{PiecewiseState, State, StepFn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Piecewise constant data on `(0, length)` with `jumps` single-family jumps
/// whose strengths add up to `tv`.
pub fn random_data(sys: &SystemDef, seed: u64, jumps: usize, tv: f64, length: f64) -> Result<PiecewiseState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut breaks: Vec<f64> = (0..jumps).map(|_| length * rng.gen_range(0.08..0.92)).collect();
    breaks.sort_by(f64::total_cmp);
    let weights: Vec<f64> = (0..jumps).map(|_| rng.gen_range(0.5..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let mut states = vec![State::zeros(sys.n)];
    for w in &weights {
        let family = rng.gen_range(0..sys.n);
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let next = wave_curve(sys, family, sign * tv * w / total, states.last().unwrap())?;
        states.push(next);
    }
    Ok(PiecewiseState::new(0.0, length, breaks, states))
}

/// Constant boundary data matching `ubar` at both corners.
pub fn compatible_data(sys: &SystemDef, ubar: &PiecewiseState, horizon: f64) -> (StepFn, StepFn) {
    (PiecewiseState::constant(0.0, horizon, sys.eval_b1(ubar.first())), PiecewiseState::constant(0.0, horizon, sys.eval_b2(ubar.last())))
}

/// Run `k` of the Glimm suite: three jumps of total variation 0.05 in
/// splitting mode; odd runs also get one jump of size 0.005 in `g1`.
pub fn glimm_case(sys: &SystemDef, seed: u64, eps: f64, h: f64, weights: GlimmWeights) -> Result<RunSpec> {
    let length = 1.0;
    let horizon = 1.0;
    let ubar = random_data(sys, seed, 3, 0.05, length)?;
    let (mut g1, g2) = compatible_data(sys, &ubar, horizon);
    if seed % 2 == 1 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
        let at = rng.gen_range(0.1..0.4);
        let mut after = g1.first().clone();
        after[0] += 0.005;
        g1 = PiecewiseState::new(0.0, horizon, vec![at], vec![g1.first().clone(), after]);
    }
    let mut spec = RunSpec::new(SolverParams::new(sys, eps, h), Mode::Splitting, length, horizon, ubar, g1, g2);
    spec.glimm = Some(glimm_setup(sys, length, weights)?);
    Ok(spec)
}

/// Largest ratio of the change of `V` to the decrease-law size over the
/// interaction, boundary and data events of a run.
pub fn interaction_constant(sol: &FrontSolution, c1: f64) -> f64 {
    let mut c: f64 = 0.0;
    for s in &sol.functionals {
        if s.law <= 0.0 {
            continue;
        }
        let dv = s.after.v - s.before.v;
        let ratio = match s.kind {
            EventKind::FrontFront => dv / s.law,
            // Reflected strength relative to the incoming one.
            EventKind::FrontBoundary => (dv + s.law) / s.law,
            EventKind::BoundaryDataJump => (dv + c1 * s.law) / s.law,
            _ => continue,
        };
        c = c.max(ratio);
    }
    c
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlimmCalibration {
    /// Interaction constant `C`.
    pub c_cal: f64,
    /// Largest split-line growth constant over the suite.
    pub c_growth: f64,
    /// Per-run growth constants.
    pub per_run: Vec<f64>,
}

pub const GLIMM_SUITE_RUNS: u64 = 20;

/// Runs the Glimm suite twice: once to measure `C`, once with the weights it
/// implies to measure the split growth.
pub fn calibrate_glimm(sys: &SystemDef, eps: f64, h: f64) -> Result<GlimmCalibration> {
    let first = GlimmWeights::from_constant(1.0);
    let mut c_cal: f64 = 0.0;
    for seed in 0..GLIMM_SUITE_RUNS {
        let sol = run(sys, glimm_case(sys, seed, eps, h, first)?)?;
        c_cal = c_cal.max(interaction_constant(&sol, first.c1));
    }
    let weights = GlimmWeights::from_constant(c_cal);
    let mut per_run = Vec::new();
    for seed in 0..GLIMM_SUITE_RUNS {
        let spec = glimm_case(sys, seed, eps, h, weights)?;
        let setup = spec.glimm.clone().expect("suite runs carry a setup");
        let sol = run(sys, spec)?;
        per_run.push(check_monotone(&FunctionalSeries::from_solution(&sol, &setup), None).growth_constant);
    }
    let c_growth = per_run.iter().copied().fold(0.0, f64::max);
    Ok(GlimmCalibration { c_cal, c_growth, per_run })
}

/// Zero-wave pair with `ū` and a copy whose first jump is shifted so that
/// `‖ū − v̄‖_{L¹} = l1_0`.
pub fn stability_pair(sys: &SystemDef, seed: u64, eps: f64, h: f64, horizon: f64, l1_0: f64) -> Result<(RunSpec, RunSpec)> {
    let length = 1.0;
    let ua = random_data(sys, seed, 3, 0.05, length)?;
    let jump = (&ua.states[1] - &ua.states[0]).norm();
    let mut ub = ua.clone();
    ub.breaks[0] += l1_0 / jump;
    if ub.breaks.len() > 1 && ub.breaks[0] >= ub.breaks[1] {
        ub.breaks[0] = ua.breaks[0] - l1_0 / jump;
    }
    let (g1, g2) = compatible_data(sys, &ua, horizon);
    let params = SolverParams::new(sys, eps, h);
    let a = RunSpec::new(params.clone(), Mode::ZeroWave, length, horizon, ua, g1.clone(), g2.clone());
    let b = RunSpec::new(params, Mode::ZeroWave, length, horizon, ub, g1, g2);
    Ok((a, b))
}

/// Times at which two records are compared.
pub const STABILITY_SAMPLES: usize = 64;

fn max_l1_ratio(a: &FrontSolution, b: &FrontSolution, slack: f64) -> f64 {
    let dg = a.g1.l1_dist(&b.g1) + a.g2.l1_dist(&b.g2);
    let denom = a.initial.l1_dist(&b.initial) + dg + slack;
    (0..=STABILITY_SAMPLES)
        .map(|k| a.horizon * k as f64 / STABILITY_SAMPLES as f64)
        .map(|t| a.slice(t).l1_dist(&b.slice(t)) / denom)
        .fold(0.0, f64::max)
}

/// `max_t ‖u(t) − v(t)‖_{L¹} / (‖ū − v̄‖_{L¹} + ∫|Δg₁| + |Δg₂| + ε)` for one pair.
pub fn stability_ratio(a: &FrontSolution, b: &FrontSolution) -> f64 {
    max_l1_ratio(a, b, a.params.eps)
}

/// The same ratio without the `ε` term, which bounds it for every `ε`.
pub fn amplification(a: &FrontSolution, b: &FrontSolution) -> f64 {
    max_l1_ratio(a, b, 0.0)
}

pub const STABILITY_PAIRS: u64 = 8;

/// Largest amplification over the calibration pairs (seeds `0..8`).
pub fn calibrate_stability(sys: &SystemDef, eps: f64, h: f64, horizon: f64) -> Result<f64> {
    let mut c: f64 = 0.0;
    for seed in 0..STABILITY_PAIRS {
        let (sa, sb) = stability_pair(sys, seed, eps, h, horizon, 0.01)?;
        let (a, b) = (run(sys, sa)?, run(sys, sb)?);
        c = c.max(amplification(&a, &b));
    }
    Ok(c)
}

/// `c̄` with `1/c̄ ≤ Γ/‖u − v‖_{L¹(𝔏_t)} ≤ c̄` over the stability pairs and
/// a few times below `τ̂(L)`.
pub fn calibrate_gamma(sys: &SystemDef, eps: f64, h: f64) -> Result<f64> {
    let weights = GlimmWeights::from_constant(1.0);
    let setup = glimm_setup(sys, 1.0, weights)?;
    let tau = tau_hat_at(sys, 1.0)?;
    let mut c: f64 = 1.0;
    for seed in 0..STABILITY_PAIRS {
        let (sa, sb) = stability_pair(sys, seed, eps, h, tau, 0.01)?;
        let (a, b) = (run(sys, sa)?, run(sys, sb)?);
        for k in 1..8 {
            let t = tau * k as f64 / 8.0;
            let y1 = 1.0 - t / tau;
            let d = a.slice(t).l1_dist_on(&b.slice(t), 0.0, y1);
            if d <= 1e-12 {
                continue;
            }
            let g = gamma(sys, &a, &b, t, 1.0, &setup)?;
            c = c.max(g / d).max(d / g);
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub system: String,
    pub eps: f64,
    pub h: f64,
    pub c_cal: f64,
    pub c_growth: f64,
    pub c_stab: f64,
    pub stab_horizon: f64,
    pub c_bar: f64,
}

impl Fixture {
    /// `key = value` text, readable as TOML.
    pub fn to_text(&self) -> String {
        format!(
            "system = \"{}\"\neps = {:?}\nh = {:?}\nc_cal = {:?}\nc_growth = {:?}\nc_stab = {:?}\nstab_horizon = {:?}\nc_bar = {:?}\n",
            self.system, self.eps, self.h, self.c_cal, self.c_growth, self.c_stab, self.stab_horizon, self.c_bar
        )
    }
}

/// All constants for one system at the calibration level `ε = h = 0.02`.
pub fn calibrate(sys: &SystemDef) -> Result<Fixture> {
    let (eps, h, horizon) = (0.02, 0.02, 2.0);
    let g = calibrate_glimm(sys, eps, h)?;
    Ok(Fixture {
        system: sys.name.clone(),
        eps,
        h,
        c_cal: g.c_cal,
        c_growth: g.c_growth,
        c_stab: calibrate_stability(sys, eps, h, horizon)?,
        stab_horizon: horizon,
        c_bar: calibrate_gamma(sys, eps, h)?,
    })
}
