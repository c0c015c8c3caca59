//! One-sided boundary null control: a forward run with artificial data, a
//! rightward run that reduces the state to zero, and the trace at `x = L`.

use crate::engine::{run, RunSpec};
use crate::error::{Error, Result};
use crate::hypsys::{speed_bounds, FamilyKind, SystemDef, SPEED_SAMPLES};
use crate::riemann::SolverParams;
use crate::solution::{FrontSolution, Mode, Orientation};
use crate::state::{PiecewiseState, State, StepFn};
use crate::zerowave::make_rightward;

/// Lines used for the null-triangle integral.
const TRIANGLE_LINES: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    /// `L·max(1/|λ_m| + 1/λ_{m+1})` over the ball.
    pub threshold: f64,
    /// `L·max 1/|λ_m|` over the ball.
    pub t1: f64,
}

/// Controllability time and the end `T₁` of the artificial forward phase,
/// maximised over the sampled ball.
pub fn time_threshold(sys: &SystemDef, length: f64) -> Result<Threshold> {
    let b = speed_bounds(sys, SPEED_SAMPLES)?;
    let m = sys.m;
    let neg = 1.0 / b.max[m - 1].abs();
    let pos = 1.0 / b.min[m];
    Ok(Threshold { threshold: length * (neg + pos), t1: length * neg })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlProblem {
    pub sys: SystemDef,
    pub ubar: PiecewiseState,
    pub horizon: f64,
    pub params: SolverParams,
}

impl ControlProblem {
    pub fn length(&self) -> f64 {
        self.ubar.b - self.ubar.a
    }

    fn zero_g1(&self) -> StepFn {
        PiecewiseState::constant(0.0, self.horizon, State::zeros(self.sys.n - self.sys.m))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    /// `‖u(T,·)‖_{L¹}`.
    pub final_l1: f64,
    /// `∬|u|` over `{T₁ ≤ t ≤ T, 0 ≤ x ≤ L(t−T₁)/(T−T₁)}`.
    pub null_triangle_l1: f64,
    pub solution: FrontSolution,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlResult {
    pub g2: StepFn,
    pub threshold: Threshold,
    pub forward_sol: FrontSolution,
    pub rightward_sol: FrontSolution,
    /// `‖ũ(0+,·) − ū‖_{L¹}` for the rightward record.
    pub initial_l1_err: f64,
    pub verify: VerifyReport,
}

impl ControlResult {
    pub fn final_l1(&self) -> f64 {
        self.verify.final_l1
    }

    pub fn tv_g2(&self) -> f64 {
        self.g2.tv()
    }
}

fn check_problem(cp: &ControlProblem) -> Result<Threshold> {
    let sys = &cp.sys;
    if let Some(i) = (0..sys.m).find(|&i| sys.kinds[i] == FamilyKind::GenuinelyNonlinear) {
        return Err(Error::Unsupported(format!("negative family {} is genuinely nonlinear", i + 1)));
    }
    let thr = time_threshold(sys, cp.length())?;
    if cp.horizon <= thr.threshold {
        return Err(Error::ThresholdViolated { t: cp.horizon, threshold: thr.threshold });
    }
    Ok(thr)
}

/// Builds the control `g₂` and verifies it with an independent forward run.
pub fn synthesize(cp: &ControlProblem) -> Result<ControlResult> {
    let thr = check_problem(cp)?;
    let sys = &cp.sys;
    let (length, horizon, t1) = (cp.length(), cp.horizon, thr.t1);
    // Step 1: forward run on (0, T₁) with b₁ = 0 and constant artificial data at x = L.
    let gf = PiecewiseState::constant(0.0, t1, sys.eval_b2(cp.ubar.last()));
    let g1 = PiecewiseState::constant(0.0, t1, State::zeros(sys.n - sys.m));
    let spec = RunSpec::new(cp.params.clone(), Mode::Splitting, length, t1, cp.ubar.clone(), g1, gf);
    let forward_sol = run(sys, spec)?;
    // Step 2: rightward run from a(t) = u_f(t, 0+) on (0, T₁), zero afterwards.
    let trace = &forward_sol.left_trace;
    let mut breaks = trace.breaks.clone();
    let mut states = trace.states.clone();
    breaks.push(t1);
    states.push(State::zeros(sys.n));
    let a = PiecewiseState::new(0.0, horizon, breaks, states);
    let rw = make_rightward(sys)?;
    let rg1 = cp.ubar.map(|u| rw.sys.eval_b1(u));
    let rg2 = PiecewiseState::constant(0.0, length, State::zeros(sys.m));
    let mut rparams = SolverParams::new(&rw.sys, cp.params.eps, cp.params.h);
    rparams.gen_max = cp.params.gen_max;
    let mut rspec = RunSpec::new(rparams, Mode::ZeroWave, horizon, length, a, rg1, rg2);
    rspec.orientation = Orientation::Rightward;
    let rightward_sol = run(&rw.sys, rspec)?;
    // Step 3: the control is the boundary value of the rightward record at x = L.
    let g2 = rightward_sol.final_slice.map(|u| sys.eval_b2(u));
    let initial_l1_err = rightward_sol.left_trace.l1_dist(&cp.ubar);
    let verify = verify(cp, &g2)?;
    Ok(ControlResult { g2, threshold: thr, forward_sol, rightward_sol, initial_l1_err, verify })
}

/// Forward splitting run with `b₁ = 0` and the given `g₂`.
pub fn verify(cp: &ControlProblem, g2: &StepFn) -> Result<VerifyReport> {
    let thr = time_threshold(&cp.sys, cp.length())?;
    let (length, horizon) = (cp.length(), cp.horizon);
    let spec = RunSpec::new(cp.params.clone(), Mode::Splitting, length, horizon, cp.ubar.clone(), cp.zero_g1(), g2.clone());
    let solution = run(&cp.sys, spec)?;
    let final_l1 = solution.final_slice.l1_norm();
    let span = horizon - thr.t1;
    let dt = span / TRIANGLE_LINES as f64;
    let null_triangle_l1 = (0..TRIANGLE_LINES)
        .map(|k| {
            let t = thr.t1 + (k as f64 + 0.5) * dt;
            let edge = length * (t - thr.t1) / span;
            solution.slice(t).l1_norm_on(0.0, edge) * dt
        })
        .sum();
    Ok(VerifyReport { final_l1, null_triangle_l1, solution })
}
