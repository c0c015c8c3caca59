//! Splitting solutions: homogeneous front tracking inside the strips
//! `jh < t < (j+1)h`, with the source applied on every line `t = jh`.

use crate::engine::{run, RunSpec};
use crate::error::Result;
use crate::hypsys::SystemDef;
use crate::riemann::SolverParams;
use crate::solution::{FrontSolution, Mode};
use crate::state::{PiecewiseState, StepFn};

pub fn run_forward_he(
    sys: &SystemDef,
    params: &SolverParams,
    ubar: &PiecewiseState,
    g1: &StepFn,
    g2: &StepFn,
    horizon: f64,
) -> Result<FrontSolution> {
    let spec = RunSpec::new(params.clone(), Mode::Splitting, ubar.b - ubar.a, horizon, ubar.clone(), g1.clone(), g2.clone());
    run(sys, spec)
}

/// Data of a convergence study.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyData {
    pub ubar: PiecewiseState,
    pub g1: StepFn,
    pub g2: StepFn,
    pub horizon: f64,
    pub mode: Mode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub eps: f64,
    pub h: f64,
    pub events: usize,
    pub segments: usize,
    /// `‖u(T) − u_next(T)‖_{L¹}` against the next (finer) level.
    pub l1_to_next: Option<f64>,
    /// `log2` ratio of consecutive Cauchy distances.
    pub cauchy_order: Option<f64>,
    /// `‖u(T) − reference‖_{L¹}`, when a reference slice is given.
    pub l1_to_ref: Option<f64>,
    pub ref_order: Option<f64>,
    pub final_slice: PiecewiseState,
}

fn order(coarse: Option<f64>, fine: Option<f64>) -> Option<f64> {
    match (coarse, fine) {
        (Some(a), Some(b)) if a > 0.0 && b > 0.0 => Some((a / b).log2()),
        _ => None,
    }
}

/// Runs every `(ε, h)` level (in parallel) and tabulates the distance between
/// final slices of consecutive levels, and to `reference` if given. Levels
/// are expected from coarse to fine; orders assume halving.
pub fn he_convergence_study(
    sys: &SystemDef,
    data: &StudyData,
    levels: &[(f64, f64)],
    reference: Option<&PiecewiseState>,
) -> Result<Vec<StudyRow>> {
    let length = data.ubar.b - data.ubar.a;
    let sols: Vec<Result<FrontSolution>> = std::thread::scope(|s| {
        let handles: Vec<_> = levels
            .iter()
            .map(|&(eps, h)| {
                s.spawn(move || {
                    let params = SolverParams::new(sys, eps, h);
                    let spec = RunSpec::new(params, data.mode, length, data.horizon, data.ubar.clone(), data.g1.clone(), data.g2.clone());
                    run(sys, spec)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("study worker panicked")).collect()
    });
    let sols: Vec<FrontSolution> = sols.into_iter().collect::<Result<_>>()?;
    let mut rows: Vec<StudyRow> = sols
        .iter()
        .zip(levels)
        .enumerate()
        .map(|(k, (sol, &(eps, h)))| StudyRow {
            eps,
            h,
            events: sol.events.len(),
            segments: sol.segments.len(),
            l1_to_next: sols.get(k + 1).map(|next| sol.final_slice.l1_dist(&next.final_slice)),
            cauchy_order: None,
            l1_to_ref: reference.map(|r| sol.final_slice.l1_dist(r)),
            ref_order: None,
            final_slice: sol.final_slice.clone(),
        })
        .collect();
    for k in 1..rows.len() {
        rows[k].cauchy_order = order(rows[k - 1].l1_to_next, rows[k].l1_to_next);
        rows[k].ref_order = order(rows[k - 1].l1_to_ref, rows[k].l1_to_ref);
    }
    Ok(rows)
}
