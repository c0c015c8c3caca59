use super::{make_rightward, swap_view};
use crate::control::time_threshold;
use crate::engine::{run, RunSpec};
use crate::error::{Error, Result};
use crate::hypsys::SystemDef;
use crate::riemann::SolverParams;
use crate::solution::{FrontSolution, Mode, Orientation};
use crate::state::PiecewiseState;

/// Vertical lines used for the triangle integral.
const TRIANGLE_LINES: usize = 400;

#[derive(Debug, Clone, PartialEq)]
pub struct DeterminacyReport {
    pub t1: f64,
    /// `∬ |u − ũ|` over the triangle below the line from `(T₁, 0)` to `(0, L)`.
    pub distance: f64,
    /// Area of the triangle, for normalisation.
    pub area: f64,
    /// Rightward re-solve.
    pub resolve: FrontSolution,
}

/// Re-solves in the rightward sense from the trace `u(·, 0+)` of a forward
/// record on `(0, T₁)`, with `b̃1(ũ) = b̃1(ū)` on `t = 0`, and measures the
/// distance between the two records on the triangle the `t = T₁` boundary
/// cannot reach.
pub fn determinacy_check(fwd: &FrontSolution, sys: &SystemDef, params: &SolverParams) -> Result<DeterminacyReport> {
    if fwd.orientation != Orientation::Forward {
        return Err(Error::Config("determinacy check needs a forward record".into()));
    }
    let length = fwd.length;
    let t1 = time_threshold(sys, length)?.t1;
    if t1 > fwd.horizon {
        return Err(Error::Config(format!("record ends at {} before T1 = {t1}", fwd.horizon)));
    }
    let rw = make_rightward(sys)?;
    let a = fwd.left_trace.restrict(0.0, t1);
    let g1 = fwd.initial.map(|u| rw.sys.eval_b1(u));
    let g2 = PiecewiseState::constant(0.0, length, rw.sys.eval_b2(a.last()));
    let mut rparams = SolverParams::new(&rw.sys, params.eps, params.h);
    rparams.gen_max = params.gen_max;
    let mut spec = RunSpec::new(rparams, Mode::ZeroWave, t1, length, a, g1, g2);
    spec.orientation = Orientation::Rightward;
    let resolve = run(&rw.sys, spec)?;
    let view = swap_view(fwd)?;
    let dx = length / TRIANGLE_LINES as f64;
    let mut distance = 0.0;
    for k in 0..TRIANGLE_LINES {
        let x = (k as f64 + 0.5) * dx;
        let top = t1 * (1.0 - x / length);
        distance += view.slice(x).l1_dist_on(&resolve.slice(x), 0.0, top) * dx;
    }
    Ok(DeterminacyReport { t1, distance, area: 0.5 * t1 * length, resolve })
}
