use super::rightward::family_perm;
use crate::error::{Error, Result};
use crate::riemann::WaveKind;
use crate::solution::{EventRecord, FrontSolution, Mode, Orientation, SplitRecord};
use crate::state::{PiecewiseState, State};

/// Speeds closer than this to 0 have no reciprocal.
const SWAP_SPEED_MIN: f64 = 1e-12;

fn swapped_name(name: &str) -> String {
    match name.strip_suffix("/rightward") {
        Some(base) => base.to_string(),
        None => format!("{name}/rightward"),
    }
}

fn swapped_mode(mode: Mode) -> Mode {
    match mode {
        Mode::Splitting => Mode::ZeroWave,
        Mode::ZeroWave => Mode::Splitting,
        Mode::Plain => Mode::Plain,
    }
}

/// Zero-waves of a lattice line `x = xj` as a split record of the swapped view.
fn lattice_to_split(sol: &FrontSolution, xj: f64) -> SplitRecord {
    let mut segs: Vec<_> = sol.segments.iter().filter(|s| s.kind == WaveKind::Zero && s.x0 == xj).collect();
    segs.sort_by(|a, b| a.t0.total_cmp(&b.t0));
    let mut breaks = Vec::with_capacity(segs.len());
    let mut before = Vec::with_capacity(segs.len());
    let mut after = Vec::with_capacity(segs.len());
    for (k, s) in segs.iter().enumerate() {
        if k > 0 {
            breaks.push(s.t0);
        }
        before.push(sol.seg_left(s));
        after.push(sol.seg_right(s));
    }
    if segs.is_empty() {
        let u = sol.initial.eval(xj).clone();
        before.push(u.clone());
        after.push(u);
    }
    SplitRecord {
        t: xj,
        before: PiecewiseState::new(0.0, sol.horizon, breaks.clone(), before),
        after: PiecewiseState::new(0.0, sol.horizon, breaks, after),
    }
}

/// Pieces of a split line `t = tj`, cut at every breakpoint of the slices on
/// either side.
fn split_pieces(sol: &FrontSolution, tj: f64) -> Vec<(f64, f64, State, State)> {
    let below = sol.slice_before(tj);
    let above = sol.slice(tj);
    let mut pts: Vec<f64> = below.breaks.iter().chain(&above.breaks).copied().filter(|&x| x > 0.0 && x < sol.length).collect();
    pts.push(0.0);
    pts.push(sol.length);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts.windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            (w[0], w[1], below.eval(mid).clone(), above.eval(mid).clone())
        })
        .collect()
}

/// Reinterprets a record with the roles of `t` and `x` exchanged. Fronts are
/// re-anchored with the other variable as evolution variable, speeds become
/// reciprocals and families are relabelled; nothing is re-solved.
///
/// Split lines of a splitting run become the zero-wave lattice of the view and
/// vice versa.
pub fn swap_view(sol: &FrontSolution) -> Result<FrontSolution> {
    let (n, m) = (sol.n, sol.m);
    let orientation = match sol.orientation {
        Orientation::Forward => Orientation::Rightward,
        Orientation::Rightward => Orientation::Forward,
    };
    let mut out = FrontSolution::empty(
        &swapped_name(&sol.system),
        n,
        m,
        orientation,
        swapped_mode(sol.mode),
        sol.params.clone(),
        sol.length,
        sol.horizon,
    );
    for s in &sol.segments {
        if s.kind == WaveKind::Zero {
            continue;
        }
        if s.speed.abs() < SWAP_SPEED_MIN {
            return Err(Error::SwapUndefined { speed: s.speed });
        }
        let (l, r) = (sol.seg_left(s), sol.seg_right(s));
        let family = s.family.map(|i| family_perm(n, m, i));
        let speed = 1.0 / s.speed;
        let (start, end, left, right) = if s.speed > 0.0 { ((s.x0, s.t0), (s.x1, s.t1), r, l) } else { ((s.x1, s.t1), (s.x0, s.t0), l, r) };
        out.push_segment(s.front, family, s.kind, s.sigma, s.gen, s.defect, start, end, speed, &left, &right);
    }
    for rec in &sol.splits {
        for (x0, x1, below, above) in split_pieces(sol, rec.t) {
            out.push_segment(
                u64::MAX,
                None,
                WaveKind::Zero,
                (&above - &below).norm(),
                0,
                0.0,
                (x0, rec.t),
                (x1, rec.t),
                0.0,
                &below,
                &above,
            );
        }
    }
    out.lattice = sol.splits.iter().map(|r| r.t).collect();
    out.splits = sol.lattice.iter().map(|&xj| lattice_to_split(sol, xj)).collect();
    let mut events: Vec<EventRecord> = sol.events.iter().map(|e| EventRecord { t: e.x, x: e.t, ..e.clone() }).collect();
    events.sort_by(|a, b| a.t.total_cmp(&b.t));
    out.events = events;
    out.initial = sol.left_trace.clone();
    out.final_slice = sol.right_trace.clone();
    out.left_trace = sol.initial.clone();
    out.right_trace = sol.final_slice.clone();
    out.np_max = sol.np_max;
    Ok(out)
}
