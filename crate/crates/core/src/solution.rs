//! Space-time record of a front-tracking run.

use crate::functionals::FunctionalSample;
use crate::riemann::{SolverParams, WaveKind};
use crate::state::{PiecewiseState, State};

/// Which variable plays the role of time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// Evolution in `t`, space `x`.
    Forward,
    /// Evolution in `x`, space `t`.
    Rightward,
}

impl Orientation {
    pub fn label(self) -> &'static str {
        match self {
            Orientation::Forward => "forward",
            Orientation::Rightward => "rightward",
        }
    }
}

/// How the source term enters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Homogeneous front tracking, source ignored.
    Plain,
    /// Splitting map on the lines `t = jh`.
    Splitting,
    /// Stationary zero-waves on the lattice `x = jh`.
    ZeroWave,
}

impl Mode {
    pub fn label(self) -> &'static str {
        match self {
            Mode::Plain => "eps",
            Mode::Splitting => "he",
            Mode::ZeroWave => "eh",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EventKind {
    Initial,
    FrontFront,
    LatticeCross,
    FrontBoundary,
    BoundaryDataJump,
    SplitLine,
    End,
}

impl EventKind {
    pub fn label(self) -> &'static str {
        match self {
            EventKind::Initial => "initial",
            EventKind::FrontFront => "front_front",
            EventKind::LatticeCross => "lattice_cross",
            EventKind::FrontBoundary => "front_boundary",
            EventKind::BoundaryDataJump => "data_jump",
            EventKind::SplitLine => "split_line",
            EventKind::End => "end",
        }
    }

    /// Interaction, boundary and data events; split lines excluded.
    pub fn is_gamma1(self) -> bool {
        matches!(self, EventKind::FrontFront | EventKind::LatticeCross | EventKind::FrontBoundary | EventKind::BoundaryDataJump)
    }
}

/// Solver that resolved an event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    Initial,
    Approx,
    Simplified,
    Crude,
    /// Negligible interaction: both fronts cross with unchanged parameters.
    Translate,
    Boundary,
    Absorb,
    HRiemann,
    SimplifiedH,
    CrudeH,
    /// Negligible lattice crossing: states transported through the zero-wave.
    Transport,
    Split,
    End,
}

impl Action {
    pub fn label(self) -> &'static str {
        match self {
            Action::Initial => "initial",
            Action::Approx => "approx",
            Action::Simplified => "simplified",
            Action::Crude => "crude",
            Action::Translate => "translate",
            Action::Boundary => "boundary",
            Action::Absorb => "absorb",
            Action::HRiemann => "h_riemann",
            Action::SimplifiedH => "simplified_h",
            Action::CrudeH => "crude_h",
            Action::Transport => "transport",
            Action::Split => "split",
            Action::End => "end",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventRecord {
    pub t: f64,
    pub x: f64,
    pub kind: EventKind,
    pub action: Action,
    pub a: Option<u64>,
    pub b: Option<u64>,
    pub outgoing: u32,
    /// Non-physical amplitude plus accumulated front defects after the event.
    pub np_total: f64,
}

/// Straight piece of a front between two changes.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub front: u64,
    pub family: Option<usize>,
    pub kind: WaveKind,
    pub sigma: f64,
    pub gen: u32,
    pub defect: f64,
    pub t0: f64,
    pub x0: f64,
    pub t1: f64,
    pub x1: f64,
    pub speed: f64,
    left: u32,
    right: u32,
}

impl Segment {
    pub fn x_at(&self, t: f64) -> f64 {
        self.x0 + self.speed * (t - self.t0)
    }
}

/// States on both sides of a line `t = jh` where the splitting map acts.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitRecord {
    pub t: f64,
    pub before: PiecewiseState,
    pub after: PiecewiseState,
}

/// Front located on a time slice.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontAt {
    pub front: u64,
    pub x: f64,
    pub family: Option<usize>,
    pub kind: WaveKind,
    pub sigma: f64,
    pub defect: f64,
    pub left: State,
    pub right: State,
}

impl FrontAt {
    pub fn strength(&self) -> f64 {
        if self.kind.is_physical() {
            self.sigma.abs()
        } else {
            (&self.right - &self.left).norm()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontSolution {
    pub system: String,
    pub n: usize,
    pub m: usize,
    pub orientation: Orientation,
    pub mode: Mode,
    pub params: SolverParams,
    /// End of the evolution interval.
    pub horizon: f64,
    /// End of the space interval.
    pub length: f64,
    pub segments: Vec<Segment>,
    arena: Vec<f64>,
    pub events: Vec<EventRecord>,
    /// `u(·, 0+)` over the evolution interval.
    pub left_trace: PiecewiseState,
    /// `u(·, L−)` over the evolution interval.
    pub right_trace: PiecewiseState,
    pub initial: PiecewiseState,
    pub final_slice: PiecewiseState,
    /// Boundary data used by the run; zero placeholders in swapped views.
    pub g1: PiecewiseState,
    pub g2: PiecewiseState,
    pub splits: Vec<SplitRecord>,
    pub lattice: Vec<f64>,
    pub np_series: Vec<(f64, f64)>,
    pub np_max: f64,
    pub functionals: Vec<FunctionalSample>,
}

impl FrontSolution {
    pub(crate) fn empty(
        system: &str,
        n: usize,
        m: usize,
        orientation: Orientation,
        mode: Mode,
        params: SolverParams,
        horizon: f64,
        length: f64,
    ) -> Self {
        let zero = PiecewiseState::constant(0.0, horizon, State::zeros(n));
        FrontSolution {
            system: system.to_string(),
            n,
            m,
            orientation,
            mode,
            params,
            horizon,
            length,
            segments: Vec::new(),
            arena: Vec::new(),
            events: Vec::new(),
            left_trace: zero.clone(),
            right_trace: zero,
            initial: PiecewiseState::constant(0.0, length, State::zeros(n)),
            final_slice: PiecewiseState::constant(0.0, length, State::zeros(n)),
            g1: PiecewiseState::constant(0.0, horizon, State::zeros(n - m)),
            g2: PiecewiseState::constant(0.0, horizon, State::zeros(m)),
            splits: Vec::new(),
            lattice: Vec::new(),
            np_series: Vec::new(),
            np_max: 0.0,
            functionals: Vec::new(),
        }
    }

    fn store(&mut self, u: &State) -> u32 {
        let idx = (self.arena.len() / self.n) as u32;
        self.arena.extend_from_slice(u.as_slice());
        idx
    }

    fn load(&self, idx: u32) -> State {
        let k = idx as usize * self.n;
        State::from_column_slice(&self.arena[k..k + self.n])
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn push_segment(
        &mut self,
        front: u64,
        family: Option<usize>,
        kind: WaveKind,
        sigma: f64,
        gen: u32,
        defect: f64,
        (t0, x0): (f64, f64),
        (t1, x1): (f64, f64),
        speed: f64,
        left: &State,
        right: &State,
    ) {
        if t1 <= t0 {
            return;
        }
        let left = self.store(left);
        let right = self.store(right);
        self.segments.push(Segment { front, family, kind, sigma, gen, defect, t0, x0, t1, x1, speed, left, right });
    }

    pub fn seg_left(&self, s: &Segment) -> State {
        self.load(s.left)
    }

    pub fn seg_right(&self, s: &Segment) -> State {
        self.load(s.right)
    }

    /// Segments alive on `(t, t + dt)` for small `dt`, ordered in space.
    fn alive(&self, t: f64) -> Vec<&Segment> {
        let mut segs: Vec<&Segment> = self.segments.iter().filter(|s| s.t0 <= t && t < s.t1).collect();
        segs.sort_by(|a, b| a.x_at(t).total_cmp(&b.x_at(t)).then(a.speed.total_cmp(&b.speed)));
        segs
    }

    /// Fronts crossing the line at evolution time `t`, left to right.
    pub fn fronts_at(&self, t: f64) -> Vec<FrontAt> {
        self.alive(t)
            .into_iter()
            .map(|s| FrontAt {
                front: s.front,
                x: s.x_at(t),
                family: s.family,
                kind: s.kind,
                sigma: s.sigma,
                defect: s.defect,
                left: self.seg_left(s),
                right: self.seg_right(s),
            })
            .collect()
    }

    /// `u(t+, ·)`; at the horizon the final slice.
    pub fn slice(&self, t: f64) -> PiecewiseState {
        if t >= self.horizon {
            return self.final_slice.clone();
        }
        if t <= 0.0 {
            return self.initial.clone();
        }
        let segs = self.alive(t);
        if segs.is_empty() {
            return PiecewiseState::constant(0.0, self.length, self.left_trace.eval(t).clone());
        }
        let mut breaks = Vec::with_capacity(segs.len());
        let mut states = Vec::with_capacity(segs.len() + 1);
        states.push(self.seg_left(segs[0]));
        for s in &segs {
            breaks.push(s.x_at(t).clamp(0.0, self.length));
            states.push(self.seg_right(s));
        }
        PiecewiseState::new(0.0, self.length, breaks, states)
    }

    /// `u(t−, ·)`, built from the pieces ending at or after `t`.
    pub fn slice_before(&self, t: f64) -> PiecewiseState {
        if t <= 0.0 {
            return self.initial.clone();
        }
        let mut segs: Vec<&Segment> = self.segments.iter().filter(|s| s.t0 < t && t <= s.t1).collect();
        segs.sort_by(|a, b| a.x_at(t).total_cmp(&b.x_at(t)).then(b.speed.total_cmp(&a.speed)));
        if segs.is_empty() {
            return PiecewiseState::constant(0.0, self.length, self.left_trace.eval_left(t).clone());
        }
        let mut breaks = Vec::with_capacity(segs.len());
        let mut states = Vec::with_capacity(segs.len() + 1);
        states.push(self.seg_left(segs[0]));
        for s in &segs {
            breaks.push(s.x_at(t).clamp(0.0, self.length));
            states.push(self.seg_right(s));
        }
        PiecewiseState::new(0.0, self.length, breaks, states)
    }

    /// Evaluation at a point, from the slice through it.
    pub fn value(&self, t: f64, x: f64) -> State {
        self.slice(t).eval(x).clone()
    }

    pub fn count(&self, kind: EventKind) -> usize {
        self.events.iter().filter(|e| e.kind == kind).count()
    }

    pub fn max_state_norm(&self) -> f64 {
        self.arena.chunks(self.n).map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt()).fold(0.0, f64::max)
    }
}
