//! Event-driven front tracking.
//!
//! Fronts live in a slab addressed by id and form a doubly linked list in
//! spatial order. Events sit in a min-heap keyed by `(time, kind rank, lowest
//! id)` and are invalidated lazily through per-front versions.
//!
//! Interactions whose size falls below the thresholds are resolved without
//! creating fronts: the incoming fronts keep their parameters and the small
//! mismatch with the exact wave relations is tracked per front as a `defect`.
//! A front whose defect exceeds `defect_tol` is re-solved at the next split
//! line or lattice crossing.

mod queue;

pub use queue::{Event, Target};

use crate::error::{Error, Result};
use crate::functionals::{tv_after, FunctionalSample, GlimmSetup, GlimmValues, WaveItem};
use crate::hypsys::{avg_eigen, eigenvalues, phi_h, phi_h_inv, split_map, SystemDef};
use crate::riemann::{
    approx_riemann, boundary_riemann_left, boundary_riemann_right, crude_h_riemann, crude_riemann, h_riemann, simplified_h_riemann,
    simplified_riemann, Side, SolverParams, Wave, WaveKind,
};
use crate::solution::{Action, EventKind, EventRecord, FrontSolution, Mode, Orientation, SplitRecord};
use crate::state::{PiecewiseState, State, StepFn};
use queue::Queue;

/// Tolerance for matching jump locations with lattice points.
const LATTICE_SNAP: f64 = 1e-12;

/// Input of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub params: SolverParams,
    pub mode: Mode,
    /// Label stored in the solution; the engine always evolves in its own time.
    pub orientation: Orientation,
    pub length: f64,
    pub horizon: f64,
    pub ubar: PiecewiseState,
    pub g1: StepFn,
    pub g2: StepFn,
    pub glimm: Option<GlimmSetup>,
    /// Exponential rate in the growth diagnostic.
    pub blowup_rate: f64,
}

impl RunSpec {
    pub fn new(params: SolverParams, mode: Mode, length: f64, horizon: f64, ubar: PiecewiseState, g1: StepFn, g2: StepFn) -> Self {
        RunSpec { params, mode, orientation: Orientation::Forward, length, horizon, ubar, g1, g2, glimm: None, blowup_rate: 2.0 }
    }
}

/// `Λ(ū, g1, g2)`: total variation of the data plus `|ū(0+)|` and the corner
/// compatibility gaps.
pub fn data_functional(sys: &SystemDef, ubar: &PiecewiseState, g1: &StepFn, g2: &StepFn) -> f64 {
    ubar.tv()
        + ubar.first().norm()
        + g1.tv()
        + g2.tv()
        + (sys.eval_b1(ubar.first()) - g1.first()).norm()
        + (sys.eval_b2(ubar.last()) - g2.first()).norm()
}

/// Lattice points `jh` strictly inside `(0, L)`.
pub fn lattice_points(length: f64, h: f64) -> Vec<f64> {
    let mut pts = Vec::new();
    let mut j = 1usize;
    loop {
        let x = j as f64 * h;
        if x >= length - LATTICE_SNAP {
            break;
        }
        pts.push(x);
        j += 1;
    }
    pts
}

/// Split times `jh` strictly inside `(0, T)`.
pub fn split_times(horizon: f64, h: f64) -> Vec<f64> {
    lattice_points(horizon, h)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Front {
    pub id: u64,
    pub family: Option<usize>,
    pub kind: WaveKind,
    pub sigma: f64,
    /// Anchor point of the current straight piece.
    pub t0: f64,
    pub x0: f64,
    pub speed: f64,
    pub gen: u32,
    pub left: State,
    pub right: State,
    /// Estimated distance of `right` from the exact wave curve through `left`.
    pub defect: f64,
    /// Seed of the speed perturbation; counts physical fronts only.
    jkey: u64,
    version: u32,
    prev: Option<usize>,
    next: Option<usize>,
}

impl Front {
    pub fn x_at(&self, t: f64) -> f64 {
        self.x0 + self.speed * (t - self.t0)
    }

    pub fn strength(&self) -> f64 {
        if self.kind.is_physical() {
            self.sigma.abs()
        } else {
            (&self.right - &self.left).norm()
        }
    }

    fn wave(&self) -> Wave {
        Wave {
            family: self.family,
            kind: self.kind,
            sigma: self.sigma,
            speed: self.speed,
            left: self.left.clone(),
            right: self.right.clone(),
        }
    }
}

/// Deterministic value in `[-1, 1)` derived from a front id.
fn jitter(id: u64) -> f64 {
    let mut z = id.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
}

/// `|(S(b) − S(a)) − (b − a)| + |b − a|·|S(a) − a|`: size of the change of a
/// jump `[a, b]` mapped to `[S(a), S(b)]`, relative to the wave curves.
fn mapped_defect(a: &State, b: &State, sa: &State, sb: &State) -> f64 {
    ((sb - sa) - (b - a)).norm() + (b - a).norm() * (sa - a).norm()
}

/// Generation of outgoing waves: a family already present continues with the
/// smallest incoming generation, everything else is one deeper.
fn generations(waves: &[Wave], incoming: &[(Option<usize>, u32)]) -> Vec<u32> {
    let deepest = incoming.iter().map(|p| p.1).max().unwrap_or(0);
    waves
        .iter()
        .map(|w| match w.kind {
            WaveKind::Zero => 0,
            _ => incoming.iter().filter(|p| p.0.is_some() && p.0 == w.family).map(|p| p.1).min().unwrap_or(deepest + 1),
        })
        .collect()
}

struct Outcome {
    action: Action,
    x: f64,
    a: Option<u64>,
    b: Option<u64>,
    outgoing: u32,
    law: f64,
}

pub struct Engine<'a> {
    sys: &'a SystemDef,
    spec: RunSpec,
    slots: Vec<Option<Front>>,
    head: Option<usize>,
    tail: Option<usize>,
    /// State of the strip when no front is present.
    bg: State,
    queue: Queue,
    now: f64,
    sol: FrontSolution,
    np_sum: f64,
    defect_sum: f64,
    strength_sum: f64,
    phys_seq: u64,
    v0: f64,
    left_trace: Vec<(f64, State)>,
    right_trace: Vec<(f64, State)>,
    done: bool,
}

impl<'a> Engine<'a> {
    /// Validates the data, resolves all initial jumps and corners and schedules
    /// the first events.
    pub fn init_from_data(sys: &'a SystemDef, spec: RunSpec) -> Result<Self> {
        let p = &spec.params;
        p.validate(sys)?;
        if !(spec.length > 0.0 && spec.horizon > 0.0) {
            return Err(Error::Config("length and horizon must be positive".into()));
        }
        let (n, m) = (sys.n, sys.m);
        if spec.ubar.dim() != n || spec.g1.dim() != n - m || spec.g2.dim() != m {
            return Err(Error::Config("data dimensions do not match the system".into()));
        }
        for u in &spec.ubar.states {
            sys.check_ball(u)?;
        }
        let mut lambda = data_functional(sys, &spec.ubar, &spec.g1, &spec.g2);
        if spec.mode == Mode::ZeroWave {
            lambda += sys.gamma * spec.length;
        }
        if lambda > p.delta {
            return Err(Error::DataTooLarge { lambda, delta: p.delta });
        }
        let mut sol = FrontSolution::empty(&sys.name, n, m, spec.orientation, spec.mode, spec.params.clone(), spec.horizon, spec.length);
        sol.initial = spec.ubar.clone();
        sol.g1 = spec.g1.clone();
        sol.g2 = spec.g2.clone();
        let mut eng = Engine {
            sys,
            bg: spec.ubar.first().clone(),
            spec,
            slots: Vec::new(),
            head: None,
            tail: None,
            queue: Queue::default(),
            now: 0.0,
            sol,
            np_sum: 0.0,
            defect_sum: 0.0,
            strength_sum: 0.0,
            phys_seq: 0,
            v0: 0.0,
            left_trace: Vec::new(),
            right_trace: Vec::new(),
            done: false,
        };
        eng.initial_fans().map_err(|e| e.at(0.0, 0.0))?;
        eng.schedule_static();
        eng.v0 = eng.total_strength(0.0, true);
        let g = eng.glimm_values(0.0, true);
        if let Some(g) = g {
            eng.sol.functionals.push(FunctionalSample {
                t: 0.0,
                kind: EventKind::Initial,
                before: g,
                after: g,
                law: 0.0,
                in_left: true,
                in_right: true,
            });
        }
        let outgoing = eng.iter_ids().count() as u32;
        eng.record(EventKind::Initial, Outcome { action: Action::Initial, x: 0.0, a: None, b: None, outgoing, law: 0.0 });
        Ok(eng)
    }

    fn params(&self) -> &SolverParams {
        &self.spec.params
    }

    fn initial_fans(&mut self) -> Result<()> {
        let sys = self.sys;
        let ubar = self.spec.ubar.clone();
        let length = self.spec.length;
        let mut groups: Vec<(f64, Vec<Wave>)> = Vec::new();
        let (ul_corner, left_fan) = boundary_riemann_left(sys, self.params(), self.spec.g1.first(), ubar.first())?;
        groups.push((0.0, left_fan.waves));
        let lattice = if self.spec.mode == Mode::ZeroWave { lattice_points(length, self.params().h) } else { Vec::new() };
        self.sol.lattice = lattice.clone();
        let mut jumps: Vec<(f64, State, State)> =
            ubar.breaks.iter().enumerate().map(|(k, &x)| (x, ubar.states[k].clone(), ubar.states[k + 1].clone())).collect();
        for &xl in &lattice {
            match jumps.iter_mut().find(|j| (j.0 - xl).abs() <= LATTICE_SNAP) {
                Some(j) => j.0 = xl,
                None => {
                    let u = ubar.eval(xl).clone();
                    jumps.push((xl, u.clone(), u));
                }
            }
        }
        jumps.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (x, a, b) in jumps {
            let on_lattice = lattice.contains(&x);
            let fan = if on_lattice { h_riemann(sys, self.params(), &a, &b)? } else { approx_riemann(sys, self.params(), &a, &b)? };
            groups.push((x, fan.waves));
        }
        let (ur_corner, right_fan) = boundary_riemann_right(sys, self.params(), ubar.last(), self.spec.g2.first())?;
        groups.push((length, right_fan.waves));
        self.bg = ul_corner.clone();
        let mut prev: Option<usize> = None;
        for (x, waves) in groups {
            let mut ids = Vec::with_capacity(waves.len());
            for w in &waves {
                let id = self.alloc(w, if w.kind == WaveKind::Zero { 0 } else { 1 }, 0.0, x);
                ids.push(id);
            }
            self.monotone(&ids);
            for &id in &ids {
                self.link_after(prev, id);
                prev = Some(id);
                self.account(id, 1.0);
            }
        }
        if self.head.is_none() {
            self.bg = ur_corner;
        }
        let ids: Vec<usize> = self.iter_ids().collect();
        for w in ids.windows(2) {
            self.schedule_pair(w[0], w[1]);
        }
        self.schedule_walls();
        self.trace_update();
        Ok(())
    }

    fn schedule_static(&mut self) {
        let horizon = self.spec.horizon;
        if self.spec.mode == Mode::Splitting {
            for (j, t) in split_times(horizon, self.params().h).into_iter().enumerate() {
                self.queue.push(Event { time: t, kind: EventKind::SplitLine, target: Target::Split { j: j + 1 } });
            }
        }
        for (g, side) in [(&self.spec.g1, Side::Left), (&self.spec.g2, Side::Right)] {
            for &t in &g.breaks {
                if t > 0.0 && t < horizon {
                    self.queue.push(Event { time: t, kind: EventKind::BoundaryDataJump, target: Target::Data { side } });
                }
            }
        }
        self.queue.push(Event { time: horizon, kind: EventKind::End, target: Target::End });
    }

    // ---- front list -------------------------------------------------------

    fn front(&self, id: usize) -> &Front {
        self.slots[id].as_ref().expect("live front")
    }

    fn front_mut(&mut self, id: usize) -> &mut Front {
        self.slots[id].as_mut().expect("live front")
    }

    fn iter_ids(&self) -> impl Iterator<Item = usize> + '_ {
        std::iter::successors(self.head, move |&id| self.front(id).next)
    }

    /// Live fronts in spatial order.
    pub fn fronts(&self) -> Vec<&Front> {
        self.iter_ids().map(|id| self.front(id)).collect()
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    fn base_speed(&self, family: Option<usize>, kind: WaveKind, left: &State, right: &State) -> Result<f64> {
        Ok(match (kind, family) {
            (WaveKind::Rarefaction, Some(i)) => eigenvalues(self.sys, right)?[i],
            (WaveKind::Shock | WaveKind::Contact, Some(i)) => avg_eigen(self.sys, left, right)?.lambda[i],
            (WaveKind::NonPhysical, _) => self.params().np_speed,
            _ => 0.0,
        })
    }

    fn with_jitter(&self, key: u64, kind: WaveKind, base: f64) -> f64 {
        if kind.is_physical() {
            base + self.params().eps * 2f64.powi(-20) * jitter(key)
        } else {
            base
        }
    }

    fn alloc(&mut self, w: &Wave, gen: u32, t: f64, x: f64) -> usize {
        let id = self.slots.len();
        let jkey = self.phys_seq;
        if w.kind.is_physical() {
            self.phys_seq += 1;
        }
        let speed = self.with_jitter(jkey, w.kind, w.speed);
        self.slots.push(Some(Front {
            id: id as u64,
            family: w.family,
            kind: w.kind,
            sigma: w.sigma,
            t0: t,
            x0: x,
            speed,
            gen,
            left: w.left.clone(),
            right: w.right.clone(),
            defect: 0.0,
            jkey,
            version: 0,
            prev: None,
            next: None,
        }));
        id
    }

    /// Nondecreasing speeds inside a fan emitted from one point.
    fn monotone(&mut self, ids: &[usize]) {
        for k in 1..ids.len() {
            let s = self.front(ids[k - 1]).speed;
            let f = self.front_mut(ids[k]);
            if f.speed < s {
                f.speed = s;
            }
        }
    }

    fn link_after(&mut self, prev: Option<usize>, id: usize) {
        let next = match prev {
            Some(p) => self.front(p).next,
            None => self.head,
        };
        {
            let f = self.front_mut(id);
            f.prev = prev;
            f.next = next;
        }
        match prev {
            Some(p) => self.front_mut(p).next = Some(id),
            None => self.head = Some(id),
        }
        match next {
            Some(nx) => self.front_mut(nx).prev = Some(id),
            None => self.tail = Some(id),
        }
    }

    fn unlink(&mut self, id: usize) {
        let (prev, next) = {
            let f = self.front(id);
            (f.prev, f.next)
        };
        match prev {
            Some(p) => self.front_mut(p).next = next,
            None => self.head = next,
        }
        match next {
            Some(nx) => self.front_mut(nx).prev = prev,
            None => self.tail = prev,
        }
    }

    fn account(&mut self, id: usize, sign: f64) {
        let f = self.front(id);
        let s = f.strength();
        let np = if f.kind == WaveKind::NonPhysical { s } else { 0.0 };
        let d = f.defect;
        self.np_sum += sign * np;
        self.defect_sum += sign * d;
        self.strength_sum += sign * s;
    }

    fn close(&mut self, id: usize, t: f64) {
        let f = self.slots[id].as_ref().expect("live front");
        let x1 = f.x_at(t);
        let (front, family, kind, sigma, gen, defect, t0, x0, speed) =
            (f.id, f.family, f.kind, f.sigma, f.gen, f.defect, f.t0, f.x0, f.speed);
        let (left, right) = (f.left.clone(), f.right.clone());
        self.sol.push_segment(front, family, kind, sigma, gen, defect, (t0, x0), (t, x1), speed, &left, &right);
    }

    /// Closes the current piece of `id` and starts a new one at time `t`.
    fn reanchor(&mut self, id: usize, t: f64) {
        self.close(id, t);
        let f = self.front_mut(id);
        f.x0 = f.x_at(t);
        f.t0 = t;
        f.version += 1;
    }

    fn remove(&mut self, id: usize, t: f64) {
        self.account(id, -1.0);
        self.close(id, t);
        self.unlink(id);
        self.slots[id] = None;
    }

    /// Replaces the fronts `removed` (contiguous, between `prev` and `next`)
    /// by the fan `waves` emitted from `(t, x)`. `fill` is the strip state if
    /// no front remains.
    fn replace(
        &mut self,
        prev: Option<usize>,
        next: Option<usize>,
        removed: &[usize],
        waves: &[Wave],
        gens: &[u32],
        (t, x): (f64, f64),
        fill: &State,
    ) -> Vec<usize> {
        for &id in removed {
            self.remove(id, t);
        }
        let mut ids = Vec::with_capacity(waves.len());
        for (w, &g) in waves.iter().zip(gens) {
            ids.push(self.alloc(w, g, t, x));
        }
        self.monotone(&ids);
        let mut at = prev;
        for &id in &ids {
            self.link_after(at, id);
            at = Some(id);
            self.account(id, 1.0);
        }
        if self.head.is_none() {
            self.bg = fill.clone();
        }
        let chain: Vec<usize> = prev.into_iter().chain(ids.iter().copied()).chain(next).collect();
        for w in chain.windows(2) {
            self.schedule_pair(w[0], w[1]);
        }
        self.schedule_walls();
        let _ = next;
        ids
    }

    fn schedule_pair(&mut self, a: usize, b: usize) {
        let (fa, fb) = (self.front(a), self.front(b));
        if fa.speed <= fb.speed {
            return;
        }
        let gap = (fb.x_at(self.now) - fa.x_at(self.now)).max(0.0);
        let time = self.now + gap / (fa.speed - fb.speed);
        if time > self.spec.horizon {
            return;
        }
        let kind = if fa.kind == WaveKind::Zero || fb.kind == WaveKind::Zero { EventKind::LatticeCross } else { EventKind::FrontFront };
        let target = Target::Pair { a, va: fa.version, b, vb: fb.version };
        self.queue.push(Event { time, kind, target });
    }

    fn schedule_walls(&mut self) {
        if let Some(h) = self.head {
            let f = self.front(h);
            if f.speed < 0.0 {
                let time = (f.t0 - f.x0 / f.speed).max(self.now);
                if time <= self.spec.horizon {
                    let target = Target::Wall { a: h, va: f.version, side: Side::Left };
                    self.queue.push(Event { time, kind: EventKind::FrontBoundary, target });
                }
            }
        }
        if let Some(tl) = self.tail {
            let f = self.front(tl);
            if f.speed > 0.0 {
                let time = (f.t0 + (self.spec.length - f.x0) / f.speed).max(self.now);
                if time <= self.spec.horizon {
                    let target = Target::Wall { a: tl, va: f.version, side: Side::Right };
                    self.queue.push(Event { time, kind: EventKind::FrontBoundary, target });
                }
            }
        }
    }

    fn left_edge(&self) -> State {
        self.head.map_or_else(|| self.bg.clone(), |h| self.front(h).left.clone())
    }

    fn right_edge(&self) -> State {
        self.tail.map_or_else(|| self.bg.clone(), |t| self.front(t).right.clone())
    }

    fn live(&self, id: usize, version: u32) -> bool {
        matches!(self.slots.get(id), Some(Some(f)) if f.version == version)
    }

    fn valid(&self, ev: &Event) -> bool {
        match ev.target {
            Target::Pair { a, va, b, vb } => self.live(a, va) && self.live(b, vb) && self.front(a).next == Some(b),
            Target::Wall { a, va, side } => {
                self.live(a, va)
                    && match side {
                        Side::Left => self.head == Some(a),
                        Side::Right => self.tail == Some(a),
                    }
            }
            _ => true,
        }
    }

    // ---- events -----------------------------------------------------------

    /// Earliest valid pending event; `None` once the horizon was processed.
    pub fn next_event(&mut self) -> Option<Event> {
        if self.done {
            return None;
        }
        while let Some(ev) = self.queue.pop() {
            if self.valid(&ev) {
                return Some(ev);
            }
        }
        None
    }

    pub fn apply_event(&mut self, ev: Event) -> Result<()> {
        let t = ev.time.max(self.now);
        self.now = t;
        if self.sol.events.len() >= self.params().event_cap {
            return Err(Error::EventCap { cap: self.params().event_cap, t });
        }
        if ev.kind == EventKind::End {
            self.done = true;
            self.record(EventKind::End, Outcome { action: Action::End, x: 0.0, a: None, b: None, outgoing: 0, law: 0.0 });
            return Ok(());
        }
        let before = self.glimm_values(t, true);
        let out = match ev.target {
            Target::Pair { a, b, .. } => {
                let x = self.front(a).x_at(t);
                self.pair(a, b, t).map_err(|e| e.at(t, x))?
            }
            Target::Wall { a, side, .. } => self.wall(a, side, t).map_err(|e| e.at(t, self.wall_x(side)))?,
            Target::Data { side } => self.data_jump(side, t).map_err(|e| e.at(t, self.wall_x(side)))?,
            Target::Split { .. } => self.split(t).map_err(|e| e.at(t, 0.0))?,
            Target::End => unreachable!(),
        };
        if let (Some(before), Some(after)) = (before, self.glimm_values(t, false)) {
            let setup = self.spec.glimm.as_ref().unwrap();
            let in_left = out.x < setup.left_edge(t);
            let in_right = out.x > setup.right_edge(t);
            self.sol.functionals.push(FunctionalSample { t, kind: ev.kind, before, after, law: out.law, in_left, in_right });
        }
        self.record(ev.kind, out);
        self.trace_update();
        let v = self.total_strength(t, false);
        let rate = self.spec.blowup_rate;
        let bound = 2.0 * (self.v0 + self.sys.gamma * (self.spec.length + t) + self.params().eps) * (rate * t).exp();
        if v > bound {
            return Err(Error::BlowUp { value: v, bound }.at(t, 0.0));
        }
        Ok(())
    }

    fn wall_x(&self, side: Side) -> f64 {
        match side {
            Side::Left => 0.0,
            Side::Right => self.spec.length,
        }
    }

    fn total_strength(&self, t: f64, include_now: bool) -> f64 {
        self.strength_sum.max(0.0) + tv_after(&self.spec.g1, t, include_now) + tv_after(&self.spec.g2, t, include_now)
    }

    fn record(&mut self, kind: EventKind, out: Outcome) {
        let np_total = (self.np_sum + self.defect_sum).max(0.0);
        self.sol.np_max = self.sol.np_max.max(np_total);
        self.sol.np_series.push((self.now, np_total));
        self.sol.events.push(EventRecord {
            t: self.now,
            x: out.x,
            kind,
            action: out.action,
            a: out.a,
            b: out.b,
            outgoing: out.outgoing,
            np_total,
        });
    }

    fn trace_update(&mut self) {
        let (l, r) = (self.left_edge(), self.right_edge());
        let t = self.now;
        for (trace, u) in [(&mut self.left_trace, l), (&mut self.right_trace, r)] {
            match trace.last_mut() {
                Some((tt, uu)) if *tt == t => *uu = u,
                Some((_, uu)) if *uu == u => {}
                _ => trace.push((t, u)),
            }
        }
    }

    fn glimm_values(&self, t: f64, include_now: bool) -> Option<GlimmValues> {
        let setup = self.spec.glimm.as_ref()?;
        let items: Vec<WaveItem> = self
            .iter_ids()
            .map(|id| {
                let f = self.front(id);
                WaveItem { x: f.x_at(t), family: f.family, kind: f.kind, strength: f.strength() + f.defect }
            })
            .collect();
        Some(setup.evaluate(&items, t, &self.spec.g1, &self.spec.g2, include_now))
    }

    fn pair(&mut self, a: usize, b: usize, t: f64) -> Result<Outcome> {
        let (fa, fb) = (self.front(a).clone(), self.front(b).clone());
        if fa.kind == WaveKind::Zero || fb.kind == WaveKind::Zero {
            return self.lattice(a, b, t);
        }
        let x = 0.5 * (fa.x_at(t) + fb.x_at(t));
        let (prev, next) = (fa.prev, fb.next);
        let incoming = [(fa.family, fa.gen), (fb.family, fb.gen)];
        let law = fa.strength() * fb.strength();
        let p = self.params().clone();
        let (action, fan) = if fa.kind == WaveKind::NonPhysical || fb.kind == WaveKind::NonPhysical {
            (Action::Crude, crude_riemann(self.sys, &p, &fa.wave(), &fb.wave())?)
        } else if law < p.rho {
            return self.translate(a, b, t, x, law);
        } else if fa.gen.max(fb.gen) > p.gen_max {
            (Action::Simplified, simplified_riemann(self.sys, &p, &fa.wave(), &fb.wave())?)
        } else {
            (Action::Approx, approx_riemann(self.sys, &p, &fa.left, &fb.right)?)
        };
        let gens = generations(&fan.waves, &incoming);
        let ids = self.replace(prev, next, &[a, b], &fan.waves, &gens, (t, x), &fa.left);
        Ok(Outcome { action, x, a: Some(fa.id), b: Some(fb.id), outgoing: ids.len() as u32, law })
    }

    /// Negligible interaction: the fronts pass each other keeping their
    /// parameters and speeds (or merge when of one family).
    fn translate(&mut self, a: usize, b: usize, t: f64, x: f64, law: f64) -> Result<Outcome> {
        let (fa, fb) = (self.front(a).clone(), self.front(b).clone());
        let (ul, um, ur) = (&fa.left, &fa.right, &fb.right);
        if fa.family == fb.family {
            let i = fa.family.unwrap();
            let sigma = fa.sigma + fb.sigma;
            let kind = if !self.sys.is_gn(i) {
                WaveKind::Contact
            } else if sigma < 0.0 {
                WaveKind::Shock
            } else {
                WaveKind::Rarefaction
            };
            let speed = self.base_speed(Some(i), kind, ul, ur)?;
            let w = Wave { family: Some(i), kind, sigma, speed, left: ul.clone(), right: ur.clone() };
            let gen = fa.gen.min(fb.gen);
            let ids = self.replace(fa.prev, fb.next, &[a, b], &[w], &[gen], (t, x), ul);
            let id = ids[0];
            self.account(id, -1.0);
            self.front_mut(id).defect = fa.defect + fb.defect + 2.0 * law;
            self.account(id, 1.0);
            return Ok(Outcome { action: Action::Translate, x, a: Some(fa.id), b: Some(fb.id), outgoing: 1, law });
        }
        let w = ul + (ur - um);
        self.sys.check_ball(&w)?;
        for id in [a, b] {
            self.account(id, -1.0);
            self.reanchor(id, t);
        }
        let prev = fa.prev;
        self.unlink(a);
        self.link_after(Some(b), a);
        {
            let f = self.front_mut(b);
            f.left = ul.clone();
            f.right = w.clone();
            f.defect += law;
        }
        {
            let f = self.front_mut(a);
            f.left = w;
            f.right = ur.clone();
            f.defect += law;
        }
        for id in [a, b] {
            self.account(id, 1.0);
        }
        let chain: Vec<usize> = prev.into_iter().chain([b, a]).chain(self.front(a).next).collect();
        for w in chain.windows(2) {
            self.schedule_pair(w[0], w[1]);
        }
        self.schedule_walls();
        Ok(Outcome { action: Action::Translate, x, a: Some(fa.id), b: Some(fb.id), outgoing: 2, law })
    }

    fn lattice(&mut self, a: usize, b: usize, t: f64) -> Result<Outcome> {
        let (fa, fb) = (self.front(a).clone(), self.front(b).clone());
        let (z, p, side) = if fb.kind == WaveKind::Zero { (&fb, &fa, Side::Left) } else { (&fa, &fb, Side::Right) };
        let x = z.x0;
        let (prev, next) = (fa.prev, fb.next);
        let (ul, ur) = (fa.left.clone(), fb.right.clone());
        let params = self.params().clone();
        let proxy = (&z.right - &z.left).norm();
        let law = p.strength() * proxy;
        let incoming = [(p.family, p.gen)];
        let (action, fan) = if p.kind == WaveKind::NonPhysical {
            (Action::CrudeH, crude_h_riemann(self.sys, &params, &ul, &ur)?)
        } else if law >= params.rho || p.defect > params.defect_tol {
            if p.gen > params.gen_max {
                let i = p.family.unwrap();
                (Action::SimplifiedH, simplified_h_riemann(self.sys, &params, i, p.sigma, &ul, &ur, side)?)
            } else {
                (Action::HRiemann, h_riemann(self.sys, &params, &ul, &ur)?)
            }
        } else {
            return self.transport(a, b, side, t, law);
        };
        let gens = generations(&fan.waves, &incoming);
        let ids = self.replace(prev, next, &[a, b], &fan.waves, &gens, (t, x), &ul);
        Ok(Outcome { action, x, a: Some(fa.id), b: Some(fb.id), outgoing: ids.len() as u32, law })
    }

    /// Negligible lattice crossing: the physical front moves through the
    /// zero-wave, states on the far side follow from the source map.
    fn transport(&mut self, a: usize, b: usize, side: Side, t: f64, law: f64) -> Result<Outcome> {
        let (fa, fb) = (self.front(a).clone(), self.front(b).clone());
        let h = self.params().h;
        let (p, z, mid, new_left, new_right, defect) = match side {
            Side::Left => {
                // a = physical [uL, uM], b = zero [uM, uR].
                let (ul, um, ur) = (&fa.left, &fa.right, &fb.right);
                let zl = phi_h(self.sys, ul, h)?;
                let d = mapped_defect(ul, um, &zl, ur);
                (a, b, zl.clone(), (ul.clone(), zl.clone()), (zl, ur.clone()), d)
            }
            Side::Right => {
                // a = zero [uL, uM], b = physical [uM, uR].
                let (ul, um, ur) = (&fa.left, &fa.right, &fb.right);
                let w = phi_h_inv(self.sys, ur, h)?;
                let d = mapped_defect(um, ur, ul, &w);
                (b, a, w.clone(), (ul.clone(), w.clone()), (w, ur.clone()), d)
            }
        };
        let _ = mid;
        let x = self.front(z).x0;
        let prev = fa.prev;
        for id in [a, b] {
            self.account(id, -1.0);
            self.reanchor(id, t);
        }
        self.unlink(a);
        self.link_after(Some(b), a);
        // New order: b, a.
        {
            let f = self.front_mut(b);
            f.left = new_left.0;
            f.right = new_left.1;
        }
        {
            let f = self.front_mut(a);
            f.left = new_right.0;
            f.right = new_right.1;
        }
        let (family, kind, left, right, key) = {
            let f = self.front(p);
            (f.family, f.kind, f.left.clone(), f.right.clone(), f.jkey)
        };
        let base = self.base_speed(family, kind, &left, &right)?;
        let speed = self.with_jitter(key, kind, base);
        {
            let f = self.front_mut(p);
            f.defect += defect;
            f.speed = speed;
        }
        for id in [a, b] {
            self.account(id, 1.0);
        }
        let chain: Vec<usize> = prev.into_iter().chain([b, a]).chain(self.front(a).next).collect();
        for w in chain.windows(2) {
            self.schedule_pair(w[0], w[1]);
        }
        self.schedule_walls();
        Ok(Outcome { action: Action::Transport, x, a: Some(fa.id), b: Some(fb.id), outgoing: 2, law })
    }

    fn wall(&mut self, a: usize, side: Side, t: f64) -> Result<Outcome> {
        let f = self.front(a).clone();
        let params = self.params().clone();
        let law = f.strength();
        let x = self.wall_x(side);
        let small = f.kind == WaveKind::NonPhysical || law < params.rho || f.gen > params.gen_max;
        if small {
            let fill = match side {
                Side::Left => f.right.clone(),
                Side::Right => f.left.clone(),
            };
            self.replace(f.prev, f.next, &[a], &[], &[], (t, x), &fill);
            return Ok(Outcome { action: Action::Absorb, x, a: Some(f.id), b: None, outgoing: 0, law });
        }
        let (ub, fan) = match side {
            Side::Left => boundary_riemann_left(self.sys, &params, self.spec.g1.eval(t), &f.right)?,
            Side::Right => boundary_riemann_right(self.sys, &params, &f.left, self.spec.g2.eval(t))?,
        };
        let gens = vec![f.gen; fan.waves.len()];
        let ids = self.replace(f.prev, f.next, &[a], &fan.waves, &gens, (t, x), &ub);
        Ok(Outcome { action: Action::Boundary, x, a: Some(f.id), b: None, outgoing: ids.len() as u32, law })
    }

    fn boundary_fan(&mut self, side: Side, t: f64) -> Result<u32> {
        let params = self.params().clone();
        let (ub, fan, prev, next) = match side {
            Side::Left => {
                let (ub, fan) = boundary_riemann_left(self.sys, &params, self.spec.g1.eval(t), &self.left_edge())?;
                (ub, fan, None, self.head)
            }
            Side::Right => {
                let (ub, fan) = boundary_riemann_right(self.sys, &params, &self.right_edge(), self.spec.g2.eval(t))?;
                (ub, fan, self.tail, None)
            }
        };
        let gens = vec![1; fan.waves.len()];
        let ids = self.replace(prev, next, &[], &fan.waves, &gens, (t, self.wall_x(side)), &ub);
        Ok(ids.len() as u32)
    }

    fn data_jump(&mut self, side: Side, t: f64) -> Result<Outcome> {
        let g = match side {
            Side::Left => &self.spec.g1,
            Side::Right => &self.spec.g2,
        };
        let law = (g.eval(t) - g.eval_left(t)).norm();
        let outgoing = self.boundary_fan(side, t)?;
        Ok(Outcome { action: Action::Boundary, x: self.wall_x(side), a: None, b: None, outgoing, law })
    }

    fn split(&mut self, t: f64) -> Result<Outcome> {
        let sys = self.sys;
        let h = self.params().h;
        let ids: Vec<usize> = self.iter_ids().collect();
        let mut states = vec![self.left_edge()];
        let mut breaks = Vec::with_capacity(ids.len());
        for &id in &ids {
            let f = self.front(id);
            breaks.push(f.x_at(t).clamp(0.0, self.spec.length));
            states.push(f.right.clone());
        }
        let mapped: Vec<State> = states.iter().map(|u| split_map(sys, u, h)).collect::<Result<_>>()?;
        let before = PiecewiseState::new(0.0, self.spec.length, breaks.clone(), states.clone());
        let after = PiecewiseState::new(0.0, self.spec.length, breaks, mapped.clone());
        self.sol.splits.push(SplitRecord { t, before, after });
        if ids.is_empty() {
            self.bg = mapped[0].clone();
        }
        for (k, &id) in ids.iter().enumerate() {
            self.account(id, -1.0);
            self.reanchor(id, t);
            let (family, kind, key) = (self.front(id).family, self.front(id).kind, self.front(id).jkey);
            let d = if kind.is_physical() { mapped_defect(&states[k], &states[k + 1], &mapped[k], &mapped[k + 1]) } else { 0.0 };
            let base = self.base_speed(family, kind, &mapped[k], &mapped[k + 1])?;
            let speed = self.with_jitter(key, kind, base);
            let f = self.front_mut(id);
            f.left = mapped[k].clone();
            f.right = mapped[k + 1].clone();
            f.defect += d;
            f.speed = speed;
            self.account(id, 1.0);
        }
        for w in ids.windows(2) {
            self.schedule_pair(w[0], w[1]);
        }
        self.schedule_walls();
        let tol = self.params().defect_tol;
        let mut outgoing = 0;
        if (sys.eval_b1(&self.left_edge()) - self.spec.g1.eval(t)).norm() > tol {
            outgoing += self.boundary_fan(Side::Left, t)?;
        }
        if (sys.eval_b2(&self.right_edge()) - self.spec.g2.eval(t)).norm() > tol {
            outgoing += self.boundary_fan(Side::Right, t)?;
        }
        for id in ids {
            if self.front(id).defect > tol {
                outgoing += self.resolve(id, t)?;
            }
        }
        Ok(Outcome { action: Action::Split, x: 0.0, a: None, b: None, outgoing, law: 0.0 })
    }

    /// Replaces a front carrying a large defect by the fan of its jump; past
    /// the generation cap the defect moves into a non-physical front instead.
    fn resolve(&mut self, id: usize, t: f64) -> Result<u32> {
        let f = self.front(id).clone();
        let params = self.params().clone();
        let x = f.x_at(t);
        let capped = f.family.filter(|_| f.gen > params.gen_max);
        let waves = if let Some(i) = capped {
            let np = |a: &State, b: &State| Wave::non_physical(a.clone(), b.clone(), params.np_speed);
            if self.sys.is_negative(i) {
                let w = crate::hypsys::psi(self.sys, i, f.sigma, &f.left)?;
                self.sys.check_ball(&w)?;
                vec![Wave { right: w.clone(), ..f.wave() }, np(&w, &f.right)]
            } else {
                let w = crate::hypsys::psi_inv(self.sys, i, f.sigma, &f.right)?;
                self.sys.check_ball(&w)?;
                vec![np(&f.left, &w), Wave { left: w, ..f.wave() }]
            }
        } else {
            approx_riemann(self.sys, &params, &f.left, &f.right)?.waves
        };
        let gens = generations(&waves, &[(f.family, f.gen)]);
        let ids = self.replace(f.prev, f.next, &[id], &waves, &gens, (t, x), &f.left);
        Ok(ids.len() as u32)
    }

    /// Closes all fronts at the horizon and returns the record.
    pub fn finish(mut self) -> FrontSolution {
        let horizon = self.spec.horizon;
        self.now = horizon;
        let ids: Vec<usize> = self.iter_ids().collect();
        let mut breaks = Vec::with_capacity(ids.len());
        let mut states = vec![self.left_edge()];
        for &id in &ids {
            self.close(id, horizon);
            let f = self.front(id);
            breaks.push(f.x_at(horizon).clamp(0.0, self.spec.length));
            states.push(f.right.clone());
        }
        self.sol.final_slice = PiecewiseState::new(0.0, self.spec.length, breaks, states);
        self.sol.left_trace = build_trace(&self.left_trace, horizon);
        self.sol.right_trace = build_trace(&self.right_trace, horizon);
        self.sol
    }
}

fn build_trace(points: &[(f64, State)], horizon: f64) -> PiecewiseState {
    let breaks = points[1..].iter().map(|p| p.0).collect();
    let states = points.iter().map(|p| p.1.clone()).collect();
    PiecewiseState::new(0.0, horizon, breaks, states)
}

/// Runs the engine to the horizon.
pub fn run(sys: &SystemDef, spec: RunSpec) -> Result<FrontSolution> {
    let mut eng = Engine::init_from_data(sys, spec)?;
    while let Some(ev) = eng.next_event() {
        eng.apply_event(ev)?;
    }
    Ok(eng.finish())
}
