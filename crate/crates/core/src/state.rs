//! Shared value types: states and piecewise-constant functions of one variable.

use nalgebra::DVector;

/// Pointwise solution value.
pub type State = DVector<f64>;

/// Piecewise-constant vector function on `[a, b]`: `states[k]` holds on
/// `(breaks[k-1], breaks[k])`; values at a breakpoint are taken from the right.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseState {
    pub a: f64,
    pub b: f64,
    pub breaks: Vec<f64>,
    pub states: Vec<State>,
}

/// Boundary data as a function of time.
pub type StepFn = PiecewiseState;

impl PiecewiseState {
    pub fn constant(a: f64, b: f64, u: State) -> Self {
        Self { a, b, breaks: Vec::new(), states: vec![u] }
    }

    /// Builds from breakpoints and states, dropping breakpoints outside `(a, b)`
    /// and merging equal neighbours.
    pub fn new(a: f64, b: f64, breaks: Vec<f64>, states: Vec<State>) -> Self {
        assert_eq!(breaks.len() + 1, states.len(), "need one more state than breaks");
        assert!(breaks.windows(2).all(|w| w[0] <= w[1]), "breaks must be sorted");
        let mut out_b = Vec::with_capacity(breaks.len());
        let mut out_s: Vec<State> = Vec::with_capacity(states.len());
        let mut iter = states.into_iter();
        out_s.push(iter.next().unwrap());
        for (x, u) in breaks.into_iter().zip(iter) {
            if x <= a {
                *out_s.last_mut().unwrap() = u;
                continue;
            }
            if x >= b {
                break;
            }
            if out_s.last().unwrap() == &u {
                continue;
            }
            if out_b.last() == Some(&x) {
                *out_s.last_mut().unwrap() = u;
                continue;
            }
            out_b.push(x);
            out_s.push(u);
        }
        Self { a, b, breaks: out_b, states: out_s }
    }

    pub fn dim(&self) -> usize {
        self.states[0].len()
    }

    /// Index of the piece containing `x` (right-continuous).
    pub fn piece(&self, x: f64) -> usize {
        self.breaks.partition_point(|&p| p <= x)
    }

    pub fn eval(&self, x: f64) -> &State {
        &self.states[self.piece(x)]
    }

    /// Left limit at `x`.
    pub fn eval_left(&self, x: f64) -> &State {
        &self.states[self.breaks.partition_point(|&p| p < x)]
    }

    pub fn first(&self) -> &State {
        &self.states[0]
    }

    pub fn last(&self) -> &State {
        self.states.last().unwrap()
    }

    pub fn tv(&self) -> f64 {
        self.states.windows(2).map(|w| (&w[1] - &w[0]).norm()).sum()
    }

    /// Total variation over jumps strictly inside `(lo, hi)`.
    pub fn tv_between(&self, lo: f64, hi: f64) -> f64 {
        self.breaks.iter().enumerate().filter(|(_, &x)| x > lo && x < hi).map(|(k, _)| (&self.states[k + 1] - &self.states[k]).norm()).sum()
    }

    pub fn sup_norm(&self) -> f64 {
        self.states.iter().map(|u| u.norm()).fold(0.0, f64::max)
    }

    /// Union of breakpoints of two functions on the same interval.
    fn merged_breaks(&self, other: &Self, lo: f64, hi: f64) -> Vec<f64> {
        let mut pts: Vec<f64> = self.breaks.iter().chain(other.breaks.iter()).copied().filter(|&x| x > lo && x < hi).collect();
        pts.push(lo);
        pts.push(hi);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    pub fn l1_dist(&self, other: &Self) -> f64 {
        self.l1_dist_on(other, self.a.max(other.a), self.b.min(other.b))
    }

    /// Exact L¹ distance on `[lo, hi]`.
    pub fn l1_dist_on(&self, other: &Self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        let pts = self.merged_breaks(other, lo, hi);
        pts.windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                (self.eval(mid) - other.eval(mid)).norm() * (w[1] - w[0])
            })
            .sum()
    }

    pub fn l1_norm(&self) -> f64 {
        self.l1_norm_on(self.a, self.b)
    }

    pub fn l1_norm_on(&self, lo: f64, hi: f64) -> f64 {
        let zero = Self::constant(self.a, self.b, State::zeros(self.dim()));
        self.l1_dist_on(&zero, lo, hi)
    }

    /// Pointwise image under `f`.
    pub fn map(&self, mut f: impl FnMut(&State) -> State) -> Self {
        Self::new(self.a, self.b, self.breaks.clone(), self.states.iter().map(&mut f).collect())
    }

    /// Restriction to `[lo, hi]`.
    pub fn restrict(&self, lo: f64, hi: f64) -> Self {
        let i0 = self.piece(lo);
        let i1 = self.eval_left_index(hi);
        let breaks = self.breaks[i0..i1].to_vec();
        let states = self.states[i0..=i1].to_vec();
        Self::new(lo, hi, breaks, states)
    }

    fn eval_left_index(&self, x: f64) -> usize {
        self.breaks.partition_point(|&p| p < x)
    }
}
