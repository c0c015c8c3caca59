//! Glimm interaction functionals on the full strip and on the two shrinking
//! regions adjacent to the boundaries.

use crate::riemann::WaveKind;
use crate::solution::EventKind;
use crate::state::StepFn;

/// Weights of the interaction functionals, derived from an interaction
/// constant `C`: `K ≥ max(4C, 1)`, `C1 ≥ C + 1`, `C2 ≥ 2CK + 1/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlimmWeights {
    pub k: f64,
    pub c1: f64,
    pub c2: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub kbar: f64,
}

impl GlimmWeights {
    /// Smallest admissible weights for the interaction constant `c`.
    pub fn from_constant(c: f64) -> Self {
        let k = (4.0 * c).max(1.0);
        GlimmWeights { k, c1: c + 1.0, c2: 2.0 * c * k + 0.5, kappa1: 1.0, kappa2: 1.0, kbar: k }
    }

    pub fn admissible(&self, c: f64) -> bool {
        self.k >= (4.0 * c).max(1.0) && self.c1 >= c + 1.0 && self.c2 >= 2.0 * c * self.k + 0.5
    }
}

/// Everything needed to evaluate the functionals during a run.
#[derive(Debug, Clone, PartialEq)]
pub struct GlimmSetup {
    pub weights: GlimmWeights,
    /// Region parameter: the left region is `0 < x < L(1 - t/τ̂)`, the right one
    /// `Lt/τ̂ < x < L`.
    pub tau_hat: f64,
    pub length: f64,
    pub n: usize,
    pub m: usize,
}

/// One front as seen by the functionals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveItem {
    pub x: f64,
    pub family: Option<usize>,
    pub kind: WaveKind,
    pub strength: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GlimmValues {
    pub v: f64,
    pub q: f64,
    pub upsilon: f64,
    pub v_l: f64,
    pub q_l: f64,
    pub upsilon_l: f64,
    pub v_r: f64,
    pub q_r: f64,
    pub upsilon_r: f64,
}

/// Values just before and just after one event.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalSample {
    pub t: f64,
    pub kind: EventKind,
    pub before: GlimmValues,
    pub after: GlimmValues,
    /// Size entering the decrease law: `|σασβ|` for interactions, `|σα|` for
    /// boundary hits, `|Δg|` for data jumps, 0 otherwise.
    pub law: f64,
    /// Whether the event point lies in the left (right) region.
    pub in_left: bool,
    pub in_right: bool,
}

/// Ordering class of a front: negative families, then non-physical and
/// zero-waves, then positive families.
fn rank(m: usize, w: &WaveItem) -> usize {
    match w.family {
        Some(i) if i < m => 2 * i,
        Some(i) => 2 * i,
        None => 2 * m - 1,
    }
}

/// Potential `Σ|σασβ|` over approaching pairs among `items` (sorted in space).
pub fn potential(n: usize, m: usize, items: &[&WaveItem]) -> f64 {
    let classes = 2 * n;
    let mut tot = vec![0.0; classes];
    let mut shocks = vec![0.0; classes];
    let mut q = 0.0;
    for b in items {
        let rb = rank(m, b);
        let mut s: f64 = tot[rb + 1..].iter().sum();
        if b.kind.is_physical() {
            s += if b.kind == WaveKind::Shock { tot[rb] } else { shocks[rb] };
        }
        q += b.strength * s;
        tot[rb] += b.strength;
        if b.kind == WaveKind::Shock {
            shocks[rb] += b.strength;
        }
    }
    q
}

/// Total variation of `g` over jumps in `(t, T)`, or `[t, T)` with `include_now`.
pub fn tv_after(g: &StepFn, t: f64, include_now: bool) -> f64 {
    g.breaks
        .iter()
        .enumerate()
        .filter(|(_, &s)| if include_now { s >= t } else { s > t })
        .map(|(k, _)| (&g.states[k + 1] - &g.states[k]).norm())
        .sum()
}

impl GlimmSetup {
    pub fn left_edge(&self, t: f64) -> f64 {
        self.length * (1.0 - t / self.tau_hat)
    }

    pub fn right_edge(&self, t: f64) -> f64 {
        self.length * t / self.tau_hat
    }

    /// Functionals at time `t`; `include_now` counts data jumps located at `t`
    /// as still to come.
    pub fn evaluate(&self, items: &[WaveItem], t: f64, g1: &StepFn, g2: &StepFn, include_now: bool) -> GlimmValues {
        let w = &self.weights;
        let (tv1, tv2) = (tv_after(g1, t, include_now), tv_after(g2, t, include_now));
        let all: Vec<&WaveItem> = items.iter().collect();
        let v = all.iter().map(|a| a.strength).sum::<f64>() + w.c1 * (tv1 + tv2);
        let q = potential(self.n, self.m, &all);
        let (le, re) = (self.left_edge(t), self.right_edge(t));
        let left: Vec<&WaveItem> = items.iter().filter(|a| a.x > 0.0 && a.x < le).collect();
        let right: Vec<&WaveItem> = items.iter().filter(|a| a.x > re && a.x < self.length).collect();
        // Families travelling towards the nearby boundary carry weight K.
        let weight_l = |a: &WaveItem| match a.family {
            Some(i) if i < self.m => w.k,
            _ => 1.0,
        };
        let weight_r = |a: &WaveItem| match a.family {
            Some(i) if i >= self.m => w.k,
            _ => 1.0,
        };
        let v_l = left.iter().map(|a| weight_l(a) * a.strength).sum::<f64>() + w.c1 * tv1;
        let v_r = right.iter().map(|a| weight_r(a) * a.strength).sum::<f64>() + w.c1 * tv2;
        let q_l = potential(self.n, self.m, &left);
        let q_r = potential(self.n, self.m, &right);
        GlimmValues { v, q, upsilon: v + w.c2 * q, v_l, q_l, upsilon_l: v_l + w.c2 * q_l, v_r, q_r, upsilon_r: v_r + w.c2 * q_r }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn item(x: f64, family: Option<usize>, kind: WaveKind, strength: f64) -> WaveItem {
        WaveItem { x, family, kind, strength }
    }

    #[test]
    fn two_approaching_shocks() {
        let a = item(0.2, Some(1), WaveKind::Shock, 0.1);
        let b = item(0.5, Some(1), WaveKind::Shock, 0.2);
        assert!((potential(2, 1, &[&a, &b]) - 0.02).abs() < 1e-15);
    }

    #[test]
    fn diverging_families_do_not_approach() {
        let a = item(0.2, Some(0), WaveKind::Contact, 0.1);
        let b = item(0.5, Some(1), WaveKind::Shock, 0.2);
        assert_eq!(potential(2, 1, &[&a, &b]), 0.0);
        assert!((potential(2, 1, &[&b, &a]) - 0.02).abs() < 1e-15);
    }

    #[test]
    fn zero_wave_pairs() {
        let z = item(0.5, None, WaveKind::Zero, 0.01);
        let neg = item(0.7, Some(0), WaveKind::Contact, 0.1);
        let pos = item(0.3, Some(1), WaveKind::Rarefaction, 0.1);
        assert!((potential(2, 1, &[&z, &neg]) - 1e-3).abs() < 1e-15);
        assert!((potential(2, 1, &[&pos, &z]) - 1e-3).abs() < 1e-15);
        assert_eq!(potential(2, 1, &[&neg, &z]), 0.0);
        let z2 = item(0.6, None, WaveKind::Zero, 0.01);
        assert_eq!(potential(2, 1, &[&z, &z2]), 0.0);
    }

    #[test]
    fn rarefactions_of_one_family_do_not_approach() {
        let a = item(0.2, Some(1), WaveKind::Rarefaction, 0.1);
        let b = item(0.5, Some(1), WaveKind::Rarefaction, 0.2);
        assert_eq!(potential(2, 1, &[&a, &b]), 0.0);
    }

    #[test]
    fn weights_meet_constraints() {
        for c in [0.1, 1.0, 3.0] {
            assert!(GlimmWeights::from_constant(c).admissible(c));
        }
    }
}
