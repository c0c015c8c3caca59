//! Functionals evaluated on a finished record, and the check of their
//! decrease and growth laws over the per-event samples of a run.

use super::glimm::{FunctionalSample, GlimmSetup, GlimmValues, GlimmWeights, WaveItem};
use crate::error::{Error, Result};
use crate::hypsys::{speed_bounds, SystemDef, SPEED_SAMPLES};
use crate::solution::{EventKind, FrontSolution};

/// Slack for round-off in the monotonicity comparisons.
const MONO_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Full,
    Left,
    Right,
}

impl Region {
    pub fn label(self) -> &'static str {
        match self {
            Region::Full => "full",
            Region::Left => "L",
            Region::Right => "R",
        }
    }
}

/// `τ̂ = (L/2)·min(1/sup|λ₁|, 1/sup λ_n)` over the sampled ball.
pub fn tau_hat(sys: &SystemDef, length: f64) -> Result<f64> {
    let b = speed_bounds(sys, SPEED_SAMPLES)?;
    let fast = b.min[0].abs().max(b.max[sys.n - 1].abs());
    Ok(0.5 * length / fast)
}

pub fn glimm_setup(sys: &SystemDef, length: f64, weights: GlimmWeights) -> Result<GlimmSetup> {
    Ok(GlimmSetup { weights, tau_hat: tau_hat(sys, length)?, length, n: sys.n, m: sys.m })
}

/// Wave items of a record on the slice `t`. Physical fronts count with
/// `|σ|` plus their accumulated defect.
pub fn wave_items(sol: &FrontSolution, t: f64) -> Vec<WaveItem> {
    sol.fronts_at(t).iter().map(|f| WaveItem { x: f.x, family: f.family, kind: f.kind, strength: f.strength() + f.defect }).collect()
}

/// All functionals of `sol` at a non-event time.
pub fn glimm_values(sol: &FrontSolution, t: f64, setup: &GlimmSetup) -> Result<GlimmValues> {
    if sol.events.iter().any(|e| (e.t - t).abs() <= 1e-12 * t.abs().max(1.0)) {
        return Err(Error::EventTime(t));
    }
    Ok(setup.evaluate(&wave_items(sol, t), t, &sol.g1, &sol.g2, false))
}

/// `(V, Q, Υ)` of `sol` at time `t` on one region.
pub fn glimm(sol: &FrontSolution, t: f64, region: Region, setup: &GlimmSetup) -> Result<(f64, f64, f64)> {
    let g = glimm_values(sol, t, setup)?;
    Ok(match region {
        Region::Full => (g.v, g.q, g.upsilon),
        Region::Left => (g.v_l, g.q_l, g.upsilon_l),
        Region::Right => (g.v_r, g.q_r, g.upsilon_r),
    })
}

/// Per-event samples of a run together with what is needed to judge them.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalSeries {
    pub samples: Vec<FunctionalSample>,
    pub h: f64,
    pub tau_hat: f64,
    pub k: f64,
}

impl FunctionalSeries {
    pub fn from_solution(sol: &FrontSolution, setup: &GlimmSetup) -> Self {
        FunctionalSeries { samples: sol.functionals.clone(), h: sol.params.h, tau_hat: setup.tau_hat, k: setup.weights.k }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub t: f64,
    pub kind: EventKind,
    pub region: Region,
    /// Offending amount (increase, law excess or growth excess).
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MonotoneReport {
    /// Interaction, boundary and data events inside `(0, τ̂)`.
    pub events_checked: usize,
    pub splits_checked: usize,
    /// Largest `ΔΥ^L`, `ΔΥ^R` across those events.
    pub max_increase_l: f64,
    pub max_increase_r: f64,
    /// Largest `ΔΥ + c·law` over in-region events: `c = 1/4` for interactions,
    /// `1/2` for boundary hits and data jumps. Negative means the law
    /// held with room to spare.
    pub law_margin: f64,
    /// `max (after/before − 1)/h` over split lines, both regions.
    pub growth_constant: f64,
    pub violations: Vec<Violation>,
    /// Samples with `Q > V²` (any region).
    pub q_bound_failures: usize,
    /// Samples in `[0, τ̂/2]` with `Υ > Υ^L + Υ^R`. Approaching pairs with
    /// one front only left of `Lt/τ̂` and one only right of `L(1 − t/τ̂)` enter
    /// `Q` but neither regional `Q`, so this can happen near `τ̂/2`.
    pub additivity_lower_failures: usize,
    /// Samples in `[0, τ̂/2]` with `Υ^L + Υ^R > 2KΥ`.
    pub additivity_upper_failures: usize,
}

impl MonotoneReport {
    /// Nonincrease across every checked event and, if a constant is given,
    /// split growth within `1 + c·h`.
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn law_factor(kind: EventKind) -> f64 {
    match kind {
        EventKind::FrontFront | EventKind::LatticeCross => 0.25,
        EventKind::BoundaryDataJump | EventKind::FrontBoundary => 0.5,
        _ => 0.0,
    }
}

fn q_ok(g: &GlimmValues) -> bool {
    let tol = 1e-14;
    g.q <= g.v * g.v + tol && g.q_l <= g.v_l * g.v_l + tol && g.q_r <= g.v_r * g.v_r + tol
}

/// `(Υ ≤ Υ^L + Υ^R, Υ^L + Υ^R ≤ 2KΥ)`.
fn additive(g: &GlimmValues, k: f64) -> (bool, bool) {
    let sum = g.upsilon_l + g.upsilon_r;
    (g.upsilon <= sum * (1.0 + 1e-12) + 1e-15, sum <= 2.0 * k * g.upsilon * (1.0 + 1e-12) + 1e-15)
}

/// Checks the decrease laws of `Υ^L`, `Υ^R` across events, and their growth
/// across split lines against `growth_c` when given.
pub fn check_monotone(series: &FunctionalSeries, growth_c: Option<f64>) -> MonotoneReport {
    let mut rep = MonotoneReport { law_margin: f64::NEG_INFINITY, ..Default::default() };
    for s in &series.samples {
        for g in [&s.before, &s.after] {
            if !q_ok(g) {
                rep.q_bound_failures += 1;
            }
            // At a boundary hit the front sits on the edge, outside both open regions.
            if s.t <= 0.5 * series.tau_hat && s.kind != EventKind::FrontBoundary {
                let (lower, upper) = additive(g, series.k);
                rep.additivity_lower_failures += usize::from(!lower);
                rep.additivity_upper_failures += usize::from(!upper);
            }
        }
        if s.t >= series.tau_hat {
            continue;
        }
        let dl = s.after.upsilon_l - s.before.upsilon_l;
        let dr = s.after.upsilon_r - s.before.upsilon_r;
        if s.kind.is_gamma1() {
            rep.events_checked += 1;
            rep.max_increase_l = rep.max_increase_l.max(dl);
            rep.max_increase_r = rep.max_increase_r.max(dr);
            for (region, d, inside) in [(Region::Left, dl, s.in_left), (Region::Right, dr, s.in_right)] {
                let tol = MONO_TOL * s.before.upsilon.max(1.0);
                if d > tol {
                    rep.violations.push(Violation { t: s.t, kind: s.kind, region, excess: d });
                }
                if inside && s.law > 0.0 {
                    rep.law_margin = rep.law_margin.max(d + law_factor(s.kind) * s.law);
                }
            }
        } else if s.kind == EventKind::SplitLine && series.h > 0.0 {
            rep.splits_checked += 1;
            for (region, before, after) in
                [(Region::Left, s.before.upsilon_l, s.after.upsilon_l), (Region::Right, s.before.upsilon_r, s.after.upsilon_r)]
            {
                if before <= 0.0 {
                    continue;
                }
                let c = (after / before - 1.0) / series.h;
                rep.growth_constant = rep.growth_constant.max(c);
                if let Some(limit) = growth_c {
                    if c > limit {
                        rep.violations.push(Violation { t: s.t, kind: s.kind, region, excess: c - limit });
                    }
                }
            }
        }
    }
    if rep.law_margin == f64::NEG_INFINITY {
        rep.law_margin = 0.0;
    }
    rep
}
