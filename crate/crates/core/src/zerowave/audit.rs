//! Clause-by-clause check that a record is an approximate front-tracking
//! solution with zero-waves on its lattice.

use crate::error::Result;
use crate::hypsys::{avg_eigen, phi_h, speed_bounds, SystemDef, SPEED_SAMPLES};
use crate::riemann::{solve_riemann, WaveKind};
use crate::solution::{FrontSolution, Segment};

/// Number of evolution times at which slices are inspected.
const AUDIT_SLICES: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub segments: usize,
    pub zero_segments: usize,
    /// States outside the ball or not finite.
    pub bad_states: usize,
    /// Largest state mismatch between neighbouring fronts on a slice.
    pub max_gap: f64,
    /// Largest `|Φ_h(uL) − uR|` over zero-wave pieces.
    pub max_zero_residual: f64,
    /// Zero-wave pieces off the lattice or with nonzero speed.
    pub misplaced_zero: usize,
    /// Lattice lines whose zero-waves do not cover the whole evolution interval.
    pub uncovered_lines: usize,
    /// Largest excess of the off-family wave content over the allowance.
    pub max_wave_excess: f64,
    /// Largest excess of a speed error over `C_a·ε`.
    pub max_speed_excess: f64,
    /// Largest rarefaction piece relative to `C_a·ε`.
    pub max_rarefaction_ratio: f64,
    /// Distinct non-physical speeds.
    pub np_speeds: Vec<f64>,
    /// Largest non-physical total over the inspected slices.
    pub np_max: f64,
    pub eps: f64,
    /// Allowance constant `max(1, (sup|λ| / inf|λ|)²)`.
    pub c_a: f64,
    pub zero_tol: f64,
}

impl AuditReport {
    pub fn zero_waves_ok(&self) -> bool {
        self.max_zero_residual <= self.zero_tol && self.misplaced_zero == 0 && self.uncovered_lines == 0
    }

    pub fn fronts_ok(&self) -> bool {
        self.max_wave_excess <= 0.0 && self.max_speed_excess <= 0.0 && self.max_rarefaction_ratio <= 1.0
    }

    /// Non-physical fronts share one speed and their total stays within `ε`.
    pub fn np_ok(&self) -> bool {
        self.np_speeds.len() <= 1 && self.np_max <= self.eps
    }

    pub fn passed(&self) -> bool {
        self.bad_states == 0 && self.max_gap <= 1e-12 && self.zero_waves_ok() && self.fronts_ok() && self.np_ok()
    }
}

fn sample_times(sol: &FrontSolution) -> Vec<f64> {
    let mut pts: Vec<f64> = sol.segments.iter().flat_map(|s| [s.t0, s.t1]).collect();
    pts.push(0.0);
    pts.push(sol.horizon);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let gaps: Vec<(f64, f64)> = pts.windows(2).filter(|w| w[1] - w[0] > 1e-9).map(|w| (w[0], w[1])).collect();
    if gaps.is_empty() {
        return Vec::new();
    }
    let step = (gaps.len() as f64 / AUDIT_SLICES as f64).max(1.0);
    let mut out = Vec::new();
    let mut k = 0.0;
    while (k as usize) < gaps.len() && out.len() < AUDIT_SLICES {
        let (a, b) = gaps[k as usize];
        out.push(0.5 * (a + b));
        k += step;
    }
    out
}

/// Wave content of a physical piece outside its own family, and the speed
/// error against the averaged characteristic speed.
fn front_errors(sys: &SystemDef, sol: &FrontSolution, s: &Segment) -> Result<(f64, f64, f64)> {
    let (l, r) = (sol.seg_left(s), sol.seg_right(s));
    let k = s.family.expect("physical piece");
    let sigma = solve_riemann(sys, &l, &r, 1e-13)?;
    let off: f64 = (0..sys.n).filter(|&j| j != k).map(|j| sigma[j].abs()).sum();
    let lam = avg_eigen(sys, &l, &r)?.lambda[k];
    let rare = if s.kind == WaveKind::Rarefaction { sigma[k] } else { 0.0 };
    Ok((off, (s.speed - lam).abs(), rare))
}

/// Audits a forward or rightward record against `sys`, which must be the
/// system in the record's own orientation.
pub fn audit(sys: &SystemDef, sol: &FrontSolution) -> Result<AuditReport> {
    let h = sol.params.h;
    let eps = sol.params.eps;
    let bounds = speed_bounds(sys, SPEED_SAMPLES)?;
    let c_a = (bounds.max_abs() / bounds.min_abs()).powi(2).max(1.0);
    let mut rep = AuditReport {
        segments: sol.segments.len(),
        zero_segments: 0,
        bad_states: 0,
        max_gap: 0.0,
        max_zero_residual: 0.0,
        misplaced_zero: 0,
        uncovered_lines: 0,
        max_wave_excess: f64::NEG_INFINITY,
        max_speed_excess: f64::NEG_INFINITY,
        max_rarefaction_ratio: 0.0,
        np_speeds: Vec::new(),
        np_max: 0.0,
        eps,
        c_a,
        zero_tol: 1e-12,
    };
    let mut coverage = vec![0.0; sol.lattice.len()];
    for s in &sol.segments {
        let (l, r) = (sol.seg_left(s), sol.seg_right(s));
        for u in [&l, &r] {
            if !u.iter().all(|v| v.is_finite()) || !sys.in_ball(u) {
                rep.bad_states += 1;
            }
        }
        match s.kind {
            WaveKind::Zero => {
                rep.zero_segments += 1;
                let res = (phi_h(sys, &l, h)? - &r).norm();
                rep.max_zero_residual = rep.max_zero_residual.max(res);
                match sol.lattice.iter().position(|&xj| (xj - s.x0).abs() <= 1e-12) {
                    Some(j) if s.speed == 0.0 => coverage[j] += s.t1 - s.t0,
                    _ => rep.misplaced_zero += 1,
                }
            }
            WaveKind::NonPhysical => {
                if !rep.np_speeds.iter().any(|&v| (v - s.speed).abs() <= 1e-14 * v.abs().max(1.0)) {
                    rep.np_speeds.push(s.speed);
                }
            }
            _ => {
                let (off, speed_err, rare) = front_errors(sys, sol, s)?;
                let allowance = 4.0 * c_a * s.defect + 1e-9;
                rep.max_wave_excess = rep.max_wave_excess.max(off - allowance);
                rep.max_speed_excess = rep.max_speed_excess.max(speed_err - c_a * eps - 4.0 * c_a * s.defect);
                if s.kind == WaveKind::Rarefaction {
                    let ratio = if rare > 0.0 { rare / (c_a * eps) } else { f64::INFINITY };
                    rep.max_rarefaction_ratio = rep.max_rarefaction_ratio.max(ratio);
                }
            }
        }
    }
    for c in coverage {
        if (c - sol.horizon).abs() > 1e-9 * sol.horizon.max(1.0) {
            rep.uncovered_lines += 1;
        }
    }
    for t in sample_times(sol) {
        let fronts = sol.fronts_at(t);
        let mut np = 0.0;
        for w in fronts.windows(2) {
            rep.max_gap = rep.max_gap.max((&w[1].left - &w[0].right).norm());
        }
        for f in &fronts {
            if f.kind == WaveKind::NonPhysical {
                np += f.strength();
            }
        }
        let defects: f64 = sol.segments.iter().filter(|s| s.t0 <= t && t < s.t1 && s.kind.is_physical()).map(|s| s.defect).sum();
        rep.np_max = rep.np_max.max(np + defects);
    }
    if rep.max_wave_excess == f64::NEG_INFINITY {
        rep.max_wave_excess = 0.0;
        rep.max_speed_excess = 0.0;
    }
    Ok(rep)
}
