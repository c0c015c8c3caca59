use super::{eigen, eigenvalues, nonlinearity, FamilyKind, SystemDef};
use crate::error::Result;
use crate::state::State;
use nalgebra::DMatrix;

const PRIMES: [u32; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

fn halton(mut index: u64, base: u32) -> f64 {
    let b = base as f64;
    let mut f = 1.0;
    let mut r = 0.0;
    while index > 0 {
        f /= b;
        r += f * (index % base as u64) as f64;
        index /= base as u64;
    }
    r
}

/// Deterministic sample of the closed ball `B_r(0)`: the origin, the axis points
/// `±r e_k`, Halton points inside the ball and Halton directions on the sphere,
/// `count` points in total.
pub fn ball_samples(sys: &SystemDef, count: usize) -> Vec<State> {
    let n = sys.n;
    let r = sys.r;
    let mut out = vec![State::zeros(n)];
    for k in 0..n {
        for sgn in [1.0, -1.0] {
            let mut e = State::zeros(n);
            e[k] = sgn * r;
            out.push(e);
        }
    }
    let mut idx = 1u64;
    let mut sphere = false;
    while out.len() < count {
        let p = State::from_iterator(n, (0..n).map(|k| 2.0 * halton(idx, PRIMES[k]) - 1.0));
        idx += 1;
        let norm = p.norm();
        if sphere && norm > 1e-3 {
            out.push(p * (r / norm));
        } else if !sphere && norm <= 1.0 {
            out.push(p * r);
        } else {
            continue;
        }
        sphere = !sphere;
    }
    out.truncate(count.max(1));
    out
}

/// Worst margins of the structural assumptions over a sample.
#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    pub samples: usize,
    /// Smallest distance between consecutive eigenvalues.
    pub min_gap: f64,
    /// `min(−c − λ_m, λ_{m+1} − c)`.
    pub h2_margin: f64,
    /// Largest `|∇λ_i·r̂_i|` over LD families.
    pub ld_defect: f64,
    /// Smallest `|∇λ_i·r̂_i|` over GN families.
    pub gn_min: f64,
    /// Smallest absolute determinant in the boundary conditions.
    pub h5_min_det: f64,
    /// Sampled `max(|G|, ‖DG‖₂)`.
    pub gamma_sampled: f64,
    pub failures: Vec<String>,
}

impl AssumptionReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn boundary_det(db: &DMatrix<f64>, r: &DMatrix<f64>, cols: std::ops::Range<usize>) -> f64 {
    let sub = r.columns(cols.start, cols.len()).into_owned();
    (db * sub).determinant()
}

pub fn check_assumptions(sys: &SystemDef, samples: usize) -> AssumptionReport {
    let pts = ball_samples(sys, samples.max(1));
    let mut rep = AssumptionReport {
        samples: pts.len(),
        min_gap: f64::INFINITY,
        h2_margin: f64::INFINITY,
        ld_defect: 0.0,
        gn_min: f64::INFINITY,
        h5_min_det: f64::INFINITY,
        gamma_sampled: 0.0,
        failures: Vec::new(),
    };
    let n = sys.n;
    let m = sys.m;
    for u in &pts {
        let g = sys.eval_g(u).norm().max(sys.dg(u).singular_values().max());
        rep.gamma_sampled = rep.gamma_sampled.max(g);
        let e = match eigen(sys, u).or_else(|_| {
            // GN scaling fails where the family degenerates; fall back to unit vectors.
            super::eigen::decompose(&(sys.dh(u).try_inverse().unwrap_or_else(|| DMatrix::zeros(n, n)) * sys.df(u)))
                .map(|(lambda, r)| super::EigenData { l: r.clone().try_inverse().unwrap_or(r.clone()), lambda, r })
        }) {
            Ok(e) => e,
            Err(err) => {
                rep.min_gap = 0.0;
                rep.failures.push(format!("H1 at {:?}: {err}", u.as_slice()));
                continue;
            }
        };
        for k in 1..n {
            rep.min_gap = rep.min_gap.min(e.lambda[k] - e.lambda[k - 1]);
        }
        rep.h2_margin = rep.h2_margin.min((-sys.c - e.lambda[m - 1]).min(e.lambda[m] - sys.c));
        if let Ok(nl) = nonlinearity(sys, u) {
            for (i, v) in nl.iter().enumerate() {
                match sys.kinds[i] {
                    FamilyKind::LinearlyDegenerate => rep.ld_defect = rep.ld_defect.max(v.abs()),
                    FamilyKind::GenuinelyNonlinear => rep.gn_min = rep.gn_min.min(v.abs()),
                }
            }
        }
        let mut unit = e.r.clone();
        for mut col in unit.column_iter_mut() {
            let nrm = col.norm();
            col /= nrm;
        }
        let d1 = boundary_det(&sys.db1(u), &unit, m..n).abs();
        let d2 = boundary_det(&sys.db2(u), &unit, 0..m).abs();
        rep.h5_min_det = rep.h5_min_det.min(d1.min(d2));
    }
    if rep.min_gap <= 1e-9 {
        rep.failures.push(format!("H1: eigenvalue gap {:.3e}", rep.min_gap));
    }
    if rep.h2_margin <= 0.0 {
        rep.failures.push(format!("H2: margin {:.4e} (c = {})", rep.h2_margin, sys.c));
    }
    if rep.ld_defect > 1e-8 {
        rep.failures.push(format!("H3: LD defect {:.3e}", rep.ld_defect));
    }
    if sys.kinds.contains(&FamilyKind::GenuinelyNonlinear) && rep.gn_min <= 1e-12 {
        rep.failures.push(format!("H3: GN factor {:.3e}", rep.gn_min));
    }
    if rep.h5_min_det <= 1e-12 {
        rep.failures.push(format!("H5: determinant {:.3e}", rep.h5_min_det));
    }
    if rep.gamma_sampled > sys.gamma * (1.0 + 1e-9) + 1e-15 {
        rep.failures.push(format!("gamma {} below sampled bound {:.4e}", sys.gamma, rep.gamma_sampled));
    }
    rep
}

/// Sampled range of every characteristic speed over the ball.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeedBounds {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl SpeedBounds {
    /// Largest `|λ|` over all families.
    pub fn max_abs(&self) -> f64 {
        self.min.iter().chain(&self.max).fold(0.0, |a, &b| a.max(b.abs()))
    }

    /// Smallest `|λ|` over all families.
    pub fn min_abs(&self) -> f64 {
        self.min
            .iter()
            .zip(&self.max)
            .map(|(&lo, &hi)| {
                if lo > 0.0 {
                    lo
                } else if hi < 0.0 {
                    -hi
                } else {
                    0.0
                }
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Number of ball points used for speed bounds.
pub const SPEED_SAMPLES: usize = 400;

pub fn speed_bounds(sys: &SystemDef, samples: usize) -> Result<SpeedBounds> {
    let mut min = vec![f64::INFINITY; sys.n];
    let mut max = vec![f64::NEG_INFINITY; sys.n];
    for u in ball_samples(sys, samples) {
        let lam = eigenvalues(sys, &u)?;
        for i in 0..sys.n {
            min[i] = min[i].min(lam[i]);
            max[i] = max[i].max(lam[i]);
        }
    }
    Ok(SpeedBounds { min, max })
}

#[cfg(test)]
mod tests {
    use super::super::poly::PolyMap;
    use super::super::{sys_dld, sys_lin};
    use super::*;

    #[test]
    fn lin_passes_with_gap_two() {
        let rep = check_assumptions(&sys_lin(0.0), 100);
        assert!(rep.passed(), "{:?}", rep.failures);
        assert!((rep.min_gap - 2.0).abs() < 1e-12);
        assert!((rep.h2_margin - 0.5).abs() < 1e-12);
    }

    #[test]
    fn dld_large_ball_has_zero_margin() {
        let rep = check_assumptions(&sys_dld(0.0, 0.5), 200);
        assert!(rep.h2_margin.abs() < 1e-12);
        assert!(!rep.passed());
    }

    #[test]
    fn dld_default_ball_passes() {
        let rep = check_assumptions(&sys_dld(0.01, 0.2), 200);
        assert!(rep.passed(), "{:?}", rep.failures);
        assert!((rep.h2_margin - 0.3).abs() < 1e-12);
    }

    #[test]
    fn no_negative_family_fails_h2() {
        let mut sys = sys_lin(0.0);
        sys.f = PolyMap::linear(&DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]));
        let rep = check_assumptions(&sys, 50);
        assert!(rep.failures.iter().any(|f| f.starts_with("H2")));
    }

    #[test]
    fn samples_stay_in_ball() {
        let sys = sys_dld(0.0, 0.2);
        let pts = ball_samples(&sys, 64);
        assert_eq!(pts.len(), 64);
        assert!(pts.iter().all(|p| p.norm() <= 0.2 * (1.0 + 1e-12)));
    }
}
