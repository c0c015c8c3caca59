use super::{avg_eigen, eigen, eigenvalues, SystemDef};
use crate::error::{Error, Result};
use crate::state::State;
use nalgebra::{DMatrix, DVector};

const RK_TOL: f64 = 1e-10;
const MAX_STEP: f64 = 0.05;

fn direction(sys: &SystemDef, i: usize, u: &State, reference: &State) -> Result<State> {
    let mut v = eigen(sys, u)?.rvec(i);
    if v.dot(reference) < 0.0 {
        v.neg_mut();
    }
    Ok(v)
}

fn rk4_step(sys: &SystemDef, i: usize, u: &State, h: f64, reference: &State) -> Result<(State, State)> {
    let k1 = direction(sys, i, u, reference)?;
    let k2 = direction(sys, i, &(u + &k1 * (0.5 * h)), &k1)?;
    let k3 = direction(sys, i, &(u + &k2 * (0.5 * h)), &k1)?;
    let k4 = direction(sys, i, &(u + &k3 * h), &k1)?;
    let next = u + (&k1 + &k2 * 2.0 + &k3 * 2.0 + k4) * (h / 6.0);
    Ok((next, k1))
}

/// Solution at `s` of `du/ds = r_i(u)`, `u(0) = u`, with `r_i` as normalised by
/// [`eigen`]: `λ_i` grows at unit rate on GN families, arc length on LD ones.
pub fn integral_curve(sys: &SystemDef, i: usize, s: f64, u: &State) -> Result<State> {
    if s == 0.0 {
        return Ok(u.clone());
    }
    let mut reference = eigen(sys, u)?.rvec(i);
    if s.abs() < 1e-3 {
        return Ok(rk4_step(sys, i, u, s, &reference)?.0);
    }
    let mut y = u.clone();
    let mut done = 0.0;
    let mut step = s.abs().min(MAX_STEP);
    let dir = s.signum();
    let mut guard = 0;
    while done < s.abs() {
        guard += 1;
        if guard > 100_000 {
            return Err(Error::NoConvergence { context: "integral curve", residual: s.abs() - done });
        }
        let h = step.min(s.abs() - done);
        let (full, k1) = rk4_step(sys, i, &y, dir * h, &reference)?;
        let (mid, _) = rk4_step(sys, i, &y, dir * h * 0.5, &reference)?;
        let (half, _) = rk4_step(sys, i, &mid, dir * h * 0.5, &k1)?;
        let err = (&half - &full).norm() / 15.0;
        if err <= RK_TOL || h < 1e-8 {
            y = half;
            done += h;
            reference = k1;
            if err < RK_TOL / 32.0 {
                step = (2.0 * step).min(MAX_STEP);
            }
        } else {
            step = 0.5 * h;
        }
    }
    Ok(y)
}

/// Point `v` on the Hugoniot locus of family `i` through `u` with
/// `λ_i(v) − λ_i(u) = s`.
pub fn hugoniot_curve(sys: &SystemDef, i: usize, s: f64, u: &State) -> Result<State> {
    if s == 0.0 {
        return Ok(u.clone());
    }
    let n = sys.n;
    let lam_u = eigenvalues(sys, u)?[i];
    let residual = |v: &State| -> Result<DVector<f64>> {
        let avg = avg_eigen(sys, u, v)?;
        let d = v - u;
        let mut out = DVector::zeros(n);
        for (row, j) in (0..n).filter(|&j| j != i).enumerate() {
            out[row] = avg.lvec(j).dot(&d);
        }
        out[n - 1] = eigenvalues(sys, v)?[i] - lam_u - s;
        Ok(out)
    };
    let mut v = integral_curve(sys, i, s, u)?;
    let mut res = residual(&v)?;
    for _ in 0..50 {
        let norm = res.norm();
        if norm < 1e-14 {
            break;
        }
        let fd = 1e-7 * v.norm().max(1e-2);
        let mut jac = DMatrix::zeros(n, n);
        for k in 0..n {
            let mut vp = v.clone();
            vp[k] += fd;
            let mut vm = v.clone();
            vm[k] -= fd;
            jac.set_column(k, &((residual(&vp)? - residual(&vm)?) / (2.0 * fd)));
        }
        let Some(delta) = jac.lu().solve(&res) else {
            return Err(Error::NoConvergence { context: "Hugoniot curve", residual: norm });
        };
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial = &v - &delta * lambda;
            if let Ok(r) = residual(&trial) {
                if r.norm() < norm {
                    v = trial;
                    res = r;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted || delta.norm() < 1e-16 {
            break;
        }
    }
    if res.norm() > 1e-11 {
        return Err(Error::NoConvergence { context: "Hugoniot curve", residual: res.norm() });
    }
    Ok(v)
}

/// `Ψ_i(σ)[u]` without the admissible-ball check.
pub(crate) fn psi(sys: &SystemDef, i: usize, sigma: f64, u: &State) -> Result<State> {
    if sigma == 0.0 {
        Ok(u.clone())
    } else if sys.is_gn(i) && sigma < 0.0 {
        hugoniot_curve(sys, i, sigma, u)
    } else {
        integral_curve(sys, i, sigma, u)
    }
}

/// Inverse of [`psi`] in its base point: `u` with `Ψ_i(σ)[u] = v`.
pub(crate) fn psi_inv(sys: &SystemDef, i: usize, sigma: f64, v: &State) -> Result<State> {
    if sigma == 0.0 {
        Ok(v.clone())
    } else if sys.is_gn(i) && sigma < 0.0 {
        hugoniot_curve(sys, i, -sigma, v)
    } else {
        integral_curve(sys, i, -sigma, v)
    }
}

fn in_ball(sys: &SystemDef, i: usize, w: State) -> Result<State> {
    if sys.in_ball(&w) {
        Ok(w)
    } else {
        Err(Error::CurveOutOfDomain { family: i })
    }
}

/// `Ψ_i(σ)[u]`: rarefaction curve for `σ > 0` and shock curve for `σ < 0` on GN
/// families; arc-length integral curve on LD families.
pub fn wave_curve(sys: &SystemDef, i: usize, sigma: f64, u: &State) -> Result<State> {
    in_ball(sys, i, psi(sys, i, sigma, u)?)
}

/// Base point `u` with `Ψ_i(σ)[u] = v`.
pub fn wave_curve_inv(sys: &SystemDef, i: usize, sigma: f64, v: &State) -> Result<State> {
    in_ball(sys, i, psi_inv(sys, i, sigma, v)?)
}
