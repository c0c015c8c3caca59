use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Largest residual accepted after the iteration stalls.
pub(crate) const ACCEPT: f64 = 1e-10;

/// Damped Newton on `residual(x) = 0`. Starts as a chord method with `jac0`
/// and switches to a finite-difference Jacobian when progress is slow.
pub(crate) fn solve(
    context: &'static str,
    x0: DVector<f64>,
    jac0: DMatrix<f64>,
    tol: f64,
    residual: impl Fn(&DVector<f64>) -> Result<DVector<f64>>,
) -> Result<DVector<f64>> {
    let mut x = x0;
    let mut r = residual(&x)?;
    let mut jac = jac0;
    let mut fresh = false;
    for _ in 0..80 {
        let norm = r.norm();
        if norm <= tol {
            return Ok(x);
        }
        let delta = match jac.clone().lu().solve(&r) {
            Some(d) => d,
            None if !fresh => {
                jac = fd_jacobian(&x, &r, &residual)?;
                fresh = true;
                continue;
            }
            None => return Err(Error::NoConvergence { context, residual: norm }),
        };
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let trial = &x - &delta * step;
            if let Ok(rt) = residual(&trial) {
                if rt.norm() < norm {
                    accepted = Some((trial, rt));
                    break;
                }
            }
            step *= 0.5;
        }
        match accepted {
            Some((xt, rt)) => {
                let slow = rt.norm() > 0.25 * norm;
                x = xt;
                r = rt;
                if slow && !fresh {
                    jac = fd_jacobian(&x, &r, &residual)?;
                    fresh = true;
                } else if fresh {
                    jac = fd_jacobian(&x, &r, &residual)?;
                }
            }
            None if !fresh => {
                jac = fd_jacobian(&x, &r, &residual)?;
                fresh = true;
            }
            None => break,
        }
    }
    let norm = r.norm();
    if norm <= ACCEPT {
        Ok(x)
    } else {
        Err(Error::NoConvergence { context, residual: norm })
    }
}

fn fd_jacobian(x: &DVector<f64>, r: &DVector<f64>, residual: &impl Fn(&DVector<f64>) -> Result<DVector<f64>>) -> Result<DMatrix<f64>> {
    let k = x.len();
    let mut jac = DMatrix::zeros(r.len(), k);
    for j in 0..k {
        let step = 1e-7 * x[j].abs().max(1e-2);
        let mut xp = x.clone();
        xp[j] += step;
        let mut xm = x.clone();
        xm[j] -= step;
        jac.set_column(j, &((residual(&xp)? - residual(&xm)?) / (2.0 * step)));
    }
    Ok(jac)
}
