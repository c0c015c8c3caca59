use super::poly::PolyMap;
use super::SystemDef;
use crate::error::{Error, Result};
use crate::state::State;
use nalgebra::DMatrix;

const TOL: f64 = 1e-12;

/// Damped Newton for `f(w) = target` starting at `w0`.
fn newton(
    context: &'static str,
    w0: State,
    target: &State,
    f: impl Fn(&State) -> State,
    jac: impl Fn(&State) -> DMatrix<f64>,
) -> Result<State> {
    let mut w = w0;
    let mut res = f(&w) - target;
    let scale = target.norm().max(1.0);
    for _ in 0..60 {
        let norm = res.norm();
        if norm <= TOL * scale * 1e-2 {
            return Ok(w);
        }
        let delta = jac(&w).lu().solve(&res).ok_or(Error::NoConvergence { context, residual: norm })?;
        let mut step = 1.0;
        let mut moved = false;
        for _ in 0..40 {
            let trial = &w - &delta * step;
            let r = f(&trial) - target;
            if r.norm() < norm {
                w = trial;
                res = r;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if !moved {
            break;
        }
    }
    let norm = res.norm();
    if norm <= TOL * scale {
        Ok(w)
    } else {
        Err(Error::NoConvergence { context, residual: norm })
    }
}

fn eval(map: &PolyMap, u: &State) -> State {
    map.eval(u.as_slice())
}

/// `v` with `M(v) = M(u) + h G(u)`, `M ∈ {H, F}`.
fn forward(sys: &SystemDef, map: &PolyMap, context: &'static str, u: &State, h: f64) -> Result<State> {
    sys.check_ball(u)?;
    if h == 0.0 || sys.g.is_zero() {
        return Ok(u.clone());
    }
    let target = eval(map, u) + sys.eval_g(u) * h;
    let guess = {
        let j = sys_jac(sys, map, u);
        j.lu().solve(&(sys.eval_g(u) * h)).map(|d| u + d).unwrap_or_else(|| u.clone())
    };
    let v = newton(context, guess, &target, |w| eval(map, w), |w| sys_jac(sys, map, w))?;
    sys.check_ball(&v)?;
    Ok(v)
}

/// `w` with `M(w) + h G(w) = M(v)`.
fn backward(sys: &SystemDef, map: &PolyMap, context: &'static str, v: &State, h: f64) -> Result<State> {
    sys.check_ball(v)?;
    if h == 0.0 || sys.g.is_zero() {
        return Ok(v.clone());
    }
    let target = eval(map, v);
    let guess = {
        let j = sys_jac(sys, map, v);
        j.lu().solve(&(sys.eval_g(v) * h)).map(|d| v - d).unwrap_or_else(|| v.clone())
    };
    let w = newton(context, guess, &target, |w| eval(map, w) + sys.eval_g(w) * h, |w| sys_jac(sys, map, w) + sys.dg(w) * h)?;
    sys.check_ball(&w)?;
    Ok(w)
}

fn sys_jac(sys: &SystemDef, map: &PolyMap, u: &State) -> DMatrix<f64> {
    if std::ptr::eq(map, &sys.f) {
        sys.df(u)
    } else {
        sys.dh(u)
    }
}

/// `Φ_h(u) = F⁻¹[F(u) + h G(u)]`.
pub fn phi_h(sys: &SystemDef, u: &State, h: f64) -> Result<State> {
    if sys.f.is_identity() {
        return explicit(sys, u, h);
    }
    forward(sys, &sys.f, "phi_h", u, h)
}

/// `u + h G(u)`, the source maps when the inverted map is the identity.
fn explicit(sys: &SystemDef, u: &State, h: f64) -> Result<State> {
    sys.check_ball(u)?;
    let v = u + sys.eval_g(u) * h;
    sys.check_ball(&v)?;
    Ok(v)
}

/// `w` with `Φ_h(w) = v`.
pub fn phi_h_inv(sys: &SystemDef, v: &State, h: f64) -> Result<State> {
    backward(sys, &sys.f, "phi_h inverse", v, h)
}

/// `H⁻¹[H(u) + h G(u)]`.
pub fn split_map(sys: &SystemDef, u: &State, h: f64) -> Result<State> {
    if sys.is_h_identity() {
        return explicit(sys, u, h);
    }
    forward(sys, &sys.h, "split map", u, h)
}

/// `w` with `split_map(w) = v`.
pub fn split_map_inv(sys: &SystemDef, v: &State, h: f64) -> Result<State> {
    backward(sys, &sys.h, "split map inverse", v, h)
}

#[cfg(test)]
mod tests {
    use super::super::{sys_dld, sys_lin};
    use super::*;

    fn s(a: f64, b: f64) -> State {
        State::from_vec(vec![a, b])
    }

    #[test]
    fn no_source_is_identity() {
        let sys = sys_dld(0.0, 0.2);
        let u = s(0.05, -0.03);
        assert_eq!(phi_h(&sys, &u, 0.1).unwrap(), u);
        assert_eq!(split_map(&sys, &u, 0.1).unwrap(), u);
    }

    #[test]
    fn linear_phi_closed_form() {
        let g = 0.3;
        let h = 0.05;
        let sys = sys_lin(g);
        let u = s(0.1, 0.04);
        let a = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0]);
        let gm = DMatrix::from_row_slice(2, 2, &[0.0, g, -g, 0.0]);
        let expect = (DMatrix::identity(2, 2) + a.try_inverse().unwrap() * gm * h) * &u;
        assert!((phi_h(&sys, &u, h).unwrap() - expect).norm() < 1e-14);
    }

    #[test]
    fn split_identity_h() {
        let sys = sys_lin(0.2);
        let u = s(0.1, 0.04);
        let v = split_map(&sys, &u, 0.05).unwrap();
        assert!((v - s(0.1 + 0.05 * 0.2 * 0.04, 0.04 - 0.05 * 0.2 * 0.1)).norm() < 1e-16);
    }

    #[test]
    fn inverses_round_trip() {
        let sys = sys_dld(0.2, 0.2);
        let u = s(0.05, -0.08);
        let v = phi_h(&sys, &u, 0.05).unwrap();
        assert!((phi_h_inv(&sys, &v, 0.05).unwrap() - &u).norm() < 1e-12);
        let w = split_map(&sys, &u, 0.05).unwrap();
        assert!((split_map_inv(&sys, &w, 0.05).unwrap() - u).norm() < 1e-12);
    }

    #[test]
    fn dld_phi_displacement_small() {
        let sys = sys_dld(0.01, 0.2);
        let u = s(0.1, 0.0);
        let d = (phi_h(&sys, &u, 0.05).unwrap() - &u).norm();
        assert!(d <= 2.0 * 0.05 * 0.01);
    }
}
