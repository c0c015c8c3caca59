//! Balance-law systems `∂t H(u) + ∂x F(u) = G(u)` with boundary operators,
//! their eigenstructure, wave curves, the source maps and assumption checks.

mod check;
mod curves;
mod eigen;
mod maps;
pub mod poly;

pub use check::{ball_samples, check_assumptions, speed_bounds, AssumptionReport, SpeedBounds, SPEED_SAMPLES};
pub use curves::{hugoniot_curve, integral_curve, wave_curve, wave_curve_inv};
pub(crate) use curves::{psi, psi_inv};
pub use eigen::{avg_eigen, eigen, eigenvalues, nonlinearity, EigenData};
pub use maps::{phi_h, phi_h_inv, split_map, split_map_inv};

use crate::error::{Error, Result};
use crate::state::State;
use nalgebra::DMatrix;
use poly::{Poly, PolyMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    GenuinelyNonlinear,
    LinearlyDegenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JacobianMode {
    Analytic,
    /// Central differences with step `1e-6·max(1,|u|)`.
    FiniteDifference,
}

/// Entropy `η` with flux `ζ`.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyPair {
    pub eta: Poly,
    pub zeta: Poly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemDef {
    pub name: String,
    pub n: usize,
    /// Number of negative families.
    pub m: usize,
    pub h: PolyMap,
    pub f: PolyMap,
    pub g: PolyMap,
    /// Left boundary operator, `n - m` components.
    pub b1: PolyMap,
    /// Right boundary operator, `m` components.
    pub b2: PolyMap,
    pub kinds: Vec<FamilyKind>,
    pub r: f64,
    pub c: f64,
    pub gamma: f64,
    pub entropy: Option<EntropyPair>,
    pub jacobians: JacobianMode,
}

fn fd_jacobian(map: &PolyMap, u: &[f64]) -> DMatrix<f64> {
    let n = u.len();
    let step = 1e-6 * u.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
    let mut jac = DMatrix::zeros(map.n_out(), n);
    let mut up = u.to_vec();
    let mut um = u.to_vec();
    for j in 0..n {
        up[j] = u[j] + step;
        um[j] = u[j] - step;
        let col = (map.eval(&up) - map.eval(&um)) / (2.0 * step);
        jac.set_column(j, &col);
        up[j] = u[j];
        um[j] = u[j];
    }
    jac
}

fn fd_jacobian_dir(map: &PolyMap, u: &[f64], v: &[f64]) -> DMatrix<f64> {
    let s = 1e-4;
    let up: Vec<f64> = u.iter().zip(v).map(|(a, b)| a + s * b).collect();
    let um: Vec<f64> = u.iter().zip(v).map(|(a, b)| a - s * b).collect();
    (fd_jacobian(map, &up) - fd_jacobian(map, &um)) / (2.0 * s)
}

impl SystemDef {
    /// Checks dimensions and kinds.
    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        let bad = |msg: String| Err(Error::Config(msg));
        if !(2..=8).contains(&n) {
            return bad(format!("system size {n} outside 2..=8"));
        }
        if self.m < 1 || self.m >= n {
            return bad(format!("m = {} must lie in 1..{}", self.m, n - 1));
        }
        for (name, map, outs) in
            [("H", &self.h, n), ("F", &self.f, n), ("G", &self.g, n), ("b1", &self.b1, n - self.m), ("b2", &self.b2, self.m)]
        {
            if map.n_in != n || map.n_out() != outs {
                return bad(format!("{name} must map R^{n} to R^{outs}"));
            }
        }
        if self.kinds.len() != n {
            return bad(format!("need {n} family kinds"));
        }
        if !(self.r > 0.0 && self.c > 0.0 && self.gamma >= 0.0) {
            return bad("r, c must be positive and gamma nonnegative".into());
        }
        Ok(())
    }

    pub fn is_h_identity(&self) -> bool {
        self.h.is_identity()
    }

    pub fn eval_h(&self, u: &State) -> State {
        self.h.eval(u.as_slice())
    }

    pub fn eval_f(&self, u: &State) -> State {
        self.f.eval(u.as_slice())
    }

    pub fn eval_g(&self, u: &State) -> State {
        self.g.eval(u.as_slice())
    }

    pub fn eval_b1(&self, u: &State) -> State {
        self.b1.eval(u.as_slice())
    }

    pub fn eval_b2(&self, u: &State) -> State {
        self.b2.eval(u.as_slice())
    }

    fn jac(&self, map: &PolyMap, u: &State) -> DMatrix<f64> {
        match self.jacobians {
            JacobianMode::Analytic => map.jacobian(u.as_slice()),
            JacobianMode::FiniteDifference => fd_jacobian(map, u.as_slice()),
        }
    }

    fn jac_dir(&self, map: &PolyMap, u: &State, v: &State) -> DMatrix<f64> {
        match self.jacobians {
            JacobianMode::Analytic => map.jacobian_dir(u.as_slice(), v.as_slice()),
            JacobianMode::FiniteDifference => fd_jacobian_dir(map, u.as_slice(), v.as_slice()),
        }
    }

    pub fn dh(&self, u: &State) -> DMatrix<f64> {
        self.jac(&self.h, u)
    }

    pub fn df(&self, u: &State) -> DMatrix<f64> {
        self.jac(&self.f, u)
    }

    pub fn dg(&self, u: &State) -> DMatrix<f64> {
        self.jac(&self.g, u)
    }

    pub fn db1(&self, u: &State) -> DMatrix<f64> {
        self.jac(&self.b1, u)
    }

    pub fn db2(&self, u: &State) -> DMatrix<f64> {
        self.jac(&self.b2, u)
    }

    pub(crate) fn dh_dir(&self, u: &State, v: &State) -> DMatrix<f64> {
        self.jac_dir(&self.h, u, v)
    }

    pub(crate) fn df_dir(&self, u: &State, v: &State) -> DMatrix<f64> {
        self.jac_dir(&self.f, u, v)
    }

    pub fn is_gn(&self, family: usize) -> bool {
        self.kinds[family] == FamilyKind::GenuinelyNonlinear
    }

    pub fn is_negative(&self, family: usize) -> bool {
        family < self.m
    }

    /// Default maximal wave-curve parameter.
    pub fn sigma0(&self) -> f64 {
        self.r / 4.0
    }

    pub fn in_ball(&self, u: &State) -> bool {
        u.norm() <= self.r * (1.0 + 1e-6)
    }

    pub fn check_ball(&self, u: &State) -> Result<()> {
        if self.in_ball(u) {
            Ok(())
        } else {
            Err(Error::OutOfDomain { norm: u.norm(), radius: self.r })
        }
    }

    pub fn zero_state(&self) -> State {
        State::zeros(self.n)
    }
}

fn rotation_source(gamma: f64) -> PolyMap {
    PolyMap::new(2, vec![Poly::linear(&[0.0, gamma]), Poly::linear(&[-gamma, 0.0])])
}

fn quadratic_entropy(zeta: Poly) -> EntropyPair {
    EntropyPair { eta: Poly::zero().term(0.5, vec![2, 0]).term(0.5, vec![0, 2]), zeta }
}

/// Linear system: `H = id`, `F = diag(-1, 1) u`, `G = γ[[0,1],[-1,0]] u`,
/// boundary operators `b1 = u2 + u1/2`, `b2 = u1 + u2/2`.
pub fn sys_lin(gamma: f64) -> SystemDef {
    let f = PolyMap::linear(&DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0]));
    SystemDef {
        name: "SYS-LIN".into(),
        n: 2,
        m: 1,
        h: PolyMap::identity(2),
        f,
        g: rotation_source(gamma),
        b1: PolyMap::new(2, vec![Poly::linear(&[0.5, 1.0])]),
        b2: PolyMap::new(2, vec![Poly::linear(&[1.0, 0.5])]),
        kinds: vec![FamilyKind::LinearlyDegenerate; 2],
        r: 0.5,
        c: 0.5,
        gamma: gamma.abs(),
        entropy: Some(quadratic_entropy(Poly::zero().term(-0.5, vec![2, 0]).term(0.5, vec![0, 2]))),
        jacobians: JacobianMode::Analytic,
    }
}

/// `H = id`, `F = (-u1, u2 + u2²/2)`, `G = γ(u2, -u1)`; family 1 linearly
/// degenerate, family 2 genuinely nonlinear; `b1 = u2`, `b2 = u1`.
pub fn sys_dld(gamma: f64, r: f64) -> SystemDef {
    let f = PolyMap::new(2, vec![Poly::linear(&[-1.0, 0.0]), Poly::var(2, 1).term(0.5, vec![0, 2])]);
    SystemDef {
        name: "SYS-DLD".into(),
        n: 2,
        m: 1,
        h: PolyMap::identity(2),
        f,
        g: rotation_source(gamma),
        b1: PolyMap::new(2, vec![Poly::var(2, 1)]),
        b2: PolyMap::new(2, vec![Poly::var(2, 0)]),
        kinds: vec![FamilyKind::LinearlyDegenerate, FamilyKind::GenuinelyNonlinear],
        r,
        c: 0.5,
        gamma: gamma.abs(),
        entropy: Some(quadratic_entropy(Poly::zero().term(-0.5, vec![2, 0]).term(0.5, vec![0, 2]).term(1.0 / 3.0, vec![0, 3]))),
        jacobians: JacobianMode::Analytic,
    }
}

/// Built-in system by name.
pub fn builtin(name: &str, gamma: f64, r: Option<f64>) -> Result<SystemDef> {
    let mut sys = match name.to_ascii_uppercase().as_str() {
        "SYS-LIN" | "LIN" => sys_lin(gamma),
        "SYS-DLD" | "DLD" => sys_dld(gamma, 0.2),
        other => return Err(Error::Config(format!("unknown built-in system {other}"))),
    };
    if let Some(r) = r {
        sys.r = r;
    }
    Ok(sys)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_validate() {
        sys_lin(0.01).validate().unwrap();
        sys_dld(0.01, 0.2).validate().unwrap();
    }

    #[test]
    fn fd_jacobian_matches_analytic() {
        let mut sys = sys_dld(0.3, 0.2);
        let u = State::from_vec(vec![0.05, -0.12]);
        let a = sys.df(&u);
        sys.jacobians = JacobianMode::FiniteDifference;
        let b = sys.df(&u);
        assert!((a - b).abs().max() < 1e-6);
    }

    #[test]
    fn entropy_pair_is_compatible() {
        // Dζ = Dη · DF for H = id.
        let sys = sys_dld(0.0, 0.2);
        let ent = sys.entropy.as_ref().unwrap();
        let u = State::from_vec(vec![0.07, -0.04]);
        let lhs = ent.zeta.grad(u.as_slice());
        let rhs = (ent.eta.grad(u.as_slice()).transpose() * sys.df(&u)).transpose();
        assert!((lhs - rhs).norm() < 1e-14);
    }
}
