//! Riemann solvers: approximate, simplified and crude solvers for the
//! homogeneous system, boundary solvers, and the h-Riemann solver family with a
//! stationary zero-wave.

mod fan;
pub(crate) mod newton;

pub use fan::{Wave, WaveFan, WaveKind};

use crate::error::{Error, Result};
use crate::hypsys::{avg_eigen, eigen, eigenvalues, phi_h, psi, psi_inv, SystemDef};
use crate::state::State;
use nalgebra::{DMatrix, DVector};

/// Waves with `|σ|` at or below this are dropped from fans.
pub const SIGMA_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverParams {
    /// Rarefaction splitting size and accuracy parameter.
    pub eps: f64,
    /// Splitting step or lattice spacing.
    pub h: f64,
    /// Interaction threshold of the simplified solvers.
    pub rho: f64,
    /// Speed of non-physical fronts.
    pub np_speed: f64,
    pub newton_tol: f64,
    /// Accumulated front defect that forces an exact re-solve.
    pub defect_tol: f64,
    /// Fronts at or beyond this generation only use simplified/crude solvers.
    pub gen_max: u32,
    pub event_cap: usize,
    /// Admissible size of the data functional.
    pub delta: f64,
}

impl SolverParams {
    pub fn new(sys: &SystemDef, eps: f64, h: f64) -> Self {
        SolverParams {
            eps,
            h,
            rho: eps.powi(3),
            np_speed: 0.5 * sys.c,
            newton_tol: 1e-13,
            defect_tol: eps.powi(3),
            gen_max: 6,
            event_cap: 5_000_000,
            delta: sys.r,
        }
    }

    pub fn validate(&self, sys: &SystemDef) -> Result<()> {
        if !(self.eps > 0.0 && self.h > 0.0 && self.rho > 0.0) {
            return Err(Error::Config("eps, h and rho must be positive".into()));
        }
        if !(self.np_speed > 0.0 && self.np_speed < sys.c) {
            return Err(Error::Config(format!("non-physical speed {} must lie in (0, c = {})", self.np_speed, sys.c)));
        }
        if !(self.defect_tol > 0.0 && self.newton_tol > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        Ok(())
    }
}

fn strip_tiny(mut sigma: DVector<f64>) -> DVector<f64> {
    for s in sigma.iter_mut() {
        if s.abs() <= SIGMA_FLOOR {
            *s = 0.0;
        }
    }
    sigma
}

/// Physical wave(s) of family `i` joining `left` to `right`; with `split`,
/// rarefactions are cut into `⌈σ/ε⌉` equal pieces moving with the speed of
/// their right state.
pub(crate) fn physical_waves(
    sys: &SystemDef,
    params: &SolverParams,
    i: usize,
    sigma: f64,
    left: &State,
    right: &State,
    split: bool,
) -> Result<Vec<Wave>> {
    if sys.is_gn(i) && sigma > 0.0 {
        let pieces = if split { (sigma / params.eps).ceil().max(1.0) as usize } else { 1 };
        let piece = sigma / pieces as f64;
        let mut out = Vec::with_capacity(pieces);
        let mut prev = left.clone();
        for k in 1..=pieces {
            let next = if k == pieces { right.clone() } else { psi(sys, i, k as f64 * piece, left)? };
            let speed = eigenvalues(sys, &next)?[i];
            out.push(Wave { family: Some(i), kind: WaveKind::Rarefaction, sigma: piece, speed, left: prev, right: next.clone() });
            prev = next;
        }
        return Ok(out);
    }
    let kind = if sys.is_gn(i) { WaveKind::Shock } else { WaveKind::Contact };
    let speed = avg_eigen(sys, left, right)?.lambda[i];
    Ok(vec![Wave { family: Some(i), kind, sigma, speed, left: left.clone(), right: right.clone() }])
}

/// Chain of states from `start` through the families `fams` with parameters `sigma`.
fn chain_forward(sys: &SystemDef, fams: &[usize], sigma: &[f64], start: &State) -> Result<Vec<State>> {
    let mut states = Vec::with_capacity(fams.len() + 1);
    states.push(start.clone());
    for (&i, &s) in fams.iter().zip(sigma) {
        let next = psi(sys, i, s, states.last().unwrap())?;
        states.push(next);
    }
    Ok(states)
}

/// Chain ending at `end`, built backwards with inverse curves.
fn chain_backward(sys: &SystemDef, fams: &[usize], sigma: &[f64], end: &State) -> Result<Vec<State>> {
    let mut states = vec![end.clone()];
    for (&i, &s) in fams.iter().zip(sigma).rev() {
        let prev = psi_inv(sys, i, s, states.last().unwrap())?;
        states.push(prev);
    }
    states.reverse();
    Ok(states)
}

fn waves_from_chain(
    sys: &SystemDef,
    params: &SolverParams,
    fams: &[usize],
    sigma: &[f64],
    states: &[State],
    split: bool,
) -> Result<Vec<Wave>> {
    let mut out = Vec::new();
    for (k, (&i, &s)) in fams.iter().zip(sigma).enumerate() {
        if s != 0.0 {
            out.extend(physical_waves(sys, params, i, s, &states[k], &states[k + 1], split)?);
        }
    }
    Ok(out)
}

fn check_states(sys: &SystemDef, states: &[State]) -> Result<()> {
    states.iter().try_for_each(|u| sys.check_ball(u))
}

fn eig_columns(sys: &SystemDef, u: &State, fams: &[usize]) -> Result<DMatrix<f64>> {
    let e = eigen(sys, u)?;
    let mut m = DMatrix::zeros(sys.n, fams.len());
    for (c, &i) in fams.iter().enumerate() {
        m.set_column(c, &e.rvec(i));
    }
    Ok(m)
}

/// Wave parameters `σ` with `Ψ_n(σ_n)∘…∘Ψ_1(σ_1)[uL] = uR`.
pub fn solve_riemann(sys: &SystemDef, ul: &State, ur: &State, tol: f64) -> Result<DVector<f64>> {
    if ul == ur {
        return Ok(DVector::zeros(sys.n));
    }
    let e = eigen(sys, ul)?;
    let fams: Vec<usize> = (0..sys.n).collect();
    let x0 = &e.l * (ur - ul);
    let sigma = newton::solve("Riemann decomposition", x0, e.r.clone(), tol, |s| {
        let end = chain_forward(sys, &fams, s.as_slice(), ul)?;
        Ok(end.last().unwrap() - ur)
    })?;
    Ok(sigma)
}

/// Full approximate fan for the jump `[uL, uR]`.
pub fn approx_riemann(sys: &SystemDef, params: &SolverParams, ul: &State, ur: &State) -> Result<WaveFan> {
    let sigma = strip_tiny(solve_riemann(sys, ul, ur, params.newton_tol)?);
    fan_from_sigma(sys, params, ul, ur, &sigma, true)
}

/// Fan with prescribed parameters; the last state is snapped to `uR`.
pub(crate) fn fan_from_sigma(
    sys: &SystemDef,
    params: &SolverParams,
    ul: &State,
    ur: &State,
    sigma: &DVector<f64>,
    split: bool,
) -> Result<WaveFan> {
    let fams: Vec<usize> = (0..sys.n).collect();
    let mut states = chain_forward(sys, &fams, sigma.as_slice(), ul)?;
    snap_tail(&mut states, sigma.as_slice(), ur);
    check_states(sys, &states)?;
    Ok(WaveFan::from_waves(waves_from_chain(sys, params, &fams, sigma.as_slice(), &states, split)?))
}

/// Replaces the states after the last nonzero wave by `end`, absorbing the
/// round-off of the chain. Returns whether any wave is present.
fn snap_tail(states: &mut [State], sigma: &[f64], end: &State) -> bool {
    let last = sigma.iter().rposition(|&s| s != 0.0);
    for s in states.iter_mut().skip(last.map_or(1, |k| k + 1)) {
        *s = end.clone();
    }
    last.is_some()
}

/// Families in ascending order, the negative ones first.
fn split_families(sys: &SystemDef, parts: &[(usize, f64)]) -> (Vec<(usize, f64)>, Vec<(usize, f64)>) {
    let mut sorted = parts.to_vec();
    sorted.sort_by_key(|p| p.0);
    sorted.into_iter().filter(|p| p.1 != 0.0).partition(|p| sys.is_negative(p.0))
}

/// Fan made of the given physical waves, negative families built forward from
/// `uL`, positive ones backward from `uR`, joined by a non-physical front.
fn with_np_between(sys: &SystemDef, params: &SolverParams, ul: &State, ur: &State, parts: &[(usize, f64)]) -> Result<WaveFan> {
    let (neg, pos) = split_families(sys, parts);
    let nf: Vec<usize> = neg.iter().map(|p| p.0).collect();
    let ns: Vec<f64> = neg.iter().map(|p| p.1).collect();
    let pf: Vec<usize> = pos.iter().map(|p| p.0).collect();
    let ps: Vec<f64> = pos.iter().map(|p| p.1).collect();
    let left_chain = chain_forward(sys, &nf, &ns, ul)?;
    let right_chain = chain_backward(sys, &pf, &ps, ur)?;
    check_states(sys, &left_chain)?;
    check_states(sys, &right_chain)?;
    let mut waves = waves_from_chain(sys, params, &nf, &ns, &left_chain, false)?;
    let a = left_chain.last().unwrap();
    let b = &right_chain[0];
    if a != b {
        waves.push(Wave::non_physical(a.clone(), b.clone(), params.np_speed));
    }
    waves.extend(waves_from_chain(sys, params, &pf, &ps, &right_chain, false)?);
    Ok(WaveFan::from_waves(waves))
}

/// Interaction of physical `alpha` (left) with physical `beta` (right) resolved
/// without new physical fronts: the same families and parameters (merged when
/// the families agree) plus one non-physical front.
pub fn simplified_riemann(sys: &SystemDef, params: &SolverParams, alpha: &Wave, beta: &Wave) -> Result<WaveFan> {
    let (ka, kb) = (alpha.family.expect("physical"), beta.family.expect("physical"));
    let parts = if ka == kb { vec![(ka, alpha.sigma + beta.sigma)] } else { vec![(ka, alpha.sigma), (kb, beta.sigma)] };
    with_np_between(sys, params, &alpha.left, &beta.right, &parts)
}

/// A non-physical front crossing a physical one: the physical wave keeps its
/// family and parameter, the non-physical jump adapts to the outer states.
pub fn crude_riemann(sys: &SystemDef, params: &SolverParams, left: &Wave, right: &Wave) -> Result<WaveFan> {
    let (ul, ur) = (&left.left, &right.right);
    let (phys, np_left) = if left.kind == WaveKind::NonPhysical { (right, true) } else { (left, false) };
    let i = phys.family.expect("physical");
    if np_left {
        let w = psi(sys, i, phys.sigma, ul)?;
        sys.check_ball(&w)?;
        let mut waves = physical_waves(sys, params, i, phys.sigma, ul, &w, false)?;
        if &w != ur {
            waves.push(Wave::non_physical(w, ur.clone(), params.np_speed));
        }
        Ok(WaveFan::from_waves(waves))
    } else {
        let w = psi_inv(sys, i, phys.sigma, ur)?;
        sys.check_ball(&w)?;
        let mut waves = Vec::new();
        if &w != ul {
            waves.push(Wave::non_physical(ul.clone(), w.clone(), params.np_speed));
        }
        waves.extend(physical_waves(sys, params, i, phys.sigma, &w, ur, false)?);
        Ok(WaveFan::from_waves(waves))
    }
}

/// Mixed problem at `x = 0`: boundary state `u_b` with `b1(u_b) = g` joined to
/// `uR` by positive-family waves. Returns `(u_b, fan)`.
pub fn boundary_riemann_left(sys: &SystemDef, params: &SolverParams, g: &State, ur: &State) -> Result<(State, WaveFan)> {
    let fams: Vec<usize> = (sys.m..sys.n).collect();
    if (sys.eval_b1(ur) - g).norm() == 0.0 {
        return Ok((ur.clone(), WaveFan::empty()));
    }
    let jac = -(sys.db1(ur) * eig_columns(sys, ur, &fams)?);
    let x0 = jac.clone().lu().solve(&(g - sys.eval_b1(ur))).ok_or(Error::SingularDH)?;
    let sigma = newton::solve("left boundary problem", x0, jac, params.newton_tol, |s| {
        let chain = chain_backward(sys, &fams, s.as_slice(), ur)?;
        Ok(sys.eval_b1(&chain[0]) - g)
    })?;
    let sigma = strip_tiny(sigma);
    let states = chain_backward(sys, &fams, sigma.as_slice(), ur)?;
    check_states(sys, &states)?;
    let fan = WaveFan::from_waves(waves_from_chain(sys, params, &fams, sigma.as_slice(), &states, true)?);
    Ok((states[0].clone(), fan))
}

/// Mixed problem at `x = L`: negative-family waves from `uL` to a boundary state
/// `u_b` with `b2(u_b) = g`. Returns `(u_b, fan)`.
pub fn boundary_riemann_right(sys: &SystemDef, params: &SolverParams, ul: &State, g: &State) -> Result<(State, WaveFan)> {
    let fams: Vec<usize> = (0..sys.m).collect();
    if (sys.eval_b2(ul) - g).norm() == 0.0 {
        return Ok((ul.clone(), WaveFan::empty()));
    }
    let jac = sys.db2(ul) * eig_columns(sys, ul, &fams)?;
    let x0 = jac.clone().lu().solve(&(g - sys.eval_b2(ul))).ok_or(Error::SingularDH)?;
    let sigma = newton::solve("right boundary problem", x0, jac, params.newton_tol, |s| {
        let chain = chain_forward(sys, &fams, s.as_slice(), ul)?;
        Ok(sys.eval_b2(chain.last().unwrap()) - g)
    })?;
    let sigma = strip_tiny(sigma);
    let states = chain_forward(sys, &fams, sigma.as_slice(), ul)?;
    check_states(sys, &states)?;
    let fan = WaveFan::from_waves(waves_from_chain(sys, params, &fams, sigma.as_slice(), &states, true)?);
    Ok((states.last().unwrap().clone(), fan))
}

/// h-Riemann solver: negative waves, a zero-wave `[ω_m, Φ_h(ω_m)]` at speed 0,
/// then positive waves, joining `uL` to `uR`.
pub fn h_riemann(sys: &SystemDef, params: &SolverParams, ul: &State, ur: &State) -> Result<WaveFan> {
    h_riemann_split(sys, params, ul, ur, true)
}

pub(crate) fn h_riemann_split(sys: &SystemDef, params: &SolverParams, ul: &State, ur: &State, split: bool) -> Result<WaveFan> {
    let h = params.h;
    let neg: Vec<usize> = (0..sys.m).collect();
    let pos: Vec<usize> = (sys.m..sys.n).collect();
    let build = |s: &[f64]| -> Result<(Vec<State>, State, Vec<State>)> {
        let left = chain_forward(sys, &neg, &s[..sys.m], ul)?;
        let z = phi_h(sys, left.last().unwrap(), h)?;
        let right = chain_forward(sys, &pos, &s[sys.m..], &z)?;
        Ok((left, z, right))
    };
    let e = eigen(sys, ul)?;
    let z0 = phi_h(sys, ul, h)?;
    // Linearisation: uR ≈ Φ_h(uL) + R σ.
    let x0 = &e.l * (ur - &z0);
    let sigma = newton::solve("h-Riemann problem", x0, e.r.clone(), params.newton_tol, |s| {
        let (_, _, right) = build(s.as_slice())?;
        Ok(right.last().unwrap() - ur)
    })?;
    let sigma = strip_tiny(sigma);
    let (left, z, mut right) = build(sigma.as_slice())?;
    if !snap_tail(&mut right, &sigma.as_slice()[sys.m..], ur) && (&z - ur).norm() > newton::ACCEPT {
        return Err(Error::NoConvergence { context: "h-Riemann problem", residual: (&z - ur).norm() });
    }
    check_states(sys, &left)?;
    check_states(sys, &right)?;
    let mut waves = waves_from_chain(sys, params, &neg, &sigma.as_slice()[..sys.m], &left, split)?;
    waves.push(Wave::zero(left.last().unwrap().clone(), z));
    waves.extend(waves_from_chain(sys, params, &pos, &sigma.as_slice()[sys.m..], &right, split)?);
    Ok(WaveFan::from_waves(waves))
}

/// Which side of the zero-wave the physical front comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Physical front of family `i` and parameter `σ` crossing the zero-wave
/// without new physical fronts. `uL`, `uR` are the outer states.
///
/// From the left (positive family): zero `[uL, Φ_h(uL)]`, non-physical
/// `[Φ_h(uL), w]`, physical `[w, uR]` with `w = Ψ_i(σ)⁻¹[uR]`.
/// From the right (negative family): physical `[uL, w]`, `w = Ψ_i(σ)[uL]`, zero
/// `[w, Φ_h(w)]`, non-physical `[Φ_h(w), uR]`.
pub fn simplified_h_riemann(
    sys: &SystemDef,
    params: &SolverParams,
    i: usize,
    sigma: f64,
    ul: &State,
    ur: &State,
    from: Side,
) -> Result<WaveFan> {
    let h = params.h;
    let mut waves = Vec::new();
    match from {
        Side::Left => {
            let zm = phi_h(sys, ul, h)?;
            let w = psi_inv(sys, i, sigma, ur)?;
            sys.check_ball(&w)?;
            waves.push(Wave::zero(ul.clone(), zm.clone()));
            if zm != w {
                waves.push(Wave::non_physical(zm, w.clone(), params.np_speed));
            }
            if sigma != 0.0 {
                waves.extend(physical_waves(sys, params, i, sigma, &w, ur, false)?);
            }
        }
        Side::Right => {
            let w = psi(sys, i, sigma, ul)?;
            sys.check_ball(&w)?;
            let zm = phi_h(sys, &w, h)?;
            if sigma != 0.0 {
                waves.extend(physical_waves(sys, params, i, sigma, ul, &w, false)?);
            }
            waves.push(Wave::zero(w, zm.clone()));
            if &zm != ur {
                waves.push(Wave::non_physical(zm, ur.clone(), params.np_speed));
            }
        }
    }
    Ok(WaveFan::from_waves(waves))
}

/// Non-physical front crossing the zero-wave from the left: zero `[uL, Φ_h(uL)]`
/// followed by non-physical `[Φ_h(uL), uR]`.
pub fn crude_h_riemann(sys: &SystemDef, params: &SolverParams, ul: &State, ur: &State) -> Result<WaveFan> {
    let zm = phi_h(sys, ul, params.h)?;
    let mut waves = vec![Wave::zero(ul.clone(), zm.clone())];
    if &zm != ur {
        waves.push(Wave::non_physical(zm, ur.clone(), params.np_speed));
    }
    Ok(WaveFan::from_waves(waves))
}

#[cfg(test)]
mod tests;
