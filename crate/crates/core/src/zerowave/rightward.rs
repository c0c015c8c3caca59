use crate::error::Result;
use crate::hypsys::poly::{Poly, PolyMap};
use crate::hypsys::{eigen, speed_bounds, EntropyPair, FamilyKind, SystemDef, SPEED_SAMPLES};
use crate::state::State;

/// The same balance law read with `x` as evolution variable:
/// `∂x F(u) + ∂t H(u) = G(u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RightwardSystem {
    pub sys: SystemDef,
    /// `perm[i]` is the rightward index of forward family `i`.
    pub perm: Vec<usize>,
}

/// Rightward index of forward family `i`: the order is reversed inside the
/// negative group and inside the positive group. The map is an involution.
pub fn family_perm(n: usize, m: usize, i: usize) -> usize {
    if i < m {
        m - 1 - i
    } else {
        m + (n - 1 - i)
    }
}

fn linear_rows(n: usize, rows: &[State]) -> PolyMap {
    PolyMap::new(n, rows.iter().map(|l| Poly::linear(l.as_slice())).collect())
}

/// Swaps the roles of `H` and `F`. Boundary operators are the frozen left
/// eigenvector coordinates at the origin: `b̃1(u) = (l_s(0)·u)` over the
/// positive families, `b̃2(u) = (l_r(0)·u)` over the negative ones.
pub fn make_rightward(sys: &SystemDef) -> Result<RightwardSystem> {
    let (n, m) = (sys.n, sys.m);
    let e0 = eigen(sys, &sys.zero_state())?;
    let pos: Vec<State> = (m..n).map(|s| e0.lvec(s)).collect();
    let neg: Vec<State> = (0..m).map(|r| e0.lvec(r)).collect();
    let perm: Vec<usize> = (0..n).map(|i| family_perm(n, m, i)).collect();
    let mut kinds = vec![FamilyKind::LinearlyDegenerate; n];
    for i in 0..n {
        kinds[perm[i]] = sys.kinds[i];
    }
    let name = match sys.name.strip_suffix("/rightward") {
        Some(base) => base.to_string(),
        None => format!("{}/rightward", sys.name),
    };
    let mut out = SystemDef {
        name,
        n,
        m,
        h: sys.f.clone(),
        f: sys.h.clone(),
        g: sys.g.clone(),
        b1: linear_rows(n, &pos),
        b2: linear_rows(n, &neg),
        kinds,
        r: sys.r,
        c: 1.0,
        gamma: sys.gamma,
        entropy: sys.entropy.as_ref().map(|e| EntropyPair { eta: e.zeta.clone(), zeta: e.eta.clone() }),
        jacobians: sys.jacobians,
    };
    let bounds = speed_bounds(&out, SPEED_SAMPLES)?;
    out.c = 0.5 * bounds.min_abs();
    Ok(RightwardSystem { sys: out, perm })
}
