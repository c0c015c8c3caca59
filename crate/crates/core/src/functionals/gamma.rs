//! Weighted distance between two records on the shrinking left triangle,
//! measured in shock-curve coordinates.

use super::glimm::GlimmSetup;
use super::series::wave_items;
use crate::error::{Error, Result};
use crate::hypsys::{eigen, hugoniot_curve, integral_curve, speed_bounds, SystemDef, SPEED_SAMPLES};
use crate::riemann::newton;
use crate::riemann::WaveKind;
use crate::solution::FrontSolution;
use crate::state::State;
use nalgebra::DVector;

fn shock_curve(sys: &SystemDef, i: usize, q: f64, u: &State) -> Result<State> {
    if sys.is_gn(i) {
        hugoniot_curve(sys, i, q, u)
    } else {
        integral_curve(sys, i, q, u)
    }
}

/// `q` with `S_n(q_n)∘…∘S_1(q_1)[u] = v`, using shock curves only.
pub fn shock_decomposition(sys: &SystemDef, u: &State, v: &State) -> Result<DVector<f64>> {
    if u == v {
        return Ok(DVector::zeros(sys.n));
    }
    let e = eigen(sys, u)?;
    let x0 = &e.l * (v - u);
    newton::solve("shock-curve decomposition", x0, e.r.clone(), 1e-13, |q| {
        let mut w = u.clone();
        for i in 0..sys.n {
            w = shock_curve(sys, i, q[i], &w)?;
        }
        Ok(w - v)
    })
}

/// `τ̂(x₁) = x₁ / sup|λ₁|` over the sampled ball.
pub fn tau_hat_at(sys: &SystemDef, x1: f64) -> Result<f64> {
    let b = speed_bounds(sys, SPEED_SAMPLES)?;
    Ok(x1 / b.min[0].abs())
}

struct Wave {
    x: f64,
    family: Option<usize>,
    strength: f64,
}

/// `K_{i,α}(x)` of the weight table; zero-waves have `family = None`.
fn k_weight(sys: &SystemDef, i: usize, q_i: f64, x: f64, a: &Wave) -> f64 {
    let left = a.x < x;
    let hit = match a.family {
        Some(k) if k > i => left,
        Some(k) if k < i => !left,
        Some(_) if sys.is_gn(i) => (q_i < 0.0 && left) || (q_i > 0.0 && !left),
        Some(_) => false,
        None if i < sys.m => left,
        None => !left,
    };
    if hit {
        1.0
    } else {
        0.0
    }
}

/// `Γ(u(t), v(t)) = Σ_i ∫_0^{y₁(t)} |q̃_i| W_i dx` with
/// `y₁(t) = x₁(1 − t/τ̂(x₁))`.
pub fn gamma(sys: &SystemDef, a: &FrontSolution, b: &FrontSolution, t: f64, x1: f64, setup: &GlimmSetup) -> Result<f64> {
    let tau = tau_hat_at(sys, x1)?;
    if t >= tau {
        return Err(Error::Config(format!("t = {t} is not below tau_hat(x1) = {tau}")));
    }
    let y1 = x1 * (1.0 - t / tau);
    let w = &setup.weights;
    let (ia, ib) = (wave_items(a, t), wave_items(b, t));
    let upsilon = setup.evaluate(&ia, t, &a.g1, &a.g2, false).upsilon_l + setup.evaluate(&ib, t, &b.g1, &b.g2, false).upsilon_l;
    let waves: Vec<Wave> = ia
        .iter()
        .chain(&ib)
        .filter(|f| f.x > 0.0 && f.x < y1 && f.kind != WaveKind::NonPhysical)
        .map(|f| Wave { x: f.x, family: f.family, strength: f.strength })
        .collect();
    let (sa, sb) = (a.slice(t), b.slice(t));
    let mut pts: Vec<f64> = sa.breaks.iter().chain(&sb.breaks).copied().filter(|&x| x > 0.0 && x < y1).collect();
    pts.push(0.0);
    pts.push(y1);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut total = 0.0;
    for seg in pts.windows(2) {
        let width = seg[1] - seg[0];
        if width <= 0.0 {
            continue;
        }
        let x = 0.5 * (seg[0] + seg[1]);
        let q = shock_decomposition(sys, sa.eval(x), sb.eval(x))?;
        for i in 0..sys.n {
            if q[i] == 0.0 {
                continue;
            }
            let qt = if i < sys.m { w.kbar * q[i] } else { q[i] };
            let sum: f64 = waves.iter().map(|a| k_weight(sys, i, q[i], x, a) * a.strength).sum();
            let wi = 1.0 + w.kappa1 * sum + w.kappa2 * upsilon;
            total += qt.abs() * wi * width;
        }
    }
    Ok(total)
}
