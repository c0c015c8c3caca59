//! Weak-form and entropy residuals of a record against a fixed family of
//! compactly supported test functions.
//!
//! For piecewise constant records the space-time integrals reduce to line
//! integrals along fronts, split lines and lattice zero-waves; integrands are
//! polynomials of degree at most 8 along each piece, so five-point
//! Gauss–Legendre on the clipped support is exact.

use crate::error::{Error, Result};
use crate::hypsys::SystemDef;
use crate::riemann::WaveKind;
use crate::solution::{FrontSolution, Mode};
use crate::state::State;
use nalgebra::DVector;

const GL_NODES: [f64; 5] = [-0.906_179_845_938_664, -0.538_469_310_105_683, 0.0, 0.538_469_310_105_683, 0.906_179_845_938_664];
const GL_WEIGHTS: [f64; 5] =
    [0.236_926_885_056_189, 0.478_628_670_499_366, 0.568_888_888_888_889, 0.478_628_670_499_366, 0.236_926_885_056_189];

/// `sup |B'|` for `B(z) = (1 − z²)²`, attained at `z = 1/√3`.
const BUMP_SLOPE: f64 = 1.539_600_717_839_002;

/// `φ(t, x) = B((t − tc)/at)·B((x − xc)/ax)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestFunction {
    pub tc: f64,
    pub xc: f64,
    pub at: f64,
    pub ax: f64,
}

fn bump(z: f64) -> f64 {
    if z.abs() >= 1.0 {
        0.0
    } else {
        let w = 1.0 - z * z;
        w * w
    }
}

impl TestFunction {
    pub fn eval(&self, t: f64, x: f64) -> f64 {
        bump((t - self.tc) / self.at) * bump((x - self.xc) / self.ax)
    }

    /// `sup|φ| + sup|φ_t| + sup|φ_x|`.
    pub fn c1_norm(&self) -> f64 {
        1.0 + BUMP_SLOPE / self.at + BUMP_SLOPE / self.ax
    }

    fn t_support(&self) -> (f64, f64) {
        (self.tc - self.at, self.tc + self.at)
    }

    fn x_support(&self) -> (f64, f64) {
        (self.xc - self.ax, self.xc + self.ax)
    }
}

/// Centres on a 4×4 grid over `(0,T)×(0,L)`, each at the scales 1/8 and 1/16
/// of the domain; every support lies in the closed domain.
pub fn test_family(horizon: f64, length: f64) -> Vec<TestFunction> {
    let mut out = Vec::with_capacity(32);
    for div in [8.0, 16.0] {
        for i in 0..4 {
            for j in 0..4 {
                out.push(TestFunction {
                    tc: (i as f64 + 0.5) / 4.0 * horizon,
                    xc: (j as f64 + 0.5) / 4.0 * length,
                    at: horizon / div,
                    ax: length / div,
                });
            }
        }
    }
    out
}

/// `∫_{a}^{b} f` by 5-point Gauss–Legendre.
fn gauss(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    GL_NODES.iter().zip(GL_WEIGHTS).map(|(z, w)| w * f(mid + half * z)).sum::<f64>() * half
}

/// One straight piece of the record with its constant line density: the
/// contribution is `∫ φ(t, x(t)) dt · jump` for moving or vertical pieces and
/// `∫ φ(t0, x) dx · jump` for horizontal ones.
enum Piece {
    Front { t0: f64, t1: f64, x0: f64, speed: f64 },
    Horizontal { t: f64, x0: f64, x1: f64 },
}

fn piece_integral(phi: &TestFunction, p: &Piece) -> f64 {
    match *p {
        Piece::Front { t0, t1, x0, speed } => {
            let (ta, tb) = phi.t_support();
            let (mut lo, mut hi) = (t0.max(ta), t1.min(tb));
            let (xa, xb) = phi.x_support();
            if speed == 0.0 {
                if x0 <= xa || x0 >= xb {
                    return 0.0;
                }
            } else {
                // Times at which the piece is inside the x-support.
                let (s0, s1) = ((xa - x0) / speed + t0, (xb - x0) / speed + t0);
                lo = lo.max(s0.min(s1));
                hi = hi.min(s0.max(s1));
            }
            gauss(lo, hi, |t| phi.eval(t, x0 + speed * (t - t0)))
        }
        Piece::Horizontal { t, x0, x1 } => {
            let (xa, xb) = phi.x_support();
            gauss(x0.max(xa), x1.min(xb), |x| phi.eval(t, x))
        }
    }
}

/// Pieces of `sol` with their vector densities, from the densities of the
/// conserved quantity `h`, flux `f` and source term `g` at a state.
fn pieces<H, F, G>(sol: &FrontSolution, h: H, f: F, g: G) -> Vec<(Piece, DVector<f64>)>
where
    H: Fn(&State) -> DVector<f64>,
    F: Fn(&State) -> DVector<f64>,
    G: Fn(&State) -> DVector<f64>,
{
    let step = sol.params.h;
    let mut out = Vec::with_capacity(sol.segments.len());
    for s in &sol.segments {
        let (l, r) = (sol.seg_left(s), sol.seg_right(s));
        let density = if s.kind == WaveKind::Zero {
            // x = jh: −[F] + h·G(uL).
            -(f(&r) - f(&l)) + g(&l) * step
        } else {
            (h(&r) - h(&l)) * s.speed - (f(&r) - f(&l))
        };
        out.push((Piece::Front { t0: s.t0, t1: s.t1, x0: s.x0, speed: s.speed }, density));
    }
    for rec in &sol.splits {
        let below = &rec.before;
        let above = &rec.after;
        let mut pts: Vec<f64> = below.breaks.iter().chain(&above.breaks).copied().collect();
        pts.push(below.a);
        pts.push(below.b);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        for w in pts.windows(2).filter(|w| w[1] > w[0]) {
            let mid = 0.5 * (w[0] + w[1]);
            let (ub, ua) = (below.eval(mid), above.eval(mid));
            // t = jh: −([H] − h·G(u−)).
            let density = -(h(ua) - h(ub)) + g(ub) * step;
            out.push((Piece::Horizontal { t: rec.t, x0: w[0], x1: w[1] }, density));
        }
    }
    out
}

fn source_free(sol: &FrontSolution) -> bool {
    sol.mode == Mode::Plain
}

/// Evaluates every test function in parallel; the result is in family order.
fn per_function(family: &[TestFunction], eval: impl Fn(&TestFunction) -> f64 + Sync) -> Vec<f64> {
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get()).min(family.len()).max(1);
    let chunk = family.len().div_ceil(threads);
    std::thread::scope(|s| {
        let handles: Vec<_> = family.chunks(chunk).map(|c| s.spawn(|| c.iter().map(&eval).collect::<Vec<f64>>())).collect();
        handles.into_iter().flat_map(|h| h.join().expect("residual worker panicked")).collect()
    })
}

/// `max_φ |∬ H(u)φ_t + F(u)φ_x + source| / ‖φ‖_{C¹}`, with the source in the
/// discrete form of the run: a sum over split lines for splitting records, a
/// sum over the lattice for zero-wave records, none for plain records.
/// `sys` must be the system in the record's own orientation.
pub fn weak_residual(sys: &SystemDef, sol: &FrontSolution, family: &[TestFunction]) -> f64 {
    let n = sys.n;
    let plain = source_free(sol);
    let g = |u: &State| if plain { DVector::zeros(n) } else { sys.eval_g(u) };
    let list = pieces(sol, |u| sys.eval_h(u), |u| sys.eval_f(u), g);
    let values = per_function(family, |phi| {
        let mut acc = DVector::zeros(n);
        for (p, d) in &list {
            acc += d * piece_integral(phi, p);
        }
        acc.norm() / phi.c1_norm()
    });
    values.into_iter().fold(0.0, f64::max)
}

/// `min_φ ∬ η(u)φ_t + ζ(u)φ_x + Dη(u)·G(u)φ` over the family. The test
/// functions are nonnegative with `sup φ = 1`; the value is not divided by
/// `‖φ‖_{C¹}`. Admissible records give values at or above `−C(ε + h)`.
pub fn entropy_residual(sys: &SystemDef, sol: &FrontSolution, family: &[TestFunction]) -> Result<f64> {
    let ent = sys.entropy.as_ref().ok_or_else(|| Error::Config(format!("{} has no entropy pair", sys.name)))?;
    let plain = source_free(sol);
    let scalar = |v: f64| DVector::from_element(1, v);
    let list = pieces(
        sol,
        |u| scalar(ent.eta.eval(u.as_slice())),
        |u| scalar(ent.zeta.eval(u.as_slice())),
        |u| if plain { scalar(0.0) } else { scalar(ent.eta.grad(u.as_slice()).dot(&sys.eval_g(u))) },
    );
    let values = per_function(family, |phi| list.iter().map(|(p, d)| d[0] * piece_integral(phi, p)).sum::<f64>());
    Ok(values.into_iter().fold(f64::INFINITY, f64::min))
}
