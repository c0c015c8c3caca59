use super::SystemDef;
use crate::error::{Error, Result};
use crate::state::State;
use nalgebra::{DMatrix, DVector};

const SEPARATION: f64 = 1e-9;

/// Ascending eigenvalues with right eigenvectors (columns of `r`) and left
/// eigenvectors (rows of `l`), `l r = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenData {
    pub lambda: DVector<f64>,
    pub r: DMatrix<f64>,
    pub l: DMatrix<f64>,
}

impl EigenData {
    pub fn rvec(&self, i: usize) -> State {
        self.r.column(i).into_owned()
    }

    pub fn lvec(&self, i: usize) -> State {
        self.l.row(i).transpose()
    }

    pub fn n(&self) -> usize {
        self.lambda.len()
    }
}

fn check_separation(lambda: &[f64]) -> Result<()> {
    let mut gap = f64::INFINITY;
    for w in lambda.windows(2) {
        gap = gap.min(w[1] - w[0]);
    }
    for &l in lambda {
        gap = gap.min(l.abs());
    }
    if gap < SEPARATION || !gap.is_finite() && lambda.len() > 1 {
        return Err(Error::NonHyperbolic { gap });
    }
    Ok(())
}

/// Flips `v` so that its first non-negligible component is positive.
fn fix_sign(v: &mut DVector<f64>) {
    let scale = v.norm();
    if let Some(x) = v.iter().copied().find(|x| x.abs() > 1e-12 * scale) {
        if x < 0.0 {
            v.neg_mut();
        }
    }
}

fn eigvals_2x2(a: &DMatrix<f64>) -> Result<[f64; 2]> {
    let (p, q, r, s) = (a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]);
    let half = 0.5 * (p - s);
    let disc = half * half + q * r;
    if disc <= 0.0 {
        return Err(Error::NonHyperbolic { gap: 0.0 });
    }
    let root = disc.sqrt();
    let mid = 0.5 * (p + s);
    Ok([mid - root, mid + root])
}

fn null_vector_2x2(a: &DMatrix<f64>, lambda: f64) -> DVector<f64> {
    let r0 = (a[(0, 0)] - lambda, a[(0, 1)]);
    let r1 = (a[(1, 0)], a[(1, 1)] - lambda);
    let (x, y) = if r0.0.hypot(r0.1) >= r1.0.hypot(r1.1) { r0 } else { r1 };
    let mut v = DVector::from_vec(vec![-y, x]);
    v /= v.norm();
    v
}

fn eigvals_general(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    let vals = a.clone().schur().eigenvalues().ok_or(Error::NonHyperbolic { gap: 0.0 })?;
    let mut vals: Vec<f64> = vals.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

fn null_vector_general(a: &DMatrix<f64>, lambda: f64) -> DVector<f64> {
    let n = a.nrows();
    let shifted = a - DMatrix::identity(n, n) * lambda;
    let svd = shifted.svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let (k, _) = svd.singular_values.iter().enumerate().min_by(|x, y| x.1.total_cmp(y.1)).expect("nonempty");
    let mut v = vt.row(k).transpose();
    v /= v.norm();
    v
}

fn sorted_eigvals(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    let vals = if a.nrows() == 2 { eigvals_2x2(a)?.to_vec() } else { eigvals_general(a)? };
    check_separation(&vals)?;
    Ok(vals)
}

/// Eigenvalues ascending and unit right eigenvectors with the sign rule applied.
pub(crate) fn decompose(a: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let n = a.nrows();
    let vals = sorted_eigvals(a)?;
    let mut r = DMatrix::zeros(n, n);
    for (i, &lam) in vals.iter().enumerate() {
        let mut v = if n == 2 { null_vector_2x2(a, lam) } else { null_vector_general(a, lam) };
        fix_sign(&mut v);
        r.set_column(i, &v);
    }
    Ok((DVector::from_vec(vals), r))
}

fn invert(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if m.nrows() == 2 {
        let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        let scale = m.abs().max().powi(2);
        if det.abs() <= 1e-14 * scale.max(1e-300) {
            return Err(Error::SingularDH);
        }
        return Ok(DMatrix::from_row_slice(2, 2, &[m[(1, 1)] / det, -m[(0, 1)] / det, -m[(1, 0)] / det, m[(0, 0)] / det]));
    }
    m.clone().try_inverse().ok_or(Error::SingularDH)
}

/// `(DH)^{-1} DF` at `u`, along with `(DH)^{-1}`.
fn char_matrix(sys: &SystemDef, u: &State) -> Result<(DMatrix<f64>, Option<DMatrix<f64>>)> {
    let df = sys.df(u);
    if sys.is_h_identity() {
        return Ok((df, None));
    }
    let inv = invert(&sys.dh(u))?;
    Ok((&inv * df, Some(inv)))
}

/// Characteristic speeds only.
pub fn eigenvalues(sys: &SystemDef, u: &State) -> Result<DVector<f64>> {
    let (a, _) = char_matrix(sys, u)?;
    Ok(DVector::from_vec(sorted_eigvals(&a)?))
}

/// `∇λ_i · r_i` for the given right eigenvector `r_i` and left `l_i` with `l_i·r_i = 1`.
fn grad_lambda_dot(sys: &SystemDef, u: &State, a: &DMatrix<f64>, dh_inv: Option<&DMatrix<f64>>, l: &DVector<f64>, r: &DVector<f64>) -> f64 {
    let mut da = sys.df_dir(u, r);
    if let Some(inv) = dh_inv {
        da = inv * (da - sys.dh_dir(u, r) * a);
    }
    l.dot(&(da * r))
}

/// Normalised eigenstructure at `u`.
pub fn eigen(sys: &SystemDef, u: &State) -> Result<EigenData> {
    let (a, dh_inv) = char_matrix(sys, u)?;
    let (lambda, mut r) = decompose(&a)?;
    let l_raw = invert(&r).map_err(|_| Error::NonHyperbolic { gap: 0.0 })?;
    let mut scaled = false;
    for i in 0..sys.n {
        if sys.is_gn(i) {
            let ri = r.column(i).into_owned();
            let li = l_raw.row(i).transpose();
            let g = grad_lambda_dot(sys, u, &a, dh_inv.as_ref(), &li, &ri);
            if g.abs() < 1e-12 {
                return Err(Error::DegenerateFamily { family: i, value: g });
            }
            r.set_column(i, &(ri / g));
            scaled = true;
        }
    }
    let l = if scaled { invert(&r).map_err(|_| Error::NonHyperbolic { gap: 0.0 })? } else { l_raw };
    Ok(EigenData { lambda, r, l })
}

/// `∇λ_i · r̂_i` with unit `r̂_i`, for every family.
pub fn nonlinearity(sys: &SystemDef, u: &State) -> Result<Vec<f64>> {
    let (a, dh_inv) = char_matrix(sys, u)?;
    let (_, r) = decompose(&a)?;
    let l = invert(&r).map_err(|_| Error::NonHyperbolic { gap: 0.0 })?;
    Ok((0..sys.n).map(|i| grad_lambda_dot(sys, u, &a, dh_inv.as_ref(), &l.row(i).transpose(), &r.column(i).into_owned())).collect())
}

/// Gauss–Legendre nodes and weights on `[0, 1]`, 8 points.
pub(crate) const GL8: [(f64, f64); 8] = {
    const X: [f64; 4] = [0.183_434_642_495_649_8, 0.525_532_409_916_329, 0.796_666_477_413_626_7, 0.960_289_856_497_536_3];
    const W: [f64; 4] = [0.362_683_783_378_362, 0.313_706_645_877_887_3, 0.222_381_034_453_374_5, 0.101_228_536_290_376_3];
    [
        (0.5 * (1.0 - X[3]), 0.5 * W[3]),
        (0.5 * (1.0 - X[2]), 0.5 * W[2]),
        (0.5 * (1.0 - X[1]), 0.5 * W[1]),
        (0.5 * (1.0 - X[0]), 0.5 * W[0]),
        (0.5 * (1.0 + X[0]), 0.5 * W[0]),
        (0.5 * (1.0 + X[1]), 0.5 * W[1]),
        (0.5 * (1.0 + X[2]), 0.5 * W[2]),
        (0.5 * (1.0 + X[3]), 0.5 * W[3]),
    ]
};

/// Eigenstructure of `A(wl,wr)^{-1} B(wl,wr)` with `A = ∫DH`, `B = ∫DF` along the
/// segment. Eigenvectors are unit length.
pub fn avg_eigen(sys: &SystemDef, wl: &State, wr: &State) -> Result<EigenData> {
    let n = sys.n;
    let d = wr - wl;
    let mut b = DMatrix::zeros(n, n);
    let mut a = DMatrix::zeros(n, n);
    let h_id = sys.is_h_identity();
    if d.iter().all(|&x| x == 0.0) {
        b = sys.df(wl);
        if !h_id {
            a = sys.dh(wl);
        }
    } else {
        for &(theta, w) in GL8.iter() {
            let p = wl + &d * theta;
            b += sys.df(&p) * w;
            if !h_id {
                a += sys.dh(&p) * w;
            }
        }
    }
    let m = if h_id { b } else { invert(&a)? * b };
    let (lambda, r) = decompose(&m)?;
    let l = invert(&r).map_err(|_| Error::NonHyperbolic { gap: 0.0 })?;
    Ok(EigenData { lambda, r, l })
}
