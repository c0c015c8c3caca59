//! Multivariate polynomials and polynomial maps with exact derivatives.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coef: f64,
    pub exps: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly {
    pub terms: Vec<Monomial>,
}

fn pow(x: f64, e: u32) -> f64 {
    match e {
        0 => 1.0,
        1 => x,
        2 => x * x,
        _ => x.powi(e as i32),
    }
}

impl Monomial {
    pub fn new(coef: f64, exps: Vec<u32>) -> Self {
        Self { coef, exps }
    }

    fn eval(&self, u: &[f64]) -> f64 {
        self.exps.iter().zip(u).fold(self.coef, |acc, (&e, &x)| acc * pow(x, e))
    }

    /// Coefficient and exponents of ∂/∂u_j, or `None` when it vanishes.
    fn diff(&self, j: usize) -> Option<Monomial> {
        let e = self.exps[j];
        if e == 0 || self.coef == 0.0 {
            return None;
        }
        let mut exps = self.exps.clone();
        exps[j] = e - 1;
        Some(Monomial { coef: self.coef * e as f64, exps })
    }

    fn degree(&self) -> u32 {
        self.exps.iter().sum()
    }
}

impl Poly {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self { terms: vec![Monomial::new(c, vec![0; n])] }
    }

    /// `Σ coefs[k] u_k`.
    pub fn linear(coefs: &[f64]) -> Self {
        let n = coefs.len();
        let terms = coefs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0.0)
            .map(|(k, &c)| {
                let mut e = vec![0; n];
                e[k] = 1;
                Monomial::new(c, e)
            })
            .collect();
        Self { terms }
    }

    pub fn var(n: usize, k: usize) -> Self {
        let mut c = vec![0.0; n];
        c[k] = 1.0;
        Self::linear(&c)
    }

    pub fn term(mut self, coef: f64, exps: Vec<u32>) -> Self {
        self.terms.push(Monomial::new(coef, exps));
        self
    }

    pub fn eval(&self, u: &[f64]) -> f64 {
        self.terms.iter().map(|t| t.eval(u)).sum()
    }

    pub fn diff(&self, j: usize) -> Poly {
        Poly { terms: self.terms.iter().filter_map(|t| t.diff(j)).collect() }
    }

    pub fn grad(&self, u: &[f64]) -> DVector<f64> {
        DVector::from_iterator(u.len(), (0..u.len()).map(|j| self.terms.iter().filter_map(|t| t.diff(j)).map(|d| d.eval(u)).sum::<f64>()))
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn nvars(&self) -> Option<usize> {
        self.terms.first().map(|t| t.exps.len())
    }
}

/// Vector of polynomials in `n_in` variables.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyMap {
    pub n_in: usize,
    pub comps: Vec<Poly>,
    /// Partial derivatives `d[a][j] = ∂comps[a]/∂u_j`.
    d: Vec<Vec<Poly>>,
    /// Second partials `dd[a][j][k]`.
    dd: Vec<Vec<Vec<Poly>>>,
}

impl PolyMap {
    pub fn new(n_in: usize, comps: Vec<Poly>) -> Self {
        for p in &comps {
            for t in &p.terms {
                assert_eq!(t.exps.len(), n_in, "monomial arity mismatch");
            }
        }
        let d: Vec<Vec<Poly>> = comps.iter().map(|p| (0..n_in).map(|j| p.diff(j)).collect()).collect();
        let dd = d.iter().map(|row| row.iter().map(|pj| (0..n_in).map(|k| pj.diff(k)).collect()).collect()).collect();
        Self { n_in, comps, d, dd }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(n, (0..n).map(|k| Poly::var(n, k)).collect())
    }

    pub fn zero(n_in: usize, n_out: usize) -> Self {
        Self::new(n_in, vec![Poly::zero(); n_out])
    }

    /// `u ↦ M u`.
    pub fn linear(m: &DMatrix<f64>) -> Self {
        let comps = (0..m.nrows()).map(|a| Poly::linear(&m.row(a).iter().copied().collect::<Vec<_>>())).collect();
        Self::new(m.ncols(), comps)
    }

    pub fn n_out(&self) -> usize {
        self.comps.len()
    }

    pub fn eval(&self, u: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.comps.len(), self.comps.iter().map(|p| p.eval(u)))
    }

    pub fn jacobian(&self, u: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(self.comps.len(), self.n_in, |a, j| self.d[a][j].eval(u))
    }

    /// `d/ds J(u + s v)` at `s = 0`.
    pub fn jacobian_dir(&self, u: &[f64], v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(self.comps.len(), self.n_in, |a, j| {
            (0..self.n_in).filter(|&k| v[k] != 0.0).map(|k| self.dd[a][j][k].eval(u) * v[k]).sum()
        })
    }

    pub fn is_identity(&self) -> bool {
        self.comps.len() == self.n_in
            && self.comps.iter().enumerate().all(|(a, p)| {
                let live: Vec<&Monomial> = p.terms.iter().filter(|t| t.coef != 0.0).collect();
                live.len() == 1 && live[0].coef == 1.0 && live[0].exps.iter().enumerate().all(|(k, &e)| e == u32::from(k == a))
            })
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|p| p.terms.iter().all(|t| t.coef == 0.0))
    }

    pub fn degree(&self) -> u32 {
        self.comps.iter().map(Poly::degree).max().unwrap_or(0)
    }
}
