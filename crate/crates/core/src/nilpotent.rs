//! The coefficient matrix `J = [0] ⊕ J_p(0)` and its closed-form exponentials.
//!
//! All matrices here are tiny (`(p+1) r` rows at most) and materialized densely.
//! Exponentials are finite sums: `J` is nilpotent, so every power from `p+1`
//! on is exactly zero and no truncation occurs.

use ndarray::{Array1, Array2};

use crate::error::{PhimvError, Result};

/// `[0] ⊕ J_p(0)`: zero first row and column, then a `p x p` nilpotent Jordan block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NilpotentCoeffMatrix {
    p: usize,
}

impl NilpotentCoeffMatrix {
    pub fn new(p: usize) -> Self {
        Self { p }
    }

    pub fn order(&self) -> usize {
        self.p
    }

    pub fn size(&self) -> usize {
        self.p + 1
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let n = self.size();
        let mut j = Array2::zeros((n, n));
        for i in 1..self.p {
            j[[i, i + 1]] = 1.0;
        }
        j
    }

    /// `exp(c J)`.
    pub fn exp_scaled(&self, c: f64) -> Array2<f64> {
        nilpotent_exp(&(self.to_dense() * c), self.size())
    }

    /// `exp(J ⊗ Δ / s)` for diagonal `Δ = diag(delta)`.
    pub fn kron_exp(&self, delta: &Array1<f64>, s: f64) -> Array2<f64> {
        let scaled = delta / s;
        let k = kron_diag(&self.to_dense(), &scaled);
        nilpotent_exp(&k, self.size())
    }

    /// `J ⊗ Δ - xi (I ⊗ T)` for diagonal `Δ`, `T`.
    pub fn kron_shifted(&self, delta: &Array1<f64>, t: &Array1<f64>, xi: f64) -> Result<Array2<f64>> {
        if delta.len() != t.len() {
            return Err(PhimvError::DimensionMismatch { expected: delta.len(), got: t.len() });
        }
        let r = delta.len();
        let mut k = kron_diag(&self.to_dense(), delta);
        for blk in 0..self.size() {
            for i in 0..r {
                k[[blk * r + i, blk * r + i]] -= xi * t[i];
            }
        }
        Ok(k)
    }
}

/// `m ⊗ diag(d)`.
pub(crate) fn kron_diag(m: &Array2<f64>, d: &Array1<f64>) -> Array2<f64> {
    let r = d.len();
    let (rows, cols) = m.dim();
    let mut out = Array2::zeros((rows * r, cols * r));
    for ((a, b), &v) in m.indexed_iter() {
        if v != 0.0 {
            for i in 0..r {
                out[[a * r + i, b * r + i]] = v * d[i];
            }
        }
    }
    out
}

/// `Σ_{k=0}^{terms-1} N^k / k!` for nilpotent `N` with `N^terms = 0`.
fn nilpotent_exp(n: &Array2<f64>, terms: usize) -> Array2<f64> {
    let dim = n.nrows();
    let mut sum = Array2::<f64>::eye(dim);
    let mut term = Array2::<f64>::eye(dim);
    for k in 1..terms {
        term = term.dot(n) / k as f64;
        sum += &term;
    }
    sum
}
