//! Operator abstraction.
//!
//! Every algorithm in this crate touches `A` only through [`LinearOperator::apply`]
//! on an `n x k` column block. Dense matrices, low-rank factorizations and
//! stencils all sit behind the same trait.

use std::fmt;
use std::sync::Arc;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{PhimvError, Result};

/// A real linear map `R^n -> R^n`, accessed only through block products.
///
/// Implementations must be deterministic and re-entrant: `apply` on the same
/// input returns bit-identical output, from any thread.
pub trait LinearOperator: Send + Sync {
    fn dim(&self) -> usize;

    /// Returns `A * x` for an `n x k` block `x`.
    fn apply(&self, x: ArrayView2<'_, f64>) -> Array2<f64>;

    fn label(&self) -> Option<&str> {
        None
    }

    fn apply_vec(&self, x: ArrayView1<'_, f64>) -> Array1<f64> {
        let col = x.insert_axis(Axis(1));
        self.apply(col).index_axis_move(Axis(1), 0)
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        (**self).apply(x)
    }
    fn label(&self) -> Option<&str> {
        (**self).label()
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        (**self).apply(x)
    }
    fn label(&self) -> Option<&str> {
        (**self).label()
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        (**self).apply(x)
    }
    fn label(&self) -> Option<&str> {
        (**self).label()
    }
}

/// Dense `n x n` matrix adapted to [`LinearOperator`].
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    entries: Array2<f64>,
    label: Option<String>,
}

impl DenseMatrix {
    pub fn new(entries: Array2<f64>) -> Result<Self> {
        let (rows, cols) = entries.dim();
        if rows != cols {
            return Err(PhimvError::NotSquare { rows, cols });
        }
        if let Some(((row, col), _)) = entries.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(PhimvError::NonFinite { row, col });
        }
        Ok(Self { entries, label: None })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn identity(n: usize) -> Self {
        Self { entries: Array2::eye(n), label: None }
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    pub fn into_entries(self) -> Array2<f64> {
        self.entries
    }

    /// Induced 1-norm (max column sum).
    pub fn norm1(&self) -> f64 {
        self.entries
            .columns()
            .into_iter()
            .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DenseMatrix")
            .field("n", &self.entries.nrows())
            .field("label", &self.label)
            .finish()
    }
}

impl LinearOperator for DenseMatrix {
    fn dim(&self) -> usize {
        self.entries.nrows()
    }

    fn apply(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        assert_eq!(x.nrows(), self.dim(), "operator/block dimension mismatch");
        self.entries.dot(&x)
    }

    fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }
}

/// Operator backed by a closure.
pub struct FnOperator<F> {
    dim: usize,
    apply: F,
    label: Option<String>,
}

impl<F> FnOperator<F>
where
    F: Fn(ArrayView2<'_, f64>) -> Array2<f64> + Send + Sync,
{
    pub fn new(dim: usize, apply: F) -> Self {
        Self { dim, apply, label: None }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }
}

impl<F> LinearOperator for FnOperator<F>
where
    F: Fn(ArrayView2<'_, f64>) -> Array2<f64> + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }
    fn apply(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        assert_eq!(x.nrows(), self.dim, "operator/block dimension mismatch");
        (self.apply)(x)
    }
    fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }
}

/// Wraps a square array of finite entries as an operator.
pub fn dense_operator(entries: Array2<f64>) -> Result<DenseMatrix> {
    DenseMatrix::new(entries)
}

/// `A x - xi x`.
pub fn shifted_apply<A: LinearOperator + ?Sized>(
    op: &A,
    xi: f64,
    x: ArrayView2<'_, f64>,
) -> Result<Array2<f64>> {
    check_rows(op, x.nrows())?;
    let mut y = op.apply(x);
    if xi != 0.0 {
        y.scaled_add(-xi, &x);
    }
    Ok(y)
}

pub(crate) fn check_rows<A: LinearOperator + ?Sized>(op: &A, rows: usize) -> Result<()> {
    if rows != op.dim() {
        return Err(PhimvError::DimensionMismatch { expected: op.dim(), got: rows });
    }
    Ok(())
}

/// Builds the dense matrix of `op` by applying it to the identity.
pub fn materialize<A: LinearOperator + ?Sized>(op: &A) -> DenseMatrix {
    let n = op.dim();
    let entries = op.apply(Array2::<f64>::eye(n).view());
    DenseMatrix { entries, label: op.label().map(str::to_owned) }
}

/// Max row sum of absolute values.
pub fn norm_inf(x: ArrayView2<'_, f64>) -> f64 {
    x.rows()
        .into_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn norm2(x: ArrayView1<'_, f64>) -> f64 {
    x.dot(&x).sqrt()
}

pub fn norm1_vec(x: ArrayView1<'_, f64>) -> f64 {
    x.iter().map(|v| v.abs()).sum()
}

pub fn all_finite(x: ArrayView2<'_, f64>) -> bool {
    x.iter().all(|v| v.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
        Array2::from_shape_fn((rows, cols), |_| rng.random_range(-1.0..1.0))
    }

    fn naive_matmul(a: &Array2<f64>, x: &Array2<f64>) -> Array2<f64> {
        let mut y = Array2::zeros((a.nrows(), x.ncols()));
        for i in 0..a.nrows() {
            for j in 0..x.ncols() {
                let mut acc = 0.0;
                for k in 0..a.ncols() {
                    acc += a[[i, k]] * x[[k, j]];
                }
                y[[i, j]] = acc;
            }
        }
        y
    }

    #[test]
    fn identity_apply() {
        let op = dense_operator(Array2::eye(2)).unwrap();
        let x = array![[1.0, 2.0], [3.0, 4.0]];
        assert_eq!(op.apply(x.view()), x);
    }

    #[test]
    fn nilpotent_shift() {
        let op = dense_operator(array![[0.0, 1.0], [0.0, 0.0]]).unwrap();
        let y = op.apply_vec(array![0.0, 1.0].view());
        assert_eq!(y, array![1.0, 0.0]);
    }

    #[test]
    fn dense_matches_naive_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random(5, 5, &mut rng);
        let x = random(5, 3, &mut rng);
        let op = dense_operator(a.clone()).unwrap();
        let got = op.apply(x.view());
        let want = naive_matmul(&a, &x);
        for (g, w) in got.iter().zip(want.iter()) {
            assert!((g - w).abs() <= 1e-15 * (1.0 + w.abs()));
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            dense_operator(Array2::zeros((2, 3))),
            Err(PhimvError::NotSquare { rows: 2, cols: 3 })
        ));
        let mut a = Array2::zeros((2, 2));
        a[[1, 0]] = f64::NAN;
        assert!(matches!(dense_operator(a), Err(PhimvError::NonFinite { row: 1, col: 0 })));
    }

    #[test]
    fn shifted_apply_cases() {
        let id = dense_operator(Array2::eye(2)).unwrap();
        let x = array![[3.0], [-1.5]];
        assert_eq!(shifted_apply(&id, 1.0, x.view()).unwrap(), Array2::zeros((2, 1)));

        let zero = dense_operator(Array2::zeros((2, 2))).unwrap();
        let y = shifted_apply(&zero, -2.0, array![[1.0], [1.0]].view()).unwrap();
        assert_eq!(y, array![[2.0], [2.0]]);

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random(4, 4, &mut rng);
        let x = random(4, 1, &mut rng);
        let op = dense_operator(a.clone()).unwrap();
        let shifted = &a - &(Array2::<f64>::eye(4) * 0.7);
        let want = naive_matmul(&shifted, &x);
        let got = shifted_apply(&op, 0.7, x.view()).unwrap();
        for (g, w) in got.iter().zip(want.iter()) {
            assert!((g - w).abs() <= 1e-14);
        }

        assert!(matches!(
            shifted_apply(&op, 0.0, Array2::zeros((3, 1)).view()),
            Err(PhimvError::DimensionMismatch { expected: 4, got: 3 })
        ));
    }

    #[test]
    fn zero_shift_is_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let op = dense_operator(random(6, 6, &mut rng)).unwrap();
        let x = random(6, 2, &mut rng);
        assert_eq!(shifted_apply(&op, 0.0, x.view()).unwrap(), op.apply(x.view()));
    }

    #[test]
    fn fn_operator_and_materialize() {
        let op = FnOperator::new(3, |x: ArrayView2<'_, f64>| x.to_owned() * 2.0).with_label("twice");
        let m = materialize(&op);
        assert_eq!(m.entries(), &(Array2::<f64>::eye(3) * 2.0));
        assert_eq!(m.label(), Some("twice"));
    }

    #[test]
    fn norms() {
        let x = array![[1.0, -2.0], [0.5, 0.5]];
        assert_eq!(norm_inf(x.view()), 3.0);
        let d = dense_operator(x).unwrap();
        assert_eq!(d.norm1(), 2.5);
    }

    proptest::proptest! {
        #[test]
        fn apply_is_linear_and_deterministic(seed in 0u64..1000, a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let op = dense_operator(random(7, 7, &mut rng)).unwrap();
            let x = random(7, 3, &mut rng);
            let y = random(7, 3, &mut rng);
            let lhs = op.apply((&x * a + &y * b).view());
            let rhs = op.apply(x.view()) * a + op.apply(y.view()) * b;
            proptest::prop_assert_eq!(lhs.dim(), (7, 3));
            let scale = norm_inf((&x * a).view()) + norm_inf((&y * b).view());
            let u = f64::EPSILON / 2.0;
            for (l, r) in lhs.iter().zip(rhs.iter()) {
                proptest::prop_assert!((l - r).abs() <= 10.0 * u * 7.0 * scale.max(1e-300));
            }
            proptest::prop_assert_eq!(op.apply(x.view()), op.apply(x.view()));
        }
    }
}
