use std::f64::consts::PI;

use ndarray::{s, Array1, Array2};

use crate::linop::DenseMatrix;

/// `x_j = (cos(πj/N) + 1) L/2`, `j = 0..=N`.
pub fn chebyshev_nodes(n: usize, l: f64) -> Array1<f64> {
    Array1::from_iter((0..=n).map(|j| ((PI * j as f64 / n as f64).cos() + 1.0) * (l / 2.0)))
}

/// Collocation differentiation matrix on the nodes, diagonal set by negative row sums.
pub fn chebyshev_differentiation(n: usize, l: f64) -> Array2<f64> {
    let x = chebyshev_nodes(n, l);
    let c = Array1::from_iter((0..=n).map(|j| {
        let w = if j == 0 || j == n { 2.0 } else { 1.0 };
        if j % 2 == 0 {
            w
        } else {
            -w
        }
    }));
    let mut d = Array2::from_shape_fn((n + 1, n + 1), |(i, j)| {
        let dx = x[i] - x[j] + if i == j { 1.0 } else { 0.0 };
        (c[i] / c[j]) / dx
    });
    let sums = d.sum_axis(ndarray::Axis(1));
    for i in 0..=n {
        d[[i, i]] -= sums[i];
    }
    d
}

/// `(2/L)^2 D^2` with the boundary rows and columns removed; size `(N-1) x (N-1)`.
pub fn chebyshev_laplacian(n: usize, l: f64) -> DenseMatrix {
    assert!(n >= 4, "chebyshev_laplacian needs N >= 4");
    let d = chebyshev_differentiation(n, l);
    let a = d.dot(&d) * (2.0 / l).powi(2);
    DenseMatrix::new(a.slice(s![1..n, 1..n]).to_owned())
        .expect("finite square matrix")
        .with_label(format!("chebyshev_{n}"))
}
