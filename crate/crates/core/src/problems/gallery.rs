//! Small dense test matrices covering normal, nonnormal, nilpotent and stiff cases.

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linop::DenseMatrix;
use crate::problems::chebyshev_laplacian;

fn uniform(n: usize, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array2::from_shape_fn((n, n), |_| rng.random_range(-1.0..1.0))
}

fn with_norm(a: Array2<f64>, target: f64) -> Array2<f64> {
    let nrm = DenseMatrix::new(a.clone()).expect("finite").norm1();
    a * (target / nrm)
}

fn jordan(n: usize, lambda: f64, off: f64) -> Array2<f64> {
    let mut a = Array2::eye(n) * lambda;
    for i in 0..n - 1 {
        a[[i, i + 1]] = off;
    }
    a
}

fn grcar(n: usize, k: usize) -> Array2<f64> {
    Array2::from_shape_fn((n, n), |(i, j)| {
        if j + 1 == i {
            -1.0
        } else if j >= i && j <= i + k {
            1.0
        } else {
            0.0
        }
    })
}

/// Named matrices, all with `n <= 40`.
pub fn gallery() -> Vec<DenseMatrix> {
    let mut out: Vec<(&str, Array2<f64>)> = Vec::new();
    out.push(("identity", Array2::<f64>::eye(10)));
    out.push(("zero", Array2::zeros((8, 8))));
    out.push(("nilpotent_jordan", jordan(6, 0.0, 1.0)));
    out.push(("nilpotent_upper", {
        let mut a = uniform(12, 11);
        for i in 0..12 {
            for j in 0..=i {
                a[[i, j]] = 0.0;
            }
        }
        a
    }));
    out.push(("random_tiny", with_norm(uniform(15, 1), 0.01)));
    out.push(("random_unit", with_norm(uniform(20, 2), 1.0)));
    out.push(("random_5", with_norm(uniform(30, 3), 5.0)));
    out.push(("random_20", with_norm(uniform(40, 4), 20.0)));
    out.push(("random_shifted", with_norm(uniform(20, 5), 3.0) - Array2::<f64>::eye(20) * 20.0));
    out.push(("symmetric_negdef", {
        let b = uniform(25, 6);
        with_norm(-(b.t().dot(&b) + Array2::<f64>::eye(25)), 30.0)
    }));
    out.push(("skew", {
        let b = uniform(20, 7);
        with_norm(&b - &b.t(), 10.0)
    }));
    out.push(("jordan_nonnormal", jordan(15, -1.0, 2.0)));
    out.push(("upper_triangular", {
        let mut a = uniform(20, 8) * 3.0;
        for i in 0..20 {
            for j in 0..i {
                a[[i, j]] = 0.0;
            }
            a[[i, i]] = -(i as f64) / 4.0 - 0.5;
        }
        a
    }));
    out.push(("laplacian_1d", {
        let n = 30;
        let h2 = ((n + 1) * (n + 1)) as f64;
        Array2::from_shape_fn((n, n), |(i, j)| match i.abs_diff(j) {
            0 => -2.0 * h2,
            1 => h2,
            _ => 0.0,
        }) / 100.0
    }));
    out.push(("chebyshev_8", chebyshev_laplacian(8, 2.0).into_entries()));
    out.push(("circulant_shift", Array2::from_shape_fn((12, 12), |(i, j)| if (i + 1) % 12 == j { 1.0 } else { 0.0 })));
    out.push(("rank_one", {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u: Array1<f64> = (0..16).map(|_| rng.random_range(-1.0..1.0)).collect();
        let v: Array1<f64> = (0..16).map(|_| rng.random_range(-1.0..1.0)).collect();
        let uc = u.insert_axis(ndarray::Axis(1));
        let vr = v.insert_axis(ndarray::Axis(0));
        uc.dot(&vr)
    }));
    out.push(("diagonal_spread", Array2::from_diag(&Array1::from_iter((0..20).map(|i| -(10f64).powf(-3.0 + 6.0 * i as f64 / 19.0))))));
    out.push(("grcar", grcar(20, 3)));
    out.push(("scaled_identity", Array2::<f64>::eye(10) * -5.0));
    out.into_iter()
        .map(|(name, a)| DenseMatrix::new(a).expect("finite square").with_label(name))
        .collect()
}
