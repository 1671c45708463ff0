//! Fixed inputs shared by the criterion benches.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use phimv_core::params::DEFAULT_TOL;
use phimv_core::problems::{chebyshev_laplacian, lowrank_operator, CoreName, LowRankCore, LowRankOperator};
use phimv_core::{select_parameters, DenseMatrix, ScalingShift};

pub fn random_block(n: usize, cols: usize, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array2::from_shape_fn((n, cols), |_| rng.random_range(-1.0..1.0))
}

pub struct Fixture<A> {
    pub op: A,
    pub params: ScalingShift,
    pub v: Array2<f64>,
}

pub fn chebyshev(n: usize, p: usize) -> Fixture<DenseMatrix> {
    let op = chebyshev_laplacian(n, 2.0);
    let params = select_parameters(&op, 61, DEFAULT_TOL, 0.8).expect("chebyshev parameters");
    let v = random_block(n - 1, p + 1, 1);
    Fixture { op, params, v }
}

pub fn lowrank(name: CoreName, n: usize) -> Fixture<LowRankOperator> {
    let (_, p) = name.defaults();
    let (op, _, _) = lowrank_operator(&LowRankCore::with_dim(name, n, p));
    let params = select_parameters(&op, 61, DEFAULT_TOL, 0.8).expect("low-rank parameters");
    let v = random_block(n, p + 1, 2);
    Fixture { op, params, v }
}

pub fn dense(n: usize, norm: f64, p: usize) -> Fixture<DenseMatrix> {
    let a = random_block(n, n, 3);
    let scale = norm / DenseMatrix::new(a.clone()).expect("finite").norm1();
    let op = DenseMatrix::new(a * scale).expect("finite");
    let params = select_parameters(&op, 61, DEFAULT_TOL, 0.8).expect("dense parameters");
    let v = random_block(n, p + 1, 4);
    Fixture { op, params, v }
}
