use std::f64::consts::PI;

use ndarray::{array, Array2, ArrayView2};

use crate::linop::LinearOperator;

/// First `r` columns of the orthonormal DCT-II matrix of order `n`.
pub fn dct_basis(n: usize, r: usize) -> Array2<f64> {
    assert!(r >= 1 && r <= n, "dct_basis needs 1 <= r <= n");
    let scale = (2.0 / n as f64).sqrt();
    Array2::from_shape_fn((n, r), |(i, k)| {
        let a = if k == 0 { std::f64::consts::FRAC_1_SQRT_2 } else { 1.0 };
        scale * a * (PI * (i as f64 + 0.5) * k as f64 / n as f64).cos()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CoreName {
    M1,
    M2,
    M3,
}

impl CoreName {
    pub const ALL: [CoreName; 3] = [CoreName::M1, CoreName::M2, CoreName::M3];

    pub fn as_str(&self) -> &'static str {
        match self {
            CoreName::M1 => "M1",
            CoreName::M2 => "M2",
            CoreName::M3 => "M3",
        }
    }

    pub fn matrix(&self) -> Array2<f64> {
        match self {
            CoreName::M1 => array![[0.0, 10.0], [-10.0, 0.0]],
            CoreName::M2 => array![[-1.0, 1e5], [0.0, -10.0]],
            CoreName::M3 => {
                let (a, b, c, d, e) = (2e10, 4e8 / 6.0, 200.0 / 3.0, 3.0, 1e-8);
                array![[0.0, e, 0.0], [-(a + b), -d, a], [c, 0.0, -c]]
            }
        }
    }

    /// Desk-scale dimension and combination order.
    pub fn defaults(&self) -> (usize, usize) {
        match self {
            CoreName::M1 => (20_000, 3),
            CoreName::M2 => (40_000, 4),
            CoreName::M3 => (50_000, 2),
        }
    }
}

impl std::str::FromStr for CoreName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "M1" => Ok(CoreName::M1),
            "M2" => Ok(CoreName::M2),
            "M3" => Ok(CoreName::M3),
            other => Err(format!("unknown core `{other}`")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LowRankCore {
    pub name: CoreName,
    pub core: Array2<f64>,
    pub n: usize,
    pub p: usize,
}

impl LowRankCore {
    pub fn new(name: CoreName) -> Self {
        let (n, p) = name.defaults();
        Self::with_dim(name, n, p)
    }

    pub fn with_dim(name: CoreName, n: usize, p: usize) -> Self {
        Self { name, core: name.matrix(), n, p }
    }
}

/// `x ↦ U (Wᵀ x)` with `W = U Mᵀ`.
#[derive(Debug, Clone)]
pub struct LowRankOperator {
    u: Array2<f64>,
    w: Array2<f64>,
    label: String,
}

impl LowRankOperator {
    pub fn u(&self) -> &Array2<f64> {
        &self.u
    }

    pub fn w(&self) -> &Array2<f64> {
        &self.w
    }
}

impl LinearOperator for LowRankOperator {
    fn dim(&self) -> usize {
        self.u.nrows()
    }

    fn apply(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        self.u.dot(&self.w.t().dot(&x))
    }

    fn label(&self) -> Option<&str> {
        Some(&self.label)
    }
}

/// Builds the operator and returns it with `U` and `W`.
pub fn lowrank_operator(core: &LowRankCore) -> (LowRankOperator, Array2<f64>, Array2<f64>) {
    let r = core.core.nrows();
    let u = dct_basis(core.n, r);
    let w = u.dot(&core.core.t());
    let op = LowRankOperator { u: u.clone(), w: w.clone(), label: format!("lowrank_{}", core.name.as_str()) };
    (op, u, w)
}
