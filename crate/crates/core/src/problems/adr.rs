use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::linop::LinearOperator;

pub const ADR_EPSILON: f64 = 1e-3;
pub const ADR_ALPHA: f64 = -0.5;
pub const ADR_GAMMA: f64 = 1000.0;
pub const ADR_T_END: f64 = 0.5;

/// `εΔ - α(∂x + ∂y)` on the unit square by central differences.
///
/// Unknowns are the grid nodes with `x < 1` and `y < 1`, ordered with `x`
/// fastest. Edges `x = 0` and `y = 0` carry a zero normal derivative through
/// mirrored ghost values; edges `x = 1` and `y = 1` are held at zero.
#[derive(Debug, Clone)]
pub struct AdrOperator {
    mx: usize,
    my: usize,
    dx: f64,
    dy: f64,
    epsilon: f64,
    alpha: f64,
}

impl AdrOperator {
    pub fn shape(&self) -> (usize, usize) {
        (self.mx, self.my)
    }

    fn apply_col(&self, u: ArrayView1<'_, f64>, mut out: ndarray::ArrayViewMut1<'_, f64>) {
        let (mx, my) = (self.mx, self.my);
        let cxx = self.epsilon / (self.dx * self.dx);
        let cyy = self.epsilon / (self.dy * self.dy);
        let cx = -self.alpha / (2.0 * self.dx);
        let cy = -self.alpha / (2.0 * self.dy);
        for j in 0..my {
            for i in 0..mx {
                let k = j * mx + i;
                let c = u[k];
                let east = if i + 1 < mx { u[k + 1] } else { 0.0 };
                let west = if i > 0 { u[k - 1] } else { u[k + 1] };
                let north = if j + 1 < my { u[k + mx] } else { 0.0 };
                let south = if j > 0 { u[k - mx] } else { u[k + mx] };
                out[k] = cxx * (east - 2.0 * c + west)
                    + cyy * (north - 2.0 * c + south)
                    + cx * (east - west)
                    + cy * (north - south);
            }
        }
    }
}

impl LinearOperator for AdrOperator {
    fn dim(&self) -> usize {
        self.mx * self.my
    }

    fn apply(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        assert_eq!(x.nrows(), self.dim(), "operator/block dimension mismatch");
        let mut out = Array2::zeros(x.raw_dim());
        for (col, dst) in x.columns().into_iter().zip(out.columns_mut()) {
            self.apply_col(col, dst);
        }
        out
    }

    fn label(&self) -> Option<&str> {
        Some("adr")
    }
}

#[derive(Debug, Clone)]
pub struct AdrProblem {
    pub nx: usize,
    pub ny: usize,
    pub epsilon: f64,
    pub alpha_adv: f64,
    pub gamma: f64,
    pub operator: AdrOperator,
    pub u0: Array1<f64>,
    pub t_end: f64,
}

impl AdrProblem {
    /// Grid coordinates of the unknowns, `(x, y)` per entry.
    pub fn coordinates(&self) -> Vec<(f64, f64)> {
        let (mx, my) = self.operator.shape();
        let mut out = Vec::with_capacity(mx * my);
        for j in 0..my {
            for i in 0..mx {
                out.push((i as f64 * self.operator.dx, j as f64 * self.operator.dy));
            }
        }
        out
    }

    /// `γ u (u - 1/2)(1 - u)` pointwise.
    pub fn reaction(&self, u: ArrayView1<'_, f64>) -> Array1<f64> {
        let g = self.gamma;
        u.mapv(|v| g * v * (v - 0.5) * (1.0 - v))
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }
}

/// Builds the problem on an `nx x ny` grid that includes both boundaries.
pub fn adr_build(nx: usize, ny: usize, epsilon: f64, alpha_adv: f64, gamma: f64) -> AdrProblem {
    assert!(nx >= 8 && ny >= 8, "adr_build needs at least 8 points per direction");
    let operator = AdrOperator {
        mx: nx - 1,
        my: ny - 1,
        dx: 1.0 / (nx - 1) as f64,
        dy: 1.0 / (ny - 1) as f64,
        epsilon,
        alpha: alpha_adv,
    };
    let mut p = AdrProblem { nx, ny, epsilon, alpha_adv, gamma, operator, u0: Array1::zeros(0), t_end: ADR_T_END };
    p.u0 = Array1::from_iter(
        p.coordinates().into_iter().map(|(x, y)| 256.0 * (x * y * (1.0 - x) * (1.0 - y)).powi(2)),
    );
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linop::materialize;

    fn default(n: usize) -> AdrProblem {
        adr_build(n, n, ADR_EPSILON, ADR_ALPHA, ADR_GAMMA)
    }

    #[test]
    fn sizes() {
        let p = default(50);
        assert_eq!(p.operator.dim(), 49 * 49);
        assert_eq!(p.u0.len(), 49 * 49);
    }

    #[test]
    fn half_is_a_root_of_the_reaction() {
        let p = default(10);
        let u = Array1::from_elem(81, 0.5);
        assert!(p.reaction(u.view()).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn initial_condition_profile() {
        let p = default(12);
        for ((x, y), &u) in p.coordinates().iter().zip(p.u0.iter()) {
            assert_eq!(u, 256.0 * (x * y * (1.0 - x) * (1.0 - y)).powi(2));
            if *x == 0.0 || *y == 0.0 {
                assert_eq!(u, 0.0);
            }
        }
        let mid = p.coordinates().iter().position(|&(x, y)| (x - 0.5).abs() < 0.05 && (y - 0.5).abs() < 0.05);
        assert!(mid.is_some());
    }

    #[test]
    fn ones_stencil_at_nodes() {
        let p = default(12);
        let (mx, _) = p.operator.shape();
        let h = 1.0 / 11.0;
        let ones = Array1::<f64>::ones(mx * mx);
        let y = p.operator.apply_vec(ones.view());
        // interior node: all neighbours are unknowns
        assert!(y[3 * mx + 4].abs() < 1e-12);
        // node next to x = 1: east neighbour is the zero boundary
        let k = 3 * mx + (mx - 1);
        let want = ADR_EPSILON * (-1.0) / (h * h) - ADR_ALPHA * (-1.0) / (2.0 * h);
        assert!((y[k] - want).abs() < 1e-12 * want.abs());
        // corner (0,0): mirrored, so the constant is preserved
        assert!(y[0].abs() < 1e-12);
    }

    #[test]
    fn matches_hand_stencil_on_a_smooth_field() {
        let p = default(16);
        let coords = p.coordinates();
        let u = Array1::from_iter(coords.iter().map(|(x, y)| (x * 3.0).sin() + y * y));
        let a = materialize(&p.operator);
        let via_dense = a.entries().dot(&u);
        let via_apply = p.operator.apply_vec(u.view());
        for (x, y) in via_dense.iter().zip(via_apply.iter()) {
            assert!((x - y).abs() < 1e-12 * (1.0 + x.abs()));
        }
        let (mx, _) = p.operator.shape();
        let h = 1.0 / 15.0;
        let k = 5 * mx + 6;
        let lap = (u[k + 1] + u[k - 1] + u[k + mx] + u[k - mx] - 4.0 * u[k]) / (h * h);
        let adv = (u[k + 1] - u[k - 1] + u[k + mx] - u[k - mx]) / (2.0 * h);
        assert!((via_apply[k] - (ADR_EPSILON * lap - ADR_ALPHA * adv)).abs() < 1e-12);
    }

    #[test]
    fn deterministic() {
        let a = default(20);
        let b = default(20);
        assert_eq!(a.u0, b.u0);
        assert_eq!(materialize(&a.operator).entries(), materialize(&b.operator).entries());
    }
}
