//! Dense reference evaluations for small problems.
//!
//! Everything here goes through [`expm`], a plain scaling-and-squaring Taylor
//! exponential, so it shares no code path with the matrix-free evaluator.

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{PhimvError, Result};
use crate::linop::{all_finite, DenseMatrix};

const TAYLOR_DEGREE: usize = 30;

fn norm1(a: ArrayView2<'_, f64>) -> f64 {
    a.axis_iter(Axis(1)).map(|c| c.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Diagonal similarity `B = D^{-1} A D` by powers of two that evens out row and
/// column norms. Returns `(B, diag(D))`.
pub fn balance(a: ArrayView2<'_, f64>) -> (Array2<f64>, Array1<f64>) {
    let n = a.nrows();
    let mut b = a.to_owned();
    let mut d = Array1::<f64>::ones(n);
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += b[[j, i]].abs();
                    r += b[[i, j]].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let total = c + r;
            let mut f = 1.0;
            let mut g = r / 2.0;
            while c < g {
                f *= 2.0;
                c *= 4.0;
                g /= 4.0;
            }
            g = r * 2.0;
            while c >= g {
                f /= 2.0;
                c /= 4.0;
                g *= 4.0;
            }
            if (c + r) / f < 0.95 * total {
                done = false;
                d[i] *= f;
                b.row_mut(i).mapv_inplace(|x| x / f);
                b.column_mut(i).mapv_inplace(|x| x * f);
            }
        }
    }
    (b, d)
}

/// `e^A` by balancing, then scaling and squaring with a degree-30 Taylor
/// polynomial and compensated summation of the terms.
pub fn expm(a: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(PhimvError::NotSquare { rows: n, cols: a.ncols() });
    }
    if !all_finite(a) {
        return Err(PhimvError::OracleOverflow);
    }
    let (b, d) = balance(a);
    let mut e = expm_taylor(b.view())?;
    for ((i, j), x) in e.indexed_iter_mut() {
        *x = *x * d[i] / d[j];
    }
    if !all_finite(e.view()) {
        return Err(PhimvError::OracleOverflow);
    }
    Ok(e)
}

fn expm_taylor(a: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    let n = a.nrows();
    let norm = norm1(a);
    let mut squarings = 0u32;
    if norm > 0.25 {
        squarings = (norm / 0.25).log2().ceil() as u32;
    }
    let scaled = a.to_owned() / 2f64.powi(squarings as i32);

    let mut sum = Array2::<f64>::eye(n);
    let mut comp = Array2::<f64>::zeros((n, n));
    let mut term = Array2::<f64>::eye(n);
    for k in 1..=TAYLOR_DEGREE {
        term = term.dot(&scaled) / k as f64;
        // Kahan step: y = term - comp; t = sum + y; comp = (t - sum) - y; sum = t
        let y = &term - &comp;
        let t = &sum + &y;
        comp = &(&t - &sum) - &y;
        sum = t;
    }
    for _ in 0..squarings {
        sum = sum.dot(&sum);
        if !all_finite(sum.view()) {
            return Err(PhimvError::OracleOverflow);
        }
    }
    Ok(sum)
}

/// The block matrix `[[tA, V̂], [0, J_p(0)]]` with `V̂ = [α^p v_p, …, α v_1]`.
pub fn augmented_matrix(a: ArrayView2<'_, f64>, v: ArrayView2<'_, f64>, t: f64, alpha: f64) -> Array2<f64> {
    let n = a.nrows();
    let p = v.ncols() - 1;
    let mut aug = Array2::zeros((n + p, n + p));
    aug.slice_mut(s![..n, ..n]).assign(&(&a * t));
    for c in 0..p {
        let j = p - c;
        aug.slice_mut(s![..n, n + c]).assign(&(&v.column(j) * alpha.powi(j as i32)));
    }
    for i in 0..p.saturating_sub(1) {
        aug[[n + i, n + i + 1]] = 1.0;
    }
    aug
}

/// `Σ_j α^j φ_j(tA) v_j` from the exponential of the augmented matrix applied to `[v_0; e_p]`.
pub fn reference_w(a: &DenseMatrix, v: ArrayView2<'_, f64>, t: f64, alpha: f64) -> Result<Array1<f64>> {
    let a = a.entries();
    let n = a.nrows();
    if v.nrows() != n {
        return Err(PhimvError::DimensionMismatch { expected: n, got: v.nrows() });
    }
    if v.ncols() == 0 {
        return Err(PhimvError::InvalidArgument("V must have at least one column".into()));
    }
    let p = v.ncols() - 1;
    let e = expm(augmented_matrix(a.view(), v, t, alpha).view())?;
    let mut w = e.slice(s![..n, ..n]).dot(&v.column(0));
    if p > 0 {
        w += &e.slice(s![..n, n + p - 1]);
    }
    if !w.iter().all(|x| x.is_finite()) {
        return Err(PhimvError::OracleOverflow);
    }
    Ok(w)
}

/// `[φ_0(tM), φ_1(tM), …, φ_jmax(tM)]` read off the top block row of one exponential
/// of `[[tM, I, 0, …], [0, 0, I, …], …]`.
pub fn dense_phi(m: ArrayView2<'_, f64>, t: f64, jmax: usize) -> Result<Vec<Array2<f64>>> {
    let d = m.nrows();
    if m.ncols() != d {
        return Err(PhimvError::NotSquare { rows: d, cols: m.ncols() });
    }
    let big = d * (jmax + 1);
    let mut b = Array2::zeros((big, big));
    b.slice_mut(s![..d, ..d]).assign(&(&m * t));
    for k in 0..jmax {
        for i in 0..d {
            b[[k * d + i, (k + 1) * d + i]] = 1.0;
        }
    }
    let e = expm(b.view())?;
    Ok((0..=jmax).map(|k| e.slice(s![..d, k * d..(k + 1) * d]).to_owned()).collect())
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let z = s - a;
    (s, (a - (s - z)) + (b - z))
}

/// Compensated dot product (twice the working precision, rounded once).
fn dot2(xs: impl Iterator<Item = (f64, f64)>) -> f64 {
    let (mut s, mut c) = (0.0, 0.0);
    for (x, y) in xs {
        let p = x * y;
        let e = x.mul_add(y, -p);
        let (s2, e2) = two_sum(s, p);
        s = s2;
        c += e + e2;
    }
    s + c
}

/// `max_j ‖tM φ_{j+1} - φ_j + I/j!‖_1 / ‖φ_j‖_1` over the supplied list, with each
/// residual entry evaluated by a compensated dot product.
pub fn phi_recurrence_residual(m: ArrayView2<'_, f64>, t: f64, phis: &[Array2<f64>]) -> f64 {
    let d = m.nrows();
    let mut fact = 1.0;
    let mut worst = 0.0f64;
    for j in 0..phis.len().saturating_sub(1) {
        if j > 0 {
            fact *= j as f64;
        }
        let r = Array2::from_shape_fn((d, d), |(i, k)| {
            let diag = if i == k { 1.0 / fact } else { 0.0 };
            let terms = (0..d).map(|l| (t * m[[i, l]], phis[j + 1][[l, k]]));
            dot2(terms.chain([(-1.0, phis[j][[i, k]]), (diag, 1.0)]))
        });
        worst = worst.max(norm1(r.view()) / norm1(phis[j].view()));
    }
    worst
}

/// Largest entry of `|UᵀU - I|`.
pub fn orthonormality_defect(u: ArrayView2<'_, f64>) -> f64 {
    let g = u.t().dot(&u) - Array2::<f64>::eye(u.ncols());
    g.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// `Σ_j φ_j(tA) v_j` for `A = U M Uᵀ` with orthonormal `U`, through the `r x r` core only.
pub fn lowrank_reference(
    u: ArrayView2<'_, f64>,
    m: ArrayView2<'_, f64>,
    v: ArrayView2<'_, f64>,
    t: f64,
) -> Result<Array1<f64>> {
    let defect = orthonormality_defect(u);
    if defect > 1e-12 {
        return Err(PhimvError::NotOrthonormal(defect));
    }
    if v.nrows() != u.nrows() {
        return Err(PhimvError::DimensionMismatch { expected: u.nrows(), got: v.nrows() });
    }
    let p = v.ncols() - 1;
    let w = u.dot(&m.t());
    let phis = dense_phi(m, t, p + 1)?;
    let mut out = Array1::zeros(v.nrows());
    let mut small = Array1::zeros(m.nrows());
    let mut fact = 1.0;
    for j in 0..=p {
        if j > 0 {
            fact *= j as f64;
        }
        out += &(&v.column(j) / fact);
        small += &phis[j + 1].dot(&w.t().dot(&v.column(j)));
    }
    out += &(u.dot(&small) * t);
    Ok(out)
}

/// `‖a - b‖_1 / ‖b‖_1`.
pub fn rel_err_1(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    let den: f64 = b.iter().map(|x| x.abs()).sum();
    let num: f64 = a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).sum();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

/// `‖a - b‖_∞ / ‖b‖_∞`.
pub fn rel_err_inf(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    let den = b.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let num = a.iter().zip(b.iter()).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(n: usize, m: usize, seed: u64) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_fn((n, m), |_| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn expm_scalar_and_diagonal() {
        let e = expm(array![[1.0]].view()).unwrap();
        assert!((e[[0, 0]] - std::f64::consts::E).abs() < 2e-16 * std::f64::consts::E);
        let e = expm(array![[-3.0, 0.0], [0.0, 7.5]].view()).unwrap();
        assert!((e[[0, 0]] - (-3.0f64).exp()).abs() < 1e-15 * (-3.0f64).exp());
        assert!((e[[1, 1]] - 7.5f64.exp()).abs() < 1e-14 * 7.5f64.exp());
        assert_eq!(e[[0, 1]], 0.0);
    }

    #[test]
    fn expm_rotation() {
        let th = 2.3;
        let e = expm(array![[0.0, th], [-th, 0.0]].view()).unwrap();
        let want = array![[th.cos(), th.sin()], [-th.sin(), th.cos()]];
        for (g, w) in e.iter().zip(want.iter()) {
            assert!((g - w).abs() < 1e-15);
        }
    }

    #[test]
    fn balancing_is_exact_similarity() {
        let m = array![[0.0, 1e-8, 0.0], [-2e10, -3.0, 2e10], [66.0, 0.0, -66.0]];
        let (b, d) = balance(m.view());
        for ((i, j), x) in m.indexed_iter() {
            assert_eq!(b[[i, j]], x * d[j] / d[i]);
        }
        assert!(d.iter().all(|x| x.log2().fract() == 0.0));
        assert!(norm1(b.view()) < 1e-3 * norm1(m.view()));
    }

    #[test]
    fn expm_overflow_is_error() {
        assert!(matches!(expm(array![[1000.0]].view()), Err(PhimvError::OracleOverflow)));
    }

    #[test]
    fn zero_operator_weights() {
        let a = DenseMatrix::new(Array2::zeros((3, 3))).unwrap();
        let v = random(3, 3, 1);
        let w = reference_w(&a, v.view(), 1.0, 1.0).unwrap();
        let want = &v.column(0) + &v.column(1) + &(&v.column(2) / 2.0);
        for (g, e) in w.iter().zip(want.iter()) {
            assert!((g - e).abs() < 1e-15);
        }
    }

    #[test]
    fn nilpotent_phi1() {
        let a = DenseMatrix::new(array![[0.0, 1.0], [0.0, 0.0]]).unwrap();
        let v = array![[0.0, 1.0], [0.0, 0.0]];
        let w = reference_w(&a, v.view(), 1.0, 1.0).unwrap();
        assert_eq!(w, array![1.0, 0.0]);
    }

    #[test]
    fn symmetric_exponential_matches_eigendecomposition() {
        let b = random(7, 7, 3);
        let a = (&b + &b.t()) * 1.5;
        let v0 = random(7, 1, 4);
        let w = reference_w(&DenseMatrix::new(a.clone()).unwrap(), v0.view(), 0.8, 1.0).unwrap();

        let m = nalgebra::DMatrix::from_fn(7, 7, |i, j| a[[i, j]]);
        let eig = m.symmetric_eigen();
        let x = nalgebra::DVector::from_fn(7, |i, _| v0[[i, 0]]);
        let d = nalgebra::DMatrix::from_diagonal(&eig.eigenvalues.map(|l| (0.8 * l).exp()));
        let want = &eig.eigenvectors * d * eig.eigenvectors.transpose() * x;
        let scale = want.amax();
        for i in 0..7 {
            assert!((w[i] - want[i]).abs() < 1e-13 * scale, "{} vs {}", w[i], want[i]);
        }
    }

    #[test]
    fn alpha_absorption_is_equivalent() {
        let a = DenseMatrix::new(random(6, 6, 5)).unwrap();
        let v = random(6, 4, 6);
        let alpha: f64 = 0.7;
        let mut absorbed = v.clone();
        for j in 0..4 {
            absorbed.column_mut(j).mapv_inplace(|x| x * alpha.powi(j as i32));
        }
        let w1 = reference_w(&a, v.view(), 1.2, alpha).unwrap();
        let w2 = reference_w(&a, absorbed.view(), 1.2, 1.0).unwrap();
        let scale = w1.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for (x, y) in w1.iter().zip(w2.iter()) {
            assert!((x - y).abs() <= 4.0 * f64::EPSILON * scale);
        }
    }

    #[test]
    fn augmented_layout() {
        let a = array![[1.0, 2.0], [3.0, 4.0]];
        let v = array![[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]];
        let aug = augmented_matrix(a.view(), v.view(), 2.0, 10.0);
        let want = array![
            [2.0, 4.0, 300.0, 20.0],
            [6.0, 8.0, 600.0, 50.0],
            [0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, 0.0, 0.0]
        ];
        assert_eq!(aug, want);
    }

    #[test]
    fn phi_of_zero_and_scalar() {
        let phis = dense_phi(Array2::zeros((3, 3)).view(), 1.0, 4).unwrap();
        let mut fact = 1.0;
        for (j, ph) in phis.iter().enumerate() {
            if j > 0 {
                fact *= j as f64;
            }
            assert_eq!(ph, &(Array2::<f64>::eye(3) / fact));
        }
        let phis = dense_phi(array![[1.0]].view(), 1.0, 2).unwrap();
        let e = std::f64::consts::E;
        assert!((phis[1][[0, 0]] - (e - 1.0)).abs() < 4e-16);
        assert!((phis[2][[0, 0]] - (e - 2.0)).abs() < 4e-16);
    }

    #[test]
    fn phi_recurrence_on_stiff_core() {
        let (a, b, c, d, e) = (2e10, 4e8 / 6.0, 200.0 / 3.0, 3.0, 1e-8);
        let m = array![[0.0, e, 0.0], [-(a + b), -d, a], [c, 0.0, -c]];
        let phis = dense_phi(m.view(), 1e-5, 4).unwrap();
        assert!(phi_recurrence_residual(m.view(), 1e-5, &phis) <= 1e-12);
    }

    #[test]
    fn phi_recurrence_random() {
        for seed in 0..5 {
            let m = random(5, 5, 100 + seed) * 3.0;
            let phis = dense_phi(m.view(), 0.9, 5).unwrap();
            assert!(phi_recurrence_residual(m.view(), 0.9, &phis) <= 1e-12);
        }
    }

    fn orthonormal(n: usize, r: usize) -> Array2<f64> {
        Array2::from_shape_fn((n, r), |(i, k)| {
            let a = if k == 0 { 1.0 / 2f64.sqrt() } else { 1.0 };
            (2.0 / n as f64).sqrt() * a * (std::f64::consts::PI * (i as f64 + 0.5) * k as f64 / n as f64).cos()
        })
    }

    #[test]
    fn lowrank_trivial_cases() {
        let u = orthonormal(20, 2);
        let v = random(20, 3, 7);
        let base = &v.column(0) + &v.column(1) + &(&v.column(2) / 2.0);
        let w = lowrank_reference(u.view(), Array2::zeros((2, 2)).view(), v.view(), 1.0).unwrap();
        assert_eq!(w, base);
        let m = array![[0.0, 10.0], [-10.0, 0.0]];
        let w = lowrank_reference(u.view(), m.view(), v.view(), 0.0).unwrap();
        assert_eq!(w, base);
    }

    #[test]
    fn lowrank_matches_materialized() {
        let u = orthonormal(50, 2);
        let m = array![[0.0, 10.0], [-10.0, 0.0]];
        let a = DenseMatrix::new(u.dot(&m).dot(&u.t())).unwrap();
        let v = random(50, 4, 8);
        for &t in &[0.1, 1.0] {
            let got = lowrank_reference(u.view(), m.view(), v.view(), t).unwrap();
            let want = reference_w(&a, v.view(), t, 1.0).unwrap();
            assert!(rel_err_1(got.view(), want.view()) < 1e-12);
        }
    }

    #[test]
    fn lowrank_rejects_non_orthonormal() {
        let u = orthonormal(10, 2) * 1.01;
        let v = random(10, 1, 9);
        assert!(matches!(
            lowrank_reference(u.view(), Array2::eye(2).view(), v.view(), 1.0),
            Err(PhimvError::NotOrthonormal(_))
        ));
    }
}
