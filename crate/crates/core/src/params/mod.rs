//! A-priori selection of the scaling parameter `s` and the spectral shift `xi`.
//!
//! A guarded power basis `v, Av, A^2 v, ...` is built from products only, a
//! preliminary scale `s0` is taken from the geometric mean of the last few
//! growth factors, and the shift minimizes
//!
//! ```text
//! f(xi) = || sum_k C(m,k) z^(m-k) V_k ||^(1/m),   z = -xi / s0,
//! ```
//!
//! which equals `||(A - xi I)^m v||^(1/m) / s0`. The scaling then follows from
//! `s^-m * nu(xi) / m! = tol`.

pub mod brent;

use ndarray::{Array1, Array2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{PhimvError, Result};
use crate::linop::{norm2, LinearOperator};

pub const DEFAULT_DEGREE: usize = 61;
pub const DEFAULT_DELTA: f64 = 0.8;
/// Unit roundoff of IEEE double, `2^-53`.
pub const DEFAULT_TOL: f64 = f64::EPSILON / 2.0;
/// Lower clamp for `s` at selection time, `2^-20`.
pub const SCALING_FLOOR: f64 = 9.5367431640625e-7;

const FALLBACK_SEED: u64 = 0x5eed_0f_5ca1e;
const BRENT_MAX_ITER: usize = 200;

/// `log C(m, j)` via log-gamma.
pub fn log_binomial(m: usize, j: usize) -> f64 {
    libm::lgamma(m as f64 + 1.0) - libm::lgamma(j as f64 + 1.0) - libm::lgamma((m - j) as f64 + 1.0)
}

/// Over/underflow thresholds used while building the power basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Guards {
    pub g_max: f64,
    pub g_min: f64,
    pub ell_max: f64,
}

impl Guards {
    pub fn new(m: usize, delta: f64) -> Self {
        let ell_max = (0..=m).map(|j| log_binomial(m, j)).fold(f64::NEG_INFINITY, f64::max);
        Self {
            g_max: delta * f64::MAX.ln(),
            g_min: delta * f64::MIN_POSITIVE.ln(),
            ell_max,
        }
    }

    /// Whether the `k`-th power with log-norm `log_norm` may be kept.
    pub fn accepts(&self, k: usize, log_norm: f64) -> bool {
        // NaN compares false on both sides, so it is rejected as well.
        log_norm + 0.5 * ((k + 1) as f64).ln() + self.ell_max <= self.g_max && log_norm >= self.g_min
    }
}

/// Normalized power basis `V_k = A^k v / s0^k`, `k = 0..=m`.
#[derive(Debug, Clone)]
pub struct PowerBasis {
    columns: Array2<f64>,
    logs: Vec<f64>,
    r: usize,
    s0: f64,
    start: Array1<f64>,
    guards: Guards,
}

impl PowerBasis {
    /// `n x (m+1)` block `[V_0 .. V_m]`.
    pub fn columns(&self) -> &Array2<f64> {
        &self.columns
    }

    /// Log-norms `L_1..L_r` of the accepted unnormalized powers.
    pub fn logs(&self) -> &[f64] {
        &self.logs
    }

    pub fn accepted(&self) -> usize {
        self.r
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn degree(&self) -> usize {
        self.columns.ncols() - 1
    }

    pub fn dim(&self) -> usize {
        self.columns.nrows()
    }

    /// The unit starting vector `v`.
    pub fn start(&self) -> &Array1<f64> {
        &self.start
    }

    pub fn guards(&self) -> &Guards {
        &self.guards
    }
}

pub fn build_power_basis<A: LinearOperator + ?Sized>(op: &A, m: usize, delta: f64) -> Result<PowerBasis> {
    if m == 0 {
        return Err(PhimvError::InvalidArgument("degree m must be at least 1".into()));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(PhimvError::InvalidArgument(format!("guard fraction {delta} not in (0, 1]")));
    }
    let n = op.dim();
    if n == 0 {
        return Err(PhimvError::InvalidArgument("operator has dimension 0".into()));
    }
    let guards = Guards::new(m, delta);

    let mut start = Array1::from_elem(n, 1.0 / (n as f64).sqrt());
    let mut first = op.apply_vec(start.view());
    if first.iter().all(|&x| x == 0.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(FALLBACK_SEED);
        let mut v: Array1<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let nv = norm2(v.view());
        v /= nv;
        start = v;
        first = op.apply_vec(start.view());
    }
    if first.iter().any(|x| !x.is_finite()) {
        return Err(PhimvError::IllPosedOperator);
    }
    let first_norm = norm2(first.view());

    let mut columns = Array2::<f64>::zeros((n, m + 1));
    columns.column_mut(0).assign(&start);
    let mut logs = Vec::new();
    let mut w = first;
    for k in 1..=m {
        if k > 1 {
            w = op.apply_vec(columns.column(k - 1));
        }
        let nrm = norm2(w.view());
        let l = if nrm == 0.0 { f64::NEG_INFINITY } else if nrm.is_finite() { nrm.ln() } else { f64::INFINITY };
        if !guards.accepts(k, l) {
            break;
        }
        columns.column_mut(k).assign(&w);
        logs.push(l);
    }
    let r = logs.len();

    let s0 = if r >= 3 {
        let jr = 2.max(r.saturating_sub(5));
        // logs[k-1] holds L_k; the mean of L_{j+1}-L_j telescopes.
        ((logs[r - 1] - logs[jr - 1]) / (r - jr) as f64).exp()
    } else {
        first_norm.max(1.0)
    };
    let s0 = if s0.is_finite() && s0 > 0.0 { s0 } else { 1.0 };

    let log_s0 = s0.ln();
    for j in 1..=r {
        let scale = (-(j as f64) * log_s0).exp();
        columns.column_mut(j).mapv_inplace(|x| x * scale);
    }
    for k in r + 1..=m {
        let next = op.apply_vec(columns.column(k - 1)) / s0;
        columns.column_mut(k).assign(&next);
    }

    Ok(PowerBasis { columns, logs, r, s0, start, guards })
}

/// `f(xi) = ||(A - xi I)^m v||^(1/m) / s0`, evaluated from the normalized basis.
pub fn objective(basis: &PowerBasis, xi: f64) -> f64 {
    if !xi.is_finite() {
        return f64::INFINITY;
    }
    let m = basis.degree();
    let z = -xi / basis.s0;
    // Factor zeta^m out of the sum so that large |z| cannot overflow.
    let zeta = z.abs().max(1.0);
    let zr = z / zeta;
    let mut coeffs = Array1::<f64>::zeros(m + 1);
    let mut binom = 1.0f64;
    for k in 0..=m {
        if k > 0 {
            binom = binom * (m - k + 1) as f64 / k as f64;
        }
        coeffs[k] = binom * zr.powi((m - k) as i32) * zeta.powi(-(k as i32));
    }
    let y = basis.columns.dot(&coeffs);
    let nrm = norm2(y.view());
    zeta * nrm.powf(1.0 / m as f64)
}

/// Brent search on `[-sqrt(n) s0, sqrt(n) s0]`, guarded by the endpoints and `xi = 0`.
pub fn minimize_shift(basis: &PowerBasis, n: usize) -> (f64, f64) {
    let half = (n as f64).sqrt() * basis.s0;
    let xtol = 1e-8 * (1.0 + basis.s0);
    let out = brent::minimize(|xi| objective(basis, xi), -half, half, xtol, BRENT_MAX_ITER);
    let mut best = (out.x, out.fx);
    for xi in [0.0, -half, half] {
        let f = objective(basis, xi);
        if f < best.1 || (xi == 0.0 && f <= best.1) || best.1.is_nan() {
            best = (xi, f);
        }
    }
    best
}

/// Scaling/shift pair with the quantities it was derived from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingShift {
    pub s: f64,
    pub xi: f64,
    pub s0: f64,
    pub f_min: f64,
    pub m: usize,
    pub r: usize,
}

impl ScalingShift {
    /// Hand-set parameters, bypassing selection.
    pub fn manual(s: f64, xi: f64) -> Self {
        Self { s, xi, s0: 1.0, f_min: f64::NAN, m: DEFAULT_DEGREE, r: 0 }
    }

    /// Same shift, scaling multiplied by `factor`.
    pub fn scaled(self, factor: f64) -> Self {
        Self { s: self.s * factor, ..self }
    }
}

/// `s = s0 f / (tol m!)^(1/m)`, evaluated in log space and clamped below.
pub fn scaling_from_objective(s0: f64, f: f64, m: usize, tol: f64) -> f64 {
    if !(f > 0.0) {
        return SCALING_FLOOR;
    }
    let log_s = s0.ln() + f.ln() - (tol.ln() + libm::lgamma(m as f64 + 1.0)) / m as f64;
    log_s.exp().max(SCALING_FLOOR)
}

/// Parameters for an explicitly chosen shift `xi` on an existing basis.
pub fn scaling_for_shift(basis: &PowerBasis, xi: f64, tol: f64) -> ScalingShift {
    let f = objective(basis, xi);
    let m = basis.degree();
    ScalingShift { s: scaling_from_objective(basis.s0, f, m, tol), xi, s0: basis.s0, f_min: f, m, r: basis.r }
}

pub fn select_parameters<A: LinearOperator + ?Sized>(
    op: &A,
    m: usize,
    tol: f64,
    delta: f64,
) -> Result<ScalingShift> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(PhimvError::InvalidArgument(format!("tolerance {tol} must be positive")));
    }
    let basis = build_power_basis(op, m, delta)?;
    Ok(select_with_basis(&basis, op.dim(), tol))
}

pub fn select_with_basis(basis: &PowerBasis, n: usize, tol: f64) -> ScalingShift {
    let (xi, f_min) = minimize_shift(basis, n);
    let m = basis.degree();
    ScalingShift { s: scaling_from_objective(basis.s0, f_min, m, tol), xi, s0: basis.s0, f_min, m, r: basis.r }
}

/// `||(A - xi I)^m v||_2` by `m` explicit shifted products.
pub fn shifted_power_norm<A: LinearOperator + ?Sized>(op: &A, xi: f64, m: usize, v: &Array1<f64>) -> f64 {
    let mut x = v.clone().insert_axis(Axis(1));
    for _ in 0..m {
        let mut y = op.apply(x.view());
        y.scaled_add(-xi, &x);
        x = y;
    }
    norm2(x.column(0))
}
