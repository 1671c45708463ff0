//! Several abscissae at once: `w_i = Σ_j α_i^j φ_j(t_i A) v_j`, `i = 1..r`.
//!
//! The single-abscissa recurrences are run on `(p+1) r` columns with the small
//! matrices replaced by their Kronecker forms `J ⊗ Δ` and `I ⊗ T`. All sweeps
//! share one scaling count taken from `max |t_i|`.

use ndarray::{s, Array1, Array2, ArrayView2, Axis};

use crate::error::{PhimvError, Result};
use crate::linop::{all_finite, check_rows, norm_inf, LinearOperator};
use crate::nilpotent::NilpotentCoeffMatrix;
use crate::params::ScalingShift;
use crate::phimv::{
    block_series, check_request, effective_scaling, permute_columns, shift_factor, Recovery, RunRecord, Tracking,
};

#[derive(Debug, Clone)]
pub struct BlockPhiRequest {
    pub t: Array1<f64>,
    pub alpha: Array1<f64>,
    /// `[v_0, v_1, …, v_p]`.
    pub v: Array2<f64>,
    pub tol: f64,
    pub params: ScalingShift,
}

impl BlockPhiRequest {
    pub fn new(t: Array1<f64>, alpha: Array1<f64>, v: Array2<f64>, tol: f64, params: ScalingShift) -> Self {
        Self { t, alpha, v, tol, params }
    }

    pub fn order(&self) -> usize {
        self.v.ncols().saturating_sub(1)
    }

    pub fn abscissae(&self) -> usize {
        self.t.len()
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.t.is_empty() {
            return Err(PhimvError::InvalidArgument("at least one abscissa is required".into()));
        }
        if self.alpha.len() != self.t.len() {
            return Err(PhimvError::DimensionMismatch { expected: self.t.len(), got: self.alpha.len() });
        }
        if !self.t.iter().chain(self.alpha.iter()).all(|x| x.is_finite()) {
            return Err(PhimvError::InvalidArgument("abscissae and weights must be finite".into()));
        }
        check_request(n, &self.v, self.tol, &self.params)
    }
}

#[derive(Debug, Clone)]
pub struct BlockPhiResult {
    /// Column `i` is `w_i`.
    pub w: Array2<f64>,
    pub stats: RunRecord,
}

/// Evaluates all `r` combinations with shared recovery sweeps.
pub fn phimv_block<A: LinearOperator + ?Sized>(op: &A, req: &BlockPhiRequest) -> Result<BlockPhiResult> {
    req.validate(op.dim())?;
    let n = op.dim();
    let r = req.abscissae();
    let p = req.order();
    let q = (p + 1) * r;
    let xi = req.params.xi;

    let t_max = req.t.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let s_eff = effective_scaling(t_max, req.params.s)?;
    let s = s_eff as f64;
    let mu = req.t.iter().map(|&tk| shift_factor(xi * tk / s)).collect::<Result<Array1<f64>>>()?;

    let vp = permute_columns(req.v.view());
    let mut expanded = Array2::zeros((n, q));
    for i in 0..=p {
        for k in 0..r {
            expanded.column_mut(i * r + k).assign(&(&vp.column(i) * (mu[k] / s)));
        }
    }

    let jm = NilpotentCoeffMatrix::new(p);
    let jexp = jm.kron_exp(&req.alpha, s);
    let y = jm.kron_shifted(&req.alpha, &req.t, xi)? / s;
    let t_scaled = &req.t / s;
    let col_scale = Array1::from_iter((0..q).map(|c| t_scaled[c % r]));

    let mut stats = RunRecord { s_effective: s_eff, ..Default::default() };
    let s_block = block_series(op, xi, &col_scale, expanded, &y, req.tol, &mut stats)?;

    let mut tracked: Vec<usize> = (0..r).collect();
    if p > 0 {
        tracked.extend(p * r..q);
    }
    let mut f = s_block.select(Axis(1), &tracked);
    let first = op.apply(f.slice(s![.., ..r]));
    stats.matvecs += 1;
    let mut head = f.slice_mut(s![.., ..r]);
    head.assign(&(first * &req.t));
    head += &req.v.column(0).insert_axis(Axis(1));

    let width = tracked.len();
    let rec = Recovery {
        s_eff,
        xi,
        tol: req.tol,
        col_scale: Array1::from_iter((0..width).map(|c| t_scaled[c % r])),
        mu: Array1::from_iter((0..width).map(|c| mu[c % r])),
        jexp: &jexp,
        tracked,
        mode: Tracking::Ends { r },
    };
    let f = rec.run(op, s_block, f, &mut stats)?;

    let mut w = f.slice(s![.., ..r]).to_owned();
    if p > 0 {
        w += &(&f.slice(s![.., r..2 * r]) * &req.alpha);
    }
    Ok(BlockPhiResult { w, stats })
}

/// Taylor coefficients of `φ_i`: `1/(i+j)!`.
pub fn phi_coefficient(i: usize, j: usize) -> f64 {
    (1..=i + j).fold(1.0, |acc, k| acc / k as f64)
}

/// Copy of `v` with every column except `v_k` set to zero.
pub fn isolate_column(v: ArrayView2<'_, f64>, k: usize) -> Array2<f64> {
    let mut out = Array2::zeros(v.dim());
    out.column_mut(k).assign(&v.column(k));
    out
}

/// Term cap for [`block_series_direct`].
pub const DIRECT_CAP: usize = 400;

/// Direct power series `G = Σ_j A^j V D_j Γ T^j` with `D_j = diag(a(0,j), …, a(p,j))`
/// and `Γ = [α_k^i]`, i.e. column `k` is `Σ_i α_k^i Σ_j a(i,j) (t_k A)^j v_i`.
///
/// Only practical when every `‖t_k A‖` is moderate.
pub fn block_series_direct<A, C>(op: &A, req: &BlockPhiRequest, coeffs: C) -> Result<Array2<f64>>
where
    A: LinearOperator + ?Sized,
    C: Fn(usize, usize) -> f64,
{
    req.validate(op.dim())?;
    check_rows(op, req.v.nrows())?;
    let n = op.dim();
    let r = req.abscissae();
    let p = req.order();

    // Column i*r + k of `b` holds (t_k A)^j v_i.
    let mut b = Array2::zeros((n, (p + 1) * r));
    for i in 0..=p {
        for k in 0..r {
            b.column_mut(i * r + k).assign(&req.v.column(i));
        }
    }
    let t_rep = Array1::from_iter((0..(p + 1) * r).map(|c| req.t[c % r]));
    let gamma = Array2::from_shape_fn((p + 1, r), |(i, k)| req.alpha[k].powi(i as i32));

    let mut g = Array2::<f64>::zeros((n, r));
    let mut c1 = f64::INFINITY;
    let mut j = 0usize;
    loop {
        let mut term = Array2::<f64>::zeros((n, r));
        for i in 0..=p {
            let a = coeffs(i, j);
            if a == 0.0 {
                continue;
            }
            for k in 0..r {
                let wgt = a * gamma[[i, k]];
                if wgt != 0.0 {
                    term.column_mut(k).scaled_add(wgt, &b.column(i * r + k));
                }
            }
        }
        g += &term;
        if !all_finite(g.view()) {
            return Err(PhimvError::Divergence { stage: "direct series", term: j });
        }
        let c2 = norm_inf(term.view());
        if c1 + c2 <= req.tol * norm_inf(g.view()) {
            return Ok(g);
        }
        c1 = c2;
        j += 1;
        if j > DIRECT_CAP {
            return Err(PhimvError::NonConvergence { stage: "direct series", cap: DIRECT_CAP });
        }
        b = op.apply(b.view()) * &t_rep;
    }
}
