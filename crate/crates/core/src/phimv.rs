//! Scaling-and-recovering evaluation of `w = Σ_{j=0}^p α^j φ_j(tA) v_j`.
//!
//! The combination is the `(1,2)` block of `exp([[tA, V],[0, αJ]])` with the
//! columns of `V` reordered as `[v_0, v_p, …, v_1]`. The block is computed at
//! `tA/s` by a Taylor recurrence on the shifted operator `A - ξI`, and the
//! effect of the scaling is then undone by `s - 1` recovery sweeps, each an
//! adaptive Taylor approximation of `exp(t(A - ξI)/s)` applied to only the two
//! columns that matter (the first and the last).
//!
//! The shared engine below works on `q = (p+1) r` columns with per-column time
//! scalings, so the block evaluator in [`crate::block`] is the same code with
//! `r > 1`.

use ndarray::{s, Array1, Array2, ArrayView2, Axis};

use crate::error::{PhimvError, Result};
use crate::linop::{all_finite, check_rows, norm_inf, shifted_apply, LinearOperator};
use crate::nilpotent::NilpotentCoeffMatrix;
use crate::params::ScalingShift;

/// Term cap for the block series `S`.
pub const SERIES_CAP: usize = 500;
/// Term cap per recovery sweep.
pub const RECOVERY_CAP: usize = 300;

/// Per-evaluation telemetry.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunRecord {
    /// `max(1, ceil(|t| s))`.
    pub s_effective: u64,
    /// Number of terms summed for `S`.
    pub series_len_s: usize,
    /// Terms used in each recovery sweep.
    pub series_lens_f: Vec<usize>,
    /// Operator block applications.
    pub matvecs: usize,
    /// Seed of the generator that produced `V`, when it was random.
    pub seed: Option<u64>,
}

impl RunRecord {
    /// Applications implied by the recorded series lengths: one per `S` term after
    /// the first, one to recover the exponential column, one per sweep term.
    pub fn expected_matvecs(&self) -> usize {
        self.series_len_s.saturating_sub(1) + 1 + self.series_lens_f.iter().sum::<usize>()
    }
}

/// One `(t, α)` evaluation request. `v` holds `[v_0, v_1, …, v_p]` in natural order.
#[derive(Debug, Clone)]
pub struct PhiRequest {
    pub t: f64,
    pub alpha: f64,
    pub v: Array2<f64>,
    pub tol: f64,
    pub params: ScalingShift,
}

impl PhiRequest {
    pub fn new(t: f64, alpha: f64, v: Array2<f64>, tol: f64, params: ScalingShift) -> Self {
        Self { t, alpha, v, tol, params }
    }

    /// `e^{tA} v_0`.
    pub fn exp_action(t: f64, v0: Array1<f64>, tol: f64, params: ScalingShift) -> Self {
        Self::new(t, 1.0, v0.insert_axis(Axis(1)), tol, params)
    }

    /// `Σ_{j=1}^p α^j φ_j(tA) v_j` from `[v_1, …, v_p]` (no `φ_0` term).
    pub fn without_v0(t: f64, alpha: f64, rest: ArrayView2<'_, f64>, tol: f64, params: ScalingShift) -> Self {
        let n = rest.nrows();
        let mut v = Array2::zeros((n, rest.ncols() + 1));
        v.slice_mut(s![.., 1..]).assign(&rest);
        Self::new(t, alpha, v, tol, params)
    }

    pub fn order(&self) -> usize {
        self.v.ncols().saturating_sub(1)
    }

    fn validate(&self, n: usize) -> Result<()> {
        check_request(n, &self.v, self.tol, &self.params)?;
        if !self.t.is_finite() || !self.alpha.is_finite() {
            return Err(PhimvError::InvalidArgument("t and alpha must be finite".into()));
        }
        Ok(())
    }
}

pub(crate) fn check_request(n: usize, v: &Array2<f64>, tol: f64, params: &ScalingShift) -> Result<()> {
    if v.nrows() != n {
        return Err(PhimvError::DimensionMismatch { expected: n, got: v.nrows() });
    }
    if v.ncols() == 0 {
        return Err(PhimvError::InvalidArgument("V must have at least one column".into()));
    }
    if let Some(((row, col), _)) = v.indexed_iter().find(|(_, x)| !x.is_finite()) {
        return Err(PhimvError::NonFinite { row, col });
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(PhimvError::InvalidArgument(format!("tolerance {tol} must be positive")));
    }
    if !(params.s > 0.0 && params.s.is_finite()) || !params.xi.is_finite() {
        return Err(PhimvError::InvalidArgument("scaling must be positive and shift finite".into()));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct PhiResult {
    pub w: Array1<f64>,
    /// `e^{tA} v_0`.
    pub exp_v0: Array1<f64>,
    /// `Σ_{j=1}^p α^{j-1} φ_j(tA) v_j`.
    pub tail: Array1<f64>,
    pub stats: RunRecord,
}

/// `max(1, ceil(|t| s))`.
pub fn effective_scaling(t_abs: f64, s: f64) -> Result<u64> {
    let raw = (t_abs * s).ceil();
    if !raw.is_finite() || raw >= u64::MAX as f64 {
        return Err(PhimvError::InvalidArgument(format!("scaling count |t| s = {} is not representable", t_abs * s)));
    }
    Ok((raw as u64).max(1))
}

/// `exp(x)`, rejecting results that over- or underflow.
pub(crate) fn shift_factor(exponent: f64) -> Result<f64> {
    let mu = exponent.exp();
    if !mu.is_finite() || mu == 0.0 {
        return Err(PhimvError::ShiftOverflow { exponent });
    }
    Ok(mu)
}

/// `[v_0, v_p, v_{p-1}, …, v_1]`.
pub(crate) fn permute_columns(v: ArrayView2<'_, f64>) -> Array2<f64> {
    let p = v.ncols() - 1;
    let mut out = Array2::zeros(v.dim());
    out.column_mut(0).assign(&v.column(0));
    for i in 1..=p {
        out.column_mut(i).assign(&v.column(p + 1 - i));
    }
    out
}

/// Taylor recurrence for `S = Σ_k D_k / k!` with `D_k = X D_{k-1} + D_1 Y^{k-1}`,
/// where `X` acts as `(A - ξI)` followed by the column scaling `col_scale`.
///
/// Terms are carried already divided by `k!`, which is the same recurrence
/// without the factorial ever overflowing.
pub(crate) fn block_series<A: LinearOperator + ?Sized>(
    op: &A,
    xi: f64,
    col_scale: &Array1<f64>,
    d1: Array2<f64>,
    y: &Array2<f64>,
    tol: f64,
    stats: &mut RunRecord,
) -> Result<Array2<f64>> {
    let mut s_sum = d1.clone();
    let mut d = d1.clone();
    let mut w = d1;
    let mut k = 1usize;
    let mut c1 = f64::INFINITY;
    let mut c2 = norm_inf(d.view());
    while c1 + c2 > tol * norm_inf(s_sum.view()) {
        k += 1;
        if k > SERIES_CAP {
            return Err(PhimvError::NonConvergence { stage: "series S", cap: SERIES_CAP });
        }
        c1 = c2;
        // w = D_1 Y^{k-1} / (k-1)!
        w = w.dot(y) / (k - 1) as f64;
        let mut next = shifted_apply(op, xi, d.view())?;
        stats.matvecs += 1;
        next *= col_scale;
        next += &w;
        next /= k as f64;
        d = next;
        c2 = norm_inf(d.view());
        s_sum += &d;
        if !all_finite(s_sum.view()) {
            return Err(PhimvError::Divergence { stage: "series S", term: k });
        }
    }
    stats.series_len_s = k;
    Ok(s_sum)
}

/// How many leading columns of the tracked block hold the exponential part.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Tracking {
    /// First `r` columns are turned into `e^{tA/s} v_0` and advanced without
    /// the series contribution.
    Ends { r: usize },
    /// Plain recurrence on every column, no first-column recovery.
    All,
}

pub(crate) struct Recovery<'a> {
    pub s_eff: u64,
    pub xi: f64,
    pub tol: f64,
    /// Column scaling `t_k / s` for the tracked block.
    pub col_scale: Array1<f64>,
    /// Shift undo factors `e^{t_k ξ / s}` for the tracked block.
    pub mu: Array1<f64>,
    /// `exp(J ⊗ Δ / s)`.
    pub jexp: &'a Array2<f64>,
    pub tracked: Vec<usize>,
    pub mode: Tracking,
}

impl Recovery<'_> {
    /// Runs the `s - 1` sweeps `F ← μ exp(t(A-ξI)/s) F + S J̃^j` on the tracked
    /// columns of `S`. For `Tracking::Ends` the exponential columns must
    /// already hold `e^{tA/s} v_0`.
    pub fn run<A: LinearOperator + ?Sized>(
        &self,
        op: &A,
        mut s_block: Array2<f64>,
        mut f: Array2<f64>,
        stats: &mut RunRecord,
    ) -> Result<Array2<f64>> {
        let exp_cols = match self.mode {
            Tracking::Ends { r } => r,
            Tracking::All => 0,
        };
        for _ in 1..self.s_eff {
            let mut e = f.clone();
            let mut k = 0usize;
            let mut c1 = f64::INFINITY;
            let mut c2 = norm_inf(f.view());
            while c1 + c2 > self.tol * norm_inf(e.view()) {
                k += 1;
                if k > RECOVERY_CAP {
                    return Err(PhimvError::NonConvergence { stage: "recovery sweep", cap: RECOVERY_CAP });
                }
                c1 = c2;
                let mut next = shifted_apply(op, self.xi, f.view())?;
                stats.matvecs += 1;
                next *= &(&self.col_scale / k as f64);
                f = next;
                c2 = norm_inf(f.view());
                e += &f;
            }
            if !all_finite(e.view()) {
                return Err(PhimvError::Divergence { stage: "recovery sweep", term: k });
            }
            e *= &self.mu;
            s_block = s_block.dot(self.jexp);
            f = &e + &s_block.select(Axis(1), &self.tracked);
            if exp_cols > 0 {
                f.slice_mut(s![.., ..exp_cols]).assign(&e.slice(s![.., ..exp_cols]));
            }
            stats.series_lens_f.push(k);
        }
        Ok(f)
    }
}

/// Block series `S ≈ D_exp(t(A-ξI)/s, (αJ - tξI)/s, μV/s)`.
///
/// `v` must already be permuted to `[v_0, v_p, …, v_1]` and scaled by `μ/s`.
#[allow(clippy::too_many_arguments)]
pub fn series_s<A: LinearOperator + ?Sized>(
    op: &A,
    t: f64,
    s: u64,
    xi: f64,
    alpha: f64,
    v: Array2<f64>,
    tol: f64,
    stats: &mut RunRecord,
) -> Result<Array2<f64>> {
    check_rows(op, v.nrows())?;
    let q = v.ncols();
    let s = s as f64;
    let j = NilpotentCoeffMatrix::new(q - 1);
    let y = (j.to_dense() * alpha - Array2::<f64>::eye(q) * (t * xi)) / s;
    let col_scale = Array1::from_elem(q, t / s);
    block_series(op, xi, &col_scale, v, &y, tol, stats)
}

/// Recovers `(e^{tA} v_0, Σ_{j≥1} α^{j-1} φ_j(tA) v_j)` from `S`.
///
/// `jexp` is `exp(αJ/s)`.
#[allow(clippy::too_many_arguments)]
pub fn recover<A: LinearOperator + ?Sized>(
    op: &A,
    t: f64,
    s: u64,
    xi: f64,
    mu: f64,
    s_block: Array2<f64>,
    jexp: &Array2<f64>,
    v0: &Array1<f64>,
    tol: f64,
    stats: &mut RunRecord,
) -> Result<(Array1<f64>, Array1<f64>)> {
    let p = s_block.ncols() - 1;
    let tracked: Vec<usize> = if p > 0 { vec![0, p] } else { vec![0] };
    let mut f = s_block.select(Axis(1), &tracked);
    let first = op.apply(f.slice(s![.., 0..1]));
    stats.matvecs += 1;
    let mut col0 = f.column_mut(0);
    col0.assign(&(&first.column(0) * t + v0));

    let q = tracked.len();
    let rec = Recovery {
        s_eff: s,
        xi,
        tol,
        col_scale: Array1::from_elem(q, t / s as f64),
        mu: Array1::from_elem(q, mu),
        jexp,
        tracked,
        mode: Tracking::Ends { r: 1 },
    };
    let f = rec.run(op, s_block, f, stats)?;
    let exp_v0 = f.column(0).to_owned();
    let tail = if p > 0 { f.column(1).to_owned() } else { Array1::zeros(f.nrows()) };
    Ok((exp_v0, tail))
}

struct Prepared {
    s_eff: u64,
    mu: f64,
    v: Array2<f64>,
    jexp: Array2<f64>,
}

fn prepare<A: LinearOperator + ?Sized>(op: &A, req: &PhiRequest, s_eff: Option<u64>) -> Result<Prepared> {
    req.validate(op.dim())?;
    let s_eff = match s_eff {
        Some(s) => s.max(1),
        None => effective_scaling(req.t.abs(), req.params.s)?,
    };
    let mu = shift_factor(req.t * req.params.xi / s_eff as f64)?;
    let v = permute_columns(req.v.view()) * (mu / s_eff as f64);
    let jexp = NilpotentCoeffMatrix::new(req.order()).exp_scaled(req.alpha / s_eff as f64);
    Ok(Prepared { s_eff, mu, v, jexp })
}

/// Evaluates `w = Σ_{j=0}^p α^j φ_j(tA) v_j`.
///
/// The scaling count is `max(1, ceil(|t| s))`; `params` is meant to be selected
/// once per operator and reused across `t`.
pub fn phimv<A: LinearOperator + ?Sized>(op: &A, req: &PhiRequest) -> Result<PhiResult> {
    phimv_with_scaling(op, req, None)
}

/// As [`phimv`] but with an explicit scaling count instead of `ceil(|t| s)`.
pub fn phimv_with_scaling<A: LinearOperator + ?Sized>(
    op: &A,
    req: &PhiRequest,
    s_eff: Option<u64>,
) -> Result<PhiResult> {
    let prep = prepare(op, req, s_eff)?;
    let mut stats = RunRecord { s_effective: prep.s_eff, ..Default::default() };
    let s_block = series_s(op, req.t, prep.s_eff, req.params.xi, req.alpha, prep.v, req.tol, &mut stats)?;
    let v0 = req.v.column(0).to_owned();
    let (exp_v0, tail) = recover(
        op,
        req.t,
        prep.s_eff,
        req.params.xi,
        prep.mu,
        s_block,
        &prep.jexp,
        &v0,
        req.tol,
        &mut stats,
    )?;
    let w = &exp_v0 + &(&tail * req.alpha);
    Ok(PhiResult { w, exp_v0, tail, stats })
}

/// Runs the recovery recurrence on all `p+1` columns without the first-column
/// shortcut, returning `D_exp(tA, αJ, [v_0, v_p, …, v_1])`.
///
/// Its first column is `φ_1(tA) v_0` and its last is the tail of [`phimv`];
/// used to check the two-column tracking.
pub fn phimv_all_columns<A: LinearOperator + ?Sized>(op: &A, req: &PhiRequest) -> Result<(Array2<f64>, RunRecord)> {
    let prep = prepare(op, req, None)?;
    let mut stats = RunRecord { s_effective: prep.s_eff, ..Default::default() };
    let s_block = series_s(op, req.t, prep.s_eff, req.params.xi, req.alpha, prep.v, req.tol, &mut stats)?;
    let q = s_block.ncols();
    let rec = Recovery {
        s_eff: prep.s_eff,
        xi: req.params.xi,
        tol: req.tol,
        col_scale: Array1::from_elem(q, req.t / prep.s_eff as f64),
        mu: Array1::from_elem(q, prep.mu),
        jexp: &prep.jexp,
        tracked: (0..q).collect(),
        mode: Tracking::All,
    };
    let f = s_block.clone();
    let f = rec.run(op, s_block, f, &mut stats)?;
    Ok((f, stats))
}
