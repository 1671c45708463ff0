//! Fourth-order six-stage exponential Runge–Kutta stepping for `u' = A u + g(t, u)`.
//!
//! Every stage is a combination `Σ_j α^j φ_j(tA) v_j` with `v_0 = u_n`. Taking
//! `t = c_i h` and `α = c_i` makes the vectors `v_j` independent of the stage
//! inside each pair, so the six stages need four block evaluations:
//! `{U2}`, `{U3, U4}`, `{U5, U6}` and `{u_{n+1}}`.

use ndarray::{array, Array1, Array2, ArrayView1, Axis};

use crate::block::{phimv_block, BlockPhiRequest};
use crate::error::{PhimvError, Result};
use crate::linop::LinearOperator;
use crate::params::{select_parameters, ScalingShift, DEFAULT_DEGREE, DEFAULT_DELTA};
use crate::phimv::RunRecord;
use crate::problems::AdrProblem;

/// Stage abscissae.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpRK4s6Coefficients {
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
    pub c6: f64,
}

impl ExpRK4s6Coefficients {
    pub const VALUES: ExpRK4s6Coefficients =
        ExpRK4s6Coefficients { c2: 0.5, c3: 0.5, c4: 1.0 / 3.0, c5: 5.0 / 6.0, c6: 1.0 / 3.0 };
}

/// `u' = A u + g(t, u)`.
pub trait Semilinear {
    fn operator(&self) -> &dyn LinearOperator;
    fn nonlinear(&self, t: f64, u: ArrayView1<'_, f64>) -> Array1<f64>;
    fn initial(&self) -> (f64, Array1<f64>);
}

impl Semilinear for AdrProblem {
    fn operator(&self) -> &dyn LinearOperator {
        &self.operator
    }

    fn nonlinear(&self, _t: f64, u: ArrayView1<'_, f64>) -> Array1<f64> {
        self.reaction(u)
    }

    fn initial(&self) -> (f64, Array1<f64>) {
        (0.0, self.u0.clone())
    }
}

/// Linear system `u' = A u` with a given start vector.
pub struct LinearProblem<A> {
    pub op: A,
    pub u0: Array1<f64>,
}

impl<A: LinearOperator> Semilinear for LinearProblem<A> {
    fn operator(&self) -> &dyn LinearOperator {
        &self.op
    }

    fn nonlinear(&self, _t: f64, u: ArrayView1<'_, f64>) -> Array1<f64> {
        Array1::zeros(u.len())
    }

    fn initial(&self) -> (f64, Array1<f64>) {
        (0.0, self.u0.clone())
    }
}

#[derive(Debug, Clone)]
pub struct StepState {
    pub t_n: f64,
    pub u_n: Array1<f64>,
    pub h: f64,
    /// `D_{n2} … D_{n6}` from the last step.
    pub d_cache: Vec<Array1<f64>>,
}

impl StepState {
    pub fn new(t_n: f64, u_n: Array1<f64>, h: f64) -> Self {
        Self { t_n, u_n, h, d_cache: Vec::new() }
    }
}

#[derive(Debug, Clone)]
pub struct StepRecord {
    pub t: f64,
    /// Block evaluations, one record each.
    pub calls: Vec<RunRecord>,
}

fn columns(cols: &[&Array1<f64>]) -> Array2<f64> {
    let views: Vec<_> = cols.iter().map(|c| c.view().insert_axis(Axis(1))).collect();
    ndarray::concatenate(Axis(1), &views).expect("equal column lengths")
}

/// Advances `state` by one step, filling its increment cache. Returns `u_{n+1}`.
pub fn exprk4s6_step<P: Semilinear + ?Sized>(
    problem: &P,
    state: &mut StepState,
    tol: f64,
    params: &ScalingShift,
) -> Result<(Array1<f64>, StepRecord)> {
    let c = ExpRK4s6Coefficients::VALUES;
    let op = problem.operator();
    let (t, h) = (state.t_n, state.h);
    let u = &state.u_n;
    let g_n = problem.nonlinear(t, u.view());
    let hg = &g_n * h;
    let mut calls = Vec::with_capacity(4);
    let mut eval = |ts: Array1<f64>, alphas: Array1<f64>, v: Array2<f64>| -> Result<Array2<f64>> {
        let req = BlockPhiRequest::new(ts * h, alphas, v, tol, *params);
        let res = phimv_block(op, &req)?;
        calls.push(res.stats);
        Ok(res.w)
    };
    let incr = |ci: f64, stage: ArrayView1<'_, f64>| problem.nonlinear(t + ci * h, stage) - &g_n;

    let w = eval(array![c.c2], array![c.c2], columns(&[u, &hg]))?;
    let d2 = incr(c.c2, w.column(0));

    let v2 = &d2 * (h / c.c2);
    let w = eval(array![c.c3, c.c4], array![c.c3, c.c4], columns(&[u, &hg, &v2]))?;
    let d3 = incr(c.c3, w.column(0));
    let d4 = incr(c.c4, w.column(1));

    let den = c.c3 - c.c4;
    let v2 = (&d3 * (-c.c4 / c.c3) + &d4 * (c.c3 / c.c4)) * (h / den);
    let v3 = (&d3 / c.c3 - &d4 / c.c4) * (2.0 * h / den);
    let w = eval(array![c.c5, c.c6], array![c.c5, c.c6], columns(&[u, &hg, &v2, &v3]))?;
    let d5 = incr(c.c5, w.column(0));
    let d6 = incr(c.c6, w.column(1));

    let den = c.c5 - c.c6;
    let v2 = (&d5 * (-c.c6 / c.c5) + &d6 * (c.c5 / c.c6)) * (h / den);
    let v3 = (&d5 / c.c5 - &d6 / c.c6) * (2.0 * h / den);
    let w = eval(array![1.0], array![1.0], columns(&[u, &hg, &v2, &v3]))?;

    state.d_cache = vec![d2, d3, d4, d5, d6];
    Ok((w.column(0).to_owned(), StepRecord { t, calls }))
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub t: f64,
    pub u: Array1<f64>,
    pub steps: Vec<StepRecord>,
    pub params: ScalingShift,
}

impl Trajectory {
    pub fn total_calls(&self) -> usize {
        self.steps.iter().map(|s| s.calls.len()).sum()
    }

    pub fn total_matvecs(&self) -> usize {
        self.steps.iter().flat_map(|s| s.calls.iter()).map(|r| r.matvecs).sum()
    }
}

/// Cap on the number of fixed steps.
pub const MAX_STEPS: usize = 1_000_000;

/// Fixed-step integration from the problem's initial state to `t_end`, with
/// parameters selected once for the operator.
pub fn integrate<P: Semilinear + ?Sized>(problem: &P, h: f64, t_end: f64, tol: f64) -> Result<Trajectory> {
    let params = select_parameters(problem.operator(), DEFAULT_DEGREE, tol, DEFAULT_DELTA)?;
    integrate_with(problem, h, t_end, tol, params)
}

pub fn integrate_with<P: Semilinear + ?Sized>(
    problem: &P,
    h: f64,
    t_end: f64,
    tol: f64,
    params: ScalingShift,
) -> Result<Trajectory> {
    integrate_observed(problem, h, t_end, tol, params, |_, _| {})
}

/// As [`integrate_with`], calling `observe(t_n, u_n)` after every accepted step.
pub fn integrate_observed<P, F>(
    problem: &P,
    h: f64,
    t_end: f64,
    tol: f64,
    params: ScalingShift,
    mut observe: F,
) -> Result<Trajectory>
where
    P: Semilinear + ?Sized,
    F: FnMut(f64, &Array1<f64>),
{
    let (t0, u0) = problem.initial();
    if !(h > 0.0 && h.is_finite()) {
        return Err(PhimvError::InvalidArgument(format!("step size {h} must be positive")));
    }
    let span = t_end - t0;
    let steps = (span / h).round();
    if !(steps >= 0.0) || steps > MAX_STEPS as f64 {
        return Err(PhimvError::InvalidArgument(format!("{} steps of size {h} out of range", span / h)));
    }
    if (steps * h - span).abs() > 1e-9 * span.abs().max(h) {
        return Err(PhimvError::InvalidArgument(format!("step {h} does not divide [{t0}, {t_end}]")));
    }
    let steps = steps as usize;
    let mut state = StepState::new(t0, u0, h);
    let mut records = Vec::with_capacity(steps);
    for n in 0..steps {
        let (next, rec) = exprk4s6_step(problem, &mut state, tol, &params)
            .map_err(|e| PhimvError::Integration { t: state.t_n, source: Box::new(e) })?;
        if next.iter().any(|x| !x.is_finite()) {
            return Err(PhimvError::Integration {
                t: state.t_n,
                source: Box::new(PhimvError::Divergence { stage: "time step", term: n }),
            });
        }
        state.u_n = next;
        state.t_n = t0 + (n + 1) as f64 * h;
        observe(state.t_n, &state.u_n);
        records.push(rec);
    }
    Ok(Trajectory { t: state.t_n, u: state.u_n, steps: records, params })
}
