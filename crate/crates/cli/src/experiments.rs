use std::time::Instant;

use anyhow::{Context, Result};
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use phimv_core::integrator::integrate_observed;
use phimv_core::oracle::{lowrank_reference, reference_w, rel_err_1};
use phimv_core::problems::gallery::gallery;
use phimv_core::problems::{
    adr_build, chebyshev_laplacian, lowrank_operator, CoreName, LowRankCore, ADR_ALPHA, ADR_EPSILON, ADR_GAMMA,
    ADR_T_END,
};
use phimv_core::{phimv, select_parameters, DenseMatrix, LinearOperator, PhiRequest};

use crate::config::{BenchConfig, Experiment};
use crate::report::ResultRow;

/// Smallest observed order accepted between successive ADR step sizes.
pub const ADR_MIN_ORDER: f64 = 3.5;

const CHEBYSHEV_N: usize = 100;
const CHEBYSHEV_L: f64 = 2.0;
const CHEBYSHEV_P: usize = 6;
const ADR_POINTS: usize = 50;
const ADR_RUNS: usize = 4;
const GALLERY_P: usize = 5;

/// Entries uniform in `[-1, 1)`.
pub fn random_block(n: usize, cols: usize, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array2::from_shape_fn((n, cols), |_| rng.random_range(-1.0..1.0))
}

pub fn chebyshev_bound(t: f64) -> Option<f64> {
    const TABLE: [(f64, f64); 6] = [(0.0, 1e-15), (1e-4, 1e-12), (1e-3, 1e-11), (1e-2, 1e-10), (1e-1, 1e-9), (1.0, 1e-7)];
    TABLE.iter().find(|(tt, _)| *tt == t).map(|&(_, b)| b)
}

/// `10^3 u (1 + |A| e^|A|)` in the 1-norm.
pub fn gallery_bound(a: &DenseMatrix) -> f64 {
    let nrm = a.norm1();
    1e3 * f64::EPSILON / 2.0 * (1.0 + nrm * nrm.exp())
}

/// `(t, bound)` cells of the low-rank tables.
pub fn lowrank_cells(name: CoreName, full: bool) -> Vec<(f64, Option<f64>)> {
    let (bounded, rest): (Vec<(f64, f64)>, Vec<f64>) = match name {
        CoreName::M1 => (vec![(0.1, 1e-12), (1.0, 1e-12)], vec![10.0, 50.0, 100.0]),
        CoreName::M2 => (vec![(0.1, 1e-7), (1.0, 1e-7), (10.0, 1e-7)], vec![50.0, 100.0]),
        CoreName::M3 => (vec![(1e-5, 1e-8), (1e-1, 1e-3)], vec![1e-3, 1.0, 10.0]),
    };
    let mut cells: Vec<_> = bounded.into_iter().map(|(t, b)| (t, Some(b))).collect();
    if full {
        cells.extend(rest.into_iter().map(|t| (t, None)));
        cells.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    cells
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64())
}

pub fn run_chebyshev(cfg: &BenchConfig) -> Result<Vec<ResultRow>> {
    let n = cfg.size.unwrap_or(CHEBYSHEV_N);
    let p = cfg.p.unwrap_or(CHEBYSHEV_P);
    let tol = cfg.tol();
    let a = chebyshev_laplacian(n, CHEBYSHEV_L);
    let params = select_parameters(&a, cfg.m, tol, cfg.delta)?;
    let v = random_block(a.dim(), p + 1, cfg.seed);
    let mut ts = vec![0.0, 1e-4, 1e-3, 1e-2, 1e-1];
    if cfg.full {
        ts.push(1.0);
    }
    let mut rows = Vec::with_capacity(ts.len());
    for t in ts {
        let (res, secs) = timed(|| phimv(&a, &PhiRequest::new(t, t, v.clone(), tol, params)));
        let res = res.with_context(|| format!("chebyshev t = {t}"))?;
        let want = reference_w(&a, v.view(), t, t)?;
        let err = rel_err_1(res.w.view(), want.view());
        rows.push(
            ResultRow::new("chebyshev", format!("N={n}"), t, err, chebyshev_bound(t))
                .with_record(&res.stats)
                .with_seconds(secs),
        );
    }
    Ok(rows)
}

pub fn run_lowrank(cfg: &BenchConfig) -> Result<Vec<ResultRow>> {
    let tol = cfg.tol();
    let mut rows = Vec::new();
    for name in CoreName::ALL {
        let (n0, p0) = name.defaults();
        let core = LowRankCore::with_dim(name, cfg.size.unwrap_or(n0), cfg.p.unwrap_or(p0));
        let (op, u, _) = lowrank_operator(&core);
        let params = select_parameters(&op, cfg.m, tol, cfg.delta)?;
        let v = random_block(core.n, core.p + 1, cfg.seed);
        for (t, bound) in lowrank_cells(name, cfg.full) {
            let (res, secs) = timed(|| phimv(&op, &PhiRequest::new(t, 1.0, v.clone(), tol, params)));
            let res = res.with_context(|| format!("{} t = {t}", name.as_str()))?;
            let want = lowrank_reference(u.view(), core.core.view(), v.view(), t)?;
            let err = rel_err_1(res.w.view(), want.view());
            rows.push(
                ResultRow::new("lowrank", format!("{} n={}", name.as_str(), core.n), t, err, bound)
                    .with_record(&res.stats)
                    .with_seconds(secs),
            );
        }
    }
    Ok(rows)
}

/// Coarsest ADR step, `2^-8 (t_end - t_0) / 2`.
pub fn adr_reference_step() -> f64 {
    2f64.powi(-8) * ADR_T_END / 2.0
}

fn inf_norm(x: &Array1<f64>) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Runs the four halvings of the coarsest step against a run at a sixteenth of
/// it. Errors are relative in the max norm, taken over every shared time.
pub fn run_adr(cfg: &BenchConfig) -> Result<Vec<ResultRow>> {
    let points = cfg.size.unwrap_or(ADR_POINTS);
    let tol = cfg.tol();
    let prob = adr_build(points, points, ADR_EPSILON, ADR_ALPHA, ADR_GAMMA);
    let params = select_parameters(&prob.operator, cfg.m, tol, cfg.delta)?;
    let h0 = adr_reference_step();
    let fine = 1usize << ADR_RUNS;
    let mut snapshots = Vec::new();
    integrate_observed(&prob, h0 / fine as f64, prob.t_end, tol, params, |_, u| snapshots.push(u.clone()))
        .context("adr reference run")?;

    let mut rows: Vec<ResultRow> = Vec::with_capacity(ADR_RUNS);
    for i in 0..ADR_RUNS {
        let h = h0 / (1usize << i) as f64;
        let stride = fine >> i;
        let mut err = 0.0f64;
        let mut step = 0;
        let (traj, secs) = timed(|| {
            integrate_observed(&prob, h, prob.t_end, tol, params, |_, u| {
                step += 1;
                let reference = &snapshots[step * stride - 1];
                err = err.max(inf_norm(&(u - reference)) / inf_norm(reference));
            })
        });
        let traj = traj.with_context(|| format!("adr h = {h}"))?;
        let mut row = ResultRow::new("adr", format!("{points}x{points}"), h, err, None).with_seconds(secs);
        row.s_effective = traj.steps.iter().flat_map(|s| &s.calls).map(|r| r.s_effective).max().unwrap_or(0);
        row.series_len_s = traj.steps.iter().flat_map(|s| &s.calls).map(|r| r.series_len_s).sum();
        row.recovery_terms =
            traj.steps.iter().flat_map(|s| &s.calls).map(|r| r.series_lens_f.iter().sum::<usize>()).sum();
        row.matvecs = traj.total_matvecs();
        if let Some(prev) = rows.last() {
            let order = (prev.error / err).log2();
            row.order = Some(order);
            row.passed = order >= ADR_MIN_ORDER;
        }
        rows.push(row);
    }
    Ok(rows)
}

fn gallery_row(index: usize, a: &DenseMatrix, cfg: &BenchConfig) -> Result<ResultRow> {
    let tol = cfg.tol();
    let label = a.label().unwrap_or("unnamed").to_owned();
    let params = select_parameters(a, cfg.m, tol, cfg.delta)?;
    let v = random_block(a.dim(), cfg.p.unwrap_or(GALLERY_P) + 1, cfg.seed.wrapping_add(index as u64));
    let (res, secs) = timed(|| phimv(a, &PhiRequest::new(1.0, 1.0, v.clone(), tol, params)));
    let res = res.with_context(|| format!("gallery {label}"))?;
    let want = reference_w(a, v.view(), 1.0, 1.0)?;
    let err = rel_err_1(res.w.view(), want.view());
    Ok(ResultRow::new("gallery", label, 1.0, err, Some(gallery_bound(a))).with_record(&res.stats).with_seconds(secs))
}

pub fn run_gallery(cfg: &BenchConfig) -> Result<Vec<ResultRow>> {
    let mats: Vec<_> = gallery().into_iter().enumerate().collect();
    if cfg.parallel {
        mats.par_iter().map(|(i, a)| gallery_row(*i, a, cfg)).collect()
    } else {
        mats.iter().map(|(i, a)| gallery_row(*i, a, cfg)).collect()
    }
}

pub fn run(cfg: &BenchConfig) -> Result<Vec<ResultRow>> {
    match cfg.experiment {
        Experiment::Chebyshev => run_chebyshev(cfg),
        Experiment::Lowrank => run_lowrank(cfg),
        Experiment::Adr => run_adr(cfg),
        Experiment::Gallery => run_gallery(cfg),
    }
}

/// One evaluation on a dense matrix with random `V`, checked against the dense oracle.
#[allow(clippy::too_many_arguments)]
pub fn eval_matrix(
    a: &DenseMatrix,
    t: f64,
    alpha: f64,
    p: usize,
    tol: f64,
    m: usize,
    delta: f64,
    seed: u64,
) -> Result<ResultRow> {
    let params = select_parameters(a, m, tol, delta)?;
    let v = random_block(a.dim(), p + 1, seed);
    let (res, secs) = timed(|| phimv(a, &PhiRequest::new(t, alpha, v.clone(), tol, params)));
    let res = res?;
    let want = reference_w(a, v.view(), t, alpha)?;
    let err = rel_err_1(res.w.view(), want.view());
    let label = a.label().unwrap_or("matrix").to_owned();
    Ok(ResultRow::new("eval", label, t, err, None).with_record(&res.stats).with_seconds(secs))
}
