use ndarray::Array1;

use phimv_core::integrator::{exprk4s6_step, integrate, integrate_observed, StepState};
use phimv_core::linop::materialize;
use phimv_core::oracle::{expm, rel_err_inf};
use phimv_core::params::DEFAULT_TOL;
use phimv_core::problems::{adr_build, ADR_ALPHA, ADR_EPSILON, ADR_GAMMA};
use phimv_core::select_parameters;

fn inf_norm(x: &Array1<f64>) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

#[test]
fn linear_step_is_the_exponential() {
    let prob = adr_build(12, 12, ADR_EPSILON, ADR_ALPHA, 0.0);
    let tol = 1e-10;
    let params = select_parameters(&prob.operator, 61, tol, 0.8).unwrap();
    let h = 0.05;
    let mut state = StepState::new(0.0, prob.u0.clone(), h);
    let (u1, rec) = exprk4s6_step(&prob, &mut state, tol, &params).unwrap();
    assert_eq!(rec.calls.len(), 4);
    assert!(state.d_cache.iter().all(|d| d.iter().all(|&x| x == 0.0)));
    let dense = materialize(&prob.operator);
    let want = expm((dense.entries() * h).view()).unwrap().dot(&prob.u0);
    assert!(rel_err_inf(u1.view(), want.view()) <= 10.0 * tol);
}

#[test]
fn heat_problem_matches_dense_exponential() {
    let prob = adr_build(12, 12, 0.05, 0.0, 0.0);
    let t_end = 0.1;
    let traj = integrate(&prob, 0.0125, t_end, DEFAULT_TOL).unwrap();
    let dense = materialize(&prob.operator);
    let want = expm((dense.entries() * t_end).view()).unwrap().dot(&prob.u0);
    assert!(rel_err_inf(traj.u.view(), want.view()) <= 1e-9);
    assert_eq!(traj.steps.len(), 8);
    assert!(traj.steps.iter().all(|s| s.calls.len() == 4));
}

#[test]
fn nonlinear_refinement_decreases_error() {
    let prob = adr_build(16, 16, ADR_EPSILON, ADR_ALPHA, ADR_GAMMA);
    let tol = 1e-7;
    let params = select_parameters(&prob.operator, 61, tol, 0.8).unwrap();
    let h0 = 2f64.powi(-10);
    let t_end = 0.0625;
    let mut fine = Vec::new();
    integrate_observed(&prob, h0 / 16.0, t_end, tol, params, |_, u| fine.push(u.clone())).unwrap();
    let mut errors = Vec::new();
    for i in 0..3 {
        let stride = 16 >> i;
        let mut err = 0.0f64;
        let mut step = 0;
        let traj = integrate_observed(&prob, h0 / (1 << i) as f64, t_end, tol, params, |_, u| {
            step += 1;
            let r = &fine[step * stride - 1];
            err = err.max(inf_norm(&(u - r)) / inf_norm(r));
        })
        .unwrap();
        assert_eq!(traj.total_calls(), 4 * traj.steps.len());
        errors.push(err);
    }
    assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
    let ratio = errors[1] / errors[2];
    assert!((11.0..=21.0).contains(&ratio), "{errors:?}");
}
