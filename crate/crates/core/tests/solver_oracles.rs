mod common;

use common::*;
use rampcast::svr::{fit_eps_svr, fit_eps_tsvr, fit_lssvr, fit_tsvr, EpsTsvrParams, Kernel, TsvrParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Problem {
    x: Vec<Vec<f64>>,
    y: Vec<f64>,
    kernel: Kernel,
    c: f64,
    eps: f64,
}

fn problem(seed: u64) -> Problem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(3..=10);
    let p = rng.random_range(1..=3);
    let x: Vec<Vec<f64>> = (0..n).map(|_| (0..p).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
    let y = x
        .iter()
        .map(|r| r.iter().map(|v: &f64| v.sin()).sum::<f64>() + rng.random_range(-0.3..0.3))
        .collect();
    let kernel = if seed % 4 == 3 {
        Kernel::linear()
    } else {
        Kernel::rbf(rng.random_range(0.3..4.0)).unwrap()
    };
    Problem {
        x,
        y,
        kernel,
        c: rng.random_range(0.1..10.0),
        eps: rng.random_range(0.0..0.2),
    }
}

const TOL: f64 = 1e-5;

#[test]
fn eps_svr_matches_dual_oracle() {
    for seed in 0..40 {
        let pr = problem(seed);
        let m = fit_eps_svr(&pr.x, &pr.y, pr.kernel, pr.c, pr.eps).unwrap();
        let k = gram(&m);
        let (_, _, a, s) = single_coef(&m);
        let (a, s) = (a.unwrap(), s.unwrap());
        let ours = eps_svr_dual_objective(&k, &pr.y, pr.eps, a, s);
        let oracle = eps_svr_dual_oracle(&k, &pr.y, pr.c, pr.eps);
        assert!(relative_gap(ours, oracle) < TOL, "seed {seed}: {ours} vs {oracle}");
    }
}

#[test]
fn lssvr_matches_dual_oracle() {
    for seed in 0..40 {
        let pr = problem(seed);
        let gamma = pr.c * 10.0;
        let m = fit_lssvr(&pr.x, &pr.y, pr.kernel, gamma).unwrap();
        let k = gram(&m);
        let (coef, _, _, _) = single_coef(&m);
        let ours = lssvr_dual_objective(&k, &pr.y, gamma, coef);
        let oracle = lssvr_dual_oracle(&k, &pr.y, gamma);
        assert!(relative_gap(ours, oracle) < TOL, "seed {seed}: {ours} vs {oracle}");
    }
}

/// With `scaled`, gaps are measured against ½‖f‖² instead of the optimum,
/// which can sit near zero when the bounds interpolate.
fn check_tsvr(seed: u64, delta: Option<f64>, scaled: bool) {
    let pr = problem(seed);
    let mut params = TsvrParams::new(pr.c, pr.c * 0.7, pr.eps, pr.eps * 1.5);
    if let Some(d) = delta {
        params.delta = d;
    }
    let m = fit_tsvr(&pr.x, &pr.y, pr.kernel, params).unwrap();
    let k = gram(&m);
    let (w1, b1, w2, b2) = twin_coef(&m);
    let f1: Vec<f64> = pr.y.iter().map(|v| v - params.eps1).collect();
    let f2: Vec<f64> = pr.y.iter().map(|v| v + params.eps2).collect();
    let gap = |ours: f64, oracle: f64, f: &[f64]| {
        if scaled {
            (ours - oracle).abs() / (0.5 * f.iter().map(|v| v * v).sum::<f64>())
        } else {
            relative_gap(ours, oracle)
        }
    };
    let ours = twin_primal_objective(&k, &f1, &f1, params.delta, params.c1, Side::Below, w1, b1);
    let oracle = twin_primal_oracle(&k, &f1, &f1, params.delta, params.c1, Side::Below);
    assert!(gap(ours, oracle, &f1) < TOL, "seed {seed} f1: {ours} vs {oracle}");
    let ours = twin_primal_objective(&k, &f2, &f2, params.delta, params.c2, Side::Above, w2, b2);
    let oracle = twin_primal_oracle(&k, &f2, &f2, params.delta, params.c2, Side::Above);
    assert!(gap(ours, oracle, &f2) < TOL, "seed {seed} f2: {ours} vs {oracle}");
}

#[test]
fn tsvr_matches_primal_oracle() {
    for seed in 0..40 {
        check_tsvr(seed, Some(1e-2), false);
    }
}

#[test]
fn tsvr_default_regularization_matches_primal_oracle() {
    for seed in 0..40 {
        check_tsvr(seed, None, true);
    }
}

#[test]
fn eps_tsvr_matches_primal_oracle() {
    for seed in 0..40 {
        let pr = problem(seed);
        let c3 = pr.c * 0.05;
        let params = EpsTsvrParams::new(pr.c, pr.c * 1.3, c3, c3 * 2.0, pr.eps, pr.eps * 0.5);
        let m = fit_eps_tsvr(&pr.x, &pr.y, pr.kernel, params).unwrap();
        let k = gram(&m);
        let (w1, b1, w2, b2) = twin_coef(&m);
        let up: Vec<f64> = pr.y.iter().map(|v| v + params.eps1).collect();
        let down: Vec<f64> = pr.y.iter().map(|v| v - params.eps2).collect();
        let ours = twin_primal_objective(&k, &pr.y, &up, params.c3, params.c1, Side::Below, w1, b1);
        let oracle = twin_primal_oracle(&k, &pr.y, &up, params.c3, params.c1, Side::Below);
        assert!(relative_gap(ours, oracle) < TOL, "seed {seed} f1: {ours} vs {oracle}");
        let ours = twin_primal_objective(&k, &pr.y, &down, params.c4, params.c2, Side::Above, w2, b2);
        let oracle = twin_primal_oracle(&k, &pr.y, &down, params.c4, params.c2, Side::Above);
        assert!(relative_gap(ours, oracle) < TOL, "seed {seed} f2: {ours} vs {oracle}");
    }
}
