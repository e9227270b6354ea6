use super::*;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn col(v: &[f64]) -> Vec<Vec<f64>> {
    v.iter().map(|x| vec![*x]).collect()
}

fn rmse(a: &[f64], b: &[f64]) -> f64 {
    (a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64).sqrt()
}

fn random_problem(seed: u64, n: usize, p: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..p).map(|_| rng.random_range(-2.0..2.0)).collect())
        .collect();
    let y = x
        .iter()
        .map(|r| r.iter().map(|v| v.sin()).sum::<f64>() + rng.random_range(-0.2..0.2))
        .collect();
    (x, y)
}

#[test]
fn eps_svr_flat_solution_inside_tube() {
    let x = col(&[0.0, 1.0, 2.0]);
    let y = [1.0, 1.05, 0.95];
    let m = fit_eps_svr(&x, &y, Kernel::rbf(1.0).unwrap(), 1.0, 0.1).unwrap();
    let SvrCoef::Single { coef, bias, alpha, alpha_star } = &m.coef else { panic!() };
    assert!(coef.iter().all(|c| *c == 0.0));
    assert!(alpha.as_ref().unwrap().iter().all(|a| *a == 0.0));
    assert!(alpha_star.as_ref().unwrap().iter().all(|a| *a == 0.0));
    assert!(y.iter().all(|v| (bias - v).abs() <= 0.1 + 1e-12));
}

#[test]
fn eps_svr_recovers_linear_target() {
    let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
    let y: Vec<f64> = xs.iter().map(|v| 2.0 * v + 1.0).collect();
    let x = col(&xs);
    let m = fit_eps_svr(&x, &y, Kernel::linear(), 1e3, 0.0).unwrap();
    let pred = m.predict(&x).unwrap();
    for (p, t) in pred.iter().zip(&y) {
        assert!((p - t).abs() < 1e-3, "{p} vs {t}");
    }
}

#[test]
fn eps_svr_rejects_zero_c() {
    let x = col(&[0.0, 1.0]);
    assert!(matches!(
        fit_eps_svr(&x, &[0.0, 1.0], Kernel::linear(), 0.0, 0.1),
        Err(Error::Domain(_))
    ));
}

#[test]
fn eps_svr_training_rmse_nonincreasing_in_c() {
    let (x, y) = random_problem(3, 30, 2);
    let k = Kernel::rbf(1.0).unwrap();
    let mut last = f64::INFINITY;
    for e in -4..=6 {
        let c = 2f64.powi(e);
        let m = fit_eps_svr(&x, &y, k, c, 0.01).unwrap();
        let r = rmse(&m.predict(&x).unwrap(), &y);
        assert!(r <= last + 1e-6, "C = {c}: {r} > {last}");
        last = r;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn eps_svr_duals_boxed_and_zero_inside_tube(seed in 0u64..1000, c in 0.1f64..20.0, eps in 0.0f64..0.3) {
        let (x, y) = random_problem(seed, 12, 2);
        let m = fit_eps_svr(&x, &y, Kernel::rbf(1.0).unwrap(), c, eps).unwrap();
        let pred = m.predict(&x).unwrap();
        let SvrCoef::Single { alpha, alpha_star, .. } = &m.coef else { panic!() };
        let (a, s) = (alpha.as_ref().unwrap(), alpha_star.as_ref().unwrap());
        let sum: f64 = a.iter().zip(s).map(|(p, q)| p - q).sum();
        prop_assert!(sum.abs() < 1e-9);
        for i in 0..y.len() {
            prop_assert!((0.0..=c).contains(&a[i]) && (0.0..=c).contains(&s[i]));
            if (y[i] - pred[i]).abs() < eps - 1e-4 {
                prop_assert!(a[i] == 0.0 && s[i] == 0.0, "row {} inside tube has duals {} {}", i, a[i], s[i]);
            }
        }
    }

    #[test]
    fn predictions_invariant_under_row_permutation(seed in 0u64..1000) {
        let (x, y) = random_problem(seed, 10, 2);
        let mut order: Vec<usize> = (0..10).collect();
        order.reverse();
        order.swap(2, 7);
        let xp: Vec<Vec<f64>> = order.iter().map(|&i| x[i].clone()).collect();
        let yp: Vec<f64> = order.iter().map(|&i| y[i]).collect();
        let k = Kernel::rbf(1.5).unwrap();
        for params in [
            SvrParams::EpsSvr { c: 4.0, eps: 0.05 },
            SvrParams::Lssvr { gamma: 4.0 },
            SvrParams::Tsvr(TsvrParams { delta: 1e-3, ..TsvrParams::new(4.0, 4.0, 0.05, 0.05) }),
            SvrParams::EpsTsvr(EpsTsvrParams::new(4.0, 4.0, 0.1, 0.1, 0.05, 0.05)),
        ] {
            let a = fit(&x, &y, k, params).unwrap().predict(&x).unwrap();
            let b = fit(&xp, &yp, k, params).unwrap().predict(&x).unwrap();
            for (u, v) in a.iter().zip(&b) {
                prop_assert!((u - v).abs() < 1e-5, "{:?}: {} vs {}", params.variant(), u, v);
            }
        }
    }

    #[test]
    fn twin_prediction_is_mean_of_bounds(seed in 0u64..1000) {
        let (x, y) = random_problem(seed, 10, 3);
        let k = Kernel::rbf(1.0).unwrap();
        for params in [
            SvrParams::Tsvr(TsvrParams::new(2.0, 2.0, 0.1, 0.1)),
            SvrParams::EpsTsvr(EpsTsvrParams::new(2.0, 2.0, 0.5, 0.5, 0.1, 0.1)),
        ] {
            let m = fit(&x, &y, k, params).unwrap();
            let g = m.predict(&x).unwrap();
            let (f1, f2) = m.predict_bounds(&x).unwrap();
            for i in 0..g.len() {
                prop_assert_eq!(g[i], 0.5 * (f1[i] + f2[i]));
            }
            prop_assert!(m.kkt_violation <= KKT_TOLERANCE);
        }
    }
}

#[test]
fn lssvr_single_point_interpolates() {
    let m = fit_lssvr(&[vec![0.3, -1.0]], &[4.2], Kernel::rbf(1.0).unwrap(), 10.0).unwrap();
    assert!((m.predict(&[vec![0.3, -1.0]]).unwrap()[0] - 4.2).abs() < 1e-8);
}

#[test]
fn lssvr_recovers_slope() {
    let xs: Vec<f64> = (0..20).map(|i| i as f64 * 0.5).collect();
    let y: Vec<f64> = xs.iter().map(|v| 2.0 * v).collect();
    let m = fit_lssvr(&col(&xs), &y, Kernel::linear(), 1e6).unwrap();
    let p = m.predict(&col(&[0.0, 1.0])).unwrap();
    assert!((p[1] - p[0] - 2.0).abs() < 1e-3);
}

#[test]
fn lssvr_tiny_gamma_gives_constant() {
    let (x, y) = random_problem(1, 15, 2);
    let m = fit_lssvr(&x, &y, Kernel::rbf(1.0).unwrap(), 1e-6).unwrap();
    let SvrCoef::Single { coef, bias, .. } = &m.coef else { panic!() };
    assert!(coef.iter().all(|a| a.abs() < 1e-5));
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    assert!((bias - mean).abs() < 1e-3);
}

#[test]
fn lssvr_matches_bordered_lu_solve() {
    let (x, y) = random_problem(9, 10, 2);
    let gamma = 7.0;
    let k = Kernel::rbf(0.8).unwrap();
    let m = fit_lssvr(&x, &y, k, gamma).unwrap();
    let gram = k.gram(&m.support);
    let n = y.len();
    let mut a = DMatrix::zeros(n + 1, n + 1);
    for i in 0..n {
        a[(0, i + 1)] = 1.0;
        a[(i + 1, 0)] = 1.0;
        for j in 0..n {
            a[(i + 1, j + 1)] = gram[(i, j)] + if i == j { 1.0 / gamma } else { 0.0 };
        }
    }
    let mut rhs = DVector::zeros(n + 1);
    rhs.rows_mut(1, n).copy_from_slice(&y);
    let sol = a.lu().solve(&rhs).unwrap();
    let SvrCoef::Single { coef, bias, .. } = &m.coef else { panic!() };
    assert!((bias - sol[0]).abs() < 1e-9);
    for i in 0..n {
        assert!((coef[i] - sol[i + 1]).abs() < 1e-9);
    }
}

#[test]
fn lssvr_interpolates_training_set_with_large_gamma() {
    let (x, y) = random_problem(5, 12, 2);
    let m = fit_lssvr(&x, &y, Kernel::rbf(0.5).unwrap(), 1e6).unwrap();
    assert!(rmse(&m.predict(&x).unwrap(), &y) < 1e-4);
}

#[test]
fn predict_shapes() {
    let (x, y) = random_problem(2, 8, 2);
    let m = fit_lssvr(&x, &y, Kernel::rbf(1.0).unwrap(), 1.0).unwrap();
    assert!(m.predict(&[]).unwrap().is_empty());
    assert!(matches!(m.predict(&[vec![1.0]]), Err(Error::Shape(_))));
    assert!(m.predict_bounds(&x).is_err());
}

#[test]
fn tsvr_brackets_linear_target() {
    let xs: Vec<f64> = (0..10).map(|i| i as f64 * 0.3).collect();
    let y: Vec<f64> = xs.iter().map(|v| 1.5 * v - 0.5).collect();
    let x = col(&xs);
    let eps = 0.1;
    let m = fit_tsvr(&x, &y, Kernel::linear(), TsvrParams::new(1.0, 1.0, eps, eps)).unwrap();
    let (f1, f2) = m.predict_bounds(&x).unwrap();
    let g = m.predict(&x).unwrap();
    for i in 0..y.len() {
        assert!(f1[i] <= y[i] + 1e-6 && y[i] <= f2[i] + 1e-6);
        assert!((g[i] - y[i]).abs() < 1e-3);
    }
}

#[test]
fn tsvr_constant_target() {
    let (x, _) = random_problem(4, 10, 2);
    let y = vec![3.25; 10];
    let m = fit_tsvr(&x, &y, Kernel::rbf(1.0).unwrap(), TsvrParams::new(1.0, 1.0, 0.2, 0.2)).unwrap();
    for g in m.predict(&x).unwrap() {
        assert!((g - 3.25).abs() < 1e-6, "{g}");
    }
}

#[test]
fn eps_tsvr_heavy_regularization_shrinks_to_zero() {
    let (x, y) = random_problem(6, 10, 2);
    let p = EpsTsvrParams::new(1.0, 1.0, 1e9, 1e9, 0.1, 0.1);
    let m = fit_eps_tsvr(&x, &y, Kernel::rbf(1.0).unwrap(), p).unwrap();
    for g in m.predict(&x).unwrap() {
        assert!(g.abs() < 1e-6);
    }
}

#[test]
fn eps_tsvr_relaxation_factor_does_not_change_solution() {
    let (x, y) = random_problem(8, 10, 2);
    let k = Kernel::rbf(1.0).unwrap();
    let p = EpsTsvrParams::new(1.0, 1.0, 0.1, 0.1, 0.05, 0.05);
    let a = fit_eps_tsvr(&x, &y, k, p).unwrap().predict(&x).unwrap();
    let b = fit_eps_tsvr(&x, &y, k, EpsTsvrParams { omega: 1.4, ..p }).unwrap().predict(&x).unwrap();
    for (u, v) in a.iter().zip(&b) {
        assert!((u - v).abs() < 1e-5);
    }
    assert!(fit_eps_tsvr(&x, &y, k, EpsTsvrParams { omega: 2.0, ..p }).is_err());
}

#[test]
fn eps_tsvr_linear_target() {
    let xs: Vec<f64> = (0..10).map(|i| i as f64 * 0.3).collect();
    let y: Vec<f64> = xs.iter().map(|v| -0.7 * v + 2.0).collect();
    let x = col(&xs);
    let p = EpsTsvrParams::new(1.0, 1.0, 1e-7, 1e-7, 0.1, 0.1);
    let m = fit_eps_tsvr(&x, &y, Kernel::linear(), p).unwrap();
    for (g, t) in m.predict(&x).unwrap().iter().zip(&y) {
        assert!((g - t).abs() < 1e-3, "{g} vs {t}");
    }
}

#[test]
fn box_qp_known_solution() {
    // min ½(a² + b²) − 2a + b over [0, 1]² → a = 1 (clipped), b = 0
    let p = DMatrix::identity(2, 2);
    let (a, v) = twin::box_qp(&p, &[-2.0, 1.0], 1.0, 1.0, 1e-12, 10).unwrap();
    assert_eq!(a, vec![1.0, 0.0]);
    assert_eq!(v, 0.0);
}

#[test]
fn serde_round_trip() {
    let (x, y) = random_problem(10, 8, 2);
    let m = fit_eps_tsvr(&x, &y, Kernel::rbf(1.0).unwrap(), EpsTsvrParams::new(1.0, 1.0, 0.1, 0.1, 0.0, 0.0)).unwrap();
    let back: SvrModel = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
    assert_eq!(back, m);
}
