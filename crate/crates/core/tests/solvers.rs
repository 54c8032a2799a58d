use std::sync::Arc;

use arnt::problems::{ncm, nleig, DenseSymmetric, NearestCorrelationProblem, NonlinearEigenProblem, RayleighProblem, Weights};
use arnt::solvers::{solve_adagrad, solve_arnt, solve_gbb, solve_rtr, solve_trqh};
use arnt::{EuclideanManifold, Manifold, Mat, Objective, ObliqueManifold, SolverOptions, SolverReport};
use arnt::{SphereManifold, Status, StiefelManifold};
use nalgebra::{DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Solver = fn(&dyn Manifold, &dyn Objective, &Mat, &SolverOptions) -> arnt::Result<SolverReport>;

const SOLVERS: [(&str, Solver); 4] = [
    ("ARNT", |m, o, x, opts| solve_arnt(m, o, x, opts)),
    ("RTR", |m, o, x, opts| solve_rtr(m, o, x, opts)),
    ("GBB", |m, o, x, opts| solve_gbb(m, o, x, opts)),
    ("TRQH", |m, o, x, opts| solve_trqh(m, o, x, opts)),
];

fn random_spd(n: usize, seed: u64) -> Mat {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = arnt::mat::gaussian(&mut rng, n, n);
    b.tr_mul(&b) / n as f64 + Mat::identity(n, n)
}

/// `½ Σ` of the `p` smallest eigenvalues: the minimum of `½ tr(XᵀAX)` on `St(n, p)`.
fn rayleigh_minimum(a: &Mat, p: usize) -> f64 {
    let mut eigs: Vec<f64> = SymmetricEigen::new(a.clone()).eigenvalues.iter().copied().collect();
    eigs.sort_by(f64::total_cmp);
    0.5 * eigs[..p].iter().sum::<f64>()
}

fn assert_report_consistent(r: &SolverReport, opts: &SolverOptions) {
    assert_eq!(r.trace.len(), r.outer_iters, "{}", r.solver);
    if let Some(last) = r.trace.last() {
        assert_eq!(last.f, r.final_f, "{}", r.solver);
        assert_eq!(last.grad_norm, r.final_grad_norm, "{}", r.solver);
    }
    for (k, rec) in r.trace.iter().enumerate() {
        assert_eq!(rec.k, k, "{}", r.solver);
    }
    match r.status {
        Status::Converged => assert!(r.final_grad_norm <= opts.grad_tol, "{}", r.solver),
        other => panic!("{} ended with {other}", r.solver),
    }
    assert!(r.mean_inner_iters >= 0.0 && r.wall_time >= 0.0);
}

#[test]
fn diagonal_rayleigh_on_the_sphere() {
    let d: Vec<f64> = (1..=10).map(f64::from).collect();
    let a = Mat::from_diagonal(&DVector::from_vec(d));
    let obj = RayleighProblem::new(Arc::new(DenseSymmetric::new(a).unwrap()), 1);
    let m = SphereManifold::new(10);
    let x0 = Mat::from_element(10, 1, 1.0 / 10f64.sqrt());
    let opts = SolverOptions::default();
    for (name, solve) in SOLVERS {
        let r = solve(&m, &obj, &x0, &opts).unwrap();
        assert_report_consistent(&r, &opts);
        assert!((r.final_f - 0.5).abs() <= 1e-10, "{name}: {}", r.final_f);
        assert!((r.x[(0, 0)].abs() - 1.0).abs() <= 1e-6, "{name}");
    }
    let arnt = solve_arnt(&m, &obj, &x0, &opts).unwrap();
    assert!(arnt.outer_iters <= 10);
}

#[test]
fn random_rayleigh_on_stiefel_reaches_the_eigenvalue_sum() {
    let a = random_spd(30, 4);
    let target = rayleigh_minimum(&a, 3);
    let obj = RayleighProblem::new(Arc::new(DenseSymmetric::new(a).unwrap()), 3);
    let m = StiefelManifold::new(30, 3);
    let x0 = m.random_point(&mut ChaCha8Rng::seed_from_u64(5));
    let opts = SolverOptions {
        grad_tol: 1e-8,
        ..SolverOptions::default()
    };
    for (name, solve) in SOLVERS {
        let r = solve(&m, &obj, &x0, &opts).unwrap();
        assert_report_consistent(&r, &opts);
        assert!((r.final_f - target).abs() <= 1e-10 * target, "{name}: {} vs {target}", r.final_f);
        assert!(m.feasibility_residual(&r.x) <= m.feasibility_tol(), "{name}");
    }
}

#[test]
fn euclidean_quadratic_is_driven_to_the_origin() {
    let a = random_spd(6, 8);
    let obj = RayleighProblem::new(Arc::new(DenseSymmetric::new(a).unwrap()), 2);
    let m = EuclideanManifold::new(6, 2);
    let x0 = arnt::mat::gaussian(&mut ChaCha8Rng::seed_from_u64(9), 6, 2);
    let opts = SolverOptions::default();
    let r = solve_arnt(&m, &obj, &x0, &opts).unwrap();
    assert_report_consistent(&r, &opts);
    assert!(r.x.norm() <= 1e-5);
}

#[test]
fn nearest_correlation_solvers_agree() {
    let n = 80;
    let obj = NearestCorrelationProblem::new(ncm::ex1_target(n), Weights::Ones, 4).unwrap();
    let m = ObliqueManifold::new(4, n);
    let x0 = ncm::initial_point(&mut ChaCha8Rng::seed_from_u64(1), 4, n);
    let opts = SolverOptions::default();
    let reports: Vec<SolverReport> = SOLVERS.iter().map(|(_, s)| s(&m, &obj, &x0, &opts).unwrap()).collect();
    let best = reports.iter().map(|r| r.final_f).fold(f64::INFINITY, f64::min);
    for r in &reports {
        assert_report_consistent(r, &opts);
        assert!((r.final_f - best).abs() <= 1e-7 * best.abs().max(1.0), "{}: {} vs {best}", r.solver, r.final_f);
        for j in 0..n {
            assert!((r.x.column(j).norm() - 1.0).abs() <= 1e-12);
        }
    }
}

#[test]
fn nonlinear_eigenvalue_arnt_and_gbb_agree() {
    let (n, p) = (120, 5);
    let obj = NonlinearEigenProblem::new(n, p, 1.0).unwrap();
    let m = StiefelManifold::new(n, p);
    let x0 = nleig::initial_point(&mut ChaCha8Rng::seed_from_u64(2), n, p);
    let opts = SolverOptions::default();
    let arnt = solve_arnt(&m, &obj, &x0, &opts).unwrap();
    let gbb = solve_gbb(&m, &obj, &x0, &opts).unwrap();
    assert_report_consistent(&arnt, &opts);
    assert_report_consistent(&gbb, &opts);
    assert!((arnt.final_f - gbb.final_f).abs() <= 1e-8 * arnt.final_f.abs());
    assert!(arnt.outer_iters < gbb.outer_iters);
}

#[test]
fn runs_are_deterministic() {
    let n = 40;
    let obj = NearestCorrelationProblem::new(ncm::ex1_target(n), Weights::Ones, 3).unwrap();
    let m = ObliqueManifold::new(3, n);
    let x0 = ncm::initial_point(&mut ChaCha8Rng::seed_from_u64(3), 3, n);
    let opts = SolverOptions::default();
    for (_, solve) in SOLVERS {
        let a = solve(&m, &obj, &x0, &opts).unwrap();
        let b = solve(&m, &obj, &x0, &opts).unwrap();
        assert_eq!(a.deterministic_view(), b.deterministic_view());
        assert_eq!(a.x, b.x);
    }
}

#[test]
fn warm_start_is_reported_and_shared() {
    let n = 40;
    let obj = NearestCorrelationProblem::new(ncm::ex1_target(n), Weights::Ones, 3).unwrap();
    let m = ObliqueManifold::new(3, n);
    let x0 = ncm::initial_point(&mut ChaCha8Rng::seed_from_u64(3), 3, n);
    let opts = SolverOptions::default();
    let arnt = solve_arnt(&m, &obj, &x0, &opts).unwrap();
    let rtr = solve_rtr(&m, &obj, &x0, &opts).unwrap();
    let trqh = solve_trqh(&m, &obj, &x0, &opts).unwrap();
    assert!(arnt.warm_start_iters > 0);
    assert_eq!(arnt.start_fingerprint, rtr.start_fingerprint);
    assert_eq!(arnt.start_fingerprint, trqh.start_fingerprint);
    assert!(arnt.start_grad_norm <= opts.warm_start.unwrap().grad_tol);
}

#[test]
fn invalid_inputs_are_rejected() {
    let obj = RayleighProblem::new(Arc::new(DenseSymmetric::diagonal(&[1.0, 2.0, 3.0])), 1);
    let m = SphereManifold::new(3);
    let off = Mat::from_column_slice(3, 1, &[1.0, 1.0, 0.0]);
    assert!(solve_arnt(&m, &obj, &off, &SolverOptions::default()).is_err());
    let wrong_shape = Mat::from_column_slice(2, 1, &[1.0, 0.0]);
    assert!(solve_gbb(&m, &obj, &wrong_shape, &SolverOptions::default()).is_err());
    let bad = SolverOptions {
        eta1: 0.95,
        eta2: 0.9,
        ..SolverOptions::default()
    };
    let x0 = Mat::from_column_slice(3, 1, &[1.0, 0.0, 0.0]);
    assert!(solve_arnt(&m, &obj, &x0, &bad).is_err());
}

#[test]
fn adagrad_decreases_the_objective() {
    let obj = RayleighProblem::new(Arc::new(DenseSymmetric::diagonal(&[1.0, 2.0, 3.0, 4.0])), 1);
    let m = SphereManifold::new(4);
    let x0 = Mat::from_element(4, 1, 0.5);
    let opts = SolverOptions {
        max_outer: 300,
        ..SolverOptions::default()
    };
    let r = solve_adagrad(&m, &obj, &x0, 0.1, 1e-8, &opts).unwrap();
    assert!(r.final_f < obj.eval(&x0));
    assert!(m.feasibility_residual(&r.x) <= m.feasibility_tol());
}
