use std::sync::Arc;

use arnt::diagnostics::{check_geometry, check_gradient, check_hess_vec, FdConfig};
use arnt::problems::{bec, ncm, BecProblem, DenseSymmetric, NearestCorrelationProblem, NonlinearEigenProblem, Potential};
use arnt::problems::{RayleighProblem, Tridiagonal, Weights};
use arnt::{EuclideanManifold, Manifold, Mat, Objective, ObliqueManifold, SphereManifold, StiefelManifold};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_symmetric(n: usize, seed: u64) -> Mat {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = arnt::mat::gaussian(&mut rng, n, n);
    (&b + b.transpose()) * 0.5
}

struct Case {
    name: &'static str,
    manifold: Box<dyn Manifold>,
    objective: Box<dyn Objective>,
}

fn cases() -> Vec<Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let h = ncm::ex1_weights(&mut rng, 30, 3);
    vec![
        Case {
            name: "rayleigh/sphere",
            manifold: Box::new(SphereManifold::new(12)),
            objective: Box::new(RayleighProblem::new(Arc::new(DenseSymmetric::new(random_symmetric(12, 1)).unwrap()), 1)),
        },
        Case {
            name: "rayleigh/stiefel",
            manifold: Box::new(StiefelManifold::new(15, 3)),
            objective: Box::new(RayleighProblem::new(Arc::new(Tridiagonal::laplacian(15)), 3)),
        },
        Case {
            name: "rayleigh/euclidean",
            manifold: Box::new(EuclideanManifold::new(8, 2)),
            objective: Box::new(RayleighProblem::new(Arc::new(DenseSymmetric::new(random_symmetric(8, 2)).unwrap()), 2)),
        },
        Case {
            name: "ncm-ones/oblique",
            manifold: Box::new(ObliqueManifold::new(5, 50)),
            objective: Box::new(NearestCorrelationProblem::new(ncm::ex1_target(50), Weights::Ones, 5).unwrap()),
        },
        Case {
            name: "ncm-weighted/oblique",
            manifold: Box::new(ObliqueManifold::new(4, 30)),
            objective: Box::new(NearestCorrelationProblem::new(ncm::ex1_target(30), Weights::Matrix(h), 4).unwrap()),
        },
        Case {
            name: "nleig/stiefel",
            manifold: Box::new(StiefelManifold::new(40, 4)),
            objective: Box::new(NonlinearEigenProblem::new(40, 4, 10.0).unwrap()),
        },
        Case {
            name: "bec/sphere",
            manifold: Box::new(SphereManifold::new(17 * 17)),
            objective: Box::new(BecProblem::on_grid(Potential::V1, 17, 500.0).unwrap()),
        },
        Case {
            name: "bec-v2/sphere",
            manifold: Box::new(SphereManifold::new(13 * 13)),
            objective: Box::new(BecProblem::on_grid(Potential::V2, 13, 50.0).unwrap()),
        },
    ]
}

#[test]
fn every_pair_passes_derivative_checks_at_three_points() {
    for case in cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for point in 0..3 {
            let x = case.manifold.random_point(&mut rng);
            let seed = 100 + point;
            let g = check_gradient(&case.objective, case.manifold.as_ref(), &x, FdConfig { seed, ..FdConfig::gradient() }).unwrap();
            assert!(g.passed, "{}: gradient {g:?}", case.name);
            let h = check_hess_vec(&case.objective, case.manifold.as_ref(), &x, FdConfig { seed, ..FdConfig::hessian() }).unwrap();
            assert!(h.passed, "{}: hessian {h:?}", case.name);
        }
    }
}

#[test]
fn riemannian_hessian_matches_retraction_differences_at_fine_step() {
    // h = 1e-6, relative error ≤ 1e-5 on the projected-gradient difference quotient.
    let cfg = FdConfig {
        h: 1e-6,
        probes: 10,
        tol: 1e-5,
        seed: 3,
    };
    for case in cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = case.manifold.random_point(&mut rng);
        let h = check_hess_vec(&case.objective, case.manifold.as_ref(), &x, cfg).unwrap();
        assert!(h.riemannian_max_rel_err <= 1e-5, "{}: {h:?}", case.name);
        assert!(h.symmetry_max_err.unwrap() <= 1e-9, "{}: {h:?}", case.name);
    }
}

#[test]
fn euclidean_hessians_are_linear_and_symmetric() {
    for case in cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (r, c) = case.objective.shape();
        let x = case.manifold.random_point(&mut rng);
        let u = arnt::mat::gaussian(&mut rng, r, c);
        let v = arnt::mat::gaussian(&mut rng, r, c);
        let hu = case.objective.euclid_hess_vec(&x, &u);
        let hv = case.objective.euclid_hess_vec(&x, &v);
        let uhv = u.dot(&hv);
        assert!((uhv - v.dot(&hu)).abs() <= 1e-10 * uhv.abs().max(1.0), "{}", case.name);
        let combo = case.objective.euclid_hess_vec(&x, &(&u * 2.5 - &v));
        assert!((combo - (hu * 2.5 - hv)).norm() <= 1e-9 * (1.0 + combo_scale(&case, &x)), "{}", case.name);
    }
}

fn combo_scale(case: &Case, x: &Mat) -> f64 {
    case.objective.euclid_grad(x).norm()
}

#[test]
fn ncm_instance_gradient_error_is_small() {
    let prob = NearestCorrelationProblem::new(ncm::ex1_target(50), Weights::Ones, 5).unwrap();
    let m = ObliqueManifold::new(5, 50);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let x = ncm::initial_point(&mut rng, 5, 50);
    let g = check_gradient(&prob, &m, &x, FdConfig::gradient()).unwrap();
    assert!(g.euclidean_max_rel_err <= 1e-5 && g.riemannian_max_rel_err <= 1e-5, "{g:?}");
}

#[test]
fn bec_hessian_at_strong_interaction() {
    let prob = BecProblem::on_grid(Potential::V1, 33, 500.0).unwrap();
    let m = SphereManifold::new(33 * 33);
    let x = bec::gaussian_initial(33);
    let h = check_hess_vec(&prob, &m, &x, FdConfig::hessian()).unwrap();
    assert!(h.euclidean_max_rel_err <= 1e-4 && h.riemannian_max_rel_err <= 1e-4, "{h:?}");
}

#[test]
fn manifold_geometry_suite() {
    let manifolds: Vec<Box<dyn Manifold>> = vec![
        Box::new(SphereManifold::new(3)),
        Box::new(SphereManifold::new(50)),
        Box::new(ObliqueManifold::new(5, 40)),
        Box::new(StiefelManifold::new(30, 5)),
        Box::new(StiefelManifold::new(6, 6)),
        Box::new(EuclideanManifold::new(4, 3)),
    ];
    for (i, m) in manifolds.iter().enumerate() {
        let report = check_geometry(m.as_ref(), 25, i as u64).unwrap();
        assert!(report.passed, "{report:?}");
    }
}

#[test]
fn weingarten_map_is_tangent_and_linear_in_the_normal_argument() {
    let manifolds: Vec<Box<dyn Manifold>> = vec![
        Box::new(SphereManifold::new(6)),
        Box::new(ObliqueManifold::new(3, 4)),
        Box::new(StiefelManifold::new(7, 3)),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for m in &manifolds {
        let (r, c) = m.shape();
        let x = m.random_point(&mut rng);
        let xi = m.random_tangent(&x, &mut rng);
        let v1 = m.normal_part(&x, &arnt::mat::gaussian(&mut rng, r, c));
        let v2 = m.normal_part(&x, &arnt::mat::gaussian(&mut rng, r, c));
        let w1 = m.weingarten(&x, &xi, &v1).unwrap();
        let w2 = m.weingarten(&x, &xi, &v2).unwrap();
        let w12 = m.weingarten(&x, &xi, &(&v1 * 3.0 + &v2)).unwrap();
        assert!((w12 - (&w1 * 3.0 + &w2)).norm() <= 1e-12, "{}", m.name());
        assert!(m.tangency_residual(&x, &w1) <= 1e-12, "{}", m.name());
        assert!(m.weingarten(&x, &xi, &Mat::zeros(r, c)).unwrap().norm() == 0.0);
        assert!(m.weingarten(&x, &xi, &xi).is_err(), "{}: tangent argument accepted", m.name());
    }
}
