//! Fixed benchmark instances.

use std::sync::Arc;

use arnt::manifolds::{ObliqueManifold, SphereManifold, StiefelManifold};
use arnt::problems::ncm::{ex1_target, initial_point};
use arnt::problems::{DenseSymmetric, NearestCorrelationProblem, NonlinearEigenProblem, RayleighProblem, Weights};
use arnt::{Manifold, Mat};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `½xᵀ diag(1..n) x` on the unit sphere.
pub fn rayleigh(n: usize, seed: u64) -> (SphereManifold, RayleighProblem, Mat) {
    let values: Vec<f64> = (1..=n).map(|i| i as f64).collect();
    let m = SphereManifold::new(n);
    let x0 = m.random_point(&mut rng(seed));
    (m, RayleighProblem::new(Arc::new(DenseSymmetric::diagonal(&values)), 1), x0)
}

pub fn ncm(n: usize, p: usize, seed: u64) -> (ObliqueManifold, NearestCorrelationProblem, Mat) {
    let problem = NearestCorrelationProblem::new(ex1_target(n), Weights::Ones, p).expect("valid instance");
    (ObliqueManifold::new(p, n), problem, initial_point(&mut rng(seed), p, n))
}

pub fn nleig(n: usize, p: usize, alpha: f64, seed: u64) -> (StiefelManifold, NonlinearEigenProblem, Mat) {
    let m = StiefelManifold::new(n, p);
    let x0 = m.random_point(&mut rng(seed));
    (m, NonlinearEigenProblem::new(n, p, alpha).expect("valid instance"), x0)
}

/// Symmetric positive definite `n × n` matrix with spectrum in `[1, κ]`.
pub fn spd(n: usize, kappa: f64, seed: u64) -> Mat {
    let q = StiefelManifold::new(n, n).random_point(&mut rng(seed));
    let step = if n > 1 { (kappa - 1.0) / (n - 1) as f64 } else { 0.0 };
    let d = Mat::from_fn(n, n, |i, j| if i == j { 1.0 + step * i as f64 } else { 0.0 });
    &q * d * q.transpose()
}
