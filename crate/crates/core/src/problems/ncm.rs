use rand::seq::index::sample;
use rand::Rng;

use crate::error::{Error, Result};
use crate::mat::{gaussian, Mat};
use crate::objective::{HessOp, Objective};

/// Elementwise weights `H` of the residual; only `H ⊙ H` is stored.
#[derive(Debug, Clone)]
pub enum Weights {
    Ones,
    Matrix(Mat),
}

/// Low-rank nearest correlation problem in factored form:
/// `f(V) = ½‖H ⊙ (VᵀV − C)‖_F²` over `V ∈ ℝ^{p×n}` with unit columns.
///
/// With `S = H⊙H⊙(VᵀV − C)`:
/// `∇f(V) = 2VS` and `∇²f(V)[ξ] = 2ξS + 2V(H⊙H⊙(ξᵀV + Vᵀξ))`.
#[derive(Debug, Clone)]
pub struct NearestCorrelationProblem {
    c: Mat,
    /// `H ⊙ H`, or `None` for all-ones weights.
    hh: Option<Mat>,
    p: usize,
}

impl NearestCorrelationProblem {
    pub fn new(c: Mat, weights: Weights, p: usize) -> Result<Self> {
        let n = c.nrows();
        if !c.is_square() || n == 0 {
            return Err(Error::InvalidProblem("C must be square and nonempty".into()));
        }
        if p == 0 || p > n {
            return Err(Error::InvalidProblem(format!("rank p = {p} must be in 1..={n}")));
        }
        if (&c - c.transpose()).norm() > 1e-12 * c.norm().max(1.0) {
            return Err(Error::InvalidProblem("C must be symmetric".into()));
        }
        let hh = match weights {
            Weights::Ones => None,
            Weights::Matrix(h) => {
                if h.shape() != c.shape() {
                    return Err(Error::Dimension {
                        expected: c.shape(),
                        got: h.shape(),
                    });
                }
                if h.iter().any(|v| !(*v >= 0.0)) {
                    return Err(Error::InvalidProblem("weights must be nonnegative".into()));
                }
                if (&h - h.transpose()).norm() > 1e-12 * h.norm().max(1.0) {
                    return Err(Error::InvalidProblem("weights must be symmetric".into()));
                }
                Some(h.component_mul(&h))
            }
        };
        Ok(Self { c, hh, p })
    }

    pub fn n(&self) -> usize {
        self.c.nrows()
    }

    fn weighted(&self, mut r: Mat) -> Mat {
        if let Some(hh) = &self.hh {
            r.component_mul_assign(hh);
        }
        r
    }

    fn residual(&self, v: &Mat) -> Mat {
        v.tr_mul(v) - &self.c
    }

    fn s_matrix(&self, v: &Mat) -> Mat {
        self.weighted(self.residual(v))
    }

    fn hess_with_s(&self, v: &Mat, s: &Mat, xi: &Mat) -> Mat {
        let cross = xi.tr_mul(v);
        let sym = &cross + cross.transpose();
        let t = self.weighted(sym);
        (xi * s + v * t) * 2.0
    }
}

impl Objective for NearestCorrelationProblem {
    fn shape(&self) -> (usize, usize) {
        (self.p, self.n())
    }

    fn eval(&self, v: &Mat) -> f64 {
        let r = self.residual(v);
        let total: f64 = match &self.hh {
            None => r.norm_squared(),
            Some(hh) => r.iter().zip(hh.iter()).map(|(a, w)| w * a * a).sum(),
        };
        0.5 * total
    }

    fn euclid_grad(&self, v: &Mat) -> Mat {
        v * self.s_matrix(v) * 2.0
    }

    fn eval_grad(&self, v: &Mat) -> (f64, Mat) {
        let r = self.residual(v);
        let s = self.weighted(r.clone());
        let f = 0.5 * r.iter().zip(s.iter()).map(|(a, b)| a * b).sum::<f64>();
        (f, v * s * 2.0)
    }

    fn euclid_hess_vec(&self, v: &Mat, xi: &Mat) -> Mat {
        let s = self.s_matrix(v);
        self.hess_with_s(v, &s, xi)
    }

    fn hessian_at<'a>(&'a self, v: &Mat) -> HessOp<'a> {
        let v = v.clone();
        let s = self.s_matrix(&v);
        Box::new(move |xi| self.hess_with_s(&v, &s, xi))
    }
}

/// Synthetic target `C_ij = 0.5 + exp(−0.05|i − j|)`.
pub fn ex1_target(n: usize) -> Mat {
    Mat::from_fn(n, n, |i, j| 0.5 + (-0.05 * (i as f64 - j as f64).abs()).exp())
}

/// Random weights: uniform in `[0.1, 10]` except `outliers` entries uniform in
/// `[0.01, 100]`, then symmetrized as `(H + Hᵀ)/2`.
pub fn ex1_weights<R: Rng + ?Sized>(rng: &mut R, n: usize, outliers: usize) -> Mat {
    let mut h = Mat::from_fn(n, n, |_, _| rng.random_range(0.1..=10.0));
    let picks = sample(rng, n * n, outliers.min(n * n));
    for k in picks.iter() {
        h[(k % n, k / n)] = rng.random_range(0.01..=100.0);
    }
    (&h + h.transpose()) * 0.5
}

/// Column-normalized standard normal `p × n` start.
pub fn initial_point<R: Rng + ?Sized>(rng: &mut R, p: usize, n: usize) -> Mat {
    loop {
        if let Ok(v) = crate::manifolds::normalize_columns(&gaussian(rng, p, n), "oblique") {
            return v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn exact_fit_is_stationary() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let v = initial_point(&mut rng, 3, 6);
        let c = v.tr_mul(&v);
        let p = NearestCorrelationProblem::new(c, Weights::Ones, 3).unwrap();
        assert!(p.eval(&v) < 1e-28);
        assert!(p.euclid_grad(&v).norm() < 1e-14);
    }

    #[test]
    fn hand_evaluated_residual() {
        let p = NearestCorrelationProblem::new(Mat::identity(2, 2), Weights::Ones, 1).unwrap();
        let v = Mat::from_row_slice(1, 2, &[1.0, 1.0]);
        assert_eq!(p.eval(&v), 1.0);
        assert_eq!(p.euclid_hess_vec(&v, &Mat::zeros(1, 2)), Mat::zeros(1, 2));
    }

    #[test]
    fn ex1_target_entries() {
        let c = ex1_target(500);
        assert_eq!(c.shape(), (500, 500));
        assert!((c[(0, 0)] - 1.5).abs() < 1e-15);
        assert!((c[(3, 1)] - (0.5 + (-0.1f64).exp())).abs() < 1e-15);
        assert_eq!(c[(2, 7)], c[(7, 2)]);
    }

    #[test]
    fn random_weights_are_valid() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let h = ex1_weights(&mut rng, 40, 200);
        assert!(h.iter().all(|&w| w >= 0.01 && w <= 100.0));
        assert_eq!(h, h.transpose());
        NearestCorrelationProblem::new(ex1_target(40), Weights::Matrix(h), 4).unwrap();
    }

    #[test]
    fn rejects_negative_weights() {
        let mut h = Mat::from_element(3, 3, 1.0);
        h[(0, 1)] = -1.0;
        h[(1, 0)] = -1.0;
        assert!(NearestCorrelationProblem::new(Mat::identity(3, 3), Weights::Matrix(h), 2).is_err());
    }

    #[test]
    fn rotation_invariance() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut h = ex1_weights(&mut rng, 20, 10);
        h.fill_diagonal(1.0);
        let prob = NearestCorrelationProblem::new(ex1_target(20), Weights::Matrix(h), 4).unwrap();
        let v = initial_point(&mut rng, 4, 20);
        let q = nalgebra::linalg::QR::new(gaussian(&mut rng, 4, 4)).q();
        let a = prob.eval(&v);
        let b = prob.eval(&(q * &v));
        assert!((a - b).abs() <= 1e-10 * a.max(1.0));
    }

    #[test]
    fn cached_hessian_matches_direct() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let prob = NearestCorrelationProblem::new(ex1_target(15), Weights::Ones, 3).unwrap();
        let v = initial_point(&mut rng, 3, 15);
        let xi = gaussian(&mut rng, 3, 15);
        let h = prob.hessian_at(&v);
        assert!((h(&xi) - prob.euclid_hess_vec(&v, &xi)).norm() < 1e-12);
        let (f, g) = prob.eval_grad(&v);
        assert!((f - prob.eval(&v)).abs() < 1e-12 * f);
        assert!((g - prob.euclid_grad(&v)).norm() < 1e-12);
    }
}
