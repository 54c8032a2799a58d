use std::sync::Arc;

use super::operators::SymmetricOperator;
use crate::mat::{inner, Mat};
use crate::objective::Objective;

/// `f(X) = ½ tr(XᵀAX)`, `∇f = AX`, `∇²f[ξ] = Aξ`.
#[derive(Debug, Clone)]
pub struct RayleighProblem {
    a: Arc<dyn SymmetricOperator>,
    p: usize,
}

impl RayleighProblem {
    pub fn new(a: Arc<dyn SymmetricOperator>, p: usize) -> Self {
        Self { a, p }
    }

    pub fn operator(&self) -> &Arc<dyn SymmetricOperator> {
        &self.a
    }
}

impl Objective for RayleighProblem {
    fn shape(&self) -> (usize, usize) {
        (self.a.dim(), self.p)
    }

    fn eval(&self, x: &Mat) -> f64 {
        0.5 * inner(x, &self.a.apply(x))
    }

    fn euclid_grad(&self, x: &Mat) -> Mat {
        self.a.apply(x)
    }

    fn euclid_hess_vec(&self, _x: &Mat, v: &Mat) -> Mat {
        self.a.apply(v)
    }

    fn eval_grad(&self, x: &Mat) -> (f64, Mat) {
        let ax = self.a.apply(x);
        (0.5 * inner(x, &ax), ax)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::operators::{DenseSymmetric, Tridiagonal};
    use rand::SeedableRng;

    #[test]
    fn examples() {
        let p = RayleighProblem::new(Arc::new(DenseSymmetric::diagonal(&[1.0, 2.0, 3.0])), 1);
        let e1 = Mat::from_column_slice(3, 1, &[1.0, 0.0, 0.0]);
        assert_eq!(p.eval(&e1), 0.5);
        assert_eq!(p.euclid_grad(&e1), e1);

        let id = RayleighProblem::new(Arc::new(DenseSymmetric::diagonal(&[1.0; 4])), 1);
        let x = Mat::from_column_slice(4, 1, &[0.5; 4]);
        assert!((id.eval(&x) - 0.5).abs() < 1e-15);
        assert_eq!(id.euclid_grad(&x), x);
        let xi = Mat::from_column_slice(4, 1, &[1.0, -2.0, 3.0, 0.1]);
        assert_eq!(id.euclid_hess_vec(&x, &xi), xi);
    }

    #[test]
    fn quadratic_identity_holds() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let p = RayleighProblem::new(Arc::new(Tridiagonal::laplacian(20)), 3);
        let x = crate::mat::gaussian(&mut rng, 20, 3);
        let xi = crate::mat::gaussian(&mut rng, 20, 3);
        for &t in &[0.1, 1.0, 3.0] {
            let lhs = p.eval(&(&x + &xi * t));
            let rhs = p.eval(&x)
                + t * inner(&p.euclid_grad(&x), &xi)
                + 0.5 * t * t * inner(&xi, &p.euclid_hess_vec(&x, &xi));
            assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
        }
    }
}
