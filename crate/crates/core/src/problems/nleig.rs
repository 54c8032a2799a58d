use rand::Rng;

use super::operators::{SymmetricOperator, Tridiagonal};
use crate::error::{Error, Result};
use crate::mat::{gaussian, inner, Mat};
use crate::objective::{HessOp, Objective};

/// Simplified density-functional model on the Stiefel manifold:
/// `f(X) = ½ tr(XᵀLX) + (α/4) ρ(X)ᵀ L⁻¹ ρ(X)`, `ρ(X) = diag(XXᵀ)`,
/// with `L` the `(2, −1)` tridiagonal Laplacian.
///
/// With `w = L⁻¹ρ(X)`:
/// `∇f = LX + α Diag(w) X` and
/// `∇²f[ξ] = Lξ + α Diag(w) ξ + α Diag(L⁻¹ dρ) X`, `dρᵢ = 2 Σⱼ Xᵢⱼ ξᵢⱼ`.
#[derive(Debug, Clone)]
pub struct NonlinearEigenProblem {
    l: Tridiagonal,
    alpha: f64,
    p: usize,
}

fn row_dots(a: &Mat, b: &Mat) -> Vec<f64> {
    let mut out = vec![0.0; a.nrows()];
    for j in 0..a.ncols() {
        for ((o, x), y) in out.iter_mut().zip(a.column(j).iter()).zip(b.column(j).iter()) {
            *o += x * y;
        }
    }
    out
}

fn scale_rows(w: &[f64], x: &Mat) -> Mat {
    let mut out = x.clone();
    for j in 0..out.ncols() {
        for (o, s) in out.column_mut(j).iter_mut().zip(w) {
            *o *= s;
        }
    }
    out
}

impl NonlinearEigenProblem {
    pub fn new(n: usize, p: usize, alpha: f64) -> Result<Self> {
        if p == 0 || p > n {
            return Err(Error::InvalidProblem(format!("need 1 ≤ p ≤ n, got p = {p}, n = {n}")));
        }
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidProblem("alpha must be finite and ≥ 0".into()));
        }
        Ok(Self {
            l: Tridiagonal::laplacian(n),
            alpha,
            p,
        })
    }

    pub fn laplacian(&self) -> &Tridiagonal {
        &self.l
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `ρ(X)`: the diagonal of `XXᵀ`.
    pub fn density(x: &Mat) -> Vec<f64> {
        row_dots(x, x)
    }

    fn potential(&self, x: &Mat) -> Vec<f64> {
        self.l.solve_vec(&Self::density(x))
    }

    fn hess_with_potential(&self, x: &Mat, w: &[f64], xi: &Mat) -> Mat {
        let mut out = self.l.apply(xi);
        if self.alpha != 0.0 {
            out += scale_rows(w, xi) * self.alpha;
            let drho: Vec<f64> = row_dots(x, xi).into_iter().map(|v| 2.0 * v).collect();
            let dw = self.l.solve_vec(&drho);
            out += scale_rows(&dw, x) * self.alpha;
        }
        out
    }
}

impl Objective for NonlinearEigenProblem {
    fn shape(&self) -> (usize, usize) {
        (self.l.dim(), self.p)
    }

    fn eval(&self, x: &Mat) -> f64 {
        let quad = 0.5 * inner(x, &self.l.apply(x));
        if self.alpha == 0.0 {
            return quad;
        }
        let rho = Self::density(x);
        let w = self.l.solve_vec(&rho);
        quad + 0.25 * self.alpha * rho.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>()
    }

    fn euclid_grad(&self, x: &Mat) -> Mat {
        let mut g = self.l.apply(x);
        if self.alpha != 0.0 {
            g += scale_rows(&self.potential(x), x) * self.alpha;
        }
        g
    }

    fn eval_grad(&self, x: &Mat) -> (f64, Mat) {
        let lx = self.l.apply(x);
        let quad = 0.5 * inner(x, &lx);
        if self.alpha == 0.0 {
            return (quad, lx);
        }
        let rho = Self::density(x);
        let w = self.l.solve_vec(&rho);
        let f = quad + 0.25 * self.alpha * rho.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
        (f, lx + scale_rows(&w, x) * self.alpha)
    }

    fn euclid_hess_vec(&self, x: &Mat, xi: &Mat) -> Mat {
        let w = self.potential(x);
        self.hess_with_potential(x, &w, xi)
    }

    fn hessian_at<'a>(&'a self, x: &Mat) -> HessOp<'a> {
        let x = x.clone();
        let w = self.potential(&x);
        Box::new(move |xi| self.hess_with_potential(&x, &w, xi))
    }
}

/// Orthonormalized Gaussian `n × p` start.
pub fn initial_point<R: Rng + ?Sized>(rng: &mut R, n: usize, p: usize) -> Mat {
    use crate::manifolds::{Manifold, StiefelManifold};
    let m = StiefelManifold::new(n, p);
    loop {
        if let Ok(x) = m.project_point(&gaussian(rng, n, p)) {
            return x;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::RayleighProblem;
    use rand::SeedableRng;
    use std::sync::Arc;

    #[test]
    fn alpha_zero_is_rayleigh() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let nl = NonlinearEigenProblem::new(30, 4, 0.0).unwrap();
        let ray = RayleighProblem::new(Arc::new(Tridiagonal::laplacian(30)), 4);
        for _ in 0..20 {
            let x = initial_point(&mut rng, 30, 4);
            let xi = gaussian(&mut rng, 30, 4);
            assert!((nl.eval(&x) - ray.eval(&x)).abs() <= 1e-12);
            assert!((nl.euclid_grad(&x) - ray.euclid_grad(&x)).norm() <= 1e-12);
            assert!((nl.euclid_hess_vec(&x, &xi) - ray.euclid_hess_vec(&x, &xi)).norm() <= 1e-12);
        }
    }

    #[test]
    fn density_of_coordinate_frame() {
        let x = Mat::identity(6, 3);
        assert_eq!(
            NonlinearEigenProblem::density(&x),
            vec![1.0, 1.0, 1.0, 0.0, 0.0, 0.0]
        );
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let prob = NonlinearEigenProblem::new(50, 3, 1.0).unwrap();
        let x = initial_point(&mut rng, 50, 3);
        let g = prob.euclid_grad(&x);
        let h = 1e-6;
        let mut worst: f64 = 0.0;
        for _ in 0..10 {
            let u = crate::mat::unit_gaussian(&mut rng, 50, 3);
            let fd = (prob.eval(&(&x + &u * h)) - prob.eval(&(&x - &u * h))) / (2.0 * h);
            worst = worst.max((fd - inner(&g, &u)).abs() / g.norm());
        }
        assert!(worst <= 1e-6, "relative error {worst}");
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(NonlinearEigenProblem::new(3, 4, 1.0).is_err());
        assert!(NonlinearEigenProblem::new(3, 1, -1.0).is_err());
    }
}
