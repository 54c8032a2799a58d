use nalgebra::SymmetricEigen;
use rand::RngCore;

use super::Manifold;
use crate::error::{Error, Result};
use crate::mat::{gaussian, sym, Mat};

/// Orthonormal `n × p` frames, `XᵀX = I_p`.
///
/// Retraction and metric projection both use the polar factor
/// `Y (YᵀY)^{-1/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StiefelManifold {
    n: usize,
    p: usize,
}

/// Re-orthonormalize when `‖XᵀX − I‖_F` exceeds this after a retraction.
const DRIFT_TOL: f64 = 1e-8;
const POLISH_TOL: f64 = 1e-14;

impl StiefelManifold {
    pub fn new(n: usize, p: usize) -> Self {
        assert!(p >= 1 && p <= n, "Stiefel manifold needs 1 ≤ p ≤ n");
        Self { n, p }
    }

    fn orthonormality_defect(x: &Mat) -> f64 {
        let mut g = x.tr_mul(x);
        for i in 0..g.nrows() {
            g[(i, i)] -= 1.0;
        }
        g.norm()
    }

    fn polar(&self, y: &Mat) -> Result<Mat> {
        let gram = y.tr_mul(y);
        let eig = SymmetricEigen::new(gram);
        let max = eig.eigenvalues.max();
        let min = eig.eigenvalues.min();
        if !(min > max * 1e-28 && min > 0.0 && max.is_finite()) {
            return Err(Error::DegenerateRetraction {
                manifold: self.name(),
                detail: format!("rank-deficient frame (Gram eigenvalues in [{min:.3e}, {max:.3e}])"),
            });
        }
        let inv_sqrt = eig.eigenvalues.map(|l| 1.0 / l.sqrt());
        let q = &eig.eigenvectors;
        let w = q * Mat::from_diagonal(&inv_sqrt) * q.transpose();
        Ok(y * w)
    }
}

impl Manifold for StiefelManifold {
    fn name(&self) -> &'static str {
        "stiefel"
    }

    fn shape(&self) -> (usize, usize) {
        (self.n, self.p)
    }

    fn dim(&self) -> usize {
        self.n * self.p - self.p * (self.p + 1) / 2
    }

    fn feasibility_residual(&self, x: &Mat) -> f64 {
        Self::orthonormality_defect(x)
    }

    fn feasibility_tol(&self) -> f64 {
        1e-10
    }

    fn tangency_residual(&self, x: &Mat, xi: &Mat) -> f64 {
        sym(&x.tr_mul(xi)).norm()
    }

    fn proj(&self, x: &Mat, u: &Mat) -> Mat {
        let s = sym(&x.tr_mul(u));
        u - x * s
    }

    fn retr(&self, x: &Mat, xi: &Mat) -> Result<Mat> {
        let mut y = self.polar(&(x + xi))?;
        if Self::orthonormality_defect(&y) > DRIFT_TOL {
            y = self.polar(&y)?;
        }
        Ok(y)
    }

    /// With `XᵀX = I` and `Xᵀξ + ξᵀX = 0`: `R_X(ξ) − X = ξ(I + E) + XE`,
    /// `E = (I + ξᵀξ)^{-1/2} − I`.
    fn retraction_displacement(&self, x: &Mat, xi: &Mat) -> Result<Mat> {
        let eig = SymmetricEigen::new(xi.tr_mul(xi));
        let q = &eig.eigenvectors;
        let e = q * Mat::from_diagonal(&eig.eigenvalues.map(|mu| super::inv_sqrt_one_plus_minus_one(mu.max(0.0)))) * q.transpose();
        Ok(xi + xi * &e + x * e)
    }

    fn weingarten_unchecked(&self, x: &Mat, xi: &Mat, v: &Mat) -> Mat {
        // −ξ sym(XᵀV) − X sym(ξᵀV), projected; the X-term lies in the normal space.
        let s = sym(&x.tr_mul(v));
        let w = -(xi * s);
        self.proj(x, &w)
    }

    fn project_point(&self, y: &Mat) -> Result<Mat> {
        let x = self.polar(y)?;
        // An ill-conditioned `y` loses orthonormality like cond(y)²·ε; one more pass restores it.
        if Self::orthonormality_defect(&x) > POLISH_TOL {
            return self.polar(&x);
        }
        Ok(x)
    }

    fn random_point(&self, rng: &mut dyn RngCore) -> Mat {
        loop {
            if let Ok(x) = self.project_point(&gaussian(rng, self.n, self.p)) {
                return x;
            }
        }
    }
}
