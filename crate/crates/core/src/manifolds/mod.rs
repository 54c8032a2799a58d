//! Embedded submanifolds of `ℝ^{n×p}` with the restricted Euclidean metric.
//!
//! Every manifold supplies the orthogonal tangent projector `P_x`, a
//! retraction, the metric projection onto the manifold, and the Weingarten
//! map. Together these turn Euclidean derivatives into Riemannian ones:
//!
//! ```text
//! grad f(x)    = P_x(∇f(x))
//! Hess f(x)[ξ] = P_x(∇²f(x)[ξ]) + 𝔚_x(ξ, P⊥_x ∇f(x))
//! ```
//!
//! Methods without a suffix validate their inputs; the `*_unchecked` style
//! primitives (`proj`, `retr`, `weingarten_unchecked`) are for solver inner
//! loops that already hold a feasible point.

mod euclidean;
mod oblique;
mod sphere;
mod stiefel;

pub use euclidean::EuclideanManifold;
pub use oblique::ObliqueManifold;
pub use sphere::SphereManifold;
pub use stiefel::StiefelManifold;

use rand::RngCore;

use crate::error::{Error, Result};
use crate::mat::{check_shape, inner, Mat};

/// Tangent vectors whose tangency residual exceeds this (relative to their
/// norm) are projected before retraction.
pub const RETRACT_TANGENT_TOL: f64 = 1e-8;

/// Normal-space tolerance enforced by [`Manifold::weingarten`].
pub const NORMAL_TOL: f64 = 1e-8;

pub trait Manifold: Send + Sync + std::fmt::Debug {
    fn name(&self) -> &'static str;

    /// Ambient shape `(rows, cols)` of points and tangent vectors.
    fn shape(&self) -> (usize, usize);

    /// Intrinsic dimension.
    fn dim(&self) -> usize;

    /// Distance-like measure of how far `x` is from the manifold.
    fn feasibility_residual(&self, x: &Mat) -> f64;

    fn feasibility_tol(&self) -> f64;

    /// Violation of the tangent-space equations by `xi` at `x`.
    fn tangency_residual(&self, x: &Mat, xi: &Mat) -> f64;

    /// Orthogonal projection onto `T_x M`.
    fn proj(&self, x: &Mat, u: &Mat) -> Mat;

    /// Retraction for a tangent `xi`; the result is feasible.
    fn retr(&self, x: &Mat, xi: &Mat) -> Result<Mat>;

    /// `R_x(ξ) − x` for a tangent `ξ`. Overrides avoid the cancellation of
    /// the explicit difference, which matters when `∇f` has a large normal part.
    fn retraction_displacement(&self, x: &Mat, xi: &Mat) -> Result<Mat> {
        Ok(self.retr(x, xi)? - x)
    }

    /// `𝔚_x(ξ, v)` for `v` in the normal space at `x`.
    fn weingarten_unchecked(&self, x: &Mat, xi: &Mat, v: &Mat) -> Mat;

    /// Nearest point on the manifold (metric projection `P_M`).
    fn project_point(&self, y: &Mat) -> Result<Mat>;

    fn random_point(&self, rng: &mut dyn RngCore) -> Mat;

    fn random_tangent(&self, x: &Mat, rng: &mut dyn RngCore) -> Mat {
        let (r, c) = self.shape();
        // A draw almost entirely in the normal space projects to rounding noise.
        for _ in 0..8 {
            let u = crate::mat::gaussian(rng, r, c);
            let t = self.proj(x, &u);
            let n = t.norm();
            if n > 1e-8 * u.norm() {
                return t / n;
            }
        }
        Mat::zeros(r, c)
    }

    fn check_point(&self, x: &Mat) -> Result<()> {
        check_shape(self.shape(), x)?;
        let residual = self.feasibility_residual(x);
        if !(residual <= self.feasibility_tol()) {
            return Err(Error::Infeasible {
                manifold: self.name(),
                residual,
            });
        }
        Ok(())
    }

    fn project_tangent(&self, x: &Mat, u: &Mat) -> Result<Mat> {
        self.check_point(x)?;
        check_shape(self.shape(), u)?;
        Ok(self.proj(x, u))
    }

    fn retract(&self, x: &Mat, xi: &Mat) -> Result<Mat> {
        self.check_point(x)?;
        check_shape(self.shape(), xi)?;
        let projected;
        let xi = if self.tangency_residual(x, xi) > RETRACT_TANGENT_TOL * xi.norm().max(1.0) {
            projected = self.proj(x, xi);
            &projected
        } else {
            xi
        };
        if xi.iter().all(|v| *v == 0.0) {
            return Ok(x.clone());
        }
        self.retr(x, xi)
    }

    fn riemannian_grad(&self, x: &Mat, egrad: &Mat) -> Result<Mat> {
        self.project_tangent(x, egrad)
    }

    fn weingarten(&self, x: &Mat, xi: &Mat, v_normal: &Mat) -> Result<Mat> {
        self.check_point(x)?;
        check_shape(self.shape(), xi)?;
        check_shape(self.shape(), v_normal)?;
        let tangential = self.proj(x, v_normal).norm();
        if tangential > NORMAL_TOL * v_normal.norm() {
            return Err(Error::Contract(format!(
                "Weingarten argument has tangential component {tangential:.3e}"
            )));
        }
        Ok(self.weingarten_unchecked(x, xi, v_normal))
    }

    /// `P⊥_x u = u − P_x u`.
    fn normal_part(&self, x: &Mat, u: &Mat) -> Mat {
        u - self.proj(x, u)
    }

    /// Riemannian Hessian of `f + σ/2 ‖· − x‖²` applied to a tangent `xi`,
    /// given the Euclidean Hessian oracle and gradient at `x`.
    fn riemannian_hess_vec(
        &self,
        x: &Mat,
        hess: &dyn Fn(&Mat) -> Mat,
        egrad: &Mat,
        xi: &Mat,
        sigma: f64,
    ) -> Result<Mat> {
        self.check_point(x)?;
        check_shape(self.shape(), xi)?;
        check_shape(self.shape(), egrad)?;
        let normal = self.normal_part(x, egrad);
        Ok(self.hess_with_normal(x, &hess(xi), &normal, xi, sigma))
    }

    /// Hot-path form of [`Manifold::riemannian_hess_vec`]: `ambient_hv` is
    /// `∇²f(x)[ξ]` and `normal` is `P⊥_x ∇f(x)`, both precomputed. `xi` must
    /// be tangent; the Weingarten term does not remove a normal component.
    fn hess_with_normal(&self, x: &Mat, ambient_hv: &Mat, normal: &Mat, xi: &Mat, sigma: f64) -> Mat {
        let mut out = self.proj(x, ambient_hv);
        out += self.weingarten_unchecked(x, xi, normal);
        if sigma != 0.0 {
            out.zip_apply(xi, |o, v| *o += sigma * v);
        }
        out
    }

    /// Submanifold metric: the Frobenius inner product.
    fn metric_inner(&self, _x: &Mat, xi: &Mat, eta: &Mat) -> f64 {
        inner(xi, eta)
    }
}

/// `1/√(1+μ) − 1` without cancellation.
pub(crate) fn inv_sqrt_one_plus_minus_one(mu: f64) -> f64 {
    let s = (1.0 + mu).sqrt();
    -mu / (s * (1.0 + s))
}

/// Normalize every column of `y`, failing on a zero column.
pub(crate) fn normalize_columns(y: &Mat, manifold: &'static str) -> Result<Mat> {
    let mut out = y.clone();
    for (j, mut col) in out.column_iter_mut().enumerate() {
        let n = col.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::DegenerateRetraction {
                manifold,
                detail: format!("column {j} has norm {n}"),
            });
        }
        col /= n;
    }
    Ok(out)
}
