use crate::manifolds::Manifold;
use crate::mat::{inner, Mat};
use crate::objective::{HessOp, Objective};

/// Regularized second-order model anchored at `x`:
///
/// ```text
/// m(z) = ⟨∇f(x), z − x⟩ + ½⟨H[z − x], z − x⟩ + (σ/2)‖z − x‖²
/// ```
///
/// The model is Euclidean; the manifold enters through the Riemannian
/// Hessian at the anchor and the retraction used to generate trial points.
pub struct ModelState<'a, M: Manifold + ?Sized> {
    manifold: &'a M,
    x: Mat,
    egrad: Mat,
    rgrad: Mat,
    normal: Mat,
    hess: HessOp<'a>,
    sigma: f64,
}

impl<'a, M: Manifold + ?Sized> ModelState<'a, M> {
    /// Build the model at `x` with the objective's exact Hessian.
    pub fn new<O: Objective + ?Sized>(manifold: &'a M, obj: &'a O, x: &Mat, egrad: Mat, sigma: f64) -> Self {
        Self::from_parts(manifold, x.clone(), egrad, obj.hessian_at(x), sigma)
    }

    pub fn from_parts(manifold: &'a M, x: Mat, egrad: Mat, hess: HessOp<'a>, sigma: f64) -> Self {
        let rgrad = manifold.proj(&x, &egrad);
        let normal = &egrad - &rgrad;
        Self {
            manifold,
            x,
            egrad,
            rgrad,
            normal,
            hess,
            sigma,
        }
    }

    pub fn manifold(&self) -> &'a M {
        self.manifold
    }

    pub fn anchor(&self) -> &Mat {
        &self.x
    }

    pub fn egrad(&self) -> &Mat {
        &self.egrad
    }

    /// `grad m(x) = grad f(x)`.
    pub fn rgrad(&self) -> &Mat {
        &self.rgrad
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn set_sigma(&mut self, sigma: f64) {
        self.sigma = sigma;
    }

    pub fn model_eval(&self, z: &Mat) -> f64 {
        self.model_at_displacement(&(z - &self.x))
    }

    /// `m(x + d)`.
    pub fn model_at_displacement(&self, d: &Mat) -> f64 {
        let hd = (self.hess)(d);
        inner(&self.egrad, d) + 0.5 * inner(&hd, d) + 0.5 * self.sigma * inner(d, d)
    }

    /// `Hess m(x)[P_x ξ] = Hess f(x)[P_x ξ] + σ P_x ξ`. Projecting first keeps
    /// the operator symmetric on the ambient space, so rounding drift of CG
    /// vectors off the tangent space cannot show up as negative curvature.
    pub fn hess_vec(&self, xi: &Mat) -> Mat {
        let xi = self.manifold.proj(&self.x, xi);
        self.manifold
            .hess_with_normal(&self.x, &(self.hess)(&xi), &self.normal, &xi, self.sigma)
    }
}

impl<M: Manifold + ?Sized> Objective for ModelState<'_, M> {
    fn shape(&self) -> (usize, usize) {
        self.x.shape()
    }

    fn eval(&self, z: &Mat) -> f64 {
        self.model_eval(z)
    }

    fn euclid_grad(&self, z: &Mat) -> Mat {
        self.eval_grad(z).1
    }

    fn eval_grad(&self, z: &Mat) -> (f64, Mat) {
        let d = z - &self.x;
        let hd = (self.hess)(&d);
        let f = inner(&self.egrad, &d) + 0.5 * inner(&hd, &d) + 0.5 * self.sigma * inner(&d, &d);
        let mut g = &self.egrad + hd;
        g.zip_apply(&d, |gi, di| *gi += self.sigma * di);
        (f, g)
    }

    fn euclid_hess_vec(&self, _z: &Mat, v: &Mat) -> Mat {
        let mut out = (self.hess)(v);
        out.zip_apply(v, |o, vi| *o += self.sigma * vi);
        out
    }
}
