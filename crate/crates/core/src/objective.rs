use crate::mat::Mat;

/// Euclidean Hessian action frozen at a point.
pub type HessOp<'a> = Box<dyn Fn(&Mat) -> Mat + 'a>;

/// Smooth objective on the ambient space `ℝ^{n×p}`.
///
/// All derivative information is Euclidean; the manifold layer turns it into
/// Riemannian quantities. The Hessian is only ever applied to vectors.
pub trait Objective {
    /// Ambient shape of the argument.
    fn shape(&self) -> (usize, usize);

    fn eval(&self, x: &Mat) -> f64;

    fn euclid_grad(&self, x: &Mat) -> Mat;

    fn euclid_hess_vec(&self, x: &Mat, v: &Mat) -> Mat;

    /// Value and gradient together; override when they share work.
    fn eval_grad(&self, x: &Mat) -> (f64, Mat) {
        (self.eval(x), self.euclid_grad(x))
    }

    /// Hessian-vector oracle at a fixed `x`. Implementations may precompute
    /// whatever depends on `x` only.
    fn hessian_at<'a>(&'a self, x: &Mat) -> HessOp<'a> {
        let x = x.clone();
        Box::new(move |v| self.euclid_hess_vec(&x, v))
    }
}

impl<T: Objective + ?Sized> Objective for &T {
    fn shape(&self) -> (usize, usize) {
        (**self).shape()
    }
    fn eval(&self, x: &Mat) -> f64 {
        (**self).eval(x)
    }
    fn euclid_grad(&self, x: &Mat) -> Mat {
        (**self).euclid_grad(x)
    }
    fn euclid_hess_vec(&self, x: &Mat, v: &Mat) -> Mat {
        (**self).euclid_hess_vec(x, v)
    }
    fn eval_grad(&self, x: &Mat) -> (f64, Mat) {
        (**self).eval_grad(x)
    }
    fn hessian_at<'a>(&'a self, x: &Mat) -> HessOp<'a> {
        (**self).hessian_at(x)
    }
}

impl<T: Objective + ?Sized> Objective for Box<T> {
    fn shape(&self) -> (usize, usize) {
        (**self).shape()
    }
    fn eval(&self, x: &Mat) -> f64 {
        (**self).eval(x)
    }
    fn euclid_grad(&self, x: &Mat) -> Mat {
        (**self).euclid_grad(x)
    }
    fn euclid_hess_vec(&self, x: &Mat, v: &Mat) -> Mat {
        (**self).euclid_hess_vec(x, v)
    }
    fn eval_grad(&self, x: &Mat) -> (f64, Mat) {
        (**self).eval_grad(x)
    }
    fn hessian_at<'a>(&'a self, x: &Mat) -> HessOp<'a> {
        (**self).hessian_at(x)
    }
}
