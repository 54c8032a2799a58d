use rand::RngCore;

use super::{normalize_columns, Manifold};
use crate::error::Result;
use crate::mat::{gaussian, Mat};

/// Matrices in `ℝ^{p×n}` whose `n` columns each have unit Euclidean norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ObliqueManifold {
    rows: usize,
    cols: usize,
}

impl ObliqueManifold {
    /// `rows` is the column length `p`, `cols` the number of unit columns `n`.
    pub fn new(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "oblique manifold needs rows, cols ≥ 1");
        Self { rows, cols }
    }
}

/// Columnwise `u_j − (x_jᵀ u_j) x_j`.
pub(crate) fn proj_columns(x: &Mat, u: &Mat) -> Mat {
    let mut out = u.clone();
    for (j, mut col) in out.column_iter_mut().enumerate() {
        let xj = x.column(j);
        let c = xj.dot(&col);
        col.axpy(-c, &xj, 1.0);
    }
    out
}

/// Columnwise `−(x_jᵀ v_j) ξ_j`.
pub(crate) fn weingarten_columns(x: &Mat, xi: &Mat, v: &Mat) -> Mat {
    let mut out = xi.clone();
    for (j, mut col) in out.column_iter_mut().enumerate() {
        let c = x.column(j).dot(&v.column(j));
        col *= -c;
    }
    out
}

/// `(x_j + ξ_j)/‖x_j + ξ_j‖ − x_j` per column, for `ξ_j ⟂ x_j`.
pub(crate) fn displacement_columns(x: &Mat, xi: &Mat) -> Mat {
    let mut out = xi.clone();
    for (j, mut col) in out.column_iter_mut().enumerate() {
        let mu = xi.column(j).norm_squared();
        let c1 = super::inv_sqrt_one_plus_minus_one(mu);
        col *= 1.0 + c1;
        col.axpy(c1, &x.column(j), 1.0);
    }
    out
}

pub(crate) fn column_feasibility(x: &Mat) -> f64 {
    x.column_iter()
        .map(|c| (c.norm() - 1.0).abs())
        .fold(0.0, f64::max)
}

pub(crate) fn column_tangency(x: &Mat, xi: &Mat) -> f64 {
    x.column_iter()
        .zip(xi.column_iter())
        .map(|(a, b)| a.dot(&b).abs())
        .fold(0.0, f64::max)
}

impl Manifold for ObliqueManifold {
    fn name(&self) -> &'static str {
        "oblique"
    }

    fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    fn dim(&self) -> usize {
        self.cols * (self.rows - 1)
    }

    fn feasibility_residual(&self, x: &Mat) -> f64 {
        column_feasibility(x)
    }

    fn feasibility_tol(&self) -> f64 {
        1e-12
    }

    fn tangency_residual(&self, x: &Mat, xi: &Mat) -> f64 {
        column_tangency(x, xi)
    }

    fn proj(&self, x: &Mat, u: &Mat) -> Mat {
        proj_columns(x, u)
    }

    fn retr(&self, x: &Mat, xi: &Mat) -> Result<Mat> {
        normalize_columns(&(x + xi), self.name())
    }

    fn retraction_displacement(&self, x: &Mat, xi: &Mat) -> Result<Mat> {
        Ok(displacement_columns(x, xi))
    }

    fn weingarten_unchecked(&self, x: &Mat, xi: &Mat, v: &Mat) -> Mat {
        weingarten_columns(x, xi, v)
    }

    fn project_point(&self, y: &Mat) -> Result<Mat> {
        normalize_columns(y, self.name())
    }

    fn random_point(&self, rng: &mut dyn RngCore) -> Mat {
        loop {
            if let Ok(x) = normalize_columns(&gaussian(rng, self.rows, self.cols), self.name()) {
                return x;
            }
        }
    }
}
