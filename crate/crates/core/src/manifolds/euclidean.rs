use rand::RngCore;

use super::Manifold;
use crate::error::Result;
use crate::mat::{gaussian, Mat};

/// All of `ℝ^{n×p}`: identity projection, additive retraction, no curvature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EuclideanManifold {
    rows: usize,
    cols: usize,
}

impl EuclideanManifold {
    pub fn new(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1);
        Self { rows, cols }
    }
}

impl Manifold for EuclideanManifold {
    fn name(&self) -> &'static str {
        "euclidean"
    }

    fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    fn dim(&self) -> usize {
        self.rows * self.cols
    }

    fn feasibility_residual(&self, x: &Mat) -> f64 {
        if x.iter().all(|v| v.is_finite()) {
            0.0
        } else {
            f64::INFINITY
        }
    }

    fn feasibility_tol(&self) -> f64 {
        0.0
    }

    fn tangency_residual(&self, _x: &Mat, _xi: &Mat) -> f64 {
        0.0
    }

    fn proj(&self, _x: &Mat, u: &Mat) -> Mat {
        u.clone()
    }

    fn retr(&self, x: &Mat, xi: &Mat) -> Result<Mat> {
        Ok(x + xi)
    }

    fn retraction_displacement(&self, _x: &Mat, xi: &Mat) -> Result<Mat> {
        Ok(xi.clone())
    }

    fn weingarten_unchecked(&self, _x: &Mat, xi: &Mat, _v: &Mat) -> Mat {
        Mat::zeros(xi.nrows(), xi.ncols())
    }

    fn project_point(&self, y: &Mat) -> Result<Mat> {
        Ok(y.clone())
    }

    fn random_point(&self, rng: &mut dyn RngCore) -> Mat {
        gaussian(rng, self.rows, self.cols)
    }
}
