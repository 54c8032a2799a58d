use rand::RngCore;

use super::oblique::{column_feasibility, column_tangency, displacement_columns, proj_columns, weingarten_columns};
use super::{normalize_columns, Manifold};
use crate::error::Result;
use crate::mat::{gaussian, Mat};

/// Unit sphere in `ℝⁿ`, stored as `n × 1` matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SphereManifold {
    n: usize,
}

impl SphereManifold {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "sphere needs n ≥ 1");
        Self { n }
    }
}

impl Manifold for SphereManifold {
    fn name(&self) -> &'static str {
        "sphere"
    }

    fn shape(&self) -> (usize, usize) {
        (self.n, 1)
    }

    fn dim(&self) -> usize {
        self.n - 1
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
            if let Ok(x) = normalize_columns(&gaussian(rng, self.n, 1), self.name()) {
                return x;
            }
        }
    }
}
