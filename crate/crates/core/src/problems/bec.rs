use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::operators::{GridHamiltonian, SymmetricOperator};
use crate::error::{Error, Result};
use crate::mat::{inner, Mat};
use crate::objective::{HessOp, Objective};

/// Half-width of the square domain `(−16, 16)²`.
pub const DOMAIN_HALF_WIDTH: f64 = 16.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Potential {
    /// Harmonic trap `½x² + ½y²`.
    V1,
    /// Double-well-like `−0.1(x² + y²) + 0.3((x² + y²)/2)²`.
    V2,
}

impl Potential {
    pub fn value(self, x: f64, y: f64) -> f64 {
        let r2 = x * x + y * y;
        match self {
            Potential::V1 => 0.5 * r2,
            Potential::V2 => -0.1 * r2 + 0.3 * (r2 / 2.0).powi(2),
        }
    }
}

/// Node coordinate along one axis of an `m`-point mesh on `(−L, L)`.
pub fn node(m: usize, i: usize) -> f64 {
    -DOMAIN_HALF_WIDTH + i as f64 * 2.0 * DOMAIN_HALF_WIDTH / (m - 1) as f64
}

/// `A = −½Δ_h + Diag(V)` on an `m × m` mesh.
pub fn build_potential_grid(kind: Potential, m: usize) -> Result<GridHamiltonian> {
    if m < 3 {
        return Err(Error::InvalidProblem("mesh needs m ≥ 3".into()));
    }
    let mut pot = Vec::with_capacity(m * m);
    for j in 0..m {
        for i in 0..m {
            pot.push(kind.value(node(m, i), node(m, j)));
        }
    }
    GridHamiltonian::new(m, DOMAIN_HALF_WIDTH, pot)
}

/// Real Bose-Einstein condensate energy without rotation:
/// `f(x) = ½xᵀAx + (β/2) Σ xⱼ⁴` on the unit sphere.
#[derive(Debug, Clone)]
pub struct BecProblem {
    a: Arc<dyn SymmetricOperator>,
    beta: f64,
}

impl BecProblem {
    pub fn new(a: Arc<dyn SymmetricOperator>, beta: f64) -> Result<Self> {
        if !beta.is_finite() {
            return Err(Error::InvalidProblem("beta must be finite".into()));
        }
        Ok(Self { a, beta })
    }

    pub fn on_grid(kind: Potential, m: usize, beta: f64) -> Result<Self> {
        Self::new(Arc::new(build_potential_grid(kind, m)?), beta)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

impl Objective for BecProblem {
    fn shape(&self) -> (usize, usize) {
        (self.a.dim(), 1)
    }

    fn eval(&self, x: &Mat) -> f64 {
        let quart: f64 = x.iter().map(|v| v.powi(4)).sum();
        0.5 * inner(x, &self.a.apply(x)) + 0.5 * self.beta * quart
    }

    fn euclid_grad(&self, x: &Mat) -> Mat {
        let mut g = self.a.apply(x);
        g.zip_apply(x, |gi, xi| *gi += 2.0 * self.beta * xi * xi * xi);
        g
    }

    fn eval_grad(&self, x: &Mat) -> (f64, Mat) {
        let ax = self.a.apply(x);
        let quart: f64 = x.iter().map(|v| v.powi(4)).sum();
        let f = 0.5 * inner(x, &ax) + 0.5 * self.beta * quart;
        let mut g = ax;
        g.zip_apply(x, |gi, xi| *gi += 2.0 * self.beta * xi * xi * xi);
        (f, g)
    }

    fn euclid_hess_vec(&self, x: &Mat, v: &Mat) -> Mat {
        let mut out = self.a.apply(v);
        for ((o, xi), vi) in out.iter_mut().zip(x.iter()).zip(v.iter()) {
            *o += 6.0 * self.beta * xi * xi * vi;
        }
        out
    }

    fn hessian_at<'a>(&'a self, x: &Mat) -> HessOp<'a> {
        let diag: Vec<f64> = x.iter().map(|xi| 6.0 * self.beta * xi * xi).collect();
        Box::new(move |v| {
            let mut out = self.a.apply(v);
            for ((o, d), vi) in out.iter_mut().zip(&diag).zip(v.iter()) {
                *o += d * vi;
            }
            out
        })
    }
}

/// `φ₁(x, y) = e^{−(x²+y²)/2}/√π` sampled on the mesh and normalized.
pub fn gaussian_initial(m: usize) -> Mat {
    let mut x = Mat::zeros(m * m, 1);
    for j in 0..m {
        for i in 0..m {
            let (a, b) = (node(m, i), node(m, j));
            x[(i + m * j, 0)] = (-(a * a + b * b) / 2.0).exp() / std::f64::consts::PI.sqrt();
        }
    }
    let n = x.norm();
    x / n
}

/// Bilinear interpolation of a mesh function from `m_coarse` to `m_fine`
/// nodes per axis, followed by normalization.
pub fn refine(coarse: &Mat, m_coarse: usize, m_fine: usize) -> Result<Mat> {
    if coarse.nrows() != m_coarse * m_coarse || coarse.ncols() != 1 {
        return Err(Error::Dimension {
            expected: (m_coarse * m_coarse, 1),
            got: coarse.shape(),
        });
    }
    if m_coarse < 2 || m_fine < 2 {
        return Err(Error::InvalidProblem("meshes need at least 2 nodes".into()));
    }
    let hc = 2.0 * DOMAIN_HALF_WIDTH / (m_coarse - 1) as f64;
    let locate = |t: f64| -> (usize, f64) {
        let s = ((t + DOMAIN_HALF_WIDTH) / hc).clamp(0.0, (m_coarse - 1) as f64);
        let i = (s.floor() as usize).min(m_coarse - 2);
        (i, s - i as f64)
    };
    let at = |i: usize, j: usize| coarse[(i + m_coarse * j, 0)];
    let mut out = Mat::zeros(m_fine * m_fine, 1);
    for j in 0..m_fine {
        let (jc, ty) = locate(node(m_fine, j));
        for i in 0..m_fine {
            let (ic, tx) = locate(node(m_fine, i));
            let v = (1.0 - tx) * (1.0 - ty) * at(ic, jc)
                + tx * (1.0 - ty) * at(ic + 1, jc)
                + (1.0 - tx) * ty * at(ic, jc + 1)
                + tx * ty * at(ic + 1, jc + 1);
            out[(i + m_fine * j, 0)] = v;
        }
    }
    let n = out.norm();
    if !(n > 0.0) {
        return Err(Error::Numerical("refined mesh function vanished".into()));
    }
    Ok(out / n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::operators::DenseSymmetric;

    #[test]
    fn potential_values() {
        let m = 65;
        assert_eq!(node(m, 32), 0.0);
        assert_eq!(node(m, 40), 4.0);
        let a = build_potential_grid(Potential::V1, m).unwrap();
        assert_eq!(a.potential()[32 + m * 32], 0.0);
        assert_eq!(a.potential()[40 + m * 32], 8.0);
        assert!((Potential::V2.value(2.0, 0.0) - (-0.4 + 0.3 * 4.0)).abs() < 1e-15);
    }

    #[test]
    fn quartic_examples() {
        let zero = Arc::new(DenseSymmetric::new(Mat::zeros(3, 3)).unwrap());
        let p = BecProblem::new(zero, 1.0).unwrap();
        let e1 = Mat::from_column_slice(3, 1, &[1.0, 0.0, 0.0]);
        assert_eq!(p.eval(&e1), 0.5);
        assert_eq!(p.euclid_grad(&e1), &e1 * 2.0);
        assert_eq!(p.euclid_hess_vec(&e1, &e1), &e1 * 6.0);
        assert_eq!(p.hessian_at(&e1)(&e1), &e1 * 6.0);
    }

    #[test]
    fn beta_zero_is_rayleigh() {
        use crate::problems::RayleighProblem;
        let a: Arc<dyn SymmetricOperator> = Arc::new(build_potential_grid(Potential::V2, 9).unwrap());
        let bec = BecProblem::new(a.clone(), 0.0).unwrap();
        let ray = RayleighProblem::new(a, 1);
        let x = gaussian_initial(9);
        assert!((bec.eval(&x) - ray.eval(&x)).abs() < 1e-14);
        assert!((bec.euclid_grad(&x) - ray.euclid_grad(&x)).norm() < 1e-14);
    }

    #[test]
    fn refinement_preserves_shared_nodes() {
        let c = gaussian_initial(17);
        let f = refine(&c, 17, 33).unwrap();
        assert!((f.norm() - 1.0).abs() < 1e-14);
        // Even fine nodes coincide with coarse nodes, up to the common normalization.
        let scale = f[(2 * 3 + 33 * 2 * 5, 0)] / c[(3 + 17 * 5, 0)];
        for (ic, jc) in [(8, 8), (7, 9), (10, 4)] {
            let r = f[(2 * ic + 33 * 2 * jc, 0)] / c[(ic + 17 * jc, 0)];
            assert!((r - scale).abs() < 1e-12 * scale);
        }
    }
}
