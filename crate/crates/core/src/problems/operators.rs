//! Symmetric linear operators on `ℝⁿ`, applied columnwise to `n × p` blocks.

use crate::error::{Error, Result};
use crate::mat::Mat;

pub trait SymmetricOperator: Send + Sync + std::fmt::Debug {
    fn dim(&self) -> usize;

    /// `A · X` for an `n × p` block `X`.
    fn apply(&self, x: &Mat) -> Mat;

    /// Dense copy, for small-problem oracles.
    fn to_dense(&self) -> Mat {
        let n = self.dim();
        self.apply(&Mat::identity(n, n))
    }
}

#[derive(Debug, Clone)]
pub struct DenseSymmetric {
    a: Mat,
}

impl DenseSymmetric {
    pub fn new(a: Mat) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::InvalidProblem("operator must be square".into()));
        }
        let asym = (&a - a.transpose()).norm();
        if asym > 1e-12 * a.norm().max(1.0) {
            return Err(Error::InvalidProblem(format!(
                "operator is not symmetric (‖A − Aᵀ‖ = {asym:.3e})"
            )));
        }
        Ok(Self { a })
    }

    pub fn diagonal(values: &[f64]) -> Self {
        Self {
            a: Mat::from_diagonal(&nalgebra::DVector::from_column_slice(values)),
        }
    }

    pub fn matrix(&self) -> &Mat {
        &self.a
    }
}

impl SymmetricOperator for DenseSymmetric {
    fn dim(&self) -> usize {
        self.a.nrows()
    }

    fn apply(&self, x: &Mat) -> Mat {
        &self.a * x
    }

    fn to_dense(&self) -> Mat {
        self.a.clone()
    }
}

/// Symmetric tridiagonal matrix with constant diagonal `d` and off-diagonal `e`.
///
/// The default `(2, −1)` is the 1-D Dirichlet Laplacian stencil, which is
/// positive definite, so [`Tridiagonal::solve`] is a plain LDLᵀ sweep.
#[derive(Debug, Clone)]
pub struct Tridiagonal {
    n: usize,
    diag: f64,
    off: f64,
    // LDLᵀ factors: pivots d_i and multipliers l_i.
    pivots: Vec<f64>,
    mults: Vec<f64>,
}

impl Tridiagonal {
    pub fn new(n: usize, diag: f64, off: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidProblem("tridiagonal operator needs n ≥ 1".into()));
        }
        let mut pivots = Vec::with_capacity(n);
        let mut mults = Vec::with_capacity(n.saturating_sub(1));
        pivots.push(diag);
        for i in 1..n {
            let prev = pivots[i - 1];
            if prev.abs() < 1e-300 {
                return Err(Error::Numerical(format!(
                    "zero pivot at row {} of tridiagonal factorization",
                    i - 1
                )));
            }
            let l = off / prev;
            mults.push(l);
            pivots.push(diag - l * off);
        }
        if pivots[n - 1].abs() < 1e-300 {
            return Err(Error::Numerical("singular tridiagonal operator".into()));
        }
        Ok(Self {
            n,
            diag,
            off,
            pivots,
            mults,
        })
    }

    /// The `(2, −1)` Laplacian.
    pub fn laplacian(n: usize) -> Self {
        Self::new(n, 2.0, -1.0).expect("1-D Dirichlet Laplacian is nonsingular")
    }

    /// Eigenvalues in increasing order (closed form for the constant stencil).
    pub fn eigenvalues(&self) -> Vec<f64> {
        let n = self.n as f64;
        let mut ev: Vec<f64> = (1..=self.n)
            .map(|k| self.diag + 2.0 * self.off * (k as f64 * std::f64::consts::PI / (n + 1.0)).cos())
            .collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    /// Solve `A y = b` for a vector `b`.
    pub fn solve_vec(&self, b: &[f64]) -> Vec<f64> {
        debug_assert_eq!(b.len(), self.n);
        let mut y = b.to_vec();
        for i in 1..self.n {
            y[i] -= self.mults[i - 1] * y[i - 1];
        }
        for (yi, p) in y.iter_mut().zip(&self.pivots) {
            *yi /= p;
        }
        for i in (0..self.n - 1).rev() {
            y[i] -= self.mults[i] * y[i + 1];
        }
        y
    }
}

impl SymmetricOperator for Tridiagonal {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &Mat) -> Mat {
        let n = self.n;
        let mut out = Mat::zeros(n, x.ncols());
        for j in 0..x.ncols() {
            let xc = x.column(j);
            let mut oc = out.column_mut(j);
            for i in 0..n {
                let mut v = self.diag * xc[i];
                if i > 0 {
                    v += self.off * xc[i - 1];
                }
                if i + 1 < n {
                    v += self.off * xc[i + 1];
                }
                oc[i] = v;
            }
        }
        out
    }
}

/// `−½Δ_h + diag(V)` on an `m × m` grid with homogeneous Dirichlet closure.
///
/// Unknowns sit on every node `(−L + i h, −L + j h)`, `h = 2L/(m − 1)`;
/// neighbours outside the grid are zero. Node `(i, j)` has linear index
/// `i + m j`.
#[derive(Debug, Clone)]
pub struct GridHamiltonian {
    m: usize,
    h: f64,
    potential: Vec<f64>,
}

impl GridHamiltonian {
    pub fn new(m: usize, half_width: f64, potential: Vec<f64>) -> Result<Self> {
        if m < 3 {
            return Err(Error::InvalidProblem("grid needs m ≥ 3".into()));
        }
        if potential.len() != m * m {
            return Err(Error::InvalidProblem("potential length must be m²".into()));
        }
        Ok(Self {
            m,
            h: 2.0 * half_width / (m - 1) as f64,
            potential,
        })
    }

    pub fn mesh(&self) -> usize {
        self.m
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }
}

impl SymmetricOperator for GridHamiltonian {
    fn dim(&self) -> usize {
        self.m * self.m
    }

    fn apply(&self, x: &Mat) -> Mat {
        let m = self.m;
        let c = 0.5 / (self.h * self.h);
        let mut out = Mat::zeros(m * m, x.ncols());
        for col in 0..x.ncols() {
            let xc = x.column(col);
            let mut oc = out.column_mut(col);
            for j in 0..m {
                for i in 0..m {
                    let k = i + m * j;
                    let mut nb = 0.0;
                    if i > 0 {
                        nb += xc[k - 1];
                    }
                    if i + 1 < m {
                        nb += xc[k + 1];
                    }
                    if j > 0 {
                        nb += xc[k - m];
                    }
                    if j + 1 < m {
                        nb += xc[k + m];
                    }
                    oc[k] = c * (4.0 * xc[k] - nb) + self.potential[k] * xc[k];
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn symmetry_gap(op: &dyn SymmetricOperator, seed: u64) -> f64 {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = op.dim();
        let u = crate::mat::unit_gaussian(&mut rng, n, 1);
        let v = crate::mat::unit_gaussian(&mut rng, n, 1);
        (u.dot(&op.apply(&v)) - v.dot(&op.apply(&u))).abs()
    }

    #[test]
    fn tridiagonal_solve_inverts_apply() {
        let t = Tridiagonal::laplacian(50);
        let b: Vec<f64> = (0..50).map(|i| (i as f64).sin()).collect();
        let y = t.solve_vec(&b);
        let back = t.apply(&Mat::from_column_slice(50, 1, &y));
        for (a, b) in back.iter().zip(&b) {
            assert!((a - b).abs() < 1e-11);
        }
    }

    #[test]
    fn tridiagonal_eigenvalues_match_dense() {
        let t = Tridiagonal::laplacian(12);
        let dense = nalgebra::SymmetricEigen::new(t.to_dense());
        let mut ev: Vec<f64> = dense.eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        for (a, b) in ev.iter().zip(t.eigenvalues()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn operators_are_symmetric() {
        assert!(symmetry_gap(&Tridiagonal::laplacian(30), 1) <= 1e-12);
        let m = 9;
        let pot: Vec<f64> = (0..m * m).map(|k| (k % 7) as f64).collect();
        let g = GridHamiltonian::new(m, 16.0, pot).unwrap();
        assert!(symmetry_gap(&g, 2) <= 1e-12);
    }

    #[test]
    fn dense_rejects_asymmetric() {
        let a = Mat::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(DenseSymmetric::new(a).is_err());
    }
}
