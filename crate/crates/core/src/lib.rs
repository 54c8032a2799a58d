//! Riemannian optimization on embedded matrix manifolds.
//!
//! The centerpiece is [`solvers::solve_arnt`], an adaptive regularized Newton
//! method: each outer step minimizes a Euclidean second-order model with a
//! proximal term `σ_k/2 ‖x − x_k‖²` over the manifold, using a modified
//! conjugate gradient method that exploits negative curvature. Companions are
//! a Barzilai-Borwein gradient method with nonmonotone curvilinear search
//! ([`solvers::solve_gbb`]), an Adagrad-style projected method, the TRQH
//! variant whose subproblem is solved by the gradient method, and a
//! Riemannian trust-region baseline ([`solvers::solve_rtr`]).

pub mod diagnostics;
pub mod error;
pub mod manifolds;
pub mod mat;
pub mod objective;
pub mod options;
pub mod problems;
pub mod report;
pub mod solvers;

pub use error::{Error, Result};
pub use manifolds::{EuclideanManifold, Manifold, ObliqueManifold, SphereManifold, StiefelManifold};
pub use mat::{fro_norm, frobenius_inner, Mat};
pub use objective::{HessOp, Objective};
pub use options::{BbVariant, CgResidualRule, InnerCap, SolverOptions, WarmStart};
pub use report::{IterRecord, SolverReport, Status};
