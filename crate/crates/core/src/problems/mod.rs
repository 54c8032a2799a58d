//! Objective oracles for the shipped test problems.

pub mod bec;
pub mod mtx;
pub mod ncm;
pub mod nleig;
pub mod operators;
mod rayleigh;

pub use bec::{BecProblem, Potential};
pub use ncm::{NearestCorrelationProblem, Weights};
pub use nleig::NonlinearEigenProblem;
pub use operators::{DenseSymmetric, GridHamiltonian, SymmetricOperator, Tridiagonal};
pub use rayleigh::RayleighProblem;
