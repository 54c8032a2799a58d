use serde::{Deserialize, Serialize};

use crate::mat::Mat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Converged,
    MaxIters,
    LineSearchFailure,
    NumericalFailure,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Status::Converged => "Converged",
            Status::MaxIters => "MaxIters",
            Status::LineSearchFailure => "LineSearchFailure",
            Status::NumericalFailure => "NumericalFailure",
        };
        f.write_str(s)
    }
}

/// One outer iteration. `f` and `grad_norm` refer to the iterate *after* the step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct IterRecord {
    pub k: usize,
    pub f: f64,
    pub grad_norm: f64,
    /// Regularization σ_k used to build the model.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sigma: Option<f64>,
    /// Scale-free σ̂_k used at this iteration and the value handed to the next one.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sigma_hat: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sigma_hat_next: Option<f64>,
    /// Line-search step (gradient methods) or model step α_k (ARNT).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rho: Option<f64>,
    pub accepted: bool,
    pub inner_iters: usize,
    pub negative_curvature: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sigma_est: Option<f64>,
    /// Nonmonotone reference value `C_{k+1}` and weight `Q_{k+1}`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ref_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ref_weight: Option<f64>,
    /// `C_k + ρ t ⟨grad f, η⟩ − f(x_{k+1})`, nonnegative for accepted steps.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub armijo_margin: Option<f64>,
    /// Trust-region radius used at this iteration.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub radius: Option<f64>,
    /// Cosine between the model gradient and the search direction.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub descent_cos: Option<f64>,
    /// Hash of the iterate after the step.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub fingerprint: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverReport {
    pub solver: String,
    pub status: Status,
    pub outer_iters: usize,
    pub mean_inner_iters: f64,
    pub final_f: f64,
    pub final_grad_norm: f64,
    pub wall_time: f64,
    /// Objective and gradient norm at the point the main loop started from
    /// (after any warm start).
    pub start_f: f64,
    pub start_grad_norm: f64,
    pub start_fingerprint: u64,
    pub warm_start_iters: usize,
    pub trace: Vec<IterRecord>,
    #[serde(skip)]
    pub x: Mat,
}

impl SolverReport {
    /// Gradient norms of the starting point followed by every accepted iterate.
    pub fn accepted_grad_norms(&self) -> Vec<f64> {
        std::iter::once(self.start_grad_norm)
            .chain(self.trace.iter().filter(|r| r.accepted).map(|r| r.grad_norm))
            .collect()
    }

    /// The trace with wall time removed, for determinism comparisons.
    pub fn deterministic_view(&self) -> (String, Status, usize, f64, f64, u64, &[IterRecord]) {
        (
            self.solver.clone(),
            self.status,
            self.outer_iters,
            self.final_f,
            self.final_grad_norm,
            self.start_fingerprint,
            &self.trace,
        )
    }
}

pub(crate) struct ReportBuilder {
    solver: &'static str,
    start: std::time::Instant,
    start_f: f64,
    start_grad_norm: f64,
    start_fingerprint: u64,
    warm_start_iters: usize,
    trace: Vec<IterRecord>,
}

impl ReportBuilder {
    pub fn new(solver: &'static str, start: std::time::Instant, x: &Mat, f: f64, g: f64) -> Self {
        Self {
            solver,
            start,
            start_f: f,
            start_grad_norm: g,
            start_fingerprint: crate::mat::fingerprint(x),
            warm_start_iters: 0,
            trace: Vec::new(),
        }
    }

    pub fn warm_start_iters(mut self, n: usize) -> Self {
        self.warm_start_iters = n;
        self
    }

    pub fn push(&mut self, r: IterRecord) {
        self.trace.push(r);
    }

    pub fn finish(self, status: Status, x: Mat, f: f64, g: f64) -> SolverReport {
        let outer = self.trace.len();
        let inner: usize = self.trace.iter().map(|r| r.inner_iters).sum();
        SolverReport {
            solver: self.solver.to_string(),
            status,
            outer_iters: outer,
            mean_inner_iters: if outer > 0 {
                inner as f64 / outer as f64
            } else {
                0.0
            },
            final_f: f,
            final_grad_norm: g,
            wall_time: self.start.elapsed().as_secs_f64(),
            start_f: self.start_f,
            start_grad_norm: self.start_grad_norm,
            start_fingerprint: self.start_fingerprint,
            warm_start_iters: self.warm_start_iters,
            trace: self.trace,
            x,
        }
    }
}
