//! Benchmark harness for the `arnt` solvers.
//!
//! A JSON config names problem instances and solvers; [`run_command`] solves
//! every pair, writes `results.csv`, a Markdown table and optional JSONL
//! traces. [`check_command`] runs the derivative and geometry diagnostics on
//! the configured instances instead.

pub mod config;
pub mod instance;
pub mod output;
pub mod runner;

use std::path::{Path, PathBuf};

use arnt::diagnostics::{check_geometry, check_gradient, check_hess_vec, FdConfig};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use config::{Plan, RunConfig, SolverKind};
pub use output::{ResultRow, TraceLine};
pub use runner::{run_plan, Outcome, RunKey};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

#[derive(Debug)]
pub struct RunSummary {
    pub rows: Vec<ResultRow>,
    pub outcomes: Vec<Outcome>,
    pub out_dir: PathBuf,
    /// Solver runs that ended in an error rather than a status.
    pub failures: usize,
}

/// `bench run`.
pub fn run_command(config: &Path, out: Option<PathBuf>, jobs: Option<usize>, trace: bool) -> Result<RunSummary, CliError> {
    let plan = config::load(config)?;
    let out_dir = out.unwrap_or_else(|| plan.output.dir.clone());
    let trace = trace || plan.output.trace;
    let outcomes = run_plan(&plan, runner::worker_count(jobs), None)?;

    std::fs::create_dir_all(&out_dir).map_err(|e| CliError::Runtime(format!("{}: {e}", out_dir.display())))?;
    let rows: Vec<ResultRow> = outcomes.iter().map(ResultRow::from_outcome).collect();
    output::write_csv(&out_dir.join("results.csv"), &rows)?;
    let md = output::markdown(&rows);
    std::fs::write(out_dir.join("results.md"), &md).map_err(|e| CliError::Runtime(format!("results.md: {e}")))?;
    if trace {
        let dir = out_dir.join("traces");
        std::fs::create_dir_all(&dir).map_err(|e| CliError::Runtime(format!("{}: {e}", dir.display())))?;
        for o in &outcomes {
            output::write_trace(&output::trace_path(&dir, o), o)?;
        }
    }
    let failures = outcomes.iter().filter(|o| o.result.is_err()).count();
    Ok(RunSummary {
        rows,
        outcomes,
        out_dir,
        failures,
    })
}

/// One line of `bench check` output.
#[derive(Debug, Clone)]
pub struct CheckLine {
    pub problem: String,
    pub check: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// `bench check`: geometry suite on the manifold and gradient and
/// Hessian-vector checks at three random feasible points per problem.
pub fn check_command(config: &Path) -> Result<Vec<CheckLine>, CliError> {
    let plan = config::load(config)?;
    let mut lines = Vec::new();
    for (pi, p) in plan.problems.iter().enumerate() {
        let rt = |e: arnt::Error| CliError::Runtime(format!("problem {}: {e}", p.name));
        let inst = instance::build(&p.instance, &p.options).map_err(rt)?;
        let m = inst.manifold.as_ref();
        let geo = check_geometry(m, 10, pi as u64).map_err(rt)?;
        lines.push(CheckLine {
            problem: p.name.clone(),
            check: format!("geometry/{}", geo.manifold),
            value: geo.tangency_max.max(geo.idempotence_max).max(geo.self_adjoint_max).max(geo.displacement_max),
            tolerance: arnt::diagnostics::PROJECTION_TOL,
            passed: geo.passed,
        });
        let mut rng = ChaCha8Rng::seed_from_u64(pi as u64);
        for point in 0..3u64 {
            let x = m.random_point(&mut rng);
            let probe_seed = rng.next_u64();
            for (kind, cfg) in [("gradient", FdConfig::gradient()), ("hess_vec", FdConfig::hessian())] {
                let cfg = FdConfig { seed: probe_seed, ..cfg };
                let rep = if kind == "gradient" {
                    check_gradient(inst.objective.as_ref(), m, &x, cfg)
                } else {
                    check_hess_vec(inst.objective.as_ref(), m, &x, cfg)
                }
                .map_err(rt)?;
                lines.push(CheckLine {
                    problem: p.name.clone(),
                    check: format!("{kind}@{point}"),
                    value: rep.euclidean_max_rel_err.max(rep.riemannian_max_rel_err),
                    tolerance: rep.tolerance,
                    passed: rep.passed,
                });
            }
        }
    }
    Ok(lines)
}
