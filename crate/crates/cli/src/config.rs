//! Run configuration: a single JSON file naming problem instances, the
//! solvers to run on each, option overrides and output settings.
//!
//! ```json
//! {
//!   "problems": [
//!     { "name": "ncm-500-p5", "instance": { "kind": "ncm", "n": 500, "p": 5, "seed": 1 } }
//!   ],
//!   "solvers": ["ARNT", "RTR", { "solver": "GBB", "options": { "gbb_max_iter": 20000 } }],
//!   "options": { "grad_tol": 1e-6 },
//!   "repetitions": 1,
//!   "output": { "dir": "results", "trace": false }
//! }
//! ```
//!
//! Options merge field by field: global, then per problem, then per solver.

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};

use arnt::SolverOptions;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SolverKind {
    Arnt,
    Rtr,
    Gbb,
    Trqh,
    Adagrad,
}

impl SolverKind {
    pub fn label(self) -> &'static str {
        match self {
            SolverKind::Arnt => "ARNT",
            SolverKind::Rtr => "RTR",
            SolverKind::Gbb => "GBB",
            SolverKind::Trqh => "TRQH",
            SolverKind::Adagrad => "ADAGRAD",
        }
    }

    /// Solvers that start from the shared GBB warm-start point.
    pub fn uses_warm_start(self) -> bool {
        matches!(self, SolverKind::Arnt | SolverKind::Rtr | SolverKind::Trqh)
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RayleighManifold {
    #[default]
    Sphere,
    Stiefel,
    Euclidean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Spectrum {
    /// `diag(1, 2, …, n)`.
    #[default]
    Linear,
    /// `(B + Bᵀ)/2` for a seeded standard normal `B`.
    Random,
    /// The tridiagonal `[−1, 2, −1]` matrix.
    Laplacian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum NcmWeights {
    #[default]
    Ones,
    /// Uniform in [0.1, 10] with `outliers` entries in [0.01, 100].
    Random { outliers: usize },
    /// MatrixMarket file, relative to the config file.
    File { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    #[default]
    V1,
    V2,
}

fn one() -> usize {
    1
}

fn coarse_tol() -> f64 {
    1e-4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InstanceSpec {
    Rayleigh {
        n: usize,
        #[serde(default = "one")]
        p: usize,
        #[serde(default)]
        manifold: RayleighManifold,
        #[serde(default)]
        spectrum: Spectrum,
        seed: Option<u64>,
    },
    Ncm {
        /// Required unless `c_path` supplies the target.
        n: Option<usize>,
        p: usize,
        #[serde(default)]
        weights: NcmWeights,
        /// MatrixMarket target matrix; defaults to the synthetic `0.5 + e^{−0.05|i−j|}`.
        c_path: Option<PathBuf>,
        seed: Option<u64>,
    },
    Nleig {
        n: usize,
        p: usize,
        alpha: f64,
        seed: Option<u64>,
    },
    Bec {
        mesh: usize,
        beta: f64,
        #[serde(default)]
        potential: PotentialKind,
        /// Coarse meshes solved by GBB and interpolated upward before the main solve.
        #[serde(default)]
        coarse: Vec<usize>,
        #[serde(default = "coarse_tol")]
        coarse_tol: f64,
    },
}

impl InstanceSpec {
    fn seed(&self) -> Option<u64> {
        match self {
            InstanceSpec::Rayleigh { seed, .. } | InstanceSpec::Ncm { seed, .. } | InstanceSpec::Nleig { seed, .. } => *seed,
            InstanceSpec::Bec { .. } => None,
        }
    }

    fn uses_randomness(&self) -> bool {
        !matches!(self, InstanceSpec::Bec { .. })
    }

    fn files_mut(&mut self) -> Vec<&mut PathBuf> {
        match self {
            InstanceSpec::Ncm { weights, c_path, .. } => {
                let mut out: Vec<&mut PathBuf> = c_path.iter_mut().collect();
                if let NcmWeights::File { path } = weights {
                    out.push(path);
                }
                out
            }
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub name: String,
    pub instance: InstanceSpec,
    #[serde(default)]
    pub options: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SolverSpec {
    Name(SolverKind),
    Detailed {
        solver: SolverKind,
        #[serde(default)]
        options: Map<String, Value>,
    },
}

impl SolverSpec {
    pub fn kind(&self) -> SolverKind {
        match self {
            SolverSpec::Name(k) | SolverSpec::Detailed { solver: k, .. } => *k,
        }
    }

    fn options(&self) -> Option<&Map<String, Value>> {
        match self {
            SolverSpec::Name(_) => None,
            SolverSpec::Detailed { options, .. } => Some(options),
        }
    }
}

fn default_dir() -> PathBuf {
    PathBuf::from("results")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default)]
    pub trace: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            trace: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problems: Vec<ProblemSpec>,
    pub solvers: Vec<SolverSpec>,
    #[serde(default)]
    pub options: Map<String, Value>,
    #[serde(default = "one")]
    pub repetitions: usize,
    #[serde(default)]
    pub output: OutputSpec,
}

/// A validated configuration with every option set resolved.
#[derive(Debug, Clone)]
pub struct Plan {
    pub problems: Vec<PlannedProblem>,
    pub repetitions: usize,
    pub output: OutputSpec,
}

#[derive(Debug, Clone)]
pub struct PlannedProblem {
    pub name: String,
    pub instance: InstanceSpec,
    /// Global and per-problem options; governs instance setup and the warm start.
    pub options: SolverOptions,
    pub runs: Vec<(SolverKind, SolverOptions)>,
}

fn merged(layers: &[&Map<String, Value>]) -> Map<String, Value> {
    let mut out = Map::new();
    for layer in layers {
        for (k, v) in layer.iter() {
            out.insert(k.clone(), v.clone());
        }
    }
    out
}

fn to_options(map: Map<String, Value>, context: &str) -> Result<SolverOptions, CliError> {
    let opts: SolverOptions =
        serde_json::from_value(Value::Object(map)).map_err(|e| CliError::Config(format!("{context}: {e}")))?;
    opts.validate().map_err(|e| CliError::Config(format!("{context}: {e}")))?;
    Ok(opts)
}

fn valid_name(name: &str) -> bool {
    !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("cannot parse config: {e}")))
    }

    /// Validate and resolve. Relative file paths are taken against `base`.
    pub fn plan(mut self, base: &Path) -> Result<Plan, CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.problems.is_empty() {
            return bad("config lists no problems".into());
        }
        if self.solvers.is_empty() {
            return bad("config lists no solvers".into());
        }
        if self.repetitions == 0 {
            return bad("repetitions must be at least 1".into());
        }
        let mut kinds = HashSet::new();
        for s in &self.solvers {
            if !kinds.insert(s.kind()) {
                return bad(format!("solver {} listed twice", s.kind()));
            }
            if s.options().is_some_and(|o| o.contains_key("warm_start")) {
                return bad(format!(
                    "solver {}: warm_start is shared per problem and can only be set globally or per problem",
                    s.kind()
                ));
            }
        }
        let mut names = HashSet::new();
        let mut problems = Vec::with_capacity(self.problems.len());
        for mut p in std::mem::take(&mut self.problems) {
            if !valid_name(&p.name) {
                return bad(format!("problem name {:?} must be nonempty and use only [A-Za-z0-9._-]", p.name));
            }
            if !names.insert(p.name.clone()) {
                return bad(format!("problem name {:?} is not unique", p.name));
            }
            if p.instance.uses_randomness() && p.instance.seed().is_none() {
                return bad(format!("problem {}: a seed is required", p.name));
            }
            for path in p.instance.files_mut() {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
                if !path.is_file() {
                    return bad(format!("problem {}: file {} does not exist", p.name, path.display()));
                }
            }
            check_dimensions(&p)?;
            let base_opts = merged(&[&self.options, &p.options]);
            let options = to_options(base_opts.clone(), &format!("problem {}", p.name))?;
            let mut runs = Vec::with_capacity(self.solvers.len());
            for s in &self.solvers {
                let layer = s.options().cloned().unwrap_or_default();
                let opts = to_options(merged(&[&base_opts, &layer]), &format!("problem {} / {}", p.name, s.kind()))?;
                runs.push((s.kind(), opts));
            }
            problems.push(PlannedProblem {
                name: p.name,
                instance: p.instance,
                options,
                runs,
            });
        }
        let mut output = self.output;
        if output.dir.is_relative() {
            output.dir = base.join(&output.dir);
        }
        Ok(Plan {
            problems,
            repetitions: self.repetitions,
            output,
        })
    }
}

fn check_dimensions(p: &ProblemSpec) -> Result<(), CliError> {
    let err = |msg: &str| Err(CliError::Config(format!("problem {}: {msg}", p.name)));
    match &p.instance {
        InstanceSpec::Rayleigh { n, p: cols, manifold, .. } => {
            if *n == 0 || *cols == 0 || cols > n {
                return err("need 1 ≤ p ≤ n");
            }
            if *manifold == RayleighManifold::Sphere && *cols != 1 {
                return err("the sphere takes p = 1; use the stiefel manifold for p > 1");
            }
        }
        InstanceSpec::Ncm { n, p: rank, c_path, .. } => {
            if n.is_none() && c_path.is_none() {
                return err("give n or c_path");
            }
            if *rank == 0 || n.is_some_and(|n| *rank > n) {
                return err("need 1 ≤ p ≤ n");
            }
        }
        InstanceSpec::Nleig { n, p: cols, alpha, .. } => {
            if *n == 0 || *cols == 0 || cols > n {
                return err("need 1 ≤ p ≤ n");
            }
            if !(*alpha >= 0.0 && alpha.is_finite()) {
                return err("alpha must be finite and nonnegative");
            }
        }
        InstanceSpec::Bec {
            mesh, beta, coarse, coarse_tol, ..
        } => {
            if *mesh < 3 {
                return err("mesh must be at least 3");
            }
            if !beta.is_finite() {
                return err("beta must be finite");
            }
            let mut prev = 2;
            for &m in coarse.iter().chain(std::iter::once(mesh)) {
                if m <= prev {
                    return err("coarse meshes must be at least 3 and increase toward mesh");
                }
                prev = m;
            }
            if !(*coarse_tol > 0.0) {
                return err("coarse_tol must be positive");
            }
        }
    }
    Ok(())
}

/// Read, parse and plan a config file.
pub fn load(path: &Path) -> Result<Plan, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    RunConfig::from_json(&text)?.plan(base)
}
