use std::time::Instant;

use arnt::solvers::{solve_adagrad, solve_arnt, solve_arnt_observed, solve_gbb, solve_rtr, solve_trqh, warm_start, InnerSolve};
use arnt::{Manifold, Mat, Objective, SolverOptions, SolverReport};
use rayon::prelude::*;

use crate::config::{Plan, PlannedProblem, SolverKind};
use crate::instance::{self, Instance};
use crate::CliError;

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "ARNT_BENCH_THREADS";

/// Identifies one solver run inside a plan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunKey {
    pub problem: String,
    pub solver: SolverKind,
    pub rep: usize,
}

#[derive(Debug)]
pub struct Outcome {
    pub key: RunKey,
    pub result: Result<SolverReport, String>,
}

/// Called after every Newton-CG subproblem solve of an ARNT run.
pub type InnerHook<'h> = &'h (dyn Fn(&RunKey, &InnerSolve<'_>) + Sync);

/// Run one solver. `hook` only applies to ARNT.
pub fn solve(
    kind: SolverKind,
    m: &dyn Manifold,
    obj: &dyn Objective,
    x0: &Mat,
    opts: &SolverOptions,
    hook: Option<&mut dyn for<'s> FnMut(&InnerSolve<'s>)>,
) -> arnt::Result<SolverReport> {
    match (kind, hook) {
        (SolverKind::Arnt, Some(h)) => solve_arnt_observed(m, obj, x0, opts, h),
        (SolverKind::Arnt, None) => solve_arnt(m, obj, x0, opts),
        (SolverKind::Rtr, _) => solve_rtr(m, obj, x0, opts),
        (SolverKind::Gbb, _) => solve_gbb(m, obj, x0, opts),
        (SolverKind::Trqh, _) => solve_trqh(m, obj, x0, opts),
        (SolverKind::Adagrad, _) => solve_adagrad(m, obj, x0, opts.adagrad_lr, opts.adagrad_eps, opts),
    }
}

/// An instance plus the warm-start point shared by ARNT, RTR and TRQH.
pub struct Prepared {
    pub instance: Instance,
    pub warm: Option<WarmPoint>,
}

pub struct WarmPoint {
    pub x: Mat,
    pub iters: usize,
    pub seconds: f64,
}

pub fn prepare(problem: &PlannedProblem) -> arnt::Result<Prepared> {
    let instance = instance::build(&problem.instance, &problem.options)?;
    let needs_warm = problem.options.warm_start.is_some() && problem.runs.iter().any(|(k, _)| k.uses_warm_start());
    let warm = if needs_warm {
        let start = Instant::now();
        let (x, iters) = warm_start(
            instance.manifold.as_ref(),
            instance.objective.as_ref(),
            &instance.x0,
            &problem.options,
        )?;
        Some(WarmPoint {
            x,
            iters,
            seconds: start.elapsed().as_secs_f64(),
        })
    } else {
        None
    };
    Ok(Prepared { instance, warm })
}

/// Run a solver on a prepared instance, starting the warm-started solvers
/// from the shared point.
pub fn run_prepared(
    prepared: &Prepared,
    kind: SolverKind,
    opts: &SolverOptions,
    hook: Option<&mut dyn for<'s> FnMut(&InnerSolve<'s>)>,
) -> arnt::Result<SolverReport> {
    let inst = &prepared.instance;
    match (&prepared.warm, kind.uses_warm_start()) {
        (Some(w), true) => {
            let cold = SolverOptions {
                warm_start: None,
                ..opts.clone()
            };
            let mut report = solve(kind, inst.manifold.as_ref(), inst.objective.as_ref(), &w.x, &cold, hook)?;
            report.warm_start_iters = w.iters;
            report.wall_time += w.seconds;
            Ok(report)
        }
        _ => {
            let cold = SolverOptions {
                warm_start: None,
                ..opts.clone()
            };
            let opts = if kind.uses_warm_start() { &cold } else { opts };
            solve(kind, inst.manifold.as_ref(), inst.objective.as_ref(), &inst.x0, opts, hook)
        }
    }
}

/// Worker count: the request (or the machine's parallelism), capped by
/// [`THREADS_ENV`] when set.
pub fn worker_count(requested: Option<usize>) -> usize {
    let base = requested.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let cap = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()).filter(|&c| c > 0);
    cap.map_or(base, |c| base.min(c)).max(1)
}

/// Execute every (problem, repetition, solver) triple. Results come back in
/// config order regardless of scheduling.
pub fn run_plan(plan: &Plan, jobs: usize, hook: Option<InnerHook<'_>>) -> Result<Vec<Outcome>, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Runtime(format!("cannot start worker pool: {e}")))?;
    pool.install(|| {
        let prepared: Vec<Result<Prepared, String>> =
            plan.problems.par_iter().map(|p| prepare(p).map_err(|e| e.to_string())).collect();
        let tasks: Vec<(usize, usize, usize)> = (0..plan.problems.len())
            .flat_map(|pi| (0..plan.repetitions).flat_map(move |rep| (0..plan.problems[pi].runs.len()).map(move |si| (pi, rep, si))))
            .collect();
        Ok(tasks
            .par_iter()
            .map(|&(pi, rep, si)| {
                let problem = &plan.problems[pi];
                let (kind, opts) = &problem.runs[si];
                let key = RunKey {
                    problem: problem.name.clone(),
                    solver: *kind,
                    rep,
                };
                let result = match &prepared[pi] {
                    Err(e) => Err(format!("instance setup failed: {e}")),
                    Ok(prep) => match hook {
                        Some(h) => {
                            let mut observe = |s: &InnerSolve<'_>| h(&key, s);
                            run_prepared(prep, *kind, opts, Some(&mut observe))
                        }
                        None => run_prepared(prep, *kind, opts, None),
                    }
                    .map_err(|e| e.to_string()),
                };
                Outcome { key, result }
            })
            .collect())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RunConfig;
    use std::path::Path;
    use std::sync::atomic::{AtomicUsize, Ordering};

    fn plan(text: &str) -> Plan {
        RunConfig::from_json(text).unwrap().plan(Path::new(".")).unwrap()
    }

    const CONFIG: &str = r#"{
        "problems": [{"name": "ncm", "instance": {"kind": "ncm", "n": 30, "p": 3, "seed": 2}}],
        "solvers": ["ARNT", "RTR", "GBB", "TRQH"],
        "repetitions": 2
    }"#;

    #[test]
    fn warm_started_solvers_share_the_start_point() {
        let out = run_plan(&plan(CONFIG), 2, None).unwrap();
        assert_eq!(out.len(), 8);
        let reports: Vec<&SolverReport> = out.iter().map(|o| o.result.as_ref().unwrap()).collect();
        let warm: Vec<u64> = reports.iter().filter(|r| r.solver != "GBB").map(|r| r.start_fingerprint).collect();
        assert!(warm.windows(2).all(|w| w[0] == w[1]));
        assert!(reports.iter().filter(|r| r.solver != "GBB").all(|r| r.warm_start_iters > 0));
        let gbb = reports.iter().find(|r| r.solver == "GBB").unwrap();
        assert_ne!(gbb.start_fingerprint, warm[0]);
    }

    #[test]
    fn repetitions_and_thread_counts_do_not_change_results() {
        let p = plan(CONFIG);
        let a = run_plan(&p, 1, None).unwrap();
        let b = run_plan(&p, 4, None).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.key, y.key);
            let (rx, ry) = (x.result.as_ref().unwrap(), y.result.as_ref().unwrap());
            assert_eq!(rx.deterministic_view(), ry.deterministic_view());
        }
        let first = a[0].result.as_ref().unwrap();
        let again = a[4].result.as_ref().unwrap();
        assert_eq!((a[4].key.rep, a[4].key.solver), (1, SolverKind::Arnt));
        assert_eq!(first.deterministic_view(), again.deterministic_view());
    }

    #[test]
    fn hook_sees_every_arnt_subproblem() {
        let seen = AtomicUsize::new(0);
        let hook = |key: &RunKey, s: &InnerSolve<'_>| {
            assert_eq!(key.solver, SolverKind::Arnt);
            assert!(s.certify().passed);
            seen.fetch_add(1, Ordering::Relaxed);
        };
        let out = run_plan(&plan(CONFIG), 2, Some(&hook)).unwrap();
        let outer: usize = out
            .iter()
            .filter(|o| o.key.solver == SolverKind::Arnt)
            .map(|o| o.result.as_ref().unwrap().outer_iters)
            .sum();
        assert!(seen.load(Ordering::Relaxed) >= 1);
        assert!(seen.load(Ordering::Relaxed) <= outer.max(1));
    }

    #[test]
    fn thread_cap_is_read_from_the_environment() {
        assert!(worker_count(Some(3)) >= 1);
        assert!(worker_count(Some(3)) <= 3);
    }
}
