use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use arnt::IterRecord;
use serde::{Deserialize, Serialize};

use crate::runner::Outcome;
use crate::CliError;

/// One line of `results.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub problem: String,
    pub solver: String,
    pub outer_its: usize,
    pub mean_inner_its: f64,
    pub f: Option<f64>,
    #[serde(rename = "nrmG")]
    pub nrm_g: Option<f64>,
    /// Wall time rounded to 0.1 s.
    pub time_s: String,
    pub status: String,
}

impl ResultRow {
    pub fn from_outcome(o: &Outcome) -> Self {
        match &o.result {
            Ok(r) => Self {
                problem: o.key.problem.clone(),
                solver: o.key.solver.to_string(),
                outer_its: r.outer_iters,
                mean_inner_its: r.mean_inner_iters,
                f: Some(r.final_f),
                nrm_g: Some(r.final_grad_norm),
                time_s: format!("{:.1}", r.wall_time),
                status: r.status.to_string(),
            },
            Err(_) => Self {
                problem: o.key.problem.clone(),
                solver: o.key.solver.to_string(),
                outer_its: 0,
                mean_inner_its: 0.0,
                f: None,
                nrm_g: None,
                time_s: String::new(),
                status: "Error".into(),
            },
        }
    }

    /// Everything except the timing column.
    pub fn without_time(&self) -> Self {
        Self {
            time_s: String::new(),
            ..self.clone()
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

pub fn write_csv(path: &Path, rows: &[ResultRow]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>, CliError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| io_err(path, e))?;
    r.deserialize().map(|row| row.map_err(|e| io_err(path, e))).collect()
}

fn sci(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.2e}"))
}

/// Markdown summary: one row per problem, one `its / nrmG / time` cell per
/// solver, with `its` shown as `outer(mean inner)` for the Newton-type
/// solvers. Only the first repetition of each pair is shown.
pub fn markdown(rows: &[ResultRow]) -> String {
    let mut problems: Vec<&str> = Vec::new();
    let mut solvers: Vec<&str> = Vec::new();
    for r in rows {
        if !problems.contains(&r.problem.as_str()) {
            problems.push(&r.problem);
        }
        if !solvers.contains(&r.solver.as_str()) {
            solvers.push(&r.solver);
        }
    }
    let mut out = String::new();
    let _ = write!(out, "| problem | f |");
    for s in &solvers {
        let _ = write!(out, " {s} |");
    }
    out.push('\n');
    out.push_str("|---|---|");
    out.push_str(&"---|".repeat(solvers.len()));
    out.push('\n');
    for p in &problems {
        let of_problem: Vec<&ResultRow> = rows.iter().filter(|r| r.problem == *p).collect();
        let best = of_problem.iter().filter(|r| r.status == "Converged").filter_map(|r| r.f).reduce(f64::min);
        let _ = write!(out, "| {p} | {} |", best.map_or_else(|| "-".into(), |f| format!("{f:.10e}")));
        for s in &solvers {
            match of_problem.iter().find(|r| r.solver == *s) {
                None => out.push_str(" |"),
                Some(r) if r.status == "Error" => out.push_str(" error |"),
                Some(r) => {
                    let its = if r.mean_inner_its > 0.0 {
                        format!("{}({:.1})", r.outer_its, r.mean_inner_its)
                    } else {
                        r.outer_its.to_string()
                    };
                    let flag = if r.status == "Converged" { String::new() } else { format!(" [{}]", r.status) };
                    let _ = write!(out, " {its} / {} / {}{flag} |", sci(r.nrm_g), r.time_s);
                }
            }
        }
        out.push('\n');
    }
    out
}

/// One JSONL trace line: the run's identity and starting point, then the
/// iteration record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceLine {
    pub problem: String,
    pub solver: String,
    pub rep: usize,
    /// Hash of the iterate the main loop started from.
    pub start_fingerprint: u64,
    pub warm_start_iters: usize,
    #[serde(flatten)]
    pub record: IterRecord,
}

pub fn trace_path(dir: &Path, o: &Outcome) -> PathBuf {
    dir.join(format!("{}__{}__{}.jsonl", o.key.problem, o.key.solver, o.key.rep))
}

pub fn write_trace(path: &Path, o: &Outcome) -> Result<(), CliError> {
    let Ok(report) = &o.result else {
        return Ok(());
    };
    let mut w = BufWriter::new(File::create(path).map_err(|e| io_err(path, e))?);
    for rec in &report.trace {
        let line = TraceLine {
            problem: o.key.problem.clone(),
            solver: o.key.solver.to_string(),
            rep: o.key.rep,
            start_fingerprint: report.start_fingerprint,
            warm_start_iters: report.warm_start_iters,
            record: rec.clone(),
        };
        serde_json::to_writer(&mut w, &line).map_err(|e| io_err(path, e))?;
        w.write_all(b"\n").map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

pub fn read_trace(path: &Path) -> Result<Vec<TraceLine>, CliError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut lines = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        lines.push(serde_json::from_str(&line).map_err(|e| io_err(path, format!("line {}: {e}", i + 1)))?);
    }
    Ok(lines)
}

/// CSV of `k, f, nrmG` plus whichever of `sigma`, `step` and `radius` the
/// trace carries.
pub fn plot_data(lines: &[TraceLine], out: impl Write) -> Result<(), CliError> {
    let has = |pick: fn(&IterRecord) -> Option<f64>| lines.iter().any(|l| pick(&l.record).is_some());
    let optional: Vec<(&str, fn(&IterRecord) -> Option<f64>)> = [
        ("sigma", (|r: &IterRecord| r.sigma) as fn(&IterRecord) -> Option<f64>),
        ("step", |r: &IterRecord| r.step),
        ("radius", |r: &IterRecord| r.radius),
    ]
    .into_iter()
    .filter(|(_, pick)| has(*pick))
    .collect();
    let err = |e: csv::Error| CliError::Runtime(format!("writing plot data: {e}"));
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["k", "f", "nrmG"];
    header.extend(optional.iter().map(|(name, _)| *name));
    w.write_record(&header).map_err(err)?;
    for l in lines {
        let r = &l.record;
        let mut row = vec![r.k.to_string(), r.f.to_string(), r.grad_norm.to_string()];
        row.extend(optional.iter().map(|(_, pick)| pick(r).map(|v| v.to_string()).unwrap_or_default()));
        w.write_record(&row).map_err(err)?;
    }
    w.flush().map_err(|e| CliError::Runtime(format!("writing plot data: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(problem: &str, solver: &str, outer: usize, inner: f64, status: &str) -> ResultRow {
        ResultRow {
            problem: problem.into(),
            solver: solver.into(),
            outer_its: outer,
            mean_inner_its: inner,
            f: Some(1.5),
            nrm_g: Some(3.2e-7),
            time_s: "0.4".into(),
            status: status.into(),
        }
    }

    #[test]
    fn csv_round_trips_with_the_fixed_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("results.csv");
        let mut rows = vec![row("a", "ARNT", 3, 12.5, "Converged"), row("a,b", "GBB", 40, 0.0, "MaxIters")];
        rows[1].f = None;
        write_csv(&path, &rows).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("problem,solver,outer_its,mean_inner_its,f,nrmG,time_s,status\n"));
        assert!(text.contains("\"a,b\""));
        assert_eq!(read_csv(&path).unwrap(), rows);
    }

    #[test]
    fn markdown_layout() {
        let rows = vec![
            row("p1", "ARNT", 3, 12.5, "Converged"),
            row("p1", "GBB", 40, 0.0, "LineSearchFailure"),
            row("p2", "ARNT", 2, 4.0, "Converged"),
        ];
        let md = markdown(&rows);
        let lines: Vec<&str> = md.lines().collect();
        assert_eq!(lines[0], "| problem | f | ARNT | GBB |");
        assert_eq!(lines[1], "|---|---|---|---|");
        assert!(lines[2].contains("3(12.5) / 3.20e-7 / 0.4"));
        assert!(lines[2].contains("40 / 3.20e-7 / 0.4 [LineSearchFailure]"));
        assert!(lines[3].ends_with(" |"));
        assert_eq!(lines.len(), 4);
    }

    #[test]
    fn plot_columns_follow_the_trace() {
        let line = |k, sigma: Option<f64>, step: Option<f64>| TraceLine {
            problem: "p".into(),
            solver: "X".into(),
            rep: 0,
            start_fingerprint: 1,
            warm_start_iters: 0,
            record: IterRecord {
                k,
                f: 1.0,
                grad_norm: 0.5,
                sigma,
                step,
                ..Default::default()
            },
        };
        let mut buf = Vec::new();
        plot_data(&[line(0, Some(2.0), None), line(1, Some(1.0), None)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("k,f,nrmG,sigma\n"));
        assert_eq!(text.lines().count(), 3);
        let mut buf = Vec::new();
        plot_data(&[line(0, None, Some(0.1))], &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("k,f,nrmG,step\n"));
    }
}
