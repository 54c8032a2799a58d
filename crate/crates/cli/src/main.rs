use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use arnt_cli::{output, CliError};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bench", version, about = "Run and tabulate arnt solver benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve every (problem, solver) pair in a config.
    Run {
        config: PathBuf,
        /// Output directory; overrides the config's `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (capped by ARNT_BENCH_THREADS).
        #[arg(long)]
        jobs: Option<usize>,
        /// Write per-iteration JSONL traces.
        #[arg(long)]
        trace: bool,
    },
    /// Run derivative and geometry diagnostics on the configured problems.
    Check { config: PathBuf },
    /// Regenerate the Markdown table from a results CSV.
    Table { results: PathBuf },
    /// Convert a JSONL trace into plotting columns.
    PlotData {
        trace: PathBuf,
        /// Write here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn execute(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Run { config, out, jobs, trace } => {
            let summary = arnt_cli::run_command(&config, out, jobs, trace)?;
            print!("{}", output::markdown(&summary.rows));
            for o in &summary.outcomes {
                if let Err(e) = &o.result {
                    eprintln!("{} / {} (rep {}): {e}", o.key.problem, o.key.solver, o.key.rep);
                }
            }
            eprintln!("results written to {}", summary.out_dir.display());
            Ok(if summary.failures > 0 { ExitCode::from(2) } else { ExitCode::SUCCESS })
        }
        Command::Check { config } => {
            let lines = arnt_cli::check_command(&config)?;
            for l in &lines {
                println!(
                    "[{}] {:<20} {:<22} {:.3e} (tol {:.0e})",
                    if l.passed { "PASS" } else { "FAIL" },
                    l.problem,
                    l.check,
                    l.value,
                    l.tolerance
                );
            }
            Ok(if lines.iter().all(|l| l.passed) { ExitCode::SUCCESS } else { ExitCode::from(2) })
        }
        Command::Table { results } => {
            print!("{}", output::markdown(&output::read_csv(&results)?));
            Ok(ExitCode::SUCCESS)
        }
        Command::PlotData { trace, out } => {
            let lines = output::read_trace(&trace)?;
            match out {
                Some(path) => {
                    let file = std::fs::File::create(&path)
                        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
                    output::plot_data(&lines, file)?;
                }
                None => {
                    let stdout = std::io::stdout();
                    let mut lock = stdout.lock();
                    output::plot_data(&lines, &mut lock)?;
                    let _ = lock.flush();
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("bench: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
