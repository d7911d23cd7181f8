use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use spectral_schwarz::harness::{self, parse_vary, write_rows, ExperimentConfig, ResultRow};
use spectral_schwarz::Error;

#[derive(Parser)]
#[command(name = "spectral-schwarz", version, about = "Two-level Schwarz experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output path; overrides the config's `output`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and append a CSV row.
    Solve {
        #[command(flatten)]
        common: Common,
    },
    /// Run the cross product of the varied values.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// `key=v1,v2,...`, repeatable.
        #[arg(long, required = true)]
        vary: Vec<String>,
        /// Concurrent sweep points.
        #[arg(long, env = "SPECTRAL_SCHWARZ_JOBS", default_value_t = 1)]
        jobs: usize,
    },
    /// Dump the eigenvalues of the preconditioned operator (small problems).
    Spectrum {
        #[command(flatten)]
        common: Common,
    },
    /// Energy distance between global and economical coarse columns.
    Decay {
        #[command(flatten)]
        common: Common,
        /// Oversampling levels, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "2,4,6")]
        k: Vec<usize>,
    },
}

fn load(path: &Path) -> Result<ExperimentConfig, Error> {
    let text = std::fs::read_to_string(path)?;
    ExperimentConfig::from_json(&text)
}

fn output_path(common: &Common, cfg: &ExperimentConfig) -> Option<PathBuf> {
    common.out.clone().or_else(|| cfg.output.as_ref().map(PathBuf::from))
}

fn emit_rows(rows: &[ResultRow], out: Option<PathBuf>) -> Result<(), Error> {
    match out {
        Some(p) => write_rows(&p, rows),
        None => harness::write_csv(std::io::stdout().lock(), rows),
    }
}

fn emit_json<T: serde::Serialize>(value: &T, out: Option<PathBuf>) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(p) => std::fs::write(p, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

fn summary(row: &ResultRow) {
    eprintln!(
        "{} {} n={} m={} variant={}: {} iterations ({}), relres {:.2e}, coarse_dim {}",
        row.problem,
        row.model,
        row.n,
        row.m,
        row.variant,
        row.iterations,
        if row.converged { "converged" } else { "not converged" },
        row.relres,
        row.coarse_dim
    );
}

fn execute(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::Solve { common } => {
            let cfg = load(&common.config)?;
            let row = harness::run(&cfg)?;
            summary(&row);
            let ok = row.converged;
            emit_rows(&[row], output_path(&common, &cfg))?;
            Ok(ok)
        }
        Command::Sweep { common, vary, jobs } => {
            let cfg = load(&common.config)?;
            let vary = vary.iter().map(|v| parse_vary(v)).collect::<Result<Vec<_>, _>>()?;
            let rows = harness::sweep(&cfg, &vary, jobs)?;
            rows.iter().for_each(summary);
            let ok = rows.iter().all(|r| r.converged);
            emit_rows(&rows, output_path(&common, &cfg))?;
            Ok(ok)
        }
        Command::Spectrum { common } => {
            let cfg = load(&common.config)?;
            let report = harness::spectrum(&cfg)?;
            eprintln!(
                "{} dofs: lambda in [{:.6e}, {:.6e}], cond {:.4}, max |imag| {:.2e}",
                report.dofs, report.lambda_min, report.lambda_max, report.cond, report.max_imag
            );
            emit_json(&report, output_path(&common, &cfg))?;
            Ok(true)
        }
        Command::Decay { common, k } => {
            let cfg = load(&common.config)?;
            let report = harness::decay(&cfg, &k)?;
            eprintln!(
                "{} columns, {:.1}% with fitted ratio <= 0.8",
                report.columns.len(),
                100.0 * report.fraction_below(0.8)
            );
            emit_json(&report, output_path(&common, &cfg))?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
