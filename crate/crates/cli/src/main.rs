//! `mcd` — compile co-design diagrams, query minimal-resource antichains,
//! run simulation campaigns, and export Pareto fronts.
//!
//! Exit codes: 0 feasible, 2 infeasible (empty antichain), 1 error.

mod campaign;
mod export;
mod query;
mod solution;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "mcd", version, about = "Monotone co-design solver")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExportFormat {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve a diagram at a fixed functionality query.
    Solve {
        #[arg(long)]
        diagram: PathBuf,
        /// Functionality assignment, `port=value[unit]`; repeatable.
        #[arg(long = "fun")]
        fun: Vec<String>,
        /// Output path for the solution JSON (`-` for stdout).
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Solve over a list of values for one port and certify monotonicity.
    Sweep {
        #[arg(long)]
        diagram: PathBuf,
        #[arg(long = "fun")]
        fun: Vec<String>,
        /// Swept port, `port=v1,v2,...`.
        #[arg(long)]
        sweep: String,
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Run a simulation campaign and write a brake-control `.dpt` table.
    Simulate {
        #[arg(long)]
        campaign: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (does not change results).
        #[arg(long)]
        jobs: Option<usize>,
        /// Override the campaign's base RNG seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Flatten a solution file into one row per antichain point.
    Export {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        format: ExportFormat,
        #[arg(long, default_value = "-")]
        out: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Solve { diagram, fun, out } => query::cmd_solve(&diagram, &fun, &out),
        Cmd::Sweep {
            diagram,
            fun,
            sweep,
            out,
        } => query::cmd_sweep(&diagram, &fun, &sweep, &out),
        Cmd::Simulate {
            campaign,
            out,
            jobs,
            seed,
        } => campaign::cmd_simulate(&campaign, &out, jobs, seed),
        Cmd::Export { input, format, out } => export::cmd_export(&input, format, &out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

/// Write `data` to a path, or to stdout when the path is `-`.
fn write_out(out: &str, data: &str) -> anyhow::Result<()> {
    if out == "-" {
        print!("{data}");
    } else {
        std::fs::write(out, data)?;
    }
    Ok(())
}
