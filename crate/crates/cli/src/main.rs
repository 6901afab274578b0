use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use dds_cli::commands::{self, AnalyzeOptions, LatticeOverrides};
use dds_cli::input::{read_fields, read_problem};
use dds_cli::{exit, CliError};

/// Lie point symmetries of differential-difference equations.
#[derive(Parser)]
#[command(name = "dds", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the symmetry algebra of an equation.
    Analyze {
        file: PathBuf,
        #[arg(long)]
        json: Option<PathBuf>,
        /// Skip the structural reductions of tau, xi, eta.
        #[arg(long)]
        no_theorems: bool,
        #[arg(long)]
        udeg: Option<u32>,
        #[arg(long)]
        tdeg: Option<u32>,
        /// Write the generators as a fields file.
        #[arg(long)]
        fields_out: Option<PathBuf>,
    },
    /// Check candidate fields symbolically.
    Verify {
        file: PathBuf,
        #[arg(long)]
        fields: PathBuf,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Commutator table of the given fields.
    Commutators {
        file: PathBuf,
        #[arg(long)]
        fields: PathBuf,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Numerical flow-commutation check on a periodic lattice.
    Numcheck {
        file: PathBuf,
        #[arg(long)]
        fields: PathBuf,
        #[arg(long)]
        sites: Option<usize>,
        #[arg(long)]
        tend: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), CliError> {
    if let Some(p) = path {
        let s = serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
        std::fs::write(p, s + "\n").map_err(|e| CliError::Parse(format!("{}: {e}", p.display())))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Analyze { file, json, no_theorems, udeg, tdeg, fields_out } => {
            let problem = read_problem(&file)?;
            let r = commands::analyze(&problem, &AnalyzeOptions { no_theorems, udeg, tdeg })?;
            print!("{}", r.to_text());
            write_json(json.as_deref(), &r)?;
            if let Some(p) = fields_out {
                std::fs::write(&p, r.fields_file()).map_err(|e| CliError::Parse(format!("{}: {e}", p.display())))?;
            }
            Ok(commands::analysis_exit(&r))
        }
        Command::Verify { file, fields, json } => {
            let problem = read_problem(&file)?;
            let set = read_fields(&fields, &problem)?;
            let r = commands::verify(&problem, &set)?;
            print!("{}", r.to_text());
            write_json(json.as_deref(), &r)?;
            Ok(if r.all_vanish { exit::OK } else { exit::FAILED })
        }
        Command::Commutators { file, fields, json } => {
            let problem = read_problem(&file)?;
            let set = read_fields(&fields, &problem)?;
            let r = commands::commutators(&problem, &set)?;
            print!("{}", r.to_text());
            write_json(json.as_deref(), &r)?;
            Ok(commands::commutators_exit(&r))
        }
        Command::Numcheck { file, fields, sites, tend, step, json } => {
            let problem = read_problem(&file)?;
            let set = read_fields(&fields, &problem)?;
            let r = commands::numcheck(&problem, &set, &LatticeOverrides { sites, t_end: tend, step })?;
            print!("{}", r.to_text());
            write_json(json.as_deref(), &r)?;
            Ok(if r.all_passed { exit::OK } else { exit::FAILED })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("dds: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
