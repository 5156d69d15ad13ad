//! `subphase`: scenario files in, CSV series and JSON reports out.

mod commands;
mod output;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "subphase", version, about = "Sub-geometric phases of driven finite-level quantum systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the coefficients and emit amplitudes, sub-phases and populations.
    Propagate(Paths),
    /// Closed-form and quadrature sub-phases of the exponentially ramped two-level system.
    Twolevel(Paths),
    /// Exact and Markov first-order coefficients of the amplitude-tuned perturbation.
    Perturb(Paths),
    /// Sweep the drive frequency; writes the omega/P table and a JSON peak report.
    Scan(Paths),
    /// Check schema, grid fineness, truncation and Hermiticity without running.
    Validate(ValidateArgs),
}

#[derive(clap::Args)]
struct Paths {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
struct ValidateArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Accepted for a uniform interface; nothing is written.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    /// Malformed scenario, failed precondition or unwritable output.
    Input(String),
    /// Divergence, overflow, norm violation or invalid density.
    Numerical(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Numerical(m) => m,
        }
    }
}

impl From<subphase_core::Error> for CliError {
    fn from(e: subphase_core::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Input(e.to_string())
        }
    }
}

/// What a command reports back on success.
#[derive(Debug, Default)]
pub struct Outcome {
    pub warnings: Vec<String>,
    pub notes: Vec<String>,
    pub outputs: Vec<PathBuf>,
}

#[derive(Serialize)]
struct Status<'a> {
    status: &'a str,
    command: &'a str,
    code: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    message: Option<&'a str>,
    outputs: Vec<String>,
    warnings: &'a [String],
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, result) = match &cli.command {
        Command::Propagate(p) => ("propagate", commands::propagate(&p.scenario, &p.out)),
        Command::Twolevel(p) => ("twolevel", commands::twolevel(&p.scenario, &p.out)),
        Command::Perturb(p) => ("perturb", commands::perturb(&p.scenario, &p.out)),
        Command::Scan(p) => ("scan", commands::scan(&p.scenario, &p.out)),
        Command::Validate(v) => ("validate", commands::validate(&v.scenario)),
    };
    let (outcome, error) = match result {
        Ok(o) => (o, None),
        Err((o, e)) => (o, Some(e)),
    };
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    for n in &outcome.notes {
        eprintln!("note: {n}");
    }
    if let Some(e) = &error {
        eprintln!("error: {}", e.message());
    }
    let code = error.as_ref().map_or(0, CliError::code);
    let status = Status {
        status: if error.is_none() { "ok" } else { "error" },
        command: name,
        code,
        message: error.as_ref().map(CliError::message),
        outputs: outcome.outputs.iter().map(|p| p.display().to_string()).collect(),
        warnings: &outcome.warnings,
    };
    println!("{}", serde_json::to_string(&status).expect("status serializes"));
    ExitCode::from(code)
}
