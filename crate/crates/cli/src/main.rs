use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod fail;
mod output;

use config::{Resolved, RunConfig};
use fail::Failure;

/// Spectral sum rules: analytic values, numeric spectra and cross-checks.
#[derive(Parser)]
#[command(name = "sumrules", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analytic sum rule as JSON
    Compute(RunConfig),
    /// Eigenvalues as CSV
    Spectrum(RunConfig),
    /// Analytic against numeric sum rule
    Validate(RunConfig),
    /// Annulus Z₂ over a grid of inner radii as CSV
    AnnulusSweep(RunConfig),
    /// Positivity and total mass of a density
    DensityCheck(RunConfig),
}

fn run(cmd: Command) -> Result<commands::Outcome, Failure> {
    let (name, cfg, f): (_, _, fn(&Resolved) -> Result<commands::Outcome, Failure>) = match cmd {
        Command::Compute(c) => ("compute", c, commands::compute),
        Command::Spectrum(c) => ("spectrum", c, commands::spectrum),
        Command::Validate(c) => ("validate", c, commands::validate),
        Command::AnnulusSweep(c) => ("annulus-sweep", c, commands::annulus_sweep),
        Command::DensityCheck(c) => ("density-check", c, commands::density_check),
    };
    let r = Resolved::from_config(name, cfg.merged()?)?;
    let out = f(&r)?;
    output::emit(r.out.as_deref(), &out.text)?;
    Ok(out)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let f = Failure::config(e.to_string().trim_end().to_string());
            eprintln!("{}", f.to_json());
            return ExitCode::from(f.code as u8);
        }
        Err(e) => {
            // --help, --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(cli.command) {
        Ok(o) => ExitCode::from(o.code as u8),
        Err(f) => {
            eprintln!("{}", f.to_json());
            ExitCode::from(f.code as u8)
        }
    }
}
