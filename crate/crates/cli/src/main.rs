// Copyright 2026 The duoqubit Authors
// SPDX-License-Identifier: Apache-2.0

//! `duoqubit` command-line driver.
//!
//! Exit codes: 0 when everything passes, 1 for usage or schema errors, 2 when
//! a reconstruction or check fails.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Failure, Globals, Mode};

#[derive(Parser)]
#[command(name = "duoqubit", version, about = "Simulate and invert the reduced dynamics of one qubit coupled to another")]
struct Cli {
    /// JSON configuration for the command.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Taylor order (reconstruct: 6 exact, 4 fit; verify: 6).
    #[arg(long, global = true)]
    order: Option<usize>,
    /// Overrides the command's numerical tolerance.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Reconstruct from a Hamiltonian (exact) or from sampled CSV data (fit).
    #[arg(long, global = true, value_enum, default_value_t = Mode::Exact)]
    mode: Mode,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample map coefficients (and mean values) on a time grid.
    Simulate,
    /// Recover the two candidate Hamiltonians and the unobserved means.
    Reconstruct,
    /// Run the color, parity, spectrum and sign-flip checks.
    Verify,
    /// Round-trip the classical two-variable analog.
    Classical,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let globals = Globals {
        config: cli.config,
        seed: cli.seed,
        out: cli.out,
        order: cli.order,
        tolerance: cli.tolerance,
        mode: cli.mode,
    };
    let result = match cli.command {
        Command::Simulate => commands::simulate(&globals),
        Command::Reconstruct => commands::reconstruct(&globals),
        Command::Verify => commands::verify(&globals),
        Command::Classical => commands::classical(&globals),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Failure>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
