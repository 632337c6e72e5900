//! `qnn`: compile, simulate and cross-check threshold circuits and QNN programs.
//!
//! Exit status is 0 on success, 1 when `verify` finds a mismatch and 2 for
//! any input error.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "qnn", version, about = "Threshold-circuit to QNN compiler and simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SourceClass {
    Tc,
    Wtc,
    Ec,
    Nand,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TargetClass {
    /// Equality-threshold circuit.
    Ec,
    /// Unit-weight threshold circuit.
    Tc,
    /// Weighted threshold circuit.
    Wtc,
    /// Layered QNN program (single-output circuits only).
    Qnn,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    Merged,
    Naive,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Normalization {
    Dyadic,
    Exact,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DMode {
    /// Use each gate's stored mode.
    Program,
    Ideal,
    Ode,
}

#[derive(Subcommand)]
pub enum Command {
    /// Rewrite a circuit into another class, or compile it to a QNN program.
    Compile {
        #[arg(long, value_enum)]
        from: SourceClass,
        #[arg(long, value_enum)]
        to: TargetClass,
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Write size/depth/weight bounds before and after to this file.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "merged")]
        variant: Variant,
        /// Padded fan-in for QNN output (a power of two).
        #[arg(long)]
        fanin: Option<usize>,
        #[arg(long, value_enum, default_value = "dyadic")]
        normalization: Normalization,
        /// Grid precision for every layer instead of the per-level plan.
        #[arg(long)]
        precision: Option<u32>,
        /// Store the default ODE dynamics in every D gate.
        #[arg(long)]
        ode: bool,
        #[arg(long)]
        json: bool,
    },
    /// Run a QNN program on one classical input.
    Simulate {
        program: PathBuf,
        /// Input bits, input 0 first.
        #[arg(long)]
        input: String,
        #[arg(long, value_enum, default_value = "program")]
        d_mode: DMode,
        /// Round every layer's entries onto the 2^-p grid first.
        #[arg(long)]
        precision: Option<u32>,
        /// Print per-layer amplitudes and totals.
        #[arg(long)]
        trace: bool,
        /// In ODE mode, also evolve amplitudes the D gate does not check.
        #[arg(long)]
        evolve_all: bool,
        /// Run the ancilla collapse step after each D gate with this seed.
        #[arg(long)]
        collapse_seed: Option<u64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Compare two circuits or QNN programs over their inputs.
    Verify {
        left: PathBuf,
        right: PathBuf,
        /// Check this many seeded random inputs instead of all of them.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "program")]
        d_mode: DMode,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Solve for the D-gate convergence rate and tabulate trajectories.
    DgatePlan {
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        delta0: f64,
        #[arg(long)]
        delta1: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 1.0)]
        time: f64,
        /// Starting magnitudes; defaults to delta0 and delta1.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        a0: Vec<f64>,
        /// Table rows per trajectory, including both ends.
        #[arg(long, default_value_t = 17)]
        rows: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Densely encode classical bits (length a power of two).
    Encode {
        bits: String,
        /// Print the encoder output including the sink qubit.
        #[arg(long)]
        sink_qubit: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(status) => status,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
