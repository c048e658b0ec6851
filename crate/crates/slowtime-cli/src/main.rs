//! `slowtime`: design, evaluate, and simulate slow-time phase codes.
//!
//! Every subcommand reads JSON inputs, writes its artifacts into `--out`,
//! and finishes with a run manifest listing each emitted file with its
//! content hash, so results can be audited and reruns compared byte for
//! byte. Progress goes to standard error; machine-readable output only to
//! disk.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 numerical
//! failure during a run.

mod design;
mod evaluate;
mod inputs;
mod manifest;
mod pairs;
mod report;
mod simulate;
mod store;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use slowtime::error::ErrorClass;

#[derive(Parser)]
#[command(
    name = "slowtime",
    version,
    about = "Slow-time code design and FMCW interference evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Design a pair of codes for two single-waveform radars.
    DesignSiso(DesignSisoArgs),
    /// Design coordinated code sets for two multi-waveform radars.
    DesignMimo(DesignMimoArgs),
    /// Synthesize de-chirped samples for a scenario and export the
    /// range-Doppler map with a peak table.
    Simulate(SimulateArgs),
    /// Compute ambiguity grids and sidelobe metrics for stored codes.
    Evaluate(EvaluateArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SisoMode {
    /// Closed-form alternating pair; no iterations.
    Doppler,
    /// Alternating minimization over both codes.
    Optimize,
    /// Keep the partner fixed at all ones; optimize own code only.
    SingleSided,
}

#[derive(clap::Args)]
struct DesignSisoArgs {
    /// Design configuration JSON.
    config: PathBuf,
    #[arg(long, value_enum, default_value = "optimize")]
    mode: SisoMode,
    /// Independent seeded runs; the lowest final objective wins.
    #[arg(long, default_value_t = 1)]
    restarts: usize,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
struct DesignMimoArgs {
    /// Design configuration JSON.
    config: PathBuf,
    /// Codes in the first radar's set.
    #[arg(long)]
    m: usize,
    /// Codes in the second radar's set; zero designs one radar alone.
    #[arg(long)]
    k: usize,
    /// Independent seeded runs; the lowest final surrogate wins.
    #[arg(long, default_value_t = 1)]
    restarts: usize,
    /// Codebook whose sets seed the iteration instead of random codes.
    #[arg(long)]
    warm_start: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
struct SimulateArgs {
    /// Scenario JSON: front-end parameters, emitters, noise, seed.
    scenario: PathBuf,
    /// Codebook supplying the victim's code (first set) and the
    /// interferer's (second set); omitted runs are uncoded.
    #[arg(long)]
    codebook: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
struct EvaluateArgs {
    /// Codebook JSON with the codes to compare.
    codebook: PathBuf,
    /// Design configuration pinning the grid dimensions; defaults derive
    /// from the codebook's code length.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `all`, or comma-separated `label/index:label/index` pairs.
    #[arg(long, default_value = "all")]
    pairs: String,
    /// Region JSON overriding the default zero-delay band.
    #[arg(long)]
    region: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (out_dir, run) = match cli.command {
        Command::DesignSiso(args) => (args.out.clone(), design::run_siso(args)),
        Command::DesignMimo(args) => (args.out.clone(), design::run_mimo(args)),
        Command::Simulate(args) => (args.out.clone(), simulate::run(args)),
        Command::Evaluate(args) => (args.out.clone(), evaluate::run(args)),
    };
    match run {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            let (class_name, code) = match err.class() {
                ErrorClass::Config => ("config", 2),
                ErrorClass::Numerical => ("numerical", 3),
            };
            store::write_diagnostic(&out_dir, class_name, &err);
            ExitCode::from(code)
        }
    }
}
