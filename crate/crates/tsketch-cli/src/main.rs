//! Command-line front end for the tsketch toolkit: analyze spectra, sample
//! and compile sketch circuits, certify channel error, measure stabilizer
//! nullity, and run the protocol bench table.
//!
//! Exit codes: 0 all checks pass, 1 a verification check failed, 2 usage or
//! input error. JSON output is byte-identical across runs with the same
//! arguments and seed except for the envelope `timestamp` field.

mod commands;
mod fnspec;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::commands::CmdOutput;
use crate::fnspec::FunctionSpec;

#[derive(Parser)]
#[command(
    name = "tsketch",
    version,
    about = "Randomized low-T-count synthesis and verification of Boolean-function unitaries"
)]
struct Cli {
    /// Output format; `qasm-like` prints raw circuit text (synthesize only).
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
    QasmLike,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum StateKind {
    /// The all-zero basis state.
    Zero,
    /// `copies` tensor factors of the magic state `T|+>`.
    TTensor,
}

/// Which sketch reduction to use.
#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Reduction {
    /// Uniform parity subsets for the OR family, spectral otherwise.
    Auto,
    /// Uniform parity subsets with an OR inner function (OR family only).
    Uniform,
    /// Spectral sampling with a signed-threshold inner function.
    Spectral,
}

#[derive(Subcommand)]
enum Command {
    /// Spectrum summary: exact one-norm, query counts, decision-tree depth.
    Analyze {
        #[command(flatten)]
        spec: FunctionSpec,
        /// Target channel error; enables the query-count columns.
        #[arg(long)]
        epsilon: Option<f64>,
        /// How many of the largest coefficients to list.
        #[arg(long, default_value_t = 8)]
        top: usize,
    },
    /// Sample sketches, compile circuits, and emit a manifest.
    Synthesize {
        #[command(flatten)]
        spec: FunctionSpec,
        /// Target channel error; sets the parity count unless --k is given.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Explicit parity count, overriding --epsilon.
        #[arg(long)]
        k: Option<u32>,
        #[arg(long, value_enum, default_value_t = Reduction::Auto)]
        reduction: Reduction,
        /// Number of independent circuits to sample.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        batch: u32,
        #[arg(long, env = "TSKETCH_SEED", default_value_t = 0)]
        seed: u64,
        /// Directory for circuit, sketch, and manifest files.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Certify channel error for a generator, or check a circuit file.
    Verify {
        #[command(flatten)]
        spec: FunctionSpec,
        /// Circuit file to check instead of a generator.
        #[arg(long, conflicts_with_all = ["family", "table"])]
        circuit: Option<PathBuf>,
        /// Sketch file the circuit must agree with.
        #[arg(long, requires = "circuit")]
        sketch: Option<PathBuf>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        k: Option<u32>,
        #[arg(long, value_enum, default_value_t = Reduction::Auto)]
        reduction: Reduction,
        /// Monte Carlo trials per input.
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, env = "TSKETCH_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// Stabilizer nullity and maximal Pauli overlap of a state.
    Nullity {
        /// Use the n-qubit state `C^{n-1}Z |+>^n`.
        #[arg(long, group = "source")]
        ccz_plus: bool,
        /// A named reference state.
        #[arg(long, value_enum, group = "source")]
        state: Option<StateKind>,
        /// Binary statevector file.
        #[arg(long, group = "source")]
        state_file: Option<PathBuf>,
        /// Qubit count for --ccz-plus and --state zero.
        #[arg(long)]
        n: Option<u32>,
        /// Tensor copies for --state t-tensor.
        #[arg(long)]
        copies: Option<u32>,
    },
    /// Protocol table across function families at a fixed error budget.
    Bench {
        #[arg(long, default_value_t = 0.25)]
        epsilon: f64,
        /// Monte Carlo trials per input per row.
        #[arg(long, default_value_t = 1_000)]
        trials: u64,
        #[arg(long, env = "TSKETCH_SEED", default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let (name, seed, out) = dispatch(cli.command, cli.format)?;
    match cli.format {
        Format::QasmLike => match &out.qasm {
            Some(q) => print!("{q}"),
            None => bail!("--format qasm-like applies only to synthesize"),
        },
        Format::Text => print!("{}", out.text),
        Format::Json => {
            let mut envelope = Map::new();
            envelope.insert("command".into(), json!(name));
            if let Some(seed) = seed {
                envelope.insert("seed".into(), json!(seed));
            }
            envelope.insert("status".into(), json!(if out.pass { "pass" } else { "fail" }));
            // The envelope's only nondeterministic field.
            envelope.insert("timestamp".into(), json!(unix_now()));
            envelope.insert("report".into(), out.report);
            println!("{}", serde_json::to_string_pretty(&Value::Object(envelope))?);
        }
    }
    Ok(if out.pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn dispatch(command: Command, format: Format) -> Result<(&'static str, Option<u64>, CmdOutput)> {
    Ok(match command {
        Command::Analyze { spec, epsilon, top } => {
            ("analyze", None, commands::analyze(&spec, epsilon, top)?)
        }
        Command::Synthesize { spec, epsilon, k, reduction, batch, seed, out } => {
            let opts = commands::SynthesizeOpts {
                epsilon,
                k,
                reduction,
                batch,
                seed,
                out,
                json_circuits: format == Format::Json,
            };
            ("synthesize", Some(seed), commands::synthesize(&spec, &opts)?)
        }
        Command::Verify { spec, circuit, sketch, epsilon, k, reduction, trials, seed } => {
            let out = match &circuit {
                Some(path) => commands::verify_circuit(path, sketch.as_deref())?,
                None => {
                    let opts = commands::VerifyOpts { epsilon, k, reduction, trials, seed };
                    commands::verify_generator(&spec, &opts)?
                }
            };
            ("verify", Some(seed), out)
        }
        Command::Nullity { ccz_plus, state, state_file, n, copies } => {
            let (psi, source) =
                commands::build_state(ccz_plus, state, n, copies, state_file.as_deref())?;
            ("nullity", None, commands::nullity(&psi, source)?)
        }
        Command::Bench { epsilon, trials, seed } => {
            ("bench", Some(seed), commands::bench(epsilon, trials, seed)?)
        }
    })
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}
