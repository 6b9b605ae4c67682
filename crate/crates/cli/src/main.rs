//! `mdcrt` command-line front end.
//!
//! Every subcommand reads one JSON document (a file path, inline JSON, or `-`
//! for stdin) and writes one result. Exit status is 0 on success, 1 on a
//! domain error and 2 on malformed input; failures print `{code, message}` to
//! stderr.

mod commands;

use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mdcrt::Norm;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "mdcrt", version, about = "Robust multidimensional CRT toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Smith form U·M·V = Λ of an integer matrix
    Smith(Io),
    /// Greatest common left divisor with Bezout matrices
    Gcld(Io),
    /// Least common right multiple of two or more moduli
    Lcrm(Io),
    /// Shortest nonzero lattice vector
    Svp(NormIo),
    /// Closest lattice point to a target
    Cvp(NormIo),
    /// Exact reconstruction from error-free remainders
    Crt(Io),
    /// Robust reconstruction from erroneous integer remainders
    RobustCrt(NormIo),
    /// Robust reconstruction from erroneous real remainders
    RobustCrtReal(NormIo),
    /// Moduli that can be dropped without shrinking the lcrm
    Redundant(Io),
    /// Pairwise minimum distances, reference modulus and robustness bounds
    Bounds(NormIo),
    /// Monte-Carlo sweep from an experiment configuration
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct Io {
    /// JSON file, inline JSON, or `-` for stdin
    input: String,
    /// Write the result here instead of stdout
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(short, long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct NormIo {
    #[command(flatten)]
    io: Io,
    /// Overrides the norm given in the input
    #[arg(long, value_enum)]
    norm: Option<NormArg>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    io: Io,
    #[arg(long, value_enum)]
    norm: Option<NormArg>,
    /// Overrides `rng_seed`
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `trials`
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormArg {
    L1,
    L2,
    Linf,
}

impl From<NormArg> for Norm {
    fn from(n: NormArg) -> Norm {
        match n {
            NormArg::L1 => Norm::L1,
            NormArg::L2 => Norm::L2,
            NormArg::Linf => Norm::Linf,
        }
    }
}

pub enum Failure {
    Malformed(String),
    Domain(mdcrt::Error),
    Output(String),
}

impl From<mdcrt::Error> for Failure {
    fn from(e: mdcrt::Error) -> Self {
        match e {
            // shape problems in otherwise valid JSON are input errors
            mdcrt::Error::DimensionMismatch(_) | mdcrt::Error::Invalid(_) => {
                Failure::Malformed(e.to_string())
            }
            e => Failure::Domain(e),
        }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Malformed(e.to_string())
    }
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    code: &'a str,
    message: String,
}

impl Failure {
    fn report(&self) -> (ErrorReport<'_>, u8) {
        match self {
            Failure::Malformed(m) => (
                ErrorReport {
                    code: "malformed_input",
                    message: m.clone(),
                },
                2,
            ),
            Failure::Domain(e) => (
                ErrorReport {
                    code: e.code(),
                    message: e.to_string(),
                },
                1,
            ),
            Failure::Output(m) => (
                ErrorReport {
                    code: "output_error",
                    message: m.clone(),
                },
                1,
            ),
        }
    }
}

fn read_input(arg: &str) -> Result<String, Failure> {
    let t = arg.trim_start();
    if t.starts_with('{') || t.starts_with('[') {
        return Ok(arg.to_string());
    }
    if arg == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Failure::Malformed(format!("stdin: {e}")))?;
        return Ok(s);
    }
    std::fs::read_to_string(arg).map_err(|e| Failure::Malformed(format!("{arg}: {e}")))
}

fn write_output(path: Option<&PathBuf>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| Failure::Output(format!("{}: {e}", p.display())))
        }
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Output(e.to_string())),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    use commands as c;
    let (io, text) = match &cli.command {
        Command::Smith(io) => (
            io,
            c::json_only(io.format, || c::smith(&read_input(&io.input)?))?,
        ),
        Command::Gcld(io) => (
            io,
            c::json_only(io.format, || c::gcld(&read_input(&io.input)?))?,
        ),
        Command::Lcrm(io) => (
            io,
            c::json_only(io.format, || c::lcrm(&read_input(&io.input)?))?,
        ),
        Command::Crt(io) => (
            io,
            c::json_only(io.format, || c::crt(&read_input(&io.input)?))?,
        ),
        Command::Redundant(io) => (
            io,
            c::json_only(io.format, || c::redundant(&read_input(&io.input)?))?,
        ),
        Command::Svp(a) => (
            &a.io,
            c::json_only(a.io.format, || {
                c::svp(&read_input(&a.io.input)?, norm(a.norm))
            })?,
        ),
        Command::Cvp(a) => (
            &a.io,
            c::json_only(a.io.format, || {
                c::cvp(&read_input(&a.io.input)?, norm(a.norm))
            })?,
        ),
        Command::RobustCrt(a) => (
            &a.io,
            c::json_only(a.io.format, || {
                c::robust_crt(&read_input(&a.io.input)?, norm(a.norm))
            })?,
        ),
        Command::RobustCrtReal(a) => (
            &a.io,
            c::json_only(a.io.format, || {
                c::robust_crt_real(&read_input(&a.io.input)?, norm(a.norm))
            })?,
        ),
        Command::Bounds(a) => (
            &a.io,
            c::json_only(a.io.format, || {
                c::bounds(&read_input(&a.io.input)?, norm(a.norm))
            })?,
        ),
        Command::Simulate(a) => {
            let overrides = c::SimOverrides {
                norm: norm(a.norm),
                seed: a.seed,
                trials: a.trials,
            };
            let text = c::simulate(
                &read_input(&a.io.input)?,
                overrides,
                a.io.format == Format::Csv,
            )?;
            (&a.io, text)
        }
    };
    write_output(io.output.as_ref(), &text)
}

fn norm(n: Option<NormArg>) -> Option<Norm> {
    n.map(Norm::from)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (report, status) = f.report();
            let line = serde_json::to_string(&report).expect("error report serializes");
            eprintln!("{line}");
            ExitCode::from(status)
        }
    }
}
