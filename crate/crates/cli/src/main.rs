//! `qmin`: exact statistics of the smallest denominator in a random
//! interval, from the command line.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qmin_core::montecarlo::Radius;
use qmin_core::{Error, Rational};

mod commands;
mod render;

use commands::Failure;
use render::{error_json, Format};

#[derive(Parser)]
#[command(name = "qmin", version, about = "Smallest denominators of fractions in random intervals")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,

    /// Write output to this file instead of stdout. Relative paths are taken
    /// from QMIN_OUTPUT_DIR when that is set.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[arg(long, global = true, env = "QMIN_OUTPUT_DIR", hide_env_values = true)]
    output_dir: Option<PathBuf>,

    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Largest support bound ⌊1/δ⌋+1 for the PMF and decomposition routes.
    #[arg(long, global = true)]
    q_cap: Option<u64>,

    /// Interval radius around x: δ/2 (width δ) or δ (width 2δ).
    #[arg(long, global = true, value_enum, default_value = "half-delta")]
    radius: RadiusArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum RadiusArg {
    HalfDelta,
    FullDelta,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Method {
    Pmf,
    Mobius,
    Both,
    /// PMF while ⌊1/δ⌋+1 is within --q-cap, Möbius beyond.
    Auto,
}

fn rational(s: &str) -> Result<Rational, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Subcommand)]
pub enum Command {
    /// Least denominator in (x - δ/2, x + δ/2).
    Qmin {
        #[arg(long, value_parser = rational, allow_hyphen_values = true)]
        x: Rational,
        #[arg(long, value_parser = rational, allow_hyphen_values = true)]
        delta: Rational,
    },
    /// Exact probability mass function of q_min.
    Pmf {
        #[arg(long, value_parser = rational, allow_hyphen_values = true)]
        delta: Rational,
    },
    /// The sets I_{a/q} of centres won by each fraction a/q.
    Decompose {
        #[arg(long, value_parser = rational, allow_hyphen_values = true)]
        delta: Rational,
    },
    /// Exact E[q_min].
    Expect {
        #[arg(long, value_parser = rational, allow_hyphen_values = true)]
        delta: Rational,
        #[arg(long, value_enum, default_value = "auto")]
        method: Method,
    },
    /// The pair sum S(t).
    Sfunc {
        #[arg(long, value_parser = rational, allow_hyphen_values = true)]
        t: Rational,
    },
    /// Numerical check of D = 4 - 2√2 and C = 8/3; exits 1 on failure.
    VerifyConstants {
        #[arg(long, default_value_t = 1e-8)]
        tolerance: f64,
    },
    /// Exact E against (16/π²) δ^(-1/2) on a δ grid; exits 1 if the ratio
    /// does not approach 1 or the normalized deficit more than doubles.
    Diagnostics {
        /// Comma-separated δ values, e.g. 1/100,1/1000.
        #[arg(long, value_parser = rational, value_delimiter = ',', default_value = "1/100,1/1000,1/10000,1/100000")]
        deltas: Vec<Rational>,
    },
    /// Monte Carlo histogram of q_min.
    Sample {
        #[arg(long, value_parser = rational, allow_hyphen_values = true)]
        delta: Rational,
        #[arg(long, default_value_t = 1_000_000)]
        n: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Monte Carlo histogram against the exact PMF.
    Compare {
        #[arg(long, value_parser = rational, allow_hyphen_values = true)]
        delta: Rational,
        #[arg(long, default_value_t = 1_000_000)]
        n: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::NotCoprime { .. } => "NotCoprime",
        Error::DivisionByZero => "DivisionByZero",
        Error::InvalidInput(_) => "InvalidInput",
        Error::InvalidInterval { .. } => "InvalidInterval",
        Error::ResourceLimit { .. } => "ResourceLimit",
        Error::Overflow => "Overflow",
        Error::QuadratureFailure(_) => "QuadratureFailure",
        Error::DeltaMismatch { .. } => "DeltaMismatch",
        Error::Parse { .. } => "ParseError",
    }
}

fn fail(kind: &str, message: &str) -> ExitCode {
    eprintln!("{}", error_json(kind, message));
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or_default();
            return fail("ParseError", first.trim_start_matches("error: "));
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            return fail("InvalidInput", &e.to_string());
        }
    }
    let radius = match cli.radius {
        RadiusArg::HalfDelta => Radius::HalfDelta,
        RadiusArg::FullDelta => Radius::FullDelta,
    };
    let rendered = match commands::run(&cli.command, cli.q_cap, radius) {
        Ok(r) => r,
        Err(Failure::Core(e)) => return fail(error_kind(&e), &e.to_string()),
        Err(Failure::Output(msg)) => return fail("OutputError", &msg),
    };
    let text = rendered.render(cli.format);
    let written = match &cli.output {
        Some(path) => {
            let path = match &cli.output_dir {
                Some(dir) if path.is_relative() => dir.join(path),
                _ => path.clone(),
            };
            std::fs::write(&path, text).map_err(|e| format!("{}: {e}", path.display()))
        }
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| e.to_string()),
    };
    if let Err(msg) = written {
        return fail("OutputError", &msg);
    }
    if rendered.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
