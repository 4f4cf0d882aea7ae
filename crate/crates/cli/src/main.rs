//! `naphase`: command-line front end for exact nonarchimedean stationary
//! phase computations.
//!
//! Exit status is 0 when every check passed, 1 when a verification found a
//! mismatch and 2 for usage or input errors.

mod commands;
mod config;
mod output;

use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::Value;

use naphase::FieldKind;

use config::{JobArgs, JobConfig};

#[derive(Debug)]
pub struct CliError(String);

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError(msg.into())
    }
}

impl From<naphase::Error> for CliError {
    fn from(e: naphase::Error) -> Self {
        CliError(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(name = "naphase", version, about = "Exact p-adic stationary phase: normal forms, oscillatory integrals, certificates")]
struct Cli {
    #[command(flatten)]
    job: JobArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Critical points of the phase in Ω.
    Critical,
    /// Morse normal form at every critical point, with a sampled check.
    Morse {
        #[arg(long)]
        alpha: Option<u32>,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Closed and enumerated Gauss integrals ∫_{ϖ^α O} Ψ(c u²) du.
    Gauss {
        #[arg(long = "ord-c", allow_hyphen_values = true)]
        ord_c: Option<i64>,
        #[arg(long)]
        alpha: Option<u32>,
        /// Only this leading digit of c (default: all).
        #[arg(long)]
        unit: Option<u32>,
    },
    /// Fourier transform of φ and the inversion constant.
    Fourier,
    /// ∫_Ω φ Ψ(λ f) by enumeration over the λ range.
    Integrate {
        #[arg(long)]
        unit: Option<u32>,
    },
    /// Stationary-phase certificate checked against enumeration.
    PhaseVerify {
        /// Number of ord λ values below N checked when no range is given.
        #[arg(long, default_value_t = 4)]
        depth: u32,
    },
    /// Uniform formula checked at several primes in both field kinds.
    Uniform {
        #[arg(long, value_delimiter = ',')]
        primes: Vec<u32>,
        /// Rational critical point "a,b,…"; repeat for several.
        #[arg(long, allow_hyphen_values = true)]
        x0: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "padic,laurent")]
        kinds: Vec<String>,
        #[arg(long, default_value_t = 4)]
        depth: u32,
    },
}

fn run(cli: Cli) -> Result<commands::Outcome, CliError> {
    let cfg = JobConfig::load(&cli.job)?;
    let mut outcome = match cli.command {
        Command::Critical => commands::critical(&cfg),
        Command::Morse { alpha, samples, seed } => {
            let alpha = alpha.or(cfg.option_i64("alpha").map(|a| a as u32)).unwrap_or(1);
            commands::morse(&cfg, alpha, samples, seed)
        }
        Command::Gauss { ord_c, alpha, unit } => {
            let ord_c = ord_c.or(cfg.option_i64("ord_c")).ok_or_else(|| CliError::usage("missing --ord-c"))?;
            let alpha = alpha.or(cfg.option_i64("alpha").map(|a| a as u32)).unwrap_or(1);
            commands::gauss(&cfg, ord_c, alpha, unit)
        }
        Command::Fourier => commands::fourier_cmd(&cfg),
        Command::Integrate { unit } => commands::integrate(&cfg, unit),
        Command::PhaseVerify { depth } => commands::phase_verify(&cfg, depth),
        Command::Uniform { mut primes, x0, kinds, depth } => {
            if primes.is_empty() {
                if let Some(Value::Array(a)) = cfg.options.get("primes") {
                    primes = a.iter().filter_map(Value::as_u64).map(|p| p as u32).collect();
                }
            }
            let kinds = kinds
                .iter()
                .map(|k| k.parse::<FieldKind>().map_err(CliError::from))
                .collect::<Result<Vec<_>, _>>()?;
            commands::uniform(&cfg, &primes, &x0, &kinds, depth)
        }
    }?;
    if !cfg.csv {
        outcome.table = None;
    }
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(outcome) => {
            let stdout = io::stdout();
            let mut out = stdout.lock();
            let written = match &outcome.table {
                Some(table) => output::write_csv(&mut out, table),
                None => output::write_json_lines(&mut out, &outcome.records),
            };
            if written.and_then(|_| out.flush()).is_err() {
                return ExitCode::from(2);
            }
            ExitCode::from(if outcome.ok { 0 } else { 1 })
        }
        Err(CliError(msg)) => {
            eprintln!("{}", serde_json::json!({"error": msg}));
            ExitCode::from(2)
        }
    }
}
