//! Job configuration: a JSON file merged with command-line flags, flags
//! taking precedence.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;
use serde_json::Value;

use naphase::charfun::{Region, StepFunction};
use naphase::expr::parse_phase;
use naphase::integrate::{BruteOptions, Exec, DEFAULT_BUDGET};
use naphase::poly::RatPoly;
use naphase::{FieldConfig, FieldKind};

use crate::CliError;

#[derive(Args, Debug, Default)]
pub struct JobArgs {
    /// JSON job file; flags override its entries.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// padic or laurent.
    #[arg(long, global = true)]
    pub field: Option<String>,
    #[arg(long, global = true)]
    pub p: Option<u32>,
    /// Number of variables (default: largest index in the phase).
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true)]
    pub precision: Option<u32>,
    /// Degree cutoff of the power series.
    #[arg(long, global = true)]
    pub degree: Option<u32>,
    /// Phase, e.g. "x1^2 + x1*x2 + x2^2".
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub f: Option<String>,
    #[arg(long = "phi-file", global = true)]
    pub phi_file: Option<PathBuf>,
    #[arg(long = "omega-file", global = true)]
    pub omega_file: Option<PathBuf>,
    /// Inclusive range of ord λ, e.g. "-4..-1".
    #[arg(long = "lambda-ord", global = true, allow_hyphen_values = true)]
    pub lambda_ord: Option<String>,
    /// Maximal number of cosets one integral may enumerate.
    #[arg(long, global = true)]
    pub budget: Option<u64>,
    /// Flat CSV tables instead of JSON lines for sweeps.
    #[arg(long, global = true)]
    pub csv: bool,
    /// Disable the data-parallel enumeration.
    #[arg(long, global = true)]
    pub sequential: bool,
}

/// Entries accepted in a job file.
#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct JobFile {
    field: Option<String>,
    p: Option<u32>,
    n: Option<usize>,
    precision: Option<u32>,
    degree: Option<u32>,
    f: Option<String>,
    phi: Option<Value>,
    phi_file: Option<PathBuf>,
    omega: Option<Value>,
    omega_file: Option<PathBuf>,
    lambda_ord: Option<String>,
    budget: Option<u64>,
    csv: Option<bool>,
    #[serde(default)]
    options: serde_json::Map<String, Value>,
}

#[derive(Debug)]
pub struct JobConfig {
    pub kind: FieldKind,
    pub p: Option<u32>,
    pub n: Option<usize>,
    pub precision: u32,
    pub degree: u32,
    pub f: Option<String>,
    pub phi: Option<Value>,
    pub omega: Option<Value>,
    pub lambda_ord: Option<(i64, i64)>,
    pub budget: u64,
    pub csv: bool,
    pub sequential: bool,
    /// Command-specific entries from the job file.
    pub options: serde_json::Map<String, Value>,
}

fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

pub fn parse_range(s: &str) -> Result<(i64, i64), CliError> {
    let bad = || CliError::usage(format!("expected a range a..b, got {s:?}"));
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let a: i64 = a.trim().parse().map_err(|_| bad())?;
    let b: i64 = b.trim().parse().map_err(|_| bad())?;
    if a > b {
        return Err(bad());
    }
    Ok((a, b))
}

impl JobConfig {
    pub fn load(args: &JobArgs) -> Result<Self, CliError> {
        let file: JobFile = match &args.config {
            Some(path) => serde_json::from_value(read_json(path)?)
                .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?,
            None => JobFile::default(),
        };
        let base = args.config.as_deref().and_then(Path::parent).unwrap_or(Path::new("."));
        let kind = args.field.clone().or(file.field).unwrap_or_else(|| "padic".into());
        let kind: FieldKind = kind.parse().map_err(|e: naphase::Error| CliError::usage(e.to_string()))?;
        let phi = match (&args.phi_file, file.phi, file.phi_file) {
            (Some(path), _, _) => Some(read_json(path)?),
            (None, Some(v), _) => Some(v),
            (None, None, Some(path)) => Some(read_json(&base.join(path))?),
            _ => None,
        };
        let omega = match (&args.omega_file, file.omega, file.omega_file) {
            (Some(path), _, _) => Some(read_json(path)?),
            (None, Some(v), _) => Some(v),
            (None, None, Some(path)) => Some(read_json(&base.join(path))?),
            _ => None,
        };
        let lambda_ord = args.lambda_ord.clone().or(file.lambda_ord).map(|s| parse_range(&s)).transpose()?;
        let budget = args.budget.or(file.budget).unwrap_or(DEFAULT_BUDGET);
        if budget == 0 {
            return Err(CliError::usage("budget must be positive"));
        }
        Ok(JobConfig {
            kind,
            p: args.p.or(file.p),
            n: args.n.or(file.n),
            precision: args.precision.or(file.precision).unwrap_or(24),
            degree: args.degree.or(file.degree).unwrap_or(12),
            f: args.f.clone().or(file.f),
            phi,
            omega,
            lambda_ord,
            budget,
            csv: args.csv || file.csv.unwrap_or(false),
            sequential: args.sequential,
            options: file.options,
        })
    }

    pub fn field(&self) -> Result<FieldConfig, CliError> {
        let p = self.p.ok_or_else(|| CliError::usage("missing --p"))?;
        FieldConfig::new(self.kind, p, self.precision).map_err(|e| CliError::usage(e.to_string()))
    }

    pub fn phase(&self) -> Result<RatPoly, CliError> {
        let src = self.f.as_deref().ok_or_else(|| CliError::usage("missing --f"))?;
        parse_phase(src, self.n).map_err(CliError::from)
    }

    pub fn nvars(&self) -> Result<usize, CliError> {
        match (self.n, &self.f) {
            (Some(n), _) => Ok(n),
            (None, Some(_)) => Ok(self.phase()?.nvars()),
            (None, None) => match &self.phi {
                Some(v) => v.get("n").and_then(Value::as_u64).map(|n| n as usize).ok_or_else(|| CliError::usage("missing --n")),
                None => Err(CliError::usage("missing --n")),
            },
        }
    }

    /// `φ`, by default the indicator of `O^n`.
    pub fn phi(&self, field: &FieldConfig, n: usize) -> Result<StepFunction, CliError> {
        match &self.phi {
            Some(v) => Ok(StepFunction::from_json(field, v)?),
            None => Ok(Region::whole(field, n).indicator()),
        }
    }

    /// `Ω`, by default `O^n`.
    pub fn omega(&self, field: &FieldConfig, n: usize) -> Result<Region, CliError> {
        match &self.omega {
            Some(v) => Ok(Region::from_json(field, v)?),
            None => Ok(Region::whole(field, n)),
        }
    }

    pub fn brute(&self) -> BruteOptions {
        BruteOptions {
            budget: self.budget,
            exec: if self.sequential { Exec::Sequential } else { Exec::default() },
            ..Default::default()
        }
    }

    pub fn option_i64(&self, key: &str) -> Option<i64> {
        self.options.get(key).and_then(Value::as_i64)
    }
}
