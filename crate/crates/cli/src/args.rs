//! Command-line flags and the optional `key=value` config file.

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qlaplace::transform::{CatalogFunction, Sign};

use crate::grid::{parse_k_schedule, GridSpec, KSchedule};
use crate::table::Format;

#[derive(Debug, Parser)]
#[command(name = "qlt", version, about = "Tsallis q-Laplace transform toolkit")]
pub struct Cli {
    /// File of `key=value` lines used as defaults for the subcommand's flags
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Forward transform by quadrature against the closed form
    #[command(args_override_self = true)]
    Transform(TransformArgs),
    /// q-Post-Widder inversion of a catalog transform
    #[command(args_override_self = true)]
    Invert(InvertArgs),
    /// Taylor coefficients recovered from the closed-form transform
    #[command(args_override_self = true)]
    Roundtrip(RoundtripArgs),
    /// Operational identities of the transform
    #[command(args_override_self = true)]
    Identities(IdentitiesArgs),
    /// Density of states from a q-deformed partition function
    #[command(args_override_self = true)]
    Statmech(StatmechArgs),
}

pub const SUBCOMMANDS: [&str; 5] = ["transform", "invert", "roundtrip", "identities", "statmech"];

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write to this file instead of standard output
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
    /// Omit the metadata header
    #[arg(long)]
    pub no_meta: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SignArg {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Args)]
pub struct FunctionArgs {
    /// Catalog function
    #[arg(long = "fn", value_name = "NAME", value_parser = CatalogFunction::NAMES)]
    pub name: String,
    /// Monomial index: the function is t^(m-1)
    #[arg(long, default_value_t = 1)]
    pub m: u32,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = SignArg::Minus)]
    pub sign: SignArg,
    /// Deformation of the q-exponential inside the deformed variants
    #[arg(long, default_value_t = 0.7)]
    pub qprime: f64,
}

impl FunctionArgs {
    pub fn build(&self) -> qlaplace::Result<CatalogFunction> {
        let sign = match self.sign {
            SignArg::Plus => Sign::Plus,
            SignArg::Minus => Sign::Minus,
        };
        CatalogFunction::from_name(&self.name, self.m, self.alpha, sign, self.qprime)
    }
}

#[derive(Debug, Clone, Args)]
pub struct TransformArgs {
    #[arg(long)]
    pub q: f64,
    #[command(flatten)]
    pub function: FunctionArgs,
    #[arg(long, default_value = "1:10:10")]
    pub s_grid: GridSpec,
    /// Coefficients kept in the closed-form series
    #[arg(long, default_value_t = 60)]
    pub terms: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XiArg {
    PerTerm,
    Fixed(u32),
}

fn parse_xi(s: &str) -> Result<XiArg, String> {
    match s {
        "per-term" => Ok(XiArg::PerTerm),
        _ => s
            .parse()
            .map(XiArg::Fixed)
            .map_err(|_| format!("expected 'per-term' or an integer m, got '{s}'")),
    }
}

#[derive(Debug, Clone, Args)]
pub struct InvertArgs {
    #[arg(long)]
    pub q: f64,
    #[command(flatten)]
    pub function: FunctionArgs,
    #[arg(long, default_value = "0.5:2:4")]
    pub t_grid: GridSpec,
    #[arg(long, default_value = "4,8,16,32,64", value_parser = parse_k_schedule)]
    pub k_schedule: KSchedule,
    /// `per-term`, or an integer m for a single fixed xi_m
    #[arg(long, default_value = "per-term", value_parser = parse_xi)]
    pub xi: XiArg,
    #[arg(long, default_value_t = 40)]
    pub terms: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct RoundtripArgs {
    #[arg(long)]
    pub q: f64,
    #[command(flatten)]
    pub function: FunctionArgs,
    /// Highest Taylor order compared
    #[arg(long, default_value_t = 20)]
    pub terms: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct IdentitiesArgs {
    #[arg(long)]
    pub q: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    IdealGas,
    Oscillator,
}

#[derive(Debug, Clone, Args)]
pub struct StatmechArgs {
    #[arg(long)]
    pub q: f64,
    #[arg(long, value_enum)]
    pub model: ModelArg,
    /// Spatial dimension
    #[arg(long = "D")]
    pub d: u32,
    /// Particle count
    #[arg(long = "N")]
    pub n: u32,
    #[arg(long, default_value_t = 1.0)]
    pub volume: f64,
    #[arg(long, default_value_t = 1.0)]
    pub mass: f64,
    #[arg(long, default_value_t = 1.0)]
    pub h: f64,
    #[arg(long, default_value_t = 1.0)]
    pub omega: f64,
    #[arg(long, default_value_t = 1.0)]
    pub hbar: f64,
    #[arg(long = "E-grid", default_value = "0.5:5:10")]
    pub e_grid: GridSpec,
    #[arg(long, default_value = "16,32,64", value_parser = parse_k_schedule)]
    pub k_schedule: KSchedule,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Turn config lines into flags: `key=value` becomes `--key value`,
/// `key=true` a bare `--key`, and `key=false` nothing.
pub fn config_to_flags(text: &str) -> Result<Vec<String>, String> {
    let mut flags = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key=value, got '{line}'", i + 1))?;
        let key = key.trim().trim_start_matches("--");
        let value = value.trim();
        if key.is_empty() {
            return Err(format!("config line {}: empty key", i + 1));
        }
        if key == "config" {
            return Err(format!(
                "config line {}: nested config files are not supported",
                i + 1
            ));
        }
        match value {
            "true" => flags.push(format!("--{key}")),
            "false" => {}
            _ => {
                flags.push(format!("--{key}"));
                flags.push(value.to_owned());
            }
        }
    }
    Ok(flags)
}

fn config_path(args: &[String]) -> Option<String> {
    let mut it = args.iter().skip(1);
    let mut found = None;
    while let Some(a) = it.next() {
        if a == "--config" {
            found = it.next().cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            found = Some(p.to_owned());
        }
    }
    found
}

/// Splice the config file's flags in right after the subcommand name so
/// that flags given on the command line, which come later, win.
pub fn expand_args(raw: Vec<OsString>) -> Result<Vec<String>, String> {
    let args: Vec<String> = raw
        .into_iter()
        .map(|a| {
            a.into_string()
                .map_err(|a| format!("argument is not valid UTF-8: {a:?}"))
        })
        .collect::<Result<_, _>>()?;
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text =
        fs::read_to_string(&path).map_err(|e| format!("cannot read config file '{path}': {e}"))?;
    let flags = config_to_flags(&text)?;
    let position = args
        .iter()
        .enumerate()
        .skip(1)
        .find(|(i, a)| SUBCOMMANDS.contains(&a.as_str()) && args[i - 1] != "--config")
        .map(|(i, _)| i);
    let Some(position) = position else {
        return Ok(args);
    };
    let mut out = args[..=position].to_vec();
    out.extend(flags);
    out.extend_from_slice(&args[position + 1..]);
    Ok(out)
}
