//! Command-line front end: verification runs, homology tables, pairings, Massey products
//! and JSON certificates.

pub mod cache;
pub mod certificate;
pub mod commands;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};
use endo_dga::{Context, RepresentativeMode, ScalarMode};
use serde_json::{json, Value};

use crate::cache::{Cache, Entry};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;

/// Invalid configuration or arguments; exits with status 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "configuration error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_error(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Pretty,
    Json,
    Csv,
}

/// Inclusive integer range written `a..b`, or a single integer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IntRange {
    pub start: i64,
    pub end: i64,
}

impl IntRange {
    pub fn values(&self) -> impl Iterator<Item = i64> {
        self.start..=self.end
    }
}

impl FromStr for IntRange {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let parse = |t: &str| t.trim().parse::<i64>().map_err(|e| format!("bad integer {t:?}: {e}"));
        let (start, end) = match s.split_once("..") {
            Some((a, b)) => (parse(a)?, parse(b.strip_prefix('=').unwrap_or(b))?),
            None => {
                let v = parse(s)?;
                (v, v)
            }
        };
        if start > end {
            return Err(format!("empty range {s}"));
        }
        Ok(Self { start, end })
    }
}

impl fmt::Display for IntRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

fn parse_scalars(s: &str) -> std::result::Result<ScalarMode, String> {
    match s {
        "normalized" => Ok(ScalarMode::Normalized),
        "exact" => Ok(ScalarMode::Exact),
        _ => Err(format!("unknown scalar mode {s:?} (normalized | exact)")),
    }
}

fn parse_mode(s: &str) -> std::result::Result<RepresentativeMode, String> {
    match s {
        "order-p" => Ok(RepresentativeMode::OrderP),
        "paper-literal" | "literal" => Ok(RepresentativeMode::PaperLiteral),
        _ => Err(format!("unknown representative mode {s:?} (order-p | literal)")),
    }
}

#[derive(Debug, Parser)]
#[command(name = "endo-dga", version, about = "Exact p-local endomorphism dga: homology, pairings and Massey products")]
pub struct Cli {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Debug, Args)]
pub struct ConfigArgs {
    /// Odd prime.
    #[arg(long, global = true)]
    pub p: Option<u64>,
    /// Working precision M (coefficients mod p^M).
    #[arg(long, global = true, default_value_t = 3)]
    pub precision: u32,
    /// Truncation length N; defaults to 2(p-1)p^(M-1) + 64.
    #[arg(long, global = true)]
    pub length: Option<usize>,
    /// Generator r of (Z/p^2)^x; defaults to the smallest.
    #[arg(long, global = true)]
    pub unit: Option<u64>,
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Pretty)]
    pub format: Format,
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    /// Twist scalars: normalized p^(v(k)+1) or exact r^(k(p-1)) - 1.
    #[arg(long, global = true, value_parser = parse_scalars, default_value = "normalized")]
    pub scalars: ScalarMode,
}

impl ConfigArgs {
    pub fn context(&self) -> Result<Context> {
        let p = self.p.ok_or_else(|| config_error("--p is required"))?;
        Context::builder(p)
            .precision(self.precision)
            .length_opt(self.length)
            .unit_opt(self.unit)
            .scalars(self.scalars)
            .build()
            .map_err(|e| config_error(e.to_string()))
    }
}

#[derive(Clone, Debug, Subcommand)]
pub enum Command {
    /// Check d^2 = 0, witness validity, divisibility of cycles, index-zero multiplicativity
    /// and oracle agreement on random samples.
    Verify {
        #[arg(long, default_value = "-3..3", allow_hyphen_values = true)]
        k: IntRange,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// H^n for a range of degrees with certification status.
    Table {
        #[arg(long, default_value = "-1..10", allow_hyphen_values = true)]
        degrees: IntRange,
    },
    /// Group and certification checks for one degree.
    Homology {
        #[arg(long, allow_hyphen_values = true)]
        n: i64,
    },
    /// Pairing H^(-(2p-2)k+1) x H^((2p-2)k+1) -> Q/Z_(p); the whole table unless --a and --b are given.
    Product {
        #[arg(long, allow_hyphen_values = true)]
        k: i64,
        #[arg(long, requires = "b")]
        a: Option<u64>,
        #[arg(long, requires = "a")]
        b: Option<u64>,
    },
    /// Massey product <gamma_i, p, gamma_j>.
    Massey {
        #[arg(long, allow_hyphen_values = true)]
        i: i64,
        #[arg(long, allow_hyphen_values = true)]
        j: i64,
        #[arg(long, value_parser = parse_mode, default_value = "order-p")]
        mode: RepresentativeMode,
    },
    /// Re-check the witnesses of a JSON certificate.
    Recheck { certificate: PathBuf },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Verify { .. } => "verify",
            Command::Table { .. } => "table",
            Command::Homology { .. } => "homology",
            Command::Product { .. } => "product",
            Command::Massey { .. } => "massey",
            Command::Recheck { .. } => "recheck",
        }
    }

    pub fn inputs(&self, seed: u64) -> Value {
        match self {
            Command::Verify { k, samples } => json!({"k": k.to_string(), "samples": samples, "seed": seed}),
            Command::Table { degrees } => json!({"degrees": degrees.to_string()}),
            Command::Homology { n } => json!({"n": n}),
            Command::Product { k, a, b } => json!({"k": k, "a": a, "b": b}),
            Command::Massey { i, j, mode } => json!({"i": i, "j": j, "mode": mode}),
            Command::Recheck { certificate } => json!({"certificate": certificate}),
        }
    }
}

/// Rendered output and whether every checked property held.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Output {
    pub text: String,
    pub passed: bool,
}

impl Output {
    pub fn exit_code(&self) -> u8 {
        if self.passed {
            EXIT_OK
        } else {
            EXIT_FAILURE
        }
    }
}

pub fn run(cli: &Cli) -> Result<Output> {
    let cfg = &cli.config;
    if cfg.format == Format::Csv && !matches!(cli.command, Command::Table { .. }) {
        return Err(config_error("csv output is only available for the table command"));
    }
    if let Command::Recheck { certificate } = &cli.command {
        return commands::recheck_file(certificate, cfg.format);
    }
    let ctx = cfg.context()?;
    let cache = match &cfg.cache_dir {
        Some(dir) => Some(Cache::open(dir).map_err(|e| config_error(format!("cache directory {}: {e}", dir.display())))?),
        None => None,
    };
    let key = cache::key(&json!({
        "context": certificate::ContextInfo::of(&ctx),
        "command": cli.command.name(),
        "inputs": cli.command.inputs(cfg.seed),
        "seed": cfg.seed,
        "format": format!("{:?}", cfg.format),
        "version": endo_dga::VERSION,
    }));
    if let Some(hit) = cache.as_ref().and_then(|c| c.get(&key)) {
        return Ok(Output {
            text: hit.output,
            passed: hit.passed,
        });
    }
    let out = commands::dispatch(&ctx, &cli.command, cfg)?;
    if let Some(c) = &cache {
        c.put(
            &key,
            &Entry {
                passed: out.passed,
                output: out.text.clone(),
            },
        )?;
    }
    Ok(out)
}

/// Maps an error to its exit status.
pub fn exit_code_for(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ConfigError>().is_some() {
        EXIT_CONFIG
    } else {
        EXIT_FAILURE
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!("-3..3".parse::<IntRange>().unwrap(), IntRange { start: -3, end: 3 });
        assert_eq!("4".parse::<IntRange>().unwrap(), IntRange { start: 4, end: 4 });
        assert_eq!("-1..=2".parse::<IntRange>().unwrap().values().count(), 4);
        assert!("3..1".parse::<IntRange>().is_err());
        assert!("a..b".parse::<IntRange>().is_err());
    }

    #[test]
    fn parses_hyphenated_ranges() {
        let cli = Cli::try_parse_from(["endo-dga", "verify", "--p", "5", "--k", "-3..3", "--samples", "4"]).unwrap();
        assert!(matches!(cli.command, Command::Verify { samples: 4, .. }));
        assert_eq!(cli.config.p, Some(5));
    }

    #[test]
    fn config_errors() {
        for args in [&["endo-dga", "homology", "--p", "4", "--n", "0"][..], &["endo-dga", "homology", "--p", "5", "--precision", "1", "--n", "0"]] {
            let cli = Cli::try_parse_from(args).unwrap();
            let err = run(&cli).unwrap_err();
            assert_eq!(exit_code_for(&err), EXIT_CONFIG);
        }
    }
}
