//! Run configuration: an optional JSON file overlaid by command-line flags.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use platoon_core::allocation::Scheme;
use platoon_core::money::{parse_money, ratio};
use platoon_core::oracle::Guards;
use platoon_core::{FleetSpec, Money};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Flags shared by every subcommand. Each one overrides the matching key of
/// `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON configuration file.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Number of electric trucks.
    #[arg(long = "ne")]
    pub n_e: Option<usize>,
    /// Number of fuel-powered trucks.
    #[arg(long = "nf")]
    pub n_f: Option<usize>,
    /// ET follower benefit rate (currency per km), e.g. 0.048.
    #[arg(long = "eps-e")]
    pub eps_e: Option<String>,
    /// FPT follower benefit rate (currency per km), e.g. 0.07.
    #[arg(long = "eps-f")]
    pub eps_f: Option<String>,
    /// Platoon size limit M.
    #[arg(long = "max-size", conflicts_with = "m_range")]
    pub max_size: Option<usize>,
    /// Inclusive range of size limits, e.g. 3..9.
    #[arg(long = "m-range", value_name = "A..B")]
    pub m_range: Option<String>,
    /// Leader-subsidy fractions, comma separated.
    #[arg(long = "lambda", value_name = "L1,L2,...")]
    pub lambda: Option<String>,
    /// Baseline schemes, comma separated (F-ES, P-ES, FO, TP, LS).
    #[arg(long = "scheme", value_name = "S1,S2,...")]
    pub scheme: Option<String>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Directory to write output files into.
    #[arg(long = "out", value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Decimal places for fixed-point output.
    #[arg(long)]
    pub precision: Option<usize>,
    /// Report infeasible size limits as status rows instead of failing.
    #[arg(long = "allow-infeasible-skip")]
    pub allow_infeasible_skip: bool,
    /// Print exact fractions instead of fixed-point decimals.
    #[arg(long)]
    pub exact: bool,
    /// Largest fleet for exhaustive structure enumeration.
    #[arg(long = "partition-cap")]
    pub partition_cap: Option<usize>,
    /// Largest fleet for exhaustive subset enumeration.
    #[arg(long = "subset-cap")]
    pub subset_cap: Option<usize>,
}

/// A JSON number or string holding a decimal or fraction.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub(crate) enum NumText {
    Num(serde_json::Number),
    Text(String),
}

impl NumText {
    pub(crate) fn to_money(&self) -> Result<Money, CliError> {
        let text = match self {
            NumText::Num(n) => n.to_string(),
            NumText::Text(s) => s.clone(),
        };
        parse_money(&text).map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    n_e: Option<usize>,
    n_f: Option<usize>,
    eps_e: Option<NumText>,
    eps_f: Option<NumText>,
    max_size: Option<usize>,
    m_values: Option<Vec<usize>>,
    m_range: Option<String>,
    lambda_values: Option<Vec<NumText>>,
    schemes: Option<Vec<String>>,
    output_dir: Option<PathBuf>,
    format: Option<Format>,
    precision: Option<usize>,
    allow_infeasible_skip: Option<bool>,
    exact: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub n_e: usize,
    pub n_f: usize,
    pub eps_e: Money,
    pub eps_f: Money,
    pub m_values: Vec<usize>,
    pub lambda_values: Vec<Money>,
    pub schemes: Vec<Scheme>,
    pub output_dir: Option<PathBuf>,
    pub format: Format,
    pub precision: usize,
    pub allow_infeasible_skip: bool,
    pub exact: bool,
    pub guards: Guards,
}

impl RunConfig {
    pub fn resolve(args: &CommonArgs) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(path) => read_file_config(path)?,
            None => FileConfig::default(),
        };

        let n_e = args.n_e.or(file.n_e).ok_or_else(|| missing("--ne"))?;
        let n_f = args.n_f.or(file.n_f).ok_or_else(|| missing("--nf"))?;
        let eps_e = pick_money(&args.eps_e, &file.eps_e, "--eps-e")?;
        let eps_f = pick_money(&args.eps_f, &file.eps_f, "--eps-f")?;

        let m_values = if let Some(m) = args.max_size {
            vec![m]
        } else if let Some(r) = &args.m_range {
            parse_range(r)?
        } else if let Some(v) = file.m_values {
            v
        } else if let Some(r) = &file.m_range {
            parse_range(r)?
        } else if let Some(m) = file.max_size {
            vec![m]
        } else {
            return Err(missing("--max-size or --m-range"));
        };
        if m_values.is_empty() {
            return Err(CliError::Config("at least one size limit M is required".into()));
        }
        if let Some(m) = m_values.iter().find(|&&m| m < 2) {
            return Err(CliError::Config(format!("size limit M={m} is below 2")));
        }

        let lambda_values = match (&args.lambda, file.lambda_values) {
            (Some(text), _) => text
                .split(',')
                .map(|s| parse_money(s).map_err(|e| CliError::Config(e.to_string())))
                .collect::<Result<Vec<_>, _>>()?,
            (None, Some(v)) => v.iter().map(NumText::to_money).collect::<Result<Vec<_>, _>>()?,
            (None, None) => (1..=10).map(|k| ratio(k, 10)).collect(),
        };
        let one = ratio(1, 1);
        if let Some(bad) = lambda_values
            .iter()
            .find(|l| **l <= Money::from_integer(0.into()) || **l > one)
        {
            return Err(CliError::Config(format!(
                "subsidy fraction {} is outside (0, 1]",
                platoon_core::money::format_exact(bad)
            )));
        }

        let scheme_names: Option<Vec<String>> = args
            .scheme
            .as_ref()
            .map(|s| s.split(',').map(str::to_string).collect())
            .or(file.schemes);
        let schemes = match scheme_names {
            Some(names) => names
                .iter()
                .map(|s| s.parse::<Scheme>().map_err(|e| CliError::Config(e.to_string())))
                .collect::<Result<Vec<_>, _>>()?,
            None => Scheme::ALL.to_vec(),
        };

        let mut guards = Guards::default();
        if let Some(c) = args.partition_cap {
            guards.partition_n = c;
        }
        if let Some(c) = args.subset_cap {
            guards.subset_n = c;
        }

        let cfg = RunConfig {
            n_e,
            n_f,
            eps_e,
            eps_f,
            m_values,
            lambda_values,
            schemes,
            output_dir: args.out.clone().or(file.output_dir),
            format: args.format.or(file.format).unwrap_or_default(),
            precision: args.precision.or(file.precision).unwrap_or(6),
            allow_infeasible_skip: args.allow_infeasible_skip || file.allow_infeasible_skip.unwrap_or(false),
            exact: args.exact || file.exact.unwrap_or(false),
            guards,
        };
        // Surface fleet-level errors (N < 2, rates) before any command runs.
        cfg.fleet(cfg.m_values[0])?;
        Ok(cfg)
    }

    pub fn fleet(&self, max_size: usize) -> Result<FleetSpec, CliError> {
        Ok(FleetSpec::new(
            self.n_e,
            self.n_f,
            self.eps_e.clone(),
            self.eps_f.clone(),
            max_size,
        )?)
    }
}

fn read_file_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("malformed config {}: {e}", path.display())))
}

fn missing(flag: &str) -> CliError {
    CliError::Config(format!("missing required setting {flag}"))
}

fn pick_money(flag: &Option<String>, file: &Option<NumText>, name: &str) -> Result<Money, CliError> {
    match (flag, file) {
        (Some(s), _) => parse_money(s).map_err(|e| CliError::Config(e.to_string())),
        (None, Some(v)) => v.to_money(),
        (None, None) => Err(missing(name)),
    }
}

/// `A..B` (inclusive), `A..=B`, or a single `A`.
pub fn parse_range(text: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::Config(format!("malformed size range {text:?}; expected A..B"));
    let t = text.trim();
    let Some((a, b)) = t.split_once("..") else {
        return Ok(vec![t.parse().map_err(|_| bad())?]);
    };
    let b = b.strip_prefix('=').unwrap_or(b);
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().parse().map_err(|_| bad())?;
    if a > b {
        return Err(bad());
    }
    Ok((a..=b).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("3..9").unwrap(), (3..=9).collect::<Vec<_>>());
        assert_eq!(parse_range("3..=4").unwrap(), vec![3, 4]);
        assert_eq!(parse_range("5").unwrap(), vec![5]);
        assert!(parse_range("9..3").is_err());
        assert!(parse_range("a..b").is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        std::fs::write(
            &path,
            r#"{"n_e": 3, "n_f": 6, "eps_e": 0.048, "eps_f": "0.07", "m_values": [3, 4],
                "lambda_values": [0.2], "format": "json", "precision": 4}"#,
        )
        .unwrap();
        let args = CommonArgs {
            config: Some(path),
            n_f: Some(5),
            precision: Some(2),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(&args).unwrap();
        assert_eq!((cfg.n_e, cfg.n_f), (3, 5));
        assert_eq!(cfg.eps_e, ratio(48, 1000));
        assert_eq!(cfg.eps_f, ratio(7, 100));
        assert_eq!(cfg.m_values, vec![3, 4]);
        assert_eq!(cfg.lambda_values, vec![ratio(1, 5)]);
        assert_eq!(cfg.format, Format::Json);
        assert_eq!(cfg.precision, 2);
        assert_eq!(cfg.schemes, Scheme::ALL.to_vec());
    }

    #[test]
    fn rejects_unknown_keys_and_bad_lambda() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        std::fs::write(&path, r#"{"n_e": 3, "bogus": 1}"#).unwrap();
        let args = CommonArgs {
            config: Some(path),
            ..Default::default()
        };
        assert!(matches!(RunConfig::resolve(&args), Err(CliError::Config(_))));

        let args = CommonArgs {
            n_e: Some(1),
            n_f: Some(1),
            eps_e: Some("0.05".into()),
            eps_f: Some("0.07".into()),
            max_size: Some(2),
            lambda: Some("0.5,1.5".into()),
            ..Default::default()
        };
        assert!(RunConfig::resolve(&args).is_err());
    }
}
