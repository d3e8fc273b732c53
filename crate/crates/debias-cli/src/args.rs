//! Command-line definition and validation.
//!
//! Usage errors (unknown flags, missing required flags, out-of-range
//! values) exit with code 2 and a message naming the offending flag.

// `!(x > 0.0)` is the NaN-rejecting form of the positivity checks
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use clap::{Args, Parser, Subcommand, ValueEnum};
use debias_core::simulation::{BandwidthRule, EstimatorKind, ScenarioKind};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(
    name = "debias",
    version,
    about = "Debiased kernel/local-linear estimation with bootstrap confidence bands and sets"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simultaneous confidence band for a density from a sample
    DensityBand(DensityBandArgs),
    /// Simultaneous confidence band for a regression function
    RegressionBand(RegressionBandArgs),
    /// Confidence set for a density level set
    LevelsetSet(LevelsetArgs),
    /// Confidence set for inverse regression locations
    InvregSet(InvregArgs),
    /// Monte-Carlo coverage study on a built-in scenario
    SimulateCoverage(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Input CSV file (header required)
    #[arg(long)]
    pub input: PathBuf,
    /// Miscoverage level in (0, 1)
    #[arg(long, default_value_t = 0.05, value_parser = parse_alpha)]
    pub alpha: f64,
    /// Pilot-bandwidth ratio tau = h/b
    #[arg(long, default_value_t = 1.0, value_parser = parse_positive)]
    pub tau: f64,
    /// Bootstrap replicates
    #[arg(long = "boot", default_value_t = 500, value_parser = parse_count)]
    pub replicates: usize,
    /// Grid points (per axis in two dimensions); defaults to 512 in 1-d and
    /// 128 per axis in 2-d
    #[arg(long)]
    pub grid: Option<usize>,
    /// Random seed
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Output JSON path (stdout when omitted)
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Worker threads (defaults to available parallelism; results do not
    /// depend on it)
    #[arg(long)]
    pub threads: Option<usize>,
    /// Also write a flat CSV table next to the JSON document
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BandKindArg {
    Fixed,
    Variable,
}

#[derive(Debug, Args)]
pub struct DensityBandArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Bandwidth: `rot`, `lscv`, or a positive number
    #[arg(long, default_value = "rot")]
    pub bandwidth: String,
    /// Fixed-width or variable-width (weighted sup) band
    #[arg(long, value_enum, default_value_t = BandKindArg::Fixed)]
    pub kind: BandKindArg,
}

#[derive(Debug, Args)]
pub struct RegressionBandArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Bandwidth: `cv` or a positive number
    #[arg(long, default_value = "cv")]
    pub bandwidth: String,
}

#[derive(Debug, Args)]
pub struct LevelsetArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Bandwidth: `rot` or a positive number
    #[arg(long, default_value = "rot")]
    pub bandwidth: String,
    /// Density level defining the set
    #[arg(long)]
    pub level: f64,
}

#[derive(Debug, Args)]
pub struct InvregArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Bandwidth: `cv` or a positive number
    #[arg(long, default_value = "cv")]
    pub bandwidth: String,
    /// Response level whose preimage is sought
    #[arg(long)]
    pub r0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScenarioArg {
    #[value(name = "density_1d")]
    Density1d,
    #[value(name = "levelset_2d")]
    Levelset2d,
    #[value(name = "regression_sine")]
    RegressionSine,
    #[value(name = "invreg_exp")]
    InvRegExp,
}

impl From<ScenarioArg> for ScenarioKind {
    fn from(value: ScenarioArg) -> Self {
        match value {
            ScenarioArg::Density1d => ScenarioKind::Density1d,
            ScenarioArg::Levelset2d => ScenarioKind::Levelset2d,
            ScenarioArg::RegressionSine => ScenarioKind::RegressionSine,
            ScenarioArg::InvRegExp => ScenarioKind::InvRegExp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimatorArg {
    Debiased,
    Plain,
}

impl From<EstimatorArg> for EstimatorKind {
    fn from(value: EstimatorArg) -> Self {
        match value {
            EstimatorArg::Debiased => EstimatorKind::Debiased,
            EstimatorArg::Plain => EstimatorKind::Plain,
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Which built-in study design to run
    #[arg(long, value_enum)]
    pub scenario: ScenarioArg,
    /// Sample size per trial
    #[arg(long, default_value_t = 500, value_parser = parse_count)]
    pub n: usize,
    /// Monte-Carlo trials
    #[arg(long, default_value_t = 200, value_parser = parse_count)]
    pub trials: usize,
    /// Bootstrap replicates per trial
    #[arg(long = "boot", default_value_t = 500, value_parser = parse_count)]
    pub replicates: usize,
    /// Bandwidth rule: rot, rot_x2, rot_half, cv, cv_x2, cv_half, or
    /// fixed:<h> (defaults to rot for density scenarios, cv for regression)
    #[arg(long = "bandwidth-rule")]
    pub bandwidth_rule: Option<String>,
    /// Nominal levels: comma list (`0.9,0.95`) or sweep `start:end:step`
    #[arg(long, default_value = "0.95")]
    pub nominal: String,
    /// Pilot-bandwidth ratio tau = h/b
    #[arg(long, default_value_t = 1.0, value_parser = parse_positive)]
    pub tau: f64,
    /// Bootstrap the debiased or the plain estimator
    #[arg(long, value_enum, default_value_t = EstimatorArg::Debiased)]
    pub estimator: EstimatorArg,
    /// Random seed
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Output JSON path (stdout when omitted)
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Worker threads
    #[arg(long)]
    pub threads: Option<usize>,
    /// Also write a flat CSV coverage table next to the JSON document
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
}

fn parse_alpha(s: &str) -> Result<f64, String> {
    let v: f64 = s
        .parse()
        .map_err(|_| format!("`{s}` is not a number"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("`{s}` must lie strictly between 0 and 1"))
    }
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let v: f64 = s
        .parse()
        .map_err(|_| format!("`{s}` is not a number"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` must be a positive number"))
    }
}

fn parse_count(s: &str) -> Result<usize, String> {
    let v: usize = s
        .parse()
        .map_err(|_| format!("`{s}` is not a positive integer"))?;
    if v >= 1 {
        Ok(v)
    } else {
        Err("must be at least 1".into())
    }
}

/// Bandwidth spec for the data commands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BandwidthSpec {
    Rot,
    Lscv,
    Cv,
    Fixed(f64),
}

impl BandwidthSpec {
    pub fn parse(s: &str, allowed: &[&str]) -> Result<Self, String> {
        let spec = match s {
            "rot" => BandwidthSpec::Rot,
            "lscv" => BandwidthSpec::Lscv,
            "cv" => BandwidthSpec::Cv,
            other => {
                let v: f64 = other.parse().map_err(|_| {
                    format!("--bandwidth `{other}` is neither a keyword nor a number")
                })?;
                if !(v > 0.0 && v.is_finite()) {
                    return Err(format!("--bandwidth `{other}` must be positive"));
                }
                return Ok(BandwidthSpec::Fixed(v));
            }
        };
        let name = match spec {
            BandwidthSpec::Rot => "rot",
            BandwidthSpec::Lscv => "lscv",
            BandwidthSpec::Cv => "cv",
            BandwidthSpec::Fixed(_) => unreachable!(),
        };
        if allowed.contains(&name) {
            Ok(spec)
        } else {
            Err(format!(
                "--bandwidth `{name}` is not valid here; expected one of {allowed:?} or a number"
            ))
        }
    }
}

pub fn parse_bandwidth_rule(
    spec: Option<&str>,
    kind: ScenarioKind,
) -> Result<BandwidthRule, String> {
    let default = match kind {
        ScenarioKind::Density1d | ScenarioKind::Levelset2d => "rot",
        _ => "cv",
    };
    let s = spec.unwrap_or(default);
    match s {
        "rot" => Ok(BandwidthRule::Rot),
        "rot_x2" => Ok(BandwidthRule::RotX2),
        "rot_half" => Ok(BandwidthRule::RotHalf),
        "cv" => Ok(BandwidthRule::Cv),
        "cv_x2" => Ok(BandwidthRule::CvX2),
        "cv_half" => Ok(BandwidthRule::CvHalf),
        other => match other.strip_prefix("fixed:") {
            Some(num) => {
                let v: f64 = num.parse().map_err(|_| {
                    format!("--bandwidth-rule `fixed:{num}` needs a numeric bandwidth")
                })?;
                if v > 0.0 && v.is_finite() {
                    Ok(BandwidthRule::Fixed(v))
                } else {
                    Err(format!("--bandwidth-rule `fixed:{num}` must be positive"))
                }
            }
            None => Err(format!(
                "--bandwidth-rule `{other}` is not one of rot, rot_x2, rot_half, cv, cv_x2, cv_half, fixed:<h>"
            )),
        },
    }
}

/// Expands `--nominal`: either a comma list or an inclusive
/// `start:end:step` sweep.
pub fn parse_nominal_levels(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let levels: Vec<f64> = if parts.len() == 3 {
        let start: f64 = parts[0]
            .parse()
            .map_err(|_| format!("--nominal start `{}` is not a number", parts[0]))?;
        let end: f64 = parts[1]
            .parse()
            .map_err(|_| format!("--nominal end `{}` is not a number", parts[1]))?;
        let step: f64 = parts[2]
            .parse()
            .map_err(|_| format!("--nominal step `{}` is not a number", parts[2]))?;
        if !(step > 0.0) || end < start {
            return Err("--nominal sweep needs start <= end and step > 0".into());
        }
        let count = ((end - start) / step + 1.5).floor() as usize;
        (0..count)
            .map(|i| start + i as f64 * step)
            .filter(|v| *v <= end + 1e-12)
            .collect()
    } else if parts.len() == 1 {
        let mut out = Vec::new();
        for piece in s.split(',') {
            out.push(
                piece
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| format!("--nominal value `{piece}` is not a number"))?,
            );
        }
        out
    } else {
        return Err("--nominal expects `c1,c2,...` or `start:end:step`".into());
    };
    if levels.is_empty()
        || levels.iter().any(|c| !(*c > 0.0 && *c < 1.0))
        || levels.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(
            "--nominal levels must be strictly increasing and inside (0, 1)".into(),
        );
    }
    Ok(levels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nominal_sweep_expansion() {
        let levels = parse_nominal_levels("0.80:0.99:0.01").unwrap();
        assert_eq!(levels.len(), 20);
        assert!((levels[0] - 0.80).abs() < 1e-12);
        assert!((levels[19] - 0.99).abs() < 1e-12);

        assert_eq!(parse_nominal_levels("0.9,0.95").unwrap(), vec![0.9, 0.95]);
        assert!(parse_nominal_levels("0.95,0.9").is_err());
        assert!(parse_nominal_levels("1.5").is_err());
        assert!(parse_nominal_levels("").is_err());
    }

    #[test]
    fn bandwidth_specs() {
        assert_eq!(
            BandwidthSpec::parse("rot", &["rot", "lscv"]).unwrap(),
            BandwidthSpec::Rot
        );
        assert_eq!(
            BandwidthSpec::parse("0.25", &["rot"]).unwrap(),
            BandwidthSpec::Fixed(0.25)
        );
        assert!(BandwidthSpec::parse("cv", &["rot", "lscv"]).is_err());
        assert!(BandwidthSpec::parse("-1", &["rot"]).is_err());
    }

    #[test]
    fn bandwidth_rules() {
        use debias_core::simulation::ScenarioKind;
        assert_eq!(
            parse_bandwidth_rule(None, ScenarioKind::Density1d).unwrap(),
            BandwidthRule::Rot
        );
        assert_eq!(
            parse_bandwidth_rule(None, ScenarioKind::RegressionSine).unwrap(),
            BandwidthRule::Cv
        );
        assert_eq!(
            parse_bandwidth_rule(Some("fixed:0.3"), ScenarioKind::Density1d).unwrap(),
            BandwidthRule::Fixed(0.3)
        );
        assert!(parse_bandwidth_rule(Some("bogus"), ScenarioKind::Density1d).is_err());
    }

    #[test]
    fn verify_cli_definition() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
