//! Command execution: resolve configuration, run the estimators, assemble
//! and write the result document.

use crate::args::{
    parse_bandwidth_rule, parse_nominal_levels, BandKindArg, BandwidthSpec, Cli, Command,
    CommonArgs, OutputFormat,
};
use crate::csvio::{read_csv, write_csv_table, InputData, InputKind};
use crate::jsonio::Json;
use crate::CliError;
use debias_core::bandwidth::{
    default_lscv_candidates, default_regression_candidates, kfold_cv_bandwidth, lscv_bandwidth,
    rule_of_thumb,
};
use debias_core::bootstrap::{
    density_band_run, invreg_run, levelset_run, regression_band_run, BootstrapConfig,
    BootstrapMetric, ConfidenceBand, EstimatorChoice,
};
use debias_core::grid::{DEFAULT_GRID_1D, DEFAULT_GRID_2D};
use debias_core::rngstream::derive_seed;
use debias_core::simulation::{run_coverage_study, EstimatorKind, Scenario};
use debias_core::{EvalGrid, KernelSpec, PairedSample, Sample};
use std::path::{Path, PathBuf};
use std::time::Instant;

pub fn execute(cli: Cli) -> Result<(), CliError> {
    let started = Instant::now();
    match cli.command {
        Command::DensityBand(args) => {
            let sample = read_points(&args.common)?;
            let (h, method) = density_bandwidth(&args.bandwidth, &sample)?;
            let grid = density_grid(&sample, h, args.common.grid)?;
            let metric = match args.kind {
                BandKindArg::Fixed => BootstrapMetric::Sup,
                BandKindArg::Variable => BootstrapMetric::WeightedSup,
            };
            let cfg = boot_config(&args.common, metric);
            let run = density_band_run(
                &sample,
                h,
                EstimatorChoice::Debiased {
                    tau: args.common.tau,
                },
                KernelSpec::gaussian(sample.dim()),
                &grid,
                &cfg,
            )
            .map_err(compute_err)?;
            let band = run.band(cfg.alpha).map_err(compute_err)?;

            let mut config = common_config(&args.common, h, method);
            config.push((
                "kind",
                Json::Str(
                    match args.kind {
                        BandKindArg::Fixed => "fixed",
                        BandKindArg::Variable => "variable",
                    }
                    .into(),
                ),
            ));
            let doc = document(
                "density-band",
                config,
                band_payload(&band),
                band.dropped_replicates,
                started,
            );
            let csv = band_csv(&band);
            write_outputs(&args.common.output, args.common.format, doc, csv)
        }
        Command::RegressionBand(args) => {
            let pairs = read_pairs(&args.common)?;
            let (h, method) = regression_bandwidth(&args.bandwidth, &pairs, args.common.seed)?;
            let grid = regression_grid(&pairs, args.common.grid)?;
            let cfg = boot_config(&args.common, BootstrapMetric::Sup);
            let run = regression_band_run(
                &pairs,
                h,
                EstimatorChoice::Debiased {
                    tau: args.common.tau,
                },
                KernelSpec::gaussian(1),
                &grid,
                &cfg,
            )
            .map_err(compute_err)?;
            let band = run.band(cfg.alpha).map_err(compute_err)?;
            let doc = document(
                "regression-band",
                common_config(&args.common, h, method),
                band_payload(&band),
                band.dropped_replicates,
                started,
            );
            let csv = band_csv(&band);
            write_outputs(&args.common.output, args.common.format, doc, csv)
        }
        Command::LevelsetSet(args) => {
            let sample = read_points(&args.common)?;
            let (h, method) = density_bandwidth(&args.bandwidth, &sample)?;
            let grid = density_grid(&sample, h, args.common.grid)?;
            let cfg = boot_config(&args.common, BootstrapMetric::Hausdorff);
            let run = levelset_run(
                &sample,
                args.level,
                h,
                EstimatorChoice::Debiased {
                    tau: args.common.tau,
                },
                KernelSpec::gaussian(sample.dim()),
                &grid,
                &cfg,
            )
            .map_err(compute_err)?;
            let region = run.region(cfg.alpha).map_err(compute_err)?;

            let mut config = common_config(&args.common, h, method);
            config.push(("level", Json::Float(args.level)));
            let points: Vec<Vec<f64>> = region
                .center
                .points()
                .iter()
                .map(|p| p[..sample.dim()].to_vec())
                .collect();
            let payload = Json::object(vec![
                (
                    "points",
                    Json::Array(points.iter().map(|p| Json::float_array(p)).collect()),
                ),
                ("radius", Json::Float(region.radius)),
            ]);
            let csv_rows: Vec<Vec<f64>> = points
                .iter()
                .map(|p| {
                    let mut row = p.clone();
                    row.push(region.radius);
                    row
                })
                .collect();
            let header: Vec<&str> = if sample.dim() == 1 {
                vec!["x", "radius"]
            } else {
                vec!["x", "y", "radius"]
            };
            let doc = document("levelset-set", config, payload, run.dropped(), started);
            write_outputs(
                &args.common.output,
                args.common.format,
                doc,
                (header, csv_rows),
            )
        }
        Command::InvregSet(args) => {
            let pairs = read_pairs(&args.common)?;
            let (h, method) = regression_bandwidth(&args.bandwidth, &pairs, args.common.seed)?;
            let grid = regression_grid(&pairs, args.common.grid)?;
            let cfg = boot_config(&args.common, BootstrapMetric::Hausdorff);
            let run = invreg_run(
                &pairs,
                args.r0,
                h,
                EstimatorChoice::Debiased {
                    tau: args.common.tau,
                },
                KernelSpec::gaussian(1),
                &grid,
                &cfg,
            )
            .map_err(compute_err)?;
            let region = run.region(cfg.alpha).map_err(compute_err)?;
            let normal = run.normal_ci(cfg.alpha).ok();

            let mut config = common_config(&args.common, h, method);
            config.push(("r0", Json::Float(args.r0)));
            let roots = region.center.coords_1d();
            let payload = Json::object(vec![
                ("points", Json::float_array(&roots)),
                ("radius", Json::Float(region.radius)),
                (
                    "normal_ci",
                    match normal {
                        Some(ci) => Json::object(vec![
                            ("lower", Json::Float(ci.lower)),
                            ("upper", Json::Float(ci.upper)),
                            ("center_root", Json::Float(ci.center_root)),
                            ("sigma", Json::Float(ci.sigma)),
                            (
                                "multi_root_fraction",
                                Json::Float(ci.multi_root_fraction),
                            ),
                        ]),
                        None => Json::Null,
                    },
                ),
            ]);
            let csv_rows: Vec<Vec<f64>> = roots
                .iter()
                .map(|&x| vec![x, region.radius])
                .collect();
            let doc = document("invreg-set", config, payload, run.dropped(), started);
            write_outputs(
                &args.common.output,
                args.common.format,
                doc,
                (vec!["x", "radius"], csv_rows),
            )
        }
        Command::SimulateCoverage(args) => {
            let kind = args.scenario.into();
            let rule = parse_bandwidth_rule(args.bandwidth_rule.as_deref(), kind)
                .map_err(CliError::Usage)?;
            let levels = parse_nominal_levels(&args.nominal).map_err(CliError::Usage)?;
            let scenario = Scenario {
                kind,
                n: args.n,
                bandwidth_rule: rule,
                tau: args.tau,
                replicates: args.replicates,
                trials: args.trials,
                nominal_levels: levels,
                seed: args.seed,
                estimator: args.estimator.into(),
            };
            let report = run_coverage_study(&scenario).map_err(compute_err)?;

            let config = vec![
                ("scenario", Json::Str(scenario_name(kind).into())),
                ("n", Json::Int(args.n as i64)),
                ("trials", Json::Int(args.trials as i64)),
                ("replicates", Json::Int(args.replicates as i64)),
                ("bandwidth_rule", Json::Str(rule_name(rule))),
                ("tau", Json::Float(args.tau)),
                (
                    "estimator",
                    Json::Str(
                        match scenario.estimator {
                            EstimatorKind::Debiased => "debiased",
                            EstimatorKind::Plain => "plain",
                        }
                        .into(),
                    ),
                ),
                ("seed", Json::Int(args.seed as i64)),
            ];
            let rows: Vec<Json> = report
                .rows
                .iter()
                .map(|row| {
                    let mut fields = vec![
                        ("nominal", Json::Float(row.nominal)),
                        ("coverage", Json::Float(row.coverage)),
                        ("std_error", Json::Float(row.std_error)),
                        ("hits", Json::Int(row.hits as i64)),
                    ];
                    if let Some(nc) = row.normal_coverage {
                        fields.push(("normal_coverage", Json::Float(nc)));
                    }
                    Json::object(fields)
                })
                .collect();
            let payload = Json::object(vec![
                ("rows", Json::Array(rows)),
                ("valid_trials", Json::Int(report.valid_trials as i64)),
                ("failed_trials", Json::Int(report.failed_trials as i64)),
            ]);
            let csv_rows: Vec<Vec<f64>> = report
                .rows
                .iter()
                .map(|row| {
                    let mut r = vec![row.nominal, row.coverage, row.std_error];
                    if let Some(nc) = row.normal_coverage {
                        r.push(nc);
                    }
                    r
                })
                .collect();
            let header = if report.rows.iter().any(|r| r.normal_coverage.is_some()) {
                vec!["nominal", "coverage", "std_error", "normal_coverage"]
            } else {
                vec!["nominal", "coverage", "std_error"]
            };
            let doc = document(
                "simulate-coverage",
                config,
                payload,
                report.dropped_replicates,
                started,
            );
            write_outputs(&args.output, args.format, doc, (header, csv_rows))
        }
    }
}

fn compute_err(e: debias_core::Error) -> CliError {
    CliError::Compute(e.to_string())
}

fn read_points(common: &CommonArgs) -> Result<Sample, CliError> {
    match read_csv(&common.input, InputKind::Points)? {
        InputData::Points(s) => Ok(s),
        InputData::Pairs(_) => unreachable!("points layout requested"),
    }
}

fn read_pairs(common: &CommonArgs) -> Result<PairedSample, CliError> {
    match read_csv(&common.input, InputKind::Pairs)? {
        InputData::Pairs(ps) => Ok(ps),
        InputData::Points(_) => unreachable!("pairs layout requested"),
    }
}

fn density_bandwidth(spec: &str, sample: &Sample) -> Result<(f64, &'static str), CliError> {
    match BandwidthSpec::parse(spec, &["rot", "lscv"]).map_err(CliError::Usage)? {
        BandwidthSpec::Rot => Ok((rule_of_thumb(sample).map_err(compute_err)?.h, "rot")),
        BandwidthSpec::Lscv => {
            let candidates = default_lscv_candidates(sample).map_err(compute_err)?;
            Ok((
                lscv_bandwidth(sample, &candidates).map_err(compute_err)?.h,
                "lscv",
            ))
        }
        BandwidthSpec::Fixed(h) => Ok((h, "fixed")),
        BandwidthSpec::Cv => unreachable!("rejected by parse"),
    }
}

fn regression_bandwidth(
    spec: &str,
    pairs: &PairedSample,
    seed: u64,
) -> Result<(f64, &'static str), CliError> {
    match BandwidthSpec::parse(spec, &["cv"]).map_err(CliError::Usage)? {
        BandwidthSpec::Cv => {
            let candidates = default_regression_candidates(pairs);
            let choice = kfold_cv_bandwidth(
                pairs,
                debias_core::simulation::CV_FOLDS,
                debias_core::simulation::CV_REPEATS,
                &candidates,
                derive_seed(seed, 0xCF),
            )
            .map_err(compute_err)?;
            Ok((choice.h, "cv"))
        }
        BandwidthSpec::Fixed(h) => Ok((h, "fixed")),
        _ => unreachable!("rejected by parse"),
    }
}

fn density_grid(sample: &Sample, h: f64, grid: Option<usize>) -> Result<EvalGrid, CliError> {
    let build = |points: usize| -> debias_core::Result<EvalGrid> {
        if sample.dim() == 1 {
            let (lo, hi) = sample.range(0);
            EvalGrid::linspace(lo - 3.0 * h, hi + 3.0 * h, points)
        } else {
            let (xlo, xhi) = sample.range(0);
            let (ylo, yhi) = sample.range(1);
            let xs: Vec<f64> = (0..points)
                .map(|i| {
                    xlo - 3.0 * h
                        + (xhi - xlo + 6.0 * h) * i as f64 / (points - 1) as f64
                })
                .collect();
            let ys: Vec<f64> = (0..points)
                .map(|i| {
                    ylo - 3.0 * h
                        + (yhi - ylo + 6.0 * h) * i as f64 / (points - 1) as f64
                })
                .collect();
            EvalGrid::new_2d(xs, ys)
        }
    };
    let points = grid.unwrap_or(if sample.dim() == 1 {
        DEFAULT_GRID_1D
    } else {
        DEFAULT_GRID_2D
    });
    if points < 2 {
        return Err(CliError::Usage("--grid must be at least 2".into()));
    }
    build(points).map_err(compute_err)
}

fn regression_grid(pairs: &PairedSample, grid: Option<usize>) -> Result<EvalGrid, CliError> {
    let points = grid.unwrap_or(DEFAULT_GRID_1D);
    if points < 2 {
        return Err(CliError::Usage("--grid must be at least 2".into()));
    }
    let (lo, hi) = pairs.x_range();
    EvalGrid::linspace(lo, hi, points).map_err(compute_err)
}

fn boot_config(common: &CommonArgs, metric: BootstrapMetric) -> BootstrapConfig {
    BootstrapConfig {
        replicates: common.replicates,
        alpha: common.alpha,
        seed: common.seed,
        metric,
    }
}

/// Resolved configuration echo. The thread count is not part of it:
/// results are contractually independent of scheduling.
fn common_config(common: &CommonArgs, h: f64, method: &str) -> Vec<(&'static str, Json)> {
    vec![
        ("input", Json::Str(common.input.display().to_string())),
        ("alpha", Json::Float(common.alpha)),
        ("bandwidth", Json::Float(h)),
        ("bandwidth_method", Json::Str(method.to_string())),
        ("tau", Json::Float(common.tau)),
        ("replicates", Json::Int(common.replicates as i64)),
        ("seed", Json::Int(common.seed as i64)),
    ]
}

fn band_payload(band: &ConfidenceBand) -> Json {
    let mut fields = vec![
        ("center", Json::float_array(&band.center)),
        ("lower", Json::float_array(&band.lower)),
        ("upper", Json::float_array(&band.upper)),
        ("t_hat", Json::Float(band.t_hat)),
    ];
    match &band.grid {
        EvalGrid::One { xs } => fields.push(("grid", Json::float_array(xs))),
        EvalGrid::Two { xs, ys } => {
            fields.push(("grid_x", Json::float_array(xs)));
            fields.push(("grid_y", Json::float_array(ys)));
        }
    }
    if let Some(scale) = &band.scale {
        fields.push(("scale", Json::float_array(scale)));
    }
    Json::object(fields)
}

fn band_csv(band: &ConfidenceBand) -> (Vec<&'static str>, Vec<Vec<f64>>) {
    match &band.grid {
        EvalGrid::One { xs } => {
            let rows = xs
                .iter()
                .enumerate()
                .map(|(i, &x)| vec![x, band.center[i], band.lower[i], band.upper[i]])
                .collect();
            (vec!["grid", "center", "lower", "upper"], rows)
        }
        EvalGrid::Two { xs, ys } => {
            let mut rows = Vec::with_capacity(xs.len() * ys.len());
            for (ix, &x) in xs.iter().enumerate() {
                for (iy, &y) in ys.iter().enumerate() {
                    let i = ix * ys.len() + iy;
                    rows.push(vec![x, y, band.center[i], band.lower[i], band.upper[i]]);
                }
            }
            (vec!["x", "y", "center", "lower", "upper"], rows)
        }
    }
}

fn document(
    command: &str,
    config: Vec<(&'static str, Json)>,
    payload: Json,
    dropped: usize,
    started: Instant,
) -> Json {
    Json::object(vec![
        ("schema_version", Json::Int(1)),
        ("command", Json::Str(command.into())),
        ("config", Json::Object(
            config.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        )),
        ("payload", payload),
        ("replicate_drops", Json::Int(dropped as i64)),
        (
            "timing_ms",
            Json::Float(started.elapsed().as_secs_f64() * 1e3),
        ),
    ])
}

fn scenario_name(kind: debias_core::simulation::ScenarioKind) -> &'static str {
    use debias_core::simulation::ScenarioKind::*;
    match kind {
        Density1d => "density_1d",
        Levelset2d => "levelset_2d",
        RegressionSine => "regression_sine",
        InvRegExp => "invreg_exp",
    }
}

fn rule_name(rule: debias_core::simulation::BandwidthRule) -> String {
    use debias_core::simulation::BandwidthRule::*;
    match rule {
        Rot => "rot".into(),
        RotX2 => "rot_x2".into(),
        RotHalf => "rot_half".into(),
        Cv => "cv".into(),
        CvX2 => "cv_x2".into(),
        CvHalf => "cv_half".into(),
        Fixed(h) => format!("fixed:{h}"),
    }
}

fn write_outputs(
    output: &Option<PathBuf>,
    format: OutputFormat,
    doc: Json,
    csv: (Vec<&str>, Vec<Vec<f64>>),
) -> Result<(), CliError> {
    let text = doc.to_canonical_string();
    match output {
        Some(path) => {
            std::fs::write(path, &text)
                .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
            if format == OutputFormat::Csv {
                let csv_path = csv_sibling(path);
                write_csv_table(&csv_path, &csv.0, &csv.1)?;
            }
        }
        None => {
            if format == OutputFormat::Csv {
                return Err(CliError::Usage(
                    "--format csv requires --output".into(),
                ));
            }
            print!("{text}");
        }
    }
    Ok(())
}

fn csv_sibling(path: &Path) -> PathBuf {
    path.with_extension("csv")
}
