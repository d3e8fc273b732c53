//! Synthetic data generators with analytic truths, and the Monte-Carlo
//! coverage harness that measures empirical band/set coverage against
//! nominal levels.
//!
//! Four study designs are built in:
//!
//! * `Density1d` — the two-component normal mixture `0.6 N(0,1) + 0.4 N(4,1)`
//!   with sup-metric density bands.
//! * `Levelset2d` — an equal-weight three-component isotropic mixture in the
//!   plane, confidence sets for the `lambda = 0.25` density contour.
//! * `RegressionSine` — `Y = sin(pi X) + N(0, 0.1^2)`, `X ~ U[0,1]`,
//!   sup-metric regression bands with 5-fold cross-validated bandwidths.
//! * `InvRegExp` — `Y = 1 - exp(-X) + N(0, 0.2^2)`, confidence sets for the
//!   location where the regression hits `r0 = 0.5` (the root is `ln 2`),
//!   plus a normal-approximation interval from the bootstrap root spread.
//!
//! Trial `m` derives every random stream from `(seed, m)`, so reports are
//! reproducible and independent of thread scheduling. Within a trial the
//! band or set is rebuilt at each nominal level from one shared set of
//! replicate statistics.

use crate::bandwidth::{default_regression_candidates, kfold_cv_bandwidth, rule_of_thumb};
use crate::bootstrap::{
    density_band_run, invreg_run, levelset_run, regression_band_run, BootstrapConfig,
    BootstrapMetric, ConfidenceBand, EstimatorChoice, RegionSet,
};
use crate::error::{Error, Result};
use crate::geometry::{dilation_covers, directed_hausdorff, extract_level_set_2d, PointSet};
use crate::grid::{linspace_vec, EvalGrid};
use crate::kernel::KernelSpec;
use crate::normal::{std_normal_pdf, std_normal_pdf_d};
use crate::rngstream::{derive_seed, stream_rng, Domain};
use crate::sample::{PairedSample, Sample};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

/// Density level targeted by the 2-d level-set design.
pub const LEVELSET_LAMBDA: f64 = 0.25;
/// Response level targeted by the inverse-regression design.
pub const INVREG_R0: f64 = 0.5;
/// Folds and repeats for per-trial bandwidth cross-validation.
pub const CV_FOLDS: usize = 5;
pub const CV_REPEATS: usize = 10;
/// Grid resolution for the regression scenarios (the density scenarios use
/// the estimator defaults: 512 points in 1-d, 128 per axis in 2-d).
pub const REGRESSION_GRID: usize = 256;
/// Truth discretization refinement over the estimation grid.
pub const TRUTH_REFINE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    Density1d,
    Levelset2d,
    RegressionSine,
    InvRegExp,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BandwidthRule {
    Rot,
    RotX2,
    RotHalf,
    Cv,
    CvX2,
    CvHalf,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorKind {
    Debiased,
    Plain,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub n: usize,
    pub bandwidth_rule: BandwidthRule,
    pub tau: f64,
    /// Bootstrap replicates per trial.
    pub replicates: usize,
    /// Monte-Carlo trials.
    pub trials: usize,
    /// Strictly increasing confidence levels in (0, 1).
    pub nominal_levels: Vec<f64>,
    pub seed: u64,
    pub estimator: EstimatorKind,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.n < 20 {
            return Err(Error::InvalidConfig(format!(
                "scenario needs n >= 20, got {}",
                self.n
            )));
        }
        if self.trials < 1 || self.replicates < 1 {
            return Err(Error::InvalidConfig(
                "need at least one trial and one replicate".into(),
            ));
        }
        if !(self.tau > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "tau must be positive, got {}",
                self.tau
            )));
        }
        if self.nominal_levels.is_empty()
            || self
                .nominal_levels
                .iter()
                .any(|c| !(*c > 0.0 && *c < 1.0))
            || self.nominal_levels.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::InvalidConfig(
                "nominal levels must be strictly increasing within (0, 1)".into(),
            ));
        }
        match self.kind {
            ScenarioKind::Density1d | ScenarioKind::Levelset2d => {
                if matches!(
                    self.bandwidth_rule,
                    BandwidthRule::Cv | BandwidthRule::CvX2 | BandwidthRule::CvHalf
                ) {
                    return Err(Error::InvalidConfig(
                        "density scenarios use rule-of-thumb or fixed bandwidths".into(),
                    ));
                }
            }
            ScenarioKind::RegressionSine | ScenarioKind::InvRegExp => {
                if matches!(
                    self.bandwidth_rule,
                    BandwidthRule::Rot | BandwidthRule::RotX2 | BandwidthRule::RotHalf
                ) {
                    return Err(Error::InvalidConfig(
                        "regression scenarios use cross-validated or fixed bandwidths".into(),
                    ));
                }
            }
        }
        if let BandwidthRule::Fixed(h) = self.bandwidth_rule {
            if !(h > 0.0) {
                return Err(Error::InvalidBandwidth(h));
            }
        }
        Ok(())
    }

    fn estimator_choice(&self) -> EstimatorChoice {
        match self.estimator {
            EstimatorKind::Debiased => EstimatorChoice::Debiased { tau: self.tau },
            EstimatorKind::Plain => EstimatorChoice::Plain,
        }
    }
}

/// Coverage at one nominal level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageRow {
    pub nominal: f64,
    pub coverage: f64,
    /// Binomial Monte-Carlo standard error `sqrt(c (1-c) / M)`.
    pub std_error: f64,
    pub hits: usize,
    /// Inverse-regression scenarios also track the normal-approximation
    /// interval built from the same replicates.
    pub normal_coverage: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct CoverageReport {
    pub scenario: Scenario,
    pub rows: Vec<CoverageRow>,
    pub valid_trials: usize,
    pub failed_trials: usize,
    /// Total bootstrap replicates dropped across trials.
    pub dropped_replicates: usize,
}

// ---------------------------------------------------------------------------
// data generators and analytic truths

/// Draws from the mixture `0.6 N(0,1) + 0.4 N(4,1)`.
pub fn gen_density_1d(n: usize, rng: &mut ChaCha8Rng) -> Sample {
    let pts = (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            if rng.random::<f64>() < 0.6 {
                z
            } else {
                4.0 + z
            }
        })
        .collect();
    Sample::from_1d(pts).expect("generated sample is valid")
}

pub fn true_density_1d(x: f64) -> f64 {
    0.6 * std_normal_pdf(x) + 0.4 * std_normal_pdf(x - 4.0)
}

/// Centers of the three-component planar mixture.
pub const LEVELSET_CENTERS: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [1.5, 0.5]];
/// Component standard deviation of the planar mixture.
pub const LEVELSET_SIGMA: f64 = 0.3;

/// Equal-weight draws from the three isotropic components.
pub fn gen_levelset_2d(n: usize, rng: &mut ChaCha8Rng) -> Sample {
    let pts = (0..n)
        .map(|_| {
            let c = LEVELSET_CENTERS[rng.random_range(0..3)];
            let z1: f64 = StandardNormal.sample(rng);
            let z2: f64 = StandardNormal.sample(rng);
            [c[0] + LEVELSET_SIGMA * z1, c[1] + LEVELSET_SIGMA * z2]
        })
        .collect();
    Sample::from_2d(pts).expect("generated sample is valid")
}

pub fn true_density_2d(x: f64, y: f64) -> f64 {
    let s2 = LEVELSET_SIGMA * LEVELSET_SIGMA;
    LEVELSET_CENTERS
        .iter()
        .map(|c| {
            let r2 = ((x - c[0]) * (x - c[0]) + (y - c[1]) * (y - c[1])) / s2;
            std_normal_pdf_d(r2, 2) / s2
        })
        .sum::<f64>()
        / 3.0
}

/// `X ~ U[0,1]`, `Y = sin(pi X) + N(0, 0.1^2)`.
pub fn gen_regression_sine(n: usize, rng: &mut ChaCha8Rng) -> PairedSample {
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let xi: f64 = rng.random_range(0.0..1.0);
        let eps: f64 = StandardNormal.sample(rng);
        x.push(xi);
        y.push(true_regression_sine(xi) + 0.1 * eps);
    }
    PairedSample::new(x, y).expect("generated sample is valid")
}

pub fn true_regression_sine(x: f64) -> f64 {
    (std::f64::consts::PI * x).sin()
}

/// `X ~ U[0,1]`, `Y = 1 - exp(-X) + N(0, 0.2^2)`; the regression hits 0.5
/// at `x = ln 2`.
pub fn gen_invreg_exp(n: usize, rng: &mut ChaCha8Rng) -> PairedSample {
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let xi: f64 = rng.random_range(0.0..1.0);
        let eps: f64 = StandardNormal.sample(rng);
        x.push(xi);
        y.push(true_regression_invreg(xi) + 0.2 * eps);
    }
    PairedSample::new(x, y).expect("generated sample is valid")
}

pub fn true_regression_invreg(x: f64) -> f64 {
    1.0 - (-x).exp()
}

// ---------------------------------------------------------------------------
// coverage checks

/// Whether the band contains `truth` at every grid point (variable-width
/// bands use their per-point bounds the same way).
pub fn check_band_covers(band: &ConfidenceBand, truth: impl Fn([f64; 2]) -> f64) -> bool {
    (0..band.grid.len()).all(|i| {
        let t = truth(band.grid.point(i));
        band.lower[i] <= t && t <= band.upper[i]
    })
}

/// Whether the dilated region contains the (discretized) true set.
pub fn check_set_covers(region: &RegionSet, true_set: &PointSet) -> Result<bool> {
    dilation_covers(&region.center, region.radius, true_set)
}

/// Reference point cloud for the true `lambda = 0.25` contour, extracted on
/// a grid `TRUTH_REFINE` times finer than the estimation grid.
pub fn levelset_truth_set(estimation_resolution: usize) -> Result<PointSet> {
    let res = estimation_resolution * TRUTH_REFINE;
    let pad = 4.0 * LEVELSET_SIGMA;
    let xs = linspace_vec(-pad, 1.5 + pad, res);
    let ys = linspace_vec(-pad, 0.5 + pad, res);
    let grid = EvalGrid::new_2d(xs.clone(), ys.clone())?;
    let mut values = vec![0.0; xs.len() * ys.len()];
    for (ix, &x) in xs.iter().enumerate() {
        for (iy, &y) in ys.iter().enumerate() {
            values[ix * ys.len() + iy] = true_density_2d(x, y);
        }
    }
    let set = extract_level_set_2d(&values, &grid, LEVELSET_LAMBDA)?;
    if set.is_empty() {
        return Err(Error::EmptyLevelSet);
    }
    Ok(set)
}

// ---------------------------------------------------------------------------
// the coverage harness

struct TrialOutcome {
    covered: Vec<bool>,
    normal_covered: Option<Vec<bool>>,
    dropped: usize,
}

/// Runs the full Monte-Carlo coverage study for a scenario.
pub fn run_coverage_study(sc: &Scenario) -> Result<CoverageReport> {
    sc.validate()?;
    let truth_set = match sc.kind {
        ScenarioKind::Levelset2d => Some(levelset_truth_set(crate::grid::DEFAULT_GRID_2D)?),
        ScenarioKind::InvRegExp => Some(PointSet::new_1d(vec![2.0f64.ln()])?),
        _ => None,
    };

    let outcomes: Vec<Result<TrialOutcome>> = (0..sc.trials)
        .into_par_iter()
        .map(|m| run_trial(sc, m as u64, truth_set.as_ref()))
        .collect();

    let mut valid = 0usize;
    let mut failed = 0usize;
    let mut dropped = 0usize;
    let levels = sc.nominal_levels.len();
    let mut hits = vec![0usize; levels];
    let mut normal_hits = vec![0usize; levels];
    let mut has_normal = false;
    for outcome in outcomes {
        match outcome {
            Ok(t) => {
                valid += 1;
                dropped += t.dropped;
                for (i, c) in t.covered.iter().enumerate() {
                    hits[i] += *c as usize;
                }
                if let Some(nc) = t.normal_covered {
                    has_normal = true;
                    for (i, c) in nc.iter().enumerate() {
                        normal_hits[i] += *c as usize;
                    }
                }
            }
            Err(_) => failed += 1,
        }
    }
    if failed as f64 > 0.10 * sc.trials as f64 || valid == 0 {
        return Err(Error::TooManyFailedTrials {
            failed,
            total: sc.trials,
        });
    }

    let rows = sc
        .nominal_levels
        .iter()
        .enumerate()
        .map(|(i, &nominal)| {
            let coverage = hits[i] as f64 / valid as f64;
            CoverageRow {
                nominal,
                coverage,
                std_error: (coverage * (1.0 - coverage) / valid as f64).sqrt(),
                hits: hits[i],
                normal_coverage: has_normal.then(|| normal_hits[i] as f64 / valid as f64),
            }
        })
        .collect();
    Ok(CoverageReport {
        scenario: sc.clone(),
        rows,
        valid_trials: valid,
        failed_trials: failed,
        dropped_replicates: dropped,
    })
}

fn resolve_bandwidth(sc: &Scenario, rot: Option<f64>, cv: Option<f64>) -> Result<f64> {
    let h = match sc.bandwidth_rule {
        BandwidthRule::Fixed(h) => h,
        BandwidthRule::Rot => rot.expect("validated"),
        BandwidthRule::RotX2 => 2.0 * rot.expect("validated"),
        BandwidthRule::RotHalf => 0.5 * rot.expect("validated"),
        BandwidthRule::Cv => cv.expect("validated"),
        BandwidthRule::CvX2 => 2.0 * cv.expect("validated"),
        BandwidthRule::CvHalf => 0.5 * cv.expect("validated"),
    };
    if !(h > 0.0) {
        return Err(Error::InvalidBandwidth(h));
    }
    Ok(h)
}

fn run_trial(sc: &Scenario, m: u64, truth_set: Option<&PointSet>) -> Result<TrialOutcome> {
    let trial_seed = derive_seed(sc.seed, m);
    let mut data_rng = stream_rng(trial_seed, Domain::Data, 0);
    let boot_seed = derive_seed(trial_seed, 0xB0);
    let cv_seed = derive_seed(trial_seed, 0xCF);
    let kernel1 = KernelSpec::gaussian(1);

    let cfg = |metric: BootstrapMetric| BootstrapConfig {
        replicates: sc.replicates,
        alpha: 0.5, // per-level quantiles are read from the stats
        seed: boot_seed,
        metric,
    };

    match sc.kind {
        ScenarioKind::Density1d => {
            let s = gen_density_1d(sc.n, &mut data_rng);
            let rot = rule_of_thumb(&s)?.h;
            let h = resolve_bandwidth(sc, Some(rot), None)?;
            let grid = EvalGrid::default_for_sample(&s, h)?;
            let run = density_band_run(
                &s,
                h,
                sc.estimator_choice(),
                kernel1,
                &grid,
                &cfg(BootstrapMetric::Sup),
            )?;
            let covered = sc
                .nominal_levels
                .iter()
                .map(|&c| {
                    run.band(1.0 - c)
                        .map(|band| check_band_covers(&band, |p| true_density_1d(p[0])))
                })
                .collect::<Result<Vec<bool>>>()?;
            Ok(TrialOutcome {
                covered,
                normal_covered: None,
                dropped: count_nan(&run.stats),
            })
        }
        ScenarioKind::Levelset2d => {
            let s = gen_levelset_2d(sc.n, &mut data_rng);
            let rot = rule_of_thumb(&s)?.h;
            let h = resolve_bandwidth(sc, Some(rot), None)?;
            let grid = EvalGrid::default_for_sample(&s, h)?;
            let run = levelset_run(
                &s,
                LEVELSET_LAMBDA,
                h,
                sc.estimator_choice(),
                KernelSpec::gaussian(2),
                &grid,
                &cfg(BootstrapMetric::Hausdorff),
            )?;
            // distance from every truth point to the estimated set; a level
            // covers exactly when its radius reaches this far
            let reach = directed_hausdorff(truth_set.expect("levelset truth"), &run.center)?;
            let covered = sc
                .nominal_levels
                .iter()
                .map(|&c| run.region(1.0 - c).map(|r| reach <= r.radius))
                .collect::<Result<Vec<bool>>>()?;
            Ok(TrialOutcome {
                covered,
                normal_covered: None,
                dropped: count_nan(&run.stats),
            })
        }
        ScenarioKind::RegressionSine => {
            let ps = gen_regression_sine(sc.n, &mut data_rng);
            let cv = cv_bandwidth_for(sc, &ps, cv_seed)?;
            let h = resolve_bandwidth(sc, None, cv)?;
            let grid = regression_grid(&ps)?;
            let run = regression_band_run(
                &ps,
                h,
                sc.estimator_choice(),
                kernel1,
                &grid,
                &cfg(BootstrapMetric::Sup),
            )?;
            let covered = sc
                .nominal_levels
                .iter()
                .map(|&c| {
                    run.band(1.0 - c)
                        .map(|band| check_band_covers(&band, |p| true_regression_sine(p[0])))
                })
                .collect::<Result<Vec<bool>>>()?;
            Ok(TrialOutcome {
                covered,
                normal_covered: None,
                dropped: count_nan(&run.stats),
            })
        }
        ScenarioKind::InvRegExp => {
            let ps = gen_invreg_exp(sc.n, &mut data_rng);
            let cv = cv_bandwidth_for(sc, &ps, cv_seed)?;
            let h = resolve_bandwidth(sc, None, cv)?;
            let grid = regression_grid(&ps)?;
            let run = invreg_run(
                &ps,
                INVREG_R0,
                h,
                sc.estimator_choice(),
                kernel1,
                &grid,
                &cfg(BootstrapMetric::Hausdorff),
            )?;
            let truth = truth_set.expect("invreg truth");
            let root = 2.0f64.ln();
            let mut covered = Vec::with_capacity(sc.nominal_levels.len());
            let mut normal_covered = Vec::with_capacity(sc.nominal_levels.len());
            for &c in &sc.nominal_levels {
                let alpha = 1.0 - c;
                let region = run.region(alpha)?;
                covered.push(check_set_covers(&region, truth)?);
                normal_covered.push(match run.normal_ci(alpha) {
                    Ok(ci) => ci.lower <= root && root <= ci.upper,
                    Err(_) => false,
                });
            }
            Ok(TrialOutcome {
                covered,
                normal_covered: Some(normal_covered),
                dropped: count_nan(&run.stats),
            })
        }
    }
}

fn cv_bandwidth_for(sc: &Scenario, ps: &PairedSample, cv_seed: u64) -> Result<Option<f64>> {
    match sc.bandwidth_rule {
        BandwidthRule::Cv | BandwidthRule::CvX2 | BandwidthRule::CvHalf => {
            let candidates = default_regression_candidates(ps);
            let choice = kfold_cv_bandwidth(ps, CV_FOLDS, CV_REPEATS, &candidates, cv_seed)?;
            Ok(Some(choice.h))
        }
        _ => Ok(None),
    }
}

fn regression_grid(ps: &PairedSample) -> Result<EvalGrid> {
    let (lo, hi) = ps.x_range();
    EvalGrid::linspace(lo, hi, REGRESSION_GRID)
}

fn count_nan(stats: &[f64]) -> usize {
    stats.iter().filter(|v| !v.is_finite()).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn mixture_mean_and_proportions() {
        let mut rng = stream_rng(1, Domain::Data, 0);
        let n = 100_000;
        let s = gen_density_1d(n, &mut rng);
        let mean = s.axis(0).sum::<f64>() / n as f64;
        // mixture mean 1.6; sd of the sample mean ~ sqrt(4.84)/sqrt(n)
        let sigma = (0.6 * 1.0 + 0.4 * 1.0 + 0.6 * 0.4 * 16.0f64).sqrt();
        assert!((mean - 1.6).abs() < 3.0 * sigma / (n as f64).sqrt());

        // mass right of the midpoint: 0.4 Phi(2) + 0.6 (1 - Phi(2))
        let expected = 0.40455002638963585;
        let p = s.axis(0).filter(|v| *v > 2.0).count() as f64 / n as f64;
        let se = (expected * (1.0 - expected) / n as f64).sqrt();
        assert!((p - expected).abs() < 3.0 * se, "p = {p}");
    }

    #[test]
    fn generators_are_seed_deterministic() {
        let mut a = stream_rng(7, Domain::Data, 0);
        let mut b = stream_rng(7, Domain::Data, 0);
        assert_eq!(gen_density_1d(50, &mut a).raw(), gen_density_1d(50, &mut b).raw());
        let mut a = stream_rng(7, Domain::Data, 0);
        let mut b = stream_rng(7, Domain::Data, 0);
        let pa = gen_regression_sine(50, &mut a);
        let pb = gen_regression_sine(50, &mut b);
        assert_eq!(pa.x, pb.x);
        assert_eq!(pa.y, pb.y);
    }

    #[test]
    fn true_density_1d_values() {
        // 0.6 phi(0) + 0.4 phi(4) and the symmetric midpoint value
        assert_abs_diff_eq!(true_density_1d(0.0), 0.23941890033116553, epsilon = 1e-12);
        assert_abs_diff_eq!(
            true_density_1d(2.0),
            std_normal_pdf(2.0),
            epsilon = 1e-12
        );
        let mass = crate::quad::integrate(true_density_1d, -10.0, 14.0, 1e-10).unwrap();
        assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn true_density_2d_values() {
        // independent evaluation of the mixture formula at the origin
        let expected = [[0.0f64, 0.0], [1.0, 0.0], [1.5, 0.5]]
            .iter()
            .map(|c: &[f64; 2]| {
                let d2 = c[0] * c[0] + c[1] * c[1];
                (-d2 / (2.0 * 0.09)).exp() / (2.0 * std::f64::consts::PI * 0.09)
            })
            .sum::<f64>()
            / 3.0;
        assert_abs_diff_eq!(true_density_2d(0.0, 0.0), expected, epsilon = 1e-14);
        assert_abs_diff_eq!(true_density_2d(0.0, 0.0), 0.591742, epsilon = 1e-6);
        let mut rng = stream_rng(3, Domain::Data, 0);
        let n = 100_000;
        let s = gen_levelset_2d(n, &mut rng);
        let mx = s.axis(0).sum::<f64>() / n as f64;
        let my = s.axis(1).sum::<f64>() / n as f64;
        assert!((mx - 2.5 / 3.0).abs() < 0.01);
        assert!((my - 0.5 / 3.0).abs() < 0.01);
    }

    #[test]
    fn levelset_truth_contour_is_nonempty() {
        let set = levelset_truth_set(64).unwrap();
        assert!(set.len() > 100);
        // every truth point sits essentially on the contour
        for p in set.points().iter().step_by(17) {
            let v = true_density_2d(p[0], p[1]);
            assert!((v - LEVELSET_LAMBDA).abs() < 0.02, "density {v} at {p:?}");
        }
    }

    #[test]
    fn sine_and_invreg_models() {
        assert_abs_diff_eq!(true_regression_sine(0.5), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(true_regression_invreg(0.0), 0.0, epsilon = 1e-15);
        // root of 1 - exp(-x) = 0.5
        assert_abs_diff_eq!(
            true_regression_invreg(2.0f64.ln()),
            0.5,
            epsilon = 1e-15
        );

        let mut rng = stream_rng(11, Domain::Data, 0);
        let n = 100_000;
        let ps = gen_invreg_exp(n, &mut rng);
        let resid_sd = {
            let mut ss = 0.0;
            for (&x, &y) in ps.x.iter().zip(ps.y.iter()) {
                let r = y - true_regression_invreg(x);
                ss += r * r;
            }
            (ss / (n as f64 - 1.0)).sqrt()
        };
        assert!((resid_sd - 0.2).abs() < 3.0 * 0.2 / (2.0 * n as f64).sqrt() + 1e-3);
    }

    #[test]
    fn band_coverage_boundary_cases() {
        let g = EvalGrid::linspace(0.0, 1.0, 33).unwrap();
        let center: Vec<f64> = g.xs().iter().map(|&x| x * x).collect();
        let truth = |p: [f64; 2]| p[0] * p[0] + 0.05 * (7.0 * p[0]).sin();
        let sup = (0..g.len())
            .map(|i| (center[i] - truth(g.point(i))).abs())
            .fold(0.0f64, f64::max);
        let band_at = |t: f64| ConfidenceBand {
            grid: g.clone(),
            center: center.clone(),
            lower: center.iter().map(|c| c - t).collect(),
            upper: center.iter().map(|c| c + t).collect(),
            t_hat: t,
            kind: crate::bootstrap::ConfidenceBandKind::Fixed,
            scale: None,
            dropped_replicates: 0,
        };
        assert!(check_band_covers(&band_at(sup), truth));
        assert!(!check_band_covers(&band_at(sup - 1e-9), truth));
        // truth equal to the center is covered by any nonnegative width
        assert!(check_band_covers(&band_at(0.0), |p| {
            let i = g.xs().iter().position(|&x| x == p[0]).unwrap();
            center[i]
        }));
    }

    #[test]
    fn set_coverage_examples() {
        let center = PointSet::new_1d(vec![0.0, 1.0]).unwrap();
        let region = RegionSet {
            center: center.clone(),
            radius: 0.0,
        };
        assert!(check_set_covers(&region, &center).unwrap());
        let disjoint = PointSet::new_1d(vec![5.0]).unwrap();
        assert!(!check_set_covers(&region, &disjoint).unwrap());
        let d = crate::geometry::hausdorff(&center, &disjoint).unwrap();
        let dilated = RegionSet {
            center,
            radius: d,
        };
        assert!(check_set_covers(&dilated, &disjoint).unwrap());
    }

    #[test]
    fn scenario_validation() {
        let mut sc = Scenario {
            kind: ScenarioKind::Density1d,
            n: 50,
            bandwidth_rule: BandwidthRule::Rot,
            tau: 1.0,
            replicates: 5,
            trials: 2,
            nominal_levels: vec![0.8, 0.9],
            seed: 1,
            estimator: EstimatorKind::Debiased,
        };
        assert!(sc.validate().is_ok());
        sc.n = 10;
        assert!(sc.validate().is_err());
        sc.n = 50;
        sc.nominal_levels = vec![0.9, 0.8];
        assert!(sc.validate().is_err());
        sc.nominal_levels = vec![0.9];
        sc.bandwidth_rule = BandwidthRule::Cv;
        assert!(sc.validate().is_err());
    }

    #[test]
    fn single_trial_single_replicate_shape() {
        let sc = Scenario {
            kind: ScenarioKind::Density1d,
            n: 20,
            bandwidth_rule: BandwidthRule::Rot,
            tau: 1.0,
            replicates: 1,
            trials: 1,
            nominal_levels: vec![0.8, 0.9, 0.95],
            seed: 3,
            estimator: EstimatorKind::Debiased,
        };
        let report = run_coverage_study(&sc).unwrap();
        assert_eq!(report.rows.len(), 3);
        assert_eq!(report.valid_trials, 1);
        for row in &report.rows {
            assert!(row.hits == 0 || row.hits == 1);
        }
    }

    #[test]
    fn tiny_study_shape_and_monotonicity() {
        let sc = Scenario {
            kind: ScenarioKind::Density1d,
            n: 60,
            bandwidth_rule: BandwidthRule::Rot,
            tau: 1.0,
            replicates: 25,
            trials: 8,
            nominal_levels: vec![0.5, 0.8, 0.9, 0.95],
            seed: 42,
            estimator: EstimatorKind::Debiased,
        };
        let report = run_coverage_study(&sc).unwrap();
        assert_eq!(report.rows.len(), 4);
        assert_eq!(report.valid_trials, 8);
        assert_eq!(report.failed_trials, 0);
        for w in report.rows.windows(2) {
            assert!(w[1].coverage >= w[0].coverage);
        }
        for row in &report.rows {
            assert!(row.coverage >= 0.0 && row.coverage <= 1.0);
            assert!(row.std_error >= 0.0);
            assert!(row.normal_coverage.is_none());
        }
    }

    #[test]
    fn studies_are_reproducible_across_thread_counts() {
        let sc = Scenario {
            kind: ScenarioKind::InvRegExp,
            n: 200,
            bandwidth_rule: BandwidthRule::Fixed(0.2),
            tau: 1.0,
            replicates: 20,
            trials: 6,
            nominal_levels: vec![0.8, 0.95],
            seed: 7,
            estimator: EstimatorKind::Debiased,
        };
        let run_with = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| run_coverage_study(&sc).unwrap())
        };
        let a = run_with(1);
        let b = run_with(2);
        assert_eq!(a.rows, b.rows);
        assert_eq!(a.valid_trials, b.valid_trials);
        assert_eq!(a.dropped_replicates, b.dropped_replicates);
        // inverse regression rows carry the normal-approximation column
        assert!(a.rows[0].normal_coverage.is_some());
    }
}
