//! Empirical bootstrap engine: resampling, sup / weighted-sup / Hausdorff
//! replicate statistics, order-statistic quantiles, and the confidence
//! band/set constructors.
//!
//! Replicate `r` always draws its indices from the stream `(seed, r)`, and
//! every replicate statistic is a distance to the original-sample estimate,
//! so runs are bit-identical for a fixed `(data, config, seed)` regardless
//! of thread count. The raw statistics are kept on the run structs; reading
//! quantiles at several confidence levels reuses them without re-running
//! the bootstrap.

use crate::density::{debiased_kde_eval, kde_eval, DensityEstimate};
use crate::error::{Error, Result};
use crate::geometry::{self, PointSet};
use crate::grid::EvalGrid;
use crate::kernel::KernelSpec;
use crate::normal::std_normal_quantile;
use crate::regression::{debiased_local_linear, local_linear_fit, RegressionEstimate};
use crate::rngstream::{stream_rng, Domain};
use crate::sample::{PairedSample, Sample};
use rand::Rng;
use rayon::prelude::*;

/// Sup-weighting floor: grid points with scale below this fraction of the
/// maximum are excluded from the weighted sup.
const WEIGHT_FLOOR: f64 = 0.05;
/// Fraction of replicates allowed to drop before a run fails.
const DROP_BUDGET: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BootstrapMetric {
    Sup,
    WeightedSup,
    Hausdorff,
}

#[derive(Debug, Clone, Copy)]
pub struct BootstrapConfig {
    /// Number of bootstrap replicates B.
    pub replicates: usize,
    pub alpha: f64,
    pub seed: u64,
    pub metric: BootstrapMetric,
}

impl BootstrapConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replicates < 1 {
            return Err(Error::InvalidConfig("need at least one replicate".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha must be in (0, 1), got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// Which estimator the bootstrap recomputes per replicate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimatorChoice {
    Debiased { tau: f64 },
    Plain,
}

/// Bootstrap quantile: the `ceil((1-alpha) B)`-th order statistic.
#[derive(Debug, Clone)]
pub struct QuantileEstimate {
    pub t_hat: f64,
    /// Retained (finite) replicate statistics, sorted ascending.
    pub replicate_stats: Vec<f64>,
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfidenceBandKind {
    Fixed,
    Variable,
}

/// Grid-aligned simultaneous confidence band.
#[derive(Debug, Clone)]
pub struct ConfidenceBand {
    pub grid: EvalGrid,
    pub center: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub t_hat: f64,
    pub kind: ConfidenceBandKind,
    /// sqrt of the plain KDE for variable-width bands.
    pub scale: Option<Vec<f64>>,
    pub dropped_replicates: usize,
}

/// A discretized set estimate dilated by a bootstrap Hausdorff quantile.
#[derive(Debug, Clone)]
pub struct RegionSet {
    pub center: PointSet,
    pub radius: f64,
}

/// `n` i.i.d. index draws from {0..n-1} with replacement.
pub fn resample(n: usize, rng: &mut impl Rng) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

/// Sup distance between grid functions, optionally weighted by
/// `1/sqrt(scale)` over the admissible region `scale >= 0.05 * max(scale)`.
/// Non-finite pairs are skipped.
pub fn sup_distance(f1: &[f64], f2: &[f64], scale: Option<&[f64]>) -> Result<f64> {
    if f1.len() != f2.len() || scale.is_some_and(|s| s.len() != f1.len()) {
        return Err(Error::DimensionMismatch(
            "sup distance over unequal grid lengths".into(),
        ));
    }
    let mut best = f64::NEG_INFINITY;
    match scale {
        None => {
            for (a, b) in f1.iter().zip(f2.iter()) {
                let d = (a - b).abs();
                if d.is_finite() && d > best {
                    best = d;
                }
            }
        }
        Some(sc) => {
            let smax = sc
                .iter()
                .filter(|v| v.is_finite())
                .fold(f64::NEG_INFINITY, |m, &v| m.max(v));
            if !smax.is_finite() || smax <= 0.0 {
                return Err(Error::EmptyAdmissibleSet);
            }
            let floor = WEIGHT_FLOOR * smax;
            for ((a, b), &s) in f1.iter().zip(f2.iter()).zip(sc.iter()) {
                if s >= floor {
                    let d = (a - b).abs() / s.sqrt();
                    if d.is_finite() && d > best {
                        best = d;
                    }
                }
            }
        }
    }
    if best.is_finite() {
        Ok(best)
    } else {
        Err(Error::EmptyAdmissibleSet)
    }
}

/// Upper order statistic at rank `ceil((1-alpha) B)` over the finite
/// replicate statistics; errors when more than 10% were dropped.
pub fn bootstrap_quantile(stats: &[f64], alpha: f64) -> Result<QuantileEstimate> {
    if stats.is_empty() {
        return Err(Error::InvalidConfig("no replicate statistics".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "alpha must be in (0, 1), got {alpha}"
        )));
    }
    let mut finite: Vec<f64> = stats.iter().copied().filter(|v| v.is_finite()).collect();
    let dropped = stats.len() - finite.len();
    if dropped as f64 > DROP_BUDGET * stats.len() as f64 {
        return Err(Error::TooManyDropped {
            dropped,
            total: stats.len(),
        });
    }
    if finite.is_empty() {
        return Err(Error::TooManyDropped {
            dropped,
            total: stats.len(),
        });
    }
    finite.sort_unstable_by(f64::total_cmp);
    let b = finite.len();
    // guard the ceil against floating-point wobble at integer boundaries
    let rank = ((1.0 - alpha) * b as f64 - 1e-9).ceil().max(1.0) as usize;
    let rank = rank.min(b);
    Ok(QuantileEstimate {
        t_hat: finite[rank - 1],
        replicate_stats: finite,
        alpha,
    })
}

// ---------------------------------------------------------------------------
// density bands

/// One full bootstrap pass for a density band; quantiles at any alpha can be
/// read from `stats` afterwards.
#[derive(Debug, Clone)]
pub struct DensityBandRun {
    pub center: DensityEstimate,
    /// Plain-KDE values on the original sample (weighted metric only).
    pub scale: Option<Vec<f64>>,
    /// Per-replicate sup statistics; NaN marks a dropped replicate.
    pub stats: Vec<f64>,
}

pub fn density_band_run(
    s: &Sample,
    h: f64,
    estimator: EstimatorChoice,
    k: KernelSpec,
    g: &EvalGrid,
    cfg: &BootstrapConfig,
) -> Result<DensityBandRun> {
    cfg.validate()?;
    if cfg.metric == BootstrapMetric::Hausdorff {
        return Err(Error::InvalidConfig(
            "density bands use the sup or weighted-sup metric".into(),
        ));
    }
    let eval = |sample: &Sample| -> Result<DensityEstimate> {
        match estimator {
            EstimatorChoice::Debiased { tau } => debiased_kde_eval(sample, h, tau, k, g),
            EstimatorChoice::Plain => kde_eval(sample, h, k, g),
        }
    };
    let center = eval(s)?;
    let scale = match cfg.metric {
        BootstrapMetric::WeightedSup => Some(kde_eval(s, h, k, g)?.values),
        _ => None,
    };
    let n = s.len();
    let stats: Vec<f64> = (0..cfg.replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(cfg.seed, Domain::Bootstrap, r as u64);
            let idx = resample(n, &mut rng);
            let replicate = match eval(&s.select(&idx)) {
                Ok(est) => est,
                Err(_) => return f64::NAN,
            };
            sup_distance(&replicate.values, &center.values, scale.as_deref())
                .unwrap_or(f64::NAN)
        })
        .collect();
    Ok(DensityBandRun {
        center,
        scale,
        stats,
    })
}

impl DensityBandRun {
    pub fn band(&self, alpha: f64) -> Result<ConfidenceBand> {
        let q = bootstrap_quantile(&self.stats, alpha)?;
        let dropped = self.stats.len() - q.replicate_stats.len();
        Ok(assemble_band(
            &self.center.grid,
            &self.center.values,
            q.t_hat,
            self.scale.as_deref(),
            dropped,
        ))
    }
}

/// Confidence band for the density from bootstrapping the debiased KDE.
pub fn density_confidence_band(
    s: &Sample,
    h: f64,
    tau: f64,
    k: KernelSpec,
    g: &EvalGrid,
    cfg: &BootstrapConfig,
) -> Result<ConfidenceBand> {
    density_band_run(s, h, EstimatorChoice::Debiased { tau }, k, g, cfg)?.band(cfg.alpha)
}

fn assemble_band(
    grid: &EvalGrid,
    center: &[f64],
    t_hat: f64,
    scale: Option<&[f64]>,
    dropped: usize,
) -> ConfidenceBand {
    match scale {
        None => ConfidenceBand {
            grid: grid.clone(),
            center: center.to_vec(),
            lower: center.iter().map(|c| c - t_hat).collect(),
            upper: center.iter().map(|c| c + t_hat).collect(),
            t_hat,
            kind: ConfidenceBandKind::Fixed,
            scale: None,
            dropped_replicates: dropped,
        },
        Some(sc) => {
            let sqrt_scale: Vec<f64> = sc.iter().map(|v| v.max(0.0).sqrt()).collect();
            ConfidenceBand {
                grid: grid.clone(),
                center: center.to_vec(),
                lower: center
                    .iter()
                    .zip(sqrt_scale.iter())
                    .map(|(c, s)| c - t_hat * s)
                    .collect(),
                upper: center
                    .iter()
                    .zip(sqrt_scale.iter())
                    .map(|(c, s)| c + t_hat * s)
                    .collect(),
                t_hat,
                kind: ConfidenceBandKind::Variable,
                scale: Some(sqrt_scale),
                dropped_replicates: dropped,
            }
        }
    }
}

// ---------------------------------------------------------------------------
// regression bands

#[derive(Debug, Clone)]
pub struct RegressionBandRun {
    pub center: RegressionEstimate,
    pub stats: Vec<f64>,
}

pub fn regression_band_run(
    ps: &PairedSample,
    h: f64,
    estimator: EstimatorChoice,
    k: KernelSpec,
    g: &EvalGrid,
    cfg: &BootstrapConfig,
) -> Result<RegressionBandRun> {
    cfg.validate()?;
    if cfg.metric != BootstrapMetric::Sup {
        return Err(Error::InvalidConfig(
            "regression bands use the sup metric".into(),
        ));
    }
    let fit = |x: Vec<f64>, y: Vec<f64>| -> Result<RegressionEstimate> {
        let sub = PairedSample { x, y };
        match estimator {
            EstimatorChoice::Debiased { tau } => debiased_local_linear(&sub, h, tau, k, g),
            EstimatorChoice::Plain => local_linear_fit(&sub, h, k, g),
        }
    };
    let center = fit(ps.x.clone(), ps.y.clone())?;
    let n = ps.len();
    let stats: Vec<f64> = (0..cfg.replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(cfg.seed, Domain::Bootstrap, r as u64);
            let idx = resample(n, &mut rng);
            let rep = ps.select(&idx);
            match fit(rep.x, rep.y) {
                Ok(est) => sup_distance(&est.values, &center.values, None).unwrap_or(f64::NAN),
                Err(_) => f64::NAN,
            }
        })
        .collect();
    Ok(RegressionBandRun { center, stats })
}

impl RegressionBandRun {
    pub fn band(&self, alpha: f64) -> Result<ConfidenceBand> {
        let q = bootstrap_quantile(&self.stats, alpha)?;
        let dropped = self.stats.len() - q.replicate_stats.len();
        Ok(assemble_band(
            &self.center.grid,
            &self.center.values,
            q.t_hat,
            None,
            dropped,
        ))
    }
}

/// Confidence band for the regression function from bootstrapping the
/// debiased local linear smoother (paired bootstrap).
pub fn regression_confidence_band(
    ps: &PairedSample,
    h: f64,
    tau: f64,
    k: KernelSpec,
    g: &EvalGrid,
    cfg: &BootstrapConfig,
) -> Result<ConfidenceBand> {
    regression_band_run(ps, h, EstimatorChoice::Debiased { tau }, k, g, cfg)?.band(cfg.alpha)
}

// ---------------------------------------------------------------------------
// level-set confidence sets

#[derive(Debug, Clone)]
pub struct LevelSetRun {
    pub center_estimate: DensityEstimate,
    pub center: PointSet,
    /// Per-replicate Hausdorff distances; NaN marks dropped replicates
    /// (empty bootstrap level sets).
    pub stats: Vec<f64>,
}

pub fn levelset_run(
    s: &Sample,
    lambda: f64,
    h: f64,
    estimator: EstimatorChoice,
    k: KernelSpec,
    g: &EvalGrid,
    cfg: &BootstrapConfig,
) -> Result<LevelSetRun> {
    cfg.validate()?;
    let eval = |sample: &Sample| -> Result<DensityEstimate> {
        match estimator {
            EstimatorChoice::Debiased { tau } => debiased_kde_eval(sample, h, tau, k, g),
            EstimatorChoice::Plain => kde_eval(sample, h, k, g),
        }
    };
    let extract = |est: &DensityEstimate| -> Result<PointSet> {
        match g.dim() {
            1 => geometry::extract_level_set_1d(&est.values, g, lambda),
            _ => geometry::extract_level_set_2d(&est.values, g, lambda),
        }
    };
    let center_estimate = eval(s)?;
    let center = extract(&center_estimate)?;
    if center.is_empty() {
        return Err(Error::EmptyLevelSet);
    }
    let n = s.len();
    let stats: Vec<f64> = (0..cfg.replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(cfg.seed, Domain::Bootstrap, r as u64);
            let idx = resample(n, &mut rng);
            let rep = match eval(&s.select(&idx)) {
                Ok(est) => est,
                Err(_) => return f64::NAN,
            };
            match extract(&rep) {
                Ok(set) if !set.is_empty() => {
                    geometry::hausdorff(&set, &center).unwrap_or(f64::NAN)
                }
                _ => f64::NAN,
            }
        })
        .collect();
    Ok(LevelSetRun {
        center_estimate,
        center,
        stats,
    })
}

impl LevelSetRun {
    pub fn region(&self, alpha: f64) -> Result<RegionSet> {
        let q = bootstrap_quantile(&self.stats, alpha)?;
        Ok(RegionSet {
            center: self.center.clone(),
            radius: q.t_hat,
        })
    }

    pub fn dropped(&self) -> usize {
        self.stats.iter().filter(|v| !v.is_finite()).count()
    }
}

/// Confidence set for the density level set: the estimated set dilated by
/// the bootstrap Hausdorff quantile.
pub fn levelset_confidence_set(
    s: &Sample,
    lambda: f64,
    h: f64,
    tau: f64,
    k: KernelSpec,
    g: &EvalGrid,
    cfg: &BootstrapConfig,
) -> Result<RegionSet> {
    if cfg.metric != BootstrapMetric::Hausdorff {
        return Err(Error::InvalidConfig(
            "level-set confidence sets use the Hausdorff metric".into(),
        ));
    }
    levelset_run(s, lambda, h, EstimatorChoice::Debiased { tau }, k, g, cfg)?.region(cfg.alpha)
}

/// Level-set confidence set by inverting a fixed-width density band:
/// the grid mask `|center - lambda| <= t_hat`.
pub fn levelset_inversion_set(band: &ConfidenceBand, lambda: f64) -> Result<Vec<bool>> {
    if band.kind != ConfidenceBandKind::Fixed {
        return Err(Error::InvalidConfig(
            "inversion sets require a fixed-width band".into(),
        ));
    }
    Ok(band
        .center
        .iter()
        .map(|c| (c - lambda).abs() <= band.t_hat)
        .collect())
}

// ---------------------------------------------------------------------------
// inverse regression

#[derive(Debug, Clone)]
pub struct InvRegRun {
    pub center_estimate: RegressionEstimate,
    pub center: PointSet,
    /// Per-replicate Hausdorff distances; NaN marks dropped replicates.
    pub stats: Vec<f64>,
    /// Root sets of the replicate fits (None for dropped replicates).
    pub replicate_roots: Vec<Option<Vec<f64>>>,
}

pub fn invreg_run(
    ps: &PairedSample,
    r0: f64,
    h: f64,
    estimator: EstimatorChoice,
    k: KernelSpec,
    g: &EvalGrid,
    cfg: &BootstrapConfig,
) -> Result<InvRegRun> {
    cfg.validate()?;
    let fit = |x: Vec<f64>, y: Vec<f64>| -> Result<RegressionEstimate> {
        let sub = PairedSample { x, y };
        match estimator {
            EstimatorChoice::Debiased { tau } => debiased_local_linear(&sub, h, tau, k, g),
            EstimatorChoice::Plain => local_linear_fit(&sub, h, k, g),
        }
    };
    let center_estimate = fit(ps.x.clone(), ps.y.clone())?;
    let center = geometry::extract_level_set_1d(&center_estimate.values, g, r0)?;
    if center.is_empty() {
        return Err(Error::NoRoots);
    }
    let n = ps.len();
    let per_replicate: Vec<(f64, Option<Vec<f64>>)> = (0..cfg.replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(cfg.seed, Domain::Bootstrap, r as u64);
            let idx = resample(n, &mut rng);
            let rep = ps.select(&idx);
            let est = match fit(rep.x, rep.y) {
                Ok(est) => est,
                Err(_) => return (f64::NAN, None),
            };
            match geometry::extract_level_set_1d(&est.values, g, r0) {
                Ok(set) if !set.is_empty() => {
                    let d = geometry::hausdorff(&set, &center).unwrap_or(f64::NAN);
                    (d, Some(set.coords_1d()))
                }
                _ => (f64::NAN, None),
            }
        })
        .collect();
    let (stats, replicate_roots) = per_replicate.into_iter().unzip();
    Ok(InvRegRun {
        center_estimate,
        center,
        stats,
        replicate_roots,
    })
}

/// A normal-approximation confidence interval for a single inverse
/// regression location.
#[derive(Debug, Clone, Copy)]
pub struct NormalCi {
    pub lower: f64,
    pub upper: f64,
    pub center_root: f64,
    pub sigma: f64,
    /// Fraction of usable replicates that had more than one root.
    pub multi_root_fraction: f64,
}

impl InvRegRun {
    pub fn region(&self, alpha: f64) -> Result<RegionSet> {
        let q = bootstrap_quantile(&self.stats, alpha)?;
        Ok(RegionSet {
            center: self.center.clone(),
            radius: q.t_hat,
        })
    }

    pub fn dropped(&self) -> usize {
        self.stats.iter().filter(|v| !v.is_finite()).count()
    }

    /// Normal-approximation interval around the estimated location using
    /// the bootstrap standard deviation of the replicate roots. Intended
    /// for the single-root case; with several center roots the one closest
    /// to the pooled replicate median is used.
    pub fn normal_ci(&self, alpha: f64) -> Result<NormalCi> {
        let center_roots = self.center.coords_1d();
        let x0 = if center_roots.len() == 1 {
            center_roots[0]
        } else {
            let mut pooled: Vec<f64> = self
                .replicate_roots
                .iter()
                .flatten()
                .flatten()
                .copied()
                .collect();
            if pooled.is_empty() {
                return Err(Error::NoRoots);
            }
            pooled.sort_unstable_by(f64::total_cmp);
            let median = pooled[pooled.len() / 2];
            center_roots
                .iter()
                .copied()
                .min_by(|a, b| (a - median).abs().total_cmp(&(b - median).abs()))
                .unwrap()
        };
        let mut multi = 0usize;
        let mut roots = Vec::with_capacity(self.replicate_roots.len());
        for set in self.replicate_roots.iter().flatten() {
            if set.len() != 1 {
                multi += 1;
            }
            let closest = set
                .iter()
                .copied()
                .min_by(|a, b| (a - x0).abs().total_cmp(&(b - x0).abs()));
            if let Some(r) = closest {
                roots.push(r);
            }
        }
        let (lower, upper, sigma) = invreg_normal_ci_parts(x0, &roots, alpha)?;
        Ok(NormalCi {
            lower,
            upper,
            center_root: x0,
            sigma,
            multi_root_fraction: multi as f64 / roots.len().max(1) as f64,
        })
    }
}

/// Confidence set for the inverse regression locations.
pub fn invreg_confidence_set(
    ps: &PairedSample,
    r0: f64,
    h: f64,
    tau: f64,
    k: KernelSpec,
    g: &EvalGrid,
    cfg: &BootstrapConfig,
) -> Result<RegionSet> {
    if cfg.metric != BootstrapMetric::Hausdorff {
        return Err(Error::InvalidConfig(
            "inverse-regression confidence sets use the Hausdorff metric".into(),
        ));
    }
    invreg_run(ps, r0, h, EstimatorChoice::Debiased { tau }, k, g, cfg)?.region(cfg.alpha)
}

/// Normal-approximation interval
/// `[x0 + z_{alpha/2} sigma, x0 + z_{1-alpha/2} sigma]` with `sigma` the
/// sample standard deviation of the bootstrap roots.
pub fn invreg_normal_ci(center_root: f64, bootstrap_roots: &[f64], alpha: f64) -> Result<(f64, f64)> {
    let (lo, hi, _) = invreg_normal_ci_parts(center_root, bootstrap_roots, alpha)?;
    Ok((lo, hi))
}

fn invreg_normal_ci_parts(
    center_root: f64,
    bootstrap_roots: &[f64],
    alpha: f64,
) -> Result<(f64, f64, f64)> {
    let finite: Vec<f64> = bootstrap_roots
        .iter()
        .copied()
        .filter(|v| v.is_finite())
        .collect();
    if finite.len() < 2 {
        return Err(Error::InvalidConfig(
            "need at least two bootstrap roots for the normal interval".into(),
        ));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "alpha must be in (0, 1), got {alpha}"
        )));
    }
    let n = finite.len() as f64;
    let sigma = if finite.windows(2).all(|w| w[0] == w[1]) {
        0.0
    } else {
        let mean = finite.iter().sum::<f64>() / n;
        let var =
            finite.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        var.sqrt()
    };
    let z_hi = std_normal_quantile(1.0 - alpha / 2.0);
    let z_lo = std_normal_quantile(alpha / 2.0);
    Ok((center_root + z_lo * sigma, center_root + z_hi * sigma, sigma))
}
