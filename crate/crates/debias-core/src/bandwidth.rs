//! Bandwidth selectors: Silverman's rule of thumb, least-squares
//! cross-validation for densities, and repeated k-fold cross-validation for
//! the local linear smoother.

use crate::density::{kde_eval, trapezoid_integral};
use crate::error::{Error, Result};
use crate::grid::EvalGrid;
use crate::kernel::KernelSpec;
use crate::regression::{fit_at_queries, FitTarget};
use crate::rngstream::{stream_rng, Domain};
use crate::sample::{PairedSample, Sample};
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BandwidthMethod {
    Rot,
    Lscv,
    KfoldCv,
    Fixed,
}

/// A selected bandwidth; cross-validation methods carry the full
/// (candidate, score) table and `h` attains its minimum.
#[derive(Debug, Clone)]
pub struct BandwidthChoice {
    pub h: f64,
    pub method: BandwidthMethod,
    pub diagnostics: Option<Vec<(f64, f64)>>,
}

/// Silverman's rule of thumb.
///
/// d = 1: `0.9 * min(sd, IQR/1.34) * n^(-1/5)`, taking the minimum over the
/// dispersion measures that are strictly positive. d = 2: normal-scale rule
/// `s * (4 / ((d+2) n))^(1/(d+4))` with `s` the geometric mean of the
/// per-coordinate standard deviations.
pub fn rule_of_thumb(s: &Sample) -> Result<BandwidthChoice> {
    let n = s.len() as f64;
    let h = match s.dim() {
        1 => {
            let xs: Vec<f64> = s.axis(0).collect();
            let sd = sample_std(&xs);
            let iqr = interquartile_range(&xs);
            let disp = [sd, iqr / 1.34]
                .into_iter()
                .filter(|v| *v > 0.0)
                .fold(f64::INFINITY, f64::min);
            if !disp.is_finite() {
                return Err(Error::ZeroDispersion);
            }
            0.9 * disp * n.powf(-0.2)
        }
        _ => {
            let sx = sample_std(&s.axis(0).collect::<Vec<_>>());
            let sy = sample_std(&s.axis(1).collect::<Vec<_>>());
            if sx <= 0.0 || sy <= 0.0 {
                return Err(Error::ZeroDispersion);
            }
            let sbar = (sx * sy).sqrt();
            sbar * (4.0 / (4.0 * n)).powf(1.0 / 6.0)
        }
    };
    Ok(BandwidthChoice {
        h,
        method: BandwidthMethod::Rot,
        diagnostics: None,
    })
}

/// Least-squares cross-validation for the KDE:
/// `LSCV(h) = int p_h^2 - (2/n) sum_i p_{h,-i}(X_i)`, the integral by
/// trapezoid on the default grid for each candidate.
pub fn lscv_bandwidth(s: &Sample, candidates: &[f64]) -> Result<BandwidthChoice> {
    if candidates.is_empty() {
        return Err(Error::InvalidConfig("no candidate bandwidths".into()));
    }
    let k = KernelSpec::gaussian(s.dim());
    let n = s.len();
    let d = s.dim();
    let mut table = Vec::with_capacity(candidates.len());
    for &h in candidates {
        if !(h > 0.0) {
            return Err(Error::InvalidBandwidth(h));
        }
        let grid = EvalGrid::default_for_sample(s, h)?;
        let est = kde_eval(s, h, k, &grid)?;
        let sq: Vec<f64> = est.values.iter().map(|v| v * v).collect();
        let integral = trapezoid_integral(&grid, &sq);

        // leave-one-out density at each observation
        let k0 = k.eval(&[0.0, 0.0][..d]);
        let mut loo_sum = 0.0;
        for i in 0..n {
            let pi = s.point(i);
            let mut acc = 0.0;
            for j in 0..n {
                let pj = s.point(j);
                let u = [(pi[0] - pj[0]) / h, (pi[1] - pj[1]) / h];
                acc += k.eval(&u[..d]);
            }
            acc -= k0;
            loo_sum += acc / ((n as f64 - 1.0) * h.powi(d as i32));
        }
        let score = integral - 2.0 / n as f64 * loo_sum;
        table.push((h, score));
    }
    let h = argmin_smallest(&table)?;
    Ok(BandwidthChoice {
        h,
        method: BandwidthMethod::Lscv,
        diagnostics: Some(table),
    })
}

/// Repeated k-fold cross-validation of the (plain) local linear smoother.
///
/// Rows are sorted by (x, y) before the seeded shuffle, so the selection is
/// invariant to permuting the input rows. Held-out points with degenerate
/// predictions are skipped; a candidate with no usable prediction scores
/// +inf.
pub fn kfold_cv_bandwidth(
    ps: &PairedSample,
    folds: usize,
    repeats: usize,
    candidates: &[f64],
    seed: u64,
) -> Result<BandwidthChoice> {
    if folds < 2 {
        return Err(Error::InvalidConfig(format!(
            "need at least 2 folds, got {folds}"
        )));
    }
    if ps.len() < 2 * folds {
        return Err(Error::InvalidSample(format!(
            "need at least {} rows for {folds}-fold CV, got {}",
            2 * folds,
            ps.len()
        )));
    }
    if candidates.is_empty() {
        return Err(Error::InvalidConfig("no candidate bandwidths".into()));
    }
    if repeats == 0 {
        return Err(Error::InvalidConfig("need at least one CV repeat".into()));
    }
    for &h in candidates {
        if !(h > 0.0) {
            return Err(Error::InvalidBandwidth(h));
        }
    }

    let n = ps.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        ps.x[a]
            .total_cmp(&ps.x[b])
            .then(ps.y[a].total_cmp(&ps.y[b]))
    });

    let mut sse = vec![0.0f64; candidates.len()];
    let mut counts = vec![0usize; candidates.len()];

    for rep in 0..repeats {
        let mut rows = order.clone();
        let mut rng = stream_rng(seed, Domain::CrossValidation, rep as u64);
        // Fisher-Yates over the sorted order
        for i in (1..n).rev() {
            let j = rng.random_range(0..=i);
            rows.swap(i, j);
        }
        let bounds: Vec<usize> = (0..=folds).map(|f| f * n / folds).collect();
        for f in 0..folds {
            let held = &rows[bounds[f]..bounds[f + 1]];
            let mut train_x = Vec::with_capacity(n - held.len());
            let mut train_y = Vec::with_capacity(n - held.len());
            for (pos, &row) in rows.iter().enumerate() {
                if pos < bounds[f] || pos >= bounds[f + 1] {
                    train_x.push(ps.x[row]);
                    train_y.push(ps.y[row]);
                }
            }
            let queries: Vec<f64> = held.iter().map(|&r| ps.x[r]).collect();
            for (ci, &h) in candidates.iter().enumerate() {
                let preds = fit_at_queries(
                    &train_x,
                    &train_y,
                    h,
                    KernelSpec::gaussian(1).kind,
                    &queries,
                    FitTarget::Value,
                );
                for (qi, &row) in held.iter().enumerate() {
                    if preds[qi].is_finite() {
                        let e = preds[qi] - ps.y[row];
                        sse[ci] += e * e;
                        counts[ci] += 1;
                    }
                }
            }
        }
    }

    let table: Vec<(f64, f64)> = candidates
        .iter()
        .zip(sse.iter().zip(counts.iter()))
        .map(|(&h, (&s, &c))| {
            let score = if c == 0 { f64::INFINITY } else { s / c as f64 };
            (h, score)
        })
        .collect();
    let h = argmin_smallest(&table)?;
    Ok(BandwidthChoice {
        h,
        method: BandwidthMethod::KfoldCv,
        diagnostics: Some(table),
    })
}

/// Default LSCV candidates: 20 log-spaced values on [0.05, 1] times the
/// rule-of-thumb scale.
pub fn default_lscv_candidates(s: &Sample) -> Result<Vec<f64>> {
    let rot = rule_of_thumb(s)?.h;
    Ok(log_spaced(0.05 * rot, 1.0 * rot, 20))
}

/// Default regression CV candidates: 20 log-spaced values on [0.25, 4]
/// times `(range/10) * n^(-1/5)`.
pub fn default_regression_candidates(ps: &PairedSample) -> Vec<f64> {
    let (lo, hi) = ps.x_range();
    let scale = (hi - lo) / 10.0 * (ps.len() as f64).powf(-0.2);
    log_spaced(0.25 * scale, 4.0 * scale, 20)
}

fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && count >= 2);
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (llo + (lhi - llo) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Argmin over finite scores; ties within 1e-12 resolve to the smallest h.
fn argmin_smallest(table: &[(f64, f64)]) -> Result<f64> {
    let best = table
        .iter()
        .filter(|(_, s)| s.is_finite())
        .map(|&(_, s)| s)
        .fold(f64::INFINITY, f64::min);
    if !best.is_finite() {
        return Err(Error::AllScoresNonFinite);
    }
    let h = table
        .iter()
        .filter(|(_, s)| s.is_finite() && *s <= best + 1e-12)
        .map(|&(h, _)| h)
        .fold(f64::INFINITY, f64::min);
    Ok(h)
}

fn sample_std(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let ss = xs.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
    (ss / (n - 1.0)).sqrt()
}

/// Interquartile range with linear quantile interpolation.
fn interquartile_range(xs: &[f64]) -> f64 {
    let mut sorted = xs.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25)
}

fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let idx = (sorted.len() - 1) as f64 * p;
    let lo = idx.floor() as usize;
    let frac = idx - lo as f64;
    if lo + 1 < sorted.len() {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    } else {
        sorted[lo]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn rot_1d_formula() {
        let xs = vec![-2.0, -1.0, 0.0, 1.0, 2.0];
        let s = Sample::from_1d(xs.clone()).unwrap();
        let h = rule_of_thumb(&s).unwrap();
        assert_eq!(h.method, BandwidthMethod::Rot);
        // sd = sqrt(10/4), IQR = 2 so IQR/1.34 binds
        let expected = 0.9 * (2.0 / 1.34) * 5f64.powf(-0.2);
        assert_abs_diff_eq!(h.h, expected, epsilon = 1e-12);
    }

    #[test]
    fn rot_scale_equivariance() {
        let mut rng = stream_rng(3, Domain::Data, 0);
        let xs: Vec<f64> = (0..200)
            .map(|_| <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng))
            .collect();
        let h1 = rule_of_thumb(&Sample::from_1d(xs.clone()).unwrap()).unwrap().h;
        let h2 = rule_of_thumb(
            &Sample::from_1d(xs.iter().map(|v| 2.0 * v).collect()).unwrap(),
        )
        .unwrap()
        .h;
        assert_abs_diff_eq!(h2, 2.0 * h1, epsilon = 1e-12 * h1.abs());
    }

    #[test]
    fn rot_zero_dispersion_errors() {
        let s = Sample::from_1d(vec![1.0; 10]).unwrap();
        assert!(matches!(rule_of_thumb(&s), Err(Error::ZeroDispersion)));
        // IQR may vanish while the standard deviation stays positive
        let mut xs = vec![0.0; 9];
        xs.push(100.0);
        let h = rule_of_thumb(&Sample::from_1d(xs).unwrap()).unwrap();
        assert!(h.h > 0.0);
    }

    #[test]
    fn rot_2d_formula() {
        // two-point coordinates chosen so each sample sd is exactly 0.3
        let n = 1000usize;
        let a = 0.3 * ((n as f64 - 1.0) / n as f64).sqrt();
        let pts: Vec<[f64; 2]> = (0..n)
            .map(|i| {
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                [s * a, -s * a]
            })
            .collect();
        let h = rule_of_thumb(&Sample::from_2d(pts).unwrap()).unwrap();
        assert_abs_diff_eq!(h.h, 0.09486832980505138, epsilon = 1e-9);
    }

    #[test]
    fn lscv_single_candidate() {
        let s = Sample::from_1d(vec![-1.0, -0.2, 0.1, 0.4, 1.3]).unwrap();
        let c = lscv_bandwidth(&s, &[0.3]).unwrap();
        assert_eq!(c.h, 0.3);
        assert_eq!(c.diagnostics.unwrap().len(), 1);
    }

    #[test]
    fn lscv_absurd_bandwidth_scores_worse() {
        let mut rng = stream_rng(5, Domain::Data, 0);
        let xs: Vec<f64> = (0..400)
            .map(|_| <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng))
            .collect();
        let s = Sample::from_1d(xs).unwrap();
        let (lo, hi) = s.range(0);
        let absurd = 10.0 * (hi - lo);
        let grid = [0.1, 0.3, 0.5, absurd];
        let c = lscv_bandwidth(&s, &grid).unwrap();
        let table = c.diagnostics.unwrap();
        let selected_score = table.iter().find(|(h, _)| *h == c.h).unwrap().1;
        let absurd_score = table.iter().find(|(h, _)| *h == absurd).unwrap().1;
        assert!(absurd_score > selected_score);
        assert_ne!(c.h, absurd);
    }

    #[test]
    fn lscv_tracks_rule_of_thumb_for_normal_data() {
        let mut hits = 0;
        for seed in 0..10u64 {
            let mut rng = stream_rng(seed, Domain::Data, 7);
            let xs: Vec<f64> = (0..1000)
                .map(|_| {
                    <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng)
                })
                .collect();
            let s = Sample::from_1d(xs).unwrap();
            let rot = rule_of_thumb(&s).unwrap().h;
            let candidates = log_spaced(0.05, 1.0, 20);
            let picked = lscv_bandwidth(&s, &candidates).unwrap().h;
            if picked >= 0.5 * rot && picked <= 2.0 * rot {
                hits += 1;
            }
        }
        assert!(hits > 5, "LSCV within a factor 2 of ROT in {hits}/10 seeds");
    }

    fn sine_sample(seed: u64, n: usize) -> PairedSample {
        let mut rng = stream_rng(seed, Domain::Data, 11);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|&v| {
                let eps: f64 =
                    <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng);
                (std::f64::consts::PI * v).sin() + 0.1 * eps
            })
            .collect();
        PairedSample::new(x, y).unwrap()
    }

    #[test]
    fn kfold_ties_resolve_to_smallest_h() {
        // noiseless linear data: every candidate reproduces exactly
        let x: Vec<f64> = (0..40).map(|i| i as f64 / 39.0).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let ps = PairedSample::new(x, y).unwrap();
        let c = kfold_cv_bandwidth(&ps, 5, 3, &[0.1, 0.2, 0.4], 42).unwrap();
        assert_eq!(c.h, 0.1);
        for (_, score) in c.diagnostics.unwrap() {
            assert!(score < 1e-16);
        }
    }

    #[test]
    fn kfold_is_deterministic_and_permutation_invariant() {
        let ps = sine_sample(2, 120);
        let candidates = log_spaced(0.02, 0.4, 8);
        let a = kfold_cv_bandwidth(&ps, 5, 4, &candidates, 9).unwrap();
        let b = kfold_cv_bandwidth(&ps, 5, 4, &candidates, 9).unwrap();
        assert_eq!(a.h, b.h);
        assert_eq!(a.diagnostics, b.diagnostics);

        // reverse the rows; the seeded selection must not change
        let rev = PairedSample::new(
            ps.x.iter().rev().copied().collect(),
            ps.y.iter().rev().copied().collect(),
        )
        .unwrap();
        let c = kfold_cv_bandwidth(&rev, 5, 4, &candidates, 9).unwrap();
        assert_eq!(a.h, c.h);
        assert_eq!(a.diagnostics, c.diagnostics);

        let d = kfold_cv_bandwidth(&ps, 5, 4, &candidates, 10).unwrap();
        assert!(d.h > 0.0);
    }

    #[test]
    fn kfold_sine_selects_sensible_window() {
        let candidates = log_spaced(0.01, 0.5, 20);
        let mut hits = 0;
        for seed in 0..20u64 {
            let ps = sine_sample(seed, 500);
            let c = kfold_cv_bandwidth(&ps, 5, 10, &candidates, seed).unwrap();
            if c.h >= 0.02 && c.h <= 0.2 {
                hits += 1;
            }
        }
        assert!(hits >= 18, "CV bandwidth in [0.02, 0.2] for {hits}/20 seeds");
    }

    #[test]
    fn kfold_rejects_bad_configs() {
        let ps = sine_sample(1, 30);
        assert!(kfold_cv_bandwidth(&ps, 1, 5, &[0.1], 0).is_err());
        assert!(kfold_cv_bandwidth(&ps, 20, 5, &[0.1], 0).is_err());
        assert!(kfold_cv_bandwidth(&ps, 5, 5, &[], 0).is_err());
    }
}
