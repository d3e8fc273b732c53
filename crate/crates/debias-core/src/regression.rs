//! Local polynomial regression: the local linear smoother, the third-order
//! curvature estimator, and the debiased local linear smoother.
//!
//! Fits are weighted least squares in the scaled basis `u = (X_i - x)/h`,
//! which keeps the normal equations well conditioned; the intercept equals
//! the smoothed value and the third coefficient, times `2/h^2`, estimates
//! the second derivative. Near-singular windows are retried with a tiny
//! ridge (`1e-10 * tr/4` on the gram diagonal); the ridge is not applied to
//! healthy windows, where the fits reproduce polynomials exactly. Grid
//! points that stay degenerate are recorded as missing, and a fit fails
//! outright when more than 5% of grid points degenerate.

use crate::error::{Error, Result};
use crate::grid::EvalGrid;
use crate::kernel::{KernelKind, KernelSpec};
use crate::sample::PairedSample;

/// Regression estimate on a 1-d grid; degenerate grid points hold NaN and
/// are listed in `failed`.
#[derive(Debug, Clone)]
pub struct RegressionEstimate {
    pub grid: EvalGrid,
    pub values: Vec<f64>,
    pub failed: Vec<usize>,
    pub h: f64,
    pub tau: Option<f64>,
    pub kernel: KernelSpec,
    pub debiased: bool,
    /// 0 for the smoother itself, 2 for the curvature estimator.
    pub derivative: u8,
}

const WEIGHT_EPS: f64 = 1e-12;
const RIDGE: f64 = 1e-10;
/// Fraction of grid points allowed to degenerate before the call fails.
const DEGENERATE_BUDGET: f64 = 0.05;

fn check_inputs(h: f64, k: KernelSpec, g: &EvalGrid) -> Result<()> {
    if !(h > 0.0) {
        return Err(Error::InvalidBandwidth(h));
    }
    if k.dim != 1 || g.dim() != 1 {
        return Err(Error::DimensionMismatch(
            "regression requires a one-dimensional kernel and grid".into(),
        ));
    }
    Ok(())
}

fn fail_budget(failed: &[usize], total: usize) -> Result<()> {
    if failed.len() as f64 > DEGENERATE_BUDGET * total as f64 {
        return Err(Error::DegenerateFit {
            failed: failed.len(),
            total,
        });
    }
    Ok(())
}

/// Local linear smoother `r_h(x)`, the weight form solved as WLS.
pub fn local_linear_fit(
    ps: &PairedSample,
    h: f64,
    k: KernelSpec,
    g: &EvalGrid,
) -> Result<RegressionEstimate> {
    check_inputs(h, k, g)?;
    let values = fit_at_queries(&ps.x, &ps.y, h, k.kind, g.xs(), FitTarget::Value);
    let failed: Vec<usize> = collect_failed(&values);
    fail_budget(&failed, values.len())?;
    Ok(RegressionEstimate {
        grid: g.clone(),
        values,
        failed,
        h,
        tau: None,
        kernel: k,
        debiased: false,
        derivative: 0,
    })
}

/// Third-order local polynomial estimate of the second derivative r''(x);
/// the cubic coefficient is rescaled by 2 to be a curvature.
pub fn local_poly3_second_deriv(
    ps: &PairedSample,
    b: f64,
    k: KernelSpec,
    g: &EvalGrid,
) -> Result<RegressionEstimate> {
    check_inputs(b, k, g)?;
    let values = fit_at_queries(&ps.x, &ps.y, b, k.kind, g.xs(), FitTarget::SecondDeriv);
    let failed = collect_failed(&values);
    fail_budget(&failed, values.len())?;
    Ok(RegressionEstimate {
        grid: g.clone(),
        values,
        failed,
        h: b,
        tau: None,
        kernel: k,
        debiased: false,
        derivative: 2,
    })
}

/// Debiased local linear smoother
/// `r_{tau,h}(x) = r_h(x) - 0.5 c_K h^2 r''_{h/tau}(x)`.
pub fn debiased_local_linear(
    ps: &PairedSample,
    h: f64,
    tau: f64,
    k: KernelSpec,
    g: &EvalGrid,
) -> Result<RegressionEstimate> {
    check_inputs(h, k, g)?;
    if !(tau > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "tau must be positive, got {tau}"
        )));
    }
    let ck = k.second_moment()?;
    let smooth = fit_at_queries(&ps.x, &ps.y, h, k.kind, g.xs(), FitTarget::Value);
    let curv = fit_at_queries(&ps.x, &ps.y, h / tau, k.kind, g.xs(), FitTarget::SecondDeriv);
    let values: Vec<f64> = smooth
        .iter()
        .zip(curv.iter())
        .map(|(&s, &c)| s - 0.5 * ck * h * h * c)
        .collect();
    let failed = collect_failed(&values);
    fail_budget(&failed, values.len())?;
    Ok(RegressionEstimate {
        grid: g.clone(),
        values,
        failed,
        h,
        tau: Some(tau),
        kernel: k,
        debiased: true,
        derivative: 0,
    })
}

/// Scaled gram matrix `Xi_n(x, h)` with entries
/// `(1/(nh)) sum_i ((X_i - x)/h)^(j+l-2) K((X_i - x)/h)`, j, l = 1..4.
pub fn scaled_gram(ps: &PairedSample, x: f64, h: f64, k: KernelSpec) -> Result<[[f64; 4]; 4]> {
    if !(h > 0.0) {
        return Err(Error::InvalidBandwidth(h));
    }
    if k.dim != 1 {
        return Err(Error::DimensionMismatch(
            "scaled gram requires a one-dimensional kernel".into(),
        ));
    }
    Ok(scaled_gram_xs(&ps.x, x, h, k.kind))
}

pub(crate) fn scaled_gram_xs(xs: &[f64], x: f64, h: f64, kind: KernelKind) -> [[f64; 4]; 4] {
    let mut moments = [0.0f64; 7];
    for &xi in xs {
        let u = (xi - x) / h;
        let w = kind.profile(u);
        let mut p = w;
        for m in moments.iter_mut() {
            *m += p;
            p *= u;
        }
    }
    let scale = 1.0 / (xs.len() as f64 * h);
    let mut out = [[0.0f64; 4]; 4];
    for (j, row) in out.iter_mut().enumerate() {
        for (l, slot) in row.iter_mut().enumerate() {
            *slot = moments[j + l] * scale;
        }
    }
    out
}

fn collect_failed(values: &[f64]) -> Vec<usize> {
    values
        .iter()
        .enumerate()
        .filter(|(_, v)| !v.is_finite())
        .map(|(i, _)| i)
        .collect()
}

#[derive(Clone, Copy, PartialEq)]
pub(crate) enum FitTarget {
    Value,
    SecondDeriv,
}

/// Local polynomial fit at arbitrary query points; NaN marks degenerate
/// queries. Used by the grid ops above and by cross-validation prediction.
pub(crate) fn fit_at_queries(
    xs: &[f64],
    ys: &[f64],
    bw: f64,
    kind: KernelKind,
    queries: &[f64],
    target: FitTarget,
) -> Vec<f64> {
    let use_recurrence = kind == KernelKind::Gaussian
        && queries.len() >= 8
        && queries.windows(2).all(|w| w[1] > w[0])
        && EvalGrid::axis_is_uniform(queries);
    let moments = if use_recurrence {
        accumulate_recurrence(xs, ys, bw, queries, target)
    } else {
        accumulate_direct(xs, ys, bw, kind, queries, target)
    };
    moments
        .into_iter()
        .enumerate()
        .map(|(qi, m)| solve(&m, bw, target, xs, queries[qi], kind))
        .collect()
}

/// Moment accumulator per query point: design moments `m_j = sum u^j w` and
/// response moments `t_j = sum u^j w y`.
#[derive(Clone, Copy)]
struct Moments {
    m: [f64; 7],
    t: [f64; 4],
    positive: u32,
}

impl Moments {
    fn zero() -> Self {
        Moments {
            m: [0.0; 7],
            t: [0.0; 4],
            positive: 0,
        }
    }

    #[inline]
    fn update(&mut self, u: f64, w: f64, y: f64, target: FitTarget) {
        if w > 0.0 {
            self.positive += 1;
        }
        match target {
            FitTarget::Value => {
                let wu = w * u;
                self.m[0] += w;
                self.m[1] += wu;
                self.m[2] += wu * u;
                let wy = w * y;
                self.t[0] += wy;
                self.t[1] += wy * u;
            }
            FitTarget::SecondDeriv => {
                let mut p = w;
                for slot in self.m.iter_mut() {
                    *slot += p;
                    p *= u;
                }
                let mut py = w * y;
                for slot in self.t.iter_mut() {
                    *slot += py;
                    py *= u;
                }
            }
        }
    }
}

fn accumulate_direct(
    xs: &[f64],
    ys: &[f64],
    bw: f64,
    kind: KernelKind,
    queries: &[f64],
    target: FitTarget,
) -> Vec<Moments> {
    queries
        .iter()
        .map(|&q| {
            let mut acc = Moments::zero();
            for (&xi, &yi) in xs.iter().zip(ys.iter()) {
                let u = (xi - q) / bw;
                acc.update(u, kind.profile(u), yi, target);
            }
            acc
        })
        .collect()
}

/// Gaussian weights along a uniform query grid via the same multiplicative
/// recurrence as the density evaluator; accumulation per query point stays
/// in sample order.
fn accumulate_recurrence(
    xs: &[f64],
    ys: &[f64],
    bw: f64,
    queries: &[f64],
    target: FitTarget,
) -> Vec<Moments> {
    let n = queries.len();
    let step = (queries[n - 1] - queries[0]) / (n - 1) as f64;
    let e = step / bw;
    let c = (-e * e).exp();
    let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    let mut acc = vec![Moments::zero(); n];

    for (&xi, &yi) in xs.iter().zip(ys.iter()) {
        let gstar = (((xi - queries[0]) / step).round().max(0.0) as usize).min(n - 1);

        // u = (X_i - q)/bw decreases by e per rightward query step
        for dir in 0..2 {
            let (mut g, du) = if dir == 0 {
                (gstar as isize, -e)
            } else {
                (gstar as isize - 1, e)
            };
            let mut u = (xi - queries[gstar]) / bw + if dir == 0 { 0.0 } else { du };
            let mut w = (-0.5 * u * u).exp();
            // exp(-(u+du)^2/2) = exp(-u^2/2) * exp(-u*du - du^2/2)
            let mut q = (-u * du - 0.5 * du * du).exp();
            while g >= 0 && (g as usize) < n {
                acc[g as usize].update(u, w * norm, yi, target);
                if w == 0.0 {
                    break;
                }
                w *= q;
                q *= c;
                u += du;
                g += if dir == 0 { 1 } else { -1 };
            }
        }
    }
    acc
}

fn solve(
    acc: &Moments,
    bw: f64,
    target: FitTarget,
    xs: &[f64],
    query: f64,
    kind: KernelKind,
) -> f64 {
    if acc.m[0] < WEIGHT_EPS {
        return f64::NAN;
    }
    match target {
        FitTarget::Value => {
            let solve2 = |ridge: f64| -> f64 {
                let (a, b2, d) = (acc.m[0] + ridge, acc.m[1], acc.m[2] + ridge);
                let det = a * d - b2 * b2;
                if !(det > 0.0) {
                    return f64::NAN;
                }
                let beta0 = (d * acc.t[0] - b2 * acc.t[1]) / det;
                if beta0.is_finite() {
                    beta0
                } else {
                    f64::NAN
                }
            };
            let det = acc.m[0] * acc.m[2] - acc.m[1] * acc.m[1];
            if det > 1e-13 * acc.m[0] * acc.m[2] {
                solve2(0.0)
            } else {
                solve2(RIDGE * (acc.m[0] + acc.m[2]) / 4.0)
            }
        }
        FitTarget::SecondDeriv => {
            if acc.positive < 4 {
                return f64::NAN;
            }
            // sparse windows must still span 4 distinct covariates for a
            // cubic fit
            if acc.positive <= 32 && !has_four_distinct(xs, query, bw, kind) {
                return f64::NAN;
            }
            let solve4 = |ridge: f64| -> f64 {
                let mut g = [[0.0f64; 5]; 4];
                for (j, row) in g.iter_mut().enumerate() {
                    row[..4].copy_from_slice(&acc.m[j..j + 4]);
                    row[j] += ridge;
                    row[4] = acc.t[j];
                }
                match gauss_solve4(&mut g) {
                    Some(gamma2) => {
                        let val = 2.0 * gamma2 / (bw * bw);
                        if val.is_finite() {
                            val
                        } else {
                            f64::NAN
                        }
                    }
                    None => f64::NAN,
                }
            };
            let unridged = solve4(0.0);
            if unridged.is_nan() {
                solve4(RIDGE * (acc.m[0] + acc.m[2] + acc.m[4] + acc.m[6]) / 4.0)
            } else {
                unridged
            }
        }
    }
}

fn has_four_distinct(xs: &[f64], query: f64, bw: f64, kind: KernelKind) -> bool {
    let mut seen = [0.0f64; 4];
    let mut count = 0usize;
    for &xi in xs {
        if kind.profile((xi - query) / bw) > 0.0 && !seen[..count].contains(&xi) {
            seen[count] = xi;
            count += 1;
            if count == 4 {
                return true;
            }
        }
    }
    false
}

/// Gaussian elimination with partial pivoting on a 4x5 augmented system;
/// returns the third unknown (the cubic fit's curvature coefficient), or
/// None when a pivot collapses relative to the matrix scale.
fn gauss_solve4(a: &mut [[f64; 5]; 4]) -> Option<f64> {
    let scale = (0..4).map(|i| a[i][i].abs()).fold(0.0f64, f64::max);
    for col in 0..4 {
        let pivot = (col..4)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[pivot][col].abs() <= 1e-13 * scale {
            return None;
        }
        a.swap(col, pivot);
        for row in col + 1..4 {
            let f = a[row][col] / a[col][col];
            for k in col..5 {
                a[row][k] -= f * a[col][k];
            }
        }
    }
    let mut x = [0.0f64; 4];
    for row in (0..4).rev() {
        let mut v = a[row][4];
        for k in row + 1..4 {
            v -= a[row][k] * x[k];
        }
        x[row] = v / a[row][row];
    }
    if x.iter().all(|v| v.is_finite()) {
        Some(x[2])
    } else {
        None
    }
}
