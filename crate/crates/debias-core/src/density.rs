//! Kernel density estimation: the plain KDE, its Laplacian estimator, and
//! the debiased KDE.
//!
//! All estimators are direct O(n * G) sums. Per grid point the contributions
//! are accumulated in sample order, so results are independent of how grid
//! points are partitioned across threads. Two algebraically equivalent
//! fast paths avoid redundant `exp` calls without changing the summation
//! order: a multiplicative recurrence along uniform 1-d grids for the
//! gaussian kernel, and per-axis factor tables for product kernels on 2-d
//! tensor grids.

use crate::error::{Error, Result};
use crate::grid::EvalGrid;
use crate::kernel::{DebiasedKernel, KernelKind, KernelSpec};
use crate::sample::Sample;

/// Density-like estimate on a grid with the estimator metadata.
#[derive(Debug, Clone)]
pub struct DensityEstimate {
    pub grid: EvalGrid,
    pub values: Vec<f64>,
    pub h: f64,
    pub tau: Option<f64>,
    pub kernel: KernelSpec,
    pub debiased: bool,
}

#[derive(Clone, Copy)]
enum EvalKind {
    Kernel,
    Laplacian,
    Debiased { tau: f64, ck: f64 },
}

fn check_dims(s: &Sample, k: KernelSpec, g: &EvalGrid) -> Result<()> {
    if s.dim() != k.dim || s.dim() != g.dim() {
        return Err(Error::DimensionMismatch(format!(
            "sample d={}, kernel d={}, grid d={}",
            s.dim(),
            k.dim,
            g.dim()
        )));
    }
    Ok(())
}

/// The (plain) KDE `p_h(x) = 1/(n h^d) sum_i K((x - X_i)/h)`.
pub fn kde_eval(s: &Sample, h: f64, k: KernelSpec, g: &EvalGrid) -> Result<DensityEstimate> {
    if !(h > 0.0) {
        return Err(Error::InvalidBandwidth(h));
    }
    check_dims(s, k, g)?;
    let mut values = accumulate(s, h, k, g, EvalKind::Kernel);
    let scale = 1.0 / (s.len() as f64 * h.powi(s.dim() as i32));
    values.iter_mut().for_each(|v| *v *= scale);
    Ok(DensityEstimate {
        grid: g.clone(),
        values,
        h,
        tau: None,
        kernel: k,
        debiased: false,
    })
}

/// The Laplacian estimator `1/(n b^(d+2)) sum_i lap(K)((x - X_i)/b)`.
pub fn kde_laplacian_eval(
    s: &Sample,
    b: f64,
    k: KernelSpec,
    g: &EvalGrid,
) -> Result<DensityEstimate> {
    if !(b > 0.0) {
        return Err(Error::InvalidBandwidth(b));
    }
    check_dims(s, k, g)?;
    let mut values = accumulate(s, b, k, g, EvalKind::Laplacian);
    let scale = 1.0 / (s.len() as f64 * b.powi(s.dim() as i32 + 2));
    values.iter_mut().for_each(|v| *v *= scale);
    Ok(DensityEstimate {
        grid: g.clone(),
        values,
        h: b,
        tau: None,
        kernel: k,
        debiased: false,
    })
}

/// The debiased KDE `1/(n h^d) sum_i M_tau((x - X_i)/h)`.
///
/// Pointwise identical (up to rounding) to
/// `kde_eval(h) - 0.5 * c_K * h^2 * kde_laplacian_eval(b = h/tau)`.
pub fn debiased_kde_eval(
    s: &Sample,
    h: f64,
    tau: f64,
    k: KernelSpec,
    g: &EvalGrid,
) -> Result<DensityEstimate> {
    if !(h > 0.0) {
        return Err(Error::InvalidBandwidth(h));
    }
    check_dims(s, k, g)?;
    let dk = DebiasedKernel::new(k, tau)?;
    let mut values = accumulate(s, h, k, g, EvalKind::Debiased { tau, ck: dk.ck });
    let scale = 1.0 / (s.len() as f64 * h.powi(s.dim() as i32));
    values.iter_mut().for_each(|v| *v *= scale);
    Ok(DensityEstimate {
        grid: g.clone(),
        values,
        h,
        tau: Some(tau),
        kernel: k,
        debiased: true,
    })
}

/// Trapezoid integral of grid values (tensor-product trapezoid in 2-d).
pub fn trapezoid_integral(grid: &EvalGrid, values: &[f64]) -> f64 {
    match grid {
        EvalGrid::One { xs } => {
            let mut acc = 0.0;
            for i in 0..xs.len() - 1 {
                acc += 0.5 * (values[i] + values[i + 1]) * (xs[i + 1] - xs[i]);
            }
            acc
        }
        EvalGrid::Two { xs, ys } => {
            let ny = ys.len();
            // integrate along y per x row, then along x
            let rows: Vec<f64> = (0..xs.len())
                .map(|ix| {
                    let mut acc = 0.0;
                    for iy in 0..ny - 1 {
                        acc += 0.5 * (values[ix * ny + iy] + values[ix * ny + iy + 1])
                            * (ys[iy + 1] - ys[iy]);
                    }
                    acc
                })
                .collect();
            let mut acc = 0.0;
            for ix in 0..xs.len() - 1 {
                acc += 0.5 * (rows[ix] + rows[ix + 1]) * (xs[ix + 1] - xs[ix]);
            }
            acc
        }
    }
}

/// Per grid point, the sum over observations of the requested kernel form
/// at `u = (x - X_i) / bw` (no prefactor).
fn accumulate(s: &Sample, bw: f64, k: KernelSpec, g: &EvalGrid, kind: EvalKind) -> Vec<f64> {
    match g {
        EvalGrid::One { xs } => {
            if k.kind == KernelKind::Gaussian && EvalGrid::axis_is_uniform(xs) {
                accumulate_1d_gaussian_uniform(s, bw, xs, kind)
            } else {
                accumulate_1d_direct(s, bw, k, xs, kind)
            }
        }
        EvalGrid::Two { xs, ys } => accumulate_2d_tables(s, bw, k, xs, ys, kind),
    }
}

fn accumulate_1d_direct(
    s: &Sample,
    bw: f64,
    k: KernelSpec,
    xs: &[f64],
    kind: EvalKind,
) -> Vec<f64> {
    let data = s.raw();
    xs.iter()
        .map(|&x| {
            let mut acc = 0.0;
            for &xi in data {
                let u = (x - xi) / bw;
                acc += match kind {
                    EvalKind::Kernel => k.kind.profile(u),
                    EvalKind::Laplacian => k.kind.profile_dd(u),
                    EvalKind::Debiased { tau, ck } => {
                        k.kind.profile(u)
                            - 0.5 * ck * tau.powi(3) * k.kind.profile_dd(tau * u)
                    }
                };
            }
            acc
        })
        .collect()
}

/// Gaussian weights along a uniform grid via the exact recurrence
/// `w(u + e) = w(u) * exp(-u*e - e^2/2)`, seeded at the grid point nearest
/// each observation so the seed value is O(1) and decay is monotone.
fn accumulate_1d_gaussian_uniform(s: &Sample, bw: f64, xs: &[f64], kind: EvalKind) -> Vec<f64> {
    let n = xs.len();
    let step = (xs[n - 1] - xs[0]) / (n - 1) as f64;
    let e = step / bw;
    let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();

    // second gaussian track at argument tau*u for the debiasing term
    let (tau, ck, two_tracks) = match kind {
        EvalKind::Debiased { tau, ck } => (tau, ck, true),
        _ => (1.0, 1.0, false),
    };
    let e2 = tau * e;
    let c1 = (-e * e).exp();
    let c2 = (-e2 * e2).exp();

    let mut acc = vec![0.0f64; n];
    for &xi in s.raw() {
        let gstar = (((xi - xs[0]) / step).round().max(0.0) as usize).min(n - 1);
        let ustar = (xs[gstar] - xi) / bw;

        // walk right from gstar, then left from gstar - 1
        for dir in 0..2 {
            let (mut g, sign) = if dir == 0 {
                (gstar as isize, 1.0)
            } else {
                (gstar as isize - 1, -1.0)
            };
            let mut u = ustar + sign * (if dir == 0 { 0.0 } else { e });
            // unnormalized first track: exp(-u^2/2)
            let mut w = (-0.5 * u * u).exp();
            let mut q = (-(sign * u) * e - 0.5 * e * e).exp();
            // second track at argument tau*u
            let tu = tau * u;
            let mut w2 = (-0.5 * tu * tu).exp();
            let mut q2 = (-(sign * tu) * e2 - 0.5 * e2 * e2).exp();

            while g >= 0 && (g as usize) < n {
                let contrib = match kind {
                    EvalKind::Kernel => w * norm,
                    EvalKind::Laplacian => (u * u - 1.0) * w * norm,
                    EvalKind::Debiased { .. } => {
                        let tu = tau * u;
                        (w - 0.5 * ck * tau.powi(3) * ((tu * tu - 1.0) * w2)) * norm
                    }
                };
                acc[g as usize] += contrib;

                if w == 0.0 && (!two_tracks || w2 == 0.0) {
                    break;
                }
                w *= q;
                q *= c1;
                w2 *= q2;
                q2 *= c2;
                u += sign * e;
                g += sign as isize;
            }
        }
    }
    acc
}

/// Product-kernel evaluation on a 2-d tensor grid via per-axis factor
/// tables; exact regrouping of the direct per-point product.
fn accumulate_2d_tables(
    s: &Sample,
    bw: f64,
    k: KernelSpec,
    xs: &[f64],
    ys: &[f64],
    kind: EvalKind,
) -> Vec<f64> {
    let (nx, ny) = (xs.len(), ys.len());
    let mut acc = vec![0.0f64; nx * ny];

    // per-observation scratch tables
    let mut kx = vec![0.0f64; nx];
    let mut ky = vec![0.0f64; ny];
    let mut ddx = vec![0.0f64; nx];
    let mut ddy = vec![0.0f64; ny];
    // debiased needs tables at the pilot argument tau*u as well
    let mut kxb = vec![0.0f64; nx];
    let mut kyb = vec![0.0f64; ny];
    let mut ddxb = vec![0.0f64; nx];
    let mut ddyb = vec![0.0f64; ny];

    for i in 0..s.len() {
        let p = s.point(i);
        match kind {
            EvalKind::Kernel => {
                fill_tables(k.kind, xs, p[0], bw, 1.0, &mut kx, None);
                fill_tables(k.kind, ys, p[1], bw, 1.0, &mut ky, None);
                for ix in 0..nx {
                    let row = &mut acc[ix * ny..(ix + 1) * ny];
                    let a = kx[ix];
                    for (iy, slot) in row.iter_mut().enumerate() {
                        *slot += a * ky[iy];
                    }
                }
            }
            EvalKind::Laplacian => {
                fill_tables(k.kind, xs, p[0], bw, 1.0, &mut kx, Some(&mut ddx));
                fill_tables(k.kind, ys, p[1], bw, 1.0, &mut ky, Some(&mut ddy));
                for ix in 0..nx {
                    let row = &mut acc[ix * ny..(ix + 1) * ny];
                    let (a, da) = (kx[ix], ddx[ix]);
                    for (iy, slot) in row.iter_mut().enumerate() {
                        *slot += da * ky[iy] + a * ddy[iy];
                    }
                }
            }
            EvalKind::Debiased { tau, ck } => {
                fill_tables(k.kind, xs, p[0], bw, 1.0, &mut kx, None);
                fill_tables(k.kind, ys, p[1], bw, 1.0, &mut ky, None);
                fill_tables(k.kind, xs, p[0], bw, tau, &mut kxb, Some(&mut ddxb));
                fill_tables(k.kind, ys, p[1], bw, tau, &mut kyb, Some(&mut ddyb));
                let factor = 0.5 * ck * tau.powi(4);
                for ix in 0..nx {
                    let row = &mut acc[ix * ny..(ix + 1) * ny];
                    let (a, ab, dab) = (kx[ix], kxb[ix], ddxb[ix]);
                    for (iy, slot) in row.iter_mut().enumerate() {
                        *slot += a * ky[iy] - factor * (dab * kyb[iy] + ab * ddyb[iy]);
                    }
                }
            }
        }
    }
    acc
}

fn fill_tables(
    kind: KernelKind,
    coords: &[f64],
    center: f64,
    bw: f64,
    tau: f64,
    k_out: &mut [f64],
    dd_out: Option<&mut [f64]>,
) {
    match dd_out {
        None => {
            for (slot, &c) in k_out.iter_mut().zip(coords.iter()) {
                *slot = kind.profile(tau * (c - center) / bw);
            }
        }
        Some(dd) => {
            for ((kslot, dslot), &c) in k_out.iter_mut().zip(dd.iter_mut()).zip(coords.iter()) {
                let u = tau * (c - center) / bw;
                // gaussian second derivative reuses the profile value
                let kv = kind.profile(u);
                *kslot = kv;
                *dslot = match kind {
                    KernelKind::Gaussian => (u * u - 1.0) * kv,
                    _ => kind.profile_dd(u),
                };
            }
        }
    }
}
