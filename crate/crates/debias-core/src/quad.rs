//! Adaptive Gauss–Kronrod quadrature (G7/K15 pair with interval bisection).
//!
//! Used for kernel moment constants and for the quadrature oracles in tests.
//! Accuracy target is an absolute tolerance; intervals are split until the
//! embedded error estimate is below the tolerance share of each subinterval.

use crate::error::{Error, Result};

// 15-point Kronrod nodes on [-1, 1] (positive half) and weights, with the
// embedded 7-point Gauss weights. Standard QUADPACK values.
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];

const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// One G7/K15 pass over [a, b]; returns (kronrod estimate, |k15 - g7|).
fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let fc = f(center);
    let mut result_gauss = WG[3] * fc;
    let mut result_kronrod = WGK[7] * fc;

    for (j, &x) in XGK.iter().enumerate().take(7) {
        let dx = half * x;
        let fsum = f(center - dx) + f(center + dx);
        result_kronrod += WGK[j] * fsum;
        if j % 2 == 1 {
            // odd Kronrod indices are the embedded Gauss nodes
            result_gauss += WG[j / 2] * fsum;
        }
    }

    result_kronrod *= half;
    result_gauss *= half;
    (result_kronrod, (result_kronrod - result_gauss).abs())
}

fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> Result<f64> {
    let (value, err) = gauss_kronrod(f, a, b);
    if err <= tol || (b - a).abs() < 1e-14 {
        return Ok(value);
    }
    if depth == 0 {
        return Err(Error::QuadratureNonConvergence);
    }
    let mid = 0.5 * (a + b);
    let left = adaptive(f, a, mid, 0.5 * tol, depth - 1)?;
    let right = adaptive(f, mid, b, 0.5 * tol, depth - 1)?;
    Ok(left + right)
}

/// Integrate `f` over [a, b] to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    adaptive(&f, a, b, tol, 40)
}

/// Integrate `f` over [ax, bx] × [ay, by] by nested adaptive quadrature.
///
/// The inner integral is resolved one decade tighter than the outer request.
pub fn integrate_2d<F: Fn(f64, f64) -> f64 + Copy>(
    f: F,
    ax: f64,
    bx: f64,
    ay: f64,
    by: f64,
    tol: f64,
) -> Result<f64> {
    let inner_tol = tol * 0.1;
    adaptive(
        &|x: f64| {
            adaptive(&|y: f64| f(x, y), ay, by, inner_tol, 40).unwrap_or(f64::NAN)
        },
        ax,
        bx,
        tol,
        40,
    )
    .and_then(|v| {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::QuadratureNonConvergence)
        }
    })
}
