//! Standard normal density and quantile function.

// the AS 241 coefficient tables are quoted at published precision
#![allow(clippy::excessive_precision)]

use std::f64::consts::PI;

/// Standard normal density φ(x).
pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Isotropic d-dimensional standard normal density at squared radius `r2`.
pub fn std_normal_pdf_d(r2: f64, d: usize) -> f64 {
    (-0.5 * r2).exp() / (2.0 * PI).powf(d as f64 / 2.0)
}

/// Standard normal quantile (inverse CDF), Wichura's AS 241 (PPND16).
///
/// Accurate to about 1e-15 over (0, 1); panics outside the open interval.
pub fn std_normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile requires p in (0,1), got {p}");
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q * horner(r, &A) / horner(r, &B);
    }
    let mut r = if q < 0.0 { p } else { 1.0 - p };
    r = (-r.ln()).sqrt();
    let val = if r <= 5.0 {
        let r = r - 1.6;
        horner(r, &C) / horner(r, &D)
    } else {
        let r = r - 5.0;
        horner(r, &E) / horner(r, &F)
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

fn horner(x: f64, coefs: &[f64; 8]) -> f64 {
    coefs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

const A: [f64; 8] = [
    3.3871328727963666080,
    1.3314166789178437745e2,
    1.9715909503065514427e3,
    1.3731693765509461125e4,
    4.5921953931549871457e4,
    6.7265770927008700853e4,
    3.3430575583588128105e4,
    2.5090809287301226727e3,
];
const B: [f64; 8] = [
    1.0,
    4.2313330701600911252e1,
    6.8718700749205790830e2,
    5.3941960214247511077e3,
    2.1213794301586595867e4,
    3.9307895800092710610e4,
    2.8729085735721942674e4,
    5.2264952788528545610e3,
];
const C: [f64; 8] = [
    1.42343711074968357734,
    4.63033784615654529590,
    5.76949722146069140550,
    3.64784832476320460504,
    1.27045825245236838258,
    2.41780725177450611770e-1,
    2.27238449892691845833e-2,
    7.74545014278341407640e-4,
];
const D: [f64; 8] = [
    1.0,
    2.05319162663775882187,
    1.67638483018380384940,
    6.89767334985100004550e-1,
    1.48103976427480074590e-1,
    1.51986665636164571966e-2,
    5.47593808499534494600e-4,
    1.05075007164441684324e-9,
];
const E: [f64; 8] = [
    6.65790464350110377720,
    5.46378491116411436990,
    1.78482653991729133580,
    2.96560571828504891230e-1,
    2.65321895265761230930e-2,
    1.24266094738807843860e-3,
    2.71155556874348757815e-5,
    2.01033439929228813265e-7,
];
const F: [f64; 8] = [
    1.0,
    5.99832206555887937690e-1,
    1.36929880922735805310e-1,
    1.48753612908506148525e-2,
    7.86869131145613259100e-4,
    1.84631831751005468180e-5,
    1.42151175831644588870e-7,
    2.04426310338993978564e-15,
];

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn pdf_values() {
        assert_abs_diff_eq!(std_normal_pdf(0.0), 0.3989422804014327, epsilon = 1e-15);
        assert_abs_diff_eq!(std_normal_pdf(1.0), 0.24197072451914337, epsilon = 1e-15);
        assert_abs_diff_eq!(
            std_normal_pdf_d(0.0, 2),
            0.15915494309189535,
            epsilon = 1e-15
        );
    }

    #[test]
    fn quantile_values() {
        assert_abs_diff_eq!(std_normal_quantile(0.975), 1.959963984540054, epsilon = 1e-12);
        assert_abs_diff_eq!(std_normal_quantile(0.5), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            std_normal_quantile(0.025),
            -std_normal_quantile(0.975),
            epsilon = 1e-12
        );
        // round-trip against the pdf through a numeric CDF at a few points
        assert_abs_diff_eq!(std_normal_quantile(0.8413447460685429), 1.0, epsilon = 1e-9);
    }
}
