//! Kernel functions, their Laplacians, the debiased kernel, and kernel
//! moment matrices.
//!
//! Multivariate kernels are products of the one-dimensional profile, so the
//! gaussian case coincides with the isotropic standard normal and the
//! Laplacian separates into per-axis second derivatives.
//!
//! The debiased kernel is
//!
//! ```text
//! M_tau(x) = K(x) - (1/2) * c_K * tau^(d+2) * lap(K)(tau * x)
//! ```
//!
//! with `c_K` the second moment of the kernel. The factor 1/2 makes the
//! second moment of `M_tau` vanish, i.e. `M_tau` is a fourth-order kernel;
//! this is exercised by quadrature tests below.

use crate::error::{Error, Result};
use crate::quad;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Gaussian,
    Biweight,
}

impl KernelKind {
    /// One-dimensional kernel profile.
    #[inline]
    pub fn profile(self, u: f64) -> f64 {
        match self {
            KernelKind::Gaussian => crate::normal::std_normal_pdf(u),
            KernelKind::Biweight => {
                if u.abs() >= 1.0 {
                    0.0
                } else {
                    let t = 1.0 - u * u;
                    0.9375 * t * t
                }
            }
        }
    }

    /// Second derivative of the one-dimensional profile.
    #[inline]
    pub fn profile_dd(self, u: f64) -> f64 {
        match self {
            KernelKind::Gaussian => (u * u - 1.0) * crate::normal::std_normal_pdf(u),
            KernelKind::Biweight => {
                if u.abs() >= 1.0 {
                    0.0
                } else {
                    -3.75 * (1.0 - 3.0 * u * u)
                }
            }
        }
    }

    /// Radius beyond which the profile is zero or numerically negligible;
    /// quadrature domains are built from it.
    pub fn support_radius(self) -> f64 {
        match self {
            KernelKind::Gaussian => 10.0,
            KernelKind::Biweight => 1.0,
        }
    }
}

/// A kernel together with the dimension it is evaluated in (1 or 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub dim: usize,
}

impl KernelSpec {
    pub fn new(kind: KernelKind, dim: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::DimensionMismatch(format!(
                "kernel dimension must be 1 or 2, got {dim}"
            )));
        }
        Ok(Self { kind, dim })
    }

    pub fn gaussian(dim: usize) -> Self {
        Self::new(KernelKind::Gaussian, dim).expect("dim 1 or 2")
    }

    pub fn biweight(dim: usize) -> Self {
        Self::new(KernelKind::Biweight, dim).expect("dim 1 or 2")
    }

    /// Kernel value K(x); `x` must have `dim` coordinates.
    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        x.iter().map(|&c| self.kind.profile(c)).product()
    }

    /// Laplacian of the kernel at `x`.
    ///
    /// For the gaussian this equals `(|x|^2 - d) * K(x)`.
    pub fn laplacian(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        match self.dim {
            1 => self.kind.profile_dd(x[0]),
            _ => {
                let k0 = self.kind.profile(x[0]);
                let k1 = self.kind.profile(x[1]);
                self.kind.profile_dd(x[0]) * k1 + k0 * self.kind.profile_dd(x[1])
            }
        }
    }

    /// Second moment `c_K = ∫ x_1^2 K(x) dx`.
    ///
    /// Analytic for the gaussian; adaptive quadrature to 1e-10 otherwise.
    /// Product kernels integrate to their one-dimensional second moment in
    /// any dimension.
    pub fn second_moment(&self) -> Result<f64> {
        match self.kind {
            KernelKind::Gaussian => Ok(1.0),
            _ => {
                let r = self.kind.support_radius();
                let kind = self.kind;
                quad::integrate(|u| u * u * kind.profile(u), -r, r, 1e-10)
            }
        }
    }
}

/// The debiased kernel `M_tau` with its cached second-moment constant.
#[derive(Debug, Clone, Copy)]
pub struct DebiasedKernel {
    pub base: KernelSpec,
    pub tau: f64,
    pub ck: f64,
}

impl DebiasedKernel {
    pub fn new(base: KernelSpec, tau: f64) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "tau must be positive, got {tau}"
            )));
        }
        Ok(Self {
            base,
            tau,
            ck: base.second_moment()?,
        })
    }

    /// `M_tau(x) = K(x) - (1/2) c_K tau^(d+2) lap(K)(tau x)`; may be negative.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let d = self.base.dim;
        let mut scaled = [0.0f64; 2];
        for (s, &c) in scaled.iter_mut().zip(x.iter()) {
            *s = self.tau * c;
        }
        self.base.eval(x)
            - 0.5
                * self.ck
                * self.tau.powi(d as i32 + 2)
                * self.base.laplacian(&scaled[..d])
    }
}

/// Kernel moment matrix with entries `∫ u^(i+j-2) K(u) du`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentMatrix {
    pub order: usize,
    /// Row-major (order+1) x (order+1).
    pub entries: Vec<f64>,
}

impl MomentMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * (self.order + 1) + j]
    }
}

/// Raw kernel moment `∫ u^m K(u) du` for a one-dimensional kernel.
pub fn kernel_moment(kind: KernelKind, m: usize) -> Result<f64> {
    if m % 2 == 1 {
        return Ok(0.0);
    }
    match kind {
        KernelKind::Gaussian => {
            // even moments of the standard normal: (m-1)!!
            let mut v = 1.0;
            let mut k = m as i64 - 1;
            while k > 1 {
                v *= k as f64;
                k -= 2;
            }
            Ok(v)
        }
        _ => {
            let r = kind.support_radius();
            quad::integrate(|u| u.powi(m as i32) * kind.profile(u), -r, r, 1e-10)
        }
    }
}

/// Moment matrix `Omega_k` of a one-dimensional kernel, order 1 or 3.
pub fn moment_matrix(spec: KernelSpec, order: usize) -> Result<MomentMatrix> {
    if spec.dim != 1 {
        return Err(Error::DimensionMismatch(
            "moment matrices are defined for one-dimensional kernels".into(),
        ));
    }
    if order != 1 && order != 3 {
        return Err(Error::InvalidConfig(format!(
            "moment matrix order must be 1 or 3, got {order}"
        )));
    }
    let n = order + 1;
    let mut moments = Vec::with_capacity(2 * order + 1);
    for m in 0..=(2 * order) {
        moments.push(kernel_moment(spec.kind, m)?);
    }
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            entries[i * n + j] = moments[i + j];
        }
    }
    Ok(MomentMatrix { order, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rngstream::{stream_rng, Domain};
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    #[test]
    fn gaussian_eval_values() {
        let k1 = KernelSpec::gaussian(1);
        assert_abs_diff_eq!(k1.eval(&[0.0]), 0.3989422804014327, epsilon = 1e-7);
        assert_eq!(k1.eval(&[1.0]), k1.eval(&[-1.0]));
        let k2 = KernelSpec::gaussian(2);
        assert_abs_diff_eq!(k2.eval(&[0.0, 0.0]), 0.15915494309189535, epsilon = 1e-7);
    }

    #[test]
    fn gaussian_laplacian_values() {
        let k1 = KernelSpec::gaussian(1);
        assert_abs_diff_eq!(k1.laplacian(&[0.0]), -0.3989422804014327, epsilon = 1e-7);
        assert_abs_diff_eq!(k1.laplacian(&[1.0]), 0.0, epsilon = 1e-15);
        let k2 = KernelSpec::gaussian(2);
        assert_abs_diff_eq!(
            k2.laplacian(&[0.0, 0.0]),
            -std::f64::consts::FRAC_1_PI,
            epsilon = 1e-7
        );
    }

    #[test]
    fn second_moments() {
        assert_eq!(KernelSpec::gaussian(1).second_moment().unwrap(), 1.0);
        let ck = KernelSpec::biweight(1).second_moment().unwrap();
        assert_abs_diff_eq!(ck, 1.0 / 7.0, epsilon = 1e-10);
        assert!(KernelSpec::biweight(2).second_moment().unwrap() > 0.0);
    }

    #[test]
    fn debiased_kernel_values() {
        let dk = DebiasedKernel::new(KernelSpec::gaussian(1), 1.0).unwrap();
        // lap K(0) = -K(0), so M_1(0) = 1.5 * phi(0)
        assert_abs_diff_eq!(dk.eval(&[0.0]), 0.5984134206021491, epsilon = 1e-7);
        // lap K(1) = 0, so M_1(1) = phi(1)
        assert_abs_diff_eq!(dk.eval(&[1.0]), 0.24197072451914337, epsilon = 1e-7);
        let dk2 = DebiasedKernel::new(KernelSpec::gaussian(2), 1.0).unwrap();
        assert_abs_diff_eq!(
            dk2.eval(&[0.0, 0.0]),
            std::f64::consts::FRAC_1_PI,
            epsilon = 1e-7
        );
    }

    #[test]
    fn kernels_integrate_to_one() {
        for kind in [KernelKind::Gaussian, KernelKind::Biweight] {
            let k1 = KernelSpec::new(kind, 1).unwrap();
            let r = kind.support_radius();
            let mass = quad::integrate(|u| k1.eval(&[u]), -r, r, 1e-10).unwrap();
            assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-8);

            let k2 = KernelSpec::new(kind, 2).unwrap();
            let mass2 =
                quad::integrate_2d(|x, y| k2.eval(&[x, y]), -r, r, -r, r, 1e-9).unwrap();
            assert_abs_diff_eq!(mass2, 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn debiased_kernel_is_fourth_order_1d() {
        for kind in [KernelKind::Gaussian, KernelKind::Biweight] {
            let dk = DebiasedKernel::new(KernelSpec::new(kind, 1).unwrap(), 1.0).unwrap();
            let r = kind.support_radius();
            let m0 = quad::integrate(|u| dk.eval(&[u]), -r, r, 1e-10).unwrap();
            let m1 = quad::integrate(|u| u * dk.eval(&[u]), -r, r, 1e-10).unwrap();
            let m2 = quad::integrate(|u| u * u * dk.eval(&[u]), -r, r, 1e-10).unwrap();
            assert_abs_diff_eq!(m0, 1.0, epsilon = 1e-8);
            assert_abs_diff_eq!(m1, 0.0, epsilon = 1e-8);
            assert_abs_diff_eq!(m2, 0.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn debiased_kernel_is_fourth_order_2d_gaussian() {
        let dk = DebiasedKernel::new(KernelSpec::gaussian(2), 1.0).unwrap();
        let r = 9.0;
        let m0 = quad::integrate_2d(|x, y| dk.eval(&[x, y]), -r, r, -r, r, 1e-9).unwrap();
        let m1 =
            quad::integrate_2d(|x, y| x * dk.eval(&[x, y]), -r, r, -r, r, 1e-9).unwrap();
        let m2 =
            quad::integrate_2d(|x, y| x * x * dk.eval(&[x, y]), -r, r, -r, r, 1e-9).unwrap();
        assert_abs_diff_eq!(m0, 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(m1, 0.0, epsilon = 1e-8);
        assert_abs_diff_eq!(m2, 0.0, epsilon = 1e-8);
    }

    #[test]
    fn laplacian_matches_finite_differences() {
        let mut rng = stream_rng(7, Domain::Data, 0);
        let step = 1e-4;
        for kind in [KernelKind::Gaussian, KernelKind::Biweight] {
            let k1 = KernelSpec::new(kind, 1).unwrap();
            let k2 = KernelSpec::new(kind, 2).unwrap();
            for _ in 0..100 {
                // keep away from the biweight support kink at |u| = 1
                let x: f64 = rng.random_range(-0.95..0.95);
                let y: f64 = rng.random_range(-0.95..0.95);
                let fd1 = (k1.eval(&[x + step]) - 2.0 * k1.eval(&[x]) + k1.eval(&[x - step]))
                    / (step * step);
                assert_abs_diff_eq!(k1.laplacian(&[x]), fd1, epsilon = 1e-6);

                let fd2 = (k2.eval(&[x + step, y]) - 2.0 * k2.eval(&[x, y])
                    + k2.eval(&[x - step, y]))
                    / (step * step)
                    + (k2.eval(&[x, y + step]) - 2.0 * k2.eval(&[x, y])
                        + k2.eval(&[x, y - step]))
                        / (step * step);
                assert_abs_diff_eq!(k2.laplacian(&[x, y]), fd2, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn gaussian_moment_matrices() {
        let m1 = moment_matrix(KernelSpec::gaussian(1), 1).unwrap();
        assert_eq!(m1.entries, vec![1.0, 0.0, 0.0, 1.0]);

        let m3 = moment_matrix(KernelSpec::gaussian(1), 3).unwrap();
        let expected = [
            1.0, 0.0, 1.0, 0.0, //
            0.0, 1.0, 0.0, 3.0, //
            1.0, 0.0, 3.0, 0.0, //
            0.0, 3.0, 0.0, 15.0,
        ];
        for (a, b) in m3.entries.iter().zip(expected.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn gaussian_order3_matrix_matches_quadrature() {
        let m3 = moment_matrix(KernelSpec::gaussian(1), 3).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let v = quad::integrate(
                    |u| u.powi((i + j) as i32) * crate::normal::std_normal_pdf(u),
                    -10.0,
                    10.0,
                    1e-10,
                )
                .unwrap();
                assert_abs_diff_eq!(m3.get(i, j), v, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn biweight_moment_matrix_is_symmetric_with_zero_odd_entries() {
        let m = moment_matrix(KernelSpec::biweight(1), 3).unwrap();
        assert_abs_diff_eq!(m.get(0, 0), 1.0, epsilon = 1e-8);
        for i in 0..4 {
            for j in 0..4 {
                assert_abs_diff_eq!(m.get(i, j), m.get(j, i), epsilon = 1e-12);
                if (i + j) % 2 == 1 {
                    assert_abs_diff_eq!(m.get(i, j), 0.0, epsilon = 1e-12);
                }
            }
        }
        assert_abs_diff_eq!(m.get(0, 2), 1.0 / 7.0, epsilon = 1e-8);
    }
}
