//! Evaluation grids for the estimators (1-d vectors and 2-d tensor grids).

use crate::error::{Error, Result};
use crate::sample::Sample;

/// Default number of grid points for one-dimensional estimates.
pub const DEFAULT_GRID_1D: usize = 512;
/// Default per-axis resolution for two-dimensional estimates.
pub const DEFAULT_GRID_2D: usize = 128;

/// Evaluation grid. Two-dimensional grids are tensor products stored as the
/// per-axis coordinate vectors; flattened value arrays are indexed
/// `ix * ny + iy`.
#[derive(Debug, Clone, PartialEq)]
pub enum EvalGrid {
    One { xs: Vec<f64> },
    Two { xs: Vec<f64>, ys: Vec<f64> },
}

fn check_axis(coords: &[f64], name: &str) -> Result<()> {
    if coords.len() < 2 {
        return Err(Error::InvalidGrid(format!(
            "{name} axis needs at least 2 points, got {}",
            coords.len()
        )));
    }
    if coords.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidGrid(format!("{name} axis has non-finite values")));
    }
    if coords.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid(format!(
            "{name} axis must be strictly increasing"
        )));
    }
    Ok(())
}

impl EvalGrid {
    pub fn new_1d(xs: Vec<f64>) -> Result<Self> {
        check_axis(&xs, "x")?;
        Ok(EvalGrid::One { xs })
    }

    pub fn new_2d(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        check_axis(&xs, "x")?;
        check_axis(&ys, "y")?;
        Ok(EvalGrid::Two { xs, ys })
    }

    /// Uniform grid of `n` points on [lo, hi].
    pub fn linspace(lo: f64, hi: f64, n: usize) -> Result<Self> {
        Self::new_1d(linspace_vec(lo, hi, n))
    }

    /// Default grid for a sample: the data range extended by `3h` on each
    /// side, 512 points in 1-d or 128 x 128 in 2-d.
    pub fn default_for_sample(sample: &Sample, h: f64) -> Result<Self> {
        match sample.dim() {
            1 => {
                let (lo, hi) = sample.range(0);
                Self::linspace(lo - 3.0 * h, hi + 3.0 * h, DEFAULT_GRID_1D)
            }
            _ => {
                let (xlo, xhi) = sample.range(0);
                let (ylo, yhi) = sample.range(1);
                Self::new_2d(
                    linspace_vec(xlo - 3.0 * h, xhi + 3.0 * h, DEFAULT_GRID_2D),
                    linspace_vec(ylo - 3.0 * h, yhi + 3.0 * h, DEFAULT_GRID_2D),
                )
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            EvalGrid::One { .. } => 1,
            EvalGrid::Two { .. } => 2,
        }
    }

    /// Total number of grid points (product over axes).
    pub fn len(&self) -> usize {
        match self {
            EvalGrid::One { xs } => xs.len(),
            EvalGrid::Two { xs, ys } => xs.len() * ys.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coordinates of the flattened point `idx`.
    pub fn point(&self, idx: usize) -> [f64; 2] {
        match self {
            EvalGrid::One { xs } => [xs[idx], 0.0],
            EvalGrid::Two { xs, ys } => {
                let ny = ys.len();
                [xs[idx / ny], ys[idx % ny]]
            }
        }
    }

    pub fn xs(&self) -> &[f64] {
        match self {
            EvalGrid::One { xs } => xs,
            EvalGrid::Two { xs, .. } => xs,
        }
    }

    pub fn ys(&self) -> Option<&[f64]> {
        match self {
            EvalGrid::One { .. } => None,
            EvalGrid::Two { ys, .. } => Some(ys),
        }
    }

    /// Whether an axis is uniformly spaced (up to 1e-9 relative jitter).
    pub(crate) fn axis_is_uniform(coords: &[f64]) -> bool {
        let step = (coords[coords.len() - 1] - coords[0]) / (coords.len() - 1) as f64;
        coords
            .windows(2)
            .all(|w| ((w[1] - w[0]) - step).abs() <= 1e-9 * step.abs().max(1e-300))
    }
}

pub(crate) fn linspace_vec(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && hi > lo);
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + i as f64 * step })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_axes() {
        assert!(EvalGrid::new_1d(vec![1.0]).is_err());
        assert!(EvalGrid::new_1d(vec![0.0, 0.0, 1.0]).is_err());
        assert!(EvalGrid::new_1d(vec![0.0, f64::NAN]).is_err());
        assert!(EvalGrid::new_2d(vec![0.0, 1.0], vec![2.0, 1.0]).is_err());
    }

    #[test]
    fn flattened_indexing_is_x_major() {
        let g = EvalGrid::new_2d(vec![0.0, 1.0], vec![10.0, 20.0, 30.0]).unwrap();
        assert_eq!(g.len(), 6);
        assert_eq!(g.point(0), [0.0, 10.0]);
        assert_eq!(g.point(2), [0.0, 30.0]);
        assert_eq!(g.point(3), [1.0, 10.0]);
        assert_eq!(g.point(5), [1.0, 30.0]);
    }

    #[test]
    fn linspace_hits_endpoints() {
        let g = EvalGrid::linspace(-1.0, 2.0, 7).unwrap();
        let xs = g.xs();
        assert_eq!(xs[0], -1.0);
        assert_eq!(xs[6], 2.0);
        assert!(EvalGrid::axis_is_uniform(xs));
    }
}
