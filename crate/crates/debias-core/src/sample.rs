//! Observation containers: plain samples and covariate-response pairs.

use crate::error::{Error, Result};

/// An i.i.d. sample of d-dimensional points, d in {1, 2}, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    dim: usize,
    data: Vec<f64>,
}

impl Sample {
    pub fn from_1d(points: Vec<f64>) -> Result<Self> {
        Self::new(1, points)
    }

    pub fn from_2d(points: Vec<[f64; 2]>) -> Result<Self> {
        let data = points.iter().flat_map(|p| p.iter().copied()).collect();
        Self::new(2, data)
    }

    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::DimensionMismatch(format!(
                "sample dimension must be 1 or 2, got {dim}"
            )));
        }
        if !data.len().is_multiple_of(dim) {
            return Err(Error::InvalidSample(format!(
                "data length {} is not a multiple of dimension {dim}",
                data.len()
            )));
        }
        let n = data.len() / dim;
        if n < 2 {
            return Err(Error::InvalidSample(format!(
                "need at least 2 observations, got {n}"
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSample("non-finite observation".into()));
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Observation `i` as a fixed-size point (second coordinate 0 in 1-d).
    #[inline]
    pub fn point(&self, i: usize) -> [f64; 2] {
        match self.dim {
            1 => [self.data[i], 0.0],
            _ => [self.data[2 * i], self.data[2 * i + 1]],
        }
    }

    /// Coordinate `axis` of every observation.
    pub fn axis(&self, axis: usize) -> impl Iterator<Item = f64> + '_ {
        debug_assert!(axis < self.dim);
        self.data.iter().copied().skip(axis).step_by(self.dim)
    }

    pub fn range(&self, axis: usize) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in self.axis(axis) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }

    /// New sample with rows taken from `indices` (bootstrap resampling).
    pub fn select(&self, indices: &[usize]) -> Sample {
        let mut data = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            data.extend_from_slice(&self.data[i * self.dim..(i + 1) * self.dim]);
        }
        Sample {
            dim: self.dim,
            data,
        }
    }

    pub fn raw(&self) -> &[f64] {
        &self.data
    }
}

/// Covariate-response pairs for regression (1-d covariate).
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSample {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl PairedSample {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::InvalidSample(format!(
                "covariate and response lengths differ: {} vs {}",
                x.len(),
                y.len()
            )));
        }
        if x.len() < 5 {
            return Err(Error::InvalidSample(format!(
                "need at least 5 pairs, got {}",
                x.len()
            )));
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidSample("non-finite observation".into()));
        }
        // degree-3 designs need at least 4 distinct covariate values
        let mut xs = x.clone();
        xs.sort_unstable_by(f64::total_cmp);
        xs.dedup();
        if xs.len() < 4 {
            return Err(Error::InvalidSample(format!(
                "need at least 4 distinct covariate values, got {}",
                xs.len()
            )));
        }
        Ok(Self { x, y })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn x_range(&self) -> (f64, f64) {
        let lo = self.x.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    /// Joint (paired) row selection for the paired bootstrap; skips the
    /// constructor checks since resampled rows may repeat a single x.
    pub fn select(&self, indices: &[usize]) -> PairedSample {
        PairedSample {
            x: indices.iter().map(|&i| self.x[i]).collect(),
            y: indices.iter().map(|&i| self.y[i]).collect(),
        }
    }
}
