//! Debiased nonparametric estimators and bootstrap confidence bands/sets.
//!
//! The crate implements two debiased estimators — a kernel density estimator
//! corrected by an explicit second-derivative term, and a local linear
//! smoother corrected by a third-order local polynomial curvature estimate —
//! together with the empirical-bootstrap machinery that turns them into
//! simultaneous confidence bands (sup metric) and confidence sets for density
//! level sets and inverse regression (Hausdorff metric).
//!
//! Layout:
//!
//! * [`kernel`] — kernel functions, Laplacians, the debiased kernel, moment
//!   matrices.
//! * [`density`] / [`regression`] — the estimators on evaluation grids.
//! * [`bandwidth`] — rule-of-thumb and cross-validation selectors.
//! * [`bootstrap`] — resampling, sup/Hausdorff statistics, quantiles, and the
//!   band/set constructors.
//! * [`geometry`] — level-set extraction, Hausdorff distance, dilation.
//! * [`simulation`] — synthetic data generators and the Monte-Carlo coverage
//!   harness.
//!
//! All estimation routines are deterministic given `(data, config, seed)`:
//! every random stream is derived from the seed and a task index, never from
//! thread scheduling.

// `!(x > 0.0)` is the NaN-rejecting form of the positivity checks; moment
// and gram loops index by the power `j + l`, which a zipped iterator would
// only obscure.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod bandwidth;
pub mod bootstrap;
pub mod density;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod kernel;
pub mod normal;
pub mod quad;
pub mod regression;
pub mod rngstream;
pub mod sample;
pub mod simulation;

pub use bandwidth::{BandwidthChoice, BandwidthMethod};
pub use bootstrap::{
    BootstrapConfig, BootstrapMetric, ConfidenceBand, ConfidenceBandKind, EstimatorChoice,
    QuantileEstimate, RegionSet,
};
pub use density::DensityEstimate;
pub use error::{Error, Result};
pub use geometry::PointSet;
pub use grid::EvalGrid;
pub use kernel::{DebiasedKernel, KernelKind, KernelSpec, MomentMatrix};
pub use regression::RegressionEstimate;
pub use sample::{PairedSample, Sample};
pub use simulation::{BandwidthRule, CoverageReport, EstimatorKind, Scenario, ScenarioKind};
