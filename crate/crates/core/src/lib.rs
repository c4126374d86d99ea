//! Locating a signal of unknown extent in noise-normalized power
//! measurements with a generalized likelihood ratio test.
//!
//! A [`PowerGrid`] holds exponential power samples (a line or a plane)
//! whose noise-only mean is 1. A [`Region`] is a half-open interval or an
//! axis-aligned box. Three detectors share the score
//! `J(S) = |S| φ(max{X̄_S, 1})`:
//!
//! * [`exhaustive_detect`] tests every region, `O(N²)`;
//! * [`binary_detect`] scans dyadic blocks then refines the edges, `O(N)`;
//! * [`oracle_detect`] tests a single region it is told about.
//!
//! Thresholds come from [`ThresholdTable::calibrate`], which inverts the
//! chi-squared tail so that the union-bounded false-alarm probability hits
//! the target. The [`sim`] module runs seeded Monte Carlo sweeps.
//!
//! ```
//! use specdet::{binary_detect, PowerGrid, Region, ThresholdTable};
//!
//! let mut x = vec![1.0; 64];
//! for v in &mut x[16..32] {
//!     *v = 9.0;
//! }
//! let grid = PowerGrid::line(x)?;
//! let table = ThresholdTable::calibrate(1e-3, 64, [])?;
//! let hit = binary_detect(&grid, &table)?;
//! assert_eq!(hit.region, Region::interval(16, 32));
//! # Ok::<(), specdet::Error>(())
//! ```
//!
//! The `examples/` directory has one runnable program per capability.

pub mod chi2;
pub mod cli;
pub mod detect;
mod error;
pub mod flops;
pub mod glrt;
pub mod grid;
pub mod sim;
pub mod thresholds;

pub use detect::{
    binary_detect, binary_refine, dyadic_search, exhaustive_detect, oracle_detect, BinarySearch,
    DetectorKind, DyadicHit, DyadicPyramid,
};
pub use error::{Error, Result};
pub use flops::{count_flops, FlopCount};
pub use glrt::{iou, likelihood, likelihood_at_gamma, phi, region_mean, snr_mle, Detection, Snr};
pub use grid::{PowerGrid, Region, Shape, Span};
pub use thresholds::{calibrate_oracle, pfa_bound, pmd_bound, Threshold, ThresholdTable};
