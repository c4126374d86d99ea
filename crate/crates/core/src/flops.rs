//! Operation counting for the complexity comparison.
//!
//! Detectors are generic over a [`Tally`]; the production path passes `()`
//! and the counting compiles away. Additions, multiplications, divisions,
//! comparisons and logarithms count one each. Threshold lookups are free:
//! tables are computed before detection starts.

use serde::Serialize;

use crate::detect::{self, DetectorKind};
use crate::error::{Error, Result};
use crate::grid::PowerGrid;
use crate::thresholds::ThresholdTable;

pub trait Tally {
    fn tick(&mut self, n: u64);
}

impl Tally for () {
    #[inline(always)]
    fn tick(&mut self, _: u64) {}
}

impl Tally for u64 {
    #[inline(always)]
    fn tick(&mut self, n: u64) {
        *self += n;
    }
}

/// Counted operations per phase.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct FlopCount {
    /// Pyramid construction and the dyadic threshold scan.
    pub dyadic_search: u64,
    /// Boundary refinement (zero if phase one detected nothing).
    pub refine: u64,
    pub exhaustive: u64,
}

impl FlopCount {
    pub fn total(&self) -> u64 {
        self.dyadic_search + self.refine + self.exhaustive
    }
}

/// Runs an instrumented detector once and reports its operation count.
pub fn count_flops(detector: DetectorKind, grid: &PowerGrid, table: &ThresholdTable) -> Result<FlopCount> {
    detect::check_table(grid, table)?;
    let mut count = FlopCount::default();
    match detector {
        DetectorKind::Exhaustive => {
            detect::exhaustive_counted(grid, table, &mut count.exhaustive)?;
        }
        DetectorKind::Binary => {
            let pyramid = detect::build_pyramid(grid, &mut count.dyadic_search)?;
            let hit = detect::search_counted(
                &pyramid,
                table,
                detect::LevelRule::default(),
                &mut count.dyadic_search,
            )?;
            if hit.decided {
                detect::refine_counted(&pyramid, grid, &mut count.refine)?;
            }
        }
        DetectorKind::Oracle => {
            return Err(Error::domain("operation counts are defined for the exhaustive and binary detectors"));
        }
    }
    Ok(count)
}
