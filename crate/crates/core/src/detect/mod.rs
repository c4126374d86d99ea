//! The detector families: exhaustive GLRT search, two-phase dyadic binary
//! search, and the oracle detector that is told the candidate region.

mod binary;
mod exhaustive;
mod oracle;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::PowerGrid;
use crate::thresholds::ThresholdTable;

pub use binary::{
    binary_detect, binary_refine, dyadic_search, BinarySearch, DyadicHit, DyadicPyramid,
    LevelRule, RefineStage, RefineUpdate,
};
pub use exhaustive::exhaustive_detect;
pub use oracle::oracle_detect;

pub(crate) use binary::{build_pyramid, refine_counted, search_counted};
pub(crate) use exhaustive::exhaustive_counted;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectorKind {
    Exhaustive,
    Binary,
    Oracle,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 3] = [DetectorKind::Exhaustive, DetectorKind::Binary, DetectorKind::Oracle];

    pub fn name(&self) -> &'static str {
        match self {
            DetectorKind::Exhaustive => "exhaustive",
            DetectorKind::Binary => "binary",
            DetectorKind::Oracle => "oracle",
        }
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DetectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "exhaustive" => Ok(DetectorKind::Exhaustive),
            "binary" => Ok(DetectorKind::Binary),
            "oracle" => Ok(DetectorKind::Oracle),
            other => Err(Error::domain(format!(
                "unknown detector '{other}' (expected exhaustive, binary or oracle)"
            ))),
        }
    }
}

pub(crate) fn check_table(grid: &PowerGrid, table: &ThresholdTable) -> Result<()> {
    if table.n_total() != grid.len() {
        return Err(Error::TableMismatch {
            table: table.n_total(),
            grid: grid.len(),
        });
    }
    Ok(())
}
