use crate::error::{Error, Result};
use crate::glrt::{score, snr_mle, Detection};
use crate::grid::{PowerGrid, Region};

/// Single-hypothesis detector that is told the candidate region `s0`.
///
/// Decides when `max{X̄_{s0}, 1} ≥ u0`, with `u0` typically from
/// [`calibrate_oracle`](crate::thresholds::calibrate_oracle). The SNR
/// estimate is reported whether or not it decides.
pub fn oracle_detect(grid: &PowerGrid, s0: &Region, u0: f64) -> Result<Detection> {
    if s0.is_empty() {
        return Err(Error::EmptyRegion);
    }
    if u0.is_nan() {
        return Err(Error::domain("oracle threshold is NaN"));
    }
    let mean = grid.region_mean(s0)?;
    let decided = mean.max(1.0) >= u0;
    Ok(Detection {
        decided,
        region: if decided { *s0 } else { Region::Empty },
        snr_hat: snr_mle(mean),
        score: if decided { score(s0.cardinality(), mean) } else { 0.0 },
    })
}
