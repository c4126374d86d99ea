use rayon::prelude::*;

use crate::detect::{BinarySearch, DyadicPyramid};
use crate::error::{Error, Result};
use crate::glrt::iou;
use crate::grid::{Region, Shape};

use super::rng::{mix, trial_seed};
use super::trial::{gen_trial, TrialConfig};

/// Mean IoU of the binary-search estimate against a signal occupying the
/// fixed fraction `[⌊α₀N⌋, ⌊β₀N⌋)` of the grid, for each `N` in `n_list`.
///
/// Refinement runs whether or not the dyadic scan would have detected, so
/// the probe measures localisation alone.
pub fn consistency_probe(
    gamma_db: f64,
    alpha0: f64,
    beta0: f64,
    n_list: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<(usize, f64)>> {
    if !(0.0 < alpha0 && alpha0 < beta0 && beta0 < 1.0) {
        return Err(Error::domain(format!(
            "need 0 < alpha0 < beta0 < 1, got ({alpha0}, {beta0})"
        )));
    }
    if trials == 0 {
        return Err(Error::domain("trials must be at least 1"));
    }
    if !gamma_db.is_finite() {
        return Err(Error::domain(format!("invalid SNR {gamma_db} dB")));
    }
    let search = BinarySearch::default();
    n_list
        .iter()
        .map(|&n| {
            if !n.is_power_of_two() {
                return Err(Error::NotPowerOfTwo(n.to_string()));
            }
            let a = (alpha0 * n as f64).floor() as usize;
            let b = (beta0 * n as f64).floor() as usize;
            if a >= b {
                return Err(Error::domain(format!("signal is empty at N = {n}")));
            }
            let truth = Region::interval(a, b);
            let key = mix([n as u64, alpha0.to_bits(), beta0.to_bits(), gamma_db.to_bits()]);
            let ious: Vec<f64> = (0..trials as u64)
                .into_par_iter()
                .map(|t| {
                    let cfg = TrialConfig::signal(Shape::Line(n), truth, gamma_db, trial_seed(seed, key, t));
                    let grid = gen_trial(&cfg)?;
                    let pyramid = DyadicPyramid::new(&grid)?;
                    Ok(iou(&search.refine_unconditioned(&pyramid, &grid)?, &truth))
                })
                .collect::<Result<_>>()?;
            Ok((n, ious.iter().sum::<f64>() / trials as f64))
        })
        .collect()
}
