//! Seeded Monte Carlo harness: trial generation, experiment sweeps and the
//! consistency probe.

mod consistency;
mod rng;
mod sweep;
mod trial;

pub use consistency::consistency_probe;
pub use rng::{mix, splitmix64, trial_seed};
pub use sweep::{
    binomial_se, run_sweep, Cell, CellResult, Hypothesis, Sweep, SweepResult, TrialOutcome, CSV_HEADER,
};
pub use trial::{exponential, gen_trial, random_placement, NoiseNormalization, TrialConfig};
