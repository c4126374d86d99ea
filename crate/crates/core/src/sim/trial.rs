use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::glrt::Snr;
use crate::grid::{PowerGrid, Region, Shape};

/// How measured powers are rescaled by a noise estimate `σ̂²`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseNormalization {
    /// `X / σ̂²`: divide powers by the estimated noise power.
    #[default]
    Power,
    /// `X / σ̂`: divide by its square root, as for amplitude samples.
    Amplitude,
}

/// Everything needed to draw one grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub shape: Shape,
    /// Signal support; `None` draws noise only.
    pub true_region: Option<Region>,
    pub gamma_db: f64,
    pub seed: u64,
    /// Number of noise-only reference samples used to estimate the noise
    /// power. `None` means the noise power is known exactly.
    pub noise_ref: Option<usize>,
    #[serde(default)]
    pub normalization: NoiseNormalization,
}

impl TrialConfig {
    pub fn noise(shape: Shape, seed: u64) -> Self {
        TrialConfig {
            shape,
            true_region: None,
            gamma_db: f64::NEG_INFINITY,
            seed,
            noise_ref: None,
            normalization: NoiseNormalization::Power,
        }
    }

    pub fn signal(shape: Shape, region: Region, gamma_db: f64, seed: u64) -> Self {
        TrialConfig {
            true_region: Some(region),
            gamma_db,
            ..Self::noise(shape, seed)
        }
    }

    pub fn with_noise_ref(mut self, n_ref: usize, normalization: NoiseNormalization) -> Self {
        self.noise_ref = Some(n_ref);
        self.normalization = normalization;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.shape.is_empty() {
            return Err(Error::domain("grid must have at least one bin"));
        }
        if let Some(region) = &self.true_region {
            if region.is_empty() {
                return Err(Error::EmptyRegion);
            }
            if !self.shape.contains(region) {
                return Err(Error::OutOfBounds {
                    region: region.to_string(),
                    shape: self.shape.to_string(),
                });
            }
            if self.gamma_db.is_nan() || self.gamma_db == f64::INFINITY {
                return Err(Error::domain(format!("invalid SNR {} dB", self.gamma_db)));
            }
        }
        if self.noise_ref == Some(0) {
            return Err(Error::domain("noise reference needs at least one sample"));
        }
        Ok(())
    }
}

/// Unit-mean exponential by inversion of a uniform draw on the open
/// interval, so the logarithm never sees zero.
#[inline]
pub fn exponential<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u: f64 = rng.sample(Open01);
    -u.ln()
}

/// Draws a grid of independent exponential powers with mean `1 + γ` on the
/// true region and 1 elsewhere. Deterministic in `cfg.seed`.
///
/// With a noise reference of `N_ref` samples, `N_ref` further unit-mean
/// exponentials estimate the noise power `σ̂²` and the grid is divided by
/// it (or by `σ̂`, see [`NoiseNormalization`]).
pub fn gen_trial(cfg: &TrialConfig) -> Result<PowerGrid> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut values: Vec<f64> = (0..cfg.shape.len()).map(|_| exponential(&mut rng)).collect();

    if let Some(region) = &cfg.true_region {
        let mu = 1.0 + Snr::from_db(cfg.gamma_db).linear();
        let scale = |v: &mut f64| *v *= mu;
        match (cfg.shape, region) {
            (Shape::Line(_), Region::Interval(s)) => values[s.start..s.end].iter_mut().for_each(scale),
            (Shape::Plane(_, cols), Region::Rect { rows, cols: c }) => {
                for r in rows.start..rows.end {
                    values[r * cols + c.start..r * cols + c.end].iter_mut().for_each(scale);
                }
            }
            _ => unreachable!("validated above"),
        }
    }

    if let Some(n_ref) = cfg.noise_ref {
        let sigma2 = (0..n_ref).map(|_| exponential(&mut rng)).sum::<f64>() / n_ref as f64;
        let div = match cfg.normalization {
            NoiseNormalization::Power => sigma2,
            NoiseNormalization::Amplitude => sigma2.sqrt(),
        };
        values.iter_mut().for_each(|v| *v /= div);
    }
    PowerGrid::new(cfg.shape, values)
}

/// A `size`-long interval (or `size x size` square) placed uniformly at
/// random among all positions that fit.
pub fn random_placement<R: Rng + ?Sized>(shape: Shape, size: usize, rng: &mut R) -> Result<Region> {
    let fits = |n: usize| size >= 1 && size <= n;
    match shape {
        Shape::Line(n) if fits(n) => {
            let a = rng.random_range(0..=n - size);
            Ok(Region::interval(a, a + size))
        }
        Shape::Plane(r, c) if fits(r) && fits(c) => {
            let a1 = rng.random_range(0..=r - size);
            let a2 = rng.random_range(0..=c - size);
            Ok(Region::rect(a1, a1 + size, a2, a2 + size))
        }
        _ => Err(Error::domain(format!(
            "signal size {size} does not fit a grid of shape {shape}"
        ))),
    }
}
