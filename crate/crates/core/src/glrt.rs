//! Likelihood primitives shared by every detector.
//!
//! For exponential powers with unit noise mean, the log-likelihood ratio of
//! "region `S` carries SNR `γ`" against "noise only" depends on the data only
//! through the region mean `X̄_S`. Maximising over `γ ≥ 0` leaves
//! `J(S) = |S| φ(max{X̄_S, 1})` with `φ(x) = x − 1 − ln x`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{PowerGrid, Region};

/// Linear signal-to-noise power ratio.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
pub struct Snr(f64);

impl Snr {
    pub const ZERO: Snr = Snr(0.0);

    pub fn from_linear(gamma: f64) -> Result<Self> {
        if gamma.is_nan() || gamma < 0.0 {
            return Err(Error::domain(format!("SNR must be nonnegative, got {gamma}")));
        }
        Ok(Snr(gamma))
    }

    pub fn from_db(db: f64) -> Self {
        Snr(10f64.powf(db / 10.0))
    }

    pub fn linear(self) -> f64 {
        self.0
    }

    /// `10 log10 γ`; `-inf` for a zero SNR.
    pub fn db(self) -> f64 {
        10.0 * self.0.log10()
    }
}

/// `x − 1 − ln x` for any `x > 0`, accurate near `x = 1` where the three
/// terms cancel.
#[inline]
pub(crate) fn phi_unchecked(x: f64) -> f64 {
    let d = x - 1.0;
    if d.abs() < 0.1 {
        // d - ln(1 + d) = d^2/2 - d^3/3 + d^4/4 - ...
        let mut sum = 0.0;
        let mut pow = d * d;
        for k in 2..24 {
            sum += pow / k as f64;
            pow *= -d;
        }
        sum
    } else {
        d - d.ln_1p()
    }
}

/// GLRT score kernel `φ(x) = x − 1 − ln x` on `x ≥ 1`.
pub fn phi(x: f64) -> Result<f64> {
    if x.is_nan() || x < 1.0 {
        return Err(Error::domain(format!("phi is defined for x >= 1, got {x}")));
    }
    Ok(phi_unchecked(x))
}

/// `J` for a region of `cardinality` bins with mean power `mean`.
#[inline]
pub(crate) fn score(cardinality: usize, mean: f64) -> f64 {
    cardinality as f64 * phi_unchecked(mean.max(1.0))
}

/// Mean power `X̄_S` over `region`.
pub fn region_mean(grid: &PowerGrid, region: &Region) -> Result<f64> {
    grid.region_mean(region)
}

/// SNR-maximised log-likelihood ratio `J(S) = |S| φ(max{X̄_S, 1})`.
///
/// An empty region scores zero so that "no region" needs no special case.
pub fn likelihood(grid: &PowerGrid, region: &Region) -> Result<f64> {
    if region.is_empty() {
        return Ok(0.0);
    }
    let mean = grid.region_mean(region)?;
    Ok(score(region.cardinality(), mean))
}

/// Log-likelihood ratio at a fixed SNR: `|S| [X̄_S γ/(1+γ) − ln(1+γ)]`.
pub fn likelihood_at_gamma(grid: &PowerGrid, region: &Region, gamma: Snr) -> Result<f64> {
    let mean = grid.region_mean(region)?;
    let g = gamma.linear();
    Ok(region.cardinality() as f64 * (mean * g / (1.0 + g) - g.ln_1p()))
}

/// Maximum-likelihood SNR for a region with mean power `mean`.
pub fn snr_mle(mean: f64) -> Snr {
    Snr((mean - 1.0).max(0.0))
}

/// Intersection over union. Two empty regions agree perfectly; an empty
/// region against a nonempty one scores zero.
pub fn iou(a: &Region, b: &Region) -> f64 {
    let (na, nb) = (a.cardinality(), b.cardinality());
    match (na, nb) {
        (0, 0) => 1.0,
        (0, _) | (_, 0) => 0.0,
        _ => {
            let inter = a.intersection(b);
            inter as f64 / (na + nb - inter) as f64
        }
    }
}

/// Outcome of a single detector invocation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub decided: bool,
    /// Estimated signal region; `Empty` when nothing was detected.
    pub region: Region,
    pub snr_hat: Snr,
    /// Achieved likelihood `J` of `region`.
    pub score: f64,
}

impl Detection {
    pub fn none() -> Self {
        Detection {
            decided: false,
            region: Region::Empty,
            snr_hat: Snr::ZERO,
            score: 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn phi_values() {
        assert_eq!(phi(1.0).unwrap(), 0.0);
        assert!((phi(2.0).unwrap() - (1.0 - 2f64.ln())).abs() < 1e-15);
        assert!((phi(std::f64::consts::E).unwrap() - (std::f64::consts::E - 2.0)).abs() < 1e-15);
        assert!((phi(2.0).unwrap() - 0.30685).abs() < 1e-5);
        assert!(phi(0.999).is_err());
    }

    #[test]
    fn phi_series_matches_direct_form_at_the_switch() {
        for &x in &[0.9, 0.9000001, 1.0999999, 1.1, 1.05, 0.95] {
            let direct = (x - 1.0) - f64::ln(x);
            assert!(close(phi_unchecked(x), direct, 1e-12), "x = {x}");
        }
        // near 1 the direct form is useless, the series is ~ d^2/2
        let d = 1e-6;
        assert!(close(phi_unchecked(1.0 + d), d * d / 2.0 - d * d * d / 3.0, 1e-9));
    }

    #[test]
    fn likelihood_examples() {
        let g = PowerGrid::line(vec![0.1, 5.0, 5.0, 0.1]).unwrap();
        let j = likelihood(&g, &Region::interval(1, 3)).unwrap();
        assert!((j - 2.0 * (4.0 - 5f64.ln())).abs() < 1e-12);
        assert!((j - 4.78112).abs() < 1e-5);
        // mean below the noise floor scores zero
        assert_eq!(likelihood(&g, &Region::interval(0, 1)).unwrap(), 0.0);
        let g = PowerGrid::line(vec![0.1, 0.1, 8.0, 8.0]).unwrap();
        let j = likelihood(&g, &Region::interval(0, 4)).unwrap();
        assert!((j - 6.60513).abs() < 1e-5);
        assert_eq!(likelihood(&g, &Region::Empty).unwrap(), 0.0);
        assert!(likelihood(&g, &Region::interval(0, 5)).is_err());
    }

    #[test]
    fn likelihood_at_gamma_examples() {
        let g = PowerGrid::line(vec![0.1, 5.0, 5.0, 0.1]).unwrap();
        let s = Region::interval(1, 3);
        assert_eq!(likelihood_at_gamma(&g, &s, Snr::ZERO).unwrap(), 0.0);
        let j = likelihood_at_gamma(&g, &s, Snr::from_linear(4.0).unwrap()).unwrap();
        assert!((j - 4.78112).abs() < 1e-5);
        let g = PowerGrid::line(vec![1.0; 3]).unwrap();
        let j = likelihood_at_gamma(&g, &Region::interval(0, 3), Snr::from_linear(1.0).unwrap())
            .unwrap();
        assert!((j - 3.0 * (0.5 - 2f64.ln())).abs() < 1e-15);
        assert!((j + 0.57944).abs() < 1e-5);
    }

    #[test]
    fn snr_mle_and_conversion() {
        assert_eq!(snr_mle(5.0).linear(), 4.0);
        assert_eq!(snr_mle(1.0).linear(), 0.0);
        assert_eq!(snr_mle(0.3).linear(), 0.0);
        assert!((Snr::from_db(10.0).linear() - 10.0).abs() < 1e-12);
        assert!(Snr::from_linear(-1.0).is_err());
        assert_eq!(Snr::ZERO.db(), f64::NEG_INFINITY);
    }

    #[test]
    fn iou_examples() {
        let r = Region::interval;
        assert_eq!(iou(&r(2, 4), &r(2, 4)), 1.0);
        assert_eq!(iou(&r(0, 4), &r(2, 4)), 0.5);
        assert_eq!(iou(&r(0, 2), &r(2, 4)), 0.0);
        assert_eq!(iou(&Region::Empty, &Region::Empty), 1.0);
        assert_eq!(iou(&Region::Empty, &r(0, 1)), 0.0);
        let a = Region::rect(0, 2, 0, 2);
        let b = Region::rect(1, 3, 1, 3);
        assert!((iou(&a, &b) - 1.0 / 7.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn phi_is_strictly_increasing(x in 1.0f64..1e6, dx in 1e-6f64..10.0) {
            prop_assert!(phi(x).unwrap() < phi(x + dx).unwrap());
        }

        #[test]
        fn snr_db_round_trip(g in 1e-9f64..1e9) {
            let back = Snr::from_db(Snr::from_linear(g).unwrap().db()).linear();
            prop_assert!(close(back, g, 1e-12));
        }

        #[test]
        fn mle_attains_the_maximum(
            values in prop::collection::vec(0.0f64..20.0, 1..32),
            gammas in prop::collection::vec(0.0f64..50.0, 100),
        ) {
            let n = values.len();
            let g = PowerGrid::line(values).unwrap();
            let s = Region::interval(0, n);
            let best = likelihood(&g, &s).unwrap();
            let mean = g.region_mean(&s).unwrap();
            if mean >= 1.0 {
                let at_mle = likelihood_at_gamma(&g, &s, snr_mle(mean)).unwrap();
                prop_assert!((at_mle - best).abs() <= 1e-12 * best.max(1e-3), "{at_mle} vs {best}");
            }
            for gamma in gammas {
                let j = likelihood_at_gamma(&g, &s, Snr::from_linear(gamma).unwrap()).unwrap();
                prop_assert!(j <= best + 1e-12 * best.abs().max(1.0));
            }
        }

        #[test]
        fn iou_symmetric_and_bounded(a in 0usize..20, la in 0usize..10, b in 0usize..20, lb in 0usize..10) {
            let (x, y) = (Region::interval(a, a + la), Region::interval(b, b + lb));
            let v = iou(&x, &y);
            prop_assert_eq!(v, iou(&y, &x));
            prop_assert!((0.0..=1.0).contains(&v));
            if la > 0 { prop_assert_eq!(iou(&x, &x), 1.0); }
        }
    }
}
