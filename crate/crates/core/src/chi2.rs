//! Complementary CDF of the chi-squared law with an even number of degrees
//! of freedom, and its inverse.
//!
//! `F(s; ν) = Q(ν/2, s/2)` where `Q` is the upper regularized incomplete
//! gamma function. Everything is evaluated in log space: the calibration
//! recipe asks for quantiles at tail probabilities around `1e-12` with
//! thousands of degrees of freedom.

use crate::error::{Error, Result};
use crate::glrt::phi_unchecked;

/// Degrees of freedom `ν`, a positive even integer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ChiSqParams {
    nu: u32,
}

impl ChiSqParams {
    pub fn new(nu: u32) -> Result<Self> {
        if nu < 2 || nu % 2 != 0 {
            return Err(Error::domain(format!(
                "degrees of freedom must be a positive even integer, got {nu}"
            )));
        }
        Ok(ChiSqParams { nu })
    }

    /// `ν = 2ℓ`, the law of `2ℓ X̄_S` under noise only.
    pub fn for_cardinality(ell: usize) -> Result<Self> {
        u32::try_from(ell)
            .ok()
            .and_then(|l| l.checked_mul(2))
            .ok_or_else(|| Error::domain(format!("cardinality {ell} out of range")))
            .and_then(Self::new)
    }

    pub fn nu(&self) -> u32 {
        self.nu
    }

    fn shape(&self) -> u32 {
        self.nu / 2
    }
}

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// `ln Γ(a) − [(a − ½) ln a − a + ½ ln 2π]`, the Stirling remainder.
fn stirling_remainder(a: f64) -> f64 {
    let r = 1.0 / a;
    let r2 = r * r;
    r * (1.0 / 12.0
        - r2 * (1.0 / 360.0
            - r2 * (1.0 / 1260.0
                - r2 * (1.0 / 1680.0 - r2 * (1.0 / 1188.0 - r2 * (691.0 / 360_360.0))))))
}

/// `ln(x^a e^{−x} / Γ(a))` for integer `a ≥ 1`, `x > 0`.
///
/// For large `a` the exponent is a difference of numbers in the thousands;
/// rewriting it as `−a φ(x/a) + ½ ln(a/2π) − remainder(a)` keeps the
/// absolute error proportional to the result instead.
fn ln_prefactor(a: u32, x: f64) -> f64 {
    if a < 10 {
        let fact: f64 = (1..a).map(f64::from).product();
        f64::from(a) * x.ln() - x - fact.ln()
    } else {
        let af = f64::from(a);
        -af * phi_unchecked(x / af) + 0.5 * (af.ln() - LN_2PI) - stirling_remainder(af)
    }
}

/// `ln Q(a, x)` for integer `a ≥ 1`, `x ≥ 0`.
fn ln_upper_gamma(a: u32, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return f64::NEG_INFINITY;
    }
    let af = f64::from(a);
    let pre = ln_prefactor(a, x);
    if x < af + 1.0 {
        // P(a, x) = pre * sum_n x^n / (a (a+1) ... (a+n))
        let mut ap = af;
        let mut term = 1.0 / af;
        let mut sum = term;
        for _ in 0..100_000 {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term < sum * 1e-17 {
                break;
            }
        }
        (-(pre.exp() * sum)).ln_1p()
    } else {
        // Modified Lentz evaluation of the continued fraction for Q.
        const TINY: f64 = 1e-300;
        let mut b = x + 1.0 - af;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..100_000 {
            let an = -(i as f64) * (i as f64 - af);
            b += 2.0;
            d = an * d + b;
            if d.abs() < TINY {
                d = TINY;
            }
            c = b + an / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        pre + h.ln()
    }
}

fn check_s(s: f64) -> Result<()> {
    if s.is_nan() || s < 0.0 {
        return Err(Error::domain(format!(
            "chi-squared argument must be nonnegative, got {s}"
        )));
    }
    Ok(())
}

/// Natural log of `P(Z_ν ≥ s)`.
pub fn ln_ccdf(s: f64, params: ChiSqParams) -> Result<f64> {
    check_s(s)?;
    Ok(ln_upper_gamma(params.shape(), 0.5 * s))
}

/// `P(Z_ν ≥ s)` for a chi-squared variable with `ν` degrees of freedom.
pub fn ccdf(s: f64, params: ChiSqParams) -> Result<f64> {
    Ok(ln_ccdf(s, params)?.exp())
}

/// The `s ≥ 0` with `P(Z_ν ≥ s) = q`, for `0 < q ≤ 1`.
///
/// Bracketed Newton iteration on `ln F(s) − ln q`: the bracket is grown
/// geometrically, any Newton step that leaves it is replaced by bisection.
pub fn inv_ccdf(q: f64, params: ChiSqParams) -> Result<f64> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::domain(format!(
            "tail probability must be in (0, 1], got {q}"
        )));
    }
    if q == 1.0 {
        return Ok(0.0);
    }
    let a = params.shape();
    let target = q.ln();
    // Work on x = s/2; f is strictly decreasing with f(0) = -ln q > 0.
    let f = |x: f64| ln_upper_gamma(a, x) - target;

    let mut lo = 0.0;
    let mut hi = f64::from(a).max(1.0);
    while f(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
    }

    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let fx = f(x);
        if fx == 0.0 {
            break;
        }
        if fx > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        // d/dx ln Q = -density / Q = -exp(ln_prefactor - ln Q) / x
        let slope = -(ln_prefactor(a, x) - (fx + target)).exp() / x;
        let mut next = x - fx / slope;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        let done = (next - x).abs() <= 1e-15 * x || hi - lo <= 1e-15 * hi;
        x = next;
        if done {
            break;
        }
    }
    Ok(2.0 * x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(nu: u32) -> ChiSqParams {
        ChiSqParams::new(nu).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    /// Poisson-sum closed form `Q(k, x) = e^{-x} Σ_{j<k} x^j / j!`, summed
    /// in log space; independent of the series/continued-fraction split.
    /// Returns the value and the magnitude of the log-terms it had to
    /// cancel, which bounds the oracle's own rounding.
    fn poisson_tail(nu: u32, s: f64) -> (f64, f64) {
        let x = s / 2.0;
        let k = nu / 2;
        // compensated running ln(j!)
        let (mut lf, mut comp) = (0.0f64, 0.0f64);
        let mut log_terms = Vec::with_capacity(k as usize);
        let mut scale = x;
        for j in 0..k {
            if j > 0 {
                let y = f64::from(j).ln() - comp;
                let t = lf + y;
                comp = (t - lf) - y;
                lf = t;
            }
            let lt = f64::from(j) * x.ln() - lf - x;
            scale = scale.max(f64::from(j) * x.ln().abs() + lf);
            log_terms.push(lt);
        }
        let m = log_terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = log_terms.iter().map(|t| (t - m).exp()).sum();
        ((m + sum.ln()).exp(), scale)
    }

    #[test]
    fn closed_forms_nu_2_and_4() {
        assert!(rel(ccdf(2.0, p(2)).unwrap(), (-1f64).exp()) < 1e-15);
        assert!((ccdf(2.0, p(2)).unwrap() - 0.3678794).abs() < 1e-7);
        assert_eq!(ccdf(0.0, p(2)).unwrap(), 1.0);
        assert_eq!(ccdf(0.0, p(64)).unwrap(), 1.0);
        assert!((ccdf(2.0, p(4)).unwrap() - 0.7357589).abs() < 1e-7);
        for i in 1..400 {
            let s = i as f64 * 0.25;
            let e2 = (-s / 2.0).exp();
            let e4 = e2 * (1.0 + s / 2.0);
            assert!(rel(ccdf(s, p(2)).unwrap(), e2) < 1e-13, "nu=2 s={s}");
            assert!(rel(ccdf(s, p(4)).unwrap(), e4) < 1e-13, "nu=4 s={s}");
        }
    }

    #[test]
    fn matches_poisson_sum_across_degrees_of_freedom() {
        for &nu in &[2u32, 6, 18, 20, 22, 64, 200, 512, 2048] {
            for &frac in &[0.1, 0.5, 0.9, 1.0, 1.1, 1.5, 2.0, 3.0] {
                let s = frac * f64::from(nu);
                let (want, scale) = poisson_tail(nu, s);
                if want < 1e-300 {
                    continue;
                }
                let got = ccdf(s, p(nu)).unwrap();
                let tol = 1e-13 + 8.0 * scale * f64::EPSILON;
                assert!(rel(got, want) < tol, "nu={nu} s={s}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn deep_tail_does_not_underflow() {
        let q = ccdf(5000.0, p(2048)).unwrap();
        assert!(q > 1e-300 && q < 1e-200);
        // past f64's range the log stays finite
        let lq = ln_ccdf(6000.0, p(2048)).unwrap();
        assert!(lq.is_finite() && lq < -800.0);
        let lq = ln_ccdf(1e5, p(2)).unwrap();
        assert!(rel(lq, -5e4) < 1e-15);
    }

    #[test]
    fn inverse_examples() {
        assert!(rel(inv_ccdf((-1f64).exp(), p(2)).unwrap(), 2.0) < 1e-14);
        let q = 2e-6 / (1024.0 * 1024.0);
        let s = inv_ccdf(q, p(2)).unwrap();
        assert!(rel(s, -2.0 * q.ln()) < 1e-13);
        assert!((s - 53.9706).abs() < 1e-4);
        assert_eq!(inv_ccdf(1.0, p(8)).unwrap(), 0.0);
    }

    #[test]
    fn invalid_arguments() {
        assert!(ChiSqParams::new(0).is_err());
        assert!(ChiSqParams::new(3).is_err());
        assert!(ccdf(-1.0, p(2)).is_err());
        assert!(inv_ccdf(0.0, p(2)).is_err());
        assert!(inv_ccdf(1.5, p(2)).is_err());
        assert!(inv_ccdf(f64::NAN, p(2)).is_err());
    }

    #[test]
    fn round_trip_grid() {
        let qs = [1e-15, 1e-12, 1.9e-12, 1e-9, 1e-6, 1e-3, 0.1, 0.5, 0.9, 1.0 - 1e-6, 1.0 - 1e-9];
        let mut nu = 2;
        while nu <= 2048 {
            for &q in &qs {
                let s = inv_ccdf(q, p(nu)).unwrap();
                let back = ccdf(s, p(nu)).unwrap();
                assert!(rel(back, q) < 1e-9, "nu={nu} q={q}: {back}");
            }
            nu *= 2;
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn round_trip_random(log_q in -15.0f64..-1e-9, half_nu in 1u32..=1024) {
            let q = 10f64.powf(log_q);
            let params = p(2 * half_nu);
            let s = inv_ccdf(q, params).unwrap();
            prop_assert!(rel(ccdf(s, params).unwrap(), q) < 1e-9);
        }

        #[test]
        fn ccdf_strictly_decreasing(s in 0.0f64..500.0, ds in 1e-3f64..5.0, half_nu in 1u32..200) {
            let params = p(2 * half_nu);
            // in log space so the comparison survives Q rounding to 1
            let (a, b) = (ln_ccdf(s, params).unwrap(), ln_ccdf(s + ds, params).unwrap());
            prop_assert!(b < a);
        }

        #[test]
        fn inverse_strictly_decreasing(lq in -14.0f64..-0.01, dq in 0.01f64..1.0, half_nu in 1u32..200) {
            let params = p(2 * half_nu);
            let hi = inv_ccdf(10f64.powf(lq), params).unwrap();
            let lo = inv_ccdf(10f64.powf((lq + dq).min(-1e-6)), params).unwrap();
            prop_assert!(lo < hi);
        }
    }
}
