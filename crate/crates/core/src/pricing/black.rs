//! Black formula and its inversion.

use crate::error::{domain, Error, PriceBound, Result};
use crate::normal::{cdf, pdf};

/// `F Phi(d1) - K Phi(d2)` with total volatility `v` (already scaled by
/// `sqrt(t)`).
pub fn black(strike: f64, forward: f64, v: f64) -> f64 {
    if v <= 0.0 {
        return (forward - strike).max(0.0);
    }
    let lm = (forward / strike).ln();
    let d1 = lm / v + 0.5 * v;
    let d2 = d1 - v;
    forward * cdf(d1) - strike * cdf(d2)
}

/// `dBlack/dv`.
pub fn black_vega(strike: f64, forward: f64, v: f64) -> f64 {
    if v <= 0.0 {
        return 0.0;
    }
    let d1 = (forward / strike).ln() / v + 0.5 * v;
    forward * pdf(d1)
}

/// Volatility `sigma` with `annuity * Black(K, F, sigma sqrt_t) = price`.
pub fn implied_vol(price: f64, strike: f64, forward: f64, annuity: f64, sqrt_t: f64) -> Result<f64> {
    if !(strike > 0.0 && forward > 0.0 && annuity > 0.0 && sqrt_t > 0.0) {
        return domain(format!(
            "implied vol needs positive K, F, annuity and sqrt(t); got {strike}, {forward}, {annuity}, {sqrt_t}"
        ));
    }
    let lower = annuity * (forward - strike).max(0.0);
    let upper = annuity * forward;
    // rounding slack around the intrinsic bound
    let slack = 64.0 * f64::EPSILON * upper;
    if !(price >= lower - slack) {
        return Err(Error::Inversion {
            price,
            bound: PriceBound::Lower,
            limit: lower,
        });
    }
    if !(price < upper) {
        return Err(Error::Inversion {
            price,
            bound: PriceBound::Upper,
            limit: upper,
        });
    }
    let target = price / annuity;
    if price <= lower + slack {
        return Ok(0.0);
    }

    let f = |v: f64| black(strike, forward, v) - target;
    let (mut lo, mut hi) = (0.0, 1.0);
    while f(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e3 {
            return Err(Error::Inversion {
                price,
                bound: PriceBound::Upper,
                limit: upper,
            });
        }
    }
    // safeguarded Newton inside a shrinking bracket
    let mut v = 0.5 * (lo + hi);
    for _ in 0..200 {
        let fv = f(v);
        if fv == 0.0 {
            break;
        }
        if fv < 0.0 {
            lo = v;
        } else {
            hi = v;
        }
        let vega = black_vega(strike, forward, v);
        let newton = v - fv / vega;
        let next = if vega > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let step = (next - v).abs();
        v = next;
        if step <= 4.0 * f64::EPSILON * v || hi - lo < 1e-16 * hi.max(1.0) {
            break;
        }
    }
    Ok(v / sqrt_t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_vol_limit() {
        assert_eq!(black(0.9, 1.0, 0.0), 1.0 - 0.9);
        assert!((black(0.9, 1.0, 1e-12) - 0.1).abs() < 1e-14);
        assert_eq!(black(1.1, 1.0, 0.0), 0.0);
    }

    #[test]
    fn atm_reduction() {
        assert!((black(1.0, 1.0, 0.2) - (2.0 * cdf(0.1) - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn round_trip() {
        let p = black(1.0, 1.0, 0.2);
        assert!((implied_vol(p, 1.0, 1.0, 1.0, 1.0).unwrap() - 0.2).abs() < 1e-10);
        let p = 0.37 * black(0.03, 0.035, 0.25 * 2f64.sqrt());
        let v = implied_vol(p, 0.03, 0.035, 0.37, 2f64.sqrt()).unwrap();
        assert!((v - 0.25).abs() < 1e-9);
    }

    #[test]
    fn band_violations_name_the_bound() {
        match implied_vol(0.05, 0.9, 1.0, 1.0, 1.0) {
            Err(Error::Inversion { bound, .. }) => assert_eq!(bound, PriceBound::Lower),
            other => panic!("{other:?}"),
        }
        match implied_vol(1.2, 0.9, 1.0, 1.0, 1.0) {
            Err(Error::Inversion { bound, .. }) => assert_eq!(bound, PriceBound::Upper),
            other => panic!("{other:?}"),
        }
    }
}
