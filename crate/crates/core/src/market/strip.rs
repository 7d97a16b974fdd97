//! Caplet volatilities from ATM cap quotes.

use crate::error::{Error, Result};
use crate::pricing::{black, Curve};

/// Flat ATM volatility of the cap with final payment at `maturity`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapVol {
    pub maturity: f64,
    pub vol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrippedCaplet {
    pub fixing: f64,
    pub maturity: f64,
    pub vol: f64,
    /// Set by constant extrapolation; not used as a calibration target.
    pub excluded_from_calibration: bool,
}

/// Number of leading caplets whose vols come from extrapolation.
const EXTRAPOLATED: usize = 2;
const VOL_BRACKET: (f64, f64) = (1e-6, 5.0);

fn periods(maturity: f64, accrual: f64) -> Result<usize> {
    let n = (maturity / accrual).round();
    if (n * accrual - maturity).abs() > 1e-9 || n < 2.0 {
        return Err(Error::Stripping {
            maturity,
            reason: format!("maturity is not a multiple (>= 2) of the accrual {accrual}"),
        });
    }
    Ok(n as usize)
}

/// ATM strike of the cap: the swap rate over `[accrual, maturity]`.
pub fn cap_strike<C: Curve + ?Sized>(curve: &C, maturity: f64, accrual: f64) -> Result<f64> {
    let n = periods(maturity, accrual)?;
    let mut a = 0.0;
    for k in 2..=n {
        a += accrual * curve.discount(k as f64 * accrual)?;
    }
    Ok((curve.discount(accrual)? - curve.discount(maturity)?) / a)
}

/// Sum of Black caplets at strike `K`; `vols[i]` applies to the caplet fixing
/// at `(i + 1) * accrual`.
pub fn cap_price<C: Curve + ?Sized>(curve: &C, maturity: f64, accrual: f64, strike: f64, vols: &[f64]) -> Result<f64> {
    let n = periods(maturity, accrual)?;
    if vols.len() < n - 1 {
        return Err(Error::Domain(format!("{} caplet vols for {} caplets", vols.len(), n - 1)));
    }
    let mut total = 0.0;
    for k in 1..n {
        let (t, m) = (k as f64 * accrual, (k + 1) as f64 * accrual);
        let (pt, pm) = (curve.discount(t)?, curve.discount(m)?);
        let f = (pt / pm - 1.0) / accrual;
        total += accrual * pm * black(strike, f, vols[k - 1] * t.sqrt());
    }
    Ok(total)
}

/// Piecewise-constant caplet vols with caps sorted by maturity.
///
/// Caplets up to the first cap share its flat vol; each later cap fixes one
/// common vol for the caplets it adds.
pub fn strip_caplet_vols<C: Curve + ?Sized>(caps: &[CapVol], curve: &C, accrual: f64) -> Result<Vec<StrippedCaplet>> {
    if caps.is_empty() {
        return Err(Error::Stripping {
            maturity: 0.0,
            reason: "no cap quotes".into(),
        });
    }
    let mut vols: Vec<f64> = Vec::new();
    let mut prev = 0.0;
    for cap in caps {
        if !(cap.maturity > prev) || !(cap.vol > 0.0) {
            return Err(Error::Stripping {
                maturity: cap.maturity,
                reason: "cap maturities must increase and vols must be positive".into(),
            });
        }
        let n = periods(cap.maturity, accrual)?;
        let k = cap_strike(curve, cap.maturity, accrual)?;
        let target = cap_price(curve, cap.maturity, accrual, k, &vec![cap.vol; n - 1])?;
        let known = vols.len();
        if known >= n - 1 {
            return Err(Error::Stripping {
                maturity: cap.maturity,
                reason: "cap adds no caplets".into(),
            });
        }
        let price_with = |s: f64| {
            let mut v = vols.clone();
            v.resize(n - 1, s);
            cap_price(curve, cap.maturity, accrual, k, &v)
        };
        let sigma = if known == 0 {
            cap.vol
        } else {
            let (mut lo, mut hi) = VOL_BRACKET;
            let (plo, phi) = (price_with(lo)?, price_with(hi)?);
            if !(plo <= target && target <= phi) {
                return Err(Error::Stripping {
                    maturity: cap.maturity,
                    reason: format!("no caplet vol in [{lo}, {hi}] reproduces the cap price {target:e}"),
                });
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if price_with(mid)? < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-15 {
                    break;
                }
            }
            0.5 * (lo + hi)
        };
        vols.resize(n - 1, sigma);
        prev = cap.maturity;
    }
    Ok(vols
        .iter()
        .enumerate()
        .map(|(i, &vol)| StrippedCaplet {
            fixing: (i + 1) as f64 * accrual,
            maturity: (i + 2) as f64 * accrual,
            vol,
            excluded_from_calibration: i < EXTRAPOLATED,
        })
        .collect())
}
