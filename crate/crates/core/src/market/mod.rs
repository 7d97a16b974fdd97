//! Market snapshots and their preparation.

pub mod curve;
pub mod io;
pub mod outliers;
pub mod strip;
pub mod synth;

use crate::error::{domain, Error, Result};

pub use curve::{bootstrap_curve, implied_rate, BootstrapOptions, CurveInstrument, DiscountCurve, InstrumentKind};
pub use io::{read_snapshot, read_snapshots, write_snapshot, IngestOptions};
pub use outliers::{flag_outliers, OutlierPolicy};
pub use strip::{cap_price, cap_strike, strip_caplet_vols, CapVol, StrippedCaplet};
pub use synth::{synthesize_snapshot, SynthConfig};

/// Zero-coupon strip quote.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BondQuote {
    pub maturity: f64,
    pub price: f64,
    /// Macaulay duration; equals the maturity for a strip.
    pub duration: f64,
}

impl BondQuote {
    pub fn new(maturity: f64, price: f64, duration: f64) -> Result<Self> {
        if !(maturity > 0.0) {
            return domain(format!("bond maturity must be positive, got {maturity}"));
        }
        if !(price > 0.0) {
            return domain(format!("bond price must be positive, got {price}"));
        }
        if !(duration > 0.0 && duration <= maturity * (1.0 + 1e-12)) {
            return domain(format!("duration {duration} outside (0, {maturity}]"));
        }
        Ok(Self {
            maturity,
            price,
            duration,
        })
    }

    pub fn strip(maturity: f64, price: f64) -> Result<Self> {
        Self::new(maturity, price, maturity)
    }
}

/// Continuously compounded yield `-log(p) / T`.
pub fn price_to_yield(quote: &BondQuote) -> Result<f64> {
    if !(quote.maturity > 0.0) {
        return domain(format!("yield needs T > 0, got {}", quote.maturity));
    }
    if !(quote.price > 0.0) {
        return domain(format!("yield needs a positive price, got {}", quote.price));
    }
    Ok(-quote.price.ln() / quote.maturity)
}

pub fn yield_to_price(y: f64, maturity: f64) -> f64 {
    (-y * maturity).exp()
}

/// ATM caplet on `[maturity - accrual, maturity]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapletQuote {
    pub maturity: f64,
    pub accrual: f64,
    pub vol: f64,
    /// Strike recorded with the quote; otherwise the curve forward is used.
    pub strike: Option<f64>,
    pub excluded: bool,
}

impl CapletQuote {
    pub fn fixing(&self) -> f64 {
        self.maturity - self.accrual
    }
}

/// ATM payer swaption.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwaptionQuote {
    pub expiry: f64,
    pub tenor: f64,
    pub vol: f64,
    pub strike: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarketSnapshot {
    pub date: String,
    pub bonds: Vec<BondQuote>,
    /// `(maturity, zero yield)`.
    pub yields: Vec<(f64, f64)>,
    pub caplets: Vec<CapletQuote>,
    pub swaptions: Vec<SwaptionQuote>,
    /// Fixed-leg payments per year for swaption schedules.
    pub swaption_frequency: u32,
}

fn increasing(xs: impl Iterator<Item = f64>, what: &str) -> Result<()> {
    let mut prev = f64::NEG_INFINITY;
    for x in xs {
        if !(x > prev) {
            return Err(Error::Ingestion(format!("{what} maturities must increase strictly ({prev} then {x})")));
        }
        prev = x;
    }
    Ok(())
}

impl MarketSnapshot {
    pub fn empty(date: impl Into<String>) -> Self {
        Self {
            date: date.into(),
            bonds: Vec::new(),
            yields: Vec::new(),
            caplets: Vec::new(),
            swaptions: Vec::new(),
            swaption_frequency: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        increasing(self.bonds.iter().map(|b| b.maturity), "bond")?;
        increasing(self.yields.iter().map(|y| y.0), "yield")?;
        increasing(self.caplets.iter().map(|c| c.maturity), "caplet")?;
        let mut prev = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for s in &self.swaptions {
            if !((s.expiry, s.tenor) > prev) {
                return Err(Error::Ingestion(format!(
                    "swaption grid must be sorted by (expiry, tenor) without repeats at ({}, {})",
                    s.expiry, s.tenor
                )));
            }
            prev = (s.expiry, s.tenor);
        }
        if let Some(y) = self.yields.iter().find(|y| !(y.1 > 0.0)) {
            return Err(Error::Ingestion(format!("non-positive yield {} at {}", y.1, y.0)));
        }
        if let Some(c) = self.caplets.iter().find(|c| !(c.vol > 0.0) || !(c.accrual > 0.0) || !(c.fixing() > 0.0)) {
            return Err(Error::Ingestion(format!("invalid caplet quote at {}", c.maturity)));
        }
        if let Some(s) = self.swaptions.iter().find(|s| !(s.vol > 0.0) || !(s.expiry > 0.0) || !(s.tenor > 0.0)) {
            return Err(Error::Ingestion(format!("invalid swaption quote at ({}, {})", s.expiry, s.tenor)));
        }
        if self.swaption_frequency == 0 {
            return Err(Error::Ingestion("swaption frequency must be positive".into()));
        }
        Ok(())
    }

    /// Discount curve through the zero-yield pillars.
    pub fn curve(&self) -> Result<DiscountCurve> {
        DiscountCurve::from_zero_yields(&self.yields)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn yield_round_trip() {
        let q = BondQuote::strip(2.0, (-0.05f64 * 2.0).exp()).unwrap();
        assert!((price_to_yield(&q).unwrap() - 0.05).abs() < 1e-15);
        assert_eq!(price_to_yield(&BondQuote::strip(3.0, 1.0).unwrap()).unwrap(), 0.0);
        let y = price_to_yield(&BondQuote::strip(10.0, 0.7).unwrap()).unwrap();
        assert!((y + 0.7f64.ln() / 10.0).abs() < 1e-16);
        for (y, t) in [(0.031, 0.5), (0.07, 25.0)] {
            let p = yield_to_price(y, t);
            assert!((price_to_yield(&BondQuote::strip(t, p).unwrap()).unwrap() - y).abs() < 1e-14);
        }
        assert!(BondQuote::strip(0.0, 0.9).is_err());
    }
}
