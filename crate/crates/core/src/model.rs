//! One type over every priceable model.

use crate::benchmarks::{HullWhiteParams, LfmParams, RatLogParams, SvenssonParams};
use crate::chaos::{ChaosOrder, ChaosSpec};
use crate::error::{Error, Result};
use crate::pricing::{self, Curve, SwapSchedule};

#[derive(Debug, Clone)]
pub enum Model {
    Chaos(ChaosSpec),
    /// Descriptive curve only (Svensson or Nelson-Siegel).
    Descriptive(SvenssonParams),
    HullWhite(HullWhiteParams),
    RationalLognormal(RatLogParams),
    Libor(LfmParams),
}

impl Model {
    pub fn caplet(&self, t: f64, maturity: f64, notional: f64, strike: f64) -> Result<f64> {
        match self {
            Model::Chaos(s) => pricing::caplet(s, t, maturity, notional, strike),
            Model::Descriptive(_) => Err(Error::Unsupported(
                "descriptive curves do not price options".into(),
            )),
            Model::HullWhite(p) => p.caplet(t, maturity, notional, strike),
            Model::RationalLognormal(p) => p.caplet(t, maturity, notional, strike),
            Model::Libor(p) => p.caplet(t, maturity, notional, strike),
        }
    }

    pub fn swaption(&self, sched: &SwapSchedule) -> Result<f64> {
        match self {
            Model::Chaos(s) => pricing::swaption(s, sched),
            Model::Descriptive(_) => Err(Error::Unsupported(
                "descriptive curves do not price options".into(),
            )),
            Model::HullWhite(p) => p.swaption(sched),
            Model::RationalLognormal(p) => p.swaption(sched),
            Model::Libor(p) => p.swaption(sched),
        }
    }

    /// False for curve-only models, whose option prices are intrinsic.
    pub fn has_volatility(&self) -> bool {
        match self {
            Model::Chaos(s) => s.order() != ChaosOrder::First,
            Model::Descriptive(_) => false,
            _ => true,
        }
    }

    pub fn as_chaos(&self) -> Option<&ChaosSpec> {
        match self {
            Model::Chaos(s) => Some(s),
            _ => None,
        }
    }
}

impl Curve for Model {
    fn discount(&self, maturity: f64) -> Result<f64> {
        match self {
            Model::Chaos(s) => s.discount_factor(maturity),
            Model::Descriptive(p) => Curve::discount(p, maturity),
            Model::HullWhite(p) => Curve::discount(p, maturity),
            Model::RationalLognormal(p) => Curve::discount(p, maturity),
            Model::Libor(p) => Curve::discount(p, maturity),
        }
    }
}
