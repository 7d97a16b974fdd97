//! Single-instrument pricing with Black implied volatility.

use std::str::FromStr;

use serde::Serialize;

use crate::calibration::objective::Objective;
use crate::calibration::registry::lookup;
use crate::error::{domain, Error, Result};
use crate::model::Model;
use crate::pricing::{self, annuity, black, forward_libor, implied_vol, swap_rate, Curve, SwapSchedule};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Instrument {
    Caplet { expiry: f64, maturity: f64 },
    Swaption { expiry: f64, tenor: f64, frequency: u32 },
    BondPut { expiry: f64, maturity: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Strike {
    /// Forward LIBOR, forward swap rate or forward bond price.
    Atm,
    Value(f64),
}

impl FromStr for Strike {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("atm") {
            return Ok(Strike::Atm);
        }
        s.trim()
            .parse()
            .map(Strike::Value)
            .map_err(|_| Error::Parse(format!("strike must be a number or `atm`, got `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PriceRequest {
    pub model: String,
    pub params: Vec<f64>,
    pub instrument: Instrument,
    pub strike: Strike,
    pub notional: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriceReport {
    pub model: String,
    pub params: Vec<f64>,
    pub instrument: Instrument,
    pub strike: f64,
    pub notional: f64,
    /// Forward rate (caplet, swaption) or forward bond price (put).
    pub forward: f64,
    pub annuity: Option<f64>,
    pub price: f64,
    pub implied_vol: Option<f64>,
}

fn build(req: &PriceRequest, horizon: f64) -> Result<Model> {
    let def = lookup(&req.model)?;
    let objective = if def.param_count(Objective::Joint) == req.params.len() {
        Objective::Joint
    } else {
        Objective::YieldCaplet
    };
    def.build(&req.params, objective, horizon)
}

fn bond_put(model: &Model, t: f64, maturity: f64, strike: f64) -> Result<f64> {
    match model {
        Model::Chaos(s) => pricing::bond_put(s, t, maturity, strike),
        Model::HullWhite(p) => Ok(p.zero_bond_put(t, maturity, strike)),
        _ => Err(Error::Unsupported("bond puts are priced for chaos and Hull-White models".into())),
    }
}

pub fn price_instrument(req: &PriceRequest) -> Result<PriceReport> {
    if !(req.notional > 0.0) {
        return domain(format!("notional must be positive, got {}", req.notional));
    }
    let (price, strike, forward, ann, vol) = match req.instrument {
        Instrument::Caplet { expiry, maturity } => {
            let model = build(req, maturity + 1.0)?;
            let f = forward_libor(&model, expiry, maturity)?;
            let k = match req.strike {
                Strike::Atm => f,
                Strike::Value(k) => k,
            };
            let price = model.caplet(expiry, maturity, req.notional, k)?;
            let a = (maturity - expiry) * model.discount(maturity)?;
            let v = implied_vol(price / req.notional, k, f, a, expiry.sqrt())?;
            (price, k, f, Some(a), Some(v))
        }
        Instrument::Swaption { expiry, tenor, frequency } => {
            let model = build(req, expiry + tenor + 1.0)?;
            let sched = SwapSchedule::regular(expiry, tenor, frequency, req.notional, 0.0)?;
            let s = swap_rate(&model, &sched)?;
            let k = match req.strike {
                Strike::Atm => s,
                Strike::Value(k) => k,
            };
            let sched = sched.with_strike(k)?;
            let price = model.swaption(&sched)?;
            let a = annuity(&model, &sched)?;
            let v = if k > 0.0 {
                Some(implied_vol(price / req.notional, k, s, a, expiry.sqrt())?)
            } else {
                None
            };
            (price, k, s, Some(a), v)
        }
        Instrument::BondPut { expiry, maturity } => {
            let model = build(req, maturity + 1.0)?;
            let fwd = model.discount(maturity)? / model.discount(expiry)?;
            let k = match req.strike {
                Strike::Atm => fwd,
                Strike::Value(k) => k,
            };
            let price = req.notional * bond_put(&model, expiry, maturity, k)?;
            (price, k, fwd, None, None)
        }
    };
    Ok(PriceReport {
        model: lookup(&req.model)?.id.to_string(),
        params: req.params.clone(),
        instrument: req.instrument,
        strike,
        notional: req.notional,
        forward,
        annuity: ann,
        price,
        implied_vol: vol,
    })
}

/// Black price for a quoted vol, used to cross-check reports.
pub fn black_price(annuity: f64, strike: f64, forward: f64, vol: f64, expiry: f64) -> f64 {
    annuity * black(strike, forward, vol * expiry.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_strike_swaption_is_curve_difference() {
        let params = vec![1.0, 0.35, 0.12, 0.08, 0.3, 0.5];
        let req = PriceRequest {
            model: "B4".into(),
            params: params.clone(),
            instrument: Instrument::Swaption {
                expiry: 1.0,
                tenor: 3.0,
                frequency: 1,
            },
            strike: Strike::Value(0.0),
            notional: 2.0,
        };
        let r = price_instrument(&req).unwrap();
        let m = lookup("B4").unwrap().build(&params, Objective::Joint, 5.0).unwrap();
        let expect = 2.0 * (m.discount(1.0).unwrap() - m.discount(4.0).unwrap());
        assert!((r.price - expect).abs() < 1e-14);
        assert_eq!(r.implied_vol, None);
    }

    #[test]
    fn atm_caplet_vol_reprices() {
        let req = PriceRequest {
            model: "B4".into(),
            params: vec![1.0, 0.35, 0.12, 0.08, 0.3, 0.5],
            instrument: Instrument::Caplet {
                expiry: 2.0,
                maturity: 2.25,
            },
            strike: Strike::Atm,
            notional: 1.0,
        };
        let r = price_instrument(&req).unwrap();
        let back = black_price(r.annuity.unwrap(), r.strike, r.forward, r.implied_vol.unwrap(), 2.0);
        assert!((back - r.price).abs() < 1e-12);
    }

    #[test]
    fn strike_parsing() {
        assert_eq!("ATM".parse::<Strike>().unwrap(), Strike::Atm);
        assert_eq!("0.05".parse::<Strike>().unwrap(), Strike::Value(0.05));
        assert!("high".parse::<Strike>().is_err());
    }
}
