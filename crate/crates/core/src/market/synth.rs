//! Synthetic snapshots priced from a known model.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{BondQuote, CapletQuote, MarketSnapshot, SwaptionQuote};
use crate::error::Result;
use crate::model::Model;
use crate::pricing::{annuity, atm_caplet_strike, atm_swaption_strike, implied_vol, Curve, SwapSchedule};

/// Caplets maturing at or before this are flagged like extrapolated quotes.
const SHORT_CAPLET: f64 = 0.75 + 1e-9;
/// Bonds at or below this price have no valid error variance.
const MIN_BOND_PRICE: f64 = 0.3125;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub date: String,
    pub yield_maturities: Vec<f64>,
    /// Caplet payment dates.
    pub caplet_maturities: Vec<f64>,
    pub caplet_accrual: f64,
    pub swaption_expiries: Vec<f64>,
    pub swaption_tenors: Vec<f64>,
    pub swaption_frequency: u32,
    /// Relative standard deviation of the multiplicative noise on yields and
    /// vols.
    pub noise: f64,
    pub seed: u64,
    /// Adds every option date to the yield pillars so the market curve
    /// needs no interpolation when pricing the quotes.
    pub option_dates_as_pillars: bool,
}

impl Default for SynthConfig {
    fn default() -> Self {
        let mut yields = vec![1.0 / 12.0, 0.25, 0.5, 0.75];
        yields.extend((1..=10).map(f64::from));
        yields.extend([12.0, 15.0, 20.0]);
        Self {
            date: "2000-01-07".into(),
            yield_maturities: yields,
            caplet_maturities: (2..=40).map(|k| k as f64 * 0.25).collect(),
            caplet_accrual: 0.25,
            swaption_expiries: vec![1.0 / 12.0, 0.25, 0.5, 1.0, 2.0, 3.0, 5.0],
            swaption_tenors: vec![1.0, 2.0, 3.0, 5.0, 7.0, 10.0],
            swaption_frequency: 2,
            noise: 0.0,
            seed: 0,
            option_dates_as_pillars: true,
        }
    }
}

impl SynthConfig {
    pub fn swaption_schedules(&self) -> Result<Vec<SwapSchedule>> {
        let mut out = Vec::new();
        for &e in &self.swaption_expiries {
            for &t in &self.swaption_tenors {
                out.push(SwapSchedule::regular(e, t, self.swaption_frequency, 1.0, 0.0)?);
            }
        }
        Ok(out)
    }

    fn pillars(&self) -> Result<Vec<f64>> {
        let mut dates = self.yield_maturities.clone();
        if self.option_dates_as_pillars {
            for &m in &self.caplet_maturities {
                dates.extend([m - self.caplet_accrual, m]);
            }
            for s in self.swaption_schedules()? {
                dates.push(s.expiry());
                dates.extend_from_slice(s.payments());
            }
        }
        dates.retain(|d| *d > 0.0);
        dates.sort_by(f64::total_cmp);
        dates.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        Ok(dates)
    }
}

/// Yields, strips, ATM caplet and swaption vols of `model`, each optionally
/// perturbed by `1 + noise * eps` with independent standard normal `eps`.
pub fn synthesize_snapshot(model: &Model, cfg: &SynthConfig) -> Result<MarketSnapshot> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut bump = |x: f64| {
        if cfg.noise == 0.0 {
            x
        } else {
            let e: f64 = StandardNormal.sample(&mut rng);
            x * (1.0 + cfg.noise * e)
        }
    };

    let mut snap = MarketSnapshot::empty(cfg.date.clone());
    snap.swaption_frequency = cfg.swaption_frequency;
    for t in cfg.pillars()? {
        let y = -model.discount(t)?.ln() / t;
        snap.yields.push((t, bump(y)));
    }
    for &(t, y) in &snap.yields {
        let p = (-y * t).exp();
        if p > MIN_BOND_PRICE && cfg.yield_maturities.iter().any(|m| (m - t).abs() < 1e-12) {
            snap.bonds.push(BondQuote::strip(t, p)?);
        }
    }
    if !model.has_volatility() {
        snap.validate()?;
        return Ok(snap);
    }
    for &m in &cfg.caplet_maturities {
        let t = m - cfg.caplet_accrual;
        let k = atm_caplet_strike(model, t, m)?;
        let price = model.caplet(t, m, 1.0, k)?;
        let vol = implied_vol(price, k, k, cfg.caplet_accrual * model.discount(m)?, t.sqrt())?;
        snap.caplets.push(CapletQuote {
            maturity: m,
            accrual: cfg.caplet_accrual,
            vol: bump(vol),
            strike: Some(k),
            excluded: m <= SHORT_CAPLET,
        });
    }
    for s in cfg.swaption_schedules()? {
        let k = atm_swaption_strike(model, &s)?;
        let s = s.with_strike(k)?;
        let price = model.swaption(&s)?;
        let vol = implied_vol(price, k, k, annuity(model, &s)?, s.expiry().sqrt())?;
        snap.swaptions.push(SwaptionQuote {
            expiry: s.expiry(),
            tenor: s.tenor(),
            vol: bump(vol),
            strike: Some(k),
        });
    }
    snap.validate()?;
    Ok(snap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chaos::ChaosSpec;
    use crate::expoly::ExpPoly;

    fn b4() -> Model {
        let e = |c: &[f64], d| ExpPoly::term(c, d).unwrap();
        Model::Chaos(ChaosSpec::third_one_var(e(&[1.0], 0.08), e(&[0.35], 0.3), e(&[0.12], 0.5)).unwrap())
    }

    #[test]
    fn seeded_noise_is_reproducible() {
        let cfg = SynthConfig {
            noise: 0.01,
            seed: 9,
            ..Default::default()
        };
        let a = synthesize_snapshot(&b4(), &cfg).unwrap();
        let b = synthesize_snapshot(&b4(), &cfg).unwrap();
        assert_eq!(a, b);
        let c = synthesize_snapshot(&b4(), &SynthConfig { seed: 10, ..cfg }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn noiseless_quotes_match_model() {
        let m = b4();
        let snap = synthesize_snapshot(&m, &SynthConfig::default()).unwrap();
        for &(t, y) in &snap.yields {
            assert!((y + m.discount(t).unwrap().ln() / t).abs() < 1e-15);
        }
        assert_eq!(snap.caplets.iter().filter(|c| c.excluded).count(), 2);
        assert_eq!(snap.swaptions.len(), 42);
        assert!(snap.caplets.iter().all(|c| c.vol > 0.0));
    }
}
