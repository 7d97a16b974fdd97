//! Closed-form option prices in chaos models.
//!
//! At time zero every payoff used here is `(sum_j w_j Z_{t T_j})^+` for a
//! fixed exercise date `t`. Writing `Z_{tT}` in Hermite form and substituting
//! the standardized state gives a polynomial in a standard normal `z`, whose
//! positive-part expectation is available in closed form.

pub mod audit;
pub mod black;
pub mod rates;

use std::collections::HashMap;

use crate::chaos::{hermite_to_standard_monomials, ChaosSpec};
use crate::error::{domain, Result};
use crate::poly::{expected_positive_part, PayoffPoly};

pub use black::{black, black_vega, implied_vol};
pub use rates::{
    annuity, atm_caplet_strike, atm_swaption_strike, forward_libor, swap_rate, Curve, SwapSchedule,
};

/// Source of Hermite weights `F_k(T)` for `Z_{tT}`.
pub trait ZSource {
    /// `V_0 = Z_00`.
    fn v0(&self) -> f64;
    /// `(F_0(T), .., F_4(T))`. First chaos models return `(Z_{0T}, 0, 0, 0, 0)`.
    fn weights(&self, maturity: f64) -> Result<[f64; 5]>;
    /// Variance of the Gaussian state at `t`.
    fn state_variance(&self, t: f64) -> f64;
}

impl ZSource for ChaosSpec {
    fn v0(&self) -> f64 {
        ChaosSpec::v0(self)
    }

    fn weights(&self, maturity: f64) -> Result<[f64; 5]> {
        match self.z_coeffs() {
            Ok(zc) => zc.values(maturity),
            Err(_) => Ok([self.psi().tail_integral(maturity)?, 0.0, 0.0, 0.0, 0.0]),
        }
    }

    fn state_variance(&self, t: f64) -> f64 {
        ChaosSpec::state_variance(self, t)
    }
}

impl Curve for ChaosSpec {
    fn discount(&self, maturity: f64) -> Result<f64> {
        self.discount_factor(maturity)
    }
}

/// Weights precomputed on a fixed set of dates.
///
/// Calibration prices many instruments on the same handful of dates; the
/// cache evaluates each date once per parameter vector.
#[derive(Debug, Clone)]
pub struct ZCache<'a> {
    spec: &'a ChaosSpec,
    table: HashMap<u64, [f64; 5]>,
}

impl<'a> ZCache<'a> {
    pub fn new(spec: &'a ChaosSpec, dates: impl IntoIterator<Item = f64>) -> Result<Self> {
        let mut table = HashMap::new();
        for d in dates {
            if let std::collections::hash_map::Entry::Vacant(e) = table.entry(d.to_bits()) {
                e.insert(spec.weights(d)?);
            }
        }
        Ok(Self { spec, table })
    }

    pub fn spec(&self) -> &ChaosSpec {
        self.spec
    }
}

impl ZSource for ZCache<'_> {
    fn v0(&self) -> f64 {
        self.spec.v0()
    }

    fn weights(&self, maturity: f64) -> Result<[f64; 5]> {
        match self.table.get(&maturity.to_bits()) {
            Some(w) => Ok(*w),
            None => self.spec.weights(maturity),
        }
    }

    fn state_variance(&self, t: f64) -> f64 {
        self.spec.state_variance(t)
    }
}

impl Curve for ZCache<'_> {
    fn discount(&self, maturity: f64) -> Result<f64> {
        if maturity < 0.0 {
            return domain(format!("negative maturity {maturity}"));
        }
        Ok(self.weights(maturity)?[0] / self.v0())
    }
}

/// Polynomial in `z` of `sum_j w_j Z_{t T_j}`.
pub fn combination_poly<S: ZSource + ?Sized>(src: &S, t: f64, legs: &[(f64, f64)]) -> Result<PayoffPoly> {
    let mut h = [0.0; 5];
    for &(w, date) in legs {
        if date < t {
            return domain(format!("leg date {date} precedes exercise {t}"));
        }
        let f = src.weights(date)?;
        for (hk, fk) in h.iter_mut().zip(f) {
            *hk += w * fk;
        }
    }
    Ok(PayoffPoly::new(hermite_to_standard_monomials(&h, src.state_variance(t))))
}

fn check_option_dates(t: f64, maturity: f64) -> Result<()> {
    if !(t >= 0.0) {
        return domain(format!("negative exercise date {t}"));
    }
    if !(maturity >= t) {
        return domain(format!("maturity {maturity} precedes exercise {t}"));
    }
    Ok(())
}

/// `K Z_tt - Z_tT` as a polynomial in the standardized state.
pub fn put_poly<S: ZSource + ?Sized>(src: &S, t: f64, maturity: f64, strike: f64) -> Result<PayoffPoly> {
    combination_poly(src, t, &[(strike, t), (-1.0, maturity)])
}

/// `Z_tt - Z_{tT_n} - K sum_i tau_i Z_{tT_i}`.
pub fn swaption_poly<S: ZSource + ?Sized>(src: &S, sched: &SwapSchedule) -> Result<PayoffPoly> {
    let k = sched.strike();
    let mut legs = Vec::with_capacity(sched.payments().len() + 2);
    legs.push((1.0, sched.expiry()));
    legs.push((-1.0, sched.last()));
    legs.extend(sched.periods().map(|(end, tau)| (-k * tau, end)));
    combination_poly(src, sched.expiry(), &legs)
}

/// Time-0 price of a put on the `T`-bond with expiry `t` and strike `K`.
pub fn bond_put<S: ZSource + ?Sized>(src: &S, t: f64, maturity: f64, strike: f64) -> Result<f64> {
    check_option_dates(t, maturity)?;
    if !(strike > 0.0 && strike <= 1.0) {
        return domain(format!("bond put strike must lie in (0, 1], got {strike}"));
    }
    Ok(expected_positive_part(&put_poly(src, t, maturity, strike)?) / src.v0())
}

/// Time-0 caplet on `L(t, T)` evaluated from its own payoff
/// `N (Z_tt - (1 + K tau) Z_tT)^+`.
pub fn caplet<S: ZSource + ?Sized>(src: &S, t: f64, maturity: f64, notional: f64, strike: f64) -> Result<f64> {
    check_option_dates(t, maturity)?;
    let tau = maturity - t;
    if !(tau > 0.0) {
        return domain("caplet with zero accrual");
    }
    if !(strike > 0.0) {
        return domain(format!("caplet strike must be positive, got {strike}"));
    }
    let p = combination_poly(src, t, &[(1.0, t), (-(1.0 + strike * tau), maturity)])?;
    Ok(notional * expected_positive_part(&p) / src.v0())
}

/// Time-0 payer swaption.
pub fn swaption<S: ZSource + ?Sized>(src: &S, sched: &SwapSchedule) -> Result<f64> {
    let p = swaption_poly(src, sched)?;
    Ok(sched.notional() * expected_positive_part(&p) / src.v0())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expoly::ExpPoly;

    fn e(c: &[f64], d: f64) -> ExpPoly {
        ExpPoly::term(c, d).unwrap()
    }

    fn b4() -> ChaosSpec {
        ChaosSpec::third_one_var(e(&[1.0], 0.08), e(&[0.35], 0.3), e(&[0.12], 0.5)).unwrap()
    }

    #[test]
    fn unit_strike_put_is_always_exercised() {
        let spec = b4();
        let p = bond_put(&spec, 1.0, 2.0, 1.0).unwrap();
        let expect = spec.discount_factor(1.0).unwrap() - spec.discount_factor(2.0).unwrap();
        assert!((p - expect).abs() < 1e-14);
    }

    #[test]
    fn deterministic_put() {
        let a = e(&[0.9, 0.1], 0.2);
        let spec = ChaosSpec::third_one_var(a, ExpPoly::zero(), ExpPoly::zero()).unwrap();
        let (p1, p2) = (spec.discount_factor(1.0).unwrap(), spec.discount_factor(2.0).unwrap());
        for k in [0.5, p2 / p1, 0.97] {
            let v = bond_put(&spec, 1.0, 2.0, k).unwrap();
            assert!((v - p1 * (k - p2 / p1).max(0.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn first_chaos_put_is_deterministic() {
        let spec = ChaosSpec::first(e(&[1.0, 0.3], 0.1)).unwrap();
        let (p1, p3) = (spec.discount_factor(1.0).unwrap(), spec.discount_factor(3.0).unwrap());
        let v = bond_put(&spec, 1.0, 3.0, 0.99).unwrap();
        assert!((v - p1 * (0.99 - p3 / p1).max(0.0)).abs() < 1e-14);
    }

    #[test]
    fn zero_exercise_is_intrinsic() {
        let spec = b4();
        let p2 = spec.discount_factor(2.0).unwrap();
        assert!((bond_put(&spec, 0.0, 2.0, 0.95).unwrap() - (0.95 - p2).max(0.0)).abs() < 1e-15);
    }

    #[test]
    fn caplet_put_identity() {
        let spec = b4();
        for k in [0.01, 0.03, 0.08] {
            let c = caplet(&spec, 1.0, 1.5, 2.0, k).unwrap();
            let m = 1.0 + k * 0.5;
            let p = 2.0 * m * bond_put(&spec, 1.0, 1.5, 1.0 / m).unwrap();
            assert!((c - p).abs() <= 1e-14 * c.abs().max(1e-3), "{c} {p}");
        }
    }

    #[test]
    fn zero_strike_swaption() {
        let spec = b4();
        let s = SwapSchedule::regular(1.0, 2.0, 1, 3.0, 0.0).unwrap();
        let v = swaption(&spec, &s).unwrap();
        let expect = 3.0 * (spec.discount_factor(1.0).unwrap() - spec.discount_factor(3.0).unwrap());
        assert!((v - expect).abs() < 1e-14);
    }

    #[test]
    fn single_period_swaption_is_caplet() {
        let spec = b4();
        let k = atm_caplet_strike(&spec, 1.0, 1.5).unwrap();
        let s = SwapSchedule::new(1.0, vec![1.5], 1.0, k).unwrap();
        let a = swaption(&spec, &s).unwrap();
        let c = caplet(&spec, 1.0, 1.5, 1.0, k).unwrap();
        assert!((a - c).abs() < 1e-15);
    }

    #[test]
    fn cache_agrees_with_spec() {
        let spec = b4();
        let s = SwapSchedule::regular(2.0, 3.0, 2, 1.0, 0.03).unwrap();
        let dates = std::iter::once(2.0).chain(s.payments().iter().copied());
        let cache = ZCache::new(&spec, dates).unwrap();
        assert_eq!(swaption(&cache, &s).unwrap(), swaption(&spec, &s).unwrap());
        assert_eq!(cache.discount(3.5).unwrap(), spec.discount(3.5).unwrap());
    }
}
