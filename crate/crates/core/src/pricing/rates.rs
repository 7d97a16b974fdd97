//! Discount curves, forward LIBOR and swap rates.

use crate::error::{domain, Result};

/// Anything that produces time-0 discount factors.
pub trait Curve {
    fn discount(&self, maturity: f64) -> Result<f64>;
}

impl<F> Curve for F
where
    F: Fn(f64) -> f64,
{
    fn discount(&self, maturity: f64) -> Result<f64> {
        Ok(self(maturity))
    }
}

/// Payer swap schedule `T_0 = expiry < T_1 < ... < T_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SwapSchedule {
    expiry: f64,
    payments: Vec<f64>,
    notional: f64,
    strike: f64,
}

impl SwapSchedule {
    pub fn new(expiry: f64, payments: Vec<f64>, notional: f64, strike: f64) -> Result<Self> {
        if payments.is_empty() {
            return domain("swap schedule needs at least one payment date");
        }
        if !(expiry >= 0.0) {
            return domain(format!("negative expiry {expiry}"));
        }
        let mut prev = expiry;
        for &p in &payments {
            if !(p > prev) {
                return domain(format!("payment dates must increase strictly past {prev}, got {p}"));
            }
            prev = p;
        }
        if !(notional > 0.0) {
            return domain(format!("notional must be positive, got {notional}"));
        }
        if !(strike >= 0.0) || !strike.is_finite() {
            return domain(format!("strike must be finite and non-negative, got {strike}"));
        }
        Ok(Self {
            expiry,
            payments,
            notional,
            strike,
        })
    }

    /// Equally spaced payments every `1/frequency` years over `tenor`.
    pub fn regular(expiry: f64, tenor: f64, frequency: u32, notional: f64, strike: f64) -> Result<Self> {
        if frequency == 0 {
            return domain("payment frequency must be positive");
        }
        let n = (tenor * frequency as f64).round() as usize;
        if n == 0 || ((n as f64) / frequency as f64 - tenor).abs() > 1e-9 {
            return domain(format!("tenor {tenor} is not a whole number of periods at frequency {frequency}"));
        }
        let step = 1.0 / frequency as f64;
        let payments = (1..=n).map(|i| expiry + i as f64 * step).collect();
        Self::new(expiry, payments, notional, strike)
    }

    pub fn with_strike(&self, strike: f64) -> Result<Self> {
        Self::new(self.expiry, self.payments.clone(), self.notional, strike)
    }

    pub fn expiry(&self) -> f64 {
        self.expiry
    }
    pub fn payments(&self) -> &[f64] {
        &self.payments
    }
    pub fn notional(&self) -> f64 {
        self.notional
    }
    pub fn strike(&self) -> f64 {
        self.strike
    }
    pub fn last(&self) -> f64 {
        *self.payments.last().expect("non-empty by construction")
    }
    pub fn tenor(&self) -> f64 {
        self.last() - self.expiry
    }

    /// `(T_i, T_i - T_{i-1})` pairs.
    pub fn periods(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let starts = std::iter::once(self.expiry).chain(self.payments.iter().copied());
        self.payments.iter().zip(starts).map(|(&end, start)| (end, end - start))
    }
}

/// `F(0,t,T) = (P_t / P_T - 1) / (T - t)`.
pub fn forward_libor<C: Curve + ?Sized>(curve: &C, t: f64, maturity: f64) -> Result<f64> {
    let tau = maturity - t;
    if !(tau > 0.0) {
        return domain(format!("zero or negative accrual between {t} and {maturity}"));
    }
    Ok((curve.discount(t)? / curve.discount(maturity)? - 1.0) / tau)
}

/// `sum_i tau_i P_{0 T_i}`.
pub fn annuity<C: Curve + ?Sized>(curve: &C, sched: &SwapSchedule) -> Result<f64> {
    let mut total = 0.0;
    for (end, tau) in sched.periods() {
        total += tau * curve.discount(end)?;
    }
    Ok(total)
}

/// `S(0,t,T_n) = (P_t - P_{T_n}) / annuity`.
pub fn swap_rate<C: Curve + ?Sized>(curve: &C, sched: &SwapSchedule) -> Result<f64> {
    let a = annuity(curve, sched)?;
    Ok((curve.discount(sched.expiry())? - curve.discount(sched.last())?) / a)
}

pub fn atm_caplet_strike<C: Curve + ?Sized>(curve: &C, t: f64, maturity: f64) -> Result<f64> {
    forward_libor(curve, t, maturity)
}

pub fn atm_swaption_strike<C: Curve + ?Sized>(curve: &C, sched: &SwapSchedule) -> Result<f64> {
    swap_rate(curve, sched)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_curve_forward() {
        let r: f64 = 0.04;
        let curve = move |t: f64| (-r * t).exp();
        let f = forward_libor(&curve, 1.0, 1.5).unwrap();
        assert!((f - ((r * 0.5).exp() - 1.0) / 0.5).abs() < 1e-15);
        assert!(forward_libor(&curve, 1.0, 1.0).is_err());
    }

    #[test]
    fn single_period_swap_rate_is_forward() {
        let curve = |t: f64| (-0.03 * t - 0.002 * t * t).exp();
        let sched = SwapSchedule::new(2.0, vec![2.5], 1.0, 0.0).unwrap();
        let s = swap_rate(&curve, &sched).unwrap();
        let f = forward_libor(&curve, 2.0, 2.5).unwrap();
        assert!((s - f).abs() < 1e-15);
    }

    #[test]
    fn schedule_validation() {
        assert!(SwapSchedule::new(1.0, vec![], 1.0, 0.02).is_err());
        assert!(SwapSchedule::new(1.0, vec![2.0, 2.0], 1.0, 0.02).is_err());
        assert!(SwapSchedule::new(1.0, vec![2.0], 0.0, 0.02).is_err());
        let s = SwapSchedule::regular(1.0, 2.0, 2, 1.0, 0.02).unwrap();
        assert_eq!(s.payments(), &[1.5, 2.0, 2.5, 3.0]);
        let taus: Vec<f64> = s.periods().map(|(_, t)| t).collect();
        assert_eq!(taus, vec![0.5; 4]);
        assert!(SwapSchedule::regular(1.0, 0.3, 2, 1.0, 0.02).is_err());
    }
}
