//! Rational lognormal model `Z_tT = G1(T) M_t + G2(T)` with
//! `M_t = exp(eta W_t - eta^2 t / 2)`.
//!
//! With `g1 = -k1 P' P^k2` and `g2 = -P' (1 - k1 P^k2)` the tail integrals
//! are `G1 = k1 P^{k2+1} / (k2+1)` and `G2 = P - G1`, so `Z_00 = 1`.

use super::svensson::SvenssonParams;
use crate::error::{domain, Error, Result};
use crate::normal::cdf;
use crate::pricing::{Curve, SwapSchedule};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatLogParams {
    pub k1: f64,
    pub k2: f64,
    pub eta: f64,
    pub curve: SvenssonParams,
}

/// `E[(x M + y)^+]` for `M` lognormal with `E[M] = 1`, `Var log M = s^2`.
pub fn expected_linear_positive_part(x: f64, y: f64, s: f64) -> f64 {
    if x == 0.0 || !(s > 0.0) {
        return (x + y).max(0.0);
    }
    match (x > 0.0, y >= 0.0) {
        (true, true) => x + y,
        (false, false) => 0.0,
        (true, false) => {
            let d1 = (x / -y).ln() / s + 0.5 * s;
            x * cdf(d1) + y * cdf(d1 - s)
        }
        (false, true) => {
            let d1 = (-x / y).ln() / s + 0.5 * s;
            y * cdf(-(d1 - s)) + x * cdf(-d1)
        }
    }
}

impl RatLogParams {
    pub fn new(k1: f64, k2: f64, eta: f64, curve: SvenssonParams) -> Result<Self> {
        if !(k2 > -1.0) {
            return Err(Error::ParameterRejected(format!(
                "rational lognormal needs k2 > -1, got {k2}"
            )));
        }
        Ok(Self { k1, k2, eta, curve })
    }

    pub fn g1_tail(&self, t: f64) -> f64 {
        self.k1 * self.curve.discount(t).powf(self.k2 + 1.0) / (self.k2 + 1.0)
    }

    pub fn g2_tail(&self, t: f64) -> f64 {
        self.curve.discount(t) - self.g1_tail(t)
    }

    /// `g1, g2 >= 0` on a grid up to `horizon`.
    pub fn check_nonnegative(&self, horizon: f64) -> Result<()> {
        for i in 0..=400 {
            let t = horizon * i as f64 / 400.0;
            let p = self.curve.discount(t);
            let f = self.curve.forward(t);
            let g1 = self.k1 * f * p.powf(self.k2 + 1.0);
            let g2 = f * p * (1.0 - self.k1 * p.powf(self.k2));
            if g1 < 0.0 || g2 < 0.0 {
                return Err(Error::ParameterRejected(format!(
                    "rational lognormal density negative at t = {t} (g1 = {g1}, g2 = {g2})"
                )));
            }
        }
        Ok(())
    }

    /// `(G1(T) M + G2(T)) / (G1(t) M + G2(t))`.
    pub fn bond_price(&self, t: f64, maturity: f64, m: f64) -> f64 {
        (self.g1_tail(maturity) * m + self.g2_tail(maturity)) / (self.g1_tail(t) * m + self.g2_tail(t))
    }

    fn option(&self, t: f64, legs: &[(f64, f64)]) -> f64 {
        let (mut x, mut y) = (0.0, 0.0);
        for &(w, d) in legs {
            x += w * self.g1_tail(d);
            y += w * self.g2_tail(d);
        }
        expected_linear_positive_part(x, y, self.eta.abs() * t.sqrt())
    }

    pub fn caplet(&self, t: f64, maturity: f64, notional: f64, strike: f64) -> Result<f64> {
        let tau = maturity - t;
        if !(tau > 0.0) || !(t >= 0.0) {
            return domain(format!("caplet needs 0 <= t < T, got {t}, {maturity}"));
        }
        Ok(notional * self.option(t, &[(1.0, t), (-(1.0 + strike * tau), maturity)]))
    }

    pub fn swaption(&self, sched: &SwapSchedule) -> Result<f64> {
        let mut legs = vec![(1.0, sched.expiry()), (-1.0, sched.last())];
        legs.extend(sched.periods().map(|(end, tau)| (-sched.strike() * tau, end)));
        Ok(sched.notional() * self.option(sched.expiry(), &legs))
    }
}

impl Curve for RatLogParams {
    fn discount(&self, maturity: f64) -> Result<f64> {
        Curve::discount(&self.curve, maturity)
    }
}
