//! Hull-White short rate `dr = (theta(t) - kappa r) dt + eta dW` fitted to a
//! Svensson initial curve.
//!
//! Bond prices are written through the initial curve, so `theta` is never
//! formed. Swaptions use Jamshidian's decomposition into zero-bond puts.

use super::svensson::SvenssonParams;
use crate::error::{domain, Error, Result};
use crate::normal::cdf;
use crate::pricing::{Curve, SwapSchedule};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HullWhiteParams {
    pub kappa: f64,
    pub eta: f64,
    pub curve: SvenssonParams,
}

impl HullWhiteParams {
    pub fn new(kappa: f64, eta: f64, curve: SvenssonParams) -> Result<Self> {
        if !(kappa > 0.0) || !(eta >= 0.0) {
            return Err(Error::ParameterRejected(format!(
                "Hull-White needs kappa > 0 and eta >= 0, got {kappa}, {eta}"
            )));
        }
        Ok(Self { kappa, eta, curve })
    }

    /// `B(t,T) = (1 - e^{-kappa (T-t)}) / kappa`.
    pub fn b(&self, t: f64, maturity: f64) -> f64 {
        -(-self.kappa * (maturity - t)).exp_m1() / self.kappa
    }

    /// `A(t,T)` with `P(t,T) = A(t,T) exp(-B(t,T) r_t)`.
    pub fn a(&self, t: f64, maturity: f64) -> f64 {
        let b = self.b(t, maturity);
        let k = self.kappa;
        let var = self.eta * self.eta / (4.0 * k) * -(-2.0 * k * t).exp_m1();
        self.curve.discount(maturity) / self.curve.discount(t) * (b * self.curve.forward(t) - var * b * b).exp()
    }

    /// Standard deviation of `log P(t,T)` seen from zero.
    fn sigma_p(&self, t: f64, maturity: f64) -> f64 {
        let k = self.kappa;
        self.eta * (-(-2.0 * k * t).exp_m1() / (2.0 * k)).sqrt() * self.b(t, maturity)
    }

    /// Time-0 put with expiry `t` on the `T`-bond, strike `x`.
    pub fn zero_bond_put(&self, t: f64, maturity: f64, x: f64) -> f64 {
        let p_t = self.curve.discount(t);
        let p_m = self.curve.discount(maturity);
        let sp = self.sigma_p(t, maturity);
        if !(sp > 0.0) {
            return (x * p_t - p_m).max(0.0);
        }
        let h = (p_m / (p_t * x)).ln() / sp + 0.5 * sp;
        x * p_t * cdf(-h + sp) - p_m * cdf(-h)
    }

    pub fn caplet(&self, t: f64, maturity: f64, notional: f64, strike: f64) -> Result<f64> {
        let tau = maturity - t;
        if !(tau > 0.0) || !(t >= 0.0) {
            return domain(format!("caplet needs 0 <= t < T, got {t}, {maturity}"));
        }
        let m = 1.0 + strike * tau;
        Ok(notional * m * self.zero_bond_put(t, maturity, 1.0 / m))
    }

    /// Payer swaption as a put on the coupon bond paying `K tau_i` and the
    /// notional at `T_n`.
    pub fn swaption(&self, sched: &SwapSchedule) -> Result<f64> {
        let t = sched.expiry();
        let k = sched.strike();
        let mut flows: Vec<(f64, f64)> = sched.periods().map(|(end, tau)| (end, k * tau)).collect();
        flows.last_mut().expect("non-empty").1 += 1.0;
        let legs: Vec<(f64, f64, f64)> = flows
            .iter()
            .map(|&(end, c)| (c, self.a(t, end), self.b(t, end)))
            .collect();
        let value = |r: f64| legs.iter().map(|(c, a, b)| c * a * (-b * r).exp()).sum::<f64>() - 1.0;
        let r_star = solve_decreasing(value)?;
        let mut total = 0.0;
        for (&(end, c), (_, a, b)) in flows.iter().zip(&legs) {
            let x = a * (-b * r_star).exp();
            total += c * self.zero_bond_put(t, end, x);
        }
        Ok(sched.notional() * total)
    }
}

/// Root of a strictly decreasing function by bracketing then bisection and
/// secant steps.
fn solve_decreasing(f: impl Fn(f64) -> f64) -> Result<f64> {
    let (mut lo, mut hi) = (-0.5, 0.5);
    let mut grow = 0;
    while f(lo) < 0.0 {
        lo = 2.0 * lo - 1.0;
        grow += 1;
        if grow > 60 {
            return Err(Error::Domain("Jamshidian rate not bracketed".into()));
        }
    }
    while f(hi) > 0.0 {
        hi = 2.0 * hi + 1.0;
        grow += 1;
        if grow > 120 {
            return Err(Error::Domain("Jamshidian rate not bracketed".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 * (1.0 + mid.abs()) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

impl Curve for HullWhiteParams {
    fn discount(&self, maturity: f64) -> Result<f64> {
        Curve::discount(&self.curve, maturity)
    }
}
