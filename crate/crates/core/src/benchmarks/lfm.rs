//! Lognormal forward LIBOR model with the (b1, b2, b3, c1) volatility hump,
//! Schoenmakers-Coffey correlations and Rebonato's swaption volatility.

use super::svensson::SvenssonParams;
use crate::error::{domain, Error, Result};
use crate::expoly::tail_moment;
use crate::pricing::{annuity, black, forward_libor, swap_rate, Curve, SwapSchedule};

#[derive(Debug, Clone, PartialEq)]
pub struct LfmParams {
    /// `(b1, b2, b3, c1)`.
    pub vol: [f64; 4],
    pub rho_inf: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub curve: SvenssonParams,
    /// Tenor spacing of the correlation grid; forward `i` starts at
    /// `(i - 1) * step`.
    pub step: f64,
    /// Number of forwards `n` on the correlation grid.
    pub n_forwards: usize,
}

/// Schoenmakers-Coffey correlation between forwards `i` and `j` (1-based) of
/// an `n`-forward grid.
pub fn sc_correlation_raw(rho_inf: f64, eta1: f64, eta2: f64, i: usize, j: usize, n: usize) -> Result<f64> {
    sc_correlation_at(rho_inf, eta1, eta2, i as f64, j as f64, n)
}

/// Same formula at real-valued grid positions `i, j` in `[1, n]`.
pub fn sc_correlation_at(rho_inf: f64, eta1: f64, eta2: f64, fi: f64, fj: f64, n: usize) -> Result<f64> {
    if n < 4 {
        return domain(format!("Schoenmakers-Coffey correlation needs n >= 4 forwards, got {n}"));
    }
    let fn_ = n as f64;
    if !(fi >= 1.0 && fj >= 1.0 && fi <= fn_ && fj <= fn_) {
        return domain(format!("forward positions must lie in [1, {n}], got ({fi}, {fj})"));
    }
    let den = (fn_ - 2.0) * (fn_ - 3.0);
    let t1 = (fi * fi + fj * fj + fi * fj - 3.0 * fn_ * fi - 3.0 * fn_ * fj + 3.0 * fi + 3.0 * fj + 2.0 * fn_ * fn_
        - fn_
        - 4.0)
        / den;
    let t2 = (fi * fi + fj * fj + fi * fj - fn_ * fi - fn_ * fj - 3.0 * fi - 3.0 * fj + 3.0 * fn_ + 2.0) / den;
    let gap = (fj - fi).abs() / (fn_ - 1.0);
    Ok((-gap * (-rho_inf.ln() + eta1 * t1 - eta2 * t2)).exp())
}

pub fn sc_correlation(p: &LfmParams, i: usize, j: usize, n: usize) -> Result<f64> {
    sc_correlation_raw(p.rho_inf, p.eta1, p.eta2, i, j, n)
}

/// `int_0^t x^k e^{-lambda x} dx`.
fn lower_moment(k: u32, lambda: f64, t: f64) -> f64 {
    if lambda * t < 0.5 {
        let mut total = 0.0;
        let mut fact = 1.0;
        for m in 0..60 {
            if m > 0 {
                fact *= m as f64;
            }
            let p = (k + m + 1) as i32;
            let term = (-lambda).powi(m as i32) * t.powi(p) / (fact * p as f64);
            total += term;
            if term.abs() < 1e-18 * total.abs() {
                break;
            }
        }
        total
    } else {
        let full = (1..=k).map(f64::from).product::<f64>() / lambda.powi(k as i32 + 1);
        full - tail_moment(k as usize, lambda, t).expect("positive decay")
    }
}

impl LfmParams {
    pub fn new(
        vol: [f64; 4],
        rho_inf: f64,
        eta1: f64,
        eta2: f64,
        curve: SvenssonParams,
        step: f64,
        n_forwards: usize,
    ) -> Result<Self> {
        if !(vol[3] > 0.0) {
            return Err(Error::ParameterRejected(format!("LFM decay c1 must be positive, got {}", vol[3])));
        }
        if !(rho_inf > 0.0 && rho_inf < 1.0) {
            return Err(Error::ParameterRejected(format!("rho_inf must lie in (0, 1), got {rho_inf}")));
        }
        let cap = -rho_inf.ln();
        // without eta2 <= 3 eta1 the matrix can fail to be positive semidefinite
        let slack = 1e-12 * cap.max(1.0);
        if !(eta2 >= 0.0) || !(eta2 <= 3.0 * eta1 + slack) || !(eta1 + eta2 <= cap + slack) {
            return Err(Error::ParameterRejected(format!(
                "correlation needs 0 <= eta2 <= 3 eta1 and eta1 + eta2 <= -log rho_inf; got {eta1}, {eta2}, {rho_inf}"
            )));
        }
        if !(step > 0.0) {
            return Err(Error::ParameterRejected(format!("grid step must be positive, got {step}")));
        }
        Ok(Self {
            vol,
            rho_inf,
            eta1,
            eta2,
            curve,
            step,
            n_forwards,
        })
    }

    /// Grid position of the forward starting at `start`.
    pub fn position(&self, start: f64) -> f64 {
        1.0 + start / self.step
    }

    /// `sigma_i(s)` for a forward whose period starts at `anchor`.
    pub fn sigma(&self, anchor: f64, s: f64) -> f64 {
        let [b1, b2, b3, c1] = self.vol;
        let u = anchor - s;
        b1 + (b2 + b3 * u) * (-c1 * u).exp()
    }

    /// `int_0^t sigma_i sigma_j ds` for forwards starting at `a_i, a_j >= t`.
    pub fn integrated_covariance(&self, a_i: f64, a_j: f64, t: f64) -> f64 {
        let [b1, b2, b3, c1] = self.vol;
        let coef = |a: f64| {
            let d = a - t;
            let e = (-c1 * d).exp();
            ((b2 + b3 * d) * e, b3 * e)
        };
        let (pi, qi) = coef(a_i);
        let (pj, qj) = coef(a_j);
        b1 * b1 * t
            + b1 * ((pi + pj) * lower_moment(0, c1, t) + (qi + qj) * lower_moment(1, c1, t))
            + pi * pj * lower_moment(0, 2.0 * c1, t)
            + (pi * qj + pj * qi) * lower_moment(1, 2.0 * c1, t)
            + qi * qj * lower_moment(2, 2.0 * c1, t)
    }

    /// Black volatility of the caplet on `[t, T]`.
    pub fn caplet_vol(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Ok(0.0);
        }
        let var = self.integrated_covariance(t, t, t);
        if !(var >= 0.0) {
            return Err(Error::ParameterRejected(format!("negative integrated variance {var} at t = {t}")));
        }
        Ok((var / t).sqrt())
    }

    pub fn caplet(&self, t: f64, maturity: f64, notional: f64, strike: f64) -> Result<f64> {
        let tau = maturity - t;
        if !(tau > 0.0) || !(t >= 0.0) {
            return domain(format!("caplet needs 0 <= t < T, got {t}, {maturity}"));
        }
        let f = forward_libor(&self.curve, t, maturity)?;
        let v = self.caplet_vol(t)?;
        Ok(notional * self.curve.discount(maturity) * tau * black(strike, f, v * t.sqrt()))
    }

    /// Caplet on grid forward `i`, the period `[(i-1) step, i step]`.
    pub fn caplet_on_grid(&self, i: usize, notional: f64, strike: f64) -> Result<f64> {
        if i == 0 || i > self.n_forwards {
            return domain(format!("grid forward index {i} out of range 1..={}", self.n_forwards));
        }
        self.caplet((i - 1) as f64 * self.step, i as f64 * self.step, notional, strike)
    }

    /// Rebonato approximation of the swaption Black volatility.
    pub fn rebonato_swaption_vol(&self, sched: &SwapSchedule) -> Result<f64> {
        let t = sched.expiry();
        if !(t > 0.0) {
            return Ok(0.0);
        }
        let a = annuity(&self.curve, sched)?;
        let s = swap_rate(&self.curve, sched)?;
        let mut legs = Vec::new();
        for (end, tau) in sched.periods() {
            let start = end - tau;
            let w = tau * self.curve.discount(end) / a;
            let f = forward_libor(&self.curve, start, end)?;
            legs.push((self.position(start), start, w * f));
        }
        let mut var = 0.0;
        for (ii, &(i, ai, wi)) in legs.iter().enumerate() {
            for (jj, &(j, aj, wj)) in legs.iter().enumerate() {
                let rho = if ii == jj {
                    1.0
                } else {
                    sc_correlation_at(self.rho_inf, self.eta1, self.eta2, i, j, self.n_forwards)?
                };
                var += wi * wj * rho * self.integrated_covariance(ai, aj, t);
            }
        }
        var /= s * s * t;
        if !(var >= 0.0) {
            return Err(Error::ParameterRejected(format!("negative swaption variance {var}")));
        }
        Ok(var.sqrt())
    }

    pub fn swaption(&self, sched: &SwapSchedule) -> Result<f64> {
        let t = sched.expiry();
        let a = annuity(&self.curve, sched)?;
        let s = swap_rate(&self.curve, sched)?;
        let v = self.rebonato_swaption_vol(sched)?;
        Ok(sched.notional() * a * black(sched.strike().max(f64::MIN_POSITIVE), s, v * t.sqrt()))
    }
}

impl Curve for LfmParams {
    fn discount(&self, maturity: f64) -> Result<f64> {
        Curve::discount(&self.curve, maturity)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(vol: [f64; 4]) -> LfmParams {
        LfmParams::new(
            vol,
            0.5,
            0.1,
            0.2,
            SvenssonParams::new(0.045, -0.01, 0.004, 0.002, 0.6, 0.2).unwrap(),
            0.5,
            20,
        )
        .unwrap()
    }

    #[test]
    fn correlation_edges() {
        let p = params([0.2, 0.0, 0.0, 1.0]);
        assert_eq!(sc_correlation(&p, 3, 3, 10).unwrap(), 1.0);
        assert!((sc_correlation(&p, 1, 10, 10).unwrap() - 0.5).abs() < 1e-15);
        assert!(sc_correlation(&p, 1, 2, 3).is_err());
        let r = sc_correlation_raw(0.5, 0.0, 0.0, 2, 7, 10).unwrap();
        assert!((r - 0.5f64.powf(5.0 / 9.0)).abs() < 1e-15);
        assert_eq!(
            sc_correlation(&p, 2, 6, 10).unwrap(),
            sc_correlation(&p, 6, 2, 10).unwrap()
        );
    }

    #[test]
    fn flat_vol_caplet() {
        let p = params([0.2, 0.0, 0.0, 1.0]);
        assert!((p.caplet_vol(2.0).unwrap() - 0.2).abs() < 1e-14);
    }

    #[test]
    fn covariance_matches_midpoint_sum() {
        let p = params([0.1, 0.08, -0.05, 0.7]);
        let (ai, aj, t) = (2.0, 3.5, 2.0);
        let n = 200_000;
        let h = t / n as f64;
        let riemann: f64 = (0..n)
            .map(|k| {
                let s = (k as f64 + 0.5) * h;
                p.sigma(ai, s) * p.sigma(aj, s) * h
            })
            .sum();
        assert!((p.integrated_covariance(ai, aj, t) - riemann).abs() < 1e-9);
    }

    #[test]
    fn single_period_rebonato_is_caplet_vol() {
        let p = params([0.1, 0.08, -0.05, 0.7]);
        let s = SwapSchedule::new(1.5, vec![2.0], 1.0, 0.03).unwrap();
        assert!((p.rebonato_swaption_vol(&s).unwrap() - p.caplet_vol(1.5).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn invalid_correlation_rejected() {
        let c = SvenssonParams::flat(0.03);
        assert!(LfmParams::new([0.1, 0.0, 0.0, 1.0], 0.5, 0.5, 0.5, c, 0.5, 20).is_err());
        assert!(LfmParams::new([0.1, 0.0, 0.0, 1.0], 0.5, 0.3, -0.1, c, 0.5, 20).is_err());
        assert!(LfmParams::new([0.1, 0.0, 0.0, 1.0], 0.5, 0.05, 0.2, c, 0.5, 20).is_err());
    }
}
