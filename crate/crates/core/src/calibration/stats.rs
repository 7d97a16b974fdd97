//! Fit statistics: Cairns likelihood, percentage errors, Diebold-Mariano,
//! AIC and model selection frequencies.

use crate::error::{domain, Error, Result};
use crate::market::BondQuote;
use crate::pricing::Curve;

/// Measurement error model for log bond prices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorModelParams {
    /// `sigma_0(p) = 1 / (sigma0_scale p)`.
    pub sigma0_scale: f64,
    pub sigma_d: f64,
    pub sigma_inf: f64,
}

impl Default for ErrorModelParams {
    fn default() -> Self {
        Self {
            sigma0_scale: 3200.0,
            sigma_d: 0.0005,
            sigma_inf: 0.001,
        }
    }
}

impl ErrorModelParams {
    pub fn sigma0(&self, price: f64) -> f64 {
        1.0 / (self.sigma0_scale * price)
    }
}

/// `nu^2(p, d) = s0^2 (s_inf^2 d^2 b + 1) / (s0^2 d^2 b + 1)` with
/// `b = s_d^2 / (s0^2 (s_inf^2 - s0^2))`.
pub fn nu_squared(price: f64, duration: f64, em: &ErrorModelParams) -> Result<f64> {
    if !(price > 0.0) || !(duration > 0.0) {
        return domain(format!("nu^2 needs p > 0 and d > 0, got {price}, {duration}"));
    }
    let s0 = em.sigma0(price);
    let s02 = s0 * s0;
    let sinf2 = em.sigma_inf * em.sigma_inf;
    if s0 >= em.sigma_inf {
        return domain(format!(
            "sigma_0({price}) = {s0} is not below sigma_inf = {}; b(p) undefined",
            em.sigma_inf
        ));
    }
    let b = em.sigma_d * em.sigma_d / (s02 * (sinf2 - s02));
    let d2b = duration * duration * b;
    Ok(s02 * (sinf2 * d2b + 1.0) / (s02 * d2b + 1.0))
}

/// `L = -1/2 sum [log(2 pi nu^2) + (log P - log Pbar)^2 / nu^2]`.
///
/// A non-positive model price, or one where `nu^2` is undefined, gives
/// `-inf`.
pub fn cairns_loglik<C: Curve + ?Sized>(curve: &C, quotes: &[BondQuote], em: &ErrorModelParams) -> f64 {
    loglik_with(curve, quotes, |p, d| nu_squared(p, d, em).ok())
}

/// [`cairns_loglik`] with `nu^2` continued by `sigma_inf^2` wherever
/// `sigma_0(p) >= sigma_inf`.
///
/// `nu^2` equals `sigma_inf^2` on that boundary for every duration, so the
/// continuation is continuous. Optimizers use it to leave the region of low
/// model prices instead of stalling on `-inf`.
pub fn cairns_loglik_extended<C: Curve + ?Sized>(curve: &C, quotes: &[BondQuote], em: &ErrorModelParams) -> f64 {
    loglik_with(curve, quotes, |p, d| {
        if em.sigma0(p) >= em.sigma_inf {
            Some(em.sigma_inf * em.sigma_inf)
        } else {
            nu_squared(p, d, em).ok()
        }
    })
}

fn loglik_with<C: Curve + ?Sized>(curve: &C, quotes: &[BondQuote], nu2: impl Fn(f64, f64) -> Option<f64>) -> f64 {
    let mut total = 0.0;
    for q in quotes {
        let p = match curve.discount(q.maturity) {
            Ok(p) if p > 0.0 && p.is_finite() => p,
            _ => return f64::NEG_INFINITY,
        };
        let Some(nu2) = nu2(p, q.duration) else {
            return f64::NEG_INFINITY;
        };
        let r = p.ln() - q.price.ln();
        total += (2.0 * std::f64::consts::PI * nu2).ln() + r * r / nu2;
    }
    -0.5 * total
}

/// Square root of the mean squared relative error.
pub fn rmspe(fitted: &[f64], observed: &[f64]) -> Result<f64> {
    Ok((sum_sq_rel(fitted, observed)? / fitted.len() as f64).sqrt())
}

/// `sum ((fitted - observed) / observed)^2`.
pub fn sum_sq_rel(fitted: &[f64], observed: &[f64]) -> Result<f64> {
    if fitted.len() != observed.len() {
        return domain(format!("series lengths differ: {} vs {}", fitted.len(), observed.len()));
    }
    if fitted.is_empty() {
        return domain("empty series");
    }
    let mut s = 0.0;
    for (f, o) in fitted.iter().zip(observed) {
        if *o == 0.0 {
            return domain("observed value is zero");
        }
        let r = (f - o) / o;
        s += r * r;
    }
    Ok(s)
}

pub fn yield_e(fitted: &[f64], observed: &[f64]) -> Result<f64> {
    rmspe(fitted, observed)
}

pub fn cpl_e(fitted: &[f64], observed: &[f64]) -> Result<f64> {
    rmspe(fitted, observed)
}

pub fn swp_e(fitted: &[f64], observed: &[f64]) -> Result<f64> {
    rmspe(fitted, observed)
}

pub fn total_e1(yield_e: f64, cpl_e: f64) -> f64 {
    yield_e.hypot(cpl_e)
}

pub fn total_e2(yield_e: f64, swp_e: f64) -> f64 {
    yield_e.hypot(swp_e)
}

pub fn total_e3(yield_e: f64, cpl_e: f64, swp_e: f64) -> f64 {
    (yield_e * yield_e + cpl_e * cpl_e + swp_e * swp_e).sqrt()
}

pub const DEFAULT_DM_LAG: usize = 13;

/// Diebold-Mariano statistic on `d_t = loss_baseline_t - loss_model_t` with a
/// Bartlett long-run variance; positive values favour the model.
pub fn dm_statistic(loss_model: &[f64], loss_baseline: &[f64], lag: usize) -> Result<f64> {
    let n = loss_model.len();
    if n != loss_baseline.len() {
        return domain(format!("loss series lengths differ: {n} vs {}", loss_baseline.len()));
    }
    if n <= lag {
        return domain(format!("DM needs more than {lag} observations, got {n}"));
    }
    let d: Vec<f64> = loss_baseline.iter().zip(loss_model).map(|(b, m)| b - m).collect();
    let nf = n as f64;
    let mean = d.iter().sum::<f64>() / nf;
    let dev: Vec<f64> = d.iter().map(|v| v - mean).collect();
    let autocov = |k: usize| dev[k..].iter().zip(&dev[..n - k]).map(|(a, b)| a * b).sum::<f64>() / nf;
    let mut lrv = autocov(0);
    for k in 1..=lag {
        lrv += 2.0 * (1.0 - k as f64 / (lag as f64 + 1.0)) * autocov(k);
    }
    let scale = d.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if !(lrv > 1e-28 * scale * scale) || !lrv.is_finite() {
        return Err(Error::UndefinedStatistic(
            "loss differential has zero long-run variance".into(),
        ));
    }
    Ok(mean / (lrv / nf).sqrt())
}

/// `n log(RSS / n) + 2k`; a zero RSS yields `-inf` with `zero_rss` set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aic {
    pub value: f64,
    pub zero_rss: bool,
}

pub fn aic(rss: f64, n: usize, k: usize) -> Result<Aic> {
    if n == 0 {
        return domain("AIC needs n > 0");
    }
    if !(rss >= 0.0) {
        return domain(format!("AIC needs RSS >= 0, got {rss}"));
    }
    if rss == 0.0 {
        return Ok(Aic {
            value: f64::NEG_INFINITY,
            zero_rss: true,
        });
    }
    let nf = n as f64;
    Ok(Aic {
        value: nf * (rss / nf).ln() + 2.0 * k as f64,
        zero_rss: false,
    })
}

/// Model selection relative frequencies.
///
/// `aics[m][j]` is the AIC of model `m` on date `j`. A date is won by the
/// model with the smallest AIC; ties go to the later model, so for two models
/// the first one scores only when strictly smaller.
pub fn msrf(aics: &[Vec<f64>]) -> Result<Vec<f64>> {
    let Some(first) = aics.first() else {
        return domain("MSRF needs at least one model");
    };
    let n = first.len();
    if n == 0 || aics.iter().any(|a| a.len() != n) {
        return domain("MSRF needs equal, non-empty AIC series");
    }
    let mut wins = vec![0usize; aics.len()];
    for j in 0..n {
        let mut best = 0;
        for m in 1..aics.len() {
            if aics[m][j] <= aics[best][j] {
                best = m;
            }
        }
        wins[best] += 1;
    }
    Ok(wins.into_iter().map(|w| w as f64 / n as f64).collect())
}
