//! Cross-check of the payoff polynomials against their textbook coefficient
//! tables.
//!
//! The pricing path builds payoff polynomials generically from Hermite
//! weights. This module rebuilds the same coefficients from the explicit
//! component-wise tables (`a`, `b` for second chaos, `c`, `d` for third
//! chaos) so any disagreement is reported term by term.

use std::fmt::Write as _;

use crate::chaos::{ChaosOrder, ChaosSpec};
use crate::error::{Error, Result};
use crate::poly::PayoffPoly;

use super::{put_poly, swaption_poly, SwapSchedule, ZSource};

/// Coefficients of the tables believed to drop the strike `K`.
pub const SUSPECTED_TYPOS: [&str; 2] = ["c0", "c1"];

/// Relative agreement treated as exact (rounding-order differences only).
pub const EXACT_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientCheck {
    pub name: String,
    pub derived: f64,
    pub tabulated: f64,
    /// `|derived - tabulated|` over the largest derived coefficient.
    pub rel_diff: f64,
    pub suspected_typo: bool,
}

impl CoefficientCheck {
    pub fn agrees(&self) -> bool {
        self.rel_diff <= EXACT_TOL
    }
}

#[derive(Debug, Clone)]
pub struct AuditReport {
    pub instrument: String,
    pub checks: Vec<CoefficientCheck>,
}

impl AuditReport {
    pub fn discrepancies(&self) -> impl Iterator<Item = &CoefficientCheck> {
        self.checks.iter().filter(|c| !c.agrees())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let status = match (c.agrees(), c.suspected_typo) {
                (true, _) => "match",
                (false, true) => "MISMATCH (suspected typo: strike K missing)",
                (false, false) => "MISMATCH",
            };
            let _ = writeln!(
                out,
                "{}\t{}\tderived={:.15e}\ttabulated={:.15e}\trel={:.3e}\t{}",
                self.instrument, c.name, c.derived, c.tabulated, c.rel_diff, status
            );
        }
        out
    }
}

fn build_report(instrument: String, prefix: char, derived: &PayoffPoly, tab: &PayoffPoly, third: bool) -> AuditReport {
    let scale = derived.max_abs_coeff().max(f64::MIN_POSITIVE);
    let n = if third { 5 } else { 3 };
    let checks = (0..n)
        .map(|k| {
            let name = format!("{prefix}{k}");
            CoefficientCheck {
                suspected_typo: SUSPECTED_TYPOS.contains(&name.as_str()),
                name,
                derived: derived.coeffs[k],
                tabulated: tab.coeffs[k],
                rel_diff: (derived.coeffs[k] - tab.coeffs[k]).abs() / scale,
            }
        })
        .collect();
    AuditReport { instrument, checks }
}

fn is_third(spec: &ChaosSpec) -> Result<bool> {
    match spec.order() {
        ChaosOrder::First => Err(Error::Unsupported(
            "first chaos payoffs are deterministic; there is no coefficient table".into(),
        )),
        ChaosOrder::ThirdOneVar => Ok(true),
        _ => Ok(false),
    }
}

/// Put polynomial exactly as tabulated (`a_k` or `c_k`).
pub fn tabulated_put_poly(spec: &ChaosSpec, t: f64, maturity: f64, strike: f64) -> Result<PayoffPoly> {
    let third = is_third(spec)?;
    let ft = spec.weights(t)?;
    let fm = spec.weights(maturity)?;
    let k = strike;
    let q = spec.state_variance(t);
    let sq = q.sqrt();
    let (a, b, c) = (fm[0] - k * ft[0], fm[1] - k * ft[1], fm[2] - k * ft[2]);
    if !third {
        return Ok(PayoffPoly::from_slice(&[-a + c * q, -b * sq, -c * q]));
    }
    let (d, e) = (fm[3] - k * ft[3], fm[4] - k * ft[4]);
    // the c0 and c1 rows are transcribed with the strike missing from the
    // highest-order terms
    let e_nok = fm[4] - ft[4];
    let d_nok = fm[3] - ft[3];
    Ok(PayoffPoly::from_slice(&[
        -a + c * q - 3.0 * e_nok * q * q,
        -b * sq + 3.0 * d_nok * q * sq,
        -c * q + 6.0 * e * q * q,
        -d * q * sq,
        -e * q * q,
    ]))
}

/// Swaption polynomial exactly as tabulated (`b_k` or `d_k`).
pub fn tabulated_swaption_poly(spec: &ChaosSpec, sched: &SwapSchedule) -> Result<PayoffPoly> {
    let third = is_third(spec)?;
    let t = sched.expiry();
    let ft = spec.weights(t)?;
    let fn_ = spec.weights(sched.last())?;
    let mut delta = [0.0; 5];
    for k in 0..5 {
        delta[k] = ft[k] - fn_[k];
    }
    for (end, tau) in sched.periods() {
        let fi = spec.weights(end)?;
        for k in 0..5 {
            delta[k] -= sched.strike() * tau * fi[k];
        }
    }
    let q = spec.state_variance(t);
    let sq = q.sqrt();
    let [da, db, dc, dd, de] = delta;
    if !third {
        return Ok(PayoffPoly::from_slice(&[da - dc * q, db * sq, dc * q]));
    }
    Ok(PayoffPoly::from_slice(&[
        da - dc * q + 3.0 * de * q * q,
        db * sq - 3.0 * dd * q * sq,
        dc * q - 6.0 * de * q * q,
        dd * q * sq,
        de * q * q,
    ]))
}

pub fn audit_put(spec: &ChaosSpec, t: f64, maturity: f64, strike: f64) -> Result<AuditReport> {
    let third = is_third(spec)?;
    let derived = put_poly(spec, t, maturity, strike)?;
    let tab = tabulated_put_poly(spec, t, maturity, strike)?;
    let prefix = if third { 'c' } else { 'a' };
    Ok(build_report(
        format!("put(t={t},T={maturity},K={strike})"),
        prefix,
        &derived,
        &tab,
        third,
    ))
}

pub fn audit_swaption(spec: &ChaosSpec, sched: &SwapSchedule) -> Result<AuditReport> {
    let third = is_third(spec)?;
    let derived = swaption_poly(spec, sched)?;
    let tab = tabulated_swaption_poly(spec, sched)?;
    let prefix = if third { 'd' } else { 'b' };
    Ok(build_report(
        format!(
            "swaption(t={},Tn={},n={},K={})",
            sched.expiry(),
            sched.last(),
            sched.payments().len(),
            sched.strike()
        ),
        prefix,
        &derived,
        &tab,
        third,
    ))
}

/// Logs every mismatching coefficient and returns the rendered report.
pub fn log_discrepancies(report: &AuditReport) -> String {
    for c in report.discrepancies() {
        log::warn!(
            "{} coefficient {} differs from its table: derived {:e}, tabulated {:e}",
            report.instrument,
            c.name,
            c.derived,
            c.tabulated
        );
    }
    report.render()
}
