//! Log-linear discount curves and bootstrapping from money-market, futures
//! and swap quotes.

use crate::error::{domain, Error, Result};
use crate::pricing::Curve;

/// Discount factors interpolated linearly in `log P`, extended past the last
/// pillar at the last segment's forward rate.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscountCurve {
    times: Vec<f64>,
    log_df: Vec<f64>,
}

impl DiscountCurve {
    /// Pillars `(t, P(t))`; `P(0) = 1` is added.
    pub fn new(pillars: &[(f64, f64)]) -> Result<Self> {
        let mut times = vec![0.0];
        let mut log_df = vec![0.0];
        for &(t, p) in pillars {
            if !(t > *times.last().unwrap()) {
                return domain(format!("curve pillars must increase strictly, got {t}"));
            }
            if !(p > 0.0) {
                return domain(format!("non-positive discount factor {p} at {t}"));
            }
            times.push(t);
            log_df.push(p.ln());
        }
        if times.len() < 2 {
            return domain("curve needs at least one pillar");
        }
        Ok(Self { times, log_df })
    }

    pub fn from_zero_yields(yields: &[(f64, f64)]) -> Result<Self> {
        let pillars: Vec<(f64, f64)> = yields.iter().map(|&(t, y)| (t, (-y * t).exp())).collect();
        Self::new(&pillars)
    }

    pub fn pillars(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times.iter().zip(&self.log_df).skip(1).map(|(t, l)| (*t, l.exp()))
    }

    pub fn last_time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    fn log_discount(&self, t: f64) -> f64 {
        let n = self.times.len();
        if n == 1 {
            return 0.0;
        }
        let k = match self.times.partition_point(|&x| x <= t) {
            0 => 1,
            k if k >= n => n - 1,
            k => k,
        };
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let (l0, l1) = (self.log_df[k - 1], self.log_df[k]);
        if t == t1 {
            return l1;
        }
        l0 + (l1 - l0) * (t - t0) / (t1 - t0)
    }

    pub fn df(&self, t: f64) -> f64 {
        self.log_discount(t).exp()
    }

    pub fn zero_yield(&self, t: f64) -> f64 {
        -self.log_discount(t) / t
    }

    fn push(&mut self, t: f64, p: f64) {
        self.times.push(t);
        self.log_df.push(p.ln());
    }
}

impl Curve for DiscountCurve {
    fn discount(&self, maturity: f64) -> Result<f64> {
        if maturity < 0.0 {
            return domain(format!("negative maturity {maturity}"));
        }
        Ok(self.df(maturity))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstrumentKind {
    /// Simple-rate deposit from `start` to `end`.
    Deposit,
    /// Forward rate over `[start, end]`; no convexity adjustment.
    Future,
    /// Par swap from `start` to `end`.
    Swap,
}

impl std::str::FromStr for InstrumentKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "deposit" | "libor" | "cash" => Ok(Self::Deposit),
            "future" | "futures" | "fra" => Ok(Self::Future),
            "swap" => Ok(Self::Swap),
            other => Err(Error::Ingestion(format!("unknown curve instrument kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveInstrument {
    pub kind: InstrumentKind,
    pub start: f64,
    pub end: f64,
    pub rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapOptions {
    /// Fixed-leg payments per year for swaps.
    pub swap_frequency: u32,
}

impl Default for BootstrapOptions {
    fn default() -> Self {
        Self { swap_frequency: 1 }
    }
}

fn swap_dates(inst: &CurveInstrument, freq: u32) -> Vec<f64> {
    let step = 1.0 / freq as f64;
    let n = ((inst.end - inst.start) / step).round().max(1.0) as usize;
    (1..=n)
        .map(|i| if i == n { inst.end } else { inst.start + i as f64 * step })
        .collect()
}

/// Swap leg value for `log P(end) = x` with dates beyond the last pillar
/// interpolated towards `(end, x)`.
fn swap_residual(curve: &DiscountCurve, inst: &CurveInstrument, dates: &[f64], x: f64) -> f64 {
    let last = curve.last_time();
    let l_last = *curve.log_df.last().unwrap();
    let lp = |t: f64| {
        if t <= last {
            curve.log_discount(t)
        } else {
            l_last + (x - l_last) * (t - last) / (inst.end - last)
        }
    };
    let mut fixed = 0.0;
    let mut prev = inst.start;
    for &d in dates {
        fixed += (d - prev) * lp(d).exp();
        prev = d;
    }
    lp(inst.start).exp() - x.exp() - inst.rate * fixed
}

fn price_instrument(curve: &DiscountCurve, inst: &CurveInstrument, freq: u32) -> f64 {
    match inst.kind {
        InstrumentKind::Deposit | InstrumentKind::Future => {
            (curve.df(inst.start) / curve.df(inst.end) - 1.0) / (inst.end - inst.start)
        }
        InstrumentKind::Swap => {
            let dates = swap_dates(inst, freq);
            let mut a = 0.0;
            let mut prev = inst.start;
            for &d in &dates {
                a += (d - prev) * curve.df(d);
                prev = d;
            }
            (curve.df(inst.start) - curve.df(inst.end)) / a
        }
    }
}

/// Rate implied by `curve` for `inst`, for re-pricing checks.
pub fn implied_rate(curve: &DiscountCurve, inst: &CurveInstrument, opts: &BootstrapOptions) -> f64 {
    price_instrument(curve, inst, opts.swap_frequency)
}

/// Builds pillars at each instrument end date so every input reprices
/// exactly.
pub fn bootstrap_curve(
    deposits: &[CurveInstrument],
    futures: &[CurveInstrument],
    swaps: &[CurveInstrument],
    opts: &BootstrapOptions,
) -> Result<DiscountCurve> {
    let mut all: Vec<CurveInstrument> = deposits.iter().chain(futures).chain(swaps).copied().collect();
    if all.is_empty() {
        return Err(Error::Ingestion("no curve instruments supplied".into()));
    }
    for i in &all {
        if !(i.end > i.start) || i.start < 0.0 || !i.rate.is_finite() {
            return Err(Error::Ingestion(format!("malformed instrument {i:?}")));
        }
    }
    all.sort_by(|a, b| a.end.total_cmp(&b.end));
    let clashes: Vec<String> = all
        .windows(2)
        .filter(|w| (w[1].end - w[0].end).abs() < 1e-12)
        .map(|w| format!("{:?}@{} vs {:?}@{}", w[0].kind, w[0].end, w[1].kind, w[1].end))
        .collect();
    if !clashes.is_empty() {
        return Err(Error::Ingestion(format!(
            "overlapping curve quotes at the same maturity: {}",
            clashes.join("; ")
        )));
    }
    if opts.swap_frequency == 0 {
        return Err(Error::Ingestion("swap frequency must be positive".into()));
    }

    let mut curve = DiscountCurve {
        times: vec![0.0],
        log_df: vec![0.0],
    };
    for inst in &all {
        let last = curve.last_time();
        if inst.start > last + 1e-12 && inst.kind != InstrumentKind::Future {
            return Err(Error::Ingestion(format!(
                "{:?} starting at {} leaves a gap after the last pillar {last}",
                inst.kind, inst.start
            )));
        }
        let p_end = match inst.kind {
            InstrumentKind::Deposit | InstrumentKind::Future => {
                let p_start = if inst.start <= last {
                    curve.df(inst.start)
                } else {
                    // forward start past the curve: flat extension
                    curve.df(inst.start)
                };
                p_start / (1.0 + inst.rate * (inst.end - inst.start))
            }
            InstrumentKind::Swap => {
                let dates = swap_dates(inst, opts.swap_frequency);
                let (mut lo, mut hi) = (-50.0 * inst.end - 10.0, 5.0);
                if swap_residual(&curve, inst, &dates, lo) < 0.0 || swap_residual(&curve, inst, &dates, hi) > 0.0 {
                    return Err(Error::Ingestion(format!("swap at {} cannot be bootstrapped", inst.end)));
                }
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if swap_residual(&curve, inst, &dates, mid) > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo < 1e-16 {
                        break;
                    }
                }
                (0.5 * (lo + hi)).exp()
            }
        };
        if !(p_end > 0.0) || !p_end.is_finite() {
            return Err(Error::Ingestion(format!("instrument at {} implies a non-positive discount factor", inst.end)));
        }
        curve.push(inst.end, p_end);
    }
    // consistency of earlier quotes with later pillars (futures starting
    // beyond the curve use the extension, which later pillars override)
    let offenders: Vec<String> = all
        .iter()
        .filter(|i| (price_instrument(&curve, i, opts.swap_frequency) - i.rate).abs() > 1e-10)
        .map(|i| format!("{:?}[{}, {}]", i.kind, i.start, i.end))
        .collect();
    if !offenders.is_empty() {
        return Err(Error::Ingestion(format!(
            "inconsistent overlapping quotes: {}",
            offenders.join(", ")
        )));
    }
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(kind: InstrumentKind, start: f64, end: f64, rate: f64) -> CurveInstrument {
        CurveInstrument { kind, start, end, rate }
    }

    #[test]
    fn single_deposit() {
        let c = bootstrap_curve(&[inst(InstrumentKind::Deposit, 0.0, 0.5, 0.04)], &[], &[], &Default::default()).unwrap();
        assert!((c.df(0.5) - 1.0 / 1.02).abs() < 1e-15);
    }

    #[test]
    fn empty_is_error() {
        assert!(bootstrap_curve(&[], &[], &[], &Default::default()).is_err());
    }

    #[test]
    fn full_strip_reprices() {
        let deps = [
            inst(InstrumentKind::Deposit, 0.0, 0.25, 0.041),
            inst(InstrumentKind::Deposit, 0.0, 0.5, 0.042),
        ];
        let futs = [
            inst(InstrumentKind::Future, 0.5, 0.75, 0.043),
            inst(InstrumentKind::Future, 0.75, 1.0, 0.044),
        ];
        let swaps = [
            inst(InstrumentKind::Swap, 0.0, 2.0, 0.045),
            inst(InstrumentKind::Swap, 0.0, 3.0, 0.046),
            inst(InstrumentKind::Swap, 0.0, 5.0, 0.047),
        ];
        let opts = BootstrapOptions::default();
        let c = bootstrap_curve(&deps, &futs, &swaps, &opts).unwrap();
        for i in deps.iter().chain(&futs).chain(&swaps) {
            assert!((implied_rate(&c, i, &opts) - i.rate).abs() < 1e-10, "{i:?}");
        }
    }

    #[test]
    fn clashing_maturities_are_listed() {
        let deps = [inst(InstrumentKind::Deposit, 0.0, 1.0, 0.04)];
        let swaps = [inst(InstrumentKind::Swap, 0.0, 1.0, 0.05)];
        match bootstrap_curve(&deps, &[], &swaps, &Default::default()) {
            Err(Error::Ingestion(msg)) => assert!(msg.contains("Deposit") && msg.contains("Swap")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn interpolation_is_log_linear() {
        let c = DiscountCurve::new(&[(1.0, 0.96), (2.0, 0.92)]).unwrap();
        let mid = (0.96f64.ln() * 0.5 + 0.92f64.ln() * 0.5).exp();
        assert!((c.df(1.5) - mid).abs() < 1e-15);
        assert_eq!(c.df(0.0), 1.0);
        // extension at the last forward
        let f = (0.96f64 / 0.92).ln();
        assert!((c.df(3.0) - 0.92 * (-f).exp()).abs() < 1e-15);
    }
}
