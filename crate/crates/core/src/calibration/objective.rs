//! Calibration targets, error measures and the per-date calibration drivers.

use std::fmt;
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::optimize::{multistart_optimize, refine_stationary, Bounds, LocalOptions, MultistartOptions, MultistartResult};
use super::registry::{lookup, ModelDef};
use super::stats::{aic, cairns_loglik, cairns_loglik_extended, sum_sq_rel, Aic, ErrorModelParams};
use crate::error::{Error, Result};
use crate::market::{price_to_yield, MarketSnapshot};
use crate::model::Model;
use crate::pricing::{self, annuity, black, forward_libor, swap_rate, Curve, SwapSchedule, ZCache};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Objective {
    /// Cairns maximum likelihood on bond prices.
    Term,
    /// TotalE1: yields and caplets.
    YieldCaplet,
    /// TotalE2: yields and swaptions.
    YieldSwaption,
    /// TotalE3: yields, caplets and swaptions.
    Joint,
}

impl Objective {
    pub fn label(&self) -> &'static str {
        match self {
            Objective::Term => "term",
            Objective::YieldCaplet => "yld+cpl",
            Objective::YieldSwaption => "yld+swp",
            Objective::Joint => "joint",
        }
    }

    pub fn total_label(&self) -> &'static str {
        match self {
            Objective::Term => "-L",
            Objective::YieldCaplet => "TotalE1",
            Objective::YieldSwaption => "TotalE2",
            Objective::Joint => "TotalE3",
        }
    }

    pub fn uses_caplets(&self) -> bool {
        matches!(self, Objective::YieldCaplet | Objective::Joint)
    }

    pub fn uses_swaptions(&self) -> bool {
        matches!(self, Objective::YieldSwaption | Objective::Joint)
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Objective {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "term" => Ok(Objective::Term),
            "cpl" | "yld+cpl" | "totale1" => Ok(Objective::YieldCaplet),
            "swp" | "yld+swp" | "totale2" => Ok(Objective::YieldSwaption),
            "joint" | "yld+cpl+swp" | "totale3" => Ok(Objective::Joint),
            other => Err(Error::Parse(format!(
                "unknown objective `{other}` (term | cpl | swp | joint)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapletTarget {
    pub fixing: f64,
    pub maturity: f64,
    pub strike: f64,
    pub vol: f64,
    pub price: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwaptionTarget {
    pub schedule: SwapSchedule,
    pub vol: f64,
    pub price: f64,
}

/// Market prices of one snapshot, ready to compare with model prices.
#[derive(Debug, Clone, PartialEq)]
pub struct OptionData {
    pub yields: Vec<(f64, f64)>,
    pub caplets: Vec<CapletTarget>,
    pub swaptions: Vec<SwaptionTarget>,
    /// Every date a model needs to price the above.
    pub dates: Vec<f64>,
}

impl OptionData {
    /// Black prices from the quoted ATM vols with the snapshot's own curve.
    /// Excluded caplets are dropped.
    pub fn from_snapshot(snap: &MarketSnapshot) -> Result<Self> {
        let curve = snap.curve()?;
        let mut caplets = Vec::new();
        for q in snap.caplets.iter().filter(|q| !q.excluded) {
            let t = q.fixing();
            let k = match q.strike {
                Some(k) => k,
                None => forward_libor(&curve, t, q.maturity)?,
            };
            let price = q.accrual * curve.df(q.maturity) * black(k, k, q.vol * t.sqrt());
            caplets.push(CapletTarget {
                fixing: t,
                maturity: q.maturity,
                strike: k,
                vol: q.vol,
                price,
            });
        }
        let mut swaptions = Vec::new();
        for q in &snap.swaptions {
            let sched = SwapSchedule::regular(q.expiry, q.tenor, snap.swaption_frequency, 1.0, 0.0)?;
            let k = match q.strike {
                Some(k) => k,
                None => swap_rate(&curve, &sched)?,
            };
            let sched = sched.with_strike(k)?;
            let price = annuity(&curve, &sched)? * black(k, k, q.vol * q.expiry.sqrt());
            swaptions.push(SwaptionTarget {
                schedule: sched,
                vol: q.vol,
                price,
            });
        }
        let mut dates: Vec<f64> = snap.yields.iter().map(|y| y.0).collect();
        for c in &caplets {
            dates.extend([c.fixing, c.maturity]);
        }
        for s in &swaptions {
            dates.push(s.schedule.expiry());
            dates.extend_from_slice(s.schedule.payments());
        }
        dates.sort_by(f64::total_cmp);
        dates.dedup();
        Ok(Self {
            yields: snap.yields.clone(),
            caplets,
            swaptions,
            dates,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.dates.last().copied().unwrap_or(0.0)
    }

    pub fn check(&self, objective: Objective) -> Result<()> {
        if self.yields.is_empty() {
            return Err(Error::Ingestion("snapshot has no yields".into()));
        }
        if objective.uses_caplets() && self.caplets.is_empty() {
            return Err(Error::Ingestion("objective needs caplet quotes but none are usable".into()));
        }
        if objective.uses_swaptions() && self.swaptions.is_empty() {
            return Err(Error::Ingestion("objective needs swaption quotes but none are present".into()));
        }
        Ok(())
    }
}

/// Sum of squared relative errors and count for one instrument class.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ClassFit {
    pub sse: f64,
    pub n: usize,
}

impl ClassFit {
    /// Root mean squared relative error.
    pub fn error(&self) -> f64 {
        (self.sse / self.n as f64).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ClassErrors {
    pub yields: ClassFit,
    pub caplets: Option<ClassFit>,
    pub swaptions: Option<ClassFit>,
}

impl ClassErrors {
    pub fn yield_e(&self) -> f64 {
        self.yields.error()
    }
    pub fn cpl_e(&self) -> Option<f64> {
        self.caplets.map(|c| c.error())
    }
    pub fn swp_e(&self) -> Option<f64> {
        self.swaptions.map(|c| c.error())
    }

    /// Squared TotalE of the classes `objective` fits.
    pub fn total_sq(&self, objective: Objective) -> f64 {
        let y = self.yield_e().powi(2);
        let c = || self.cpl_e().map_or(f64::INFINITY, |e| e * e);
        let s = || self.swp_e().map_or(f64::INFINITY, |e| e * e);
        match objective {
            Objective::Term => y,
            Objective::YieldCaplet => y + c(),
            Objective::YieldSwaption => y + s(),
            Objective::Joint => y + c() + s(),
        }
    }

    /// `(RSS, n)` over the fitted classes.
    pub fn rss(&self, objective: Objective) -> (f64, usize) {
        let mut classes = vec![self.yields];
        if objective.uses_caplets() {
            classes.extend(self.caplets);
        }
        if objective.uses_swaptions() {
            classes.extend(self.swaptions);
        }
        classes.iter().fold((0.0, 0), |(s, n), c| (s + c.sse, n + c.n))
    }
}

fn class_fit(fitted: &[f64], observed: &[f64]) -> Result<ClassFit> {
    Ok(ClassFit {
        sse: sum_sq_rel(fitted, observed)?,
        n: observed.len(),
    })
}

trait Pricer: Curve {
    fn caplet(&self, t: f64, maturity: f64, strike: f64) -> Result<f64>;
    fn swaption(&self, sched: &SwapSchedule) -> Result<f64>;
}

impl Pricer for Model {
    fn caplet(&self, t: f64, maturity: f64, strike: f64) -> Result<f64> {
        Model::caplet(self, t, maturity, 1.0, strike)
    }
    fn swaption(&self, sched: &SwapSchedule) -> Result<f64> {
        Model::swaption(self, sched)
    }
}

impl Pricer for ZCache<'_> {
    fn caplet(&self, t: f64, maturity: f64, strike: f64) -> Result<f64> {
        pricing::caplet(self, t, maturity, 1.0, strike)
    }
    fn swaption(&self, sched: &SwapSchedule) -> Result<f64> {
        pricing::swaption(self, sched)
    }
}

fn errors_with<P: Pricer + ?Sized>(p: &P, data: &OptionData, caplets: bool, swaptions: bool) -> Result<ClassErrors> {
    let mut fitted = Vec::with_capacity(data.yields.len());
    for &(t, _) in &data.yields {
        fitted.push(-p.discount(t)?.ln() / t);
    }
    let observed: Vec<f64> = data.yields.iter().map(|y| y.1).collect();
    let mut out = ClassErrors {
        yields: class_fit(&fitted, &observed)?,
        ..Default::default()
    };
    if caplets && !data.caplets.is_empty() {
        let fitted = data
            .caplets
            .iter()
            .map(|c| p.caplet(c.fixing, c.maturity, c.strike))
            .collect::<Result<Vec<_>>>()?;
        let observed: Vec<f64> = data.caplets.iter().map(|c| c.price).collect();
        out.caplets = Some(class_fit(&fitted, &observed)?);
    }
    if swaptions && !data.swaptions.is_empty() {
        let fitted = data
            .swaptions
            .iter()
            .map(|s| p.swaption(&s.schedule))
            .collect::<Result<Vec<_>>>()?;
        let observed: Vec<f64> = data.swaptions.iter().map(|s| s.price).collect();
        out.swaptions = Some(class_fit(&fitted, &observed)?);
    }
    Ok(out)
}

/// Errors of `model` on every class it can price. Descriptive curves only
/// report yields; the LIBOR model without fitted correlations reports no
/// swaption error.
pub fn evaluate(model: &Model, data: &OptionData, swaptions: bool) -> Result<ClassErrors> {
    match model {
        Model::Chaos(spec) => {
            let cache = ZCache::new(spec, data.dates.iter().copied())?;
            errors_with(&cache, data, true, swaptions)
        }
        Model::Descriptive(_) => errors_with(model, data, false, false),
        _ => errors_with(model, data, true, swaptions),
    }
}

fn objective_errors(model: &Model, data: &OptionData, objective: Objective) -> Result<ClassErrors> {
    match model {
        Model::Chaos(spec) => {
            let cache = ZCache::new(spec, data.dates.iter().copied())?;
            errors_with(&cache, data, objective.uses_caplets(), objective.uses_swaptions())
        }
        _ => errors_with(model, data, objective.uses_caplets(), objective.uses_swaptions()),
    }
}

#[derive(Debug, Clone)]
pub struct CalibrationOptions {
    pub n_starts: usize,
    pub seed: u64,
    pub local: LocalOptions,
    pub error_model: ErrorModelParams,
    /// Overrides the registry start bounds.
    pub bounds: Option<Bounds>,
}

impl CalibrationOptions {
    pub fn new(n_starts: usize, seed: u64) -> Self {
        Self {
            n_starts,
            seed,
            local: LocalOptions::default(),
            error_model: ErrorModelParams::default(),
            bounds: None,
        }
    }
}

/// Default number of random starts for term-structure fits.
pub const DEFAULT_TERM_STARTS: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationResult {
    pub model_id: String,
    pub date: String,
    pub objective: Objective,
    pub theta: Vec<f64>,
    /// `-L` for term fits, TotalE otherwise.
    pub objective_value: f64,
    pub errors: ClassErrors,
    /// Log-likelihood of term fits.
    pub loglik: Option<f64>,
    pub rss: f64,
    pub n: usize,
    pub k: usize,
    pub aic: Aic,
    pub seed: u64,
    /// Index of the winning start among `n_starts`.
    pub best_start: usize,
    pub n_starts: usize,
}

impl CalibrationResult {
    /// RMSPE of the fitted yields.
    pub fn rmspe(&self) -> f64 {
        self.errors.yield_e()
    }
}

/// Independent seed for `(base, keys)`.
pub fn derive_seed(base: u64, keys: &[u64]) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    let mut s = rng.next_u64();
    for &k in keys {
        let mut r = ChaCha8Rng::seed_from_u64(s);
        r.set_stream(k);
        s = r.next_u64();
    }
    s
}

fn finish(
    def: &ModelDef,
    snap: &MarketSnapshot,
    objective: Objective,
    theta: Vec<f64>,
    objective_value: f64,
    errors: ClassErrors,
    loglik: Option<f64>,
    run: &MultistartResult,
) -> Result<CalibrationResult> {
    let (rss, n) = errors.rss(objective);
    let k = def.param_count(objective);
    Ok(CalibrationResult {
        model_id: def.id.to_string(),
        date: snap.date.clone(),
        objective,
        theta,
        objective_value,
        errors,
        loglik,
        rss,
        n,
        k,
        aic: aic(rss, n, k)?,
        seed: run.seed,
        best_start: run.start,
        n_starts: run.n_starts,
    })
}

fn multistart(f: &(dyn Fn(&[f64]) -> f64 + Sync), bounds: &Bounds, opts: &CalibrationOptions, seed: u64) -> Result<MultistartResult> {
    let mut m = MultistartOptions::new(opts.n_starts, seed);
    m.local = opts.local.clone();
    multistart_optimize(f, bounds, &m)
}

/// Gauge-fixed optimum, refined once more in the fixed gauge where the
/// objective is far stiffer than in the raw search coordinates.
fn settle(
    def: &ModelDef,
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    x: &[f64],
    bounds: &Bounds,
    objective: Objective,
    opts: &CalibrationOptions,
) -> Result<Vec<f64>> {
    let fixed = def.gauge_fix(x, objective)?;
    if !opts.local.polish || fixed == x {
        return Ok(fixed);
    }
    // rescaled weights may leave the start box
    let pad = |i: usize| if fixed[i] == x[i] { 0.0 } else { fixed[i].abs() + 1.0 };
    let lower = (0..x.len()).map(|i| bounds.lower[i].min(fixed[i] - pad(i))).collect();
    let upper = (0..x.len()).map(|i| bounds.upper[i].max(fixed[i] + pad(i))).collect();
    let (refined, value, _) = refine_stationary(f, &fixed, &Bounds::new(lower, upper)?, 4);
    if value <= f(&fixed) {
        def.gauge_fix(&refined, objective)
    } else {
        Ok(fixed)
    }
}

/// Cairns maximum-likelihood fit to the snapshot's bonds.
pub fn calibrate_term(model_id: &str, snap: &MarketSnapshot, opts: &CalibrationOptions) -> Result<CalibrationResult> {
    let def = lookup(model_id)?;
    if def.family.is_benchmark() {
        return Err(Error::Unsupported(format!(
            "{} is an option benchmark; its curve is the Svensson fit",
            def.id
        )));
    }
    if snap.bonds.is_empty() {
        return Err(Error::Ingestion(format!("{}: no bond quotes", snap.date)));
    }
    let horizon = snap.bonds.last().map_or(0.0, |b| b.maturity);
    let em = opts.error_model;
    let f = |theta: &[f64]| match def.build(theta, Objective::Term, horizon) {
        Ok(m) => -cairns_loglik_extended(&m, &snap.bonds, &em),
        Err(_) => f64::INFINITY,
    };
    let bounds = opts.bounds.clone().unwrap_or_else(|| def.bounds(Objective::Term));
    let run = multistart(&f, &bounds, opts, opts.seed)?;
    let theta = settle(def, &f, &run.x, &bounds, Objective::Term, opts)?;
    let model = def.build(&theta, Objective::Term, horizon)?;
    let mut fitted = Vec::new();
    let mut observed = Vec::new();
    for b in &snap.bonds {
        fitted.push(-model.discount(b.maturity)?.ln() / b.maturity);
        observed.push(price_to_yield(b)?);
    }
    let errors = ClassErrors {
        yields: class_fit(&fitted, &observed)?,
        ..Default::default()
    };
    let ll = cairns_loglik(&model, &snap.bonds, &em);
    finish(def, snap, Objective::Term, theta, -ll, errors, Some(ll), &run)
}

/// Least-squares fit of TotalE1, TotalE2 or TotalE3.
///
/// Benchmarks fit their Svensson curve to yields first and their volatility
/// parameters second with the curve held fixed.
pub fn calibrate_options(
    model_id: &str,
    snap: &MarketSnapshot,
    objective: Objective,
    opts: &CalibrationOptions,
) -> Result<CalibrationResult> {
    if objective == Objective::Term {
        return calibrate_term(model_id, snap, opts);
    }
    let def = lookup(model_id)?;
    let data = OptionData::from_snapshot(snap)?;
    data.check(objective)?;
    let horizon = data.horizon();
    let bounds = opts.bounds.clone().unwrap_or_else(|| def.bounds(objective));
    let total = |theta: &[f64]| match def.build(theta, objective, horizon) {
        Ok(m) => match objective_errors(&m, &data, objective) {
            Ok(e) => e.total_sq(objective),
            Err(_) => f64::INFINITY,
        },
        Err(_) => f64::INFINITY,
    };

    let (theta, run) = if def.family.is_benchmark() {
        let sv = lookup("Sv")?;
        let curve_only = |theta: &[f64]| match sv.build(theta, objective, horizon) {
            Ok(m) => objective_errors(&m, &data, Objective::Term).map_or(f64::INFINITY, |e| e.total_sq(Objective::Term)),
            Err(_) => f64::INFINITY,
        };
        let nc = def.curve_param_count();
        let curve_bounds = Bounds::new(bounds.lower[..nc].to_vec(), bounds.upper[..nc].to_vec())?;
        let stage1 = multistart(&curve_only, &curve_bounds, opts, derive_seed(opts.seed, &[1]))?;
        let curve = stage1.x.clone();
        let vol_bounds = Bounds::new(bounds.lower[nc..].to_vec(), bounds.upper[nc..].to_vec())?;
        let vols_only = |x: &[f64]| total(&[&curve[..], x].concat());
        let stage2 = multistart(&vols_only, &vol_bounds, opts, derive_seed(opts.seed, &[2]))?;
        let theta = [&curve[..], &stage2.x[..]].concat();
        (theta, MultistartResult { seed: opts.seed, ..stage2 })
    } else {
        let run = multistart(&total, &bounds, opts, opts.seed)?;
        (settle(def, &total, &run.x, &bounds, objective, opts)?, run)
    };

    let model = def.build(&theta, objective, horizon)?;
    let fitted = objective_errors(&model, &data, objective)?;
    let value = fitted.total_sq(objective).sqrt();
    if !value.is_finite() {
        return Err(Error::Optimization(format!("{}: {} has no finite fit", snap.date, def.id)));
    }
    // held-out classes are forecasts from the fitted parameters
    let swaptions_priceable = !(matches!(model, Model::Libor(_)) && !objective.uses_swaptions());
    let mut errors = evaluate(&model, &data, swaptions_priceable)?;
    errors.yields = fitted.yields;
    finish(def, snap, objective, theta, value, errors, None, &run)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn objective_parsing() {
        assert_eq!("cpl".parse::<Objective>().unwrap(), Objective::YieldCaplet);
        assert_eq!("joint".parse::<Objective>().unwrap(), Objective::Joint);
        assert_eq!("yld+swp".parse::<Objective>().unwrap(), Objective::YieldSwaption);
        assert!("both".parse::<Objective>().is_err());
    }

    #[test]
    fn total_of_equal_errors() {
        let fit = |e: f64| ClassFit { sse: 4.0 * e * e, n: 4 };
        let e = ClassErrors {
            yields: fit(0.03),
            caplets: Some(fit(0.03)),
            swaptions: Some(fit(0.03)),
        };
        assert!((e.total_sq(Objective::Joint).sqrt() - 0.03 * 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(e.rss(Objective::YieldCaplet), (8.0 * 0.0009, 8));
    }

    #[test]
    fn seeds_are_distinct_and_stable() {
        let a = derive_seed(42, &[0, 1]);
        assert_eq!(a, derive_seed(42, &[0, 1]));
        assert_ne!(a, derive_seed(42, &[1, 0]));
        assert_ne!(a, derive_seed(43, &[0, 1]));
    }
}
