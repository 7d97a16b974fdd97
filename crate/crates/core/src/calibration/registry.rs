//! Every calibratable model with its parameter layout and start bounds.

use std::sync::OnceLock;

use super::objective::Objective;
use super::optimize::Bounds;
use crate::benchmarks::{HullWhiteParams, LfmParams, RatLogParams, SvenssonParams};
use crate::chaos::{ChaosOrder, ChaosSpec};
use crate::error::{Error, Result};
use crate::expoly::ExpPoly;
use crate::model::Model;

pub const B_RANGE: (f64, f64) = (-5.0, 5.0);
pub const C_RANGE: (f64, f64) = (0.01, 5.0);
/// Forward grid spacing of the LIBOR benchmark.
pub const LFM_STEP: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    NelsonSiegel,
    Svensson,
    Chaos(ChaosOrder),
    HullWhite,
    RationalLognormal,
    Libor,
}

impl Family {
    pub fn label(&self) -> &'static str {
        match self {
            Family::NelsonSiegel => "Nelson-Siegel",
            Family::Svensson => "Svensson",
            Family::Chaos(o) => o.label(),
            Family::HullWhite => "Hull-White",
            Family::RationalLognormal => "Rational-log",
            Family::Libor => "LIBOR",
        }
    }

    pub fn is_benchmark(&self) -> bool {
        matches!(self, Family::HullWhite | Family::RationalLognormal | Family::Libor)
    }
}

/// Polynomial coefficient of one term.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Coef {
    B(usize),
    /// `1 + b_i`.
    OnePlus(usize),
    One,
    Zero,
}

#[derive(Debug, Clone, PartialEq)]
struct TermForm {
    poly: Vec<Coef>,
    decay: usize,
}

#[derive(Debug, Clone, PartialEq)]
struct ChaosForm {
    order: ChaosOrder,
    /// alpha (or phi), beta, gamma-or-delta.
    slots: [Vec<TermForm>; 3],
    n_b: usize,
    n_c: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Chaos(ChaosForm),
    NelsonSiegel,
    Svensson,
    HullWhite,
    RationalLognormal,
    Libor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelDef {
    pub id: &'static str,
    pub family: Family,
    kind: Kind,
}

fn t(poly: &[Coef], decay: usize) -> TermForm {
    TermForm {
        poly: poly.to_vec(),
        decay,
    }
}

use Coef::{One, OnePlus, Zero, B};

fn chaos(id: &'static str, order: ChaosOrder, a: Vec<TermForm>, b: Vec<TermForm>, g: Vec<TermForm>) -> ModelDef {
    let all = a.iter().chain(&b).chain(&g);
    let mut n_b = 0;
    let mut n_c = 0;
    for term in all {
        n_c = n_c.max(term.decay + 1);
        for c in &term.poly {
            if let B(i) | OnePlus(i) = c {
                n_b = n_b.max(i + 1);
            }
        }
    }
    ModelDef {
        id,
        family: Family::Chaos(order),
        kind: Kind::Chaos(ChaosForm {
            order,
            slots: [a, b, g],
            n_b,
            n_c,
        }),
    }
}

fn build_registry() -> Vec<ModelDef> {
    use ChaosOrder::*;
    let lin = |i: usize, d: usize| t(&[B(i), B(i + 1)], d);
    let cst = |i: usize, d: usize| t(&[B(i)], d);
    let sl = |i: usize, d: usize| t(&[Zero, B(i)], d);
    let a3 = || chaos("A3", SecondOneVar, vec![lin(0, 0)], vec![lin(2, 1)], vec![]);
    let a5 = || chaos("A5", SecondOneVar, vec![lin(0, 0), sl(2, 1)], vec![sl(3, 2)], vec![]);
    let a8 = || chaos("A8", SecondFactorizable, vec![lin(0, 0)], vec![cst(2, 1)], vec![t(&[One], 2)]);
    let a11 = || chaos("A11", ThirdOneVar, vec![cst(0, 0)], vec![cst(1, 1)], vec![cst(2, 2)]);
    let a14 = || chaos("A14", ThirdOneVar, vec![lin(0, 0)], vec![cst(2, 1)], vec![cst(3, 2)]);
    let alias = |mut d: ModelDef, id: &'static str| {
        d.id = id;
        d
    };
    let bench = |id, family, kind| ModelDef { id, family, kind };
    vec![
        bench("NS", Family::NelsonSiegel, Kind::NelsonSiegel),
        bench("Sv", Family::Svensson, Kind::Svensson),
        chaos("A1", First, vec![lin(0, 0)], vec![], vec![]),
        chaos("A2", First, vec![lin(0, 0), sl(2, 1)], vec![], vec![]),
        a3(),
        chaos("A4", SecondOneVar, vec![cst(0, 0)], vec![lin(1, 1), sl(3, 2)], vec![]),
        a5(),
        chaos("A6", SecondFactorizable, vec![cst(0, 0)], vec![cst(1, 1)], vec![t(&[OnePlus(2)], 2)]),
        chaos("A7", SecondFactorizable, vec![cst(0, 0)], vec![lin(1, 1)], vec![t(&[One], 2)]),
        a8(),
        chaos("A9", SecondFactorizable, vec![cst(0, 0)], vec![lin(1, 1)], vec![t(&[One, B(3)], 2)]),
        chaos("A10", SecondFactorizable, vec![lin(0, 0)], vec![cst(2, 1)], vec![t(&[One, B(3)], 2)]),
        a11(),
        chaos("A12", ThirdOneVar, vec![cst(0, 0)], vec![cst(1, 1)], vec![lin(2, 2)]),
        chaos("A13", ThirdOneVar, vec![cst(0, 0)], vec![lin(1, 1)], vec![cst(3, 2)]),
        a14(),
        alias(a3(), "B1"),
        alias(a5(), "B2"),
        alias(a8(), "B3"),
        alias(a11(), "B4"),
        alias(a14(), "B5"),
        chaos("B6", ThirdOneVar, vec![lin(0, 0)], vec![lin(2, 1)], vec![lin(4, 2)]),
        bench("HW", Family::HullWhite, Kind::HullWhite),
        bench("RatLog", Family::RationalLognormal, Kind::RationalLognormal),
        bench("LIBOR", Family::Libor, Kind::Libor),
    ]
}

pub fn registry() -> &'static [ModelDef] {
    static REG: OnceLock<Vec<ModelDef>> = OnceLock::new();
    REG.get_or_init(build_registry)
}

pub fn lookup(id: &str) -> Result<&'static ModelDef> {
    registry()
        .iter()
        .find(|d| d.id.eq_ignore_ascii_case(id))
        .ok_or_else(|| Error::UnknownModel(id.to_string()))
}

fn coef(c: Coef, b: &[f64]) -> f64 {
    match c {
        B(i) => b[i],
        OnePlus(i) => 1.0 + b[i],
        One => 1.0,
        Zero => 0.0,
    }
}

fn exp_poly(terms: &[TermForm], b: &[f64], c: &[f64]) -> Result<ExpPoly> {
    let mut out = ExpPoly::zero();
    for term in terms {
        let coeffs: Vec<f64> = term.poly.iter().map(|&k| coef(k, b)).collect();
        out = out.add(&ExpPoly::term(&coeffs, c[term.decay])?);
    }
    Ok(out)
}

const SV_LOWER: [f64; 6] = [0.0, -0.2, -0.5, -0.5, C_RANGE.0, C_RANGE.0];
const SV_UPPER: [f64; 6] = [0.2, 0.2, 0.5, 0.5, C_RANGE.1, C_RANGE.1];
/// Correlation placeholders when swaptions are not fitted.
const LFM_IDLE_CORR: (f64, f64, f64) = (0.5, 0.0, 0.0);

impl ModelDef {
    pub fn label(&self) -> &'static str {
        self.family.label()
    }

    pub fn is_chaos(&self) -> bool {
        matches!(self.kind, Kind::Chaos(_))
    }

    /// Parameters of the initial curve fitted in the first stage of a
    /// benchmark calibration.
    pub fn curve_param_count(&self) -> usize {
        if self.family.is_benchmark() {
            6
        } else {
            0
        }
    }

    pub fn param_count(&self, objective: Objective) -> usize {
        match &self.kind {
            Kind::Chaos(f) => f.n_b + f.n_c,
            Kind::NelsonSiegel => 4,
            Kind::Svensson => 6,
            Kind::HullWhite => 8,
            Kind::RationalLognormal => 9,
            Kind::Libor => match objective {
                Objective::Term | Objective::YieldCaplet => 10,
                _ => 13,
            },
        }
    }

    pub fn param_names(&self, objective: Objective) -> Vec<String> {
        let sv = ["sv_b0", "sv_b1", "sv_b2", "sv_b3", "sv_c1", "sv_c2"].map(String::from);
        match &self.kind {
            Kind::Chaos(f) => (1..=f.n_b)
                .map(|i| format!("b{i}"))
                .chain((1..=f.n_c).map(|i| format!("c{i}")))
                .collect(),
            Kind::NelsonSiegel => ["b0", "b1", "b2", "c1"].map(String::from).to_vec(),
            Kind::Svensson => ["b0", "b1", "b2", "b3", "c1", "c2"].map(String::from).to_vec(),
            Kind::HullWhite => sv.into_iter().chain(["kappa".into(), "eta".into()]).collect(),
            Kind::RationalLognormal => sv.into_iter().chain(["k1", "k2", "eta"].map(String::from)).collect(),
            Kind::Libor => {
                let mut v: Vec<String> = sv.into_iter().chain(["b1", "b2", "b3", "c1"].map(String::from)).collect();
                if self.param_count(objective) == 13 {
                    v.extend(["rho_inf", "corr_a", "corr_b"].map(String::from));
                }
                v
            }
        }
    }

    pub fn bounds(&self, objective: Objective) -> Bounds {
        let (lower, upper): (Vec<f64>, Vec<f64>) = match &self.kind {
            Kind::Chaos(f) => {
                let lo = std::iter::repeat_n(B_RANGE.0, f.n_b).chain(std::iter::repeat_n(C_RANGE.0, f.n_c));
                let hi = std::iter::repeat_n(B_RANGE.1, f.n_b).chain(std::iter::repeat_n(C_RANGE.1, f.n_c));
                (lo.collect(), hi.collect())
            }
            Kind::NelsonSiegel => (vec![0.0, -0.2, -0.5, C_RANGE.0], vec![0.2, 0.2, 0.5, C_RANGE.1]),
            Kind::Svensson => (SV_LOWER.to_vec(), SV_UPPER.to_vec()),
            Kind::HullWhite => (
                [&SV_LOWER[..], &[0.001, 1e-4]].concat(),
                [&SV_UPPER[..], &[2.0, 0.1]].concat(),
            ),
            Kind::RationalLognormal => (
                [&SV_LOWER[..], &[0.0, 0.0, 0.0]].concat(),
                [&SV_UPPER[..], &[1.0, 5.0, 2.0]].concat(),
            ),
            Kind::Libor => {
                let mut lo = [&SV_LOWER[..], &[0.0, -0.5, -0.5, C_RANGE.0]].concat();
                let mut hi = [&SV_UPPER[..], &[0.5, 0.5, 0.5, C_RANGE.1]].concat();
                if self.param_count(objective) == 13 {
                    lo.extend([0.01, 0.0, 0.0]);
                    hi.extend([0.99, 1.0, 1.0]);
                }
                (lo, hi)
            }
        };
        Bounds::new(lower, upper).expect("registry bounds are well formed")
    }

    /// Chaos start bounds with custom `b` and `c` ranges; `None` for other
    /// families.
    pub fn chaos_bounds(&self, b: (f64, f64), c: (f64, f64)) -> Option<Result<Bounds>> {
        let Kind::Chaos(f) = &self.kind else { return None };
        let lo = std::iter::repeat_n(b.0, f.n_b).chain(std::iter::repeat_n(c.0, f.n_c));
        let hi = std::iter::repeat_n(b.1, f.n_b).chain(std::iter::repeat_n(c.1, f.n_c));
        Some(Bounds::new(lo.collect(), hi.collect()))
    }

    /// Model for parameter vector `theta`; `horizon` sizes the LIBOR forward
    /// grid.
    pub fn build(&self, theta: &[f64], objective: Objective, horizon: f64) -> Result<Model> {
        let n = self.param_count(objective);
        if theta.len() != n {
            return Err(Error::ParameterRejected(format!(
                "{} expects {n} parameters, got {}",
                self.id,
                theta.len()
            )));
        }
        let sv = |p: &[f64]| SvenssonParams::new(p[0], p[1], p[2], p[3], p[4], p[5]);
        Ok(match &self.kind {
            Kind::Chaos(f) => Model::Chaos(self.build_chaos(f, theta)?),
            Kind::NelsonSiegel => Model::Descriptive(SvenssonParams::nelson_siegel(theta[0], theta[1], theta[2], theta[3])?),
            Kind::Svensson => Model::Descriptive(sv(theta)?),
            Kind::HullWhite => Model::HullWhite(HullWhiteParams::new(theta[6], theta[7], sv(theta)?)?),
            Kind::RationalLognormal => {
                let p = RatLogParams::new(theta[6], theta[7], theta[8], sv(theta)?)?;
                p.check_nonnegative(horizon)?;
                Model::RationalLognormal(p)
            }
            Kind::Libor => {
                let (rho, e1, e2) = if n == 13 {
                    // eta1 + eta2 as a share of -log rho_inf, then eta2 as a share of
                    // the sum capped at 3/4 so that eta2 <= 3 eta1
                    let total = theta[11] * -theta[10].ln();
                    let e2 = 0.75 * theta[12] * total;
                    (theta[10], total - e2, e2)
                } else {
                    LFM_IDLE_CORR
                };
                let n_fwd = ((horizon / LFM_STEP).ceil() as usize + 2).max(4);
                Model::Libor(LfmParams::new(
                    [theta[6], theta[7], theta[8], theta[9]],
                    rho,
                    e1,
                    e2,
                    sv(theta)?,
                    LFM_STEP,
                    n_fwd,
                )?)
            }
        })
    }

    fn build_chaos(&self, f: &ChaosForm, theta: &[f64]) -> Result<ChaosSpec> {
        let (b, c) = theta.split_at(f.n_b);
        let a = exp_poly(&f.slots[0], b, c)?;
        let beta = exp_poly(&f.slots[1], b, c)?;
        let third = exp_poly(&f.slots[2], b, c)?;
        let spec = match f.order {
            ChaosOrder::First => ChaosSpec::first(a),
            ChaosOrder::SecondOneVar => ChaosSpec::second_one_var(a, beta),
            ChaosOrder::SecondFactorizable => ChaosSpec::second_factorizable(a, beta, third),
            ChaosOrder::ThirdOneVar => ChaosSpec::third_one_var(a, beta, third),
        }?;
        Ok(spec.with_id(self.id))
    }

    /// Indices of the `b` parameters that scale with alpha, beta and delta.
    fn gauge_indices(&self) -> Vec<usize> {
        let Kind::Chaos(f) = &self.kind else { return Vec::new() };
        let mut idx = Vec::new();
        let linear_slots = if f.order == ChaosOrder::SecondFactorizable { 2 } else { 3 };
        for slot in &f.slots[..linear_slots] {
            for term in slot {
                for c in &term.poly {
                    if let B(i) = c {
                        idx.push(*i);
                    }
                }
            }
        }
        idx.sort_unstable();
        idx.dedup();
        idx
    }

    /// Canonical representative of `theta`: `Z_00 = 1` and the first nonzero
    /// scaling coefficient positive. Prices are unchanged.
    pub fn gauge_fix(&self, theta: &[f64], objective: Objective) -> Result<Vec<f64>> {
        let idx = self.gauge_indices();
        if idx.is_empty() {
            return Ok(theta.to_vec());
        }
        let Model::Chaos(spec) = self.build(theta, objective, 0.0)? else {
            unreachable!("gauge indices exist only for chaos forms")
        };
        let k = 1.0 / spec.v0().sqrt();
        let sign = idx
            .iter()
            .map(|&i| theta[i])
            .find(|v| *v != 0.0)
            .map_or(1.0, f64::signum);
        let mut out = theta.to_vec();
        for i in idx {
            out[i] *= k * sign;
        }
        Ok(out)
    }
}
