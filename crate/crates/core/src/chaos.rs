//! Chaos models of orders one to three.
//!
//! A model is fixed by its coefficient functions. The initial curve depends
//! only on the reduced function `psi`, while conditional quantities are
//! polynomials (in Hermite form) of a single Gaussian state: `R_t` with
//! variance `Q_t` for factorizable second chaos, `W_t` with variance `t` for
//! the one-variable models.

use crate::error::{domain, Error, Result};
use crate::expoly::{ExpPoly, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChaosOrder {
    First,
    SecondOneVar,
    SecondFactorizable,
    ThirdOneVar,
}

impl ChaosOrder {
    pub fn label(&self) -> &'static str {
        match self {
            ChaosOrder::First => "1st chaos",
            ChaosOrder::SecondOneVar => "one-var 2nd chaos",
            ChaosOrder::SecondFactorizable => "factorizable 2nd chaos",
            ChaosOrder::ThirdOneVar => "one-var 3rd chaos",
        }
    }
}

/// Maturity functions of the conditional bond numerator.
///
/// `Z_tT(w) = sum_k F_k(T) H_k(w, q_t)` where `F_k(T) = int_T^inf f_k` and
/// `H_k(., q)` are the Hermite polynomials for variance `q`. For second chaos
/// `F = (A, B, C, 0, 0)`; for third chaos `F = (A~, B~, C~, D~, E~)`.
#[derive(Debug, Clone)]
pub struct ZCoeffs {
    integrands: [ExpPoly; 5],
    state_variance: ExpPoly,
    third: bool,
}

impl ZCoeffs {
    pub fn is_third_order(&self) -> bool {
        self.third
    }

    /// The integrands `f_k(s)`; coefficient `k` is `int_T^inf f_k`.
    pub fn integrands(&self) -> &[ExpPoly; 5] {
        &self.integrands
    }

    /// `(F_0(T), .., F_4(T))`, evaluated in closed form.
    pub fn values(&self, maturity: f64) -> Result<[f64; 5]> {
        let mut out = [0.0; 5];
        for (o, f) in out.iter_mut().zip(&self.integrands) {
            *o = f.tail_integral(maturity)?;
        }
        Ok(out)
    }

    /// Variance of the Gaussian state at `t` (`Q_t`, or `t` itself).
    pub fn state_variance(&self, t: f64) -> f64 {
        self.state_variance.eval(t)
    }

    /// `M_ts` integrand weights `f_k(s)`.
    pub fn densities(&self, s: f64) -> [f64; 5] {
        let mut out = [0.0; 5];
        for (o, f) in out.iter_mut().zip(&self.integrands) {
            *o = f.eval(s);
        }
        out
    }
}

/// Hermite polynomials `H_0..H_4` at `w` for a Gaussian of variance `q`.
pub fn hermite(w: f64, q: f64) -> [f64; 5] {
    let w2 = w * w;
    [
        1.0,
        w,
        w2 - q,
        w * (w2 - 3.0 * q),
        w2 * w2 - 6.0 * q * w2 + 3.0 * q * q,
    ]
}

/// Converts Hermite weights into monomial coefficients in `z = w / sqrt(q)`.
pub fn hermite_to_standard_monomials(v: &[f64; 5], q: f64) -> [f64; 5] {
    let sq = q.sqrt();
    [
        v[0] - v[2] * q + 3.0 * v[4] * q * q,
        (v[1] - 3.0 * v[3] * q) * sq,
        (v[2] - 6.0 * v[4] * q) * q,
        v[3] * q * sq,
        v[4] * q * q,
    ]
}

fn dot(a: &[f64; 5], b: &[f64; 5]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone)]
pub struct ChaosSpec {
    order: ChaosOrder,
    alpha: ExpPoly,
    beta: Option<ExpPoly>,
    gamma: Option<ExpPoly>,
    delta: Option<ExpPoly>,
    registry_id: Option<String>,
    psi: ExpPoly,
    z00: f64,
    zc: Option<ZCoeffs>,
}

fn identity_variance() -> ExpPoly {
    ExpPoly::normalized(vec![Term {
        coeffs: vec![0.0, 1.0],
        decay: 0.0,
    }])
}

impl ChaosSpec {
    pub fn new(
        order: ChaosOrder,
        alpha: ExpPoly,
        beta: Option<ExpPoly>,
        gamma: Option<ExpPoly>,
        delta: Option<ExpPoly>,
    ) -> Result<Self> {
        let (need_beta, need_gamma, need_delta) = match order {
            ChaosOrder::First => (false, false, false),
            ChaosOrder::SecondOneVar => (true, false, false),
            ChaosOrder::SecondFactorizable => (true, true, false),
            ChaosOrder::ThirdOneVar => (true, false, true),
        };
        let check = |name: &str, present: bool, needed: bool| -> Result<()> {
            match (present, needed) {
                (false, true) => Err(Error::Specification(format!(
                    "{} model requires {name}",
                    order.label()
                ))),
                (true, false) => Err(Error::Specification(format!(
                    "{} model takes no {name}",
                    order.label()
                ))),
                _ => Ok(()),
            }
        };
        check("beta", beta.is_some(), need_beta)?;
        check("gamma", gamma.is_some(), need_gamma)?;
        check("delta", delta.is_some(), need_delta)?;
        for (name, f) in [("alpha", Some(&alpha)), ("beta", beta.as_ref()), ("delta", delta.as_ref())] {
            if let Some(f) = f {
                if f.min_decay() < crate::expoly::MIN_DECAY {
                    return Err(Error::Specification(format!(
                        "{name} needs strictly positive decays"
                    )));
                }
            }
        }

        let psi = build_psi_parts(order, &alpha, beta.as_ref(), gamma.as_ref(), delta.as_ref());
        if psi.is_zero() {
            return Err(Error::Degenerate(
                "all coefficient functions vanish, V_0 = 0".into(),
            ));
        }
        let z00 = psi.tail_integral(0.0)?;
        if !(z00 > 0.0) || !z00.is_finite() {
            return Err(Error::Degenerate(format!("V_0 = {z00}")));
        }
        let zc = build_z_coeffs(order, &alpha, beta.as_ref(), gamma.as_ref(), delta.as_ref());
        Ok(Self {
            order,
            alpha,
            beta,
            gamma,
            delta,
            registry_id: None,
            psi,
            z00,
            zc,
        })
    }

    pub fn first(phi: ExpPoly) -> Result<Self> {
        Self::new(ChaosOrder::First, phi, None, None, None)
    }

    pub fn second_one_var(alpha: ExpPoly, beta: ExpPoly) -> Result<Self> {
        Self::new(ChaosOrder::SecondOneVar, alpha, Some(beta), None, None)
    }

    pub fn second_factorizable(alpha: ExpPoly, beta: ExpPoly, gamma: ExpPoly) -> Result<Self> {
        Self::new(ChaosOrder::SecondFactorizable, alpha, Some(beta), Some(gamma), None)
    }

    pub fn third_one_var(alpha: ExpPoly, beta: ExpPoly, delta: ExpPoly) -> Result<Self> {
        Self::new(ChaosOrder::ThirdOneVar, alpha, Some(beta), None, Some(delta))
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.registry_id = Some(id.into());
        self
    }

    pub fn order(&self) -> ChaosOrder {
        self.order
    }
    pub fn registry_id(&self) -> Option<&str> {
        self.registry_id.as_deref()
    }
    pub fn alpha(&self) -> &ExpPoly {
        &self.alpha
    }
    pub fn beta(&self) -> Option<&ExpPoly> {
        self.beta.as_ref()
    }
    pub fn gamma(&self) -> Option<&ExpPoly> {
        self.gamma.as_ref()
    }
    pub fn delta(&self) -> Option<&ExpPoly> {
        self.delta.as_ref()
    }
    pub fn psi(&self) -> &ExpPoly {
        &self.psi
    }

    /// `V_0 = Z_00 = int_0^inf psi`.
    pub fn v0(&self) -> f64 {
        self.z00
    }

    /// Multiplies alpha, beta and delta by `k`; gamma is left alone since it
    /// only enters through `beta^2 Q`.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        let mut s = Self::new(
            self.order,
            self.alpha.scale(k),
            self.beta.as_ref().map(|b| b.scale(k)),
            self.gamma.clone(),
            self.delta.as_ref().map(|d| d.scale(k)),
        )?;
        s.registry_id = self.registry_id.clone();
        Ok(s)
    }

    pub fn z_coeffs(&self) -> Result<&ZCoeffs> {
        self.zc.as_ref().ok_or_else(|| {
            Error::Unsupported("first chaos models have a deterministic Z; use psi".into())
        })
    }

    /// `P_0T = int_T^inf psi / int_0^inf psi`.
    pub fn discount_factor(&self, maturity: f64) -> Result<f64> {
        if maturity < 0.0 {
            return domain(format!("negative maturity {maturity}"));
        }
        Ok(self.psi.tail_integral(maturity)? / self.z00)
    }

    /// Instantaneous forward `psi(T) / int_T^inf psi`.
    pub fn forward_rate(&self, maturity: f64) -> Result<f64> {
        if maturity < 0.0 {
            return domain(format!("negative maturity {maturity}"));
        }
        Ok(self.psi.eval(maturity) / self.psi.tail_integral(maturity)?)
    }

    /// Continuously compounded zero yield `-log(P_0T) / T`.
    pub fn zero_yield(&self, maturity: f64) -> Result<f64> {
        if !(maturity > 0.0) {
            return domain(format!("zero yield needs T > 0, got {maturity}"));
        }
        Ok(-self.discount_factor(maturity)?.ln() / maturity)
    }

    /// Variance of the Gaussian state at time `t`.
    pub fn state_variance(&self, t: f64) -> f64 {
        match &self.zc {
            Some(zc) => zc.state_variance(t),
            None => 0.0,
        }
    }

    /// `Z_tT(w) = E[V_T | F_t]` given the realised state `w`.
    pub fn z_value(&self, t: f64, maturity: f64, w: f64) -> Result<f64> {
        if maturity < t {
            return domain(format!("maturity {maturity} precedes observation time {t}"));
        }
        if t < 0.0 {
            return domain(format!("negative observation time {t}"));
        }
        match &self.zc {
            None => self.psi.tail_integral(maturity),
            Some(zc) => {
                let v = zc.values(maturity)?;
                Ok(dot(&v, &hermite(w, zc.state_variance(t))))
            }
        }
    }

    /// `V_t = Z_tt(w)`.
    pub fn state_price_density(&self, t: f64, w: f64) -> Result<f64> {
        self.z_value(t, t, w)
    }

    /// `P_tT = Z_tT / Z_tt`.
    pub fn future_bond_price(&self, t: f64, maturity: f64, w: f64) -> Result<f64> {
        Ok(self.z_value(t, maturity, w)? / self.z_value(t, t, w)?)
    }

    /// `r_t = M_tt / V_t`.
    pub fn short_rate(&self, t: f64, w: f64) -> Result<f64> {
        if t < 0.0 {
            return domain(format!("negative time {t}"));
        }
        match &self.zc {
            None => self.forward_rate(t),
            Some(zc) => {
                let m = dot(&zc.densities(t), &hermite(w, zc.state_variance(t)));
                Ok(m / self.z_value(t, t, w)?)
            }
        }
    }
}

/// `psi` of a fully specified model.
pub fn build_psi(spec: &ChaosSpec) -> ExpPoly {
    spec.psi.clone()
}

/// `Z_tT` coefficient functions of a stochastic (order >= 2) model.
pub fn z_coeffs(spec: &ChaosSpec) -> Result<ZCoeffs> {
    spec.z_coeffs().cloned()
}

fn factorizable_q(gamma: Option<&ExpPoly>) -> ExpPoly {
    match gamma {
        Some(g) => g.square().integral_from_zero(),
        None => identity_variance(),
    }
}

fn build_psi_parts(
    order: ChaosOrder,
    alpha: &ExpPoly,
    beta: Option<&ExpPoly>,
    gamma: Option<&ExpPoly>,
    delta: Option<&ExpPoly>,
) -> ExpPoly {
    let a2 = alpha.square();
    let zero = ExpPoly::zero();
    let b2 = beta.unwrap_or(&zero).square();
    match order {
        ChaosOrder::First => a2,
        ChaosOrder::SecondOneVar => a2.add(&b2.shift_degree(1)),
        ChaosOrder::SecondFactorizable => a2.add(&b2.mul(&factorizable_q(gamma))),
        ChaosOrder::ThirdOneVar => {
            let d2 = delta.unwrap_or(&zero).square();
            a2.add(&b2.shift_degree(1))
                .add(&d2.shift_degree(2).scale(0.5))
        }
    }
}

fn build_z_coeffs(
    order: ChaosOrder,
    alpha: &ExpPoly,
    beta: Option<&ExpPoly>,
    gamma: Option<&ExpPoly>,
    delta: Option<&ExpPoly>,
) -> Option<ZCoeffs> {
    let zero = ExpPoly::zero();
    let beta = beta.unwrap_or(&zero);
    match order {
        ChaosOrder::First => None,
        ChaosOrder::SecondOneVar | ChaosOrder::SecondFactorizable => {
            let q = factorizable_q(gamma);
            let b2 = beta.square();
            Some(ZCoeffs {
                integrands: [
                    alpha.square().add(&b2.mul(&q)),
                    alpha.mul(beta).scale(2.0),
                    b2,
                    ExpPoly::zero(),
                    ExpPoly::zero(),
                ],
                state_variance: q,
                third: false,
            })
        }
        ChaosOrder::ThirdOneVar => {
            let delta = delta.unwrap_or(&zero);
            let a2 = alpha.square();
            let b2 = beta.square();
            let d2 = delta.square();
            let sd = delta.shift_degree(1);
            Some(ZCoeffs {
                integrands: [
                    a2.add(&b2.shift_degree(1))
                        .add(&d2.shift_degree(2).scale(0.5)),
                    beta.mul(&alpha.add(&sd)).scale(2.0),
                    b2.add(&alpha.mul(delta)).add(&d2.shift_degree(1)),
                    delta.mul(beta),
                    d2.scale(0.25),
                ],
                state_variance: identity_variance(),
                third: true,
            })
        }
    }
}
