//! Exponential-polynomial functions `sum_i L_i(s) exp(-c_i s)`.
//!
//! Every chaos coefficient function lives in this family, and the family is
//! closed under products and under `int_T^inf`, so bond and option formulas
//! never need numerical quadrature.

use crate::error::{domain, Error, Result};

/// Admissible decay range for user-supplied coefficient functions.
pub const MIN_DECAY: f64 = 1e-4;
pub const MAX_DECAY: f64 = 50.0;
/// Highest polynomial degree allowed in a coefficient function.
pub const MAX_DEGREE: usize = 3;
/// Decays closer than this are merged into one term.
const DECAY_MERGE_TOL: f64 = 1e-9;

/// One `L(s) exp(-c s)` term; `coeffs[j]` multiplies `s^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coeffs: Vec<f64>,
    pub decay: f64,
}

impl Term {
    fn eval(&self, s: f64) -> f64 {
        let poly = self.coeffs.iter().rev().fold(0.0, |acc, b| acc * s + b);
        poly * (-self.decay * s).exp()
    }

    fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExpPoly {
    terms: Vec<Term>,
}

/// `int_T^inf s^n exp(-c s) ds`, exact.
///
/// Uses `I_n = (T^n e^{-cT} + n I_{n-1}) / c`; for `T >= 0` every summand is
/// nonnegative so the recursion is stable.
pub fn tail_moment(n: usize, c: f64, t: f64) -> Result<f64> {
    if !(c > 0.0) {
        return domain(format!("tail moment needs a positive decay, got {c}"));
    }
    if t < 0.0 {
        return domain(format!("tail moment lower limit must be >= 0, got {t}"));
    }
    Ok(tail_moments(n, c, t)[n])
}

/// All of `I_0 .. I_n` at once.
pub(crate) fn tail_moments(n: usize, c: f64, t: f64) -> Vec<f64> {
    let e = (-c * t).exp();
    let mut out = Vec::with_capacity(n + 1);
    let mut prev = e / c;
    out.push(prev);
    let mut tp = 1.0;
    for k in 1..=n {
        tp *= t;
        prev = (tp * e + k as f64 * prev) / c;
        out.push(prev);
    }
    out
}

impl ExpPoly {
    /// Validated constructor for coefficient functions.
    pub fn new(terms: Vec<Term>) -> Result<Self> {
        for t in &terms {
            if !(MIN_DECAY..=MAX_DECAY).contains(&t.decay) {
                return Err(Error::Specification(format!(
                    "decay {} outside [{MIN_DECAY}, {MAX_DECAY}]",
                    t.decay
                )));
            }
            if t.degree() > MAX_DEGREE {
                return Err(Error::Specification(format!(
                    "polynomial degree {} exceeds {MAX_DEGREE}",
                    t.degree()
                )));
            }
            if t.coeffs.iter().any(|b| !b.is_finite()) {
                return Err(Error::Specification("non-finite coefficient".into()));
            }
        }
        Ok(Self::normalized(terms))
    }

    /// Single term `(b_0 + b_1 s + ...) exp(-c s)`.
    pub fn term(coeffs: &[f64], decay: f64) -> Result<Self> {
        Self::new(vec![Term {
            coeffs: coeffs.to_vec(),
            decay,
        }])
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// The constant function `k` (a zero-decay term).
    ///
    /// Only meaningful where no tail integral of the function itself is
    /// taken, e.g. a factorizable `gamma`, which enters through `int_0^s gamma^2`.
    pub fn constant(k: f64) -> Self {
        Self::normalized(vec![Term {
            coeffs: vec![k],
            decay: 0.0,
        }])
    }

    /// Smallest decay among the terms (`inf` for the zero function).
    pub fn min_decay(&self) -> f64 {
        self.terms.iter().map(|t| t.decay).fold(f64::INFINITY, f64::min)
    }

    /// Builds without range checks; decays may be zero for intermediate
    /// quantities such as `int_0^s gamma^2`.
    pub(crate) fn normalized(terms: Vec<Term>) -> Self {
        let mut merged: Vec<Term> = Vec::with_capacity(terms.len());
        for t in terms {
            match merged
                .iter_mut()
                .find(|m| (m.decay - t.decay).abs() < DECAY_MERGE_TOL)
            {
                Some(m) => {
                    if m.coeffs.len() < t.coeffs.len() {
                        m.coeffs.resize(t.coeffs.len(), 0.0);
                    }
                    for (a, b) in m.coeffs.iter_mut().zip(&t.coeffs) {
                        *a += b;
                    }
                }
                None => merged.push(t),
            }
        }
        for m in &mut merged {
            while m.coeffs.last() == Some(&0.0) {
                m.coeffs.pop();
            }
        }
        merged.retain(|m| !m.coeffs.is_empty());
        merged.sort_by(|a, b| a.decay.total_cmp(&b.decay));
        Self { terms: merged }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.terms.iter().map(|t| t.eval(s)).sum()
    }

    pub fn scale(&self, k: f64) -> Self {
        if k == 0.0 {
            return Self::zero();
        }
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coeffs: t.coeffs.iter().map(|b| b * k).collect(),
                    decay: t.decay,
                })
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self::normalized(terms)
    }

    /// Term-by-term product: degrees add, decays add.
    pub fn mul(&self, other: &Self) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let mut coeffs = vec![0.0; a.coeffs.len() + b.coeffs.len() - 1];
                for (i, x) in a.coeffs.iter().enumerate() {
                    for (j, y) in b.coeffs.iter().enumerate() {
                        coeffs[i + j] += x * y;
                    }
                }
                terms.push(Term {
                    coeffs,
                    decay: a.decay + b.decay,
                });
            }
        }
        Self::normalized(terms)
    }

    pub fn square(&self) -> Self {
        self.mul(self)
    }

    /// Multiplies by `s^k`.
    pub fn shift_degree(&self, k: usize) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| {
                    let mut coeffs = vec![0.0; k];
                    coeffs.extend_from_slice(&t.coeffs);
                    Term {
                        coeffs,
                        decay: t.decay,
                    }
                })
                .collect(),
        }
    }

    /// `int_0^s f(u) du` as a new exponential polynomial.
    ///
    /// Positive-decay terms contribute a constant (zero-decay) term plus a
    /// decaying part; zero-decay terms integrate to higher-degree polynomials.
    pub fn integral_from_zero(&self) -> Self {
        let mut out = Vec::new();
        for t in &self.terms {
            if t.decay == 0.0 {
                let mut coeffs = vec![0.0; t.coeffs.len() + 1];
                for (j, b) in t.coeffs.iter().enumerate() {
                    coeffs[j + 1] = b / (j + 1) as f64;
                }
                out.push(Term { coeffs, decay: 0.0 });
                continue;
            }
            let c = t.decay;
            // int_0^s u^n e^{-cu} du = n!/c^{n+1} - e^{-cs} sum_k n!/k! s^k / c^{n-k+1}
            let mut constant = 0.0;
            let mut decaying = vec![0.0; t.coeffs.len()];
            for (n, b) in t.coeffs.iter().enumerate() {
                if *b == 0.0 {
                    continue;
                }
                let mut fact_n = 1.0;
                for i in 1..=n {
                    fact_n *= i as f64;
                }
                constant += b * fact_n / c.powi(n as i32 + 1);
                let mut fact_k = 1.0;
                for k in 0..=n {
                    if k > 0 {
                        fact_k *= k as f64;
                    }
                    decaying[k] -= b * fact_n / fact_k / c.powi((n - k) as i32 + 1);
                }
            }
            out.push(Term {
                coeffs: vec![constant],
                decay: 0.0,
            });
            out.push(Term {
                coeffs: decaying,
                decay: c,
            });
        }
        Self::normalized(out)
    }

    /// `int_T^inf f(s) ds`.
    pub fn tail_integral(&self, t: f64) -> Result<f64> {
        if t < 0.0 {
            return domain(format!("tail integral from negative time {t}"));
        }
        let mut total = 0.0;
        for term in &self.terms {
            if !(term.decay > 0.0) {
                return domain("tail integral of a non-decaying term diverges");
            }
            let moments = tail_moments(term.degree(), term.decay, t);
            total += term
                .coeffs
                .iter()
                .zip(&moments)
                .map(|(b, m)| b * m)
                .sum::<f64>();
        }
        Ok(total)
    }
}
