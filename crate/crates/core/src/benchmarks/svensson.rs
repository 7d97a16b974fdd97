use crate::error::{Error, Result};
use crate::pricing::Curve;

/// `f(0,T) = b0 + (b1 + b2 T) e^{-c1 T} + b3 T e^{-c2 T}`.
///
/// Nelson-Siegel is the `b3 = 0` case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvenssonParams {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub c1: f64,
    pub c2: f64,
}

impl SvenssonParams {
    pub fn new(b0: f64, b1: f64, b2: f64, b3: f64, c1: f64, c2: f64) -> Result<Self> {
        if !(c1 > 0.0 && c2 > 0.0) {
            return Err(Error::ParameterRejected(format!(
                "Svensson decays must be positive, got c1 = {c1}, c2 = {c2}"
            )));
        }
        Ok(Self { b0, b1, b2, b3, c1, c2 })
    }

    pub fn nelson_siegel(b0: f64, b1: f64, b2: f64, c1: f64) -> Result<Self> {
        Self::new(b0, b1, b2, 0.0, c1, 1.0)
    }

    pub fn flat(rate: f64) -> Self {
        Self {
            b0: rate,
            b1: 0.0,
            b2: 0.0,
            b3: 0.0,
            c1: 1.0,
            c2: 1.0,
        }
    }

    pub fn forward(&self, t: f64) -> f64 {
        self.b0 + (self.b1 + self.b2 * t) * (-self.c1 * t).exp() + self.b3 * t * (-self.c2 * t).exp()
    }

    /// `int_0^T f(0,s) ds`.
    pub fn integrated_forward(&self, t: f64) -> f64 {
        let one_minus = |x: f64| -(-x).exp_m1();
        let hump = |c: f64| (one_minus(c * t) - c * t * (-c * t).exp()) / (c * c);
        self.b0 * t + self.b1 * one_minus(self.c1 * t) / self.c1 + self.b2 * hump(self.c1) + self.b3 * hump(self.c2)
    }

    pub fn discount(&self, t: f64) -> f64 {
        (-self.integrated_forward(t)).exp()
    }

    /// `(b0, b1, b2, b3, c1, c2)`.
    pub fn to_vec(&self) -> Vec<f64> {
        vec![self.b0, self.b1, self.b2, self.b3, self.c1, self.c2]
    }
}

impl Curve for SvenssonParams {
    fn discount(&self, maturity: f64) -> Result<f64> {
        if maturity < 0.0 {
            return Err(Error::Domain(format!("negative maturity {maturity}")));
        }
        Ok(SvenssonParams::discount(self, maturity))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_curve() {
        let p = SvenssonParams::flat(0.04);
        for t in [0.0, 1.0, 7.5] {
            assert!((p.discount(t) - (-0.04 * t).exp()).abs() < 1e-15);
        }
        assert_eq!(p.discount(0.0), 1.0);
    }

    #[test]
    fn rejects_bad_decay() {
        assert!(SvenssonParams::new(0.03, 0.0, 0.0, 0.0, 0.0, 1.0).is_err());
    }
}
