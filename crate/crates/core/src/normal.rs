//! Standard normal density, distribution and truncated moments.

use crate::error::{domain, Result};
use statrs::function::erf::erfc;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

pub fn pdf(z: f64) -> f64 {
    if z.is_infinite() {
        return 0.0;
    }
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

pub fn cdf(z: f64) -> f64 {
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}

/// Upper tail `1 - Phi(z)` without cancellation.
pub fn sf(z: f64) -> f64 {
    0.5 * erfc(z * FRAC_1_SQRT_2)
}

/// `Phi(b) - Phi(a)` computed on whichever tail avoids cancellation.
pub fn mass(a: f64, b: f64) -> f64 {
    if a >= 0.0 {
        sf(a) - sf(b)
    } else if b <= 0.0 {
        cdf(b) - cdf(a)
    } else {
        1.0 - sf(b) - cdf(a)
    }
}

/// `x^k phi(x)`, zero at infinite `x`.
fn weighted_pdf(x: f64, k: usize) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        x.powi(k as i32) * pdf(x)
    }
}

/// `int_a^b z^k phi(z) dz` for `k = 0..=4` at once.
///
/// `M_k = (k-1) M_{k-2} + a^{k-1} phi(a) - b^{k-1} phi(b)`.
pub fn truncated_moments(a: f64, b: f64) -> [f64; 5] {
    let mut m = [0.0; 5];
    m[0] = mass(a, b);
    m[1] = pdf(a) - pdf(b);
    for k in 2..5 {
        m[k] = (k - 1) as f64 * m[k - 2] + weighted_pdf(a, k - 1) - weighted_pdf(b, k - 1);
    }
    m
}

/// `int_a^b z^k phi(z) dz`; the ends may be infinite.
pub fn truncated_moment(k: usize, a: f64, b: f64) -> Result<f64> {
    if a > b {
        return domain(format!("truncated moment with a = {a} > b = {b}"));
    }
    if k > 4 {
        return domain(format!("truncated moments are provided up to order 4, got {k}"));
    }
    Ok(truncated_moments(a, b)[k])
}
