//! Payoff polynomials in a standard normal variable.
//!
//! Bond puts, caplets and swaptions in chaos models of order two and three
//! reduce to `E[p(Z)^+]` for a polynomial `p` of degree at most four. The
//! positive part splits at the real roots of `p`, and on each interval the
//! integral is a combination of truncated normal moments.

use nalgebra::{Complex, SMatrix, Schur};

use crate::error::{Error, Result};
use crate::normal::truncated_moments;

/// Relative size below which leading coefficients are dropped.
const DEGREE_CUTOFF: f64 = 1e-12;
/// Roots closer than this are treated as one (tangency).
const ROOT_MERGE_TOL: f64 = 1e-9;
/// QR sweeps before the eigenvalue route gives up.
const SCHUR_MAX_ITER: usize = 1000;

/// `p(z) = sum_k coeffs[k] z^k`, degree <= 4.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PayoffPoly {
    pub coeffs: [f64; 5],
}

impl PayoffPoly {
    pub fn new(coeffs: [f64; 5]) -> Self {
        Self { coeffs }
    }

    /// From up to five low-to-high coefficients.
    pub fn from_slice(c: &[f64]) -> Self {
        let mut coeffs = [0.0; 5];
        coeffs[..c.len()].copy_from_slice(c);
        Self { coeffs }
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * z + c)
    }

    fn derivative(&self, z: f64) -> f64 {
        (1..5)
            .rev()
            .fold(0.0, |acc, k| acc * z + k as f64 * self.coeffs[k])
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()))
    }

    /// Degree after dropping negligible leading coefficients.
    pub fn effective_degree(&self) -> Option<usize> {
        let scale = self.max_abs_coeff();
        if scale == 0.0 {
            return None;
        }
        (0..5)
            .rev()
            .find(|&k| self.coeffs[k].abs() > DEGREE_CUTOFF * scale)
    }

    /// `E[p(Z)]` for standard normal `Z`.
    pub fn mean(&self) -> f64 {
        let c = &self.coeffs;
        c[0] + c[2] + 3.0 * c[4]
    }
}

macro_rules! companion_eigenvalues {
    ($n:literal, $monic:expr) => {{
        // monic holds a_0 .. a_{n-1} of z^n + a_{n-1} z^{n-1} + ... + a_0
        let monic: &[f64] = $monic;
        let mut m = SMatrix::<f64, $n, $n>::zeros();
        for i in 1..$n {
            m[(i, i - 1)] = 1.0;
        }
        for i in 0..$n {
            m[(i, $n - 1)] = -monic[i];
        }
        Schur::try_new(m, f64::EPSILON, SCHUR_MAX_ITER)
            .map(|s| s.complex_eigenvalues().iter().copied().collect::<Vec<Complex<f64>>>())
    }};
}

fn eval_slice(c: &[f64], z: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, ck| acc * z + ck)
}

/// Real roots of `c` found between consecutive critical points, which come
/// from the derivative recursively. Each such interval is monotone.
fn bracketed_roots(c: &[f64]) -> Vec<f64> {
    let deg = c.len() - 1;
    if deg == 1 {
        return vec![-c[0] / c[1]];
    }
    let lead = c[deg];
    let bound = 1.0 + c[..deg].iter().fold(0.0f64, |m, ck| m.max((ck / lead).abs()));
    let deriv: Vec<f64> = (1..=deg).map(|k| k as f64 * c[k]).collect();
    let mut edges = vec![-bound];
    edges.extend(bracketed_roots(&deriv).into_iter().filter(|x| x.abs() < bound));
    edges.push(bound);
    let mut roots = Vec::new();
    for w in edges.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        let (flo, fhi) = (eval_slice(c, lo), eval_slice(c, hi));
        if flo == 0.0 {
            roots.push(lo);
            continue;
        }
        if flo.signum() == fhi.signum() {
            continue;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if eval_slice(c, mid).signum() == flo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        roots.push(0.5 * (lo + hi));
    }
    roots
}

/// Real roots in ascending order.
///
/// Eigenvalues of the companion matrix give the candidates; each is polished
/// by Newton steps and kept only if the residual is at rounding level.
pub fn real_roots(p: &PayoffPoly) -> Result<Vec<f64>> {
    let deg = p
        .effective_degree()
        .ok_or_else(|| Error::Domain("identically zero polynomial has no isolated roots".into()))?;
    let c = &p.coeffs;
    let mut candidates: Vec<f64> = match deg {
        0 => Vec::new(),
        1 => vec![-c[0] / c[1]],
        _ => {
            let lead = c[deg];
            let monic: Vec<f64> = (0..deg).map(|k| c[k] / lead).collect();
            let eig = match deg {
                2 => companion_eigenvalues!(2, &monic),
                3 => companion_eigenvalues!(3, &monic),
                _ => companion_eigenvalues!(4, &monic),
            };
            match eig {
                Some(eig) => eig
                    .into_iter()
                    .filter(|z| z.im.abs() <= 1e-6 * z.re.abs().max(1.0))
                    .map(|z| z.re)
                    .collect(),
                None => {
                    log::debug!("companion QR stalled for {:?}; bracketing roots instead", &c[..=deg]);
                    bracketed_roots(&c[..=deg])
                }
            }
        }
    };

    let trimmed = PayoffPoly::from_slice(&c[..=deg]);
    let residual_scale = |x: f64| {
        trimmed
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, ck)| ck.abs() * x.abs().powi(k as i32))
            .sum::<f64>()
    };
    for x in candidates.iter_mut() {
        let mut fx = trimmed.eval(*x);
        for _ in 0..16 {
            let d = trimmed.derivative(*x);
            if d == 0.0 || fx == 0.0 {
                break;
            }
            let next = *x - fx / d;
            let fn_ = trimmed.eval(next);
            if fn_.abs() >= fx.abs() {
                break;
            }
            *x = next;
            fx = fn_;
        }
    }
    candidates.retain(|x| x.is_finite() && trimmed.eval(*x).abs() <= 1e-10 * residual_scale(*x));
    candidates.sort_by(f64::total_cmp);
    let mut roots: Vec<f64> = Vec::with_capacity(candidates.len());
    for x in candidates {
        match roots.last() {
            Some(&last) if (x - last).abs() < ROOT_MERGE_TOL * last.abs().max(1.0) => {}
            _ => roots.push(x),
        }
    }
    Ok(roots)
}

/// `E[p(Z)^+] = int_{p >= 0} p(z) phi(z) dz`.
pub fn expected_positive_part(p: &PayoffPoly) -> f64 {
    let roots = match real_roots(p) {
        Ok(r) => r,
        Err(_) => return 0.0,
    };
    let mut edges = Vec::with_capacity(roots.len() + 2);
    edges.push(f64::NEG_INFINITY);
    edges.extend_from_slice(&roots);
    edges.push(f64::INFINITY);

    let mut total = 0.0;
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        let probe = match (a.is_finite(), b.is_finite()) {
            (true, true) => 0.5 * (a + b),
            (false, true) => b - 10.0,
            (true, false) => a + 10.0,
            (false, false) => 0.0,
        };
        if p.eval(probe) > 0.0 {
            let m = truncated_moments(a, b);
            total += p.coeffs.iter().zip(&m).map(|(c, mk)| c * mk).sum::<f64>();
        }
    }
    total.max(0.0)
}
