//! Quadrature rules used as independent oracles by the `chaos-rates` tests.
//!
//! Nothing here knows about interest-rate models. Every routine takes a plain
//! closure so the checks stay independent of the closed-form code paths they
//! are compared against.

use nalgebra::{DMatrix, SymmetricEigen};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
pub fn normal_pdf(z: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Gauss-Legendre nodes and weights on [-1, 1].
///
/// Newton iteration on the three-term recurrence; accurate to a few ulps for
/// `n` in the hundreds.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Gauss-Hermite rule for the standard normal weight: `sum w_i f(x_i) ~ E[f(Z)]`.
///
/// Golub-Welsch on the probabilists' Jacobi matrix; weights sum to one.
pub fn gauss_hermite_normal(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = (k as f64).sqrt();
        jac[(k - 1, k)] = b;
        jac[(k, k - 1)] = b;
    }
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // symmetrize to remove eigen-solver asymmetry
    let mut nodes: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let mut weights: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let x = 0.5 * (nodes[j] - nodes[i]);
        let w = 0.5 * (weights[i] + weights[j]);
        nodes[i] = -x;
        nodes[j] = x;
        weights[i] = w;
        weights[j] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    (nodes, weights)
}

/// `E[f(Z)]` for standard normal `Z` by an `n`-node Gauss-Hermite rule.
pub fn gh_expectation(n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let (x, w) = gauss_hermite_normal(n);
    x.iter().zip(&w).map(|(xi, wi)| wi * f(*xi)).sum()
}

const GK_X: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GK_WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = GK_WK[7] * fc;
    let mut g = GK_WG[3] * fc;
    for i in 0..7 {
        let dx = h * GK_X[i];
        let s = f(c - dx) + f(c + dx);
        k += GK_WK[i] * s;
        if i % 2 == 1 {
            g += GK_WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss-Kronrod (7/15) quadrature on a finite interval.
///
/// Bisects the interval with the largest error estimate until the summed
/// estimate drops below `max(abs_tol, rel_tol * |I|)`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> f64 {
    let f = &f as &dyn Fn(f64) -> f64;
    let (v, e) = gk15(f, a, b);
    let mut parts = vec![(a, b, v, e)];
    for _ in 0..20_000 {
        let total: f64 = parts.iter().map(|p| p.2).sum();
        let err: f64 = parts.iter().map(|p| p.3).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) {
            break;
        }
        let (idx, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .unwrap();
        let (lo, hi, _, _) = parts.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(f, lo, mid);
        let (v2, e2) = gk15(f, mid, hi);
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
    // sum in interval order so the result does not depend on refinement history
    parts.sort_by(|x, y| x.0.total_cmp(&y.0));
    parts.iter().map(|p| p.2).sum()
}

/// `int_a^inf f(s) ds` using `s = a + scale * x / (1 - x)`.
///
/// `scale` should be of the order of the integrand's decay length.
pub fn integrate_to_infinity(f: impl Fn(f64) -> f64, a: f64, scale: f64, rel_tol: f64) -> f64 {
    let g = |x: f64| {
        if x >= 1.0 {
            return 0.0;
        }
        let d = 1.0 - x;
        let s = a + scale * x / d;
        let v = f(s) * scale / (d * d);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    // split so the map's endpoint crowding does not hide the bulk
    let knots = [0.0, 0.5, 0.8, 0.95, 0.99, 0.999, 1.0];
    // tolerance is relative to the whole integral, not to each piece
    let rough: f64 = knots.windows(2).map(|w| gk15(&g, w[0], w[1]).0).sum();
    let abs_tol = rel_tol * rough.abs() / knots.len() as f64;
    knots
        .windows(2)
        .map(|w| integrate(g, w[0], w[1], 0.0, abs_tol))
        .sum()
}

/// Sign changes of `f` on `[lo, hi]`, located by a uniform scan and bisection.
pub fn sign_changes(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    let mut out = Vec::new();
    let h = (hi - lo) / steps as f64;
    let mut x0 = lo;
    let mut f0 = f(x0);
    for i in 1..=steps {
        let x1 = lo + h * i as f64;
        let f1 = f(x1);
        if f0 == 0.0 {
            out.push(x0);
        } else if f0 * f1 < 0.0 {
            let (mut a, mut b, mut fa) = (x0, x1, f0);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                let fm = f(m);
                if fm == 0.0 || b - a < 1e-15 {
                    a = m;
                    b = m;
                    break;
                }
                if fa * fm < 0.0 {
                    b = m;
                } else {
                    a = m;
                    fa = fm;
                }
            }
            out.push(0.5 * (a + b));
        }
        x0 = x1;
        f0 = f1;
    }
    out
}

/// `E[max(f(Z), 0)]` for standard normal `Z`.
///
/// The positive part is kinked wherever `f` changes sign, which ruins global
/// Gauss-Hermite convergence. The real line is truncated to `[-12, 12]`, split
/// at numerically located sign changes, and each smooth piece is integrated
/// with a 200-node Gauss-Legendre rule against the normal density.
pub fn normal_expectation_positive(f: impl Fn(f64) -> f64) -> f64 {
    let f = &f as &dyn Fn(f64) -> f64;
    let (lo, hi) = (-12.0, 12.0);
    let mut knots = vec![lo];
    knots.extend(sign_changes(f, lo, hi, 4800));
    knots.push(hi);
    let (x, w) = gauss_legendre(200);
    let mut total = 0.0;
    for seg in knots.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        if b <= a {
            continue;
        }
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let s: f64 = x
            .iter()
            .zip(&w)
            .map(|(xi, wi)| {
                let z = c + h * xi;
                wi * f(z).max(0.0) * normal_pdf(z)
            })
            .sum();
        total += s * h;
    }
    total
}

/// Literal global Gauss-Hermite estimate of `E[max(f(Z), 0)]` (no kink handling).
pub fn gh_expectation_positive(n: usize, f: impl Fn(f64) -> f64) -> f64 {
    gh_expectation(n, |z| f(z).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(10);
        let s: f64 = x.iter().zip(&w).map(|(a, b)| b * a.powi(6)).sum();
        assert!((s - 2.0 / 7.0).abs() < 1e-14);
    }

    #[test]
    fn hermite_moments() {
        assert!((gh_expectation(64, |z| z * z) - 1.0).abs() < 1e-12);
        assert!((gh_expectation(64, |z| z.powi(4)) - 3.0).abs() < 1e-11);
        assert!((gh_expectation(200, |z| z.powi(6)) - 15.0).abs() < 1e-9);
    }

    #[test]
    fn adaptive_matches_closed_form() {
        let v = integrate_to_infinity(|s| s * s * (-2.0 * s).exp(), 1.0, 0.5, 1e-13);
        // int_1^inf s^2 e^{-2s} = e^{-2} (1/2 + 1/2 + 1/4)
        let exact = (-2.0f64).exp() * 1.25;
        assert!((v / exact - 1.0).abs() < 1e-12);
    }

    #[test]
    fn positive_part_of_identity() {
        let v = normal_expectation_positive(|z| z);
        assert!((v - INV_SQRT_2PI).abs() < 1e-14);
    }
}
