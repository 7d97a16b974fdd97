#![allow(dead_code)]

use chaos_oracles::{gh_expectation, integrate, integrate_to_infinity};
use chaos_rates::calibration::{registry, ModelDef, Objective};
use chaos_rates::{ChaosOrder, ChaosSpec, ExpPoly, Model};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn e(coeffs: &[f64], c: f64) -> ExpPoly {
    ExpPoly::term(coeffs, c).unwrap()
}

pub fn chaos_defs() -> Vec<&'static ModelDef> {
    registry().iter().filter(|d| d.is_chaos()).collect()
}

pub fn b_defs() -> Vec<&'static ModelDef> {
    ["B1", "B2", "B3", "B4", "B5", "B6"]
        .iter()
        .map(|id| registry().iter().find(|d| d.id == *id).unwrap())
        .collect()
}

/// Parameters of moderate size: weights in [-1.5, 1.5], decays in [0.05, 1.2].
pub fn random_theta(def: &ModelDef, rng: &mut impl Rng) -> Vec<f64> {
    def.param_names(Objective::Joint)
        .iter()
        .map(|n| {
            if n.starts_with('c') {
                rng.random_range(0.05..1.2)
            } else {
                rng.random_range(-1.5..1.5)
            }
        })
        .collect()
}

pub fn build_spec(def: &ModelDef, theta: &[f64]) -> ChaosSpec {
    match def.build(theta, Objective::Joint, 30.0).unwrap() {
        Model::Chaos(s) => s,
        other => panic!("{} is not a chaos model: {other:?}", def.id),
    }
}

pub fn random_spec(defs: &[&ModelDef], rng: &mut impl Rng) -> (String, Vec<f64>, ChaosSpec) {
    let def = defs[rng.random_range(0..defs.len())];
    let theta = random_theta(def, rng);
    let spec = build_spec(def, &theta);
    (def.id.to_string(), theta, spec)
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// `int_t^inf f` for a smooth integrand decaying at rate `~decay`.
fn tail(f: impl Fn(f64) -> f64, t: f64, decay: f64) -> f64 {
    integrate_to_infinity(f, t, 1.0 / decay.max(0.05), 1e-12)
}

/// `E[sigma_s^2 | state_t = w]` built from the raw coefficient functions.
///
/// One-variable models: `sigma_s = a + b W_s + d (W_s^2 - s) / 2` with
/// `W_s = w + sqrt(s - t) xi`. Factorizable: `sigma_s = a + b R_s` with
/// `R_s = w + N(0, Q_s - Q_t)` and `Q = int gamma^2`.
fn conditional_psi(spec: &ChaosSpec, t: f64, s: f64, w: f64) -> f64 {
    let a = spec.alpha().eval(s);
    let zero = ExpPoly::zero();
    let b = spec.beta().unwrap_or(&zero).eval(s);
    match spec.order() {
        ChaosOrder::First => a * a,
        ChaosOrder::SecondFactorizable => {
            let g = spec.gamma().unwrap();
            let var = integrate(|u| g.eval(u).powi(2), t, s, 1e-13, 0.0);
            let m = a + b * w;
            m * m + b * b * var
        }
        ChaosOrder::SecondOneVar | ChaosOrder::ThirdOneVar => {
            let d = spec.delta().unwrap_or(&zero).eval(s);
            let sd = (s - t).sqrt();
            gh_expectation(12, |xi| {
                let ws = w + sd * xi;
                let sig = a + b * ws + 0.5 * d * (ws * ws - s);
                sig * sig
            })
        }
    }
}

/// `Z_tT(w) = int_T^inf E[sigma_s^2 | F_t] ds`, by quadrature.
pub fn z_oracle(spec: &ChaosSpec, t: f64, maturity: f64, w: f64) -> f64 {
    let decay = spec.psi().min_decay();
    tail(|s| conditional_psi(spec, t, s, w), maturity, decay)
}

/// Variance of the state at time `t`, by quadrature.
pub fn state_variance_oracle(spec: &ChaosSpec, t: f64) -> f64 {
    match spec.order() {
        ChaosOrder::First => 0.0,
        ChaosOrder::SecondFactorizable => {
            let g = spec.gamma().unwrap();
            integrate(|u| g.eval(u).powi(2), 0.0, t, 1e-14, 0.0)
        }
        _ => t,
    }
}

/// `sum_j w_j Z_{t T_j}` as a function of the standardized state, from the
/// quadrature `Z`.
///
/// `sigma_s^2` is quartic in the state, so the payoff is a quartic in `z` as
/// well; it is sampled at nine Chebyshev nodes on `[-12, 12]` and evaluated by
/// Lagrange interpolation to keep the sign-change scan affordable.
pub fn payoff_fn(spec: &ChaosSpec, t: f64, legs: &[(f64, f64)]) -> impl Fn(f64) -> f64 {
    let sd = state_variance_oracle(spec, t).sqrt();
    let exact = |z: f64| legs.iter().map(|&(w, m)| w * z_oracle(spec, t, m, sd * z)).sum::<f64>();
    let nodes: Vec<f64> = (0..9)
        .map(|k| 12.0 * ((2 * k + 1) as f64 * std::f64::consts::PI / 18.0).cos())
        .collect();
    let values: Vec<f64> = nodes.iter().map(|&z| exact(z)).collect();
    move |z: f64| {
        let mut total = 0.0;
        for (i, (&xi, &yi)) in nodes.iter().zip(&values).enumerate() {
            let l: f64 = nodes
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &xj)| (z - xj) / (xi - xj))
                .product();
            total += yi * l;
        }
        total
    }
}

/// `E[(sum_j w_j Z_{t T_j})^+] / V_0`, integrating the quadrature `Z` over
/// the state distribution.
pub fn payoff_oracle(spec: &ChaosSpec, t: f64, legs: &[(f64, f64)]) -> f64 {
    chaos_oracles::normal_expectation_positive(payoff_fn(spec, t, legs)) / spec.v0()
}

/// Monte Carlo time-0 put on the `T`-bond with expiry `t` in Hull-White,
/// sampling `(x_t, int_0^t x)` exactly for `r = x + phi` with `x` the
/// zero-mean OU factor. Returns `(mean, standard error)`.
pub fn hull_white_put_mc(
    kappa: f64,
    eta: f64,
    discount: impl Fn(f64) -> f64,
    t: f64,
    maturity: f64,
    strike: f64,
    paths: usize,
    seed: u64,
) -> (f64, f64) {
    use rand_distr::{Distribution, StandardNormal};
    let k = kappa;
    let e2 = eta * eta;
    // variance of int_t^T x given x_t = 0
    let v = |h: f64| e2 / (k * k) * (h + 2.0 / k * (-k * h).exp() - 0.5 / k * (-2.0 * k * h).exp() - 1.5 / k);
    let b = (1.0 - (-k * (maturity - t)).exp()) / k;
    let var_x = e2 / (2.0 * k) * (1.0 - (-2.0 * k * t).exp());
    let var_i = v(t);
    let cov = e2 / (2.0 * k * k) * (1.0 - (-k * t).exp()).powi(2);
    // Cholesky of the (x_t, I_t) covariance
    let (l11, l21) = (var_x.sqrt(), cov / var_x.sqrt());
    let l22 = (var_i - l21 * l21).max(0.0).sqrt();
    let (p_t, p_m) = (discount(t), discount(maturity));
    let bond_drift = p_m / p_t * (0.5 * (v(maturity - t) - v(maturity) + v(t))).exp();
    let mut g = rng(seed);
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..paths / 2 {
        let z1: f64 = StandardNormal.sample(&mut g);
        let z2: f64 = StandardNormal.sample(&mut g);
        let mut pair = 0.0;
        for s in [1.0, -1.0] {
            let x = s * l11 * z1;
            let i = s * (l21 * z1 + l22 * z2);
            let d = p_t * (-0.5 * var_i - i).exp();
            let bond = bond_drift * (-b * x).exp();
            pair += 0.5 * d * (strike - bond).max(0.0);
        }
        sum += pair;
        sum_sq += pair * pair;
    }
    let n = (paths / 2) as f64;
    let mean = sum / n;
    (mean, ((sum_sq / n - mean * mean) / n).sqrt())
}
