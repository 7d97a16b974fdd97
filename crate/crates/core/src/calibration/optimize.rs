//! Bounded multistart minimisation: Nelder-Mead with restarts, polished by
//! BFGS on central finite differences.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::Optimization("bounds must be non-empty and of equal length".into()));
        }
        for (i, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if !(l.is_finite() && u.is_finite() && l < u) {
                return Err(Error::Optimization(format!("bad bound {i}: [{l}, {u}]")));
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn clamp(&self, x: &mut [f64]) {
        for ((xi, l), u) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            *xi = xi.clamp(*l, *u);
        }
    }

    fn width(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Vec<f64> {
        (0..self.dim())
            .map(|i| self.lower[i] + rng.random::<f64>() * self.width(i))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct LocalOptions {
    pub max_evals: usize,
    pub ftol: f64,
    pub restarts: usize,
    pub polish: bool,
}

impl Default for LocalOptions {
    fn default() -> Self {
        Self {
            max_evals: 4000,
            ftol: 1e-12,
            restarts: 3,
            polish: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
}

struct Counted<'a, F: ?Sized> {
    f: &'a F,
    bounds: &'a Bounds,
    evals: usize,
}

impl<F: Fn(&[f64]) -> f64 + ?Sized> Counted<'_, F> {
    fn eval(&mut self, x: &[f64]) -> f64 {
        self.evals += 1;
        let mut y = x.to_vec();
        self.bounds.clamp(&mut y);
        let v = (self.f)(&y);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    }
}

fn nelder_mead_once<F: Fn(&[f64]) -> f64 + ?Sized>(
    obj: &mut Counted<'_, F>,
    x0: &[f64],
    f0: f64,
    scale: f64,
    budget: usize,
    ftol: f64,
) -> (Vec<f64>, f64) {
    let n = x0.len();
    let nf = n as f64;
    // adaptive coefficients for higher dimensions
    let (alpha, gamma, rho, sigma) = (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf);
    let bounds = obj.bounds;
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f0));
    for i in 0..n {
        let mut x = x0.to_vec();
        let h = scale * bounds.width(i);
        x[i] = if x[i] + h <= bounds.upper[i] { x[i] + h } else { x[i] - h };
        let f = obj.eval(&x);
        simplex.push((x, f));
    }
    let start = obj.evals;
    let clamp = |mut v: Vec<f64>| {
        bounds.clamp(&mut v);
        v
    };
    while obj.evals - start < budget {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (fb, fw) = (simplex[0].1, simplex[n].1);
        if fw.is_finite() && (fw - fb).abs() <= ftol * (fb.abs() + ftol) {
            let spread = (0..n)
                .map(|i| {
                    simplex
                        .iter()
                        .map(|(x, _)| (x[i] - simplex[0].0[i]).abs() / bounds.width(i))
                        .fold(0.0, f64::max)
                })
                .fold(0.0, f64::max);
            if spread < 1e-9 || (fw - fb).abs() <= f64::EPSILON * fb.abs() {
                break;
            }
        }
        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for i in 0..n {
                centroid[i] += x[i] / nf;
            }
        }
        let worst = simplex[n].0.clone();
        let along = |t: f64| -> Vec<f64> { clamp((0..n).map(|i| centroid[i] + t * (worst[i] - centroid[i])).collect()) };
        let xr = along(-alpha);
        let fr = obj.eval(&xr);
        if fr < simplex[0].1 {
            let xe = along(-alpha * gamma);
            let fe = obj.eval(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < simplex[n].1 {
                let x = along(-alpha * rho);
                let f = obj.eval(&x);
                (x, f)
            } else {
                let x = along(rho);
                let f = obj.eval(&x);
                (x, f)
            };
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for (x, f) in simplex.iter_mut().skip(1) {
                    for i in 0..n {
                        x[i] = best[i] + sigma * (x[i] - best[i]);
                    }
                    *f = obj.eval(x);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex.swap_remove(0)
}

fn gradient<F: Fn(&[f64]) -> f64 + ?Sized>(obj: &mut Counted<'_, F>, x: &[f64], fx: f64) -> Vec<f64> {
    let bounds = obj.bounds;
    (0..x.len())
        .map(|i| {
            let h = 1e-6 * x[i].abs().max(1e-2).min(bounds.width(i));
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[i] = (x[i] + h).min(bounds.upper[i]);
            xm[i] = (x[i] - h).max(bounds.lower[i]);
            let (fp, fm) = (
                if xp[i] == x[i] { fx } else { obj.eval(&xp) },
                if xm[i] == x[i] { fx } else { obj.eval(&xm) },
            );
            let d = xp[i] - xm[i];
            if d > 0.0 && fp.is_finite() && fm.is_finite() {
                (fp - fm) / d
            } else {
                0.0
            }
        })
        .collect()
}

/// Projected BFGS with Armijo backtracking.
fn bfgs_polish<F: Fn(&[f64]) -> f64 + ?Sized>(
    obj: &mut Counted<'_, F>,
    x0: Vec<f64>,
    f0: f64,
    max_iter: usize,
) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut h = vec![vec![0.0; n]; n];
    for (i, row) in h.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let (mut x, mut fx) = (x0, f0);
    let mut g = gradient(obj, &x, fx);
    let mut stalls = 0;
    for _ in 0..max_iter {
        let gnorm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(gnorm > 1e-14) {
            break;
        }
        let mut p: Vec<f64> = (0..n).map(|i| -(0..n).map(|j| h[i][j] * g[j]).sum::<f64>()).collect();
        let mut slope: f64 = p.iter().zip(&g).map(|(a, b)| a * b).sum();
        if !(slope < 0.0) {
            for row in h.iter_mut() {
                row.iter_mut().for_each(|v| *v = 0.0);
            }
            for (i, row) in h.iter_mut().enumerate() {
                row[i] = 1.0;
            }
            p = g.iter().map(|v| -v).collect();
            slope = -gnorm * gnorm;
        }
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let mut xn: Vec<f64> = (0..n).map(|i| x[i] + step * p[i]).collect();
            obj.bounds.clamp(&mut xn);
            let fnew = obj.eval(&xn);
            if fnew <= fx + 1e-4 * step * slope || (fnew < fx && step < 1e-6) {
                accepted = Some((xn, fnew));
                break;
            }
            step *= 0.5;
        }
        let Some((xn, fnew)) = accepted else { break };
        let gn = gradient(obj, &xn, fnew);
        let s: Vec<f64> = (0..n).map(|i| xn[i] - x[i]).collect();
        let y: Vec<f64> = (0..n).map(|i| gn[i] - g[i]).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        let improvement = fx - fnew;
        x = xn;
        fx = fnew;
        g = gn;
        if sy > 1e-300 {
            let hy: Vec<f64> = (0..n).map(|i| (0..n).map(|j| h[i][j] * y[j]).sum()).collect();
            let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
            for i in 0..n {
                for j in 0..n {
                    h[i][j] += ((sy + yhy) * s[i] * s[j]) / (sy * sy) - (hy[i] * s[j] + s[i] * hy[j]) / sy;
                }
            }
        }
        if improvement <= 1e-15 * fx.abs().max(1e-300) {
            stalls += 1;
            if stalls == 3 {
                break;
            }
        } else {
            stalls = 0;
        }
    }
    (x, fx)
}

fn newton_step(bounds: &Bounds, x: &[f64], i: usize) -> f64 {
    1e-4 * x[i].abs().max(1e-2).min(bounds.width(i))
}

/// Coordinates at least two Newton steps inside the bounds.
fn free_coords(bounds: &Bounds, x: &[f64]) -> Vec<usize> {
    (0..x.len())
        .filter(|&i| {
            let h = 2.0 * newton_step(bounds, x, i);
            x[i] - h > bounds.lower[i] && x[i] + h < bounds.upper[i]
        })
        .collect()
}

/// Richardson-extrapolated central differences on `free`; zero elsewhere.
fn fine_gradient<F: Fn(&[f64]) -> f64 + ?Sized>(obj: &mut Counted<'_, F>, x: &[f64], free: &[usize]) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    for &i in free {
        let h = newton_step(obj.bounds, x, i);
        let mut central = |h: f64| {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[i] += h;
            xm[i] -= h;
            (obj.eval(&xp) - obj.eval(&xm)) / (2.0 * h)
        };
        let (wide, narrow) = (central(h), central(0.5 * h));
        g[i] = (4.0 * narrow - wide) / 3.0;
    }
    g
}

/// Newton iterations on the finite-difference gradient over the coordinates
/// away from the bounds.
///
/// Near a stiff optimum the objective changes by less than its rounding
/// error long before the gradient vanishes, so steps are accepted on a
/// smaller gradient rather than on a smaller value.
fn newton_refine<F: Fn(&[f64]) -> f64 + ?Sized>(obj: &mut Counted<'_, F>, x0: Vec<f64>, f0: f64, max_iter: usize) -> (Vec<f64>, f64) {
    let norm = |g: &[f64]| g.iter().map(|v| v * v).sum::<f64>().sqrt();
    let (mut x, mut fx) = (x0, f0);
    let bounds = obj.bounds;
    let free = free_coords(bounds, &x);
    if free.is_empty() {
        return (x, fx);
    }
    let mut g = fine_gradient(obj, &x, &free);
    for _ in 0..max_iter {
        let gnorm = norm(&g);
        if !(gnorm > 0.0) {
            break;
        }
        let m = free.len();
        let mut hess = nalgebra::DMatrix::<f64>::zeros(m, m);
        for (c, &j) in free.iter().enumerate() {
            let h = newton_step(bounds, &x, j);
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            let (fp, fm) = (obj.eval(&xp), obj.eval(&xm));
            let (gp, gm) = (gradient(obj, &xp, fp), gradient(obj, &xm, fm));
            for (r, &i) in free.iter().enumerate() {
                hess[(r, c)] = (gp[i] - gm[i]) / (2.0 * h);
            }
        }
        let hess = 0.5 * (&hess + hess.transpose());
        let rhs = nalgebra::DVector::from_iterator(m, free.iter().map(|&i| -g[i]));
        let svd = hess.svd(true, true);
        let tol = 1e-10 * svd.singular_values.max();
        let Ok(delta) = svd.solve(&rhs, tol) else { break };
        let mut xn = x.clone();
        for (r, &i) in free.iter().enumerate() {
            xn[i] += delta[r];
        }
        bounds.clamp(&mut xn);
        let fnew = obj.eval(&xn);
        if !(fnew <= fx + 1e-12 * fx.abs()) || free_coords(bounds, &xn) != free {
            break;
        }
        let gn = fine_gradient(obj, &xn, &free);
        if !(norm(&gn) < gnorm) {
            break;
        }
        x = xn;
        fx = fnew;
        g = gn;
    }
    (x, fx)
}

/// Up to `max_iter` Newton steps on the gradient from `x`, which must lie in
/// `bounds`; returns the point, its value and the evaluations used.
pub fn refine_stationary<F: Fn(&[f64]) -> f64 + ?Sized>(f: &F, x: &[f64], bounds: &Bounds, max_iter: usize) -> (Vec<f64>, f64, usize) {
    let mut obj = Counted { f, bounds, evals: 0 };
    let fx = obj.eval(x);
    let (x, fx) = newton_refine(&mut obj, x.to_vec(), fx, max_iter);
    (x, fx, obj.evals)
}

/// Nelder-Mead from `x0` with restarts, then a BFGS polish.
pub fn local_minimize<F: Fn(&[f64]) -> f64 + ?Sized>(
    f: &F,
    x0: &[f64],
    bounds: &Bounds,
    opts: &LocalOptions,
) -> LocalResult {
    let mut obj = Counted { f, bounds, evals: 0 };
    let mut x = x0.to_vec();
    bounds.clamp(&mut x);
    let mut fx = obj.eval(&x);
    let mut scale = 0.05;
    for round in 0..=opts.restarts {
        let remaining = opts.max_evals.saturating_sub(obj.evals);
        if remaining == 0 {
            break;
        }
        let (xn, fnew) = nelder_mead_once(&mut obj, &x, fx, scale, remaining, opts.ftol);
        let gained = fx - fnew;
        if fnew <= fx {
            x = xn;
            fx = fnew;
        }
        if round > 0 && !(gained > opts.ftol * fx.abs().max(1e-300)) {
            break;
        }
        scale = 0.02;
    }
    if opts.polish && fx.is_finite() {
        let (xp, fp) = bfgs_polish(&mut obj, x.clone(), fx, 200);
        if fp <= fx {
            x = xp;
            fx = fp;
        }
    }
    bounds.clamp(&mut x);
    LocalResult { x, f: fx, evals: obj.evals }
}

#[derive(Debug, Clone)]
pub struct MultistartOptions {
    pub n_starts: usize,
    pub seed: u64,
    pub local: LocalOptions,
    /// Points tried before the random starts (indices `0..initial.len()`).
    pub initial: Vec<Vec<f64>>,
}

impl MultistartOptions {
    pub fn new(n_starts: usize, seed: u64) -> Self {
        Self {
            n_starts,
            seed,
            local: LocalOptions::default(),
            initial: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultistartResult {
    pub x: Vec<f64>,
    pub f: f64,
    /// Index of the winning start.
    pub start: usize,
    pub n_starts: usize,
    /// Starts that ended at a finite objective.
    pub n_finite: usize,
    pub evals: usize,
    pub seed: u64,
}

/// Draws per start before settling for an infeasible point.
pub const START_DRAWS: usize = 100;

/// Start `index` draws from its own ChaCha stream, so the set of start points
/// does not depend on scheduling.
pub fn start_point(bounds: &Bounds, seed: u64, index: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    bounds.sample(&mut rng)
}

/// First point of start `index`'s stream with a finite objective, or the
/// first draw if none of [`START_DRAWS`] is.
pub fn feasible_start_point<F>(f: &F, bounds: &Bounds, seed: u64, index: usize) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64 + ?Sized,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let first = bounds.sample(&mut rng);
    if f(&first).is_finite() {
        return first;
    }
    (1..START_DRAWS)
        .map(|_| bounds.sample(&mut rng))
        .find(|x| f(x).is_finite())
        .unwrap_or(first)
}

pub fn multistart_optimize<F>(f: &F, bounds: &Bounds, opts: &MultistartOptions) -> Result<MultistartResult>
where
    F: Fn(&[f64]) -> f64 + Sync + ?Sized,
{
    let total = opts.initial.len() + opts.n_starts;
    if total == 0 {
        return Err(Error::Optimization("at least one start is required".into()));
    }
    for p in &opts.initial {
        if p.len() != bounds.dim() {
            return Err(Error::Optimization("initial point has the wrong dimension".into()));
        }
    }
    let outcomes: Vec<LocalResult> = (0..total)
        .into_par_iter()
        .map(|i| {
            let x0 = if i < opts.initial.len() {
                opts.initial[i].clone()
            } else {
                feasible_start_point(f, bounds, opts.seed, i - opts.initial.len())
            };
            local_minimize(f, &x0, bounds, &opts.local)
        })
        .collect();
    let evals: usize = outcomes.iter().map(|r| r.evals).sum();
    let n_finite = outcomes.iter().filter(|r| r.f.is_finite()).count();
    let best = outcomes
        .iter()
        .enumerate()
        .filter(|(_, r)| r.f.is_finite())
        .min_by(|(i, a), (j, b)| a.f.total_cmp(&b.f).then(i.cmp(j)));
    match best {
        Some((i, r)) => {
            let (x, f_best, extra) = if opts.local.polish {
                refine_stationary(f, &r.x, bounds, 4)
            } else {
                (r.x.clone(), r.f, 0)
            };
            Ok(MultistartResult {
                x,
                f: f_best,
                start: i,
                n_starts: total,
                n_finite,
                evals: evals + extra,
                seed: opts.seed,
            })
        }
        None => Err(Error::Optimization(format!(
            "all {total} starts diverged (seed {}, {evals} evaluations, first start {:?})",
            opts.seed,
            outcomes.first().map(|r| &r.x)
        ))),
    }
}
