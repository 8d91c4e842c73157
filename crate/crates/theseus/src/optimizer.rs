//! BFGS with a strong-Wolfe line search, and a seeded random-restart harness.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::{L1Norm, Objective};

/// How the weight-magnitude limit is measured.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightNorm {
    /// Largest absolute real or imaginary component.
    #[default]
    MaxComponent,
    /// Largest complex modulus.
    MaxModulus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub alpha: f64,
    pub f_limit: f64,
    pub omega_limit: f64,
    pub c_limit: usize,
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub init_range: f64,
    pub seed: u64,
    pub l1_norm: L1Norm,
    pub weight_norm: WeightNorm,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            alpha: 0.05,
            f_limit: 0.95,
            omega_limit: 1.0,
            c_limit: 10,
            max_iterations: 500,
            gradient_tolerance: 1e-8,
            init_range: 1.0,
            seed: 0,
            l1_norm: L1Norm::Componentwise,
            weight_norm: WeightNorm::MaxComponent,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.f_limit > 0.0 && self.f_limit <= 1.0) {
            return Err(Error::invalid(format!(
                "f_limit must lie in (0, 1], got {}",
                self.f_limit
            )));
        }
        if !(0.0..1.0).contains(&self.alpha) {
            return Err(Error::invalid(format!(
                "alpha must lie in [0, 1), got {}",
                self.alpha
            )));
        }
        if self.c_limit < 1 {
            return Err(Error::invalid("c_limit must be at least 1"));
        }
        if [self.init_range, self.omega_limit]
            .iter()
            .any(|v| v.is_nan() || *v <= 0.0)
        {
            return Err(Error::invalid(
                "init_range and omega_limit must be positive",
            ));
        }
        Ok(())
    }

    /// Largest weight magnitude of `x` under the configured norm.
    pub fn weight_magnitude(&self, x: &[f64]) -> f64 {
        match self.weight_norm {
            WeightNorm::MaxComponent => x.iter().fold(0.0, |m, v| m.max(v.abs())),
            WeightNorm::MaxModulus => x.chunks_exact(2).fold(0.0, |m, c| m.max(c[0].hypot(c[1]))),
        }
    }
}

/// Deterministic generator for restart `index` of search stream `stream`.
pub fn restart_rng(seed: u64, stream: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream.wrapping_mul(1 << 20).wrapping_add(index));
    rng
}

/// Uniform on `[-init_range, init_range]` per component, from `cfg.seed`.
pub fn random_init(len: usize, cfg: &OptimizerConfig) -> Vec<f64> {
    random_init_with(
        len,
        cfg.init_range,
        &mut ChaCha8Rng::seed_from_u64(cfg.seed),
    )
}

pub fn random_init_with(len: usize, range: f64, rng: &mut impl Rng) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(-range..=range)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinimizeResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective value at every accepted iterate, starting with `x0`.
    pub history: Vec<f64>,
}

const C1: f64 = 1e-4;
const C2: f64 = 0.9;
const MAX_LINE_SEARCH: usize = 40;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn is_finite(v: f64, g: &[f64]) -> bool {
    v.is_finite() && g.iter().all(|x| x.is_finite())
}

struct Point {
    a: f64,
    f: f64,
    g: Vec<f64>,
    x: Vec<f64>,
}

/// Quasi-Newton minimization of `f`, which returns the value and gradient or `None`
/// where it is undefined. An undefined or non-finite evaluation ends the run early
/// without convergence. The returned point is the best one visited.
pub fn minimize<F>(mut f: F, x0: &[f64], cfg: &OptimizerConfig) -> MinimizeResult
where
    F: FnMut(&[f64]) -> Option<(f64, Vec<f64>)>,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let (mut fx, mut gx) = match f(&x) {
        Some((v, g)) if is_finite(v, &g) => (v, g),
        _ => {
            return MinimizeResult {
                x,
                value: f64::NAN,
                iterations: 0,
                converged: false,
                history: Vec::new(),
            }
        }
    };
    let mut history = vec![fx];
    let mut h = identity(n);
    let mut fresh = true;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < cfg.max_iterations {
        if gx.iter().fold(0.0f64, |m, v| m.max(v.abs())) < cfg.gradient_tolerance {
            converged = true;
            break;
        }
        let mut p: Vec<f64> = (0..n).map(|i| -dot(&h[i * n..(i + 1) * n], &gx)).collect();
        let mut slope = dot(&p, &gx);
        if slope.is_nan() || slope >= 0.0 {
            h = identity(n);
            fresh = true;
            p = gx.iter().map(|v| -v).collect();
            slope = dot(&p, &gx);
        }
        let a0 = if fresh {
            (1.0 / gx.iter().map(|v| v * v).sum::<f64>().sqrt()).min(1.0)
        } else {
            1.0
        };
        let step = match line_search(&mut f, &x, fx, slope, &p, a0) {
            LineSearch::Found(pt) => pt,
            LineSearch::Failed if !fresh => {
                h = identity(n);
                fresh = true;
                continue;
            }
            LineSearch::Failed | LineSearch::Undefined => break,
        };
        iterations += 1;

        let s: Vec<f64> = step.x.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = step.g.iter().zip(&gx).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        let decrease = fx - step.f;
        x = step.x;
        fx = step.f;
        gx = step.g;
        history.push(fx);

        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if fresh {
                let scale = sy / dot(&y, &y);
                h.iter_mut().for_each(|v| *v *= scale);
                fresh = false;
            }
            bfgs_update(&mut h, &s, &y, sy);
        }
        if decrease.abs() <= 1e-15 * fx.abs().max(1e-300) && step.a < 1e-12 {
            break;
        }
    }

    MinimizeResult {
        x,
        value: fx,
        iterations,
        converged,
        history,
    }
}

fn identity(n: usize) -> Vec<f64> {
    let mut h = vec![0.0; n * n];
    for i in 0..n {
        h[i * n + i] = 1.0;
    }
    h
}

/// `H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ`, expanded to avoid matrix products.
fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let rho = 1.0 / sy;
    let hy: Vec<f64> = (0..n).map(|i| dot(&h[i * n..(i + 1) * n], y)).collect();
    let yhy = dot(y, &hy);
    let coef = rho * rho * yhy + rho;
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] += coef * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
        }
    }
}

enum LineSearch {
    Found(Point),
    Failed,
    Undefined,
}

fn line_search<F>(f: &mut F, x: &[f64], f0: f64, slope0: f64, p: &[f64], a_init: f64) -> LineSearch
where
    F: FnMut(&[f64]) -> Option<(f64, Vec<f64>)>,
{
    let mut eval = |a: f64| -> Option<Point> {
        let xa: Vec<f64> = x.iter().zip(p).map(|(xi, pi)| xi + a * pi).collect();
        match f(&xa) {
            Some((v, g)) if is_finite(v, &g) => Some(Point { a, f: v, g, x: xa }),
            _ => None,
        }
    };

    let mut lo = Point {
        a: 0.0,
        f: f0,
        g: Vec::new(),
        x: x.to_vec(),
    };
    let mut lo_slope = slope0;
    let mut a = a_init;
    for i in 0..MAX_LINE_SEARCH {
        let Some(pt) = eval(a) else {
            return LineSearch::Undefined;
        };
        if pt.f > f0 + C1 * a * slope0 || (i > 0 && pt.f >= lo.f) {
            return zoom(&mut eval, f0, slope0, p, lo, lo_slope, pt);
        }
        let d = dot(&pt.g, p);
        if d.abs() <= -C2 * slope0 {
            return LineSearch::Found(pt);
        }
        if d >= 0.0 {
            let hi = lo;
            return zoom(&mut eval, f0, slope0, p, pt, d, hi);
        }
        lo_slope = d;
        lo = pt;
        a *= 2.0;
    }
    LineSearch::Found(lo).filter_progress(f0)
}

impl LineSearch {
    fn filter_progress(self, f0: f64) -> LineSearch {
        match self {
            LineSearch::Found(pt) if pt.a > 0.0 && pt.f < f0 => LineSearch::Found(pt),
            LineSearch::Found(_) => LineSearch::Failed,
            other => other,
        }
    }
}

fn zoom<E>(
    eval: &mut E,
    f0: f64,
    slope0: f64,
    p: &[f64],
    mut lo: Point,
    mut lo_slope: f64,
    mut hi: Point,
) -> LineSearch
where
    E: FnMut(f64) -> Option<Point>,
{
    for _ in 0..MAX_LINE_SEARCH {
        // Quadratic interpolation from the low end, kept inside the bracket.
        let width = hi.a - lo.a;
        let denom = 2.0 * (hi.f - lo.f - lo_slope * width);
        let mut a = if denom.abs() > 0.0 {
            lo.a - lo_slope * width * width / denom
        } else {
            lo.a + 0.5 * width
        };
        let (left, right) = if lo.a < hi.a {
            (lo.a, hi.a)
        } else {
            (hi.a, lo.a)
        };
        let margin = 0.1 * (right - left);
        if !a.is_finite() || a < left + margin || a > right - margin {
            a = 0.5 * (lo.a + hi.a);
        }
        if (right - left) < 1e-16 * right.max(1.0) {
            break;
        }
        let Some(pt) = eval(a) else {
            return LineSearch::Undefined;
        };
        if pt.f > f0 + C1 * a * slope0 || pt.f >= lo.f {
            hi = pt;
        } else {
            let d = dot(&pt.g, p);
            if d.abs() <= -C2 * slope0 {
                return LineSearch::Found(pt);
            }
            if d * (hi.a - lo.a) >= 0.0 {
                hi = lo;
            }
            lo = pt;
            lo_slope = d;
        }
    }
    // Bracket collapsed without meeting the curvature condition; accept any decrease.
    LineSearch::Found(lo).filter_progress(f0)
}

/// Something the restart harness can minimize and score.
pub trait RestartProblem: Sync {
    fn n_params(&self) -> usize;
    fn loss_and_gradient(&self, x: &[f64]) -> Option<(f64, Vec<f64>)>;
    fn fidelity(&self, x: &[f64]) -> Option<f64>;
}

impl RestartProblem for Objective {
    fn n_params(&self) -> usize {
        Objective::n_params(self)
    }

    fn loss_and_gradient(&self, x: &[f64]) -> Option<(f64, Vec<f64>)> {
        Objective::loss_and_gradient(self, x).ok()
    }

    fn fidelity(&self, x: &[f64]) -> Option<f64> {
        Objective::fidelity(self, x).ok()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RestartOutcome {
    pub x: Vec<f64>,
    pub loss: f64,
    pub fidelity: f64,
    pub qualified: bool,
    /// Restarts consumed, counting the selected one.
    pub restarts: usize,
}

/// Runs up to `c_limit` restarts and returns the first that reaches `f_limit` within
/// `omega_limit`, or else the lowest-loss run. Restart 0 starts from `warm` when given;
/// the others start from fresh random points drawn from `(cfg.seed, stream, index)`.
///
/// Restarts are evaluated in parallel batches, but the selection only depends on restart
/// indices, so the outcome is the same as a sequential run.
pub fn optimize_with_restarts<P: RestartProblem>(
    problem: &P,
    warm: Option<&[f64]>,
    cfg: &OptimizerConfig,
    stream: u64,
) -> RestartOutcome {
    let n = problem.n_params();
    let run = |index: usize| -> RestartOutcome {
        let x0 = match (index, warm) {
            (0, Some(w)) => w.to_vec(),
            _ => random_init_with(
                n,
                cfg.init_range,
                &mut restart_rng(cfg.seed, stream, index as u64),
            ),
        };
        let r = minimize(|x| problem.loss_and_gradient(x), &x0, cfg);
        let fidelity = problem.fidelity(&r.x).unwrap_or(0.0);
        let loss = if r.value.is_finite() {
            r.value
        } else {
            f64::INFINITY
        };
        RestartOutcome {
            qualified: loss.is_finite()
                && fidelity >= cfg.f_limit
                && cfg.weight_magnitude(&r.x) <= cfg.omega_limit,
            x: r.x,
            loss,
            fidelity,
            restarts: index + 1,
        }
    };

    let batch = rayon::current_num_threads().max(1);
    let mut best: Option<RestartOutcome> = None;
    let mut start = 0;
    while start < cfg.c_limit {
        let end = (start + batch).min(cfg.c_limit);
        let results: Vec<RestartOutcome> = (start..end).into_par_iter().map(run).collect();
        for r in results {
            if r.qualified {
                return r;
            }
            if best.as_ref().is_none_or(|b| r.loss < b.loss) {
                best = Some(r);
            }
        }
        start = end;
    }
    let mut best = best.expect("c_limit >= 1");
    best.restarts = cfg.c_limit;
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn quadratic(x: &[f64]) -> Option<(f64, Vec<f64>)> {
        let v = x.iter().map(|a| (a - 3.0).powi(2)).sum();
        Some((v, x.iter().map(|a| 2.0 * (a - 3.0)).collect()))
    }

    fn rosenbrock(x: &[f64]) -> Option<(f64, Vec<f64>)> {
        let (a, b) = (x[0], x[1]);
        let v = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
        let g = vec![
            -2.0 * (1.0 - a) - 400.0 * a * (b - a * a),
            200.0 * (b - a * a),
        ];
        Some((v, g))
    }

    #[test]
    fn quadratic_minimum() {
        let r = minimize(quadratic, &[0.0; 5], &OptimizerConfig::default());
        assert!(r.converged);
        for v in &r.x {
            assert_abs_diff_eq!(*v, 3.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn rosenbrock_minimum() {
        let r = minimize(rosenbrock, &[-1.2, 1.0], &OptimizerConfig::default());
        assert_abs_diff_eq!(r.x[0], 1.0, epsilon = 1e-4);
        assert_abs_diff_eq!(r.x[1], 1.0, epsilon = 1e-4);
        assert!(r.value <= 24.2);
    }

    #[test]
    fn history_is_monotone() {
        let r = minimize(rosenbrock, &[-1.2, 1.0], &OptimizerConfig::default());
        assert!(r.history.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(r.value, *r.history.last().unwrap());
    }

    #[test]
    fn undefined_start_is_not_converged() {
        let r = minimize(|_| None, &[1.0], &OptimizerConfig::default());
        assert!(!r.converged);
        assert!(r.value.is_nan());
    }

    #[test]
    fn non_finite_value_aborts() {
        let f = |x: &[f64]| {
            if x[0] > 2.0 {
                Some((f64::NAN, vec![0.0]))
            } else {
                Some((-x[0], vec![-1.0]))
            }
        };
        let r = minimize(f, &[0.0], &OptimizerConfig::default());
        assert!(!r.converged);
        assert!(r.value.is_finite() && r.value <= 0.0);
    }

    #[test]
    fn random_init_is_reproducible_and_bounded() {
        let cfg = OptimizerConfig {
            seed: 7,
            init_range: 0.5,
            ..OptimizerConfig::default()
        };
        let a = random_init(48, &cfg);
        assert_eq!(a, random_init(48, &cfg));
        assert_eq!(a.len(), 48);
        assert!(a.iter().all(|v| v.abs() <= 0.5));
        let other = random_init(48, &OptimizerConfig { seed: 8, ..cfg });
        assert_ne!(a, other);
    }

    #[test]
    fn random_init_mean_is_zero() {
        let n = 100_000;
        let x = random_init(n, &OptimizerConfig::default());
        let mean = x.iter().sum::<f64>() / n as f64;
        let sigma = 1.0 / 3f64.sqrt();
        assert!(mean.abs() < 3.0 * sigma / (n as f64).sqrt());
    }

    #[test]
    fn config_validation() {
        assert!(OptimizerConfig::default().validate().is_ok());
        for bad in [
            OptimizerConfig {
                f_limit: 0.0,
                ..Default::default()
            },
            OptimizerConfig {
                alpha: 1.0,
                ..Default::default()
            },
            OptimizerConfig {
                c_limit: 0,
                ..Default::default()
            },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    struct Toy;

    impl RestartProblem for Toy {
        fn n_params(&self) -> usize {
            3
        }
        fn loss_and_gradient(&self, x: &[f64]) -> Option<(f64, Vec<f64>)> {
            let v = x.iter().map(|a| (a - 0.5).powi(2)).sum();
            Some((v, x.iter().map(|a| 2.0 * (a - 0.5)).collect()))
        }
        fn fidelity(&self, x: &[f64]) -> Option<f64> {
            Some(1.0 - self.loss_and_gradient(x)?.0)
        }
    }

    #[test]
    fn satisfied_target_uses_one_restart() {
        let r = optimize_with_restarts(&Toy, None, &OptimizerConfig::default(), 0);
        assert!(r.qualified);
        assert_eq!(r.restarts, 1);
    }

    #[test]
    fn restarts_are_deterministic() {
        let cfg = OptimizerConfig {
            seed: 3,
            ..Default::default()
        };
        let a = optimize_with_restarts(&Toy, None, &cfg, 5);
        let b = optimize_with_restarts(&Toy, None, &cfg, 5);
        assert_eq!(a, b);
    }

    #[test]
    fn omega_limit_blocks_qualification() {
        let cfg = OptimizerConfig {
            omega_limit: 0.25,
            c_limit: 3,
            ..Default::default()
        };
        let r = optimize_with_restarts(&Toy, None, &cfg, 0);
        assert!(!r.qualified);
        assert_eq!(r.restarts, 3);
    }
}
