//! Multi-start projected ascent on a probability simplex.

use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};

/// Finite-difference step for gradient estimates.
const FD_STEP: f64 = 1e-5;
/// Smallest line-search step before a run is declared converged.
const MIN_STEP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    /// Number of random starts, in addition to the structured ones.
    pub restarts: usize,
    pub max_iters: usize,
    /// A run stops once five consecutive accepted steps each gain less
    /// than this.
    pub tolerance: f64,
    pub seed: u64,
    /// Points per coordinate of the inner grid scans.
    pub inner_grid_resolution: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self { restarts: 32, max_iters: 500, tolerance: 1e-10, seed: 0, inner_grid_resolution: 200 }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidArgument("restarts must be >= 1".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidArgument("tolerance must be > 0".into()));
        }
        if self.inner_grid_resolution == 0 {
            return Err(Error::InvalidArgument("inner grid resolution must be >= 1".into()));
        }
        Ok(())
    }
}

/// An objective whose value may involve an inner optimization. `eval`
/// returns the value plus whatever the inner problem settled on; `local`
/// re-evaluates near the same point with that inner solution held fixed,
/// which has the same gradient (envelope theorem) and is used for the
/// finite differences.
pub(crate) trait Objective: Sync {
    type Ctx: Send;
    fn eval(&self, q: &[f64]) -> (f64, Self::Ctx);
    fn local(&self, q: &[f64], ctx: &Self::Ctx) -> f64;
}

/// Euclidean projection onto the probability simplex.
pub(crate) fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, &x) in u.iter().enumerate() {
        cum += x;
        let t = (cum - 1.0) / (i + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

/// Clamps negatives and renormalizes.
fn sanitize(v: &mut [f64]) {
    for x in v.iter_mut() {
        *x = x.max(0.0);
    }
    let s: f64 = v.iter().sum();
    for x in v.iter_mut() {
        *x /= s;
    }
}

fn gradient<O: Objective>(obj: &O, x: &[f64], ctx: &O::Ctx, fx: f64) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    let mut y = x.to_vec();
    for i in 0..x.len() {
        y[i] = x[i] + FD_STEP;
        let mut yp = y.clone();
        sanitize(&mut yp);
        let fp = obj.local(&yp, ctx);
        if x[i] >= FD_STEP {
            y[i] = x[i] - FD_STEP;
            let mut ym = y.clone();
            sanitize(&mut ym);
            g[i] = (fp - obj.local(&ym, ctx)) / (2.0 * FD_STEP);
        } else {
            g[i] = (fp - fx) / FD_STEP;
        }
        y[i] = x[i];
        if !g[i].is_finite() {
            g[i] = 0.0;
        }
    }
    g
}

/// One projected-ascent run from `start`.
fn ascend<O: Objective>(obj: &O, start: &[f64], cfg: &OptimizerConfig) -> (f64, Vec<f64>) {
    let mut x = project_simplex(start);
    let (mut fx, mut ctx) = obj.eval(&x);
    let mut step = 0.1;
    let mut small = 0;
    for _ in 0..cfg.max_iters {
        let g = gradient(obj, &x, &ctx, obj.local(&x, &ctx));
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            break;
        }
        loop {
            let trial: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a + step * b / norm).collect();
            let y = project_simplex(&trial);
            let (fy, cy) = obj.eval(&y);
            if fy > fx {
                small = if fy - fx < cfg.tolerance { small + 1 } else { 0 };
                x = y;
                fx = fy;
                ctx = cy;
                step = (step * 1.5).min(1.0);
                break;
            }
            step *= 0.5;
            if step < MIN_STEP {
                break;
            }
        }
        if step < MIN_STEP || small >= 5 {
            break;
        }
    }
    (fx, x)
}

/// Dirichlet(1, .., 1) point from the `index`-th derived stream.
pub(crate) fn random_start(dim: usize, seed: u64, index: u64) -> Vec<f64> {
    let mut rng = rng_from_seed(derive_seed(seed, index));
    let mut v: Vec<f64> = (0..dim).map(|_| Exp1.sample(&mut rng)).collect();
    sanitize(&mut v);
    v
}

/// Best local maximum over the given starts plus `cfg.restarts` random
/// ones. Starts run in parallel; the reduction follows start order, so the
/// result is deterministic and nondecreasing in the number of restarts.
pub(crate) fn maximize<O: Objective>(
    obj: &O,
    dim: usize,
    mut starts: Vec<Vec<f64>>,
    cfg: &OptimizerConfig,
) -> (f64, Vec<f64>) {
    starts.extend((0..cfg.restarts).map(|i| random_start(dim, cfg.seed, i as u64)));
    let runs: Vec<(f64, Vec<f64>)> = starts.par_iter().map(|s| ascend(obj, s, cfg)).collect();
    let mut best = (f64::NEG_INFINITY, Vec::new());
    for r in runs {
        if r.0 > best.0 {
            best = r;
        }
    }
    best
}
