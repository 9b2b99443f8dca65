//! Binary symmetric main channel, binary erasure eavesdropper.
//!
//! States are pairs `(s1, s2)` indexed `2 * s1 + s2`. The main channel is
//! the identity for `s1 = 0` and the bit flip for `s1 = 1`; the
//! eavesdropper sees `X` when `s2 = 0` and the erasure symbol `2` when
//! `s2 = 1`. With the product state type `P(s1 = 1) = eps`,
//! `P(s2 = 1) = alpha` the capacity is
//! `max_{Q_{U,X}} I(U;Y) - (1 - alpha) I(U;X)` with `Y` the output of a
//! BSC(eps).

use crate::error::{Error, Result};
use crate::info::binary_entropy;
use crate::prob::{Avwtc, Dmc, Pmf};
use crate::softcover::golden_max;

use super::objective::mi_through;
use super::optimize::{maximize, Objective, OptimizerConfig};
use super::{clamp_zero, JointInput};

/// Disagreement between the two evaluation paths that gets flagged.
pub const PATH_AGREEMENT: f64 = 1e-5;

fn check_params(eps: f64, alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eps) || !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidArgument(format!("eps = {eps}, alpha = {alpha} must lie in [0, 1]")));
    }
    Ok(())
}

/// The four-state channel and its state type.
pub fn bsbe_channel(eps: f64, alpha: f64) -> Result<(Avwtc, Pmf)> {
    check_params(eps, alpha)?;
    let flip = Dmc::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]])?;
    let see = Dmc::new(vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]])?;
    let erase = Dmc::bec(1.0)?;
    let mut main = Vec::new();
    let mut eaves = Vec::new();
    let mut q = Vec::new();
    for s1 in 0..2 {
        for s2 in 0..2 {
            main.push(if s1 == 0 { Dmc::identity(2) } else { flip.clone() });
            eaves.push(if s2 == 0 { see.clone() } else { erase.clone() });
            let p1 = if s1 == 1 { eps } else { 1.0 - eps };
            let p2 = if s2 == 1 { alpha } else { 1.0 - alpha };
            q.push(p1 * p2);
        }
    }
    Ok((Avwtc::new(main, eaves)?, Pmf::new(q)?))
}

/// `I(U;Y) - (1 - alpha) I(U;X)` with `Y` the BSC(eps) output.
pub fn bsbe_objective(q_ux: &JointInput, eps: f64, alpha: f64) -> Result<f64> {
    check_params(eps, alpha)?;
    if q_ux.x_size() != 2 {
        return Err(Error::ShapeMismatch("binary input required".into()));
    }
    Ok(Reduced::new(eps, alpha)?.value(q_ux.probs(), q_ux.u_size()))
}

struct Reduced {
    bsc: Dmc,
    keep: f64,
}

impl Reduced {
    fn new(eps: f64, alpha: f64) -> Result<Self> {
        Ok(Self { bsc: Dmc::bsc(eps)?, keep: 1.0 - alpha })
    }

    fn value(&self, q: &[f64], nu: usize) -> f64 {
        mi_through(q, nu, &self.bsc) - self.keep * mi_through(q, nu, &Dmc::identity(2))
    }
}

impl Objective for Reduced {
    type Ctx = ();
    fn eval(&self, q: &[f64]) -> (f64, ()) {
        (self.value(q, 2), ())
    }
    fn local(&self, q: &[f64], _: &()) -> f64 {
        self.value(q, 2)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BsbeReport {
    /// `raw` after zero clamping.
    pub value: f64,
    /// Larger of the two paths.
    pub raw: f64,
    /// Optimum over all binary `Q_{U,X}`.
    pub full: f64,
    /// Optimum over `U` uniform, `X = U` through BSC(beta).
    pub symmetric: f64,
    pub beta_star: f64,
    /// True when the paths differ by more than [`PATH_AGREEMENT`].
    pub disagreement: bool,
}

fn symmetric_value(beta: f64, eps: f64, alpha: f64) -> f64 {
    let conv = beta * (1.0 - eps) + (1.0 - beta) * eps;
    1.0 - binary_entropy(conv) - (1.0 - alpha) * (1.0 - binary_entropy(beta))
}

fn symmetric_path(eps: f64, alpha: f64) -> (f64, f64) {
    const STEPS: usize = 2000;
    let mut best = (symmetric_value(0.5, eps, alpha), 0.5);
    let mut k_best = STEPS;
    for k in 0..=STEPS {
        let beta = 0.5 * k as f64 / STEPS as f64;
        let v = symmetric_value(beta, eps, alpha);
        if v > best.0 {
            best = (v, beta);
            k_best = k;
        }
    }
    let lo = 0.5 * k_best.saturating_sub(1) as f64 / STEPS as f64;
    let hi = 0.5 * (k_best + 1).min(STEPS) as f64 / STEPS as f64;
    let (b, v) = golden_max(|b| symmetric_value(b, eps, alpha), lo, hi, 1e-14);
    if v > best.0 {
        best = (v, b);
    }
    best
}

/// Joint table for `P(U=1) = a`, `P(X=1|U=0) = b0`, `P(X=1|U=1) = b1`.
fn parametrized(a: f64, b0: f64, b1: f64) -> Vec<f64> {
    vec![(1.0 - a) * (1.0 - b0), (1.0 - a) * b0, a * (1.0 - b1), a * b1]
}

fn full_path(eps: f64, alpha: f64, cfg: &OptimizerConfig) -> Result<f64> {
    const STEPS: usize = 20;
    let obj = Reduced::new(eps, alpha)?;
    let mut scored = Vec::with_capacity((STEPS + 1).pow(3));
    for i in 0..=STEPS {
        for j in 0..=STEPS {
            for k in 0..=STEPS {
                let q = parametrized(i as f64 / STEPS as f64, j as f64 / STEPS as f64, k as f64 / STEPS as f64);
                scored.push((obj.value(&q, 2), q));
            }
        }
    }
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    let starts: Vec<Vec<f64>> = scored.iter().take(4).map(|(_, q)| q.clone()).collect();
    let local = OptimizerConfig { restarts: cfg.restarts.min(4), ..cfg.clone() };
    let (v, _) = maximize(&obj, 4, starts, &local);
    Ok(v.max(scored[0].0))
}

/// Secrecy capacity of the example channel.
///
/// `eps` may range over `[0, 1]`; it is folded to `min(eps, 1 - eps)`, which
/// leaves the capacity unchanged (relabel the main-channel output).
pub fn bsbe_capacity(eps: f64, alpha: f64, cfg: &OptimizerConfig) -> Result<BsbeReport> {
    check_params(eps, alpha)?;
    cfg.validate()?;
    // Fold through the upper half, where `1 - eps` is exact, so that `eps`
    // and `1 - eps` map to the same float.
    let upper = if eps >= 0.5 { eps } else { 1.0 - eps };
    let eps = 1.0 - upper;
    let (symmetric, beta_star) = symmetric_path(eps, alpha);
    let full = full_path(eps, alpha, cfg)?;
    let raw = full.max(symmetric);
    Ok(BsbeReport {
        value: clamp_zero(raw),
        raw,
        full,
        symmetric,
        beta_star,
        disagreement: (full - symmetric).abs() > PATH_AGREEMENT,
    })
}
