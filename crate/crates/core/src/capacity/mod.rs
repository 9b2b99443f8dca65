//! Single-letter secrecy-capacity formulas for type-constrained AVWTCs.
//!
//! * [`capacity_thm1`]: `max_{Q_{U,X}} I(U;Y) - I(U;Z|S)` for a fixed state
//!   type, with `Y` observed through the averaged main channel.
//! * [`lower_bound_thm2`]: `max_{Q_{U,X}} [min_Q I(U;Y) - max_Q I(U;Z|S)]`
//!   over a constraint set of state laws.
//! * [`upper_bound_thm3`]: `max_{Q_{V,U,X}} inf_Q [I(U;Y|V) - I(U;S,Z|V)]`.
//! * [`bsbe_capacity`]: the binary-symmetric / binary-erasure example.
//!
//! The outer maximizations are nonconcave and solved heuristically by
//! multi-start projected ascent; reported values are achieved values, hence
//! lower estimates of the true maxima. The inner problems are convex in the
//! state law and solved by a grid scan plus pattern search.

mod bsbe;
mod constraint;
mod objective;
mod optimize;

pub use bsbe::{bsbe_capacity, bsbe_channel, bsbe_objective, BsbeReport};
pub use constraint::{ConstraintSet, INNER_GRID_POINTS};
pub use optimize::OptimizerConfig;

use crate::error::{Error, Result};
use crate::info::{mutual_info_axes, JointPmf};
use crate::prob::{averaged_channel, averaged_unchecked, Avwtc, Dmc, Pmf, PMF_TOLERANCE};

use objective::{mi_through, thm1_value, Thm1, Thm2, Thm3};
use optimize::{maximize, Objective};

/// Optimized values with magnitude below this are reported as zero.
pub const ZERO_CLAMP: f64 = 1e-6;
/// Accuracy of the inner pattern searches.
pub const INNER_PRECISION: f64 = 1e-9;
/// Largest input alphabet accepted by [`upper_bound_thm3`].
pub const THM3_MAX_INPUT: usize = 3;

/// `raw` with values inside `(-ZERO_CLAMP, ZERO_CLAMP)` set to zero.
pub fn clamp_zero(raw: f64) -> f64 {
    if raw.abs() < ZERO_CLAMP {
        0.0
    } else {
        raw
    }
}

fn check_table(probs: &[f64], what: &str) -> Result<()> {
    if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::InvalidPmf(format!("{what}: entries must be finite and non-negative")));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > PMF_TOLERANCE {
        return Err(Error::InvalidPmf(format!("{what}: entries sum to {total}")));
    }
    Ok(())
}

/// Joint law `Q_{U,X}` with `|U| <= |X|`, row-major in `(u, x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointInput {
    u_size: usize,
    x_size: usize,
    probs: Vec<f64>,
}

impl JointInput {
    pub fn new(u_size: usize, x_size: usize, probs: Vec<f64>) -> Result<Self> {
        if u_size == 0 || x_size == 0 || u_size > x_size {
            return Err(Error::InvalidArgument(format!("need 1 <= |U| <= |X|, got |U|={u_size}, |X|={x_size}")));
        }
        if probs.len() != u_size * x_size {
            return Err(Error::ShapeMismatch(format!("{} entries for a {u_size}x{x_size} table", probs.len())));
        }
        check_table(&probs, "Q_U,X")?;
        Ok(Self { u_size, x_size, probs })
    }

    /// `Q_U(u) Q_{X|U}(x|u)`.
    pub fn from_parts(q_u: &Pmf, q_x_given_u: &Dmc) -> Result<Self> {
        let joint = JointPmf::from_input_channel(q_u, q_x_given_u)?;
        Self::new(q_u.len(), q_x_given_u.output_size(), joint.table().iter().copied().collect())
    }

    pub fn u_size(&self) -> usize {
        self.u_size
    }

    pub fn x_size(&self) -> usize {
        self.x_size
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, u: usize, x: usize) -> f64 {
        self.probs[u * self.x_size + x]
    }

    /// Relabels `U`: entry `u` of the result is entry `perm[u]` of `self`.
    pub fn permute_u(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.u_size];
        if perm.len() != self.u_size || perm.iter().any(|&p| p >= self.u_size || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidArgument("not a permutation of U".into()));
        }
        let probs = perm
            .iter()
            .flat_map(|&p| self.probs[p * self.x_size..(p + 1) * self.x_size].iter().copied())
            .collect();
        Ok(Self { probs, ..self.clone() })
    }

    /// Pads `U` with zero-probability symbols up to `u_size`.
    fn padded(&self, u_size: usize) -> Vec<f64> {
        let mut v = self.probs.clone();
        v.resize(u_size * self.x_size, 0.0);
        v
    }
}

/// Joint law `Q_{V,U,X}` with `|V| <= max(1, |X|^2 - 1)`, `|U| <= |X|`,
/// row-major in `(v, u, x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointAuxInput {
    v_size: usize,
    u_size: usize,
    x_size: usize,
    probs: Vec<f64>,
}

/// Cardinality cap on the time-sharing variable.
pub fn time_sharing_cap(x_size: usize) -> usize {
    (x_size * x_size).saturating_sub(1).max(1)
}

impl JointAuxInput {
    pub fn new(v_size: usize, u_size: usize, x_size: usize, probs: Vec<f64>) -> Result<Self> {
        if u_size == 0 || x_size == 0 || u_size > x_size {
            return Err(Error::InvalidArgument(format!("need 1 <= |U| <= |X|, got |U|={u_size}, |X|={x_size}")));
        }
        if v_size == 0 || v_size > time_sharing_cap(x_size) {
            return Err(Error::InvalidArgument(format!(
                "|V|={v_size} outside [1, {}]",
                time_sharing_cap(x_size)
            )));
        }
        if probs.len() != v_size * u_size * x_size {
            return Err(Error::ShapeMismatch(format!("{} entries for a {v_size}x{u_size}x{x_size} table", probs.len())));
        }
        check_table(&probs, "Q_V,U,X")?;
        Ok(Self { v_size, u_size, x_size, probs })
    }

    /// `V` constant: all mass on `v = 0`.
    pub fn lift(q: &JointInput, v_size: usize) -> Result<Self> {
        let mut probs = q.probs.clone();
        probs.resize(v_size * q.u_size * q.x_size, 0.0);
        Self::new(v_size, q.u_size, q.x_size, probs)
    }

    pub fn v_size(&self) -> usize {
        self.v_size
    }

    pub fn u_size(&self) -> usize {
        self.u_size
    }

    pub fn x_size(&self) -> usize {
        self.x_size
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

fn check_channel_state(ch: &Avwtc, states: usize) -> Result<()> {
    if ch.state_size() != states {
        return Err(Error::ShapeMismatch(format!(
            "channel has {} states, state law has {states}",
            ch.state_size()
        )));
    }
    Ok(())
}

/// Full joint over `(U, X, S, Y, Z)` with `U` independent of `S`.
fn thm1_joint(q_ux: &JointInput, q_s: &Pmf, ch: &Avwtc) -> Result<JointPmf> {
    let (nu, nx, ns) = (q_ux.u_size, q_ux.x_size, q_s.len());
    let (ny, nz) = (ch.main_output_size(), ch.eaves_output_size());
    let mut data = Vec::with_capacity(nu * nx * ns * ny * nz);
    for u in 0..nu {
        for x in 0..nx {
            for s in 0..ns {
                let base = q_ux.get(u, x) * q_s[s];
                for y in 0..ny {
                    let wy = ch.main()[s].get(x, y);
                    for z in 0..nz {
                        data.push(base * wy * ch.eaves()[s].get(x, z));
                    }
                }
            }
        }
    }
    JointPmf::from_vec(&[nu, nx, ns, ny, nz], data)
}

/// `I(U;Y) - I(U;Z|S)` under `Q_{U,X} Q_S W_{Y|X,S} V_{Z|X,S}`, evaluated on
/// the explicit five-variable joint.
pub fn objective_thm1(q_ux: &JointInput, q_s: &Pmf, ch: &Avwtc) -> Result<f64> {
    check_channel_state(ch, q_s.len())?;
    if q_ux.x_size != ch.input_size() {
        return Err(Error::ShapeMismatch("Q_U,X and channel input alphabets differ".into()));
    }
    let j = thm1_joint(q_ux, q_s, ch)?;
    let i_uy = mutual_info_axes(&j, &[0], &[3], &[])?;
    let i_uz_s = mutual_info_axes(&j, &[0], &[4], &[2])?;
    debug_assert!((i_uz_s - mutual_info_axes(&j, &[0], &[2, 4], &[])?).abs() <= 1e-10);
    Ok(i_uy - i_uz_s)
}

/// Both forms of the eavesdropper term, `(I(U;Z|S), I(U;S,Z))`.
pub fn leakage_forms(q_ux: &JointInput, q_s: &Pmf, ch: &Avwtc) -> Result<(f64, f64)> {
    check_channel_state(ch, q_s.len())?;
    let j = thm1_joint(q_ux, q_s, ch)?;
    Ok((mutual_info_axes(&j, &[0], &[4], &[2])?, mutual_info_axes(&j, &[0], &[2, 4], &[])?))
}

/// `I(U;Y|V) - I(U;S,Z|V)` under `Q_{V,U,X} Q_S W V`, on the explicit
/// six-variable joint.
pub fn objective_thm3(q: &JointAuxInput, q_s: &Pmf, ch: &Avwtc) -> Result<f64> {
    check_channel_state(ch, q_s.len())?;
    if q.x_size != ch.input_size() {
        return Err(Error::ShapeMismatch("Q_V,U,X and channel input alphabets differ".into()));
    }
    let (nv, nu, nx, ns) = (q.v_size, q.u_size, q.x_size, q_s.len());
    let (ny, nz) = (ch.main_output_size(), ch.eaves_output_size());
    let mut data = Vec::with_capacity(nv * nu * nx * ns * ny * nz);
    for (i, &p) in q.probs.iter().enumerate() {
        let x = i % nx;
        for s in 0..ns {
            for y in 0..ny {
                for z in 0..nz {
                    data.push(p * q_s[s] * ch.main()[s].get(x, y) * ch.eaves()[s].get(x, z));
                }
            }
        }
    }
    let j = JointPmf::from_vec(&[nv, nu, nx, ns, ny, nz], data)?;
    Ok(mutual_info_axes(&j, &[1], &[4], &[0])? - mutual_info_axes(&j, &[1], &[3, 5], &[0])?)
}

/// Structured starting points for `Q_{U,X}` with `|U| = |X| = k`.
fn structured_starts(k: usize) -> Vec<Vec<f64>> {
    let kf = k as f64;
    let mut starts = vec![vec![1.0 / (kf * kf); k * k]];
    let mut constant = vec![0.0; k * k];
    constant[..k].fill(1.0 / kf);
    starts.push(constant);
    for beta in [0.0, 0.05, 0.15, 0.3, 0.45] {
        let mut q = vec![0.0; k * k];
        for u in 0..k {
            for x in 0..k {
                q[u * k + x] = if k == 1 {
                    1.0
                } else if u == x {
                    (1.0 - beta) / kf
                } else {
                    beta / ((kf - 1.0) * kf)
                };
            }
        }
        starts.push(q);
    }
    starts
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityReport {
    /// `raw` after zero clamping.
    pub value: f64,
    pub raw: f64,
    pub argmax: JointInput,
}

/// Secrecy capacity for the state type `q_s`.
pub fn capacity_thm1(ch: &Avwtc, q_s: &Pmf, cfg: &OptimizerConfig) -> Result<CapacityReport> {
    capacity_thm1_with_starts(ch, q_s, cfg, &[])
}

/// [`capacity_thm1`] with additional starting points.
pub fn capacity_thm1_with_starts(
    ch: &Avwtc,
    q_s: &Pmf,
    cfg: &OptimizerConfig,
    extra: &[JointInput],
) -> Result<CapacityReport> {
    cfg.validate()?;
    check_channel_state(ch, q_s.len())?;
    let k = ch.input_size();
    let obj = Thm1::new(ch, q_s.probs());
    let mut starts = structured_starts(k);
    starts.extend(extra_starts(extra, k)?);
    let (raw, x) = maximize(&obj, k * k, starts, cfg);
    Ok(CapacityReport { value: clamp_zero(raw), raw, argmax: JointInput::new(k, k, normalize(x))? })
}

fn extra_starts(extra: &[JointInput], k: usize) -> Result<Vec<Vec<f64>>> {
    extra
        .iter()
        .map(|q| {
            if q.x_size != k {
                Err(Error::ShapeMismatch("start over a different input alphabet".into()))
            } else {
                Ok(q.padded(k))
            }
        })
        .collect()
}

fn normalize(mut v: Vec<f64>) -> Vec<f64> {
    for x in v.iter_mut() {
        *x = x.max(0.0);
    }
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundReport {
    pub value: f64,
    pub raw: f64,
    pub argmax: JointInput,
    /// Minimizer of `I(U;Y)` over the set at the argmax.
    pub min_state: Vec<f64>,
    /// Maximizer of `I(U;Z|S)` over the set at the argmax.
    pub max_state: Vec<f64>,
    /// Numerical tolerance of the reported value.
    pub tolerance: f64,
}

/// Lower-bound objective at a fixed `Q_{U,X}`: the worst state type in the set.
pub fn objective_thm2(q_ux: &JointInput, set: &ConstraintSet, ch: &Avwtc, resolution: usize) -> Result<f64> {
    check_channel_state(ch, set.state_count())?;
    let obj = Thm2::new(ch, set, resolution);
    Ok(obj.eval(&q_ux.padded(ch.input_size())).0)
}

/// Max-min lower bound over `set`.
pub fn lower_bound_thm2(ch: &Avwtc, set: &ConstraintSet, cfg: &OptimizerConfig) -> Result<LowerBoundReport> {
    lower_bound_thm2_with_starts(ch, set, cfg, &[])
}

/// [`lower_bound_thm2`] with additional starting points, e.g. the argmax of
/// a run over a larger set.
pub fn lower_bound_thm2_with_starts(
    ch: &Avwtc,
    set: &ConstraintSet,
    cfg: &OptimizerConfig,
    extra: &[JointInput],
) -> Result<LowerBoundReport> {
    cfg.validate()?;
    check_channel_state(ch, set.state_count())?;
    let k = ch.input_size();
    let obj = Thm2::new(ch, set, cfg.inner_grid_resolution);
    let mut starts = structured_starts(k);
    starts.extend(extra_starts(extra, k)?);
    let (raw, x) = maximize(&obj, k * k, starts, cfg);
    let (_, ctx) = obj.eval(&x);
    Ok(LowerBoundReport {
        value: clamp_zero(raw),
        raw,
        argmax: JointInput::new(k, k, normalize(x))?,
        min_state: ctx.min_state,
        max_state: ctx.max_state,
        tolerance: cfg.tolerance + INNER_PRECISION,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpperBoundReport {
    pub value: f64,
    pub raw: f64,
    pub argmax: JointAuxInput,
    /// Minimizing state law at the argmax.
    pub min_state: Vec<f64>,
    /// Grid-only infimum minus refined infimum at the argmax: how much the
    /// bare grid at this resolution overestimates the infimum.
    pub grid_gap: f64,
    pub grid_resolution: usize,
    pub tolerance: f64,
}

/// Min-max upper bound over `set`. The search is seeded with the
/// lower-bound argmax (with `V` constant), so the result never falls below
/// the lower bound computed on the same set.
pub fn upper_bound_thm3(ch: &Avwtc, set: &ConstraintSet, cfg: &OptimizerConfig) -> Result<UpperBoundReport> {
    check_thm3_cap(ch)?;
    let lb = lower_bound_thm2(ch, set, cfg)?;
    upper_bound_thm3_with_starts(ch, set, cfg, &[lb.argmax])
}

fn check_thm3_cap(ch: &Avwtc) -> Result<()> {
    if ch.input_size() > THM3_MAX_INPUT {
        return Err(Error::Infeasible(format!(
            "|X| = {} exceeds the practical cap {THM3_MAX_INPUT} for the time-sharing search (|V| = {})",
            ch.input_size(),
            time_sharing_cap(ch.input_size())
        )));
    }
    Ok(())
}

/// [`upper_bound_thm3`] seeded with the given `Q_{U,X}` tables (each
/// lifted to a constant `V`) instead of a fresh lower-bound run.
pub fn upper_bound_thm3_with_starts(
    ch: &Avwtc,
    set: &ConstraintSet,
    cfg: &OptimizerConfig,
    seeds: &[JointInput],
) -> Result<UpperBoundReport> {
    cfg.validate()?;
    check_thm3_cap(ch)?;
    check_channel_state(ch, set.state_count())?;
    let k = ch.input_size();
    let nv = time_sharing_cap(k);
    let obj = Thm3::new(ch, set, cfg.inner_grid_resolution);
    let lift = |q: Vec<f64>| {
        let mut v = q;
        v.resize(nv * k * k, 0.0);
        v
    };
    let mut starts: Vec<Vec<f64>> = extra_starts(seeds, k)?.into_iter().map(lift).collect();
    starts.extend(structured_starts(k).into_iter().map(lift));
    let (raw, x) = maximize(&obj, nv * k * k, starts, cfg);
    let (_, ctx) = obj.eval(&x);
    Ok(UpperBoundReport {
        value: clamp_zero(raw),
        raw,
        argmax: JointAuxInput::new(nv, k, k, normalize(x))?,
        min_state: ctx.min_state,
        grid_gap: ctx.grid_gap,
        grid_resolution: cfg.inner_grid_resolution,
        tolerance: cfg.tolerance + INNER_PRECISION,
    })
}

/// `argmin_{Q in set} I_Q(X;Y)` for input law `q_x` and the averaged
/// channel of `family`; returns the minimum and the minimizer.
pub fn min_mutual_info_over_set(
    family: &[Dmc],
    q_x: &Pmf,
    set: &ConstraintSet,
    resolution: usize,
) -> Result<(f64, Pmf)> {
    if family.len() != set.state_count() {
        return Err(Error::ShapeMismatch("one channel per state required".into()));
    }
    averaged_channel(family, &Pmf::new(set.center())?)?;
    let k = q_x.len();
    let mut diag = vec![0.0; k * k];
    for x in 0..k {
        diag[x * k + x] = q_x[x];
    }
    let res = set.domain(resolution).minimize(|qs| mi_through(&diag, k, &averaged_unchecked(family, qs)));
    let q = polish_min_mi(family, q_x.probs(), &set.vertices(), res.argmin);
    let value = mi_through(&diag, k, &averaged_unchecked(family, &q));
    Ok((value, Pmf::normalized(q)?))
}

/// Gradient of `I_Q(X;Y)` in the state law:
/// `sum_{x,y} Q_X(x) W_s(y|x) log2(W_Q(y|x) / Q_Y(y))`.
fn mi_state_gradient(family: &[Dmc], q_x: &[f64], qs: &[f64]) -> Vec<f64> {
    let w = averaged_unchecked(family, qs);
    let qy = w.output_pmf(q_x);
    family
        .iter()
        .map(|ws| {
            let mut g = 0.0;
            for (x, px) in q_x.iter().enumerate() {
                for (y, &qyy) in qy.iter().enumerate() {
                    let m = px * ws.get(x, y);
                    if m > 0.0 && w.get(x, y) > 0.0 {
                        g += m * (w.get(x, y) / qyy).log2();
                    }
                }
            }
            g
        })
        .collect()
}

/// Frank-Wolfe steps with exact line search on the directional derivative.
/// Function values cannot resolve the minimizer of a flat minimum much
/// beyond the square root of machine precision; derivatives can.
fn polish_min_mi(family: &[Dmc], q_x: &[f64], vertices: &[Vec<f64>], mut q: Vec<f64>) -> Vec<f64> {
    let slope = |q: &[f64], d: &[f64]| objective::dot(&mi_state_gradient(family, q_x, q), d);
    let along = |q: &[f64], d: &[f64], t: f64| q.iter().zip(d).map(|(a, b)| a + t * b).collect::<Vec<f64>>();
    for _ in 0..200 {
        let g = mi_state_gradient(family, q_x, &q);
        let Some(v) = vertices.iter().min_by(|a, b| objective::dot(&g, a).total_cmp(&objective::dot(&g, b))) else {
            break;
        };
        let d: Vec<f64> = v.iter().zip(&q).map(|(a, b)| a - b).collect();
        if objective::dot(&g, &d) >= -1e-15 {
            break;
        }
        let t = if slope(&along(&q, &d, 1.0), &d) <= 0.0 {
            1.0
        } else {
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if slope(&along(&q, &d, mid), &d) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        q = along(&q, &d, t);
    }
    q.iter_mut().for_each(|x| *x = x.max(0.0));
    q
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AveragedMiCheck {
    /// `sum_{x,y} Q_X(x) W_Q(y|x) log2(W_Qt(y|x) / Qt_Y(y))`.
    pub lhs: f64,
    /// `I_Qt(X;Y)`.
    pub rhs: f64,
    /// `lhs >= rhs - 1e-9`.
    pub holds: bool,
}

/// Compares the cross term of the averaged channel at `q` against the
/// mutual information at `q_tilde`.
pub fn averaged_mi_inequality_check(family: &[Dmc], q_tilde: &Pmf, q: &Pmf, q_x: &Pmf) -> Result<AveragedMiCheck> {
    let wt = averaged_channel(family, q_tilde)?;
    let w = averaged_channel(family, q)?;
    if q_x.len() != w.input_size() {
        return Err(Error::ShapeMismatch("input law and channels disagree".into()));
    }
    let qy = wt.output_pmf(q_x.probs());
    let mut lhs = 0.0;
    for (x, px) in q_x.probs().iter().enumerate() {
        for y in 0..w.output_size() {
            let m = px * w.get(x, y);
            if m > 0.0 {
                lhs += m * (wt.get(x, y) / qy[y]).log2();
            }
        }
    }
    let rhs = JointPmf::from_input_channel(q_x, &wt).and_then(|j| crate::info::mutual_info(&j))?;
    Ok(AveragedMiCheck { lhs, rhs, holds: lhs >= rhs - 1e-9 })
}

/// Fast capacity objective used by the optimizers, exposed for cross-checks.
pub fn objective_thm1_fast(q_ux: &JointInput, q_s: &Pmf, ch: &Avwtc) -> Result<f64> {
    check_channel_state(ch, q_s.len())?;
    Ok(thm1_value(&q_ux.padded(q_ux.u_size), q_ux.u_size, ch, q_s.probs()))
}
