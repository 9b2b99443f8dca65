//! Information measures over finite distributions, in bits.
//!
//! Divergences report support violations in-band as `f64::INFINITY`.

use ndarray::{ArrayD, IxDyn};

use crate::error::{Error, Result};
use crate::prob::{Pmf, KahanSum, PMF_TOLERANCE};

/// Converts an amount in bits to nats.
pub fn bits_to_nats(bits: f64) -> f64 {
    bits * std::f64::consts::LN_2
}

/// Shannon entropy of a (possibly unnormalized) weight vector.
pub(crate) fn entropy_slice(p: &[f64]) -> f64 {
    -p.iter().filter(|&&v| v > 0.0).map(|&v| v * v.log2()).sum::<f64>()
}

pub fn entropy(p: &Pmf) -> f64 {
    entropy_slice(p.probs()).max(0.0)
}

/// Binary entropy `h(p)`.
pub fn binary_entropy(p: f64) -> f64 {
    entropy_slice(&[p, 1.0 - p]).max(0.0)
}

/// Joint law over a product of finite alphabets.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf {
    table: ArrayD<f64>,
}

impl JointPmf {
    pub fn new(table: ArrayD<f64>) -> Result<Self> {
        if table.ndim() == 0 || table.is_empty() {
            return Err(Error::ShapeMismatch("joint table needs at least one axis".into()));
        }
        if table.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidPmf("joint entries must be finite and non-negative".into()));
        }
        let total: f64 = table.iter().sum();
        if (total - 1.0).abs() > PMF_TOLERANCE {
            return Err(Error::InvalidPmf(format!("joint entries sum to {total}")));
        }
        Ok(Self { table })
    }

    /// Row-major data with the given axis sizes.
    pub fn from_vec(shape: &[usize], data: Vec<f64>) -> Result<Self> {
        let table = ArrayD::from_shape_vec(IxDyn(shape), data)
            .map_err(|e| Error::ShapeMismatch(e.to_string()))?;
        Self::new(table)
    }

    /// `p(a) * W(b|a)`.
    pub fn from_input_channel(p: &Pmf, w: &crate::prob::Dmc) -> Result<Self> {
        if p.len() != w.input_size() {
            return Err(Error::ShapeMismatch("input law and channel disagree".into()));
        }
        let mut data = Vec::with_capacity(p.len() * w.output_size());
        for (a, pa) in p.probs().iter().enumerate() {
            data.extend(w.row(a).iter().map(|v| pa * v));
        }
        Self::from_vec(&[p.len(), w.output_size()], data)
    }

    pub fn shape(&self) -> &[usize] {
        self.table.shape()
    }

    pub fn ndim(&self) -> usize {
        self.table.ndim()
    }

    pub fn table(&self) -> &ArrayD<f64> {
        &self.table
    }

    /// Marginal law of a single axis.
    pub fn marginal(&self, axis: usize) -> Result<Pmf> {
        self.check_axes(&[axis])?;
        let mut out = vec![0.0; self.shape()[axis]];
        for (idx, v) in self.table.indexed_iter() {
            out[idx[axis]] += v;
        }
        Pmf::new(out)
    }

    fn check_axes(&self, axes: &[usize]) -> Result<()> {
        let mut seen = vec![false; self.ndim()];
        for &a in axes {
            if a >= self.ndim() || seen[a] {
                return Err(Error::ShapeMismatch(format!(
                    "axis {a} invalid or repeated for a {}-axis table",
                    self.ndim()
                )));
            }
            seen[a] = true;
        }
        Ok(())
    }

    /// Collapses the table to a dense `(A, B, C)` array for the given axis
    /// groups; unnamed axes are summed out.
    fn grouped(&self, a: &[usize], b: &[usize], c: &[usize]) -> Result<Grouped> {
        let all: Vec<usize> = a.iter().chain(b).chain(c).copied().collect();
        self.check_axes(&all)?;
        let shape = self.shape();
        let size = |g: &[usize]| g.iter().map(|&x| shape[x]).product::<usize>();
        let (na, nb, nc) = (size(a), size(b), size(c));
        let flat = |idx: &IxDyn, g: &[usize]| g.iter().fold(0usize, |acc, &x| acc * shape[x] + idx[x]);
        let mut data = vec![0.0; na * nb * nc];
        for (idx, v) in self.table.indexed_iter() {
            let (ia, ib, ic) = (flat(&idx, a), flat(&idx, b), flat(&idx, c));
            data[(ia * nb + ib) * nc + ic] += v;
        }
        Ok(Grouped { na, nb, nc, data })
    }
}

struct Grouped {
    na: usize,
    nb: usize,
    nc: usize,
    data: Vec<f64>,
}

/// `I(A;B|C)` for a dense `(A, B, C)` table, computed term by term so that
/// small values keep their relative accuracy.
pub(crate) fn cmi_dense(na: usize, nb: usize, nc: usize, p: &[f64]) -> f64 {
    let at = |a: usize, b: usize, c: usize| p[(a * nb + b) * nc + c];
    let mut pac = vec![0.0; na * nc];
    let mut pbc = vec![0.0; nb * nc];
    let mut pc = vec![0.0; nc];
    for a in 0..na {
        for b in 0..nb {
            for c in 0..nc {
                let v = at(a, b, c);
                pac[a * nc + c] += v;
                pbc[b * nc + c] += v;
                pc[c] += v;
            }
        }
    }
    let mut acc = KahanSum::default();
    for a in 0..na {
        for b in 0..nb {
            for c in 0..nc {
                let v = at(a, b, c);
                if v > 0.0 {
                    acc.add(v * (v * pc[c] / (pac[a * nc + c] * pbc[b * nc + c])).log2());
                }
            }
        }
    }
    acc.total().max(0.0)
}

/// `I(A;B)` for a dense row-major `(A, B)` table.
pub(crate) fn mi_dense(na: usize, nb: usize, p: &[f64]) -> f64 {
    cmi_dense(na, nb, 1, p)
}

/// `I(A;B)` of a two-axis joint.
pub fn mutual_info(j: &JointPmf) -> Result<f64> {
    if j.ndim() != 2 {
        return Err(Error::ShapeMismatch(format!("expected 2 axes, got {}", j.ndim())));
    }
    mutual_info_axes(j, &[0], &[1], &[])
}

/// `I(A;B|C)` of a three-axis joint.
pub fn cond_mutual_info(j: &JointPmf) -> Result<f64> {
    if j.ndim() != 3 {
        return Err(Error::ShapeMismatch(format!("expected 3 axes, got {}", j.ndim())));
    }
    mutual_info_axes(j, &[0], &[1], &[2])
}

/// `I(A;B|C)` where `A`, `B`, `C` are groups of axes of `j`; axes not named
/// are marginalized. An empty `c` gives the unconditional quantity.
pub fn mutual_info_axes(j: &JointPmf, a: &[usize], b: &[usize], c: &[usize]) -> Result<f64> {
    let g = j.grouped(a, b, c)?;
    Ok(cmi_dense(g.na, g.nb, g.nc, &g.data))
}

/// Entropy of the marginal law of a group of axes.
pub fn joint_entropy_axes(j: &JointPmf, axes: &[usize]) -> Result<f64> {
    let g = j.grouped(axes, &[], &[])?;
    Ok(entropy_slice(&g.data).max(0.0))
}

fn same_len(p: &Pmf, q: &Pmf) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::ShapeMismatch(format!("alphabets of size {} and {}", p.len(), q.len())));
    }
    Ok(())
}

pub(crate) fn kl_slice(p: &[f64], q: &[f64]) -> f64 {
    let mut acc = KahanSum::default();
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b <= 0.0 {
                return f64::INFINITY;
            }
            acc.add(a * (a / b).log2());
        }
    }
    acc.total().max(0.0)
}

/// `D(p||q)`; `+inf` when `p` is not absolutely continuous w.r.t. `q`.
pub fn kl_divergence(p: &Pmf, q: &Pmf) -> Result<f64> {
    same_len(p, q)?;
    Ok(kl_slice(p.probs(), q.probs()))
}

pub fn total_variation(p: &Pmf, q: &Pmf) -> Result<f64> {
    same_len(p, q)?;
    let s: f64 = p.probs().iter().zip(q.probs()).map(|(a, b)| (a - b).abs()).sum();
    Ok((0.5 * s).min(1.0))
}

pub(crate) fn renyi_slice(p: &[f64], q: &[f64], eta: f64) -> f64 {
    if eta.is_infinite() {
        return max_divergence_slice(p, q);
    }
    // Factor out the largest log-term to keep the power sum in range.
    let mut logs = Vec::with_capacity(p.len());
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b <= 0.0 {
                return f64::INFINITY;
            }
            logs.push(eta * a.log2() + (1.0 - eta) * b.log2());
        }
    }
    let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = logs.iter().map(|l| (l - m).exp2()).sum();
    ((m + s.log2()) / (eta - 1.0)).max(0.0)
}

/// `log2 max_a p(a)/q(a)`, the order-infinity limit.
pub(crate) fn max_divergence_slice(p: &[f64], q: &[f64]) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b <= 0.0 {
                return f64::INFINITY;
            }
            best = best.max((a / b).log2());
        }
    }
    best.max(0.0)
}

/// Order-`eta` Rényi divergence `1/(eta-1) log2 sum p^eta q^(1-eta)`.
/// `eta = +inf` gives the max-divergence.
pub fn renyi_divergence(p: &Pmf, q: &Pmf, eta: f64) -> Result<f64> {
    same_len(p, q)?;
    if !(eta > 1.0) {
        return Err(Error::InvalidArgument(format!("Renyi order {eta} must exceed 1")));
    }
    Ok(renyi_slice(p.probs(), q.probs(), eta))
}

/// `log2 max_a p(a)/q(a)`.
pub fn max_divergence(p: &Pmf, q: &Pmf) -> Result<f64> {
    same_len(p, q)?;
    Ok(max_divergence_slice(p.probs(), q.probs()))
}
