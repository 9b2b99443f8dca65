//! Heterogeneous strong soft-covering: exponents, bounds and exact-divergence
//! Monte Carlo over random codebooks.
//!
//! A codebook of `floor(2^{nR})` words `u(w)` is drawn with independent
//! symbols `u_i ~ Q_{U|S=s_i}`. Passing a uniformly chosen word through
//! `Q_{V|U,S}` induces a law on `V^n` that should be close in relative
//! entropy to the product `Q^n_{V|S=s}` once `R` exceeds `I(U;V|S)`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::info::{kl_slice, max_divergence_slice, renyi_slice};
use crate::prob::{empirical_pmf, sample_with, Dmc, KahanSum, Pmf, Sequence};
use crate::rng::{derive_seed, rng_from_seed};

/// Divergences below this are reported as zero.
pub const ZERO_TOLERANCE: f64 = 1e-10;
/// Maximum number of outputs enumerated by [`exact_induced_divergence`].
pub const OUTPUT_LIMIT: f64 = 1e7;
/// Maximum codebook size.
pub const CODEBOOK_LIMIT: f64 = 1e7;

#[derive(Debug, Clone, PartialEq)]
pub struct SoftCoverProblem {
    q_us: Dmc,
    q_vus: Vec<Dmc>,
    state_seq: Sequence,
    rate: f64,
}

impl SoftCoverProblem {
    /// `q_us` maps states to `U`; `q_vus[s]` maps `U` to `V` under state `s`.
    pub fn new(q_us: Dmc, q_vus: Vec<Dmc>, state_seq: Sequence, rate: f64) -> Result<Self> {
        let states = q_us.input_size();
        if q_vus.len() != states || state_seq.alphabet_size() != states {
            return Err(Error::ShapeMismatch(format!(
                "{states} states in Q_U|S, {} in Q_V|U,S, {} in the state sequence",
                q_vus.len(),
                state_seq.alphabet_size()
            )));
        }
        let v = q_vus[0].output_size();
        if q_vus.iter().any(|c| c.input_size() != q_us.output_size() || c.output_size() != v) {
            return Err(Error::ShapeMismatch("Q_V|U,S tables of inconsistent shape".into()));
        }
        if !(rate >= 0.0 && rate.is_finite()) {
            return Err(Error::InvalidArgument(format!("rate {rate} must be finite and >= 0")));
        }
        Ok(Self { q_us, q_vus, state_seq, rate })
    }

    /// Single-state convenience constructor: `state_seq` is the all-zero
    /// sequence of length `n`.
    pub fn single_state(q_u: &Pmf, q_vu: Dmc, n: usize, rate: f64) -> Result<Self> {
        let q_us = Dmc::new(vec![q_u.probs().to_vec()])?;
        Self::new(q_us, vec![q_vu], Sequence::new(vec![0; n], 1)?, rate)
    }

    pub fn n(&self) -> usize {
        self.state_seq.len()
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn state_seq(&self) -> &Sequence {
        &self.state_seq
    }

    pub fn u_size(&self) -> usize {
        self.q_us.output_size()
    }

    pub fn v_size(&self) -> usize {
        self.q_vus[0].output_size()
    }

    pub fn state_count(&self) -> usize {
        self.q_us.input_size()
    }

    /// Same problem at a different blocklength, with the state sequence
    /// replaced.
    pub fn with_state_seq(&self, state_seq: Sequence) -> Result<Self> {
        Self::new(self.q_us.clone(), self.q_vus.clone(), state_seq, self.rate)
    }

    /// `Q_{V|S=s}`.
    fn q_v_given(&self, s: usize) -> Vec<f64> {
        self.q_vus[s].output_pmf(self.q_us.row(s))
    }

    /// Joint `Q_{U,V|S=s}` and product `Q_{U|S=s} Q_{V|S=s}`, row-major.
    fn joint_and_product(&self, s: usize) -> (Vec<f64>, Vec<f64>) {
        let qu = self.q_us.row(s);
        let qv = self.q_v_given(s);
        let mut joint = Vec::with_capacity(qu.len() * qv.len());
        let mut prod = Vec::with_capacity(qu.len() * qv.len());
        for (u, pu) in qu.iter().enumerate() {
            for (v, pv) in qv.iter().enumerate() {
                joint.push(pu * self.q_vus[s].get(u, v));
                prod.push(pu * pv);
            }
        }
        (joint, prod)
    }

    fn codebook_size(&self) -> Result<usize> {
        let size = (self.n() as f64 * self.rate).exp2().floor();
        if size > CODEBOOK_LIMIT {
            return Err(Error::SizeLimit { what: "codebook size", needed: size, limit: CODEBOOK_LIMIT });
        }
        Ok((size as usize).max(1))
    }
}

/// `I(U;V|S)` under `nu_s Q_{U|S} Q_{V|U,S}`, where `nu_s` is the type of the
/// state sequence.
pub fn conditional_mutual_info_under_type(prob: &SoftCoverProblem) -> f64 {
    let nu = empirical_pmf(&prob.state_seq, prob.state_count()).expect("validated sequence");
    let mut acc = 0.0;
    for (s, w) in nu.probs().iter().enumerate() {
        if *w > 0.0 {
            let (joint, prod) = prob.joint_and_product(s);
            acc += w * kl_slice(&joint, &prod);
        }
    }
    acc
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentReport {
    pub delta: f64,
    pub gamma_delta: f64,
    pub c_delta: f64,
    /// Maximizing order; `f64::INFINITY` when the supremum is the
    /// `eta -> inf` limit, `1.0` when it is the `eta -> 1` limit.
    pub eta_star: f64,
    pub gamma_star: f64,
    /// `beta_{eta,delta}` at `eta_star`.
    pub beta: f64,
    /// `eps_{eta,delta}` at `eta_star`.
    pub epsilon: f64,
    /// `max 1/Q_{V|S}(v|s)` over pairs with positive probability.
    pub alpha: f64,
    /// `I(U;V|S)` under the state type.
    pub mutual_info: f64,
    /// True when `delta >= R - I(U;V|S)` and the exponent was set to zero.
    pub clamped: bool,
}

/// Order grid `1 + 2^{-10 + k/2}`, `k = 0..=40`.
pub fn eta_grid() -> Vec<f64> {
    (0..=40).map(|k| 1.0 + (-10.0 + k as f64 / 2.0).exp2()).collect()
}

struct ExponentCurve {
    per_state: Vec<(Vec<f64>, Vec<f64>)>,
    rate: f64,
}

impl ExponentCurve {
    fn new(prob: &SoftCoverProblem) -> Self {
        let per_state = (0..prob.state_count()).map(|s| prob.joint_and_product(s)).collect();
        Self { per_state, rate: prob.rate }
    }

    fn max_renyi(&self, eta: f64) -> f64 {
        self.per_state
            .iter()
            .map(|(j, p)| renyi_slice(j, p, eta))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn max_d_inf(&self) -> f64 {
        self.per_state
            .iter()
            .map(|(j, p)| max_divergence_slice(j, p))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn max_kl(&self) -> f64 {
        self.per_state.iter().map(|(j, p)| kl_slice(j, p)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// `beta_{eta,delta}`, including the two limits.
    fn beta(&self, eta: f64, delta: f64) -> f64 {
        let r = self.rate - delta;
        if eta.is_infinite() {
            0.5 * (r - self.max_d_inf())
        } else if eta <= 1.0 {
            0.0
        } else {
            (eta - 1.0) / (2.0 * eta - 1.0) * (r - self.max_renyi(eta))
        }
    }

    fn epsilon(&self, eta: f64, delta: f64, mi: f64) -> f64 {
        if eta.is_infinite() {
            return self.max_d_inf() - mi;
        }
        let d = if eta <= 1.0 { self.max_kl() } else { self.max_renyi(eta) };
        (0.5 * (self.rate - delta) + (eta - 1.0) * d) / (0.5 + (eta - 1.0)) - mi
    }

    /// Supremum over `eta > 1` of `beta_{eta,delta}` together with its
    /// maximizer. The supremum is never below zero (the `eta -> 1` limit).
    fn sup(&self, delta: f64) -> (f64, f64) {
        let grid = eta_grid();
        let vals: Vec<f64> = grid.iter().map(|&e| self.beta(e, delta)).collect();
        let (k, &grid_best) = vals
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty grid");
        let mut best = (grid_best, grid[k]);
        let lo = if k == 0 { 1.0 } else { grid[k - 1] };
        let hi = if k + 1 == grid.len() { grid[k] * 4.0 } else { grid[k + 1] };
        let refined = golden_max(|e| self.beta(e, delta), lo, hi, 1e-13);
        if refined.1 > best.0 {
            best = (refined.1, refined.0);
        }
        let tail = self.beta(f64::INFINITY, delta);
        if tail > best.0 {
            best = (tail, f64::INFINITY);
        }
        if best.0 <= 0.0 {
            (0.0, 1.0)
        } else {
            best
        }
    }
}

/// Golden-section search for the maximum of `f` on `[lo, hi]`; returns
/// `(argmax, max)`.
pub(crate) fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - g * (hi - lo);
    let mut b = lo + g * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    for _ in 0..200 {
        if hi - lo <= tol * (1.0 + lo.abs()) {
            break;
        }
        if fa >= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - g * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + g * (hi - lo);
            fb = f(b);
        }
    }
    if fa >= fb {
        (a, fa)
    } else {
        (b, fb)
    }
}

/// `max 1/Q_{V|S}(v|s)` over pairs with `Q_{V|S}(v|s) > 0`.
fn alpha_constant(prob: &SoftCoverProblem) -> f64 {
    let mut alpha: f64 = 1.0;
    for s in 0..prob.state_count() {
        for q in prob.q_v_given(s) {
            if q > 0.0 {
                alpha = alpha.max(1.0 / q);
            }
        }
    }
    alpha
}

fn c_delta(gamma: f64, alpha: f64) -> f64 {
    3.0 * std::f64::consts::LOG2_E + 2.0 * gamma + 2.0 * alpha.log2()
}

/// The soft-covering exponent `gamma_delta` and constant `c_delta`.
///
/// `delta` must be positive. For `delta >= R - I(U;V|S)` the exponent is
/// zero and the report is marked `clamped`.
pub fn soft_cover_exponent(prob: &SoftCoverProblem, delta: f64) -> Result<ExponentReport> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Precondition(format!("delta {delta} must be positive and finite")));
    }
    Ok(exponent_report(prob, delta))
}

/// [`soft_cover_exponent`] at the default `delta = (R - I) / 2`.
pub fn soft_cover_exponent_default(prob: &SoftCoverProblem) -> Result<ExponentReport> {
    let gap = prob.rate - conditional_mutual_info_under_type(prob);
    if gap <= 0.0 {
        return Err(Error::Precondition(format!(
            "rate {} does not exceed I(U;V|S); no admissible delta",
            prob.rate
        )));
    }
    soft_cover_exponent(prob, gap / 2.0)
}

fn exponent_report(prob: &SoftCoverProblem, delta: f64) -> ExponentReport {
    let curve = ExponentCurve::new(prob);
    let mi = conditional_mutual_info_under_type(prob);
    let alpha = alpha_constant(prob);
    let (star, _) = curve.sup(0.0);
    let clamped = delta >= prob.rate - mi;
    let (gamma, eta) = if clamped { (0.0, 1.0) } else { curve.sup(delta) };
    // gamma_0 dominates beta_{eta,delta} pointwise, in particular at eta*.
    let gamma_star = star.max(curve.beta(eta, 0.0)).max(gamma);
    ExponentReport {
        delta,
        gamma_delta: gamma,
        c_delta: c_delta(gamma, alpha),
        eta_star: eta,
        gamma_star,
        beta: if clamped { 0.0 } else { curve.beta(eta, delta).max(0.0) },
        epsilon: curve.epsilon(eta, delta, mi),
        alpha,
        mutual_info: mi,
        clamped,
    }
}

/// `(1 + |V|^n) exp(-2^{n delta} / 3)`.
pub fn covering_failure_bound(v_size: usize, n: usize, delta: f64) -> f64 {
    let nf = n as f64;
    let outputs = (v_size as f64).powf(nf);
    (1.0 + outputs) * (-(nf * delta).exp2() / 3.0).exp()
}

/// `exp(-(L mu / 3B) (c/mu - 1)^2)`, valid for `c/mu` in `[1, 2]`.
pub fn chernoff_bound(l: u64, mu: f64, b: f64, c: f64) -> Result<f64> {
    if !(mu > 0.0 && b > 0.0) {
        return Err(Error::Precondition(format!("need mu > 0 and B > 0, got {mu}, {b}")));
    }
    let ratio = c / mu;
    if !(1.0..=2.0).contains(&ratio) {
        return Err(Error::Precondition(format!("c/mu = {ratio} outside [1, 2]")));
    }
    Ok((-(l as f64 * mu / (3.0 * b)) * (ratio - 1.0).powi(2)).exp())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomCodebook {
    words: Vec<Sequence>,
    seed: u64,
}

impl RandomCodebook {
    /// Draws `floor(2^{nR})` words with `u_i ~ Q_{U|S=s_i}`.
    pub fn generate(prob: &SoftCoverProblem, seed: u64) -> Result<Self> {
        let size = prob.codebook_size()?;
        let mut rng = rng_from_seed(seed);
        let rows: Vec<Pmf> = (0..prob.state_count())
            .map(|s| Pmf::new(prob.q_us.row(s).to_vec()))
            .collect::<Result<_>>()?;
        let states = prob.state_seq.symbols();
        let words = (0..size)
            .map(|_| {
                let symbols: Vec<usize> = states.iter().map(|&s| sample_with(&rows[s], 1, &mut rng)[0]).collect();
                Sequence::new(symbols, prob.u_size())
            })
            .collect::<Result<_>>()?;
        Ok(Self { words, seed })
    }

    /// Wraps explicit words.
    pub fn from_words(words: Vec<Sequence>, seed: u64) -> Result<Self> {
        if words.is_empty() {
            return Err(Error::InvalidArgument("codebook without words".into()));
        }
        let n = words[0].len();
        if words.iter().any(|w| w.len() != n) {
            return Err(Error::ShapeMismatch("codewords of different lengths".into()));
        }
        Ok(Self { words, seed })
    }

    pub fn words(&self) -> &[Sequence] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Induced law on `V^n` (row-major, position 0 most significant).
fn induced_output(prob: &SoftCoverProblem, book: &RandomCodebook) -> Result<Vec<f64>> {
    let n = prob.n();
    let (ku, kv) = (prob.u_size(), prob.v_size());
    let weight = 1.0 / book.len() as f64;
    let states = prob.state_seq.symbols();
    let u_space = (ku as f64).powi(n as i32);
    let width = (ku.max(kv) as f64).powi(n as i32);
    if width <= OUTPUT_LIMIT && u_space <= OUTPUT_LIMIT {
        // Histogram over U^n, then apply the per-position kernels one axis
        // at a time.
        let mut cur = vec![0.0; u_space as usize];
        for w in book.words() {
            let idx = w.symbols().iter().fold(0usize, |acc, &u| acc * ku + u);
            cur[idx] += weight;
        }
        let mut suffix = u_space as usize;
        let mut prefix = 1usize;
        for &s in states {
            suffix /= ku;
            let kernel = &prob.q_vus[s];
            let mut next = vec![0.0; prefix * kv * suffix];
            for p in 0..prefix {
                for u in 0..ku {
                    let src = &cur[(p * ku + u) * suffix..(p * ku + u + 1) * suffix];
                    for v in 0..kv {
                        let k = kernel.get(u, v);
                        if k == 0.0 {
                            continue;
                        }
                        let dst = &mut next[(p * kv + v) * suffix..(p * kv + v + 1) * suffix];
                        for (d, x) in dst.iter_mut().zip(src) {
                            *d += k * x;
                        }
                    }
                }
            }
            cur = next;
            prefix *= kv;
        }
        Ok(cur)
    } else {
        let outputs = (kv as f64).powi(n as i32);
        if outputs > OUTPUT_LIMIT {
            return Err(Error::SizeLimit { what: "output enumeration", needed: outputs, limit: OUTPUT_LIMIT });
        }
        let mut out = vec![0.0; outputs as usize];
        let mut v = vec![0usize; n];
        for slot in out.iter_mut() {
            let mut acc = KahanSum::default();
            for w in book.words() {
                let mut p = weight;
                for i in 0..n {
                    p *= prob.q_vus[states[i]].get(w.symbols()[i], v[i]);
                    if p == 0.0 {
                        break;
                    }
                }
                acc.add(p);
            }
            *slot = acc.total();
            increment(&mut v, kv);
        }
        Ok(out)
    }
}

fn increment(digits: &mut [usize], base: usize) {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return;
        }
        *d = 0;
    }
}

/// `D(P_{V^n|B} || Q^n_{V|S=s})` by full enumeration of `V^n`.
pub fn exact_induced_divergence(prob: &SoftCoverProblem, book: &RandomCodebook) -> Result<f64> {
    let n = prob.n();
    if book.words().iter().any(|w| w.len() != n || w.alphabet_size() != prob.u_size()) {
        return Err(Error::ShapeMismatch("codewords do not match the problem".into()));
    }
    let kv = prob.v_size();
    let outputs = (kv as f64).powi(n as i32);
    if outputs > OUTPUT_LIMIT {
        return Err(Error::SizeLimit { what: "output enumeration", needed: outputs, limit: OUTPUT_LIMIT });
    }
    let induced = induced_output(prob, book)?;
    let marg: Vec<Vec<f64>> = (0..prob.state_count()).map(|s| prob.q_v_given(s)).collect();
    let states = prob.state_seq.symbols();
    let mut acc = KahanSum::default();
    let mut v = vec![0usize; n];
    for &p in &induced {
        if p > 0.0 {
            let log_ref: f64 = (0..n).map(|i| marg[states[i]][v[i]].log2()).sum();
            acc.add(p * (p.log2() - log_ref));
        }
        increment(&mut v, kv);
    }
    let d = acc.total();
    Ok(if d < ZERO_TOLERANCE { 0.0 } else { d })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialsReport {
    pub divergences: Vec<f64>,
    pub threshold: f64,
    pub failures: usize,
    pub failure_fraction: f64,
    pub covering_failure_bound: f64,
    pub exponent: ExponentReport,
}

impl TrialsReport {
    pub fn median(&self) -> f64 {
        median(&self.divergences)
    }
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Draws `trials` codebooks (trial `t` uses seed `derive_seed(seed, t)`) and
/// records the exact induced divergence of each against the threshold
/// `c_delta n 2^{-n gamma_delta}`.
pub fn soft_cover_trials(prob: &SoftCoverProblem, trials: usize, seed: u64, delta: f64) -> Result<TrialsReport> {
    let exponent = soft_cover_exponent(prob, delta)?;
    let n = prob.n();
    let threshold = exponent.c_delta * n as f64 * (-(n as f64) * exponent.gamma_delta).exp2();
    let divergences = (0..trials)
        .into_par_iter()
        .map(|t| {
            let book = RandomCodebook::generate(prob, derive_seed(seed, t as u64))?;
            exact_induced_divergence(prob, &book)
        })
        .collect::<Result<Vec<f64>>>()?;
    let failures = divergences.iter().filter(|&&d| d > threshold).count();
    Ok(TrialsReport {
        failure_fraction: if trials == 0 { 0.0 } else { failures as f64 / trials as f64 },
        failures,
        threshold,
        covering_failure_bound: covering_failure_bound(prob.v_size(), n, delta),
        divergences,
        exponent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::info::binary_entropy;

    fn bsc_problem(p: f64, n: usize, rate: f64) -> SoftCoverProblem {
        SoftCoverProblem::single_state(&Pmf::uniform(2).unwrap(), Dmc::bsc(p).unwrap(), n, rate).unwrap()
    }

    #[test]
    fn mutual_info_under_type() {
        let indep = SoftCoverProblem::single_state(
            &Pmf::uniform(2).unwrap(),
            Dmc::constant(2, &Pmf::new(vec![0.3, 0.7]).unwrap()),
            3,
            1.0,
        )
        .unwrap();
        assert!(conditional_mutual_info_under_type(&indep) < 1e-15);
        let ident = bsc_problem(0.0, 3, 1.0);
        assert!((conditional_mutual_info_under_type(&ident) - 1.0).abs() < 1e-15);

        let q_us = Dmc::new(vec![vec![0.5, 0.5], vec![0.2, 0.8]]).unwrap();
        let q_vus = vec![Dmc::bsc(0.1).unwrap(), Dmc::bsc(0.3).unwrap()];
        let seq = Sequence::new(vec![0, 1, 1, 0], 2).unwrap();
        let prob = SoftCoverProblem::new(q_us, q_vus, seq, 1.0).unwrap();
        // Per-state oracle: H(V) - H(V|U).
        let m0 = 1.0 - binary_entropy(0.1);
        let pv1 = 0.2 * 0.7 + 0.8 * 0.3;
        let m1 = binary_entropy(pv1) - binary_entropy(0.3);
        assert!((conditional_mutual_info_under_type(&prob) - 0.5 * (m0 + m1)).abs() < 1e-12);
    }

    #[test]
    fn exponent_constant_divergence_case() {
        // U = V uniform: every Renyi divergence equals 1 bit.
        let prob = bsc_problem(0.0, 4, 2.0);
        let rep = soft_cover_exponent(&prob, 0.5).unwrap();
        assert!((rep.gamma_delta - 0.25).abs() < 1e-12, "{rep:?}");
        assert!(rep.eta_star.is_infinite());
        assert!(!rep.clamped);
        assert!((rep.alpha - 2.0).abs() < 1e-15);
        let expected_c = 3.0 * std::f64::consts::LOG2_E + 0.5 + 2.0;
        assert!((rep.c_delta - expected_c).abs() < 1e-12);
        assert!((rep.gamma_star - 0.5).abs() < 1e-12);
    }

    #[test]
    fn exponent_clamps_beyond_gap() {
        let prob = bsc_problem(0.2, 4, 1.0);
        let i = conditional_mutual_info_under_type(&prob);
        let rep = soft_cover_exponent(&prob, 1.0 - i).unwrap();
        assert!(rep.clamped);
        assert_eq!(rep.gamma_delta, 0.0);
        assert!(soft_cover_exponent(&prob, 0.0).is_err());
        assert!(soft_cover_exponent(&prob, -1.0).is_err());
    }

    #[test]
    fn exponent_monotone_in_delta_and_sup_consistent() {
        let prob = bsc_problem(0.2, 4, 1.2);
        let i = conditional_mutual_info_under_type(&prob);
        let curve = ExponentCurve::new(&prob);
        let mut prev = f64::INFINITY;
        for k in 1..20 {
            let delta = (1.2 - i) * k as f64 / 20.0;
            let rep = soft_cover_exponent(&prob, delta).unwrap();
            assert!(rep.gamma_delta <= prev, "delta {delta}");
            assert!(rep.gamma_delta <= rep.gamma_star);
            assert!(rep.epsilon >= -1e-9, "{rep:?}");
            for eta in eta_grid() {
                assert!(rep.gamma_delta >= curve.beta(eta, delta) - 1e-15);
            }
            prev = rep.gamma_delta;
        }
    }

    #[test]
    fn chernoff_examples() {
        assert_eq!(chernoff_bound(10, 0.5, 1.0, 0.5).unwrap(), 1.0);
        let v = chernoff_bound(1000, 0.01, 1.0, 0.02).unwrap();
        assert!((v - (-10.0f64 / 3.0).exp()).abs() < 1e-15);
        assert!((v - 0.03567).abs() < 1e-5);
        let mut prev = 1.0;
        for l in [10, 100, 1000] {
            let b = chernoff_bound(l, 0.1, 1.0, 0.15).unwrap();
            assert!(b < prev);
            prev = b;
        }
        assert!(chernoff_bound(10, 0.1, 1.0, 0.05).is_err());
        assert!(chernoff_bound(10, 0.1, 1.0, 0.25).is_err());
    }

    /// Independent oracle: sum over all outputs of the explicit mixture.
    fn brute_divergence(prob: &SoftCoverProblem, words: &[Vec<usize>]) -> f64 {
        let n = prob.n();
        let kv = prob.v_size();
        let states = prob.state_seq.symbols();
        let total = kv.pow(n as u32);
        let mut d = 0.0;
        for idx in 0..total {
            let v: Vec<usize> = (0..n).map(|i| (idx / kv.pow((n - 1 - i) as u32)) % kv).collect();
            let p: f64 = words
                .iter()
                .map(|u| (0..n).map(|i| prob.q_vus[states[i]].get(u[i], v[i])).product::<f64>())
                .sum::<f64>()
                / words.len() as f64;
            let q: f64 = (0..n).map(|i| prob.q_v_given(states[i])[v[i]]).product();
            if p > 0.0 {
                d += p * (p / q).log2();
            }
        }
        d
    }

    #[test]
    fn divergence_matches_bruteforce() {
        let prob = bsc_problem(0.2, 2, 0.5);
        let words = vec![vec![0, 1], vec![1, 1]];
        let book = RandomCodebook::from_words(
            words.iter().map(|w| Sequence::new(w.clone(), 2).unwrap()).collect(),
            0,
        )
        .unwrap();
        let d = exact_induced_divergence(&prob, &book).unwrap();
        assert!((d - brute_divergence(&prob, &words)).abs() < 1e-12);

        // Two states, ternary outputs, random book.
        let q_us = Dmc::new(vec![vec![0.6, 0.4], vec![0.1, 0.9]]).unwrap();
        let q_vus = vec![
            Dmc::new(vec![vec![0.7, 0.2, 0.1], vec![0.1, 0.3, 0.6]]).unwrap(),
            Dmc::bec(0.25).unwrap(),
        ];
        let seq = Sequence::new(vec![0, 1, 1, 0, 1], 2).unwrap();
        let prob = SoftCoverProblem::new(q_us, q_vus, seq, 0.6).unwrap();
        let book = RandomCodebook::generate(&prob, 17).unwrap();
        assert_eq!(book.len(), 8);
        let words: Vec<Vec<usize>> = book.words().iter().map(|w| w.symbols().to_vec()).collect();
        let d = exact_induced_divergence(&prob, &book).unwrap();
        assert!((d - brute_divergence(&prob, &words)).abs() < 1e-12);
    }

    #[test]
    fn divergence_trivial_cases() {
        let indep = SoftCoverProblem::single_state(
            &Pmf::uniform(2).unwrap(),
            Dmc::constant(2, &Pmf::new(vec![0.3, 0.7]).unwrap()),
            6,
            0.5,
        )
        .unwrap();
        let book = RandomCodebook::generate(&indep, 1).unwrap();
        assert_eq!(exact_induced_divergence(&indep, &book).unwrap(), 0.0);
        let degenerate =
            SoftCoverProblem::single_state(&Pmf::uniform(1).unwrap(), Dmc::new(vec![vec![0.2, 0.8]]).unwrap(), 6, 0.5)
                .unwrap();
        let book = RandomCodebook::generate(&degenerate, 1).unwrap();
        assert_eq!(exact_induced_divergence(&degenerate, &book).unwrap(), 0.0);
    }

    #[test]
    fn trials_are_deterministic() {
        let prob = bsc_problem(0.2, 6, 1.0);
        let delta = (1.0 - conditional_mutual_info_under_type(&prob)) / 2.0;
        let a = soft_cover_trials(&prob, 20, 5, delta).unwrap();
        let b = soft_cover_trials(&prob, 20, 5, delta).unwrap();
        assert_eq!(a, b);
        assert!(a.divergences.iter().all(|&d| d >= 0.0));
    }

    #[test]
    fn golden_section_finds_peak() {
        let (x, fx) = golden_max(|x| -(x - 2.5) * (x - 2.5), 0.0, 10.0, 1e-12);
        assert!((x - 2.5).abs() < 1e-6);
        assert!(fx.abs() < 1e-12);
    }
}
