//! Finite-alphabet probability primitives.
//!
//! Probability vectors ([`Pmf`]), channels ([`Dmc`]), wiretap channel
//! families ([`Avwtc`]), sequences and the method-of-types toolbox built on
//! them: empirical types, type enumeration, type-class sizes, letter-typical
//! sets and the i.i.d. atypicality bound.

use std::ops::Index;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;

use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, Rng};

/// Absolute tolerance on the total mass of a [`Pmf`].
pub const PMF_TOLERANCE: f64 = 1e-12;
/// Tolerance for deciding that `n * t(a)` is an integer.
pub const TYPE_TOLERANCE: f64 = 1e-9;
/// Upper limit on exhaustive enumerations.
pub const ENUMERATION_LIMIT: f64 = 1e7;

/// Probability vector over `{0, .., k-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    probs: Vec<f64>,
}

impl Pmf {
    /// Validates and wraps `probs`. Inputs are never renormalized here.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(probs, PMF_TOLERANCE)
    }

    fn with_tolerance(probs: Vec<f64>, tol: f64) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidPmf("empty alphabet".into()));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidPmf(format!("entry {p} is negative or not finite")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > tol {
            return Err(Error::InvalidPmf(format!("entries sum to {total}")));
        }
        Ok(Self { probs })
    }

    /// Explicit renormalization of non-negative weights.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidPmf("weights must be finite and non-negative".into()));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidPmf("weights sum to zero".into()));
        }
        Self::new(weights.into_iter().map(|w| w / total).collect())
    }

    pub fn uniform(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidPmf("empty alphabet".into()));
        }
        Ok(Self { probs: vec![1.0 / k as f64; k] })
    }

    pub fn point_mass(k: usize, at: usize) -> Result<Self> {
        if at >= k {
            return Err(Error::InvalidArgument(format!("symbol {at} outside alphabet of size {k}")));
        }
        let mut probs = vec![0.0; k];
        probs[at] = 1.0;
        Ok(Self { probs })
    }

    /// Convex combination `sum_i weights[i] * pmfs[i]`.
    pub fn mixture(pmfs: &[Pmf], weights: &Pmf) -> Result<Self> {
        if pmfs.len() != weights.len() || pmfs.is_empty() {
            return Err(Error::ShapeMismatch("one weight per component required".into()));
        }
        let k = pmfs[0].len();
        if pmfs.iter().any(|p| p.len() != k) {
            return Err(Error::ShapeMismatch("components over different alphabets".into()));
        }
        let mut out = vec![0.0; k];
        for (p, w) in pmfs.iter().zip(weights.probs()) {
            for (o, v) in out.iter_mut().zip(p.probs()) {
                *o += w * v;
            }
        }
        Self::new(out)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.probs
    }
}

impl Index<usize> for Pmf {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.probs[i]
    }
}

/// Row-stochastic transition matrix, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dmc {
    inputs: usize,
    outputs: usize,
    data: Vec<f64>,
}

impl Dmc {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::build(rows, PMF_TOLERANCE, false)
    }

    /// Accepts rows whose sums are within `tol` of one and rescales them to
    /// unit mass.
    pub fn new_normalized(rows: Vec<Vec<f64>>, tol: f64) -> Result<Self> {
        Self::build(rows, tol, true)
    }

    fn build(rows: Vec<Vec<f64>>, tol: f64, renormalize: bool) -> Result<Self> {
        let inputs = rows.len();
        if inputs == 0 {
            return Err(Error::ShapeMismatch("channel without input symbols".into()));
        }
        let outputs = rows[0].len();
        let mut data = Vec::with_capacity(inputs * outputs);
        for (x, row) in rows.into_iter().enumerate() {
            if row.len() != outputs {
                return Err(Error::ShapeMismatch(format!(
                    "row {x} has {} entries, expected {outputs}",
                    row.len()
                )));
            }
            let pmf = Pmf::with_tolerance(row, tol)
                .map_err(|e| Error::InvalidPmf(format!("row {x}: {e}")))?;
            let total: f64 = pmf.probs().iter().sum();
            if renormalize {
                data.extend(pmf.probs().iter().map(|p| p / total));
            } else {
                data.extend_from_slice(pmf.probs());
            }
        }
        Ok(Self { inputs, outputs, data })
    }

    pub fn identity(k: usize) -> Self {
        let mut data = vec![0.0; k * k];
        for i in 0..k {
            data[i * k + i] = 1.0;
        }
        Self { inputs: k, outputs: k, data }
    }

    /// Binary symmetric channel with crossover `eps`.
    pub fn bsc(eps: f64) -> Result<Self> {
        Self::new(vec![vec![1.0 - eps, eps], vec![eps, 1.0 - eps]])
    }

    /// Binary erasure channel; output symbol 2 is the erasure.
    pub fn bec(alpha: f64) -> Result<Self> {
        Self::new(vec![vec![1.0 - alpha, 0.0, alpha], vec![0.0, 1.0 - alpha, alpha]])
    }

    /// Channel whose output law ignores the input.
    pub fn constant(inputs: usize, output: &Pmf) -> Self {
        let mut data = Vec::with_capacity(inputs * output.len());
        for _ in 0..inputs {
            data.extend_from_slice(output.probs());
        }
        Self { inputs, outputs: output.len(), data }
    }

    pub fn input_size(&self) -> usize {
        self.inputs
    }

    pub fn output_size(&self) -> usize {
        self.outputs
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[x * self.outputs + y]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.data[x * self.outputs..(x + 1) * self.outputs]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.inputs).map(|x| self.row(x).to_vec()).collect()
    }

    /// Output law when the input is distributed according to `input`.
    pub fn output_pmf(&self, input: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.outputs];
        for (x, px) in input.iter().enumerate() {
            if *px == 0.0 {
                continue;
            }
            for (o, w) in out.iter_mut().zip(self.row(x)) {
                *o += px * w;
            }
        }
        out
    }

    /// `(1 - upsilon |Y|) W + upsilon`: every entry bounded below by `upsilon`.
    pub fn smoothed(&self, upsilon: f64) -> Result<Self> {
        let k = self.outputs as f64;
        if !(0.0..=1.0 / k).contains(&upsilon) {
            return Err(Error::InvalidArgument(format!(
                "smoothing parameter {upsilon} outside [0, 1/|Y|]"
            )));
        }
        let scale = 1.0 - upsilon * k;
        Ok(Self {
            inputs: self.inputs,
            outputs: self.outputs,
            data: self.data.iter().map(|w| scale * w + upsilon).collect(),
        })
    }
}

/// Arbitrarily varying wiretap channel: one main and one eavesdropper
/// channel per state, all over the same input alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct Avwtc {
    input_size: usize,
    main: Vec<Dmc>,
    eaves: Vec<Dmc>,
}

impl Avwtc {
    pub fn new(main: Vec<Dmc>, eaves: Vec<Dmc>) -> Result<Self> {
        if main.is_empty() || main.len() != eaves.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} main and {} eavesdropper channels; need the same positive number",
                main.len(),
                eaves.len()
            )));
        }
        let input_size = main[0].input_size();
        let y = main[0].output_size();
        let z = eaves[0].output_size();
        for (s, (w, v)) in main.iter().zip(&eaves).enumerate() {
            if w.input_size() != input_size || v.input_size() != input_size {
                return Err(Error::ShapeMismatch(format!("state {s}: input alphabet differs")));
            }
            if w.output_size() != y || v.output_size() != z {
                return Err(Error::ShapeMismatch(format!("state {s}: output alphabet differs")));
            }
        }
        Ok(Self { input_size, main, eaves })
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn state_size(&self) -> usize {
        self.main.len()
    }

    pub fn main_output_size(&self) -> usize {
        self.main[0].output_size()
    }

    pub fn eaves_output_size(&self) -> usize {
        self.eaves[0].output_size()
    }

    pub fn main(&self) -> &[Dmc] {
        &self.main
    }

    pub fn eaves(&self) -> &[Dmc] {
        &self.eaves
    }
}

/// Finite sequence over a declared alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sequence {
    symbols: Vec<usize>,
    alphabet_size: usize,
}

impl Sequence {
    pub fn new(symbols: Vec<usize>, alphabet_size: usize) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::InvalidArgument("empty sequence".into()));
        }
        if let Some(s) = symbols.iter().find(|s| **s >= alphabet_size) {
            return Err(Error::InvalidArgument(format!(
                "symbol {s} outside alphabet of size {alphabet_size}"
            )));
        }
        Ok(Self { symbols, alphabet_size })
    }

    pub fn symbols(&self) -> &[usize] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    /// Occurrence count of every symbol.
    pub fn counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.alphabet_size];
        for &s in &self.symbols {
            c[s] += 1;
        }
        c
    }

    pub fn hamming_distance(&self, other: &Sequence) -> usize {
        self.symbols.iter().zip(&other.symbols).filter(|(a, b)| a != b).count()
    }
}

/// The `epsilon` of the letter-typical set; normalized by the alphabet size
/// inside [`is_typical`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TypicalityParams {
    epsilon: f64,
}

impl TypicalityParams {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon >= 0.0) {
            return Err(Error::InvalidArgument(format!("epsilon {epsilon} must be >= 0")));
        }
        Ok(Self { epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

/// Type (empirical distribution) of `seq`.
pub fn empirical_pmf(seq: &Sequence, alphabet_size: usize) -> Result<Pmf> {
    if seq.is_empty() {
        return Err(Error::InvalidArgument("empty sequence".into()));
    }
    let mut counts = vec![0usize; alphabet_size];
    for &s in seq.symbols() {
        if s >= alphabet_size {
            return Err(Error::InvalidArgument(format!(
                "symbol {s} outside alphabet of size {alphabet_size}"
            )));
        }
        counts[s] += 1;
    }
    let n = seq.len() as f64;
    Pmf::new(counts.into_iter().map(|c| c as f64 / n).collect())
}

pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

fn check_type_dims(n: usize, k: usize) -> Result<u128> {
    if n == 0 || k == 0 {
        return Err(Error::InvalidArgument("need n >= 1 and alphabet size >= 1".into()));
    }
    let count = binomial((n + k - 1) as u64, (k - 1) as u64).ok_or(Error::SizeLimit {
        what: "type enumeration",
        needed: f64::INFINITY,
        limit: ENUMERATION_LIMIT,
    })?;
    if count as f64 > ENUMERATION_LIMIT {
        return Err(Error::SizeLimit {
            what: "type enumeration",
            needed: count as f64,
            limit: ENUMERATION_LIMIT,
        });
    }
    Ok(count)
}

/// Every count vector `(c_0, .., c_{k-1})` with `sum c_a = n`, in
/// lexicographic order.
pub fn enumerate_type_counts(n: usize, k: usize) -> Result<Vec<Vec<usize>>> {
    let count = check_type_dims(n, k)?;
    let mut out = Vec::with_capacity(count as usize);
    let mut c = vec![0usize; k];
    c[k - 1] = n;
    loop {
        out.push(c.clone());
        // Advance to the next composition: find the rightmost non-last
        // position that can be incremented.
        let mut i = k - 1;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            let used: usize = c[..=i].iter().sum();
            if used < n {
                c[i] += 1;
                for v in c.iter_mut().skip(i + 1) {
                    *v = 0;
                }
                c[k - 1] = n - c[..=i].iter().sum::<usize>();
                break;
            }
        }
    }
}

/// All types of blocklength `n` over an alphabet of size `k`.
pub fn enumerate_types(n: usize, k: usize) -> Result<Vec<Pmf>> {
    let nf = n as f64;
    enumerate_type_counts(n, k)?
        .into_iter()
        .map(|c| Pmf::new(c.into_iter().map(|v| v as f64 / nf).collect()))
        .collect()
}

/// Integer counts `n * t(a)`, rejecting non-integral types.
pub fn type_counts(t: &Pmf, n: usize) -> Result<Vec<usize>> {
    let nf = n as f64;
    let counts: Option<Vec<usize>> = t
        .probs()
        .iter()
        .map(|p| {
            let v = p * nf;
            let r = v.round();
            ((v - r).abs() <= TYPE_TOLERANCE).then_some(r as usize)
        })
        .collect();
    match counts {
        Some(c) if c.iter().sum::<usize>() == n => Ok(c),
        _ => Err(Error::NonIntegralType { probs: t.probs().to_vec(), n }),
    }
}

/// Multinomial coefficient `n! / prod_a (n t(a))!`.
pub fn type_class_size(t: &Pmf, n: usize) -> Result<u128> {
    let counts = type_counts(t, n)?;
    multinomial(&counts).ok_or(Error::SizeLimit {
        what: "type class size",
        needed: f64::INFINITY,
        limit: u128::MAX as f64,
    })
}

pub(crate) fn multinomial(counts: &[usize]) -> Option<u128> {
    let mut acc: u128 = 1;
    let mut total = 0u64;
    for &c in counts {
        total += c as u64;
        acc = acc.checked_mul(binomial(total, c as u64)?)?;
    }
    Some(acc)
}

pub(crate) fn ln_multinomial(counts: &[usize]) -> f64 {
    let ln_fact = |m: usize| (2..=m).map(|i| (i as f64).ln()).sum::<f64>();
    let n: usize = counts.iter().sum();
    ln_fact(n) - counts.iter().map(|&c| ln_fact(c)).sum::<f64>()
}

fn counts_typical(counts: &[usize], n: usize, p: &Pmf, params: TypicalityParams) -> bool {
    let k = p.len() as f64;
    let radius = params.epsilon() / k;
    counts.iter().zip(p.probs()).all(|(&c, &px)| {
        let nu = c as f64 / n as f64;
        if px > 0.0 {
            (nu - px).abs() <= radius + PMF_TOLERANCE
        } else {
            c == 0
        }
    })
}

/// Letter-typicality test: `|nu(a) - P(a)| <= eps / |A|` for every symbol
/// with `P(a) > 0`, and `nu(a) = 0` wherever `P(a) = 0`.
pub fn is_typical(seq: &Sequence, p: &Pmf, params: TypicalityParams) -> Result<bool> {
    if seq.alphabet_size() != p.len() {
        return Err(Error::ShapeMismatch(format!(
            "sequence alphabet {} vs distribution alphabet {}",
            seq.alphabet_size(),
            p.len()
        )));
    }
    Ok(counts_typical(&seq.counts(), seq.len(), p, params))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtypicalMode {
    /// Sum of the i.i.d. probabilities of all atypical type classes.
    Exact,
    /// `2 |A| exp(-2 n eps^2 / |A|^2)`.
    Bound,
}

/// Probability that an i.i.d. `p` sequence of length `n` is not typical.
pub fn atypical_prob(p: &Pmf, n: usize, params: TypicalityParams, mode: AtypicalMode) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("blocklength must be >= 1".into()));
    }
    let k = p.len() as f64;
    match mode {
        AtypicalMode::Bound => {
            let eps = params.epsilon();
            Ok(2.0 * k * (-2.0 * n as f64 * eps * eps / (k * k)).exp())
        }
        AtypicalMode::Exact => {
            let mut acc = KahanSum::default();
            for counts in enumerate_type_counts(n, p.len())? {
                if counts_typical(&counts, n, p, params) {
                    continue;
                }
                let mut ln_prob = ln_multinomial(&counts);
                for (&c, &px) in counts.iter().zip(p.probs()) {
                    if c > 0 {
                        ln_prob += c as f64 * px.ln();
                    }
                }
                acc.add(ln_prob.exp());
            }
            Ok(acc.total().clamp(0.0, 1.0))
        }
    }
}

pub(crate) fn sample_with(p: &Pmf, n: usize, rng: &mut Rng) -> Vec<usize> {
    let dist = WeightedIndex::new(p.probs()).expect("validated pmf has positive mass");
    (0..n).map(|_| dist.sample(rng)).collect()
}

/// `n` i.i.d. draws from `p`; a pure function of `seed`.
pub fn sample_iid(p: &Pmf, n: usize, seed: u64) -> Result<Sequence> {
    if n == 0 {
        return Err(Error::InvalidArgument("blocklength must be >= 1".into()));
    }
    let mut rng = rng_from_seed(seed);
    Sequence::new(sample_with(p, n, &mut rng), p.len())
}

/// `W_Q(y|x) = sum_s Q(s) W_s(y|x)`.
pub fn averaged_channel(family: &[Dmc], q: &Pmf) -> Result<Dmc> {
    if family.is_empty() || family.len() != q.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} channels but state distribution over {} symbols",
            family.len(),
            q.len()
        )));
    }
    let (xi, yo) = (family[0].input_size(), family[0].output_size());
    if family.iter().any(|w| w.input_size() != xi || w.output_size() != yo) {
        return Err(Error::ShapeMismatch("channels of different shapes".into()));
    }
    Ok(averaged_unchecked(family, q.probs()))
}

pub(crate) fn averaged_unchecked(family: &[Dmc], q: &[f64]) -> Dmc {
    let (inputs, outputs) = (family[0].input_size(), family[0].output_size());
    let mut data = vec![0.0; inputs * outputs];
    for (w, &qs) in family.iter().zip(q) {
        if qs == 0.0 {
            continue;
        }
        for (d, v) in data.iter_mut().zip(&w.data) {
            *d += qs * v;
        }
    }
    Dmc { inputs, outputs, data }
}

/// Neumaier compensated summation.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub(crate) fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn seq(s: &[usize], k: usize) -> Sequence {
        Sequence::new(s.to_vec(), k).unwrap()
    }

    #[test]
    fn pmf_validation() {
        assert!(Pmf::new(vec![0.5, 0.5]).is_ok());
        assert!(Pmf::new(vec![0.5, 0.6]).is_err());
        assert!(Pmf::new(vec![-0.1, 1.1]).is_err());
        assert!(Pmf::new(vec![]).is_err());
        let p = Pmf::normalized(vec![1.0, 3.0]).unwrap();
        assert_eq!(p.probs(), &[0.25, 0.75]);
    }

    #[test]
    fn dmc_rejects_bad_rows() {
        let err = Dmc::new(vec![vec![0.5, 0.5], vec![0.6, 0.6]]).unwrap_err();
        assert!(err.to_string().contains("row 1"), "{err}");
        assert!(Dmc::new(vec![vec![1.0], vec![0.5, 0.5]]).is_err());
    }

    #[test]
    fn empirical_pmf_examples() {
        assert_eq!(empirical_pmf(&seq(&[0, 1, 1, 0], 2), 2).unwrap().probs(), &[0.5, 0.5]);
        assert_eq!(empirical_pmf(&seq(&[0, 0, 0], 2), 2).unwrap().probs(), &[1.0, 0.0]);
        assert!(empirical_pmf(&seq(&[2], 3), 2).is_err());
    }

    #[test]
    fn empirical_pmf_matches_counting_oracle() {
        let s = sample_iid(&Pmf::new(vec![0.2, 0.5, 0.3]).unwrap(), 20, 11).unwrap();
        let nu = empirical_pmf(&s, 3).unwrap();
        for a in 0..3 {
            let count = s.symbols().iter().filter(|&&x| x == a).count();
            assert_eq!(nu[a], count as f64 / 20.0);
        }
    }

    #[test]
    fn type_enumeration_counts() {
        assert_eq!(enumerate_types(4, 2).unwrap().len(), 5);
        let t = enumerate_types(1, 3).unwrap();
        assert_eq!(t.len(), 3);
        assert!(t.iter().all(|p| p.probs().iter().filter(|&&v| v == 1.0).count() == 1));
        assert_eq!(enumerate_types(10, 3).unwrap().len(), 66);
        assert!(matches!(enumerate_types(1000, 10), Err(Error::SizeLimit { .. })));
    }

    #[test]
    fn class_sizes() {
        assert_eq!(type_class_size(&Pmf::new(vec![1.0, 0.0]).unwrap(), 5).unwrap(), 1);
        assert_eq!(type_class_size(&Pmf::new(vec![0.5, 0.5]).unwrap(), 4).unwrap(), 6);
        let total: u128 = enumerate_types(6, 2)
            .unwrap()
            .iter()
            .map(|t| type_class_size(t, 6).unwrap())
            .sum();
        assert_eq!(total, 64);
        assert!(matches!(
            type_class_size(&Pmf::new(vec![0.3, 0.7]).unwrap(), 4),
            Err(Error::NonIntegralType { .. })
        ));
    }

    #[test]
    fn typicality_examples() {
        let p = Pmf::new(vec![0.25, 0.75]).unwrap();
        let zero = TypicalityParams::new(0.0).unwrap();
        assert!(is_typical(&seq(&[1, 0, 1, 1], 2), &p, zero).unwrap());
        let pm = Pmf::new(vec![1.0, 0.0]).unwrap();
        let e = TypicalityParams::new(0.1).unwrap();
        assert!(!is_typical(&seq(&[0, 0, 1], 2), &pm, e).unwrap());
        assert!(TypicalityParams::new(-1.0).is_err());
    }

    #[test]
    fn typicality_matches_exhaustive_rational_check() {
        // Binary uniform, n = 10, eps = 0.2: |k/10 - 1/2| <= 0.1  <=>  |k - 5| <= 1.
        let p = Pmf::uniform(2).unwrap();
        let params = TypicalityParams::new(0.2).unwrap();
        for bits in 0u32..1024 {
            let s: Vec<usize> = (0..10).map(|i| ((bits >> i) & 1) as usize).collect();
            let ones = bits.count_ones() as i64;
            let expected = (ones - 5).abs() <= 1;
            assert_eq!(is_typical(&seq(&s, 2), &p, params).unwrap(), expected, "{bits:b}");
        }
    }

    #[test]
    fn atypicality_examples() {
        let p = Pmf::uniform(2).unwrap();
        let big = TypicalityParams::new(2.0).unwrap();
        assert_eq!(atypical_prob(&p, 8, big, AtypicalMode::Exact).unwrap(), 0.0);
        let e = TypicalityParams::new(0.2).unwrap();
        let bound = atypical_prob(&p, 10, e, AtypicalMode::Bound).unwrap();
        assert!((bound - 4.0 * (-0.2f64).exp()).abs() < 1e-12);
        assert!((bound - 3.2749).abs() < 1e-4);
        // Exhaustive sequence-level oracle at n = 10, eps = 0.2.
        let exact = atypical_prob(&p, 10, e, AtypicalMode::Exact).unwrap();
        let typical: u32 = (0u32..1024).filter(|b| (b.count_ones() as i64 - 5).abs() <= 1).count() as u32;
        assert!((exact - (1024 - typical) as f64 / 1024.0).abs() < 1e-12);
    }

    #[test]
    fn sampling() {
        let pm = Pmf::new(vec![1.0, 0.0]).unwrap();
        assert!(sample_iid(&pm, 50, 3).unwrap().symbols().iter().all(|&s| s == 0));
        let p = Pmf::new(vec![0.3, 0.7]).unwrap();
        assert_eq!(sample_iid(&p, 100, 9).unwrap(), sample_iid(&p, 100, 9).unwrap());
        let big = sample_iid(&p, 100_000, 5).unwrap();
        let nu = empirical_pmf(&big, 2).unwrap();
        assert!((nu[0] - 0.3).abs() < 0.01);
    }

    #[test]
    fn averaging() {
        let fam = vec![Dmc::identity(2), Dmc::bsc(0.3).unwrap()];
        assert_eq!(averaged_channel(&fam, &Pmf::point_mass(2, 0).unwrap()).unwrap(), Dmc::identity(2));
        let flip = vec![Dmc::identity(2), Dmc::bsc(1.0).unwrap()];
        let w = averaged_channel(&flip, &Pmf::new(vec![0.9, 0.1]).unwrap()).unwrap();
        let bsc = Dmc::bsc(0.1).unwrap();
        for x in 0..2 {
            for y in 0..2 {
                assert!((w.get(x, y) - bsc.get(x, y)).abs() < 1e-15);
            }
        }
        let mix = vec![Dmc::bsc(0.1).unwrap(), Dmc::bsc(0.3).unwrap()];
        let w = averaged_channel(&mix, &Pmf::uniform(2).unwrap()).unwrap();
        assert!((w.get(0, 1) - 0.2).abs() < 1e-15);
        assert!(averaged_channel(&mix, &Pmf::uniform(3).unwrap()).is_err());
    }

    #[test]
    fn smoothing_bounds_entries() {
        let w = Dmc::identity(3).smoothed(0.01).unwrap();
        for x in 0..3 {
            assert!(w.row(x).iter().all(|&v| v >= 0.01));
            assert!((w.row(x).iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert!(Dmc::identity(3).smoothed(0.5).is_err());
    }

    fn arb_pmf(k: usize) -> impl Strategy<Value = Pmf> {
        prop::collection::vec(0.01f64..1.0, k).prop_map(|w| Pmf::normalized(w).unwrap())
    }

    proptest! {
        #[test]
        fn averaging_is_linear(q1 in arb_pmf(3), q2 in arb_pmf(3), t in 0.0f64..1.0) {
            let fam = vec![Dmc::bsc(0.1).unwrap(), Dmc::bsc(0.4).unwrap(), Dmc::identity(2)];
            let mix = Pmf::mixture(&[q1.clone(), q2.clone()], &Pmf::new(vec![t, 1.0 - t]).unwrap()).unwrap();
            let lhs = averaged_channel(&fam, &mix).unwrap();
            let a = averaged_channel(&fam, &q1).unwrap();
            let b = averaged_channel(&fam, &q2).unwrap();
            for x in 0..2 {
                for y in 0..2 {
                    let rhs = t * a.get(x, y) + (1.0 - t) * b.get(x, y);
                    prop_assert!((lhs.get(x, y) - rhs).abs() < 1e-12);
                }
            }
        }

        #[test]
        fn sampled_type_is_enumerated(p in arb_pmf(3), n in 1usize..12, seed in any::<u64>()) {
            let s = sample_iid(&p, n, seed).unwrap();
            let nu = empirical_pmf(&s, 3).unwrap();
            let types = enumerate_types(n, 3).unwrap();
            prop_assert!(types.iter().any(|t| t.probs().iter().zip(nu.probs()).all(|(a, b)| (a - b).abs() < 1e-12)));
        }

        #[test]
        fn exact_atypicality_below_bound(p in arb_pmf(2), n in 1usize..30, eps in 0.0f64..1.0) {
            let params = TypicalityParams::new(eps).unwrap();
            let exact = atypical_prob(&p, n, params, AtypicalMode::Exact).unwrap();
            let bound = atypical_prob(&p, n, params, AtypicalMode::Bound).unwrap();
            prop_assert!(exact <= bound + 1e-12);
        }
    }
}
