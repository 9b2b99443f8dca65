//! Randomized repair of a state sequence into an exact type class.
//!
//! Starting from `s' = s`, each round draws a position `j` uniformly among
//! those whose symbol is over its quota `n * target(s'_j)`, then a symbol
//! uniformly among those under quota, and writes it at `j`. The loop stops
//! when `s'` has type exactly `target`. A written position holds an
//! under-quota symbol, which never becomes over quota, so no position is
//! touched twice and the number of rounds equals the total surplus.

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::prob::{type_counts, KahanSum, Pmf, Sequence};
use crate::rng::{derive_seed, rng_from_seed, Rng};

/// Largest `|S|^n` for which exact path propagation is attempted.
pub const EXACT_LIMIT: f64 = 1e6;
/// Blocklengths up to this use exact propagation under [`UniformityMode::Auto`].
pub const AUTO_EXACT_MAX_N: usize = 8;
/// Tolerance of the exact uniformity check.
pub const EXACT_TOLERANCE: f64 = 1e-10;
/// Significance level of the chi-square test.
pub const SIGNIFICANCE: f64 = 0.01;
/// Minimum sample count of the chi-square test.
pub const MIN_SAMPLES: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Flip {
    pub position: usize,
    pub from: usize,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CouplingTrace {
    pub input: Sequence,
    pub output: Sequence,
    /// Number of rounds `K`.
    pub iterations: usize,
    pub flips: Vec<Flip>,
}

fn quotas(target: &Pmf, n: usize, k: usize) -> Result<Vec<usize>> {
    if target.len() != k {
        return Err(Error::ShapeMismatch(format!(
            "target over {} symbols, sequence over {k}",
            target.len()
        )));
    }
    type_counts(target, n)
}

/// `sum_s max(0, N(s|s) - n target(s))`.
pub fn deficiency_count(s: &Sequence, target: &Pmf) -> Result<usize> {
    let q = quotas(target, s.len(), s.alphabet_size())?;
    Ok(s.counts().iter().zip(&q).map(|(&c, &t)| c.saturating_sub(t)).sum())
}

fn repair(symbols: &mut [usize], quota: &[usize], rng: &mut Rng) -> Vec<Flip> {
    let mut counts = vec![0usize; quota.len()];
    for &a in symbols.iter() {
        counts[a] += 1;
    }
    let mut flips = Vec::new();
    loop {
        let over: Vec<usize> = (0..symbols.len()).filter(|&j| counts[symbols[j]] > quota[symbols[j]]).collect();
        if over.is_empty() {
            return flips;
        }
        let under: Vec<usize> = (0..quota.len()).filter(|&a| counts[a] < quota[a]).collect();
        let j = over[rng.random_range(0..over.len())];
        let to = under[rng.random_range(0..under.len())];
        let from = symbols[j];
        counts[from] -= 1;
        counts[to] += 1;
        symbols[j] = to;
        flips.push(Flip { position: j, from, to });
    }
}

/// Moves `s` into the type class of `target`; a pure function of `seed`.
pub fn couple(s: &Sequence, target: &Pmf, seed: u64) -> Result<CouplingTrace> {
    let q = quotas(target, s.len(), s.alphabet_size())?;
    let mut rng = rng_from_seed(seed);
    let mut symbols = s.symbols().to_vec();
    let flips = repair(&mut symbols, &q, &mut rng);
    Ok(CouplingTrace {
        input: s.clone(),
        output: Sequence::new(symbols, s.alphabet_size())?,
        iterations: flips.len(),
        flips,
    })
}

/// A uniform draw from the type class of `t` at blocklength `n`.
pub fn sample_type_class(t: &Pmf, n: usize, seed: u64) -> Result<Sequence> {
    let counts = type_counts(t, n)?;
    let mut rng = rng_from_seed(seed);
    Sequence::new(shuffled(&counts, &mut rng), t.len())
}

fn shuffled(counts: &[usize], rng: &mut Rng) -> Vec<usize> {
    let mut s: Vec<usize> = counts.iter().enumerate().flat_map(|(a, &c)| std::iter::repeat_n(a, c)).collect();
    s.shuffle(rng);
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UniformityMode {
    /// Propagate the exact law over all inputs and random choices.
    Exact,
    /// Chi-square test on coupled uniform draws from the source class.
    Statistical { samples: usize, seed: u64 },
    /// Exact for `n <= AUTO_EXACT_MAX_N`, otherwise statistical with
    /// [`MIN_SAMPLES`] draws.
    Auto { seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniformityReport {
    /// True when exact propagation was used.
    pub exact: bool,
    /// Exact mode: largest deviation from `1 / |class|`. Statistical mode:
    /// Pearson chi-square statistic.
    pub statistic: f64,
    /// Chi-square tail probability; `None` in exact mode.
    pub p_value: Option<f64>,
    /// Size of the target type class.
    pub class_size: usize,
    pub pass: bool,
}

/// Checks that coupling a uniform draw from the source type class yields a
/// uniform draw from the target type class.
pub fn marginal_uniformity_test(source: &Pmf, target: &Pmf, n: usize, mode: UniformityMode) -> Result<UniformityReport> {
    if n == 0 {
        return Err(Error::InvalidArgument("blocklength must be >= 1".into()));
    }
    let k = source.len();
    let src = quotas(source, n, k)?;
    let tgt = quotas(target, n, k)?;
    match mode {
        UniformityMode::Exact => exact_uniformity(&src, &tgt, n),
        UniformityMode::Statistical { samples, seed } => statistical_uniformity(&src, &tgt, samples, seed),
        UniformityMode::Auto { .. } if n <= AUTO_EXACT_MAX_N => exact_uniformity(&src, &tgt, n),
        UniformityMode::Auto { seed } => statistical_uniformity(&src, &tgt, MIN_SAMPLES, seed),
    }
}

/// All arrangements of the multiset with the given counts, lexicographic.
fn type_class(counts: &[usize]) -> Vec<Vec<usize>> {
    fn rec(counts: &mut [usize], prefix: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for a in 0..counts.len() {
            if counts[a] > 0 {
                counts[a] -= 1;
                prefix.push(a);
                rec(counts, prefix, n, out);
                prefix.pop();
                counts[a] += 1;
            }
        }
    }
    let n = counts.iter().sum();
    let mut out = Vec::new();
    rec(&mut counts.to_vec(), &mut Vec::with_capacity(n), n, &mut out);
    out
}

fn exact_uniformity(src: &[usize], tgt: &[usize], n: usize) -> Result<UniformityReport> {
    let k = src.len();
    let needed = (k as f64).powi(n as i32);
    if needed > EXACT_LIMIT {
        return Err(Error::SizeLimit { what: "sequence space for exact propagation", needed, limit: EXACT_LIMIT });
    }
    let inputs = type_class(src);
    let p0 = 1.0 / inputs.len() as f64;
    let mut law: BTreeMap<Vec<usize>, f64> = inputs.into_iter().map(|s| (s, p0)).collect();
    let rounds: usize = src.iter().zip(tgt).map(|(&c, &t)| c.saturating_sub(t)).sum();
    for _ in 0..rounds {
        let mut next: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for (seq, p) in law {
            let mut counts = vec![0usize; k];
            for &a in &seq {
                counts[a] += 1;
            }
            let over: Vec<usize> = (0..n).filter(|&j| counts[seq[j]] > tgt[seq[j]]).collect();
            let under: Vec<usize> = (0..k).filter(|&a| counts[a] < tgt[a]).collect();
            let branch = p / (over.len() * under.len()) as f64;
            for &j in &over {
                for &a in &under {
                    let mut child = seq.clone();
                    child[j] = a;
                    *next.entry(child).or_insert(0.0) += branch;
                }
            }
        }
        law = next;
    }
    let class = type_class(tgt);
    let expected = 1.0 / class.len() as f64;
    let mut deviation: f64 = 0.0;
    let mut covered = KahanSum::default();
    for t in &class {
        let p = law.get(t).copied().unwrap_or(0.0);
        covered.add(p);
        deviation = deviation.max((p - expected).abs());
    }
    // Mass outside the target class counts against uniformity.
    deviation = deviation.max((1.0 - covered.total()).abs());
    Ok(UniformityReport {
        exact: true,
        statistic: deviation,
        p_value: None,
        class_size: class.len(),
        pass: deviation <= EXACT_TOLERANCE,
    })
}

fn statistical_uniformity(src: &[usize], tgt: &[usize], samples: usize, seed: u64) -> Result<UniformityReport> {
    if samples < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!("chi-square test needs >= {MIN_SAMPLES} samples, got {samples}")));
    }
    let class = type_class(tgt);
    if class.len() < 2 {
        return Ok(UniformityReport { exact: false, statistic: 0.0, p_value: Some(1.0), class_size: class.len(), pass: true });
    }
    let expected = samples as f64 / class.len() as f64;
    if expected < 5.0 {
        return Err(Error::SizeLimit {
            what: "target type class for the chi-square test",
            needed: class.len() as f64,
            limit: samples as f64 / 5.0,
        });
    }
    let index: HashMap<&[usize], usize> = class.iter().enumerate().map(|(i, s)| (s.as_slice(), i)).collect();
    let outputs: Vec<Vec<usize>> = (0..samples)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng_from_seed(derive_seed(seed, t as u64));
            let mut s = shuffled(src, &mut rng);
            repair(&mut s, tgt, &mut rng);
            s
        })
        .collect();
    let mut hist = vec![0usize; class.len()];
    for s in &outputs {
        match index.get(s.as_slice()) {
            Some(&i) => hist[i] += 1,
            None => {
                return Ok(UniformityReport {
                    exact: false,
                    statistic: f64::INFINITY,
                    p_value: Some(0.0),
                    class_size: class.len(),
                    pass: false,
                })
            }
        }
    }
    let statistic: f64 = hist.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
    let dist = ChiSquared::new((class.len() - 1) as f64).expect("positive degrees of freedom");
    let p_value = 1.0 - dist.cdf(statistic);
    Ok(UniformityReport {
        exact: false,
        statistic,
        p_value: Some(p_value),
        class_size: class.len(),
        pass: p_value >= SIGNIFICANCE,
    })
}
