//! Random wiretap codebooks, threshold decoding and exact code evaluation.
//!
//! A codebook holds `M * W` words `x(m, w)` drawn i.i.d. from `Q_X`; the
//! encoder picks `w` uniformly. The decoder compares the likelihood-ratio
//! metric
//!
//! ```text
//! d(x, y) = prod_i W~(y_i|x_i) / Q~_Y(y_i),   Q~_Y(y) = sum_x Q_X(x) W~(y|x)
//! ```
//!
//! across all words and outputs the unique strict maximizer, or
//! [`DecodeResult::Erasure`]. When `Q~_Y^n(y) = 0` the metric is `1` for every
//! word. Metrics are compared in log space; values within
//! [`TIE_TOLERANCE`] of each other count as ties.
//!
//! Message and codebook indices are zero-based.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng as _;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::prob::{sample_with, Avwtc, Dmc, KahanSum, Pmf, Sequence};
use crate::rng::{derive_seed, rng_from_seed};

/// Log-metric gap below which two words are considered tied.
pub const TIE_TOLERANCE: f64 = 1e-10;
/// Largest output space enumerated exactly for error probabilities.
pub const OUTPUT_LIMIT: f64 = 1e7;
/// Largest eavesdropper output space enumerated for leakage.
pub const LEAKAGE_LIMIT: f64 = 1e6;
/// Convergence gap of the channel capacity iteration, in bits.
pub const CAPACITY_TOLERANCE: f64 = 1e-9;
const CAPACITY_MAX_ITERS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct WiretapCodebook {
    n: usize,
    messages: usize,
    local: usize,
    /// Word `(m, w)` lives at `m * local + w`.
    words: Vec<Sequence>,
    seed: u64,
}

impl WiretapCodebook {
    /// Draws `messages * local` words of length `n` i.i.d. from `q_x`.
    pub fn build(q_x: &Pmf, n: usize, messages: usize, local: usize, seed: u64) -> Result<Self> {
        if n == 0 || messages == 0 || local == 0 {
            return Err(Error::InvalidArgument(format!(
                "n = {n}, M = {messages}, W = {local} must all be >= 1"
            )));
        }
        let mut rng = rng_from_seed(seed);
        let words = (0..messages * local)
            .map(|_| Sequence::new(sample_with(q_x, n, &mut rng), q_x.len()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n, messages, local, words, seed })
    }

    /// Wraps explicit words, listed message-major.
    pub fn from_words(words: Vec<Sequence>, messages: usize, local: usize) -> Result<Self> {
        if messages == 0 || local == 0 || words.len() != messages * local {
            return Err(Error::ShapeMismatch(format!(
                "{} words for M = {messages}, W = {local}",
                words.len()
            )));
        }
        let n = words[0].len();
        let k = words[0].alphabet_size();
        if words.iter().any(|w| w.len() != n || w.alphabet_size() != k) {
            return Err(Error::ShapeMismatch("codewords of different lengths or alphabets".into()));
        }
        Ok(Self { n, messages, local, words, seed: 0 })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn message_count(&self) -> usize {
        self.messages
    }

    pub fn local_count(&self) -> usize {
        self.local
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn words(&self) -> &[Sequence] {
        &self.words
    }

    pub fn word(&self, m: usize, w: usize) -> &Sequence {
        &self.words[m * self.local + w]
    }

    fn input_size(&self) -> usize {
        self.words[0].alphabet_size()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DecodeResult {
    Message(usize, usize),
    Erasure,
}

impl DecodeResult {
    pub fn message(&self) -> Option<usize> {
        match self {
            Self::Message(m, _) => Some(*m),
            Self::Erasure => None,
        }
    }
}

/// A map from channel outputs to decisions.
pub trait Decoder: Sync {
    fn decode(&self, book: &WiretapCodebook, y: &[usize]) -> DecodeResult;
}

/// Strict-maximum decoder on the likelihood-ratio metric.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdDecoder {
    nx: usize,
    ny: usize,
    /// `ln W~(y|x) - ln Q~_Y(y)`, flattened `x * ny + y`.
    log_ratio: Vec<f64>,
    /// Outputs with `Q~_Y(y) = 0`.
    null_output: Vec<bool>,
}

impl ThresholdDecoder {
    pub fn new(w_tilde: &Dmc, q_x: &Pmf) -> Result<Self> {
        if w_tilde.input_size() != q_x.len() {
            return Err(Error::ShapeMismatch(format!(
                "channel has {} inputs, Q_X has {}",
                w_tilde.input_size(),
                q_x.len()
            )));
        }
        let (nx, ny) = (w_tilde.input_size(), w_tilde.output_size());
        let q_y = w_tilde.output_pmf(q_x.probs());
        let null_output: Vec<bool> = q_y.iter().map(|&p| p == 0.0).collect();
        let mut log_ratio = vec![0.0; nx * ny];
        for x in 0..nx {
            for y in 0..ny {
                let w = w_tilde.get(x, y);
                log_ratio[x * ny + y] = if null_output[y] {
                    0.0
                } else if w == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    w.ln() - q_y[y].ln()
                };
            }
        }
        Ok(Self { nx, ny, log_ratio, null_output })
    }

    pub fn input_size(&self) -> usize {
        self.nx
    }

    pub fn output_size(&self) -> usize {
        self.ny
    }

    /// `ln d(x, y)`; `-inf` when `d = 0`.
    pub fn log_metric(&self, x: &[usize], y: &[usize]) -> f64 {
        if y.iter().any(|&b| self.null_output[b]) {
            return 0.0;
        }
        x.iter().zip(y).map(|(&a, &b)| self.log_ratio[a * self.ny + b]).sum()
    }

    pub fn metric(&self, x: &[usize], y: &[usize]) -> f64 {
        self.log_metric(x, y).exp()
    }
}

impl Decoder for ThresholdDecoder {
    fn decode(&self, book: &WiretapCodebook, y: &[usize]) -> DecodeResult {
        let mut best = f64::NEG_INFINITY;
        let mut second = f64::NEG_INFINITY;
        let mut arg = 0;
        for (i, word) in book.words.iter().enumerate() {
            let v = self.log_metric(word.symbols(), y);
            if v > best {
                second = best;
                best = v;
                arg = i;
            } else if v > second {
                second = v;
            }
        }
        let strict = book.words.len() == 1
            || (best > second + TIE_TOLERANCE && best > f64::NEG_INFINITY);
        if strict {
            DecodeResult::Message(arg / book.local, arg % book.local)
        } else {
            DecodeResult::Erasure
        }
    }
}

/// Declares an erasure on every output.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ErasureDecoder;

impl Decoder for ErasureDecoder {
    fn decode(&self, _: &WiretapCodebook, _: &[usize]) -> DecodeResult {
        DecodeResult::Erasure
    }
}

/// `d(x, y)` for the channel `w_tilde` and reference input law `q_x`.
pub fn decoding_metric(x: &Sequence, y: &Sequence, w_tilde: &Dmc, q_x: &Pmf) -> Result<f64> {
    let dec = ThresholdDecoder::new(w_tilde, q_x)?;
    check_pair(x, y, w_tilde)?;
    Ok(dec.metric(x.symbols(), y.symbols()))
}

fn check_pair(x: &Sequence, y: &Sequence, w: &Dmc) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::ShapeMismatch(format!("lengths {} and {}", x.len(), y.len())));
    }
    if x.alphabet_size() != w.input_size() || y.alphabet_size() != w.output_size() {
        return Err(Error::ShapeMismatch("sequence alphabets do not match the channel".into()));
    }
    Ok(())
}

/// Threshold decoding of `y` against `book`.
pub fn decode(book: &WiretapCodebook, y: &Sequence, w_tilde: &Dmc, q_x: &Pmf) -> Result<DecodeResult> {
    let dec = ThresholdDecoder::new(w_tilde, q_x)?;
    if y.len() != book.n || y.alphabet_size() != dec.ny || book.input_size() != dec.nx {
        return Err(Error::ShapeMismatch("output sequence does not match codebook and channel".into()));
    }
    Ok(dec.decode(book, y.symbols()))
}

/// How a probability is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    /// Full enumeration.
    Exact,
    /// Sampling with per-trial seeds derived from `seed`.
    MonteCarlo { trials: usize, seed: u64 },
}

fn check_state_seq(book_n: usize, s: &Sequence, ch: &Avwtc) -> Result<()> {
    if s.len() != book_n || s.alphabet_size() != ch.state_size() {
        return Err(Error::ShapeMismatch(format!(
            "state sequence of length {} over {} symbols; expected length {book_n} over {}",
            s.len(),
            s.alphabet_size(),
            ch.state_size()
        )));
    }
    Ok(())
}

fn check_limit(what: &'static str, base: usize, n: usize, limit: f64) -> Result<usize> {
    let needed = (base as f64).powi(n as i32);
    if needed > limit {
        return Err(Error::SizeLimit { what, needed, limit });
    }
    Ok(base.pow(n as u32))
}

/// Writes the base-`k` digits of `index` into `buf`, most significant first.
fn unrank(mut index: usize, k: usize, buf: &mut [usize]) {
    for slot in buf.iter_mut().rev() {
        *slot = index % k;
        index /= k;
    }
}

/// `prod_i W_{s_i}(y_i|x_i)`.
fn seq_prob(family: &[Dmc], s: &[usize], x: &[usize], y: &[usize]) -> f64 {
    let mut p = 1.0;
    for i in 0..x.len() {
        p *= family[s[i]].get(x[i], y[i]);
        if p == 0.0 {
            break;
        }
    }
    p
}

fn check_channel(book: &WiretapCodebook, s: &Sequence, ch: &Avwtc) -> Result<()> {
    check_state_seq(book.n, s, ch)?;
    if book.input_size() != ch.input_size() {
        return Err(Error::ShapeMismatch("codebook alphabet does not match the channel input".into()));
    }
    Ok(())
}

/// Exact error probability of every pair, `P(decode(Y) != (m, w))` with `Y`
/// the output for `x(m, w)` under the state sequence `s`, indexed
/// `m * W + w`.
pub fn pair_errors<D: Decoder>(book: &WiretapCodebook, s: &Sequence, ch: &Avwtc, decoder: &D) -> Result<Vec<f64>> {
    check_channel(book, s, ch)?;
    let ny = ch.main_output_size();
    let total = check_limit("main output space", ny, book.n, OUTPUT_LIMIT)?;
    let mut correct: Vec<KahanSum> = vec![KahanSum::default(); book.words.len()];
    let mut y = vec![0; book.n];
    for idx in 0..total {
        unrank(idx, ny, &mut y);
        if let DecodeResult::Message(m, w) = decoder.decode(book, &y) {
            let i = m * book.local + w;
            correct[i].add(seq_prob(ch.main(), s.symbols(), book.words[i].symbols(), &y));
        }
    }
    Ok(correct.iter().map(|c| (1.0 - c.total()).clamp(0.0, 1.0)).collect())
}

/// Probability of not decoding message `m` under `s`, averaged uniformly
/// over the local randomness.
pub fn error_prob<D: Decoder>(
    book: &WiretapCodebook,
    s: &Sequence,
    ch: &Avwtc,
    m: usize,
    decoder: &D,
    mode: EvalMode,
) -> Result<f64> {
    check_channel(book, s, ch)?;
    if m >= book.messages {
        return Err(Error::InvalidArgument(format!("message {m} out of range 0..{}", book.messages)));
    }
    match mode {
        EvalMode::Exact => {
            let ny = ch.main_output_size();
            let total = check_limit("main output space", ny, book.n, OUTPUT_LIMIT)?;
            let mut correct = KahanSum::default();
            let mut y = vec![0; book.n];
            for idx in 0..total {
                unrank(idx, ny, &mut y);
                if decoder.decode(book, &y).message() == Some(m) {
                    let mut p = 0.0;
                    for w in 0..book.local {
                        p += seq_prob(ch.main(), s.symbols(), book.word(m, w).symbols(), &y);
                    }
                    correct.add(p / book.local as f64);
                }
            }
            Ok((1.0 - correct.total()).clamp(0.0, 1.0))
        }
        EvalMode::MonteCarlo { trials, seed } => {
            if trials == 0 {
                return Err(Error::InvalidArgument("trials must be >= 1".into()));
            }
            let samplers = row_samplers(ch.main());
            let errors: usize = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = rng_from_seed(derive_seed(seed, t as u64));
                    let w = rng.random_range(0..book.local);
                    let x = book.word(m, w).symbols();
                    let y: Vec<usize> =
                        x.iter().zip(s.symbols()).map(|(&a, &st)| samplers[st][a].sample(&mut rng)).collect();
                    usize::from(decoder.decode(book, &y).message() != Some(m))
                })
                .sum();
            Ok(errors as f64 / trials as f64)
        }
    }
}

fn row_samplers(family: &[Dmc]) -> Vec<Vec<WeightedIndex<f64>>> {
    family
        .iter()
        .map(|w| {
            (0..w.input_size())
                .map(|x| WeightedIndex::new(w.row(x)).expect("channel rows are pmfs"))
                .collect()
        })
        .collect()
}

/// `P(d(X, Y) < M W / eta) + eta` with `X ~ Q_X^n` and `Y` its output under
/// the state sequence `s`.
///
/// The comparison is made on log-metrics with [`TIE_TOLERANCE`] slack, so a
/// metric equal to the threshold up to rounding is not counted as below it.
#[allow(clippy::too_many_arguments)]
pub fn lemma4_bound(
    q_x: &Pmf,
    n: usize,
    messages: usize,
    local: usize,
    w_tilde: &Dmc,
    ch: &Avwtc,
    s: &Sequence,
    eta: f64,
    mode: EvalMode,
) -> Result<f64> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::InvalidArgument(format!("eta = {eta} must be positive and finite")));
    }
    if messages == 0 || local == 0 {
        return Err(Error::InvalidArgument("M and W must be >= 1".into()));
    }
    check_state_seq(n, s, ch)?;
    if q_x.len() != ch.input_size() || w_tilde.input_size() != ch.input_size() {
        return Err(Error::ShapeMismatch("Q_X, reference channel and AVWTC disagree on |X|".into()));
    }
    if w_tilde.output_size() != ch.main_output_size() {
        return Err(Error::ShapeMismatch("reference channel and AVWTC disagree on |Y|".into()));
    }
    let dec = ThresholdDecoder::new(w_tilde, q_x)?;
    let threshold = ((messages * local) as f64 / eta).ln() - TIE_TOLERANCE;
    let below = match mode {
        EvalMode::Exact => {
            let (nx, ny) = (ch.input_size(), ch.main_output_size());
            check_limit("input-output pair space", nx * ny, n, OUTPUT_LIMIT)?;
            let mut acc = KahanSum::default();
            let mut x = vec![0; n];
            let mut y = vec![0; n];
            pairs_below(&dec, ch.main(), s.symbols(), q_x.probs(), threshold, 0, 1.0, &mut x, &mut y, &mut acc);
            acc.total()
        }
        EvalMode::MonteCarlo { trials, seed } => {
            if trials == 0 {
                return Err(Error::InvalidArgument("trials must be >= 1".into()));
            }
            let samplers = row_samplers(ch.main());
            let hits: usize = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = rng_from_seed(derive_seed(seed, t as u64));
                    let x = sample_with(q_x, n, &mut rng);
                    let y: Vec<usize> =
                        x.iter().zip(s.symbols()).map(|(&a, &st)| samplers[st][a].sample(&mut rng)).collect();
                    usize::from(dec.log_metric(&x, &y) < threshold)
                })
                .sum();
            hits as f64 / trials as f64
        }
    };
    Ok(below + eta)
}

#[allow(clippy::too_many_arguments)]
fn pairs_below(
    dec: &ThresholdDecoder,
    family: &[Dmc],
    s: &[usize],
    q_x: &[f64],
    threshold: f64,
    pos: usize,
    prob: f64,
    x: &mut [usize],
    y: &mut [usize],
    acc: &mut KahanSum,
) {
    if pos == x.len() {
        if dec.log_metric(x, y) < threshold {
            acc.add(prob);
        }
        return;
    }
    for (a, &qa) in q_x.iter().enumerate() {
        for b in 0..dec.ny {
            let p = prob * qa * family[s[pos]].get(a, b);
            if p == 0.0 {
                continue;
            }
            x[pos] = a;
            y[pos] = b;
            pairs_below(dec, family, s, q_x, threshold, pos + 1, p, x, y, acc);
        }
    }
}

/// The channel `m -> Z^n` seen by the eavesdropper under `s`, averaged
/// uniformly over the local randomness. Rows are messages, columns are
/// eavesdropper output sequences in lexicographic order.
pub fn induced_eaves_channel(book: &WiretapCodebook, s: &Sequence, ch: &Avwtc) -> Result<Vec<Vec<f64>>> {
    check_channel(book, s, ch)?;
    let nz = ch.eaves_output_size();
    let total = check_limit("eavesdropper output space", nz, book.n, LEAKAGE_LIMIT)?;
    let mut rows = vec![vec![0.0; total]; book.messages];
    let mut z = vec![0; book.n];
    for idx in 0..total {
        unrank(idx, nz, &mut z);
        for (m, row) in rows.iter_mut().enumerate() {
            let mut p = 0.0;
            for w in 0..book.local {
                p += seq_prob(ch.eaves(), s.symbols(), book.word(m, w).symbols(), &z);
            }
            row[idx] = p / book.local as f64;
        }
    }
    Ok(rows)
}

/// `I(M;Z)` in bits for the prior `p` over the rows of `rows`.
pub fn mutual_info_rows(rows: &[Vec<f64>], p: &[f64]) -> f64 {
    let out = output_law(rows, p);
    rows.iter().zip(p).filter(|(_, &pm)| pm > 0.0).map(|(r, &pm)| pm * kl_bits(r, &out)).sum::<f64>().max(0.0)
}

fn output_law(rows: &[Vec<f64>], p: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; rows[0].len()];
    for (r, &pm) in rows.iter().zip(p) {
        for (o, v) in out.iter_mut().zip(r) {
            *o += pm * v;
        }
    }
    out
}

fn kl_bits(r: &[f64], q: &[f64]) -> f64 {
    r.iter().zip(q).filter(|(&a, _)| a > 0.0).map(|(&a, &b)| a * (a / b).log2()).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityEstimate {
    /// `I(M;Z)` at `prior`; a lower bound on the capacity.
    pub value: f64,
    /// `max_m D(P(.|m) || P_Z)`; an upper bound on the capacity.
    pub upper: f64,
    pub prior: Vec<f64>,
    pub iterations: usize,
}

/// Capacity of a row-stochastic matrix by alternating maximization, started
/// from the uniform prior and stopped once the upper and lower bounds are
/// within `tol` bits.
pub fn channel_capacity(rows: &[Vec<f64>], tol: f64) -> Result<CapacityEstimate> {
    let Some(first) = rows.first() else {
        return Err(Error::InvalidArgument("channel with no inputs".into()));
    };
    if rows.iter().any(|r| r.len() != first.len()) {
        return Err(Error::ShapeMismatch("rows of different lengths".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance {tol} must be positive")));
    }
    // Drop outputs that no input reaches.
    let live: Vec<usize> = (0..first.len()).filter(|&j| rows.iter().any(|r| r[j] > 0.0)).collect();
    let rows: Vec<Vec<f64>> = rows.iter().map(|r| live.iter().map(|&j| r[j]).collect()).collect();
    let k = rows.len();
    let mut p = vec![1.0 / k as f64; k];
    let mut iterations = 0;
    loop {
        let out = output_law(&rows, &p);
        let d: Vec<f64> = rows.iter().map(|r| kl_bits(r, &out)).collect();
        let value = p.iter().zip(&d).map(|(a, b)| a * b).sum::<f64>().max(0.0);
        let upper = d.iter().cloned().fold(0.0, f64::max);
        if upper - value <= tol || iterations >= CAPACITY_MAX_ITERS {
            return Ok(CapacityEstimate { value, upper, prior: p, iterations });
        }
        let dmax = upper;
        let mut z = 0.0;
        for (pm, dm) in p.iter_mut().zip(&d) {
            *pm *= (dm - dmax).exp2();
            z += *pm;
        }
        p.iter_mut().for_each(|v| *v /= z);
        iterations += 1;
    }
}

/// `max_{P_M} I(M; Z^n)` in bits under the state sequence `s`.
pub fn semantic_leakage(book: &WiretapCodebook, s: &Sequence, ch: &Avwtc) -> Result<f64> {
    if book.messages == 1 {
        check_channel(book, s, ch)?;
        return Ok(0.0);
    }
    let rows = induced_eaves_channel(book, s, ch)?;
    let uniform = mutual_info_rows(&rows, &vec![1.0 / rows.len() as f64; rows.len()]);
    Ok(channel_capacity(&rows, CAPACITY_TOLERANCE)?.value.max(uniform))
}
