//! Acceptance criteria, one result line each.
//!
//! Runs without the libtest harness so that every line is printed. Pass
//! criterion numbers as arguments to run a subset.

use std::time::Instant;

use avwtc::capacity::{
    bsbe_capacity, capacity_thm1, lower_bound_thm2, lower_bound_thm2_with_starts, min_mutual_info_over_set,
    upper_bound_thm3_with_starts, ConstraintSet, OptimizerConfig,
};
use avwtc::coupling::{couple, deficiency_count, marginal_uniformity_test, UniformityMode};
use avwtc::info::binary_entropy;
use avwtc::prob::{atypical_prob, binomial, enumerate_types, type_class_size, type_counts};
use avwtc::rng::{derive_seed, rng_from_seed, Rng};
use avwtc::sim::{
    induced_eaves_channel, lemma4_bound, mutual_info_rows, pair_errors, semantic_leakage, EvalMode,
    ThresholdDecoder, WiretapCodebook,
};
use avwtc::softcover::{soft_cover_exponent, soft_cover_trials, SoftCoverProblem};
use avwtc::{AtypicalMode, Avwtc, Dmc, Pmf, Sequence, TypicalityParams};
use rand::Rng as _;

type Outcome = std::result::Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn bsbe_cfg() -> OptimizerConfig {
    OptimizerConfig::default()
}

fn bsbe(eps: f64, alpha: f64) -> avwtc::capacity::BsbeReport {
    bsbe_capacity(eps, alpha, &bsbe_cfg()).expect("valid parameters")
}

/// Bisects the boundary between `zero(lo)` and `!zero(hi)` to width `tol`.
fn boundary(mut lo: f64, mut hi: f64, tol: f64, zero: impl Fn(f64) -> bool) -> f64 {
    let lo_zero = zero(lo);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if zero(mid) == lo_zero {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn threshold_in_alpha() -> Outcome {
    let mut bad = Vec::new();
    for i in 0..=7 {
        let a = 0.05 * i as f64;
        let r = bsbe(0.1, a);
        if !(r.value == 0.0 && r.raw.abs() < 1e-4) {
            bad.push(format!("alpha={a:.2} value={:.3e} raw={:.3e}", r.value, r.raw));
        }
    }
    for i in 8..=20 {
        let a = 0.05 * i as f64;
        let r = bsbe(0.1, a);
        if !(r.value > 1e-3) {
            bad.push(format!("alpha={a:.2} value={:.3e}", r.value));
        }
    }
    let edge = boundary(0.35, 0.40, 1e-4, |a| bsbe(0.1, a).value == 0.0);
    let ok = bad.is_empty() && (0.355..=0.365).contains(&edge);
    check(ok, format!("boundary alpha={edge:.5}; violations: {bad:?}"))
}

fn zero_interval_in_eps() -> Outcome {
    let zero = |e: f64| bsbe(e, 0.4).value == 0.0;
    let e1 = boundary(0.05, 0.2, 1e-5, zero);
    let e2 = boundary(0.8, 0.95, 1e-5, zero);
    let ok = (e1 - 0.1127).abs() <= 0.003 && (e2 - 0.8872).abs() <= 0.003 && zero(0.5) && !zero(0.05) && !zero(0.95);
    check(ok, format!("eps1={e1:.5} eps2={e2:.5}"))
}

fn zero_iff_curve() -> Outcome {
    let mut bad = Vec::new();
    let mut checked = 0;
    for i in 0..20 {
        for j in 0..20 {
            let (e, a) = (i as f64 / 19.0, j as f64 / 19.0);
            let curve = 4.0 * e * (1.0 - e);
            if (a - curve).abs() <= 1e-3 {
                continue;
            }
            checked += 1;
            let is_zero = bsbe(e, a).value == 0.0;
            if is_zero != (a <= curve) {
                bad.push(format!("(eps={e:.4}, alpha={a:.4})"));
            }
        }
    }
    check(bad.is_empty(), format!("{checked} grid points checked; mismatches: {bad:?}"))
}

fn degenerate_endpoints() -> Outcome {
    let mut worst: f64 = 0.0;
    for e in [0.0, 0.1, 0.25, 0.5] {
        worst = worst.max((bsbe(e, 1.0).value - (1.0 - binary_entropy(e))).abs());
    }
    let one = bsbe(0.0, 1.0).value;
    check(worst < 1e-4 && (one - 1.0).abs() < 1e-4, format!("max error {worst:.3e}; C(0,1)={one:.12}"))
}

fn random_rows(rng: &mut Rng, rows: usize, cols: usize) -> Dmc {
    Dmc::new(
        (0..rows)
            .map(|_| {
                let w: Vec<f64> = (0..cols).map(|_| rng.random::<f64>() + 0.05).collect();
                let s: f64 = w.iter().sum();
                w.into_iter().map(|v| v / s).collect()
            })
            .collect(),
    )
    .expect("rows are normalized")
}

fn random_avwtc(seed: u64) -> (Avwtc, Pmf) {
    let mut rng = rng_from_seed(seed);
    let main = (0..2).map(|_| random_rows(&mut rng, 2, 2)).collect();
    let eaves = (0..2).map(|_| random_rows(&mut rng, 2, 2)).collect();
    let p = 0.2 + 0.6 * rng.random::<f64>();
    (Avwtc::new(main, eaves).expect("consistent shapes"), Pmf::new(vec![p, 1.0 - p]).expect("valid"))
}

fn bounds_cfg() -> OptimizerConfig {
    OptimizerConfig::default()
}

fn bound_sandwich() -> Outcome {
    let cfg = bounds_cfg();
    let mut bad = Vec::new();
    let mut worst_gap: f64 = f64::INFINITY;
    let mut worst_match: f64 = 0.0;
    for inst in 0..20u64 {
        let (ch, q_s) = random_avwtc(derive_seed(500, inst));
        for delta in [0.05, 0.2] {
            let set = ConstraintSet::boxed(q_s.clone(), delta).expect("valid radius");
            let lb = lower_bound_thm2(&ch, &set, &cfg).expect("lower bound");
            let ub = upper_bound_thm3_with_starts(&ch, &set, &cfg, &[lb.argmax.clone()]).expect("upper bound");
            let slack = lb.tolerance + ub.tolerance;
            worst_gap = worst_gap.min(ub.raw + slack - lb.raw);
            if lb.raw > ub.raw + slack {
                bad.push(format!("instance {inst} delta {delta}: LB {:.6e} > UB {:.6e}", lb.raw, ub.raw));
            }
        }
        let set = ConstraintSet::singleton(q_s.clone());
        let cap = capacity_thm1(&ch, &q_s, &cfg).expect("capacity");
        let lb = lower_bound_thm2(&ch, &set, &cfg).expect("lower bound");
        let ub = upper_bound_thm3_with_starts(&ch, &set, &cfg, &[lb.argmax.clone()]).expect("upper bound");
        let spread = [cap.value, lb.value, ub.value];
        let diff = spread.iter().cloned().fold(f64::MIN, f64::max) - spread.iter().cloned().fold(f64::MAX, f64::min);
        worst_match = worst_match.max(diff);
        if diff > 5e-3 {
            bad.push(format!("instance {inst} singleton: C={:.6} LB={:.6} UB={:.6}", cap.value, lb.value, ub.value));
        }
    }
    check(
        bad.is_empty(),
        format!("min UB+tol-LB {worst_gap:.3e}; max singleton spread {worst_match:.3e}; violations: {bad:?}"),
    )
}

fn lower_bound_convergence() -> Outcome {
    let cfg = bounds_cfg();
    let mut bad = Vec::new();
    let mut worst: f64 = 0.0;
    for inst in 0..5u64 {
        let (ch, q_s) = random_avwtc(derive_seed(900, inst));
        let cap = capacity_thm1(&ch, &q_s, &cfg).expect("capacity");
        let mut starts = vec![cap.argmax.clone()];
        let mut prev: Option<(f64, f64)> = None;
        let mut last = 0.0;
        for delta in [0.2, 0.1, 0.05, 0.02, 0.01] {
            let set = ConstraintSet::boxed(q_s.clone(), delta).expect("valid radius");
            let r = lower_bound_thm2_with_starts(&ch, &set, &cfg, &starts).expect("lower bound");
            if let Some((p, tol)) = prev {
                if r.raw < p - tol - r.tolerance {
                    bad.push(format!("instance {inst}: LB fell from {p:.9} to {:.9} at delta {delta}", r.raw));
                }
            }
            prev = Some((r.raw, r.tolerance));
            starts.push(r.argmax.clone());
            last = r.value;
        }
        let gap = (last - cap.value).abs();
        worst = worst.max(gap);
        if gap > 1e-2 {
            bad.push(format!("instance {inst}: LB(0.01)={last:.6} vs C={:.6}", cap.value));
        }
    }
    check(bad.is_empty(), format!("max |LB(0.01) - C| {worst:.3e}; violations: {bad:?}"))
}

fn soft_covering_decay() -> Outcome {
    let crossover = 0.2;
    let mi = 1.0 - binary_entropy(crossover);
    let rate = mi + 0.75;
    let ns = [4usize, 6, 8, 10, 12];
    let deltas = [0.25, 0.375, 0.5, 0.6, 0.7];
    let mut medians = Vec::new();
    let mut notes = Vec::new();
    let mut bad = Vec::new();
    for &n in &ns {
        let prob = SoftCoverProblem::single_state(&Pmf::uniform(2).expect("k >= 1"), Dmc::bsc(crossover).expect("valid"), n, rate)
            .expect("valid problem");
        let report = soft_cover_trials(&prob, 200, derive_seed(77, n as u64), 0.375).expect("trials");
        medians.push(report.median());
        for &delta in &deltas {
            let exp = soft_cover_exponent(&prob, delta).expect("delta > 0");
            let threshold = exp.c_delta * n as f64 * (-(n as f64) * exp.gamma_delta).exp2();
            let failures = report.divergences.iter().filter(|&&d| d > threshold).count();
            let fraction = failures as f64 / report.divergences.len() as f64;
            let bound = avwtc::softcover::covering_failure_bound(2, n, delta);
            if bound < 1.0 {
                notes.push(format!("n={n} delta={delta}: fail {fraction:.3} <= {bound:.2e}"));
                if fraction > bound {
                    bad.push(format!("n={n} delta={delta}: failure fraction {fraction} > bound {bound:.3e}"));
                }
            }
        }
    }
    let decreasing = medians.windows(2).all(|w| w[1] < w[0]);
    let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let ys: Vec<f64> = medians.iter().map(|m| m.log2()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / 5.0, ys.iter().sum::<f64>() / 5.0);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    if !decreasing {
        bad.push("medians not strictly decreasing".into());
    }
    if !(slope < 0.0) {
        bad.push(format!("fit slope {slope}"));
    }
    check(
        bad.is_empty(),
        format!(
            "medians {}; log2 slope {slope:.4}; bound checks {}; violations: {bad:?}",
            medians.iter().map(|m| format!("{m:.4e}")).collect::<Vec<_>>().join(", "),
            notes.len()
        ),
    )
}

fn atypicality() -> Outcome {
    let p = Pmf::uniform(2).expect("k >= 1");
    let mut bad = Vec::new();
    for n in 4..=12 {
        for eps in [0.1, 0.3, 0.6] {
            let params = TypicalityParams::new(eps).expect("eps > 0");
            let exact = atypical_prob(&p, n, params, AtypicalMode::Exact).expect("small n");
            let bound = atypical_prob(&p, n, params, AtypicalMode::Bound).expect("bound");
            if exact > bound {
                bad.push(format!("n={n} eps={eps}: {exact} > {bound}"));
            }
        }
    }
    check(bad.is_empty(), format!("27 cases; violations: {bad:?}"))
}

fn type_counting() -> Outcome {
    let mut bad = Vec::new();
    for k in 1..=3usize {
        for n in 1..=10usize {
            let types = enumerate_types(n, k).expect("small");
            let expected = binomial((n + k - 1) as u64, (k - 1) as u64).expect("fits");
            let sizes: u128 = types.iter().map(|t| type_class_size(t, n).expect("integral")).sum();
            if types.len() as u128 != expected || sizes != (k as u128).pow(n as u32) {
                bad.push(format!("n={n} k={k}: {} types, class sizes sum {sizes}", types.len()));
            }
        }
    }
    check(bad.is_empty(), format!("30 (n, k) pairs; violations: {bad:?}"))
}

fn all_sequences(k: usize, n: usize) -> Vec<Vec<usize>> {
    (0..k.pow(n as u32))
        .map(|mut i| {
            let mut v = vec![0; n];
            for slot in v.iter_mut().rev() {
                *slot = i % k;
                i /= k;
            }
            v
        })
        .collect()
}

fn decoder_error_bound() -> Outcome {
    let n = 4;
    let eta = 0.25;
    let (messages, local) = (2, 2);
    let q_x = Pmf::uniform(2).expect("k >= 1");
    let mut notes = Vec::new();
    let mut bad = Vec::new();
    let instances = [
        ("noiseless", Avwtc::new(vec![Dmc::identity(2), Dmc::identity(2)], vec![Dmc::bsc(0.3).expect("valid"); 2])),
        (
            "noisy",
            Avwtc::new(
                vec![Dmc::bsc(0.02).expect("valid"), Dmc::bsc(0.1).expect("valid")],
                vec![Dmc::bsc(0.3).expect("valid"); 2],
            ),
        ),
    ];
    for (name, ch) in instances {
        let ch = ch.expect("consistent shapes");
        let q_s = Pmf::new(vec![0.75, 0.25]).expect("valid");
        let set = ConstraintSet::singleton(q_s.clone());
        let (_, q_tilde) = min_mutual_info_over_set(ch.main(), &q_x, &set, 50).expect("inner minimum");
        let w_tilde = avwtc::prob::averaged_channel(ch.main(), &q_tilde).expect("shapes");
        let s = Sequence::new(vec![0, 1, 0, 0], 2).expect("valid");
        let bound = lemma4_bound(&q_x, n, messages, local, &w_tilde, &ch, &s, eta, EvalMode::Exact).expect("bound");
        let dec = ThresholdDecoder::new(&w_tilde, &q_x).expect("shapes");
        let mut total = 0.0;
        for c in 0..200 {
            let book = WiretapCodebook::build(&q_x, n, messages, local, derive_seed(31, c)).expect("valid");
            let errs = pair_errors(&book, &s, &ch, &dec).expect("small n");
            total += errs.iter().sum::<f64>() / errs.len() as f64;
        }
        let measured = total / 200.0;
        notes.push(format!("{name}: error {measured:.4} <= bound {bound:.4}"));
        if measured > bound {
            bad.push(format!("{name}: {measured} > {bound}"));
        }
    }
    let w = Dmc::new(vec![vec![0.7, 0.2, 0.1], vec![0.1, 0.3, 0.6]]).expect("valid");
    let q = Pmf::new(vec![0.35, 0.65]).expect("valid");
    let dec = ThresholdDecoder::new(&w, &q).expect("shapes");
    let mut worst: f64 = 0.0;
    for m in 1..=4 {
        for y in all_sequences(3, m) {
            let mean: f64 = all_sequences(2, m)
                .iter()
                .map(|x| x.iter().map(|&a| q[a]).product::<f64>() * dec.metric(x, &y))
                .sum();
            worst = worst.max((mean - 1.0).abs());
        }
    }
    if worst > 1e-9 {
        bad.push(format!("unit mean off by {worst}"));
    }
    check(bad.is_empty(), format!("{notes:?}; max |E d - 1| {worst:.2e}; violations: {bad:?}"))
}

fn coupling_properties() -> Outcome {
    let mut bad = Vec::new();
    let mut rng = rng_from_seed(2024);
    for trial in 0..10_000u64 {
        let k = rng.random_range(2..=3usize);
        let n = rng.random_range(1..=12usize);
        let s: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        let mut cuts: Vec<usize> = (0..k - 1).map(|_| rng.random_range(0..=n)).collect();
        cuts.sort();
        let mut counts = Vec::new();
        let mut prev = 0;
        for c in cuts {
            counts.push(c - prev);
            prev = c;
        }
        counts.push(n - prev);
        let target = Pmf::new(counts.iter().map(|&c| c as f64 / n as f64).collect()).expect("valid");
        let s = Sequence::new(s, k).expect("valid");
        let t = couple(&s, &target, derive_seed(11, trial)).expect("integral target");
        let quota = type_counts(&target, n).expect("integral");
        let k_expected = deficiency_count(&s, &target).expect("integral");
        if t.output.counts() != quota || t.iterations != k_expected || s.hamming_distance(&t.output) != t.iterations {
            bad.push(format!("trial {trial}: {:?} -> {:?}", s.symbols(), t.output.symbols()));
        }
    }
    let u = marginal_uniformity_test(
        &Pmf::new(vec![0.75, 0.25]).expect("valid"),
        &Pmf::uniform(2).expect("k >= 1"),
        4,
        UniformityMode::Exact,
    )
    .expect("small n");
    if !u.pass {
        bad.push(format!("uniformity deviation {}", u.statistic));
    }
    check(bad.is_empty(), format!("10000 instances; uniformity deviation {:.2e}; violations: {bad:?}", u.statistic))
}

fn leakage_grid() -> Outcome {
    let mut bad = Vec::new();
    let mut worst: f64 = 0.0;
    let q_x = Pmf::uniform(2).expect("k >= 1");
    let s = Sequence::new(vec![0, 0], 1).expect("valid");
    for inst in 0..10u64 {
        let mut rng = rng_from_seed(derive_seed(4242, inst));
        let eaves = random_rows(&mut rng, 2, 2);
        let ch = Avwtc::new(vec![Dmc::identity(2)], vec![eaves]).expect("shapes");
        let local = 1 + (inst as usize % 2);
        let book = WiretapCodebook::build(&q_x, 2, 2, local, derive_seed(99, inst)).expect("valid");
        let rows = induced_eaves_channel(&book, &s, &ch).expect("small");
        let grid = (0..=1000)
            .map(|i| {
                let p = i as f64 / 1000.0;
                mutual_info_rows(&rows, &[p, 1.0 - p])
            })
            .fold(0.0, f64::max);
        let uniform = mutual_info_rows(&rows, &[0.5, 0.5]);
        let l = semantic_leakage(&book, &s, &ch).expect("small");
        worst = worst.max((l - grid).abs());
        if (l - grid).abs() > 1e-6 || l < uniform {
            bad.push(format!("instance {inst}: leakage {l:.9} grid {grid:.9} uniform {uniform:.9}"));
        }
    }
    check(bad.is_empty(), format!("max |leakage - grid| {worst:.2e}; violations: {bad:?}"))
}

fn main() {
    let criteria: [(usize, &str, fn() -> Outcome); 12] = [
        (1, "BS-BE zero threshold in alpha at eps = 0.1", threshold_in_alpha),
        (2, "BS-BE zero interval in eps at alpha = 0.4", zero_interval_in_eps),
        (3, "BS-BE zero iff alpha <= 4 eps (1 - eps)", zero_iff_curve),
        (4, "BS-BE endpoints at alpha = 1", degenerate_endpoints),
        (5, "lower/upper bound sandwich and singleton agreement", bound_sandwich),
        (6, "lower bound convergence as the box shrinks", lower_bound_convergence),
        (7, "soft-covering divergence decay", soft_covering_decay),
        (8, "atypicality bound", atypicality),
        (9, "type counts and class sizes", type_counting),
        (10, "threshold decoder error bound and unit-mean metric", decoder_error_bound),
        (11, "state-sequence coupling", coupling_properties),
        (12, "semantic leakage against a prior grid", leakage_grid),
    ];
    let wanted: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (id, name, run) in criteria {
        if !wanted.is_empty() && !wanted.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {id:>2} PASS ({secs:.1} s) {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {id:>2} FAIL ({secs:.1} s) {name}: {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
