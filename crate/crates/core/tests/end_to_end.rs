//! Cross-module checks through the public API.

use avwtc::capacity::{
    bsbe_capacity, bsbe_channel, capacity_thm1, lower_bound_thm2, upper_bound_thm3_with_starts, ConstraintSet,
    OptimizerConfig,
};
use avwtc::coupling::{couple, deficiency_count, sample_type_class};
use avwtc::prob::type_counts;
use avwtc::rng::derive_seed;
use avwtc::softcover::{soft_cover_exponent_default, SoftCoverProblem};
use avwtc::{Dmc, Pmf};

#[test]
fn bsbe_closed_path_matches_general_optimizer() {
    let cfg = OptimizerConfig::default();
    for (eps, alpha) in [(0.1, 0.6), (0.05, 0.9), (0.2, 0.7)] {
        let (ch, q) = bsbe_channel(eps, alpha).unwrap();
        let general = capacity_thm1(&ch, &q, &cfg).unwrap().value;
        let special = bsbe_capacity(eps, alpha, &cfg).unwrap().value;
        assert!((general - special).abs() < 1e-6, "eps {eps} alpha {alpha}: {general} vs {special}");
    }
}

#[test]
fn singleton_bounds_bracket_capacity() {
    let cfg = OptimizerConfig::default();
    let (ch, q) = bsbe_channel(0.1, 0.6).unwrap();
    let c = capacity_thm1(&ch, &q, &cfg).unwrap().value;
    let set = ConstraintSet::singleton(q);
    let lb = lower_bound_thm2(&ch, &set, &cfg).unwrap();
    let ub = upper_bound_thm3_with_starts(&ch, &set, &cfg, &[lb.argmax.clone()]).unwrap();
    assert!((lb.value - c).abs() < 1e-6);
    assert!(ub.value >= lb.value - 1e-9);
    assert!((ub.value - c).abs() < 1e-6);
}

#[test]
fn coupled_sequences_feed_type_arithmetic() {
    let source = Pmf::new(vec![0.5, 0.25, 0.25]).unwrap();
    let target = Pmf::new(vec![0.25, 0.25, 0.5]).unwrap();
    let quota = type_counts(&target, 8).unwrap();
    for t in 0..50 {
        let s = sample_type_class(&source, 8, derive_seed(9, 2 * t)).unwrap();
        let trace = couple(&s, &target, derive_seed(9, 2 * t + 1)).unwrap();
        assert_eq!(trace.output.counts(), quota);
        assert_eq!(trace.iterations, deficiency_count(&s, &target).unwrap());
        assert_eq!(s.hamming_distance(&trace.output), trace.iterations);
    }
}

#[test]
fn covering_exponent_is_positive_above_mutual_information() {
    let q_u = Pmf::new(vec![0.5, 0.5]).unwrap();
    let ch = Dmc::new(vec![vec![0.9, 0.1], vec![0.1, 0.9]]).unwrap();
    let prob = SoftCoverProblem::single_state(&q_u, ch, 4, 0.8).unwrap();
    let e = soft_cover_exponent_default(&prob).unwrap();
    assert!(e.gamma_delta > 0.0 && e.c_delta.is_finite());
}
