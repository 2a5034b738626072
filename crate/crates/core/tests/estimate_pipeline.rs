mod common;

use common::{assert_close, random_table, rng, sample_dataset};
use qbn_core::estimate::{
    combine_runs, estimate_feature_posterior, estimate_from_tables, recover_sum, run_table, Mode,
};
use qbn_core::graphs::{edge_feature, Graph, ModularFeatureSet, NodeFeature};
use qbn_core::oracle::{ordered_log_sum, ordered_feature_posterior_restricted};
use qbn_core::qprep::Scales;
use qbn_core::qsim::DEFAULT_MAX_QUBITS;
use qbn_core::scoring::{LocalScoreTable, PriorSpec};
use qbn_core::Error;

fn exact() -> Mode {
    Mode::ExactAmplitude
}

#[test]
fn unit_table_recovers_factorial() {
    let t = LocalScoreTable::ones(3, None).unwrap();
    let run = run_table(&t, &Scales::from_table(&t), exact(), DEFAULT_MAX_QUBITS).unwrap();
    assert_close(run.log_sum, 6f64.ln(), 1e-12, "ln 3!");
    assert_close(run.z0, 1.0 / 36.0, 1e-14, "z0");
}

#[test]
fn single_surviving_permutation() {
    let (a, b, c) = (0.3f64, 0.02f64, 0.7f64);
    let mut t = LocalScoreTable::ones(3, None).unwrap();
    for (j, s, _) in t.entries() {
        let v = match (j, s) {
            (0, 0) => a.ln(),
            (1, 0b001) => b.ln(),
            (2, 0b011) => c.ln(),
            _ => f64::NEG_INFINITY,
        };
        t.set(j, s, v).unwrap();
    }
    let scales = Scales::from_table(&t);
    let run = run_table(&t, &scales, exact(), DEFAULT_MAX_QUBITS).unwrap();
    assert_close(run.log_sum, (a * b * c).ln(), 1e-12, "abc");
    let pair = qbn_core::qsim::AmplitudePair {
        z1: num_complex::Complex64::new(run.z1, 0.0),
        z0: num_complex::Complex64::new(run.z0, 0.0),
    };
    assert_close(recover_sum(&pair, 3, &scales).unwrap(), (a * b * c).ln(), 1e-12, "recover_sum");
}

#[test]
fn scaled_tables_recover_the_same_sum() {
    let mut r = rng(61);
    for (n, lmax) in [(3, None), (3, Some(1))] {
        let t = random_table(&mut r, n, lmax);
        let shifts = [-3.0, 11.0, 0.5];
        let mut scaled = t.clone();
        for (j, s, v) in t.entries() {
            scaled.set(j, s, v + shifts[s.count_ones() as usize]).unwrap();
        }
        let plain = run_table(&t, &Scales::from_table(&t), exact(), DEFAULT_MAX_QUBITS).unwrap();
        let other = run_table(&scaled, &Scales::from_table(&scaled), exact(), DEFAULT_MAX_QUBITS).unwrap();
        let kept: f64 = shifts.iter().take(lmax.map_or(n, |l| l + 1)).sum();
        assert_close(other.log_sum - kept, plain.log_sum, 1e-10, "descaled");
        assert_close(plain.log_sum, ordered_log_sum(&t).unwrap(), 1e-10, "oracle");
    }
}

#[test]
fn trivial_feature_gives_exactly_one() {
    let mut r = rng(4);
    let g = Graph::from_sets(&[&[], &[0], &[0]]).unwrap();
    let d = sample_dataset(&mut r, &g, &[2, 2, 3], 50);
    let res = estimate_feature_posterior(&d, &PriorSpec::default(), &ModularFeatureSet::trivial(3), None, exact()).unwrap();
    assert_eq!(res.posterior, 1.0);
}

#[test]
fn edge_feature_matches_oracle() {
    let mut r = rng(5);
    let g = Graph::from_sets(&[&[], &[0], &[0]]).unwrap();
    for lmax in [None, Some(1)] {
        let d = sample_dataset(&mut r, &g, &[2, 2, 2], 50);
        let f = edge_feature(0, 2, 3).unwrap();
        let res = estimate_feature_posterior(&d, &PriorSpec::default(), &f, lmax, exact()).unwrap();
        let oracle = ordered_feature_posterior_restricted(&d, &PriorSpec::default(), &f, lmax).unwrap();
        assert_close(res.posterior, oracle.feature_value, 1e-8, "posterior");
        assert_eq!(res.oracle_value, Some(oracle.feature_value));
        assert!(res.discrepancy.unwrap() < 1e-8);
        assert!(res.numerator.log_sum <= res.denominator.log_sum + 1e-12);
        assert_eq!(res.qubits, if lmax.is_some() { 15 } else { 18 });
    }
}

#[test]
fn impossible_feature_is_flagged() {
    let mut r = rng(6);
    let g = Graph::from_sets(&[&[], &[0], &[1]]).unwrap();
    let d = sample_dataset(&mut r, &g, &[2, 2, 2], 20);
    let mut per_node = vec![NodeFeature::Any; 3];
    per_node[1] = NodeFeature::Allowed(Default::default());
    let f = ModularFeatureSet::new(per_node).unwrap();
    for mode in [exact(), Mode::Sampled { shots: 100, seed: 1 }] {
        let res = estimate_feature_posterior(&d, &PriorSpec::default(), &f, None, mode).unwrap();
        assert!(res.degenerate_numerator);
        assert_eq!(res.posterior, 0.0);
    }
}

#[test]
fn sampled_mode_is_reproducible_and_bracketed() {
    let mut r = rng(7);
    let g = Graph::from_sets(&[&[], &[0], &[0]]).unwrap();
    let d = sample_dataset(&mut r, &g, &[2, 2, 2], 50);
    let f = edge_feature(0, 1, 3).unwrap();
    let mode = Mode::Sampled { shots: 20_000, seed: 42 };
    let a = estimate_feature_posterior(&d, &PriorSpec::default(), &f, None, mode).unwrap();
    let b = estimate_feature_posterior(&d, &PriorSpec::default(), &f, None, mode).unwrap();
    assert_eq!(a, b);
    let [lo, hi] = a.sampled_interval.unwrap();
    let p = a.sampled_posterior.unwrap();
    assert!(lo <= p && p <= hi);
    assert!((p - a.posterior).abs() < 0.1, "{p} vs {}", a.posterior);
    let sn = a.numerator.sampled.as_ref().unwrap();
    let sd = a.denominator.sampled.as_ref().unwrap();
    assert_eq!((sn.seed, sd.seed), (42, 43));
}

#[test]
fn mismatched_scales_are_rejected() {
    let mut r = rng(8);
    let t = random_table(&mut r, 3, Some(1));
    let mut other = Scales::from_table(&t);
    other.level_log[0] += 1.0;
    let a = run_table(&t, &Scales::from_table(&t), exact(), DEFAULT_MAX_QUBITS).unwrap();
    let b = run_table(&t, &other, exact(), DEFAULT_MAX_QUBITS).unwrap();
    assert!(matches!(combine_runs(&a, &b), Err(Error::ScaleMismatch)));
}

#[test]
fn qubit_limit_and_shape_errors() {
    let t4 = LocalScoreTable::ones(4, None).unwrap();
    assert!(matches!(
        estimate_from_tables(&t4, &t4, exact(), DEFAULT_MAX_QUBITS),
        Err(Error::SizeBound { .. })
    ));
    let t3 = LocalScoreTable::ones(3, None).unwrap();
    assert!(matches!(estimate_from_tables(&t3, &t4, exact(), 30), Err(Error::Dimension(_))));
}

#[test]
fn result_serializes_with_full_precision() {
    let t = LocalScoreTable::ones(2, None).unwrap();
    let res = estimate_from_tables(&t, &t, exact(), DEFAULT_MAX_QUBITS).unwrap();
    let text = qbn_core::json::to_string(&res).unwrap();
    assert!(text.contains("\"mode\": \"exact-amplitude\""));
    assert!(text.contains("\"posterior\": 1.0000000000000000e0"));
    let back: qbn_core::estimate::EstimationResult = serde_json::from_str(&text).unwrap();
    assert_eq!(back, res);
}
