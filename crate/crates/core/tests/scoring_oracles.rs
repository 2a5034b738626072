mod common;

use common::rng;
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use qbn_core::graphs::{edge_feature, full_mask, subsets};
use qbn_core::scoring::{build_score_table, counts, log_local_likelihood, Dataset, PriorSpec};
use rand::Rng;

fn big_factorial(k: usize) -> BigUint {
    (1..=k).fold(BigUint::one(), |acc, i| acc * BigUint::from(i))
}

fn big_ln(x: &BigUint) -> f64 {
    let bits = x.bits();
    let shift = bits.saturating_sub(64);
    let top = (x >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Exact product over every parent configuration, observed or not.
fn exact_log_likelihood(d: &Dataset, j: usize, parents: &[usize]) -> f64 {
    let r = d.cardinality(j);
    let configs: usize = parents.iter().map(|&p| d.cardinality(p)).product();
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for cfg in 0..configs {
        let mut rest = cfg;
        let want: Vec<u32> = parents
            .iter()
            .map(|&p| {
                let v = rest % d.cardinality(p);
                rest /= d.cardinality(p);
                v as u32
            })
            .collect();
        let mut per_value = vec![0usize; r];
        for row in d.rows() {
            if parents.iter().zip(&want).all(|(&p, &v)| row[p] == v) {
                per_value[row[j] as usize] += 1;
            }
        }
        let n_pi: usize = per_value.iter().sum();
        num *= big_factorial(r - 1);
        for &k in &per_value {
            num *= big_factorial(k);
        }
        den *= big_factorial(n_pi + r - 1);
    }
    big_ln(&num) - big_ln(&den)
}

fn random_dataset(r: &mut impl Rng, cards: &[usize], m: usize) -> Dataset {
    let rows = (0..m)
        .map(|_| cards.iter().map(|&c| r.gen_range(0..c as u32)).collect())
        .collect();
    Dataset::from_rows(cards.to_vec(), rows).unwrap()
}

#[test]
fn likelihood_matches_big_integer_evaluation() {
    let mut r = rng(2024);
    for trial in 0..40 {
        let cards: Vec<usize> = (0..3).map(|_| r.gen_range(2..=4)).collect();
        let m = r.gen_range(1..=20);
        let d = random_dataset(&mut r, &cards, m);
        for j in 0..3 {
            for pa in subsets(full_mask(3) & !(1 << j)) {
                let parents: Vec<usize> = (0..3).filter(|k| pa & (1 << k) != 0).collect();
                let got = log_local_likelihood(&d, j, pa).unwrap();
                let want = exact_log_likelihood(&d, j, &parents);
                let rel = ((got - want) / want.abs().max(1e-300)).abs();
                assert!(rel < 1e-12 || (got - want).abs() < 1e-13, "trial {trial} j={j} pa={pa:#b}: {got} vs {want}");
                assert!(got <= 0.0);
            }
        }
    }
}

#[test]
fn likelihood_sums_to_one_over_child_columns() {
    for child_card in [2usize, 3] {
        for m in 1..=3usize {
            for parent_code in 0..(1usize << m) {
                for with_parent in [false, true] {
                    let mut total = 0.0;
                    for child_code in 0..child_card.pow(m as u32) {
                        let mut rest = child_code;
                        let rows: Vec<Vec<u32>> = (0..m)
                            .map(|k| {
                                let x = rest % child_card;
                                rest /= child_card;
                                vec![((parent_code >> k) & 1) as u32, x as u32]
                            })
                            .collect();
                        let d = Dataset::from_rows(vec![2, child_card], rows).unwrap();
                        let pa = if with_parent { 0b01 } else { 0 };
                        total += log_local_likelihood(&d, 1, pa).unwrap().exp();
                    }
                    assert!((total - 1.0).abs() < 1e-12, "r={child_card} M={m} parents={parent_code:#b}: {total}");
                }
            }
        }
    }
}

#[test]
fn single_binary_record() {
    let d = Dataset::from_rows(vec![2], vec![vec![0]]).unwrap();
    assert!((log_local_likelihood(&d, 0, 0).unwrap() - 0.5f64.ln()).abs() < 1e-15);
    let d = Dataset::from_rows(vec![1, 2], vec![vec![0, 1]; 7]).unwrap();
    assert_eq!(log_local_likelihood(&d, 0, 0b10).unwrap(), 0.0);
}

#[test]
fn count_marginals_cover_every_record() {
    let mut r = rng(3);
    let d = random_dataset(&mut r, &[2, 3, 2, 4], 37);
    for j in 0..4 {
        for pa in subsets(full_mask(4) & !(1 << j)) {
            assert_eq!(counts(&d, j, pa).unwrap().total(), 37);
        }
    }
}

#[test]
fn feature_tables_are_bounded_by_trivial_tables() {
    let mut r = rng(8);
    for _ in 0..10 {
        let d = random_dataset(&mut r, &[2, 2, 3], 25);
        let prior = PriorSpec::default();
        let full = build_score_table(&d, &prior, None, None).unwrap();
        let f = edge_feature(0, 2, 3).unwrap();
        let restricted = build_score_table(&d, &prior, Some(&f), None).unwrap();
        for (j, s, v) in full.entries() {
            assert!(v <= 1e-12, "h({j}|{s:#b}) = {v} above 1");
            assert!(restricted.get(j, s).unwrap() <= v + 1e-12);
            if j == 2 && s & 1 == 0 {
                assert_eq!(restricted.get(j, s).unwrap(), f64::NEG_INFINITY);
            }
        }
    }
}

#[test]
fn restricted_table_shapes() {
    let d = Dataset::from_rows(vec![2, 2, 2], vec![vec![0, 1, 0]]).unwrap();
    let prior = PriorSpec::default();
    assert_eq!(build_score_table(&d, &prior, None, None).unwrap().len(), 12);
    assert_eq!(build_score_table(&d, &prior, None, Some(1)).unwrap().len(), 9);
}
