#![allow(dead_code)]

use qbn_core::graphs::{Graph, Mask, Permutation};
use qbn_core::qprep::{AngleTable, QubitLayout};
use qbn_core::scoring::{Dataset, LocalScoreTable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Classical `(z₁, z₀)` for a circuit built from `angles`, summing every
/// permutation directly. Levels above `lmax` contribute `sin θ = 1`.
pub fn claim_expected(angles: &AngleTable, layout: &QubitLayout) -> (f64, f64) {
    let n = layout.n;
    let eps = layout.effective_epsilon();
    let mut sum = 0.0;
    for p in Permutation::all(n) {
        let mut pred: Mask = 0;
        let mut prod = 1.0;
        for &node in p.sigma() {
            prod *= angles.theta(node, pred).map_or(1.0, f64::sin);
            pred |= 1 << node;
        }
        sum += prod;
    }
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    (eps / 2f64.sqrt() * sum, eps * fact / 2f64.powi(n as i32 + 1).sqrt())
}

pub fn random_angles(rng: &mut ChaCha8Rng, n: usize, lmax: Option<usize>) -> AngleTable {
    AngleTable::from_fn(n, lmax, |_, _| rng.gen_range(0.0..std::f64::consts::FRAC_PI_2)).unwrap()
}

/// Random `ln h` table with values spread over several orders of magnitude.
pub fn random_table(rng: &mut ChaCha8Rng, n: usize, lmax: Option<usize>) -> LocalScoreTable {
    let mut t = LocalScoreTable::ones(n, lmax).unwrap();
    for (j, s, _) in t.entries() {
        t.set(j, s, rng.gen_range(-40.0..-1.0)).unwrap();
    }
    t
}

/// Forward sample `m` records from `g` with random conditional tables.
pub fn sample_dataset(rng: &mut ChaCha8Rng, g: &Graph, cards: &[usize], m: usize) -> Dataset {
    let n = g.n();
    let order = topological(g);
    // one categorical per node and parent configuration, drawn lazily
    let mut tables: Vec<std::collections::HashMap<Vec<u32>, Vec<f64>>> = vec![Default::default(); n];
    let mut rows = Vec::with_capacity(m);
    for _ in 0..m {
        let mut row = vec![0u32; n];
        for &j in &order {
            let key: Vec<u32> = (0..n).filter(|&k| g.parents(j) & (1 << k) != 0).map(|k| row[k]).collect();
            let probs = tables[j].entry(key).or_insert_with(|| {
                let w: Vec<f64> = (0..cards[j]).map(|_| rng.gen_range(0.05..1.0f64).powi(2)).collect();
                let total: f64 = w.iter().sum();
                w.into_iter().map(|x| x / total).collect()
            });
            let mut u: f64 = rng.gen();
            let mut x = cards[j] - 1;
            for (v, &p) in probs.iter().enumerate() {
                if u < p {
                    x = v;
                    break;
                }
                u -= p;
            }
            row[j] = x as u32;
        }
        rows.push(row);
    }
    Dataset::from_rows(cards.to_vec(), rows).unwrap()
}

fn topological(g: &Graph) -> Vec<usize> {
    let n = g.n();
    let mut done: Mask = 0;
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        for j in 0..n {
            if done & (1 << j) == 0 && g.parents(j) & !done == 0 {
                done |= 1 << j;
                out.push(j);
            }
        }
    }
    out
}

pub fn assert_close(a: f64, b: f64, tol: f64, what: &str) {
    assert!((a - b).abs() < tol, "{what}: {a} vs {b} (diff {})", (a - b).abs());
}
