mod common;

use common::{claim_expected, random_angles, rng};
use qbn_core::qprep::{build_state_prep, AngleTable, QubitLayout};
use qbn_core::qsim::{extract_claim_amplitudes, StateVector};
use std::f64::consts::FRAC_PI_2;

fn run(layout: &QubitLayout, angles: &AngleTable) -> (f64, f64, f64) {
    let c = build_state_prep(layout, angles).unwrap();
    let s = StateVector::run(&c).unwrap();
    let pair = extract_claim_amplitudes(&s, layout).unwrap();
    assert!(pair.z1.im.abs() < 1e-15 && pair.z0.im.abs() < 1e-15);
    (pair.z1.re, pair.z0.re, s.norm_sqr())
}

#[test]
fn all_right_angles_n3() {
    let layout = QubitLayout::new(3, None).unwrap();
    let angles = AngleTable::from_fn(3, None, |_, _| FRAC_PI_2).unwrap();
    let (z1, z0, norm) = run(&layout, &angles);
    assert!((z1 - 6.0 / (54.0 * 2f64.sqrt())).abs() < 1e-12, "{z1}");
    assert!((z0 - 1.0 / 36.0).abs() < 1e-12, "{z0}");
    assert!((norm - 1.0).abs() < 1e-10);
}

#[test]
fn zero_angles_kill_z1_only() {
    let layout = QubitLayout::new(3, None).unwrap();
    let angles = AngleTable::from_fn(3, None, |_, _| 0.0).unwrap();
    let (z1, z0, _) = run(&layout, &angles);
    assert_eq!(z1, 0.0);
    assert!((z0 - 1.0 / 36.0).abs() < 1e-12);
}

#[test]
fn random_angles_match_permutation_sum() {
    let mut r = rng(11);
    for (n, lmax) in [(2, None), (3, None), (3, Some(1)), (3, Some(0)), (4, Some(0))] {
        let layout = QubitLayout::new(n, lmax).unwrap();
        for _ in 0..3 {
            let angles = random_angles(&mut r, n, lmax);
            let (z1, z0, _) = run(&layout, &angles);
            let (e1, e0) = claim_expected(&angles, &layout);
            assert!((z1 - e1).abs() < 1e-12, "n={n} lmax={lmax:?}: {z1} vs {e1}");
            assert!((z0 - e0).abs() < 1e-12, "n={n} lmax={lmax:?}: {z0} vs {e0}");
        }
    }
}

#[test]
fn four_nodes_single_parent_bound() {
    let mut r = rng(5);
    let layout = QubitLayout::new(4, Some(1)).unwrap();
    assert_eq!(layout.total_qubits(), 23);
    let angles = random_angles(&mut r, 4, Some(1));
    let (z1, z0, _) = run(&layout, &angles);
    let (e1, e0) = claim_expected(&angles, &layout);
    assert!((z1 - e1).abs() < 1e-12, "{z1} vs {e1}");
    assert!((z0 - e0).abs() < 1e-12, "{z0} vs {e0}");
}
