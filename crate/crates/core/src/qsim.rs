//! Dense state-vector simulation.
//!
//! Basis index bit `q` is the value of qubit `q` (little-endian). Controlled
//! gates only visit indices whose control bits already match, so a gate with
//! `c` controls touches `2^{N-c-1}` amplitude pairs.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qprep::{unary_prepare_gates, Circuit, Control, Gate, Polarity, QubitLayout, TargetProjector};

pub const DEFAULT_MAX_QUBITS: usize = 26;
/// Largest tolerated amplitude in the `ω = 0` subspace outside the two claim states.
pub const RESIDUAL_TOL: f64 = 1e-10;

type Mat2 = [[Complex64; 2]; 2];

const PAR_MIN_PAIRS: usize = 1 << 16;
const PAR_BLOCK: usize = 1 << 12;

#[derive(Clone, Copy)]
struct SharedAmps(*mut Complex64);

// SAFETY: only used to hand out disjoint index sets to worker threads.
unsafe impl Send for SharedAmps {}
unsafe impl Sync for SharedAmps {}

impl SharedAmps {
    // by-value accessor so closures capture the wrapper, not the raw field
    fn get(self) -> *mut Complex64 {
        self.0
    }
}

/// Scatters the low bits of `k` onto the set bits of `mask`.
fn deposit(mut k: usize, mask: usize) -> usize {
    let mut out = 0;
    let mut m = mask;
    while m != 0 && k != 0 {
        let low = m & m.wrapping_neg();
        if k & 1 == 1 {
            out |= low;
        }
        k >>= 1;
        m ^= low;
    }
    out
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn rot_y(angle: f64) -> Mat2 {
    let (s, c) = angle.sin_cos();
    [
        [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
        [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
    ]
}

fn hadamard() -> Mat2 {
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    [[h, h], [h, -h]]
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩` on `qubits` qubits, refused above `limit`.
    pub fn zero_with_limit(qubits: usize, limit: usize) -> Result<Self> {
        if qubits > limit || qubits >= usize::BITS as usize - 1 {
            return Err(Error::SizeBound {
                what: "qubits",
                value: qubits,
                limit,
            });
        }
        let mut amps = vec![ZERO; 1 << qubits];
        amps[0] = ONE;
        Ok(Self { qubits, amps })
    }

    pub fn zero(qubits: usize) -> Result<Self> {
        Self::zero_with_limit(qubits, DEFAULT_MAX_QUBITS)
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        if !amps.len().is_power_of_two() {
            return Err(Error::Dimension(format!("{} amplitudes is not a power of two", amps.len())));
        }
        Ok(Self {
            qubits: amps.len().trailing_zeros() as usize,
            amps,
        })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amps[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.qubits != other.qubits {
            return Err(Error::Dimension("states of different size".into()));
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    fn control_bits(&self, controls: &[Control]) -> Result<(usize, usize)> {
        let mut mask = 0;
        let mut value = 0;
        for c in controls {
            self.check_qubit(c.qubit)?;
            mask |= 1 << c.qubit;
            if c.polarity == Polarity::One {
                value |= 1 << c.qubit;
            }
        }
        Ok((mask, value))
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.qubits {
            return Err(Error::InvalidArgument(format!("qubit {q} outside a {}-qubit state", self.qubits)));
        }
        Ok(())
    }

    /// Calls `f(a[i0], a[i1])` for every pair differing in `target` whose
    /// control bits match. Large gates are split into blocks of pairs that
    /// run in parallel; blocks touch disjoint indices.
    fn for_each_pair(
        &mut self,
        target: usize,
        ctrl_mask: usize,
        ctrl_value: usize,
        f: impl Fn(&mut Complex64, &mut Complex64) + Sync,
    ) {
        let t = 1usize << target;
        let full = self.amps.len() - 1;
        let free = full & !(ctrl_mask | t);
        let pairs = 1usize << free.count_ones();
        let base = SharedAmps(self.amps.as_mut_ptr());
        let run_block = |start: usize, count: usize| {
            let mut x = deposit(start, free);
            for _ in 0..count {
                let i0 = x | ctrl_value;
                // SAFETY: i0 != i0|t, both below len, and no other block
                // visits either index.
                unsafe { f(&mut *base.get().add(i0), &mut *base.get().add(i0 | t)) };
                x = x.wrapping_sub(free) & free;
            }
        };
        if pairs < PAR_MIN_PAIRS {
            run_block(0, pairs);
        } else {
            (0..pairs / PAR_BLOCK)
                .into_par_iter()
                .for_each(|b| run_block(b * PAR_BLOCK, PAR_BLOCK));
        }
    }

    fn apply_matrix(&mut self, target: usize, m: &Mat2, controls: &[Control]) -> Result<()> {
        self.check_qubit(target)?;
        let (mask, value) = self.control_bits(controls)?;
        if mask & (1 << target) != 0 {
            return Err(Error::InvalidArgument(format!("qubit {target} is both target and control")));
        }
        self.for_each_pair(target, mask, value, |a0, a1| {
            let (x0, x1) = (*a0, *a1);
            *a0 = m[0][0] * x0 + m[0][1] * x1;
            *a1 = m[1][0] * x0 + m[1][1] * x1;
        });
        Ok(())
    }

    fn apply_x(&mut self, target: usize, controls: &[Control]) -> Result<()> {
        self.check_qubit(target)?;
        let (mask, value) = self.control_bits(controls)?;
        if mask & (1 << target) != 0 {
            return Err(Error::InvalidArgument(format!("qubit {target} is both target and control")));
        }
        self.for_each_pair(target, mask, value, std::mem::swap);
        Ok(())
    }

    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        match gate {
            Gate::UnaryPrepare { targets, inverse } => {
                for g in unary_prepare_gates(targets, *inverse) {
                    self.apply(&g)?;
                }
                Ok(())
            }
            Gate::RotY { target, angle, controls } => self.apply_matrix(*target, &rot_y(*angle), controls),
            Gate::Hadamard { target, controls } => self.apply_matrix(*target, &hadamard(), controls),
            Gate::Halfmoon {
                target,
                angle,
                selector,
                alpha_controls,
                gamma,
            } => {
                let mut controls = Vec::with_capacity(alpha_controls.len() + 2);
                controls.push(*selector);
                controls.extend_from_slice(alpha_controls);
                controls.push(Control::one(*gamma));
                self.apply_matrix(*target, &rot_y(*angle), &controls)?;
                *controls.last_mut().expect("gamma control") = Control::zero(*gamma);
                self.apply_matrix(*target, &hadamard(), &controls)
            }
            Gate::X { target, controls } => self.apply_x(*target, controls),
            Gate::Cnot { control, target } => self.apply_x(*target, &[Control::one(*control)]),
        }
    }

    /// Runs `circuit` from `|0…0⟩`.
    pub fn run(circuit: &Circuit) -> Result<Self> {
        Self::run_with_limit(circuit, DEFAULT_MAX_QUBITS)
    }

    pub fn run_with_limit(circuit: &Circuit, limit: usize) -> Result<Self> {
        let mut s = Self::zero_with_limit(circuit.qubit_count(), limit)?;
        for g in circuit.gates() {
            s.apply(g)?;
        }
        Ok(s)
    }

    /// Interleaved `(re, im)` little-endian `f64` pairs.
    pub fn to_le_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.amps.len() * 16);
        for a in &self.amps {
            out.extend_from_slice(&a.re.to_le_bytes());
            out.extend_from_slice(&a.im.to_le_bytes());
        }
        out
    }

    pub fn from_le_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() % 16 != 0 {
            return Err(Error::Dimension("state dump length is not a multiple of 16".into()));
        }
        let amps = bytes
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
                let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
                Complex64::new(re, im)
            })
            .collect();
        Self::from_amplitudes(amps)
    }

    pub fn dump_header(&self) -> DumpHeader {
        DumpHeader {
            qubit_count: self.qubits,
            amplitudes: self.amps.len(),
            encoding: "complex128-le".into(),
            bit_order: "little-endian (qubit 0 is the least significant index bit)".into(),
            norm_sqr: self.norm_sqr(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DumpHeader {
    pub qubit_count: usize,
    pub amplitudes: usize,
    pub encoding: String,
    pub bit_order: String,
    pub norm_sqr: f64,
}

impl TargetProjector {
    /// `P|ψ⟩`.
    pub fn apply(&self, s: &StateVector) -> StateVector {
        let amps = s
            .amps
            .iter()
            .enumerate()
            .map(|(i, &a)| if self.keeps(i) { a } else { ZERO })
            .collect();
        StateVector { qubits: s.qubits, amps }
    }

    /// `⟨ψ|P|ψ⟩`.
    pub fn weight(&self, s: &StateVector) -> f64 {
        s.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| self.keeps(*i))
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }
}

/// `z₁` and `z₀` read off the prepared state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudePair {
    pub z1: Complex64,
    pub z0: Complex64,
}

impl AmplitudePair {
    pub fn ratio(&self) -> f64 {
        self.z1.norm() / self.z0.norm()
    }
}

/// Reads the two claim amplitudes and checks that nothing else survives the
/// projector.
pub fn extract_claim_amplitudes(s: &StateVector, layout: &QubitLayout) -> Result<AmplitudePair> {
    if s.qubits() != layout.total_qubits() {
        return Err(Error::LayoutMismatch(format!(
            "state has {} qubits, layout {}",
            s.qubits(),
            layout.total_qubits()
        )));
    }
    let i1 = layout.claim_index(true);
    let i0 = layout.claim_index(false);
    let proj = layout.projector();
    for (i, a) in s.amplitudes().iter().enumerate() {
        if i != i0 && i != i1 && proj.keeps(i) && a.norm() >= RESIDUAL_TOL {
            return Err(Error::ResidualAmplitude {
                index: i,
                amplitude: a.norm(),
            });
        }
    }
    Ok(AmplitudePair {
        z1: s.amplitude(i1),
        z0: s.amplitude(i0),
    })
}

/// `round(π / (4 asin √p) - 1/2)` Grover iterations.
pub fn optimal_iterations(p: f64) -> Result<usize> {
    if !(p > 0.0 && p <= 1.0 + 1e-12) {
        return Err(Error::NoTarget);
    }
    let theta = p.min(1.0).sqrt().asin();
    Ok((std::f64::consts::PI / (4.0 * theta) - 0.5).round().max(0.0) as usize)
}

/// `(2|s⟩⟨s| - 1)(1 - 2P)` applied `iterations` times to `|s⟩`.
pub fn amplify(s: &StateVector, target: &TargetProjector, iterations: usize) -> Result<StateVector> {
    let p = target.weight(s);
    if p <= 0.0 {
        return Err(Error::NoTarget);
    }
    let mut psi = s.clone();
    if p >= 1.0 - 1e-15 {
        return Ok(psi);
    }
    for _ in 0..iterations {
        for (i, a) in psi.amps.iter_mut().enumerate() {
            if target.keeps(i) {
                *a = -*a;
            }
        }
        let overlap = s.inner(&psi)?;
        for (a, &b) in psi.amps.iter_mut().zip(&s.amps) {
            *a = 2.0 * overlap * b - *a;
        }
    }
    Ok(psi)
}

/// Marginal distribution over `qubits`; outcome bit `k` is `qubits[k]`.
pub fn marginal(s: &StateVector, qubits: &[usize]) -> Result<Vec<f64>> {
    if qubits.is_empty() || qubits.len() > 20 {
        return Err(Error::InvalidArgument(format!(
            "can sample 1..=20 qubits, got {}",
            qubits.len()
        )));
    }
    for &q in qubits {
        s.check_qubit(q)?;
    }
    let mut probs = vec![0.0; 1 << qubits.len()];
    for (i, a) in s.amps.iter().enumerate() {
        let mut o = 0;
        for (k, &q) in qubits.iter().enumerate() {
            o |= ((i >> q) & 1) << k;
        }
        probs[o] += a.norm_sqr();
    }
    Ok(probs)
}

/// Shot counts per outcome index (see [`marginal`]).
pub fn sample_counts(s: &StateVector, qubits: &[usize], shots: u64, seed: u64) -> Result<Vec<u64>> {
    let probs = marginal(s, qubits)?;
    let dist = WeightedIndex::new(&probs).map_err(|e| Error::Degenerate(format!("sampling: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; probs.len()];
    for _ in 0..shots {
        counts[dist.sample(&mut rng)] += 1;
    }
    Ok(counts)
}

/// Histogram keyed by bitstrings whose `k`-th character is `qubits[k]`.
pub fn sample(s: &StateVector, qubits: &[usize], shots: u64, seed: u64) -> Result<BTreeMap<String, u64>> {
    let counts = sample_counts(s, qubits, shots, seed)?;
    Ok(counts
        .into_iter()
        .enumerate()
        .filter(|&(_, c)| c > 0)
        .map(|(o, c)| {
            let key = (0..qubits.len()).map(|k| if (o >> k) & 1 == 1 { '1' } else { '0' }).collect();
            (key, c)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qprep::Circuit;

    #[test]
    fn unary_prepare_is_uniform_one_hot() {
        for big_n in 1..=6 {
            let targets: Vec<usize> = (0..big_n).collect();
            let mut s = StateVector::zero(big_n).unwrap();
            s.apply(&Gate::UnaryPrepare { targets: targets.clone(), inverse: false }).unwrap();
            for i in 0..(1usize << big_n) {
                let want = if i.count_ones() == 1 { 1.0 / (big_n as f64).sqrt() } else { 0.0 };
                assert!((s.amplitude(i).re - want).abs() < 1e-14, "N={big_n} i={i}");
            }
            s.apply(&Gate::UnaryPrepare { targets, inverse: true }).unwrap();
            assert!((s.amplitude(0).re - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn controlled_rotation_respects_polarity() {
        let mut s = StateVector::zero(2).unwrap();
        s.apply(&Gate::RotY {
            target: 1,
            angle: 0.4,
            controls: vec![Control::zero(0)],
        })
        .unwrap();
        assert!((s.amplitude(0b10).re - 0.4f64.sin()).abs() < 1e-15);
        let mut s = StateVector::zero(2).unwrap();
        s.apply(&Gate::RotY {
            target: 1,
            angle: 0.4,
            controls: vec![Control::one(0)],
        })
        .unwrap();
        assert_eq!(s.amplitude(0), ONE);
    }

    #[test]
    fn optimal_iteration_counts() {
        assert_eq!(optimal_iterations(1.0).unwrap(), 0);
        assert_eq!(optimal_iterations(0.25).unwrap(), 1);
        assert!(optimal_iterations(1e-4).unwrap() > 70);
        assert!(matches!(optimal_iterations(0.0), Err(Error::NoTarget)));
    }

    #[test]
    fn amplify_zero_weight_is_error() {
        let s = StateVector::zero(2).unwrap();
        let proj = TargetProjector {
            qubit: 0,
            polarity: Polarity::One,
        };
        assert!(matches!(amplify(&s, &proj, 1), Err(Error::NoTarget)));
        let proj = TargetProjector {
            qubit: 0,
            polarity: Polarity::Zero,
        };
        assert_eq!(amplify(&s, &proj, 3).unwrap(), s);
    }

    #[test]
    fn sampling_is_reproducible() {
        let mut c = Circuit::new(2);
        c.push(Gate::Hadamard { target: 0, controls: vec![] }).unwrap();
        c.push(Gate::Cnot { control: 0, target: 1 }).unwrap();
        let s = StateVector::run(&c).unwrap();
        let a = sample(&s, &[0, 1], 1000, 7).unwrap();
        let b = sample(&s, &[0, 1], 1000, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.keys().cloned().collect::<Vec<_>>(), vec!["00".to_string(), "11".to_string()]);
        assert_eq!(a.values().sum::<u64>(), 1000);
    }

    #[test]
    fn dump_round_trip() {
        let mut s = StateVector::zero(3).unwrap();
        s.apply(&Gate::RotY { target: 2, angle: 1.1, controls: vec![] }).unwrap();
        let back = StateVector::from_le_bytes(&s.to_le_bytes()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn parallel_kernel_on_large_register() {
        // 20 qubits puts gates with at most three controls on the parallel path
        let mut a = StateVector::zero(20).unwrap();
        let gates = [
            Gate::Hadamard { target: 3, controls: vec![] },
            Gate::RotY { target: 17, angle: 0.3, controls: vec![Control::one(3)] },
            Gate::Cnot { control: 17, target: 0 },
            Gate::RotY { target: 19, angle: 1.2, controls: vec![Control::zero(0)] },
        ];
        for g in &gates {
            a.apply(g).unwrap();
        }
        assert!((a.norm_sqr() - 1.0).abs() < 1e-12);
        let h = 0.5f64.sqrt();
        let expect = [
            ((1 << 3) | (1 << 17) | 1, h * 0.3f64.sin()),
            (1 << 3, h * 0.3f64.cos() * 1.2f64.cos()),
            ((1 << 3) | (1 << 19), h * 0.3f64.cos() * 1.2f64.sin()),
            (1 << 19, h * 1.2f64.sin()),
            (0, h * 1.2f64.cos()),
        ];
        for (i, want) in expect {
            assert!((a.amplitude(i).re - want).abs() < 1e-14, "index {i}");
        }
    }

    #[test]
    fn deposit_scatters_bits() {
        assert_eq!(deposit(0b11, 0b1010), 0b1010);
        assert_eq!(deposit(0b01, 0b1010), 0b0010);
        assert_eq!(deposit(0b10, 0b1100), 0b1000);
    }

    #[test]
    fn limit_enforced() {
        assert!(matches!(StateVector::zero_with_limit(10, 8), Err(Error::SizeBound { .. })));
    }
}
