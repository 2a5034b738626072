//! Gate-level construction of the state-preparation circuit for the ordered
//! permutation sum.
//!
//! Registers (qubit ids assigned in this order, qubit 0 least significant):
//!
//! * `alpha[0..n]`   one qubit per node; ends in `|1^n⟩` on the useful branch,
//! * `beta[ℓ][c]`    one-hot selector per kept level `ℓ`, one qubit per pair
//!                   `c ↔ (j, S)` with `|S| = ℓ`, `j ∉ S`,
//! * `gamma`, `mu0`  the two-hypothesis flag and its copy,
//! * `omega`         the target qubit, flipped to `|0⟩` only on the branch
//!                   `alpha = 1^n`, `beta = 0`.
//!
//! Each kept level is a select–apply–unselect block: a uniform one-hot
//! superposition over the level's pairs, one halfmoon gate per pair, and the
//! inverse preparation. Projected onto `beta_ℓ = 0` this applies
//! `(1/N₂(β;ℓ)) Σ_c A_c` to `alpha`, and `⟨1^n|·|0^n⟩` keeps only the
//! sequences of pairs that form a permutation with `S_ℓ` equal to the set of
//! earlier nodes.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{self, mask_of, members, Mask};
use crate::math::{binomial, factorial};
use crate::scoring::{normalize_lmax, LocalScoreTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Polarity {
    #[serde(rename = "P0")]
    Zero,
    #[serde(rename = "P1")]
    One,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Control {
    pub qubit: usize,
    pub polarity: Polarity,
}

impl Control {
    pub fn one(qubit: usize) -> Self {
        Self {
            qubit,
            polarity: Polarity::One,
        }
    }

    pub fn zero(qubit: usize) -> Self {
        Self {
            qubit,
            polarity: Polarity::Zero,
        }
    }
}

/// Circuit primitives. `RotY` with angle `θ` is `exp(-i σ_Y θ)`, i.e.
/// `|0⟩ ↦ cos θ |0⟩ + sin θ |1⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Gate {
    /// `|0…0⟩ ↦ N^{-1/2} Σ_c |e_c⟩` on `targets` (or its inverse).
    UnaryPrepare { targets: Vec<usize>, inverse: bool },
    RotY {
        target: usize,
        angle: f64,
        controls: Vec<Control>,
    },
    Hadamard { target: usize, controls: Vec<Control> },
    /// `RotY(angle)` when `gamma = 1`, `H` when `gamma = 0`, both under the
    /// selector and alpha controls.
    #[serde(rename_all = "camelCase")]
    Halfmoon {
        target: usize,
        angle: f64,
        selector: Control,
        alpha_controls: Vec<Control>,
        gamma: usize,
    },
    X { target: usize, controls: Vec<Control> },
    Cnot { control: usize, target: usize },
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::UnaryPrepare { targets, .. } => targets.clone(),
            Gate::RotY { target, controls, .. }
            | Gate::Hadamard { target, controls }
            | Gate::X { target, controls } => {
                std::iter::once(*target).chain(controls.iter().map(|c| c.qubit)).collect()
            }
            Gate::Halfmoon {
                target,
                selector,
                alpha_controls,
                gamma,
                ..
            } => std::iter::once(*target)
                .chain(std::iter::once(selector.qubit))
                .chain(alpha_controls.iter().map(|c| c.qubit))
                .chain(std::iter::once(*gamma))
                .collect(),
            Gate::Cnot { control, target } => vec![*control, *target],
        }
    }
}

/// Primitive sequence realizing [`Gate::UnaryPrepare`]: `X` on the first
/// qubit, then a controlled rotation plus CNOT that moves all but `1/√N` of
/// the excitation one qubit further down the register.
pub fn unary_prepare_gates(targets: &[usize], inverse: bool) -> Vec<Gate> {
    let big_n = targets.len();
    if big_n == 0 {
        return Vec::new();
    }
    let mut gates = vec![Gate::X {
        target: targets[0],
        controls: vec![],
    }];
    for k in 0..big_n - 1 {
        let angle = (1.0 / ((big_n - k) as f64).sqrt()).acos();
        gates.push(Gate::RotY {
            target: targets[k + 1],
            angle,
            controls: vec![Control::one(targets[k])],
        });
        gates.push(Gate::Cnot {
            control: targets[k + 1],
            target: targets[k],
        });
    }
    if inverse {
        gates.reverse();
        for g in &mut gates {
            if let Gate::RotY { angle, .. } = g {
                *angle = -*angle;
            }
        }
    }
    gates
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Selector {
    pub j: usize,
    #[serde(rename = "S")]
    pub s: Vec<usize>,
}

impl Selector {
    pub fn mask(&self) -> Mask {
        mask_of(self.s.iter().copied())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BetaLevel {
    pub level: usize,
    pub qubits: Vec<usize>,
    /// `selectors[c]` is the pair driven by `qubits[c]`.
    pub selectors: Vec<Selector>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct QubitLayout {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lmax: Option<usize>,
    pub alpha: Vec<usize>,
    pub beta_levels: Vec<BetaLevel>,
    pub gamma: usize,
    pub mu0: usize,
    pub omega: usize,
}

/// `N₂(β;ℓ) = n·C(n-1, ℓ)`.
pub fn n2_level(n: usize, level: usize) -> usize {
    n * binomial(n - 1, level)
}

/// `Σ_{ℓ ≤ lmax} N₂(β;ℓ)`; `n·2^{n-1}` without a bound.
pub fn n2_total(n: usize, lmax: Option<usize>) -> usize {
    let top = normalize_lmax(n, lmax).unwrap_or(n - 1);
    (0..=top).map(|l| n2_level(n, l)).sum()
}

impl QubitLayout {
    pub fn new(n: usize, lmax: Option<usize>) -> Result<Self> {
        if n == 0 || n > graphs::MAX_NODES {
            return Err(Error::InvalidArgument(format!("node count {n} outside 1..=64")));
        }
        if let Some(l) = lmax {
            if l >= n {
                return Err(Error::InvalidArgument(format!("lmax {l} must be below n = {n}")));
            }
        }
        let lmax = normalize_lmax(n, lmax);
        let top = lmax.unwrap_or(n - 1);
        let alpha: Vec<usize> = (0..n).collect();
        let mut next = n;
        let mut beta_levels = Vec::with_capacity(top + 1);
        for level in 0..=top {
            let mut selectors = Vec::with_capacity(n2_level(n, level));
            for j in 0..n {
                let others: Vec<usize> = (0..n).filter(|&k| k != j).collect();
                for s in graphs::combination_masks(&others, level)? {
                    selectors.push(Selector { j, s: members(s) });
                }
            }
            let qubits = (next..next + selectors.len()).collect();
            next += selectors.len();
            beta_levels.push(BetaLevel {
                level,
                qubits,
                selectors,
            });
        }
        Ok(Self {
            n,
            lmax,
            alpha,
            beta_levels,
            gamma: next,
            mu0: next + 1,
            omega: next + 2,
        })
    }

    pub fn total_qubits(&self) -> usize {
        self.omega + 1
    }

    pub fn top_level(&self) -> usize {
        self.lmax.unwrap_or(self.n - 1)
    }

    /// Levels above `lmax` folded into the completion gates.
    pub fn dropped_levels(&self) -> usize {
        self.n - 1 - self.top_level()
    }

    pub fn beta_qubit_count(&self) -> usize {
        self.beta_levels.iter().map(|l| l.qubits.len()).sum()
    }

    pub fn beta_qubits(&self) -> impl Iterator<Item = usize> + '_ {
        self.beta_levels.iter().flat_map(|l| l.qubits.iter().copied())
    }

    /// `1 / Π_{kept ℓ} N₂(β;ℓ)`.
    pub fn epsilon(&self) -> f64 {
        1.0 / self
            .beta_levels
            .iter()
            .map(|l| l.qubits.len() as f64)
            .product::<f64>()
    }

    /// Normalization of the two designated amplitudes:
    /// `z₀ = ε_eff · n! / √(2^{n+1})` with `ε_eff = ε / m!` for `m` dropped
    /// levels (so `ε_eff = ε` when at most one level is dropped).
    pub fn effective_epsilon(&self) -> f64 {
        self.epsilon() / factorial(self.dropped_levels()) as f64
    }

    fn alpha_mask(&self) -> usize {
        self.alpha.iter().fold(0, |m, &q| m | (1 << q))
    }

    /// Basis index of `|1^n⟩_α |x⟩_{μ₀} |0⟩_β |x⟩_γ |0⟩_ω`.
    pub fn claim_index(&self, x: bool) -> usize {
        let mut idx = self.alpha_mask();
        if x {
            idx |= (1 << self.gamma) | (1 << self.mu0);
        }
        idx
    }

    pub fn projector(&self) -> TargetProjector {
        TargetProjector {
            qubit: self.omega,
            polarity: Polarity::Zero,
        }
    }
}

/// `P_0(ω) ⊗ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetProjector {
    pub qubit: usize,
    pub polarity: Polarity,
}

impl TargetProjector {
    pub fn keeps(&self, index: usize) -> bool {
        let bit = (index >> self.qubit) & 1 == 1;
        match self.polarity {
            Polarity::Zero => !bit,
            Polarity::One => bit,
        }
    }
}

pub fn target_projector(layout: &QubitLayout) -> TargetProjector {
    layout.projector()
}

/// Log scale factors dividing `h(j|S)` by `d_j · c_ℓ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Scales {
    pub node_log: Vec<f64>,
    pub level_log: Vec<f64>,
}

impl Scales {
    pub fn unit(n: usize) -> Self {
        Self {
            node_log: vec![0.0; n],
            level_log: vec![0.0; n],
        }
    }

    /// `d_j = max_S h(j|S)`, then `c_ℓ = max_{|S|=ℓ} h(j|S)/d_j`; zero maxima
    /// give a unit scale.
    ///
    /// Under an in-degree bound a node may sit on a dropped level, where its
    /// factor is a fixed 1 rather than `h/d_j`, so only level scales are used.
    pub fn from_table(t: &LocalScoreTable) -> Self {
        let n = t.n();
        let entries = t.entries();
        let finite_or_zero = |v: f64| if v.is_finite() { v } else { 0.0 };
        let mut node_log = vec![f64::NEG_INFINITY; n];
        if t.lmax().is_none() {
            for &(j, _, v) in &entries {
                node_log[j] = node_log[j].max(v);
            }
        }
        let node_log: Vec<f64> = node_log.into_iter().map(finite_or_zero).collect();
        let mut level_log = vec![f64::NEG_INFINITY; n];
        for &(j, s, v) in &entries {
            let l = s.count_ones() as usize;
            level_log[l] = level_log[l].max(v - node_log[j]);
        }
        Self {
            node_log,
            level_log: level_log.into_iter().map(finite_or_zero).collect(),
        }
    }

    /// `ln Π_j d_j + ln Π_ℓ c_ℓ`.
    pub fn total_log(&self) -> f64 {
        self.node_log.iter().sum::<f64>() + self.level_log.iter().sum::<f64>()
    }
}

/// `θ_{j|S}` with `sin θ_{j|S} = h(j|S) / (d_j c_ℓ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleTable {
    n: usize,
    lmax: Option<usize>,
    theta: Vec<f64>,
    scales: Scales,
}

impl AngleTable {
    /// Angles given directly (tests and hand-built circuits); unit scales.
    pub fn from_fn(n: usize, lmax: Option<usize>, mut f: impl FnMut(usize, Mask) -> f64) -> Result<Self> {
        let shape = LocalScoreTable::ones(n, lmax)?;
        let mut theta = vec![f64::NAN; n << n];
        for (j, s, _) in shape.entries() {
            let a = f(j, s);
            if !(0.0..=FRAC_PI_2).contains(&a) {
                return Err(Error::InvalidArgument(format!("angle {a} outside [0, π/2]")));
            }
            theta[(j << n) | s as usize] = a;
        }
        Ok(Self {
            n,
            lmax: shape.lmax(),
            theta,
            scales: Scales::unit(n),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lmax(&self) -> Option<usize> {
        self.lmax
    }

    pub fn scales(&self) -> &Scales {
        &self.scales
    }

    pub fn theta(&self, j: usize, s: Mask) -> Option<f64> {
        if j >= self.n || s >> self.n != 0 {
            return None;
        }
        let v = self.theta[(j << self.n) | s as usize];
        (!v.is_nan()).then_some(v)
    }
}

/// Angles with scales taken from the table itself.
pub fn angles_from_scores(t: &LocalScoreTable) -> AngleTable {
    angles_with_scales(t, &Scales::from_table(t)).expect("scales built for this table")
}

/// Angles under externally fixed scales (the numerator run reuses the
/// denominator's). Scaled values above 1 by rounding are clamped.
pub fn angles_with_scales(t: &LocalScoreTable, scales: &Scales) -> Result<AngleTable> {
    let n = t.n();
    if scales.node_log.len() != n || scales.level_log.len() != n {
        return Err(Error::Dimension("scale vectors must have one entry per node/level".into()));
    }
    let mut theta = vec![f64::NAN; n << n];
    for (j, s, v) in t.entries() {
        let scaled = v - scales.node_log[j] - scales.level_log[s.count_ones() as usize];
        let h = if scaled == f64::NEG_INFINITY { 0.0 } else { scaled.exp() };
        if h > 1.0 + 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "scaled h({j}|{s:#b}) = {h} exceeds 1; scales do not dominate the table"
            )));
        }
        theta[(j << n) | s as usize] = h.min(1.0).asin();
    }
    Ok(AngleTable {
        n,
        lmax: t.lmax(),
        theta,
        scales: scales.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Circuit {
    qubit_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    layout: Option<QubitLayout>,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(qubit_count: usize) -> Self {
        Self {
            qubit_count,
            layout: None,
            gates: Vec::new(),
        }
    }

    pub fn with_layout(layout: QubitLayout) -> Self {
        Self {
            qubit_count: layout.total_qubits(),
            layout: Some(layout),
            gates: Vec::new(),
        }
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn layout(&self) -> Option<&QubitLayout> {
        self.layout.as_ref()
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        self.check_gate(&gate)?;
        self.gates.push(gate);
        Ok(())
    }

    fn check_gate(&self, gate: &Gate) -> Result<()> {
        let qs = gate.qubits();
        let mut seen = 0u128;
        for &q in &qs {
            if q >= self.qubit_count {
                return Err(Error::InvalidArgument(format!(
                    "gate {gate:?} touches qubit {q} of {}",
                    self.qubit_count
                )));
            }
            if q < 128 && seen & (1 << q) != 0 {
                return Err(Error::InvalidArgument(format!("gate {gate:?} repeats qubit {q}")));
            }
            if q < 128 {
                seen |= 1 << q;
            }
        }
        Ok(())
    }

    /// Re-checks every gate, e.g. after deserialization.
    pub fn validate(&self) -> Result<()> {
        self.gates.iter().try_for_each(|g| self.check_gate(g))
    }
}

/// Emits the state-preparation circuit for the given angles.
pub fn build_state_prep(layout: &QubitLayout, angles: &AngleTable) -> Result<Circuit> {
    if angles.n() != layout.n || angles.lmax() != layout.lmax {
        return Err(Error::LayoutMismatch(format!(
            "layout (n={}, lmax={:?}) vs angles (n={}, lmax={:?})",
            layout.n,
            layout.lmax,
            angles.n(),
            angles.lmax()
        )));
    }
    let n = layout.n;
    let top = layout.top_level();
    let mut c = Circuit::with_layout(layout.clone());

    c.push(Gate::X {
        target: layout.omega,
        controls: vec![],
    })?;
    c.push(Gate::Hadamard {
        target: layout.gamma,
        controls: vec![],
    })?;
    c.push(Gate::Cnot {
        control: layout.gamma,
        target: layout.mu0,
    })?;

    for level in &layout.beta_levels {
        c.push(Gate::UnaryPrepare {
            targets: level.qubits.clone(),
            inverse: false,
        })?;
        for (&q, sel) in level.qubits.iter().zip(&level.selectors) {
            let s = sel.mask();
            let angle = angles
                .theta(sel.j, s)
                .ok_or_else(|| Error::LayoutMismatch(format!("no angle for ({}, {:?})", sel.j, sel.s)))?;
            c.push(Gate::Halfmoon {
                target: layout.alpha[sel.j],
                angle,
                selector: Control::one(q),
                alpha_controls: sel.s.iter().map(|&k| Control::one(layout.alpha[k])).collect(),
                gamma: layout.gamma,
            })?;
            if level.level == top && top + 1 < n {
                // levels above lmax: h = 1, remaining nodes follow in any order
                let done = s | (1 << sel.j);
                for r in (0..n).filter(|r| done & (1 << r) == 0) {
                    c.push(Gate::Halfmoon {
                        target: layout.alpha[r],
                        angle: FRAC_PI_2,
                        selector: Control::one(q),
                        alpha_controls: vec![],
                        gamma: layout.gamma,
                    })?;
                }
            }
        }
        c.push(Gate::UnaryPrepare {
            targets: level.qubits.clone(),
            inverse: true,
        })?;
    }

    let mut controls: Vec<Control> = layout.alpha.iter().map(|&q| Control::one(q)).collect();
    controls.extend(layout.beta_qubits().map(Control::zero));
    c.push(Gate::X {
        target: layout.omega,
        controls,
    })?;
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scoring::LocalScoreTable;

    #[test]
    fn layout_counts() {
        let l = QubitLayout::new(3, None).unwrap();
        assert_eq!(l.total_qubits(), 18);
        let sizes: Vec<usize> = l.beta_levels.iter().map(|b| b.qubits.len()).collect();
        assert_eq!(sizes, vec![3, 6, 3]);
        assert!((l.epsilon() - 1.0 / 54.0).abs() < 1e-15);
        let r = QubitLayout::new(3, Some(1)).unwrap();
        assert_eq!(r.total_qubits(), 15);
        assert_eq!(r.beta_levels.len(), 2);
        assert!((r.epsilon() - 1.0 / 18.0).abs() < 1e-15);
        assert_eq!(r.effective_epsilon(), r.epsilon());
        assert!(QubitLayout::new(3, Some(3)).is_err());
        // lmax = n - 1 restricts nothing
        assert_eq!(QubitLayout::new(3, Some(2)).unwrap(), l);
    }

    #[test]
    fn selector_pairing_order() {
        let l = QubitLayout::new(3, None).unwrap();
        let lvl1: Vec<(usize, Vec<usize>)> =
            l.beta_levels[1].selectors.iter().map(|s| (s.j, s.s.clone())).collect();
        assert_eq!(
            lvl1,
            vec![(0, vec![1]), (0, vec![2]), (1, vec![0]), (1, vec![2]), (2, vec![0]), (2, vec![1])]
        );
        assert_eq!(l.beta_levels[2].selectors[0], Selector { j: 0, s: vec![1, 2] });
    }

    #[test]
    fn n2_totals() {
        for n in 1..=6 {
            assert_eq!(n2_total(n, None), n << (n - 1));
        }
        assert_eq!(n2_total(5, Some(1)), 5 * 5);
    }

    #[test]
    fn angles_all_equal_level() {
        let mut t = LocalScoreTable::ones(3, None).unwrap();
        for (j, s, _) in t.entries() {
            let v = match s.count_ones() {
                0 => -3.0,
                1 => -5.0,
                _ => -1.0,
            };
            t.set(j, s, v).unwrap();
        }
        let a = angles_from_scores(&t);
        for (j, s, _) in t.entries() {
            assert!((a.theta(j, s).unwrap() - FRAC_PI_2).abs() < 1e-7, "({j},{s})");
        }
    }

    #[test]
    fn zero_entries_give_zero_angle() {
        let mut t = LocalScoreTable::ones(3, None).unwrap();
        t.set(1, 0b100, f64::NEG_INFINITY).unwrap();
        let a = angles_from_scores(&t);
        assert_eq!(a.theta(1, 0b100), Some(0.0));
        let all_zero = {
            let mut z = LocalScoreTable::ones(2, None).unwrap();
            for (j, s, _) in z.entries() {
                z.set(j, s, f64::NEG_INFINITY).unwrap();
            }
            z
        };
        let a = angles_from_scores(&all_zero);
        assert_eq!(a.theta(0, 0), Some(0.0));
        assert_eq!(a.scales().total_log(), 0.0);
    }

    #[test]
    fn restricted_circuit_shape() {
        let layout = QubitLayout::new(3, Some(1)).unwrap();
        let angles = AngleTable::from_fn(3, Some(1), |_, _| 0.3).unwrap();
        let c = build_state_prep(&layout, &angles).unwrap();
        assert_eq!(c.qubit_count(), 15);
        let two_parent = c.gates().iter().any(|g| {
            matches!(g, Gate::Halfmoon { alpha_controls, .. } if alpha_controls.len() == 2)
        });
        assert!(!two_parent);
    }

    #[test]
    fn selector_gate_counts_per_level() {
        let layout = QubitLayout::new(3, None).unwrap();
        let angles = AngleTable::from_fn(3, None, |_, _| 0.3).unwrap();
        let c = build_state_prep(&layout, &angles).unwrap();
        let mut per_level = [0usize; 3];
        for g in c.gates() {
            if let Gate::Halfmoon { alpha_controls, .. } = g {
                per_level[alpha_controls.len()] += 1;
            }
        }
        assert_eq!(per_level, [3, 6, 3]);
    }

    #[test]
    fn mismatched_angles_rejected() {
        let layout = QubitLayout::new(3, None).unwrap();
        let angles = AngleTable::from_fn(3, Some(1), |_, _| 0.3).unwrap();
        assert!(matches!(build_state_prep(&layout, &angles), Err(Error::LayoutMismatch(_))));
    }

    #[test]
    fn circuit_rejects_bad_gates() {
        let mut c = Circuit::new(2);
        assert!(c.push(Gate::Cnot { control: 0, target: 0 }).is_err());
        assert!(c
            .push(Gate::X {
                target: 2,
                controls: vec![]
            })
            .is_err());
        assert!(c.push(Gate::Cnot { control: 0, target: 1 }).is_ok());
    }

    #[test]
    fn circuit_json_round_trip() {
        let layout = QubitLayout::new(2, None).unwrap();
        let angles = AngleTable::from_fn(2, None, |j, _| 0.1 + j as f64).unwrap();
        let c = build_state_prep(&layout, &angles).unwrap();
        let text = crate::json::to_string(&c).unwrap();
        assert!(text.contains("\"kind\": \"halfmoon\""));
        assert!(text.contains("\"polarity\": \"P1\""));
        let back: Circuit = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn unary_inverse_reverses() {
        let f = unary_prepare_gates(&[3, 4, 5], false);
        let i = unary_prepare_gates(&[3, 4, 5], true);
        assert_eq!(f.len(), i.len());
        assert_eq!(f.first(), i.last());
    }
}
