//! Feature posteriors from simulated circuit runs.
//!
//! Two circuits are prepared, one from the feature-restricted table and one
//! from the unrestricted table, both with the denominator's scale factors so
//! that the scales cancel in the ratio. Each run yields `|z₁/z₀|`, from which
//!
//! ```text
//! ln Σ = ln|z₁/z₀| + ln n! - (n/2) ln 2 + Σ_ℓ ln c_ℓ + Σ_j ln d_j
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::ModularFeatureSet;
use crate::math::ln_factorial;
use crate::oracle;
use crate::qprep::{angles_with_scales, build_state_prep, Circuit, QubitLayout, Scales};
use crate::qsim::{self, AmplitudePair, StateVector};
use crate::scoring::{build_score_table, Dataset, LocalScoreTable, PriorSpec};

const WILSON_Z: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum Mode {
    ExactAmplitude,
    Sampled { shots: u64, seed: u64 },
}

/// Sum recovered from a claim amplitude pair. `-inf` when `z₁ = 0`.
pub fn recover_sum(pair: &AmplitudePair, n: usize, scales: &Scales) -> Result<f64> {
    recover_from_ratio(pair.z1.norm() / checked_z0(pair)?, n, scales)
}

fn checked_z0(pair: &AmplitudePair) -> Result<f64> {
    let z0 = pair.z0.norm();
    if z0 == 0.0 {
        return Err(Error::Degenerate("z0 vanished".into()));
    }
    Ok(z0)
}

fn recover_from_ratio(ratio: f64, n: usize, scales: &Scales) -> Result<f64> {
    if scales.node_log.len() != n || scales.level_log.len() != n {
        return Err(Error::Dimension("scale vectors must have n entries".into()));
    }
    Ok(ratio.ln() + ln_factorial(n) - 0.5 * n as f64 * std::f64::consts::LN_2 + scales.total_log())
}

/// One circuit preparation (and optional sampling) for a single table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunOutcome {
    pub scales: Scales,
    pub z1: f64,
    pub z0: f64,
    pub ratio: f64,
    #[serde(with = "crate::json::neg_inf_as_null")]
    pub log_sum: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampled: Option<SampledRatio>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SampledRatio {
    pub shots: u64,
    pub seed: u64,
    pub iterations: usize,
    /// Shots with `ω = 0, μ₀ = 1`.
    pub count1: u64,
    /// Shots with `ω = 0, μ₀ = 0`.
    pub count0: u64,
    pub ratio: f64,
    /// Wilson interval for `P(μ₀ = 1 | ω = 0)` mapped to the ratio.
    pub ratio_interval: [f64; 2],
}

/// Circuit for `table` under the given scales.
pub fn circuit_for(table: &LocalScoreTable, scales: &Scales) -> Result<Circuit> {
    let layout = QubitLayout::new(table.n(), table.lmax())?;
    let angles = angles_with_scales(table, scales)?;
    build_state_prep(&layout, &angles)
}

/// Prepares, simulates and reads one table's circuit.
pub fn run_table(table: &LocalScoreTable, scales: &Scales, mode: Mode, max_qubits: usize) -> Result<RunOutcome> {
    let circuit = circuit_for(table, scales)?;
    let layout = circuit.layout().expect("built with layout").clone();
    let state = StateVector::run_with_limit(&circuit, max_qubits)?;
    let pair = qsim::extract_claim_amplitudes(&state, &layout)?;
    let z0 = checked_z0(&pair)?;
    let ratio = pair.z1.norm() / z0;
    let log_sum = recover_from_ratio(ratio, table.n(), scales)?;
    let sampled = match mode {
        Mode::ExactAmplitude => None,
        Mode::Sampled { .. } if pair.z1.norm() == 0.0 => None,
        Mode::Sampled { shots, seed } => Some(sample_ratio(&state, &layout, shots, seed)?),
    };
    Ok(RunOutcome {
        scales: scales.clone(),
        z1: pair.z1.re,
        z0: pair.z0.re,
        ratio,
        log_sum,
        sampled,
    })
}

fn sample_ratio(state: &StateVector, layout: &QubitLayout, shots: u64, seed: u64) -> Result<SampledRatio> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be positive".into()));
    }
    let proj = layout.projector();
    let iterations = qsim::optimal_iterations(proj.weight(state))?;
    let amplified = qsim::amplify(state, &proj, iterations)?;
    // outcome bit 0 is mu0, bit 1 is omega
    let counts = qsim::sample_counts(&amplified, &[layout.mu0, layout.omega], shots, seed)?;
    let (count0, count1) = (counts[0b00], counts[0b01]);
    let total = count0 + count1;
    let ratio = if count0 == 0 {
        f64::INFINITY
    } else {
        (count1 as f64 / count0 as f64).sqrt()
    };
    let (lo, hi) = wilson(count1, total);
    Ok(SampledRatio {
        shots,
        seed,
        iterations,
        count1,
        count0,
        ratio,
        ratio_interval: [odds_sqrt(lo), odds_sqrt(hi)],
    })
}

/// Wilson score interval at 95%.
pub fn wilson(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = WILSON_Z * WILSON_Z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = WILSON_Z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

fn odds_sqrt(p: f64) -> f64 {
    if p >= 1.0 {
        f64::INFINITY
    } else {
        (p / (1.0 - p)).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EstimationResult {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lmax: Option<usize>,
    pub mode: Mode,
    pub qubits: usize,
    pub epsilon: f64,
    pub effective_epsilon: f64,
    pub scales: Scales,
    pub numerator: RunOutcome,
    pub denominator: RunOutcome,
    /// Exact-amplitude posterior `Σ_F / Σ`.
    pub posterior: f64,
    /// Posterior from sampled ratios, with its interval.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampled_posterior: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampled_interval: Option<[f64; 2]>,
    /// Numerator amplitude exactly zero; the posterior is reported as 0.
    pub degenerate_numerator: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discrepancy: Option<f64>,
}

/// Posterior from two runs; refuses runs prepared with different scales.
pub fn combine_runs(numerator: &RunOutcome, denominator: &RunOutcome) -> Result<(f64, bool)> {
    if numerator.scales != denominator.scales {
        return Err(Error::ScaleMismatch);
    }
    if denominator.z1 == 0.0 {
        return Err(Error::Degenerate("denominator amplitude z1 is zero".into()));
    }
    if numerator.z1 == 0.0 {
        return Ok((0.0, true));
    }
    Ok(((numerator.log_sum - denominator.log_sum).exp().clamp(0.0, 1.0), false))
}

/// Estimates `Σ_num / Σ_den` from two tables of the same shape.
pub fn estimate_from_tables(
    num: &LocalScoreTable,
    den: &LocalScoreTable,
    mode: Mode,
    max_qubits: usize,
) -> Result<EstimationResult> {
    if num.n() != den.n() || num.lmax() != den.lmax() {
        return Err(Error::Dimension("numerator and denominator tables differ in shape".into()));
    }
    let layout = QubitLayout::new(den.n(), den.lmax())?;
    if layout.total_qubits() > max_qubits {
        return Err(Error::SizeBound {
            what: "qubits",
            value: layout.total_qubits(),
            limit: max_qubits,
        });
    }
    let scales = Scales::from_table(den);
    let (num_mode, den_mode) = match mode {
        Mode::ExactAmplitude => (mode, mode),
        Mode::Sampled { shots, seed } => (
            mode,
            Mode::Sampled {
                shots,
                seed: seed.wrapping_add(1),
            },
        ),
    };
    let (n_run, d_run) = rayon::join(
        || run_table(num, &scales, num_mode, max_qubits),
        || run_table(den, &scales, den_mode, max_qubits),
    );
    let (n_run, d_run) = (n_run?, d_run?);
    let (posterior, degenerate) = combine_runs(&n_run, &d_run)?;

    let (mut sampled_posterior, mut sampled_interval) = (None, None);
    if let Some(ds) = &d_run.sampled {
        let (value, interval) = match (&n_run.sampled, degenerate) {
            (_, true) => (0.0, [0.0, 0.0]),
            (Some(ns), false) => (
                (ns.ratio / ds.ratio).clamp(0.0, 1.0),
                [
                    (ns.ratio_interval[0] / ds.ratio_interval[1]).clamp(0.0, 1.0),
                    (ns.ratio_interval[1] / ds.ratio_interval[0]).clamp(0.0, 1.0),
                ],
            ),
            (None, false) => unreachable!("numerator sampled whenever z1 is nonzero"),
        };
        sampled_posterior = Some(value);
        sampled_interval = Some(interval);
    }

    Ok(EstimationResult {
        n: den.n(),
        lmax: den.lmax(),
        mode,
        qubits: layout.total_qubits(),
        epsilon: layout.epsilon(),
        effective_epsilon: layout.effective_epsilon(),
        scales,
        numerator: n_run,
        denominator: d_run,
        posterior,
        sampled_posterior,
        sampled_interval,
        degenerate_numerator: degenerate,
        oracle_value: None,
        discrepancy: None,
    })
}

/// Circuit estimate of `P̄(F|D)` for the (optionally in-degree-restricted)
/// ordered model, compared against the classical sum.
pub fn estimate_feature_posterior(
    d: &Dataset,
    prior: &PriorSpec,
    f: &ModularFeatureSet,
    lmax: Option<usize>,
    mode: Mode,
) -> Result<EstimationResult> {
    estimate_feature_posterior_with_limit(d, prior, f, lmax, mode, qsim::DEFAULT_MAX_QUBITS)
}

pub fn estimate_feature_posterior_with_limit(
    d: &Dataset,
    prior: &PriorSpec,
    f: &ModularFeatureSet,
    lmax: Option<usize>,
    mode: Mode,
    max_qubits: usize,
) -> Result<EstimationResult> {
    if f.n() != d.n() {
        return Err(Error::Dimension(format!(
            "feature over {} nodes, dataset has {} columns",
            f.n(),
            d.n()
        )));
    }
    let num = build_score_table(d, prior, Some(f), lmax)?;
    let den = build_score_table(d, prior, None, lmax)?;
    let mut result = estimate_from_tables(&num, &den, mode, max_qubits)?;
    let exact = oracle::ordered_feature_posterior_restricted(d, prior, f, lmax)?;
    result.discrepancy = Some((result.posterior - exact.feature_value).abs());
    result.oracle_value = Some(exact.feature_value);
    Ok(result)
}
