//! Exact posteriors by classical enumeration.
//!
//! These are the reference values for the simulated pipeline in
//! [`crate::estimate`]. Every sum is accumulated in log space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{self, enumerate_dags_bounded, enumerate_labelled_dags, Graph, Mask, ModularFeatureSet, Permutation};
use crate::math::LogSumExp;
use crate::scoring::{build_score_table, Dataset, LikelihoodCache, LocalScoreTable, PriorSpec};

/// Node bound for per-graph posterior output.
pub const PER_GRAPH_BOUND: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Unordered,
    Ordered,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphPosterior {
    pub graph: Graph,
    pub posterior: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PosteriorReport {
    pub model: Model,
    pub feature_value: f64,
    #[serde(with = "crate::json::neg_inf_as_null")]
    pub numerator_log: f64,
    #[serde(with = "crate::json::neg_inf_as_null")]
    pub denominator_log: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_graph: Option<Vec<GraphPosterior>>,
    /// `ln(A + B + C)` for three nodes, equal to `numerator_log`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grouped_numerator_log: Option<f64>,
}

impl PosteriorReport {
    fn from_logs(model: Model, numerator_log: f64, denominator_log: f64) -> Result<Self> {
        if denominator_log == f64::NEG_INFINITY {
            return Err(Error::Degenerate("denominator sum is zero".into()));
        }
        let value = if numerator_log == f64::NEG_INFINITY {
            0.0
        } else {
            (numerator_log - denominator_log).exp().clamp(0.0, 1.0)
        };
        Ok(Self {
            model,
            feature_value: value,
            numerator_log,
            denominator_log,
            per_graph: None,
            grouped_numerator_log: None,
        })
    }
}

fn check_feature(d: &Dataset, f: &ModularFeatureSet) -> Result<()> {
    if f.n() != d.n() {
        return Err(Error::Dimension(format!(
            "feature over {} nodes, dataset has {} columns",
            f.n(),
            d.n()
        )));
    }
    Ok(())
}

/// `ln Π_j Σ_{pa ⊂ {<j}} 1_{F_j}(pa) β_j(pa)`.
fn unordered_log_product(cache: &LikelihoodCache, prior: &PriorSpec, f: &ModularFeatureSet) -> f64 {
    (0..f.n())
        .map(|j| {
            let within = graphs::below(j);
            let mut acc = LogSumExp::new();
            for pa in graphs::subsets(within) {
                if f.allows(j, pa) {
                    acc.add(cache.get(j, pa) + prior.parent_prior.log_prob(pa, within));
                }
            }
            acc.value()
        })
        .sum()
}

/// `P(F|D)` for the unordered modular model, via the per-node product form.
pub fn unordered_feature_posterior(
    d: &Dataset,
    prior: &PriorSpec,
    f: &ModularFeatureSet,
) -> Result<PosteriorReport> {
    check_feature(d, f)?;
    let cache = LikelihoodCache::new(d, None)?;
    let num = unordered_log_product(&cache, prior, f);
    let den = unordered_log_product(&cache, prior, &ModularFeatureSet::trivial(d.n()));
    PosteriorReport::from_logs(Model::Unordered, num, den)
}

/// Same quantity by direct summation over every `G ⊂ FCG_n`.
pub fn unordered_feature_posterior_direct(
    d: &Dataset,
    prior: &PriorSpec,
    f: &ModularFeatureSet,
) -> Result<PosteriorReport> {
    check_feature(d, f)?;
    let dags = enumerate_dags_bounded(d.n(), graphs::DEFAULT_GRAPH_BOUND)?;
    let cache = LikelihoodCache::new(d, None)?;
    let mut num = LogSumExp::new();
    let mut den = LogSumExp::new();
    for g in &dags {
        let w = unordered_log_weight(&cache, prior, g);
        den.add(w);
        if f.indicator(g) {
            num.add(w);
        }
    }
    PosteriorReport::from_logs(Model::Unordered, num.value(), den.value())
}

/// `ln P(D|G) P(G)` for the unordered model (unnormalized).
fn unordered_log_weight(cache: &LikelihoodCache, prior: &PriorSpec, g: &Graph) -> f64 {
    (0..g.n())
        .map(|j| {
            let within = graphs::below(j);
            let pa = g.parents(j);
            if pa & !within != 0 {
                f64::NEG_INFINITY
            } else {
                cache.get(j, pa) + prior.parent_prior.log_prob(pa, within)
            }
        })
        .sum()
}

/// `ln Σ_σ Π_k h(σ_k | {σ_0..σ_{k-1}})`, with entries above the table's
/// `lmax` read as 1.
pub fn ordered_log_sum(table: &LocalScoreTable) -> Result<f64> {
    ordered_log_sum_bounded(table, graphs::DEFAULT_PERM_BOUND)
}

pub fn ordered_log_sum_bounded(table: &LocalScoreTable, bound: usize) -> Result<f64> {
    let n = table.n();
    if n > bound {
        return Err(Error::SizeBound {
            what: "n",
            value: n,
            limit: bound,
        });
    }
    let mut acc = LogSumExp::new();
    for p in Permutation::all(n) {
        acc.add(order_log_product(table, p.sigma()));
    }
    Ok(acc.value())
}

/// `ln Π_k h(order_k | {order_0..order_{k-1}})`.
pub fn order_log_product(table: &LocalScoreTable, order: &[usize]) -> f64 {
    let mut pred: Mask = 0;
    let mut total = 0.0;
    for &node in order {
        total += table.get_or_one(node, pred);
        pred |= 1 << node;
    }
    total
}

/// The three-node sum grouped by the last node of the order:
/// `A = h_{2|{1,0}} (h_{1|0} h_0 + h_{0|1} h_1)` and its two rotations.
pub fn grouped_log_sum_n3(table: &LocalScoreTable) -> Result<f64> {
    if table.n() != 3 {
        return Err(Error::InvalidArgument("grouped form needs exactly three nodes".into()));
    }
    let h = |j: usize, s: &[usize]| table.get_or_one(j, graphs::mask_of(s.iter().copied())).exp();
    let a = h(2, &[1, 0]) * (h(1, &[0]) * h(0, &[]) + h(0, &[1]) * h(1, &[]));
    let b = h(1, &[0, 2]) * (h(0, &[2]) * h(2, &[]) + h(2, &[0]) * h(0, &[]));
    let c = h(0, &[2, 1]) * (h(2, &[1]) * h(1, &[]) + h(1, &[2]) * h(2, &[]));
    Ok((a + b + c).ln())
}

fn ordered_report(num_table: &LocalScoreTable, den_table: &LocalScoreTable) -> Result<PosteriorReport> {
    let num = ordered_log_sum(num_table)?;
    let den = ordered_log_sum(den_table)?;
    let mut report = PosteriorReport::from_logs(Model::Ordered, num, den)?;
    if num_table.n() == 3 {
        let grouped = grouped_log_sum_n3(num_table)?;
        let agree = (grouped == num) || ((grouped - num).abs() <= 1e-9 * num.abs().max(1.0));
        if !agree {
            return Err(Error::Consistency(format!(
                "grouped three-node sum {grouped} differs from permutation sum {num}"
            )));
        }
        report.grouped_numerator_log = Some(grouped);
    }
    Ok(report)
}

/// `P̄(F|D)` for the ordered modular model with the potential-product order prior.
pub fn ordered_feature_posterior(
    d: &Dataset,
    prior: &PriorSpec,
    f: &ModularFeatureSet,
) -> Result<PosteriorReport> {
    ordered_feature_posterior_restricted(d, prior, f, None)
}

/// As [`ordered_feature_posterior`], with `h(j|S)` for `|S| > lmax` replaced by 1.
/// This is the quantity the in-degree-restricted circuit encodes.
pub fn ordered_feature_posterior_restricted(
    d: &Dataset,
    prior: &PriorSpec,
    f: &ModularFeatureSet,
    lmax: Option<usize>,
) -> Result<PosteriorReport> {
    check_feature(d, f)?;
    if d.n() > graphs::DEFAULT_PERM_BOUND {
        return Err(Error::SizeBound {
            what: "n",
            value: d.n(),
            limit: graphs::DEFAULT_PERM_BOUND,
        });
    }
    let num_table = build_score_table(d, prior, Some(f), lmax)?;
    let den_table = build_score_table(d, prior, None, lmax)?;
    ordered_report(&num_table, &den_table)
}

/// Posterior of every graph, normalized over the prior's support: `DAG_n`
/// for the unordered model, all labelled DAGs for the ordered one.
pub fn graph_posterior(d: &Dataset, prior: &PriorSpec, model: Model) -> Result<PosteriorReport> {
    let n = d.n();
    if n > PER_GRAPH_BOUND {
        return Err(Error::SizeBound {
            what: "n",
            value: n,
            limit: PER_GRAPH_BOUND,
        });
    }
    let dags = match model {
        Model::Unordered => enumerate_dags_bounded(n, PER_GRAPH_BOUND)?,
        Model::Ordered => enumerate_labelled_dags(n, PER_GRAPH_BOUND)?,
    };
    let cache = LikelihoodCache::new(d, None)?;
    let weights: Vec<f64> = match model {
        Model::Unordered => dags.iter().map(|g| unordered_log_weight(&cache, prior, g)).collect(),
        Model::Ordered => {
            let perms: Vec<Permutation> = Permutation::all(n).collect();
            dags.iter()
                .map(|g| {
                    let mut acc = LogSumExp::new();
                    for p in &perms {
                        acc.add(ordered_log_weight(&cache, prior, g, p));
                    }
                    acc.value()
                })
                .collect()
        }
    };
    let mut total = LogSumExp::new();
    weights.iter().for_each(|&w| total.add(w));
    let den = total.value();
    let mut report = PosteriorReport::from_logs(model, den, den)?;
    report.per_graph = Some(
        dags.into_iter()
            .zip(&weights)
            .map(|(graph, &w)| GraphPosterior {
                graph,
                posterior: (w - den).exp(),
            })
            .collect(),
    );
    Ok(report)
}

/// `ln Π_j Φ(σ_k|pred) θ(pa ⊂ pred) P(x□|pa) P̄(pa|pred)` for one order.
fn ordered_log_weight(cache: &LikelihoodCache, prior: &PriorSpec, g: &Graph, p: &Permutation) -> f64 {
    let mut pred: Mask = 0;
    let mut total = 0.0;
    for &node in p.sigma() {
        let pa = g.parents(node);
        if pa & !pred != 0 {
            return f64::NEG_INFINITY;
        }
        total += prior.order_potential.log_phi(node, pred)
            + cache.get(node, pa)
            + prior.parent_prior.log_prob(pa, pred);
        pred |= 1 << node;
    }
    total
}
