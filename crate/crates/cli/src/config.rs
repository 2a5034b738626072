//! Resolved run configuration and the small option languages of the CLI.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use qbn_core::graphs::FeatureSpec;
use qbn_core::oracle::Model;
use qbn_core::scoring::{OrderPotential, ParentPrior, PhiEntry, PriorSpec};
use serde::{Deserialize, Serialize};

/// Marks errors that should exit with the usage status.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModeName {
    Exact,
    Sampled,
}

/// Everything that determines a command's output. Embedded in every report.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "camelCase")]
pub struct RunConfig {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<Model>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feature: Option<FeatureSpec>,
    pub prior: PriorSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lmax: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<ModeName>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub per_graph: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graph: Option<Vec<Vec<usize>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub circuit: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qubits: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub inputs: Vec<PathBuf>,
}

/// Reads a config from TOML or JSON. A report file works too: its embedded
/// `config` block is used.
pub fn load_config(path: &Path) -> anyhow::Result<RunConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let is_toml = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml"));
    let value: serde_json::Value = if is_toml {
        let t: toml::Value = toml::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        serde_json::to_value(t)?
    } else {
        serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?
    };
    let inner = match value.get("config") {
        Some(c) if value.get("result").is_some() => c.clone(),
        _ => value,
    };
    serde_json::from_value(inner).map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// `edge:J1-J2`, `trivial`, or `@file.json` holding a feature object.
pub fn parse_feature(spec: &str) -> anyhow::Result<FeatureSpec> {
    let spec = spec.trim();
    if spec == "trivial" {
        return Ok(FeatureSpec::Trivial);
    }
    if let Some(rest) = spec.strip_prefix("edge:") {
        let (a, b) = rest
            .split_once('-')
            .ok_or_else(|| usage(format!("feature `{spec}`: expected edge:J1-J2")))?;
        let parse = |s: &str| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| usage(format!("feature `{spec}`: `{s}` is not a node index")))
        };
        return Ok(FeatureSpec::Edge {
            from: parse(a)?,
            to: parse(b)?,
        });
    }
    if let Some(path) = spec.strip_prefix('@') {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading feature file {path}"))?;
        return serde_json::from_str(&text).map_err(|e| usage(format!("feature file {path}: {e}")));
    }
    Err(usage(format!("feature `{spec}`: expected edge:J1-J2, trivial or @file.json")))
}

/// `constant`, `delta-id`, or `@file.json` holding a list of `{j, S, value}`.
pub fn parse_phi(spec: &str) -> anyhow::Result<OrderPotential> {
    match spec.trim() {
        "constant" => Ok(OrderPotential::Constant),
        "delta-id" => Ok(OrderPotential::DeltaIdentity),
        s => {
            let Some(path) = s.strip_prefix('@') else {
                bail!(usage(format!("phi `{s}`: expected constant, delta-id or @file.json")));
            };
            let text = std::fs::read_to_string(path).with_context(|| format!("reading phi file {path}"))?;
            let entries: Vec<PhiEntry> =
                serde_json::from_str(&text).map_err(|e| usage(format!("phi file {path}: {e}")))?;
            Ok(OrderPotential::Table(entries))
        }
    }
}

pub fn parse_parent_prior(spec: &str) -> anyhow::Result<ParentPrior> {
    match spec.trim() {
        "uniform-subsets" => Ok(ParentPrior::UniformSubsets),
        "uniform-sizes" => Ok(ParentPrior::UniformSizes),
        s => Err(usage(format!("prior `{s}`: expected uniform-subsets or uniform-sizes"))),
    }
}

/// Parent lists separated by `;`, node 0 first: `";0;1,0"` is `pa_0 = ∅`,
/// `pa_1 = {0}`, `pa_2 = {1,0}`.
pub fn parse_parent_lists(spec: &str) -> anyhow::Result<Vec<Vec<usize>>> {
    spec.split(';')
        .map(|part| {
            part.split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| s.parse().map_err(|_| usage(format!("graph `{spec}`: `{s}` is not a node index"))))
                .collect()
        })
        .collect()
}

pub fn parse_index_list(spec: &str) -> anyhow::Result<Vec<usize>> {
    spec.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| usage(format!("`{s}` is not an index"))))
        .collect()
}
