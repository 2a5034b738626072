//! Categorical datasets, Cooper–Herskovits local likelihoods, parent priors
//! and the table of local scores `h(j|S)`.

use std::collections::{BTreeMap, HashMap};
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{self, members, Mask, ModularFeatureSet, Permutation};
use crate::math::{binomial, LogFactorials, LogSumExp};

/// Largest node count accepted when building a full score table.
pub const TABLE_BOUND: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    names: Vec<String>,
    cardinalities: Vec<usize>,
    /// Row-major, `values[m][j]`.
    values: Vec<Vec<u32>>,
}

impl Dataset {
    pub fn new(names: Vec<String>, cardinalities: Vec<usize>, values: Vec<Vec<u32>>) -> Result<Self> {
        let n = cardinalities.len();
        if n == 0 {
            return Err(Error::InvalidArgument("dataset needs at least one column".into()));
        }
        if n > graphs::MAX_NODES {
            return Err(Error::SizeBound {
                what: "columns",
                value: n,
                limit: graphs::MAX_NODES,
            });
        }
        if names.len() != n {
            return Err(Error::Dimension("column names vs cardinalities".into()));
        }
        if values.is_empty() {
            return Err(Error::InvalidArgument("dataset has no records".into()));
        }
        if let Some(j) = cardinalities.iter().position(|&c| c == 0) {
            return Err(Error::InvalidArgument(format!("column {j} has cardinality 0")));
        }
        for (m, row) in values.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Parse {
                    row: m as u64 + 1,
                    column: None,
                    message: format!("expected {n} fields, found {}", row.len()),
                });
            }
            if let Some(j) = (0..n).find(|&j| row[j] as usize >= cardinalities[j]) {
                return Err(Error::Parse {
                    row: m as u64 + 1,
                    column: Some(j),
                    message: format!("value {} exceeds cardinality {}", row[j], cardinalities[j]),
                });
            }
        }
        Ok(Self {
            names,
            cardinalities,
            values,
        })
    }

    /// Dataset with generated column names `x0, x1, ...`.
    pub fn from_rows(cardinalities: Vec<usize>, values: Vec<Vec<u32>>) -> Result<Self> {
        let names = (0..cardinalities.len()).map(|j| format!("x{j}")).collect();
        Self::new(names, cardinalities, values)
    }

    pub fn n(&self) -> usize {
        self.cardinalities.len()
    }

    pub fn records(&self) -> usize {
        self.values.len()
    }

    pub fn cardinality(&self, j: usize) -> usize {
        self.cardinalities[j]
    }

    pub fn cardinalities(&self) -> &[usize] {
        &self.cardinalities
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn value(&self, m: usize, j: usize) -> u32 {
        self.values[m][j]
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.values
    }

    /// Raises cardinalities to the given values (values may only grow).
    pub fn with_cardinalities(mut self, cards: &[usize]) -> Result<Self> {
        if cards.len() != self.n() {
            return Err(Error::Dimension(format!(
                "{} cardinalities for {} columns",
                cards.len(),
                self.n()
            )));
        }
        for (j, (&have, &want)) in self.cardinalities.iter().zip(cards).enumerate() {
            if want < have {
                return Err(Error::InvalidArgument(format!(
                    "column {j} has {have} observed values, override {want} is smaller"
                )));
            }
        }
        self.cardinalities = cards.to_vec();
        Ok(self)
    }

    /// Column `k` moves to position `rho[k]`.
    pub fn permute_columns(&self, rho: &Permutation) -> Result<Self> {
        let n = self.n();
        if rho.n() != n {
            return Err(Error::Dimension("column permutation size".into()));
        }
        let mut names = vec![String::new(); n];
        let mut cards = vec![0; n];
        for k in 0..n {
            names[rho.apply(k)] = self.names[k].clone();
            cards[rho.apply(k)] = self.cardinalities[k];
        }
        let values = self
            .values
            .iter()
            .map(|row| {
                let mut out = vec![0; n];
                for k in 0..n {
                    out[rho.apply(k)] = row[k];
                }
                out
            })
            .collect();
        Self::new(names, cards, values)
    }
}

/// Reads a header row followed by categorical records. Tokens of each column
/// are numbered `0..` in order of first appearance.
pub fn load_dataset<R: Read>(source: R, delimiter: u8) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(source);
    let headers = reader.headers().map_err(|e| csv_error(e, 1))?.clone();
    let n = headers.len();
    if n == 0 || (n == 1 && headers.get(0) == Some("")) {
        return Err(Error::Parse {
            row: 1,
            column: None,
            message: "missing header row".into(),
        });
    }
    if n > graphs::MAX_NODES {
        return Err(Error::Parse {
            row: 1,
            column: None,
            message: format!("{n} columns exceed the limit of {}", graphs::MAX_NODES),
        });
    }
    let names: Vec<String> = headers.iter().map(str::to_owned).collect();
    let mut dictionaries: Vec<HashMap<String, u32>> = vec![HashMap::new(); n];
    let mut values = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        // header is line 1
        let line = i as u64 + 2;
        let rec = rec.map_err(|e| csv_error(e, line))?;
        if rec.len() == 1 && rec.get(0) == Some("") {
            continue;
        }
        let mut row = Vec::with_capacity(n);
        for (j, tok) in rec.iter().enumerate() {
            if tok.is_empty() {
                return Err(Error::Parse {
                    row: line,
                    column: Some(j),
                    message: "empty field".into(),
                });
            }
            let dict = &mut dictionaries[j];
            let next = dict.len() as u32;
            row.push(*dict.entry(tok.to_owned()).or_insert(next));
        }
        values.push(row);
    }
    if values.is_empty() {
        return Err(Error::Parse {
            row: 2,
            column: None,
            message: "no records after the header".into(),
        });
    }
    let cards = dictionaries.iter().map(|d| d.len()).collect();
    Dataset::new(names, cards, values)
}

/// Tab-separated for `.tsv`/`.tab`, comma-separated otherwise.
pub fn load_dataset_path(path: &Path) -> Result<Dataset> {
    let delimiter = match path.extension().and_then(|e| e.to_str()) {
        Some("tsv") | Some("tab") => b'\t',
        _ => b',',
    };
    let file = std::fs::File::open(path)?;
    load_dataset(file, delimiter)
}

fn csv_error(e: csv::Error, fallback_line: u64) -> Error {
    let row = e.position().map(|p| p.line()).unwrap_or(fallback_line);
    let message = match e.kind() {
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
            format!("ragged row: expected {expected_len} fields, found {len}")
        }
        _ => e.to_string(),
    };
    Error::Parse {
        row,
        column: None,
        message,
    }
}

/// Joint counts `N(j, x_j, π)` for one node and one parent set.
#[derive(Debug, Clone, PartialEq)]
pub struct Counts {
    /// Parent columns in ascending order; they form the mixed radix of a
    /// configuration index, first parent least significant.
    pub parents: Vec<usize>,
    pub child_cardinality: usize,
    /// Observed configurations only; unobserved ones have all-zero counts.
    pub by_config: BTreeMap<u64, Vec<u64>>,
}

impl Counts {
    pub fn config_index(&self, d: &Dataset, parent_values: &[u32]) -> u64 {
        let mut idx = 0u64;
        let mut radix = 1u64;
        for (k, &p) in self.parents.iter().enumerate() {
            idx += parent_values[k] as u64 * radix;
            radix *= d.cardinality(p) as u64;
        }
        idx
    }

    pub fn get(&self, d: &Dataset, parent_values: &[u32], x: u32) -> u64 {
        self.by_config
            .get(&self.config_index(d, parent_values))
            .map(|c| c[x as usize])
            .unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.by_config.values().flatten().sum()
    }
}

fn check_parent_set(d: &Dataset, j: usize, pa: Mask) -> Result<()> {
    if j >= d.n() {
        return Err(Error::InvalidArgument(format!("node {j} outside 0..{}", d.n())));
    }
    if pa & (1 << j) != 0 {
        return Err(Error::InvalidArgument(format!("node {j} listed as its own parent")));
    }
    if pa & !graphs::full_mask(d.n()) != 0 {
        return Err(Error::InvalidArgument("parent outside the dataset columns".into()));
    }
    Ok(())
}

pub fn counts(d: &Dataset, j: usize, pa: Mask) -> Result<Counts> {
    check_parent_set(d, j, pa)?;
    let parents = members(pa);
    let card = d.cardinality(j);
    let mut out = Counts {
        parents,
        child_cardinality: card,
        by_config: BTreeMap::new(),
    };
    let mut buf = vec![0u32; out.parents.len()];
    for row in d.rows() {
        for (slot, &p) in buf.iter_mut().zip(&out.parents) {
            *slot = row[p];
        }
        let idx = out.config_index(d, &buf);
        out.by_config.entry(idx).or_insert_with(|| vec![0; card])[row[j] as usize] += 1;
    }
    Ok(out)
}

/// Cooper–Herskovits scorer with a log-factorial table sized for one dataset.
pub struct LocalScorer<'a> {
    data: &'a Dataset,
    log_fact: LogFactorials,
}

impl<'a> LocalScorer<'a> {
    pub fn new(data: &'a Dataset) -> Self {
        let max_card = data.cardinalities().iter().copied().max().unwrap_or(1);
        Self {
            data,
            log_fact: LogFactorials::new(data.records() + max_card),
        }
    }

    /// `ln P(x_j□ | pa_j)`: for every parent configuration `π`,
    /// `ln (r-1)! - ln (N_π + r - 1)! + Σ_x ln N(j,x,π)!` with `r = N_{x_j}`.
    pub fn log_likelihood(&self, j: usize, pa: Mask) -> Result<f64> {
        let c = counts(self.data, j, pa)?;
        let r = c.child_cardinality;
        let lf = &self.log_fact;
        let mut total = 0.0;
        for per_value in c.by_config.values() {
            let n_pi: u64 = per_value.iter().sum();
            total += lf.get(r - 1) - lf.get(n_pi as usize + r - 1);
            total += per_value.iter().map(|&k| lf.get(k as usize)).sum::<f64>();
        }
        Ok(total)
    }
}

pub fn log_local_likelihood(d: &Dataset, j: usize, pa: Mask) -> Result<f64> {
    LocalScorer::new(d).log_likelihood(j, pa)
}

/// Prior over the parent set of a node given the set it may draw from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParentPrior {
    /// `P(pa|S) = 2^-|S|`.
    #[default]
    UniformSubsets,
    /// Uniform over the size `|pa|`, then uniform among sets of that size.
    UniformSizes,
}

impl ParentPrior {
    pub fn log_prob(&self, pa: Mask, within: Mask) -> f64 {
        if pa & !within != 0 {
            return f64::NEG_INFINITY;
        }
        let s = within.count_ones() as usize;
        match self {
            ParentPrior::UniformSubsets => -(s as f64) * std::f64::consts::LN_2,
            ParentPrior::UniformSizes => {
                let k = pa.count_ones() as usize;
                -((s + 1) as f64).ln() - (binomial(s, k) as f64).ln()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiEntry {
    pub j: usize,
    #[serde(rename = "S")]
    pub s: Vec<usize>,
    pub value: f64,
}

/// The order potential `Φ(j|S)` whose product over a permutation defines the
/// order prior.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderPotential {
    /// Uniform prior over orders.
    #[default]
    Constant,
    /// `Φ(j|S) = δ(S, {<j})`: all prior mass on the identity order.
    #[serde(rename = "delta-id")]
    DeltaIdentity,
    /// Explicit values; unlisted `(j, S)` default to 1.
    Table(Vec<PhiEntry>),
}

impl OrderPotential {
    pub fn log_phi(&self, j: usize, s: Mask) -> f64 {
        match self {
            OrderPotential::Constant => 0.0,
            OrderPotential::DeltaIdentity => {
                if s == graphs::below(j) {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
            OrderPotential::Table(entries) => entries
                .iter()
                .find(|e| e.j == j && graphs::mask_of(e.s.iter().copied()) == s)
                .map(|e| e.value.ln())
                .unwrap_or(0.0),
        }
    }

    fn validate(&self) -> Result<()> {
        if let OrderPotential::Table(entries) = self {
            if let Some(e) = entries.iter().find(|e| !(e.value >= 0.0) || !e.value.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "Φ({}|{:?}) = {} is not a finite non-negative value",
                    e.j, e.s, e.value
                )));
            }
        }
        Ok(())
    }
}

/// Structure prior. The local likelihood is always Cooper–Herskovits with
/// unit Dirichlet hyperparameters.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, rename_all = "camelCase")]
pub struct PriorSpec {
    pub parent_prior: ParentPrior,
    #[serde(rename = "phi")]
    pub order_potential: OrderPotential,
}

/// `ln h(j|S)` for every node `j` and conditioning set `S ∌ j` with
/// `|S| <= lmax`.
#[derive(Debug, Clone)]
pub struct LocalScoreTable {
    n: usize,
    lmax: Option<usize>,
    /// Dense `n * 2^n`; NaN marks pairs outside the domain.
    log_h: Vec<f64>,
    feature_applied: bool,
    level_log_scale: Vec<f64>,
}

impl PartialEq for LocalScoreTable {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.lmax == other.lmax
            && self.feature_applied == other.feature_applied
            && self.level_log_scale == other.level_log_scale
            && self
                .log_h
                .iter()
                .zip(&other.log_h)
                .all(|(a, b)| a == b || (a.is_nan() && b.is_nan()))
    }
}

impl LocalScoreTable {
    /// Table with every in-domain entry set to `ln h = 0`.
    pub fn ones(n: usize, lmax: Option<usize>) -> Result<Self> {
        if n == 0 || n > TABLE_BOUND {
            return Err(Error::SizeBound {
                what: "n",
                value: n,
                limit: TABLE_BOUND,
            });
        }
        let lmax = normalize_lmax(n, lmax);
        let mut log_h = vec![f64::NAN; n << n];
        for j in 0..n {
            let others = graphs::full_mask(n) & !(1 << j);
            for s in graphs::subsets(others) {
                if lmax.map_or(true, |l| s.count_ones() as usize <= l) {
                    log_h[(j << n) | s as usize] = 0.0;
                }
            }
        }
        Ok(Self {
            n,
            lmax,
            log_h,
            feature_applied: false,
            level_log_scale: vec![0.0; n],
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lmax(&self) -> Option<usize> {
        self.lmax
    }

    /// Highest kept level.
    pub fn top_level(&self) -> usize {
        self.lmax.unwrap_or(self.n - 1)
    }

    pub fn feature_applied(&self) -> bool {
        self.feature_applied
    }

    pub fn level_log_scale(&self) -> &[f64] {
        &self.level_log_scale
    }

    pub fn contains(&self, j: usize, s: Mask) -> bool {
        j < self.n && s & (1 << j) == 0 && s & !graphs::full_mask(self.n) == 0 && {
            let v = self.log_h[(j << self.n) | s as usize];
            !v.is_nan()
        }
    }

    /// `ln h(j|S)`, `None` outside the domain.
    pub fn get(&self, j: usize, s: Mask) -> Option<f64> {
        self.contains(j, s).then(|| self.log_h[(j << self.n) | s as usize])
    }

    /// `ln h(j|S)` with entries above `lmax` read as `h = 1`.
    pub fn get_or_one(&self, j: usize, s: Mask) -> f64 {
        self.get(j, s).unwrap_or(0.0)
    }

    pub fn set(&mut self, j: usize, s: Mask, log_h: f64) -> Result<()> {
        if !self.contains(j, s) {
            return Err(Error::InvalidArgument(format!("({j}, {s:#b}) outside the table domain")));
        }
        self.log_h[(j << self.n) | s as usize] = log_h;
        Ok(())
    }

    /// Entries ordered by `j`, then level, then combination order.
    pub fn entries(&self) -> Vec<(usize, Mask, f64)> {
        let mut out = Vec::with_capacity(self.len());
        for j in 0..self.n {
            for (_, s) in self.level_sets(j) {
                out.push((j, s, self.log_h[(j << self.n) | s as usize]));
            }
        }
        out
    }

    /// `(level, S)` pairs for node `j` in layout order.
    pub fn level_sets(&self, j: usize) -> Vec<(usize, Mask)> {
        let others: Vec<usize> = (0..self.n).filter(|&k| k != j).collect();
        (0..=self.top_level())
            .flat_map(|l| {
                graphs::combination_masks(&others, l)
                    .expect("l < n")
                    .into_iter()
                    .map(move |s| (l, s))
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.log_h.iter().filter(|v| !v.is_nan()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Divides every `h(j|S)` with `|S| = ℓ` by `exp(log_scale[ℓ])`, recording
    /// the accumulated scales.
    pub fn apply_level_scale(&mut self, log_scale: &[f64]) -> Result<()> {
        if log_scale.len() != self.n {
            return Err(Error::Dimension("one scale per level expected".into()));
        }
        for (idx, v) in self.log_h.iter_mut().enumerate() {
            if v.is_nan() {
                continue;
            }
            let s = (idx & ((1 << self.n) - 1)) as Mask;
            *v -= log_scale[s.count_ones() as usize];
        }
        for (acc, s) in self.level_log_scale.iter_mut().zip(log_scale) {
            *acc += s;
        }
        Ok(())
    }

    pub fn to_export(&self) -> ScoreTableExport {
        ScoreTableExport {
            n: self.n,
            lmax: self.lmax,
            feature_applied: self.feature_applied,
            entries: self
                .entries()
                .into_iter()
                .map(|(j, s, log_h)| ScoreEntry {
                    j,
                    s: members(s),
                    log_h,
                })
                .collect(),
        }
    }

    pub fn from_export(e: &ScoreTableExport) -> Result<Self> {
        let mut t = Self::ones(e.n, e.lmax)?;
        for entry in &e.entries {
            if entry.s.iter().any(|&k| k >= e.n) {
                return Err(Error::InvalidArgument("score entry outside node range".into()));
            }
            t.set(entry.j, graphs::mask_of(entry.s.iter().copied()), entry.log_h)?;
        }
        t.feature_applied = e.feature_applied;
        Ok(t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreEntry {
    pub j: usize,
    #[serde(rename = "S")]
    pub s: Vec<usize>,
    #[serde(rename = "logH", with = "crate::json::neg_inf_as_null")]
    pub log_h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreTableExport {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lmax: Option<usize>,
    #[serde(default, rename = "featureApplied")]
    pub feature_applied: bool,
    pub entries: Vec<ScoreEntry>,
}

/// `None` when the bound does not restrict anything.
pub fn normalize_lmax(n: usize, lmax: Option<usize>) -> Option<usize> {
    lmax.filter(|&l| l + 1 < n)
}

/// Per-node cache of `ln P(x_j□|pa)` for every admissible parent set.
pub(crate) struct LikelihoodCache {
    n: usize,
    values: Vec<f64>,
}

impl LikelihoodCache {
    pub(crate) fn new(d: &Dataset, max_parents: Option<usize>) -> Result<Self> {
        let n = d.n();
        if n > TABLE_BOUND {
            return Err(Error::SizeBound {
                what: "n",
                value: n,
                limit: TABLE_BOUND,
            });
        }
        let scorer = LocalScorer::new(d);
        let mut values = vec![f64::NAN; n << n];
        for j in 0..n {
            let others = graphs::full_mask(n) & !(1 << j);
            for pa in graphs::subsets(others) {
                if max_parents.map_or(true, |l| pa.count_ones() as usize <= l) {
                    values[(j << n) | pa as usize] = scorer.log_likelihood(j, pa)?;
                }
            }
        }
        Ok(Self { n, values })
    }

    pub(crate) fn get(&self, j: usize, pa: Mask) -> f64 {
        self.values[(j << self.n) | pa as usize]
    }
}

/// `ln h(j|S) = ln Φ(j|S) + ln Σ_{pa ⊂ S} 1_{F_j}(pa) P(x_j□|pa) P(pa|S)`.
pub fn build_score_table(
    d: &Dataset,
    prior: &PriorSpec,
    f: Option<&ModularFeatureSet>,
    lmax: Option<usize>,
) -> Result<LocalScoreTable> {
    let n = d.n();
    if let Some(f) = f {
        if f.n() != n {
            return Err(Error::Dimension(format!(
                "feature over {} nodes, dataset has {n} columns",
                f.n()
            )));
        }
    }
    prior.order_potential.validate()?;
    let mut table = LocalScoreTable::ones(n, lmax)?;
    let cache = LikelihoodCache::new(d, table.lmax())?;
    for (j, s, _) in table.entries() {
        let log_phi = prior.order_potential.log_phi(j, s);
        let mut acc = LogSumExp::new();
        if log_phi > f64::NEG_INFINITY {
            for pa in graphs::subsets(s) {
                if f.map_or(true, |f| f.allows(j, pa)) {
                    acc.add(cache.get(j, pa) + prior.parent_prior.log_prob(pa, s));
                }
            }
        }
        table.set(j, s, log_phi + acc.value())?;
    }
    table.feature_applied = f.is_some_and(|f| !f.is_trivial());
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{edge_feature, mask_of};

    fn tiny() -> Dataset {
        Dataset::from_rows(vec![2, 2], vec![vec![0, 0], vec![0, 1], vec![1, 1]]).unwrap()
    }

    #[test]
    fn load_basic_csv() {
        let d = load_dataset("A,B\na,0\nb,1\na,1\n".as_bytes(), b',').unwrap();
        assert_eq!(d.n(), 2);
        assert_eq!(d.records(), 3);
        assert_eq!(d.cardinalities(), &[2, 2]);
        assert_eq!(d.rows()[1], vec![1, 1]);
        assert_eq!(d.names(), &["A".to_string(), "B".to_string()]);
    }

    #[test]
    fn load_errors() {
        assert!(matches!(
            load_dataset("A,B\n".as_bytes(), b','),
            Err(Error::Parse { .. })
        ));
        match load_dataset("A,B\na,0\nb\n".as_bytes(), b',') {
            Err(Error::Parse { row, .. }) => assert_eq!(row, 3),
            other => panic!("{other:?}"),
        }
        let wide: Vec<String> = (0..65).map(|k| format!("c{k}")).collect();
        let text = format!("{}\n{}\n", wide.join(","), vec!["a"; 65].join(","));
        assert!(load_dataset(text.as_bytes(), b',').is_err());
    }

    #[test]
    fn constant_column() {
        let d = load_dataset("A\tB\nz\t1\nz\t2\n".as_bytes(), b'\t').unwrap();
        assert_eq!(d.cardinality(0), 1);
        assert!(d.rows().iter().all(|r| r[0] == 0));
        assert_eq!(log_local_likelihood(&d, 0, 0).unwrap(), 0.0);
        assert_eq!(log_local_likelihood(&d, 0, mask_of([1])).unwrap(), 0.0);
    }

    #[test]
    fn cardinality_override() {
        let d = tiny().with_cardinalities(&[3, 2]).unwrap();
        assert_eq!(d.cardinality(0), 3);
        assert!(tiny().with_cardinalities(&[1, 2]).is_err());
    }

    #[test]
    fn counts_examples() {
        let d = tiny();
        let hist = counts(&d, 1, 0).unwrap();
        assert_eq!(hist.by_config[&0], vec![1, 2]);
        let c = counts(&d, 1, mask_of([0])).unwrap();
        assert_eq!(c.get(&d, &[0], 0), 1);
        assert_eq!(c.get(&d, &[0], 1), 1);
        assert_eq!(c.get(&d, &[1], 0), 0);
        assert_eq!(c.get(&d, &[1], 1), 1);
        assert_eq!(c.total(), 3);
        assert!(counts(&d, 1, mask_of([1])).is_err());
    }

    #[test]
    fn single_record_binary() {
        let d = Dataset::from_rows(vec![2], vec![vec![0]]).unwrap();
        let v = log_local_likelihood(&d, 0, 0).unwrap();
        assert!((v - 0.5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn parent_priors_normalize() {
        for within in [0u64, 0b1, 0b101, 0b1111] {
            for rule in [ParentPrior::UniformSubsets, ParentPrior::UniformSizes] {
                let total: f64 = graphs::subsets(within).map(|pa| rule.log_prob(pa, within).exp()).sum();
                assert!((total - 1.0).abs() < 1e-12, "{rule:?} {within:#b}");
            }
        }
        assert_eq!(ParentPrior::UniformSubsets.log_prob(0b10, 0b1), f64::NEG_INFINITY);
    }

    #[test]
    fn table_sizes() {
        let d = Dataset::from_rows(vec![2, 2, 2], vec![vec![0, 1, 0], vec![1, 1, 0]]).unwrap();
        let full = build_score_table(&d, &PriorSpec::default(), None, None).unwrap();
        assert_eq!(full.len(), 12);
        let restricted = build_score_table(&d, &PriorSpec::default(), None, Some(1)).unwrap();
        assert_eq!(restricted.len(), 9);
        assert!(restricted.get(0, mask_of([1, 2])).is_none());
        assert_eq!(restricted.get_or_one(0, mask_of([1, 2])), 0.0);
    }

    #[test]
    fn feature_with_missing_parent_zeroes_entry() {
        let d = Dataset::from_rows(vec![2, 2, 2], vec![vec![0, 1, 0], vec![1, 1, 0]]).unwrap();
        let f = edge_feature(0, 2, 3).unwrap();
        let t = build_score_table(&d, &PriorSpec::default(), Some(&f), None).unwrap();
        assert_eq!(t.get(2, mask_of([1])), Some(f64::NEG_INFINITY));
        assert_eq!(t.get(2, 0), Some(f64::NEG_INFINITY));
        assert!(t.get(2, mask_of([0])).unwrap().is_finite());
        assert!(t.feature_applied());
    }

    #[test]
    fn table_dimension_mismatch() {
        let f = edge_feature(0, 2, 3).unwrap();
        assert!(matches!(
            build_score_table(&tiny(), &PriorSpec::default(), Some(&f), None),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn delta_potential_zeroes_other_sets() {
        let d = Dataset::from_rows(vec![2, 2, 2], vec![vec![0, 1, 0], vec![1, 1, 0]]).unwrap();
        let prior = PriorSpec {
            order_potential: OrderPotential::DeltaIdentity,
            ..Default::default()
        };
        let t = build_score_table(&d, &prior, None, None).unwrap();
        assert!(t.get(1, mask_of([0])).unwrap().is_finite());
        assert_eq!(t.get(1, mask_of([2])), Some(f64::NEG_INFINITY));
        assert_eq!(t.get(0, mask_of([1])), Some(f64::NEG_INFINITY));
    }

    #[test]
    fn export_round_trip() {
        let d = Dataset::from_rows(vec![2, 2, 2], vec![vec![0, 1, 0], vec![1, 1, 0]]).unwrap();
        let f = edge_feature(0, 2, 3).unwrap();
        let t = build_score_table(&d, &PriorSpec::default(), Some(&f), Some(1)).unwrap();
        let text = crate::json::to_string(&t.to_export()).unwrap();
        let back: ScoreTableExport = serde_json::from_str(&text).unwrap();
        assert_eq!(LocalScoreTable::from_export(&back).unwrap(), t);
    }

    #[test]
    fn prior_spec_config_names() {
        let p: PriorSpec = serde_json::from_str(r#"{"parentPrior":"uniform-sizes","phi":"delta-id"}"#).unwrap();
        assert_eq!(p.parent_prior, ParentPrior::UniformSizes);
        assert_eq!(p.order_potential, OrderPotential::DeltaIdentity);
        let t: PriorSpec =
            serde_json::from_str(r#"{"phi":{"table":[{"j":0,"S":[1],"value":0.5}]}}"#).unwrap();
        assert!((t.order_potential.log_phi(0, 0b10) - 0.5f64.ln()).abs() < 1e-15);
        assert_eq!(t.order_potential.log_phi(1, 0), 0.0);
    }
}
