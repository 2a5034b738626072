//! Graphs as tuples of parent sets, permutations, and modular feature sets.
//!
//! A graph on `n` nodes is the tuple `(pa_{n-1}, ..., pa_0)` of parent sets,
//! each stored as a bit mask. The full product of parent-set choices (self
//! loops included) is the graph universe; acyclicity is a separate predicate.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Parent set over nodes `0..64`, bit `k` set iff node `k` is a member.
pub type Mask = u64;

pub const MAX_NODES: usize = 64;
/// Default bound for operations that enumerate graphs.
pub const DEFAULT_GRAPH_BOUND: usize = 5;
/// Default bound for operations that enumerate permutations.
pub const DEFAULT_PERM_BOUND: usize = 8;

pub fn mask_of<I: IntoIterator<Item = usize>>(elems: I) -> Mask {
    elems.into_iter().fold(0, |m, k| m | (1 << k))
}

/// Members of `mask` in ascending order.
pub fn members(mask: Mask) -> Vec<usize> {
    let mut out = Vec::with_capacity(mask.count_ones() as usize);
    let mut m = mask;
    while m != 0 {
        out.push(m.trailing_zeros() as usize);
        m &= m - 1;
    }
    out
}

/// `{<j} = {0..j-1}`.
pub fn below(j: usize) -> Mask {
    if j >= 64 {
        u64::MAX
    } else {
        (1u64 << j) - 1
    }
}

pub fn full_mask(n: usize) -> Mask {
    below(n)
}

/// Iterates every subset of `mask` (including the empty set and `mask` itself).
pub fn subsets(mask: Mask) -> impl Iterator<Item = Mask> {
    let mut next = Some(0u64);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == mask { None } else { Some((cur.wrapping_sub(mask)) & mask) };
        Some(cur)
    })
}

fn check_bound(what: &'static str, value: usize, limit: usize) -> Result<()> {
    if value > limit {
        Err(Error::SizeBound { what, value, limit })
    } else {
        Ok(())
    }
}

fn fmt_set(f: &mut fmt::Formatter<'_>, mask: Mask) -> fmt::Result {
    if mask == 0 {
        return write!(f, "∅");
    }
    let mut elems = members(mask);
    elems.reverse();
    write!(f, "{{")?;
    for (i, e) in elems.iter().enumerate() {
        if i > 0 {
            write!(f, ",")?;
        }
        write!(f, "{e}")?;
    }
    write!(f, "}}")
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Graph {
    n: usize,
    parents: Vec<Mask>,
}

impl Graph {
    pub fn new(n: usize, parents: Vec<Mask>) -> Result<Self> {
        if n == 0 || n > MAX_NODES {
            return Err(Error::InvalidArgument(format!("node count {n} outside 1..=64")));
        }
        if parents.len() != n {
            return Err(Error::Dimension(format!(
                "{} parent sets for {n} nodes",
                parents.len()
            )));
        }
        let full = full_mask(n);
        if let Some(j) = parents.iter().position(|&p| p & !full != 0) {
            return Err(Error::InvalidArgument(format!(
                "parent set of node {j} references a node outside 0..{n}"
            )));
        }
        Ok(Self { n, parents })
    }

    /// Builds a graph from explicit parent lists, `sets[j] = pa_j`.
    pub fn from_sets(sets: &[&[usize]]) -> Result<Self> {
        let n = sets.len();
        if sets.iter().flat_map(|s| s.iter()).any(|&k| k >= n.max(1)) {
            return Err(Error::InvalidArgument("parent index out of range".into()));
        }
        Self::new(n, sets.iter().map(|s| mask_of(s.iter().copied())).collect())
    }

    pub fn empty(n: usize) -> Result<Self> {
        Self::new(n, vec![0; n])
    }

    /// The fully connected DAG with `pa_j = {<j}`.
    pub fn fully_connected(n: usize) -> Result<Self> {
        Self::new(n, (0..n).map(below).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn parents(&self, j: usize) -> Mask {
        self.parents[j]
    }

    pub fn parent_masks(&self) -> &[Mask] {
        &self.parents
    }

    /// `self ⊂ other`: every parent set is contained in the other's.
    pub fn is_subgraph_of(&self, other: &Graph) -> bool {
        self.n == other.n
            && self
                .parents
                .iter()
                .zip(&other.parents)
                .all(|(a, b)| a & !b == 0)
    }

    pub fn edge_count(&self) -> usize {
        self.parents.iter().map(|p| p.count_ones() as usize).sum()
    }

    /// Renames node `k` to `rho[k]`.
    pub fn relabel(&self, rho: &Permutation) -> Result<Graph> {
        if rho.n() != self.n {
            return Err(Error::Dimension("relabeling permutation size".into()));
        }
        let mut parents = vec![0; self.n];
        for j in 0..self.n {
            parents[rho.apply(j)] = rho.map_mask(self.parents[j]);
        }
        Graph::new(self.n, parents)
    }
}

impl fmt::Display for Graph {
    /// `(pa_{n-1}, ..., pa_0)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, j) in (0..self.n).rev().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            fmt_set(f, self.parents[j])?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph{self}")
    }
}

#[derive(Serialize, Deserialize)]
struct GraphRepr {
    n: usize,
    parents: Vec<Vec<usize>>,
}

impl Serialize for Graph {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GraphRepr {
            n: self.n,
            parents: self.parents.iter().map(|&m| members(m)).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Graph {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = GraphRepr::deserialize(d)?;
        if repr.parents.iter().flatten().any(|&k| k >= repr.n) {
            return Err(serde::de::Error::custom("parent index out of range"));
        }
        let masks = repr.parents.iter().map(|p| mask_of(p.iter().copied())).collect();
        Graph::new(repr.n, masks).map_err(serde::de::Error::custom)
    }
}

/// A bijection `j ↦ sigma[j]` on `0..n` with its cached inverse.
///
/// Read as a topological order, `sigma[0]` is the first (root) node and
/// `sigma[k]` has the predecessors `{sigma[0..k]}`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    sigma: Vec<usize>,
    tau: Vec<usize>,
}

impl Permutation {
    pub fn new(sigma: Vec<usize>) -> Result<Self> {
        let n = sigma.len();
        let mut tau = vec![usize::MAX; n];
        for (j, &s) in sigma.iter().enumerate() {
            if s >= n || tau[s] != usize::MAX {
                return Err(Error::InvalidArgument(format!("{sigma:?} is not a permutation")));
            }
            tau[s] = j;
        }
        Ok(Self { sigma, tau })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            sigma: (0..n).collect(),
            tau: (0..n).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.sigma.len()
    }

    /// `j^σ`.
    pub fn apply(&self, j: usize) -> usize {
        self.sigma[j]
    }

    /// `j^τ` with `τ = σ⁻¹`.
    pub fn apply_inverse(&self, j: usize) -> usize {
        self.tau[j]
    }

    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }

    pub fn tau(&self) -> &[usize] {
        &self.tau
    }

    pub fn inverse(&self) -> Permutation {
        Permutation {
            sigma: self.tau.clone(),
            tau: self.sigma.clone(),
        }
    }

    /// `S^σ = { k^σ : k ∈ S }`.
    pub fn map_mask(&self, mask: Mask) -> Mask {
        members(mask).into_iter().fold(0, |m, k| m | (1 << self.sigma[k]))
    }

    pub fn is_identity(&self) -> bool {
        self.sigma.iter().enumerate().all(|(j, &s)| j == s)
    }

    /// All of `Sym_n` in lexicographic order of `sigma`.
    pub fn all(n: usize) -> LexPermutations {
        LexPermutations {
            current: Some((0..n).collect()),
        }
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "σ{:?}", self.sigma)
    }
}

impl Serialize for Permutation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.sigma.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Permutation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let sigma = Vec::<usize>::deserialize(d)?;
        Permutation::new(sigma).map_err(serde::de::Error::custom)
    }
}

/// Lexicographic successor iteration over `Sym_n`.
pub struct LexPermutations {
    current: Option<Vec<usize>>,
}

/// Advances `a` to its lexicographic successor; `false` when `a` was the last.
pub fn next_permutation(a: &mut [usize]) -> bool {
    if a.len() < 2 {
        return false;
    }
    let Some(i) = (0..a.len() - 1).rev().find(|&i| a[i] < a[i + 1]) else {
        return false;
    };
    let k = (i + 1..a.len()).rev().find(|&k| a[k] > a[i]).expect("pivot exists");
    a.swap(i, k);
    a[i + 1..].reverse();
    true
}

impl Iterator for LexPermutations {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        let cur = self.current.take()?;
        let mut succ = cur.clone();
        if next_permutation(&mut succ) {
            self.current = Some(succ);
        }
        Some(Permutation::new(cur).expect("successor of a permutation"))
    }
}

/// True iff the graph with an edge `k → j` for every `k ∈ pa_j` has no
/// directed cycle (self loops count as cycles).
pub fn is_dag(g: &Graph) -> bool {
    let n = g.n();
    let mut indegree: Vec<u32> = g.parent_masks().iter().map(|p| p.count_ones()).collect();
    let mut queue: VecDeque<usize> = (0..n).filter(|&j| indegree[j] == 0).collect();
    let mut removed = 0;
    while let Some(k) = queue.pop_front() {
        removed += 1;
        for j in 0..n {
            if g.parents(j) & (1 << k) != 0 {
                indegree[j] -= 1;
                if indegree[j] == 0 {
                    queue.push_back(j);
                }
            }
        }
    }
    removed == n
}

/// All of `DAG_n = {G : G ⊂ FCG_n}`.
///
/// Order: `pa_{n-1}` varies slowest and `pa_0` fastest; inside one parent set
/// the lower node ids are the more significant digits, so for `n = 3` the
/// third parent set runs through `∅, {1}, {0}, {1,0}`.
pub fn enumerate_dags(n: usize) -> Result<Vec<Graph>> {
    enumerate_dags_bounded(n, DEFAULT_GRAPH_BOUND)
}

pub fn enumerate_dags_bounded(n: usize, bound: usize) -> Result<Vec<Graph>> {
    if n == 0 {
        return Err(Error::InvalidArgument("node count must be positive".into()));
    }
    check_bound("n", n, bound)?;
    let bits: usize = n * (n - 1) / 2;
    if bits >= 40 {
        return Err(Error::SizeBound { what: "n", value: n, limit: 9 });
    }
    let mut out = Vec::with_capacity(1 << bits);
    for code in 0u64..(1u64 << bits) {
        // Digits are consumed from the least significant end: pa_0 (no bits),
        // then pa_1, ..., with each set's highest node id least significant.
        let mut rest = code;
        let mut parents = vec![0; n];
        for (j, pa) in parents.iter_mut().enumerate() {
            for k in (0..j).rev() {
                if rest & 1 == 1 {
                    *pa |= 1 << k;
                }
                rest >>= 1;
            }
        }
        out.push(Graph::new(n, parents)?);
    }
    Ok(out)
}

/// Every labelled DAG on `n` nodes (the union of `DAG_n` over all node
/// orders), in increasing order of the packed parent masks.
pub fn enumerate_labelled_dags(n: usize, bound: usize) -> Result<Vec<Graph>> {
    if n == 0 {
        return Err(Error::InvalidArgument("node count must be positive".into()));
    }
    check_bound("n", n, bound.min(5))?;
    let width = n - 1;
    let mut out = Vec::new();
    for code in 0u64..(1u64 << (n * width)) {
        let parents: Vec<Mask> = (0..n)
            .map(|j| {
                let packed = (code >> (j * width)) & ((1 << width) - 1);
                // skip bit j
                let low = packed & ((1 << j) - 1);
                let high = (packed >> j) << (j + 1);
                low | high
            })
            .collect();
        let g = Graph::new(n, parents)?;
        if is_dag(&g) {
            out.push(g);
        }
    }
    Ok(out)
}

/// `FCG_n^σ`, the graph with `pa_j = {<j^τ}^σ`.
pub fn fcg_sigma(p: &Permutation) -> Graph {
    let n = p.n();
    let parents = (0..n).map(|j| p.map_mask(below(p.apply_inverse(j)))).collect();
    Graph::new(n, parents).expect("permutation image stays in range")
}

/// `G ⊂ FCG_n^σ`.
pub fn consistent(g: &Graph, p: &Permutation) -> bool {
    g.n() == p.n() && g.is_subgraph_of(&fcg_sigma(p))
}

/// `(Sym_n)_G`, in lexicographic order.
pub fn sym_g(g: &Graph) -> Result<Vec<Permutation>> {
    sym_g_bounded(g, DEFAULT_PERM_BOUND)
}

pub fn sym_g_bounded(g: &Graph, bound: usize) -> Result<Vec<Permutation>> {
    check_bound("n", g.n(), bound)?;
    Ok(Permutation::all(g.n()).filter(|p| consistent(g, p)).collect())
}

/// All `l`-element subsets of `{0..n-1}`, first element varying slowest.
pub fn combinations(n: usize, l: usize) -> Result<Vec<Vec<usize>>> {
    if l > n {
        return Err(Error::InvalidArgument(format!("cannot choose {l} of {n}")));
    }
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..l).collect();
    loop {
        out.push(idx.clone());
        // rightmost position that can still be advanced
        let Some(i) = (0..l).rev().find(|&i| idx[i] < n - l + i) else {
            break;
        };
        idx[i] += 1;
        for k in i + 1..l {
            idx[k] = idx[k - 1] + 1;
        }
    }
    Ok(out)
}

/// `l`-subsets of `elems` (ascending input), as masks, in the same order as
/// [`combinations`].
pub fn combination_masks(elems: &[usize], l: usize) -> Result<Vec<Mask>> {
    Ok(combinations(elems.len(), l)?
        .into_iter()
        .map(|c| mask_of(c.into_iter().map(|i| elems[i])))
        .collect())
}

/// Per-node factor `1_{F_j}` of a modular feature set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NodeFeature {
    Any,
    /// `pa_j` must contain the given node.
    Contains(usize),
    /// `pa_j` must be one of the listed masks.
    Allowed(BTreeSet<Mask>),
}

impl NodeFeature {
    pub fn allows(&self, pa: Mask) -> bool {
        match self {
            NodeFeature::Any => true,
            NodeFeature::Contains(k) => pa & (1 << k) != 0,
            NodeFeature::Allowed(set) => set.contains(&pa),
        }
    }
}

/// `F = ⊗_j F_j`, with indicator `1_F(G) = Π_j 1_{F_j}(pa_j)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModularFeatureSet {
    n: usize,
    per_node: Vec<NodeFeature>,
}

impl ModularFeatureSet {
    pub fn new(per_node: Vec<NodeFeature>) -> Result<Self> {
        let n = per_node.len();
        if n == 0 || n > MAX_NODES {
            return Err(Error::InvalidFeature(format!("node count {n} outside 1..=64")));
        }
        for f in &per_node {
            match f {
                NodeFeature::Contains(k) if *k >= n => {
                    return Err(Error::InvalidFeature(format!("node {k} out of range")))
                }
                NodeFeature::Allowed(set) if set.iter().any(|m| m & !full_mask(n) != 0) => {
                    return Err(Error::InvalidFeature("allowed mask out of range".into()))
                }
                _ => {}
            }
        }
        Ok(Self { n, per_node })
    }

    /// `F = B_n`.
    pub fn trivial(n: usize) -> Self {
        Self {
            n,
            per_node: vec![NodeFeature::Any; n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn node(&self, j: usize) -> &NodeFeature {
        &self.per_node[j]
    }

    pub fn is_trivial(&self) -> bool {
        self.per_node.iter().all(|f| *f == NodeFeature::Any)
    }

    pub fn allows(&self, j: usize, pa: Mask) -> bool {
        self.per_node[j].allows(pa)
    }

    pub fn indicator(&self, g: &Graph) -> bool {
        g.n() == self.n && (0..self.n).all(|j| self.allows(j, g.parents(j)))
    }

    /// Flips `1_{F_j}` for one node, leaving the others untouched.
    pub fn complement_at(&self, j: usize) -> Self {
        let others = full_mask(self.n) & !(1 << j);
        let allowed = subsets(others).filter(|&pa| !self.allows(j, pa)).collect();
        let mut per_node = self.per_node.clone();
        per_node[j] = NodeFeature::Allowed(allowed);
        Self { n: self.n, per_node }
    }

    /// The feature set seen after renaming node `k` to `rho[k]`.
    pub fn relabel(&self, rho: &Permutation) -> Result<Self> {
        if rho.n() != self.n {
            return Err(Error::Dimension("relabeling permutation size".into()));
        }
        let mut per_node = vec![NodeFeature::Any; self.n];
        for (j, f) in self.per_node.iter().enumerate() {
            per_node[rho.apply(j)] = match f {
                NodeFeature::Any => NodeFeature::Any,
                NodeFeature::Contains(k) => NodeFeature::Contains(rho.apply(*k)),
                NodeFeature::Allowed(set) => {
                    NodeFeature::Allowed(set.iter().map(|&m| rho.map_mask(m)).collect())
                }
            };
        }
        Self::new(per_node)
    }

    pub fn from_spec(spec: &FeatureSpec, n: usize) -> Result<Self> {
        match spec {
            FeatureSpec::Trivial => Ok(Self::trivial(n)),
            FeatureSpec::Edge { from, to } => edge_feature(*from, *to, n),
            FeatureSpec::Explicit { allowed } => {
                if allowed.len() != n {
                    return Err(Error::Dimension(format!(
                        "feature lists {} nodes, data has {n}",
                        allowed.len()
                    )));
                }
                Self::new(
                    allowed
                        .iter()
                        .map(|a| match a {
                            None => NodeFeature::Any,
                            Some(masks) => NodeFeature::Allowed(masks.iter().copied().collect()),
                        })
                        .collect(),
                )
            }
        }
    }

    /// Canonical serializable description.
    pub fn to_spec(&self) -> FeatureSpec {
        if self.is_trivial() {
            return FeatureSpec::Trivial;
        }
        let restricted: Vec<usize> = (0..self.n)
            .filter(|&j| self.per_node[j] != NodeFeature::Any)
            .collect();
        if let [to] = restricted[..] {
            if let NodeFeature::Contains(from) = self.per_node[to] {
                return FeatureSpec::Edge { from, to };
            }
        }
        let allowed = (0..self.n)
            .map(|j| match &self.per_node[j] {
                NodeFeature::Any => None,
                f => Some(
                    subsets(full_mask(self.n))
                        .filter(|&pa| f.allows(pa))
                        .collect::<BTreeSet<_>>()
                        .into_iter()
                        .collect(),
                ),
            })
            .collect();
        FeatureSpec::Explicit { allowed }
    }
}

/// Serializable feature description.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum FeatureSpec {
    Trivial,
    Edge {
        from: usize,
        to: usize,
    },
    /// `allowed[j]` lists the permitted parent masks of node `j`; `null`
    /// leaves the node unrestricted.
    Explicit {
        allowed: Vec<Option<Vec<Mask>>>,
    },
}

/// The feature set of graphs containing the edge `j1 → j2`.
pub fn edge_feature(j1: usize, j2: usize, n: usize) -> Result<ModularFeatureSet> {
    if j1 == j2 {
        return Err(Error::InvalidFeature(format!("edge {j1}→{j2} is a self loop")));
    }
    if j1 >= n || j2 >= n {
        return Err(Error::InvalidFeature(format!("edge {j1}→{j2} outside 0..{n}")));
    }
    let mut per_node = vec![NodeFeature::Any; n];
    per_node[j2] = NodeFeature::Contains(j1);
    ModularFeatureSet::new(per_node)
}
