//! Randomized connected components in `O(log* n)` phases with range 2.
//!
//! A phase picks a scale `x` small enough that every active component can be
//! handed a block of `y = 10⌈log₂ x⌉²` consecutive nodes, its representatives
//! (`10⌈log₂ x⌉³` in the capacity-optimal variant). The representatives learn
//! the component's neighbours in the meta-graph, build its multi-sketch one
//! row each and publish it. Every node then runs `⌈log₂ x⌉` Boruvka steps on
//! the sketches by itself, the real edges behind those merges are announced,
//! and each component finally announces one random incident edge. Components
//! with no outside edge drop out; the run ends when none is left.
//!
//! While there are too many components for the blocks to fit, a phase is a
//! plain Boruvka step instead: every node broadcasts its lightest edge leaving
//! its component.

mod program;

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub use program::{
    cc_capacity_optimal, cc_logstar, cc_randomized, cc_randomized_from, meta_sketch_phase, MetaSketchRun, PhaseKind,
    RandccOutcome, RandccPhase, RandccRun,
};

use crate::dsu::DisjointSets;
use crate::engine::SetFamily;
use crate::graph::{Graph, NodeId, Partition};
use crate::math::{id_bits, mix_all};
use crate::sketch::{MultiSketch, SketchParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum RandccVariant {
    /// Blocks of `10⌈log₂ x⌉²`; representatives broadcast their rows and
    /// real edges directly.
    LogStar,
    /// Blocks of `10⌈log₂ x⌉³`; rows and edges travel by local and then
    /// global broadcast through the block, so later phases get cheaper.
    CapacityOptimal,
}

impl RandccVariant {
    fn exponent(self) -> u32 {
        match self {
            RandccVariant::LogStar => 2,
            RandccVariant::CapacityOptimal => 3,
        }
    }

    /// Representatives per component at `⌈log₂ x⌉ = k`.
    pub fn rep_size(self, k: u32) -> usize {
        10 * (k as usize).pow(self.exponent())
    }

    /// `⌈log₂ x⌉` for a phase starting with `active` components: the largest
    /// `k ∈ [2, ⌈log₂ n⌉]` with `active · rep_size(k) < n`, or `None` if even
    /// `k = 2` does not fit.
    pub fn choose_scale(self, n: usize, active: usize) -> Option<u32> {
        let top = (id_bits(n) as u32).max(2);
        (2..=top).take_while(|&k| active.saturating_mul(self.rep_size(k)) < n).last()
    }
}

/// Blocks `V_i` of `y` consecutive node ids, one per active component in
/// increasing id order.
#[derive(Debug, PartialEq)]
pub struct RepSets {
    y: usize,
    comps: Vec<NodeId>,
    index_of: Vec<u32>,
    family: Arc<SetFamily>,
}

impl RepSets {
    pub fn new(n: usize, comps: Vec<NodeId>, y: usize) -> Result<Self, String> {
        if comps.len() * y > n {
            return Err(format!("{} blocks of {y} nodes do not fit into {n}", comps.len()));
        }
        let mut index_of = vec![u32::MAX; n];
        for (i, &c) in comps.iter().enumerate() {
            index_of[c as usize] = i as u32;
        }
        let sets = (0..comps.len()).map(|i| ((i * y) as NodeId..((i + 1) * y) as NodeId).collect()).collect();
        let family = SetFamily::new(n, sets).map_err(|e| e.to_string())?;
        Ok(RepSets { y, comps, index_of, family: Arc::new(family) })
    }

    pub fn y(&self) -> usize {
        self.y
    }

    pub fn comps(&self) -> &[NodeId] {
        &self.comps
    }

    pub fn index_of(&self, c: NodeId) -> Option<usize> {
        match self.index_of.get(c as usize) {
            Some(&i) if i != u32::MAX => Some(i as usize),
            _ => None,
        }
    }

    pub fn set(&self, i: usize) -> &[NodeId] {
        self.family.set(i)
    }

    pub fn family(&self) -> &Arc<SetFamily> {
        &self.family
    }

    /// `(i, j)` if `v` is the `j`-th (0-based) node of `V_i`.
    pub fn position(&self, v: NodeId) -> Option<(usize, usize)> {
        let v = v as usize;
        (v < self.comps.len() * self.y).then(|| (v / self.y, v % self.y))
    }
}

/// Active components and the pairs of them joined by at least one edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetaGraph {
    pub nodes: Vec<NodeId>,
    /// `(a, b)` with `a < b`.
    pub edges: BTreeSet<(NodeId, NodeId)>,
}

impl MetaGraph {
    pub fn new(g: &Graph, p: &Partition) -> Self {
        let mut edges = BTreeSet::new();
        for e in g.edges() {
            let (a, b) = (p.component_of(e.u), p.component_of(e.v));
            if a != b && p.is_active(a) && p.is_active(b) {
                edges.insert((a.min(b), a.max(b)));
            }
        }
        MetaGraph { nodes: p.active_ids(), edges }
    }

    pub fn neighbors(&self, c: NodeId) -> Vec<NodeId> {
        let mut out: Vec<NodeId> =
            self.edges.iter().filter(|&&(a, b)| a == c || b == c).map(|&(a, b)| a + b - c).collect();
        out.sort_unstable();
        out
    }
}

/// The multi-sketch of component `c` built straight from the meta-graph.
pub fn meta_sketch_central(meta: &MetaGraph, params: SketchParams, c: NodeId) -> MultiSketch {
    MultiSketch::build(params, meta.neighbors(c).into_iter().map(|d| (c, d)))
        .expect("meta-edges join distinct components")
}

/// Result of [`boruvka_on_sketches`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SketchBoruvka {
    /// New component of each input component (by index): its smallest id.
    pub labels: Vec<NodeId>,
    /// Meta-edges that merged two groups, in the order they did.
    pub used: Vec<(NodeId, NodeId)>,
    /// Successful decodes over all steps.
    pub decoded: usize,
}

/// `⌈log₂ x⌉` Boruvka steps on the meta-graph with components `comps` and
/// multi-sketches `sketches` (same order). Step `t` decodes sketch `t` of
/// each current group, the xor of its members' sketches; a decoded pair
/// counts only if it leaves the group towards another listed component.
pub fn boruvka_on_sketches(comps: &[NodeId], sketches: &[MultiSketch]) -> SketchBoruvka {
    let k = comps.len();
    assert_eq!(k, sketches.len(), "one sketch per component");
    let mut index_of = std::collections::HashMap::with_capacity(k);
    for (i, &c) in comps.iter().enumerate() {
        index_of.insert(c, i as u32);
    }
    let mut d = DisjointSets::new(k);
    let mut acc: Vec<Option<MultiSketch>> = sketches.iter().cloned().map(Some).collect();
    let mut used = Vec::new();
    let mut decoded = 0;
    let steps = sketches.first().map_or(0, |s| s.params().log_x());
    for t in 0..steps {
        let mut found = Vec::new();
        for i in 0..k as u32 {
            if d.find(i) != i {
                continue;
            }
            let Some((a, b)) = acc[i as usize].as_ref().unwrap().sketch(t).decode() else { continue };
            let (Some(&ia), Some(&ib)) = (index_of.get(&a), index_of.get(&b)) else { continue };
            let (ra, rb) = (d.find(ia), d.find(ib));
            if (ra == i) == (rb == i) {
                continue;
            }
            decoded += 1;
            found.push((a, b, ia, ib));
        }
        for (a, b, ia, ib) in found {
            let (ra, rb) = (d.find(ia), d.find(ib));
            if ra == rb {
                continue;
            }
            d.union(ra, rb);
            let root = d.find(ra);
            let other = if root == ra { rb } else { ra };
            let moved = acc[other as usize].take().unwrap();
            acc[root as usize].as_mut().unwrap().xor_assign(&moved).expect("same shape");
            used.push((a, b));
        }
    }
    let mut min_of = vec![NodeId::MAX; k];
    for i in 0..k as u32 {
        let r = d.find(i) as usize;
        min_of[r] = min_of[r].min(comps[i as usize]);
    }
    let labels = (0..k as u32).map(|i| min_of[d.find(i) as usize]).collect();
    SketchBoruvka { labels, used, decoded }
}

/// Orients the forest `used` over `comps` towards the smallest component of
/// each tree. Returns `(child, parent)` for every non-root, sorted by child.
pub fn meta_forest(comps: &[NodeId], used: &[(NodeId, NodeId)]) -> Vec<(NodeId, NodeId)> {
    let mut adj: std::collections::BTreeMap<NodeId, Vec<NodeId>> = comps.iter().map(|&c| (c, Vec::new())).collect();
    for &(a, b) in used {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    let mut seen: BTreeSet<NodeId> = BTreeSet::new();
    let mut out = Vec::new();
    let roots: Vec<NodeId> = adj.keys().copied().collect();
    for root in roots {
        if !seen.insert(root) {
            continue;
        }
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(c) = queue.pop_front() {
            for &d in &adj[&c] {
                if seen.insert(d) {
                    out.push((d, c));
                    queue.push_back(d);
                }
            }
        }
    }
    out.sort_unstable();
    out
}

/// A uniformly random element of `neighbors` for component `comp` in phase
/// `phase`, drawn from the shared seed so the whole block agrees on it.
pub fn random_meta_edge(seed: u64, phase: usize, comp: NodeId, neighbors: &[NodeId]) -> Option<NodeId> {
    if neighbors.is_empty() {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(mix_all(&[seed, 0x7261_6e64, phase as u64, comp as u64]));
    Some(neighbors[rng.gen_range(0..neighbors.len())])
}

#[cfg(test)]
use program::SketchPlan;

#[cfg(test)]
mod tests;
