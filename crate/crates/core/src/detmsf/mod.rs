//! Deterministic minimum spanning forest with range 2.
//!
//! Every phase each fragment `F` learns `E_{F,μ}`, its `μ` lightest relevant
//! edges (the lightest edge to each other fragment, then the `μ` lightest of
//! those), and announces them to everybody. All nodes then merge fragments
//! with Kruskal over the announced edges, skipping an edge when it is heavier
//! than every full list on both of its sides: such an edge may close a cycle
//! through edges nobody announced. Merging along `μ` lightest relevant
//! edges makes every growable fragment at least `μ + 1` times larger than the
//! smallest fragment before the phase, so a doubly exponential schedule
//! finishes in `O(log log n)` phases.

mod msf;
mod schedule;
mod select;

use std::collections::BTreeMap;

pub use msf::{msf_capacity_optimal, msf_generic, msf_lotker, msf_rcast2, MsfOutcome, MsfPhase, MsfRun, MsfVariant};
pub use schedule::MuSchedule;
pub use select::{select_edges, SelectRun};

use crate::graph::{EdgeKey, Graph, NodeId, Partition};

/// The `mu` lightest relevant edges among `edges`, seen from fragment `own`:
/// the lightest edge to each other fragment, then the `mu` smallest by
/// `EdgeKey`. Edges inside `own` are ignored.
pub fn lightest_relevant<I: IntoIterator<Item = EdgeKey>>(
    edges: I,
    fragments: &Partition,
    own: NodeId,
    mu: usize,
) -> Vec<EdgeKey> {
    let mut best: BTreeMap<NodeId, EdgeKey> = BTreeMap::new();
    for e in edges {
        let (a, b) = (fragments.component_of(e.u), fragments.component_of(e.v));
        let target = if a == own { b } else { a };
        if target == own {
            continue;
        }
        best.entry(target).and_modify(|x| *x = (*x).min(e)).or_insert(e);
    }
    let mut out: Vec<EdgeKey> = best.into_values().collect();
    out.sort_unstable();
    out.truncate(mu);
    out
}

/// `E_{A,μ}` computed centrally: the `mu` lightest relevant edges incident to
/// the node set `a`, which must lie inside one fragment.
pub fn relevant_edges_local(g: &Graph, a: &[NodeId], mu: usize, fragments: &Partition) -> Vec<EdgeKey> {
    let Some(&first) = a.first() else { return Vec::new() };
    let own = fragments.component_of(first);
    debug_assert!(a.iter().all(|&v| fragments.component_of(v) == own));
    lightest_relevant(a.iter().flat_map(|&v| g.incident_edges(v)), fragments, own, mu)
}

#[cfg(test)]
mod tests;
