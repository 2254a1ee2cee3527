use std::collections::VecDeque;

use super::{EdgeKey, Graph, NodeId, Partition};
use crate::dsu::DisjointSets;

/// Connected components by breadth-first search. Every component is active.
pub fn oracle_components(g: &Graph) -> Partition {
    let n = g.n();
    let mut label = vec![NodeId::MAX; n];
    let mut queue = VecDeque::new();
    for s in 0..n as NodeId {
        if label[s as usize] != NodeId::MAX {
            continue;
        }
        // BFS in increasing start order, so `s` is the component minimum.
        label[s as usize] = s;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            for &(u, _) in g.neighbors(v) {
                if label[u as usize] == NodeId::MAX {
                    label[u as usize] = s;
                    queue.push_back(u);
                }
            }
        }
    }
    Partition::from_canonical(label)
}

/// The unique minimum spanning forest under the [`EdgeKey`] order (Kruskal).
/// Returned sorted by `EdgeKey`.
pub fn oracle_msf(g: &Graph) -> Vec<EdgeKey> {
    let mut edges = g.edges().to_vec();
    edges.sort_unstable();
    let mut d = DisjointSets::new(g.n());
    edges.into_iter().filter(|e| d.union(e.u, e.v)).collect()
}

pub fn msf_weight(edges: &[EdgeKey]) -> u64 {
    edges.iter().map(|e| e.w).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GeneratorSpec};
    use proptest::prelude::*;

    /// Minimum spanning forest weight by enumerating every edge subset of size
    /// `n - #components` and keeping the acyclic ones.
    fn brute_force_msf(g: &Graph) -> (u64, Vec<Vec<EdgeKey>>) {
        let target = g.n() - oracle_components(g).count();
        let edges = g.edges();
        let mut best = u64::MAX;
        let mut argmins = Vec::new();
        for mask in 0u32..(1 << edges.len()) {
            if mask.count_ones() as usize != target {
                continue;
            }
            let chosen: Vec<EdgeKey> = (0..edges.len()).filter(|i| mask >> i & 1 == 1).map(|i| edges[i]).collect();
            let mut d = DisjointSets::new(g.n());
            if !chosen.iter().all(|e| d.union(e.u, e.v)) {
                continue;
            }
            let w = msf_weight(&chosen);
            if w < best {
                best = w;
                argmins.clear();
            }
            if w == best {
                argmins.push(chosen);
            }
        }
        (best, argmins)
    }

    #[test]
    fn path_is_one_component() {
        let g = generate(&"path(4)".parse::<GeneratorSpec>().unwrap(), 1).unwrap();
        let p = oracle_components(&g);
        assert_eq!(p.assignment(), &[0, 0, 0, 0]);
        assert_eq!(p.active_ids(), vec![0]);
    }

    #[test]
    fn empty_graph_has_singletons() {
        let p = oracle_components(&Graph::empty(3));
        assert_eq!(p.component_ids(), vec![0, 1, 2]);
    }

    #[test]
    fn block_components_have_block_sizes() {
        let g = generate(&"components(4,8,1)".parse::<GeneratorSpec>().unwrap(), 2).unwrap();
        let p = oracle_components(&g);
        let sizes = p.sizes();
        assert_eq!(p.component_ids(), vec![0, 8, 16, 24]);
        assert!(p.component_ids().iter().all(|&c| sizes[c as usize] == 8));
    }

    #[test]
    fn triangle_distinct_weights() {
        let g = Graph::new(3, [(0, 1, 1), (1, 2, 2), (0, 2, 3)]).unwrap();
        let msf = oracle_msf(&g);
        assert_eq!(msf, vec![EdgeKey::new(0, 1, 1), EdgeKey::new(1, 2, 2)]);
        assert_eq!(brute_force_msf(&g).0, 3);
    }

    #[test]
    fn triangle_equal_weights_breaks_ties_by_endpoints() {
        let g = Graph::new(3, [(0, 1, 4), (1, 2, 4), (0, 2, 4)]).unwrap();
        // every pair of edges is a spanning tree of weight 8; the smallest pair
        // under (w, u, v) is {(0,1), (0,2)}
        let (best, argmins) = brute_force_msf(&g);
        assert_eq!((best, argmins.len()), (8, 3));
        assert_eq!(oracle_msf(&g), vec![EdgeKey::new(0, 1, 4), EdgeKey::new(0, 2, 4)]);
    }

    #[test]
    fn isolated_nodes_have_empty_forest() {
        assert!(oracle_msf(&Graph::empty(5)).is_empty());
    }

    proptest! {
        #[test]
        fn kruskal_matches_enumeration_on_small_graphs(seed in any::<u64>(), n in 1usize..=7, p in 0.0f64..=1.0) {
            let spec = GeneratorSpec::new(crate::graph::GraphFamily::Gnp { n, p });
            let g = generate(&spec, seed).unwrap();
            prop_assume!(g.m() <= 16);
            let msf = oracle_msf(&g);
            let (best, argmins) = brute_force_msf(&g);
            prop_assert_eq!(msf_weight(&msf), best);
            let found = argmins.iter().any(|t| {
                let mut t = t.clone();
                t.sort();
                t == msf
            });
            prop_assert!(found);
        }

        #[test]
        fn msf_is_acyclic_and_spans_components(seed in any::<u64>(), n in 1usize..60, p in 0.0f64..0.2) {
            let g = generate(&GeneratorSpec::new(crate::graph::GraphFamily::Gnp { n, p }), seed).unwrap();
            let msf = oracle_msf(&g);
            let comps = oracle_components(&g);
            prop_assert_eq!(msf.len(), n - comps.count());
            prop_assert!(Partition::from_edges(n, &msf).same_components(&comps));
        }

        #[test]
        fn serialize_parse_identity(seed in any::<u64>(), n in 1usize..40, p in 0.0f64..0.5) {
            let g = generate(&GeneratorSpec::new(crate::graph::GraphFamily::Gnp { n, p }), seed).unwrap();
            prop_assert_eq!(Graph::parse(&g.serialize()).unwrap(), g);
        }
    }
}
