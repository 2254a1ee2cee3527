use std::collections::BTreeSet;
use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::engine::RunOptions;
use crate::graph::{generate, oracle_msf, GeneratorSpec, GraphFamily};
use crate::math::id_bits;

fn gen(family: GraphFamily, seed: u64) -> Arc<Graph> {
    Arc::new(generate(&GeneratorSpec::new(family), seed).unwrap())
}

/// Random partition whose parts are connected in `g`: grow BFS pieces of
/// random target size.
fn random_fragments(g: &Graph, rng: &mut ChaCha8Rng) -> Partition {
    let n = g.n();
    let mut label = vec![u64::MAX; n];
    for s in 0..n {
        if label[s] != u64::MAX {
            continue;
        }
        let target = rng.gen_range(1..=8);
        let mut queue = std::collections::VecDeque::from([s as NodeId]);
        label[s] = s as u64;
        let mut size = 1;
        while let Some(v) = queue.pop_front() {
            for &(u, _) in g.neighbors(v) {
                if size < target && label[u as usize] == u64::MAX {
                    label[u as usize] = s as u64;
                    size += 1;
                    queue.push_back(u);
                }
            }
        }
    }
    Partition::from_labels(&label)
}

#[test]
fn relevant_edges_of_a_single_node() {
    // node 0 has edges to fragments {1,2}, {3}, {4}; brute force over its edges
    let g = Graph::new(5, vec![(0, 1, 9), (0, 2, 4), (0, 3, 7), (0, 4, 5), (1, 2, 1)]).unwrap();
    let f = Partition::from_labels(&[0, 1, 1, 3, 4]);
    assert_eq!(relevant_edges_local(&g, &[0], 2, &f), vec![EdgeKey::new(0, 2, 4), EdgeKey::new(0, 4, 5)]);
    // every neighbouring fragment once
    assert_eq!(relevant_edges_local(&g, &[0], usize::MAX, &f).len(), 3);
    // the fragment {1,2} has only the two edges to 0, both into fragment 0
    assert_eq!(relevant_edges_local(&g, &[1, 2], 5, &f), vec![EdgeKey::new(0, 2, 4)]);
    let whole = Partition::from_labels(&[0; 5]);
    assert!(relevant_edges_local(&g, &[0, 1, 2, 3, 4], 3, &whole).is_empty());
}

#[test]
fn singleton_selection_is_the_lightest_edge() {
    let g = gen(GraphFamily::Gnp { n: 40, p: 0.2 }, 5);
    let run = select_edges(&g, &Partition::singletons(40), 1, &RunOptions::default()).unwrap();
    for v in 0..40u32 {
        let want: Vec<EdgeKey> = g.incident_edges(v).min().into_iter().collect();
        assert_eq!(*run.known[v as usize], want);
    }
    assert!(run.metrics.beta.iter().all(|&b| b == 1));
    assert!(run.metrics.max_range.iter().all(|&r| r <= 2));
}

#[test]
fn large_fragment_takes_the_grouped_path() {
    let n = 4096;
    let g = gen(GraphFamily::Gnp { n, p: 0.002 }, 11);
    let labels: Vec<u64> = (0..n as u64).map(|v| if v < 1024 { 0 } else { v }).collect();
    let f = Partition::from_labels(&labels);
    let run = select_edges(&g, &f, 4, &RunOptions::default()).unwrap();
    assert_eq!(run.mu, 4);
    assert!(run.levels >= 2);
    assert!(run.metrics.beta.iter().all(|&b| b == 1));
    assert!(run.metrics.max_range.iter().all(|&r| r <= 2));
    let members: Vec<NodeId> = (0..1024).collect();
    let want = relevant_edges_local(&g, &members, 4, &f);
    assert_eq!(want.len(), 4);
    for v in [0usize, 17, 1023] {
        assert_eq!(*run.known[v], want);
    }
}

#[test]
fn selection_matches_central_computation() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for case in 0..1000 {
        let n = rng.gen_range(2..48);
        let p = rng.gen_range(0.0..0.4);
        let g = gen(GraphFamily::Gnp { n, p }, case);
        let f = random_fragments(&g, &mut rng);
        let mu = rng.gen_range(1..6);
        let run = select_edges(&g, &f, mu, &RunOptions::default()).unwrap();
        let members = f.members();
        for v in 0..n as NodeId {
            let c = f.component_of(v);
            let want = relevant_edges_local(&g, &members[c as usize], run.mu, &f);
            assert_eq!(*run.known[v as usize], want, "case {case} node {v}");
        }
    }
}

#[test]
fn isolated_nodes_need_no_phase() {
    for variant in [MsfVariant::Rcast2, MsfVariant::CapacityOptimal, MsfVariant::Lotker] {
        let run = msf_generic(&Arc::new(Graph::empty(6)), variant, &RunOptions::default()).unwrap();
        assert!(run.edges().is_empty());
        assert_eq!(run.phase_count(), 0);
    }
}

#[test]
fn two_nodes_one_edge() {
    let g = Arc::new(Graph::new(2, vec![(0, 1, 3)]).unwrap());
    let run = msf_rcast2(&g, &RunOptions::default()).unwrap();
    assert_eq!(run.edges(), &[EdgeKey::new(0, 1, 3)]);
    assert_eq!(run.phase_count(), 1);
    assert!(run.metrics.max_range.iter().all(|&r| r <= 2));
}

#[test]
fn gnp_512_matches_oracle() {
    let g = gen(GraphFamily::Gnp { n: 512, p: 0.05 }, 2);
    let want = oracle_msf(&g);
    let a = msf_rcast2(&g, &RunOptions::default()).unwrap();
    let b = msf_capacity_optimal(&g, &RunOptions::default()).unwrap();
    let c = msf_lotker(&g, &RunOptions::default()).unwrap();
    assert_eq!(a.edges(), want.as_slice());
    assert_eq!(b.edges(), want.as_slice());
    assert_eq!(c.edges(), want.as_slice());
    assert!(a.metrics.max_range.iter().all(|&r| r <= 2));
    assert!(b.metrics.max_range.iter().all(|&r| r <= 2));
}

/// Smallest fragment that still has an edge leaving it.
fn min_growable(g: &Graph, f: &Partition) -> Option<usize> {
    let sizes = f.sizes();
    g.edges()
        .iter()
        .filter(|e| f.component_of(e.u) != f.component_of(e.v))
        .flat_map(|e| [f.component_of(e.u), f.component_of(e.v)])
        .map(|c| sizes[c as usize])
        .min()
}

/// Replays the phase log and checks that fragments are MSF subtrees that
/// grow as fast as the lemma promises.
fn check_phases(g: &Graph, run: &MsfRun) {
    let oracle: BTreeSet<EdgeKey> = oracle_msf(g).into_iter().collect();
    let mut f = Partition::singletons(g.n());
    for p in run.phases() {
        let before = f.sizes().into_iter().filter(|&s| s > 0).min().unwrap();
        assert!(p.added.iter().all(|e| oracle.contains(e)), "phase {} added a non-forest edge", p.index);
        f = f.merged(&p.added);
        if let Some(after) = min_growable(g, &f) {
            assert!(
                after >= (p.mu_effective + 1) * before,
                "phase {}: {after} < ({} + 1) * {before}",
                p.index,
                p.mu_effective
            );
        }
    }
}

#[test]
fn fragments_grow_by_the_lemma() {
    for seed in 0..10 {
        let g = gen(GraphFamily::Gnp { n: 300, p: 0.02 }, seed);
        check_phases(&g, &msf_rcast2(&g, &RunOptions::default()).unwrap());
        check_phases(&g, &msf_capacity_optimal(&g, &RunOptions::default()).unwrap());
    }
}

#[test]
fn path_stage_one_announcements_shrink() {
    let g = gen(GraphFamily::Path { n: 64 }, 4);
    let run = msf_capacity_optimal(&g, &RunOptions::default()).unwrap();
    assert_eq!(run.edges(), oracle_msf(&g).as_slice());
    let stage_one = MuSchedule::stage_one_phases(64);
    let full = 5 * id_bits(64);
    for (i, p) in run.phases().iter().enumerate().take(stage_one) {
        if p.announced == 0 {
            break;
        }
        // every live fragment has at least 2^i nodes, so slices are that much shorter
        assert!(p.min_fragment >= 1 << i);
        assert!(run.announce_beta(i) <= full.div_ceil(1 << i), "phase {i}: {}", run.announce_beta(i));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn variants_agree_with_the_oracle(n in 2usize..120, p in 0.0f64..0.15, seed in any::<u64>()) {
        let g = gen(GraphFamily::Gnp { n, p }, seed);
        let want = oracle_msf(&g);
        for variant in [MsfVariant::Rcast2, MsfVariant::CapacityOptimal, MsfVariant::Lotker] {
            let run = msf_generic(&g, variant, &RunOptions::default()).unwrap();
            prop_assert_eq!(run.edges(), want.as_slice());
        }
    }
}
