use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::engine::RunOptions;
use crate::graph::{generate, oracle_components, GeneratorSpec, GraphFamily};

fn shared(g: Graph) -> Arc<Graph> {
    Arc::new(g)
}

fn gnp(n: usize, p: f64, seed: u64) -> Arc<Graph> {
    shared(generate(&GeneratorSpec::new(GraphFamily::Gnp { n, p }), seed).unwrap())
}

/// Forest edges are graph edges, acyclic, and span every final component.
fn check_forest(g: &Graph, run: &RandccRun) {
    let p = run.partition();
    let mut d = DisjointSets::new(g.n());
    for &(u, v) in &run.outcome.forest {
        assert!(g.has_edge(u, v), "({u},{v}) is not an edge");
        assert!(d.union(u, v), "({u},{v}) closes a cycle");
    }
    assert_eq!(run.outcome.forest.len(), g.n() - p.count());
}

#[test]
fn scale_is_the_largest_that_fits() {
    let v = RandccVariant::LogStar;
    assert_eq!(v.rep_size(3), 90);
    assert_eq!(RandccVariant::CapacityOptimal.rep_size(3), 270);
    // 1024 nodes: 40 per block at k = 2, 90 at k = 3, 160 at k = 4
    assert_eq!(v.choose_scale(1024, 26), None);
    assert_eq!(v.choose_scale(1024, 25), Some(2));
    assert_eq!(v.choose_scale(1024, 11), Some(3));
    assert_eq!(v.choose_scale(1024, 6), Some(4));
    assert_eq!(v.choose_scale(1024, 1), Some(10));
    assert_eq!(RandccVariant::CapacityOptimal.choose_scale(1024, 12), Some(2));
    assert_eq!(RandccVariant::CapacityOptimal.choose_scale(1024, 13), None);
    assert_eq!(v.choose_scale(30, 1), None);
}

#[test]
fn blocks_are_consecutive() {
    let r = RepSets::new(20, vec![3, 8, 11], 5).unwrap();
    assert_eq!(r.set(1), &[5, 6, 7, 8, 9]);
    assert_eq!(r.index_of(11), Some(2));
    assert_eq!(r.index_of(4), None);
    assert_eq!(r.position(14), Some((2, 4)));
    assert_eq!(r.position(15), None);
    assert!(RepSets::new(20, vec![1, 2, 3], 7).is_err());
}

#[test]
fn distributed_meta_sketches_match_the_central_ones() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for case in 0..200u64 {
        let n = rng.gen_range(200..400);
        let g = gnp(n, rng.gen_range(0.002..0.03), case);
        let k = rng.gen_range(1..=4usize);
        let labels: Vec<u64> = (0..n).map(|_| rng.gen_range(0..k as u64)).collect();
        let mut p = Partition::from_labels(&labels);
        if k > 1 && rng.gen_bool(0.3) {
            let c = p.active_ids()[0];
            p.set_active(c, false);
        }
        let variant = if case % 2 == 0 { RandccVariant::LogStar } else { RandccVariant::CapacityOptimal };
        let log_x = 2;
        if p.active_count() * variant.rep_size(log_x) > n {
            continue;
        }
        let run = meta_sketch_phase(&g, &p, log_x, case, variant, &RunOptions::default()).unwrap();
        let meta = MetaGraph::new(&g, &p);
        assert_eq!(run.comps, meta.nodes);
        for (i, &c) in run.comps.iter().enumerate() {
            assert_eq!(run.sketches[i], meta_sketch_central(&meta, run.params, c), "case {case}, component {c}");
        }
    }
}

#[test]
fn sketch_rounds_take_three_rounds_when_broadcast() {
    let g = gnp(300, 0.02, 1);
    let p = Partition::from_labels(&(0..300).map(|v| v % 3).collect::<Vec<_>>());
    let run = meta_sketch_phase(&g, &p, 2, 5, RandccVariant::LogStar, &RunOptions::default()).unwrap();
    assert_eq!(run.metrics.rounds, 3);
    assert_eq!(run.metrics.beta[2], run.params.row_bits());
}

#[test]
fn boruvka_on_path_sketches_joins_everything_or_nothing_wrong() {
    let comps: Vec<NodeId> = (0..8).collect();
    let meta = MetaGraph { nodes: comps.clone(), edges: (0..7).map(|i| (i, i + 1)).collect() };
    let mut joined_all = 0;
    for seed in 0..200 {
        let params = SketchParams::new(64, 256, seed);
        let sketches: Vec<MultiSketch> = comps.iter().map(|&c| meta_sketch_central(&meta, params, c)).collect();
        let b = boruvka_on_sketches(&comps, &sketches);
        for &(a, c) in &b.used {
            assert!(meta.edges.contains(&(a.min(c), a.max(c))));
        }
        let groups: BTreeSet<NodeId> = b.labels.iter().copied().collect();
        assert_eq!(groups.len(), 8 - b.used.len());
        if groups.len() == 1 {
            joined_all += 1;
            assert_eq!(b.labels, vec![0; 8]);
        }
    }
    assert!(joined_all > 20, "{joined_all}");
}

#[test]
fn boruvka_without_meta_edges_is_a_no_op() {
    let params = SketchParams::new(32, 16, 0);
    let comps = vec![0, 5, 9];
    let sketches = vec![MultiSketch::zero(params); 3];
    let b = boruvka_on_sketches(&comps, &sketches);
    assert_eq!(b.labels, comps);
    assert!(b.used.is_empty());
    assert_eq!(b.decoded, 0);
}

#[test]
fn forest_points_to_the_smallest_component() {
    let f = meta_forest(&[1, 4, 6, 9, 12], &[(9, 4), (6, 9), (12, 1)]);
    assert_eq!(f, vec![(6, 9), (9, 4), (12, 1)]);
}

#[test]
fn random_choice_is_uniform_and_shared() {
    let nb = [3, 8, 21, 40];
    let mut counts = [0usize; 4];
    for phase in 0..10_000 {
        let c = random_meta_edge(99, phase, 7, &nb).unwrap();
        counts[nb.iter().position(|&x| x == c).unwrap()] += 1;
    }
    for k in counts {
        let f = k as f64 / 1e4;
        assert!((f - 0.25).abs() <= 0.02, "{counts:?}");
    }
    assert_eq!(random_meta_edge(1, 2, 3, &nb), random_meta_edge(1, 2, 3, &nb));
    assert_eq!(random_meta_edge(1, 2, 3, &[5]), Some(5));
    assert_eq!(random_meta_edge(1, 2, 3, &[]), None);
}

#[test]
fn edgeless_graph_finishes_in_one_phase() {
    for variant in [RandccVariant::LogStar, RandccVariant::CapacityOptimal] {
        let g = shared(Graph::empty(16));
        let run = cc_randomized(&g, variant, 0, &RunOptions::default()).unwrap();
        assert_eq!(run.phases().len(), 1);
        assert_eq!(run.phases()[0].deactivated, 16);
        assert_eq!(run.partition().count(), 16);
        assert!(run.outcome.forest.is_empty());
    }
}

#[test]
fn star_of_components_merges_in_one_sketch_phase_when_decoding_works() {
    // 8 components of 100 nodes; component 0 touches every other one through
    // three parallel edges, so extraction must pick one per meta-edge
    let n = 800;
    let mut edges = Vec::new();
    for c in 1..8u32 {
        for j in 0..3 {
            edges.push((j, c * 100 + j, 1 + (c * 3 + j) as u64));
        }
    }
    for c in 0..8u32 {
        for j in 0..99 {
            edges.push((c * 100 + j, c * 100 + j + 1, 1000 + (c * 100 + j) as u64));
        }
    }
    let g = shared(Graph::new(n, edges).unwrap());
    let labels: Vec<u64> = (0..n as u64).map(|v| v / 100).collect();
    let start = Partition::from_labels(&labels);
    let mut full = 0;
    for seed in 0..10 {
        let run = cc_randomized_from(&g, RandccVariant::LogStar, seed, start.clone(), Some(1), &RunOptions::default())
            .unwrap();
        let ph = &run.phases()[0];
        assert_eq!(ph.kind, PhaseKind::Sketch);
        assert_eq!(ph.false_meta_edges, 0);
        assert_eq!(ph.real_edges, ph.sketch_merges);
        if ph.sketch_merges == 7 {
            full += 1;
        }
        assert_eq!(run.outcome.forest.len(), 8 - run.partition().count());
        for &(u, v) in &run.outcome.forest {
            assert!(g.has_edge(u, v));
        }
    }
    assert!(full >= 5, "{full}");
}

#[test]
fn matches_the_oracle_on_random_graphs() {
    let mut sketch_phases = 0;
    for seed in 0..4 {
        let g = gnp(1024, 0.002, seed);
        let oracle = oracle_components(&g);
        for variant in [RandccVariant::LogStar, RandccVariant::CapacityOptimal] {
            let run = cc_randomized(&g, variant, seed, &RunOptions::default()).unwrap();
            assert!(run.partition().same_components(&oracle), "{variant:?} seed {seed}");
            check_forest(&g, &run);
            sketch_phases += run.phases().iter().filter(|p| p.kind == PhaseKind::Sketch).count();
        }
    }
    assert!(sketch_phases > 0);
}

#[test]
fn small_graphs_match_the_oracle() {
    let families = [
        GraphFamily::Path { n: 300 },
        GraphFamily::Star { n: 200 },
        GraphFamily::Grid { rows: 12, cols: 20 },
        GraphFamily::Components { k: 5, size: 60, p: 0.05 },
        GraphFamily::Gnp { n: 2, p: 1.0 },
        GraphFamily::Gnp { n: 1, p: 0.0 },
    ];
    for (i, f) in families.into_iter().enumerate() {
        let g = shared(generate(&GeneratorSpec::new(f), i as u64).unwrap());
        for variant in [RandccVariant::LogStar, RandccVariant::CapacityOptimal] {
            let run = cc_randomized(&g, variant, 3, &RunOptions::default()).unwrap();
            assert!(run.partition().same_components(&oracle_components(&g)), "{f:?} {variant:?}");
            check_forest(&g, &run);
        }
    }
}

#[test]
fn phase_log_is_consistent() {
    let g = gnp(1024, 0.003, 9);
    let run = cc_logstar(&g, 9, &RunOptions::default()).unwrap();
    let mut round = 1;
    for (i, ph) in run.phases().iter().enumerate() {
        assert_eq!(ph.index, i + 1);
        assert_eq!(ph.first_round, round);
        assert!(ph.last_round >= ph.first_round);
        round = ph.last_round + 1;
        assert_eq!(ph.active_after, ph.partition_after.active_count());
        assert!(ph.growable_after.unwrap() <= ph.partition_after.count());
        if ph.kind == PhaseKind::Sketch {
            assert_eq!(ph.rep_size, RandccVariant::LogStar.rep_size(ph.log_x.unwrap()));
            assert!(ph.active_before * ph.rep_size < 1024);
        }
    }
    assert_eq!(run.phases().last().unwrap().active_after, 0);
    assert!(round <= run.metrics.rounds + 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn always_exact(n in 1usize..300, p in 0.0f64..0.03, seed in any::<u64>(), capopt in any::<bool>()) {
        let g = gnp(n, p, seed);
        let variant = if capopt { RandccVariant::CapacityOptimal } else { RandccVariant::LogStar };
        let run = cc_randomized(&g, variant, seed, &RunOptions::default()).unwrap();
        prop_assert!(run.partition().same_components(&oracle_components(&g)));
        prop_assert_eq!(run.outcome.forest.len(), n - run.partition().count());
    }
}

#[test]
fn announcement_width_falls_as_the_scale_grows() {
    let n = 1 << 14;
    let widths: Vec<usize> = (2..=5)
        .map(|k| SketchPlan::new(n, vec![0, 1], k, 0, RandccVariant::CapacityOptimal).unwrap().announce_beta())
        .collect();
    assert!(widths.windows(2).all(|w| w[1] < w[0]), "{widths:?}");
    let base = SketchPlan::new(n, vec![0, 1], 5, 0, RandccVariant::LogStar).unwrap();
    assert_eq!(base.announce_beta(), 4 * 14);
}

#[test]
fn sparse_runs_shrink_below_n_over_x() {
    let n = 4096;
    let (mut phases, mut ok) = (0, 0);
    for seed in 0..20 {
        let g = gnp(n, 2.0 / n as f64, seed);
        let run = cc_logstar(&g, seed, &RunOptions::default()).unwrap();
        for p in run.phases().iter().filter(|p| p.kind == PhaseKind::Sketch) {
            phases += 1;
            ok += (p.growable_after.unwrap() as u64 <= n as u64 / p.x.unwrap()) as usize;
        }
    }
    assert!(phases >= 10, "{phases}");
    assert!(ok * 100 >= phases * 95, "{ok}/{phases}");
}
