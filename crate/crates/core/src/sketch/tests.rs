use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::graph::{generate, GeneratorSpec, GraphFamily};

#[test]
fn edge_id_is_symmetric_and_names_its_endpoints() {
    let p = SketchParams::new(100, 16, 1);
    let a = p.edge_id(3, 7).unwrap();
    assert_eq!(a, p.edge_id(7, 3).unwrap());
    assert_eq!(a.endpoints(), (3, 7));
    assert_eq!(p.parse(a.value()), Some((3, 7)));
    assert_eq!(p.edge_id(4, 4), Err(SketchError::SelfLoop(4)));
    assert!(matches!(p.edge_id(4, 100), Err(SketchError::NodeOutOfRange { .. })));
    assert_eq!(p.row_bits(), 28);
}

#[test]
fn checks_differ_between_seeds() {
    // 2ℓ = 20 check bits: 10⁴ edges collide about 0.01 times in expectation
    let (p, q) = (SketchParams::new(1024, 16, 1), SketchParams::new(1024, 16, 2));
    let mut same = 0;
    for i in 0..10_000u32 {
        let (u, v) = (i % 1000, 1000 + i % 24);
        if p.edge_id(u, v).unwrap().check == q.edge_id(u, v).unwrap().check {
            same += 1;
        }
    }
    assert!(same <= 2, "{same}");
}

#[test]
fn first_row_takes_half_the_edges() {
    let p = SketchParams::new(1 << 14, 1 << 10, 42);
    let mut hits = 0;
    for i in 0..100_000u32 {
        let (u, v) = (i % 16_000, 16_000 + i / 16_000);
        if p.row_membership(u, v, (i % 7) as usize, 1) {
            hits += 1;
        }
    }
    let freq = hits as f64 / 1e5;
    assert!((freq - 0.5).abs() <= 0.01, "{freq}");
    assert_eq!(p.row_membership(1, 2, 0, 3), p.row_membership(2, 1, 0, 3));
}

#[test]
fn last_row_is_practically_empty() {
    // x = n = 1024: row 100 has probability 2^-100
    let p = SketchParams::new(1024, 1024, 3);
    assert_eq!(p.rows(), 100);
    let hits = (0..100_000u32).filter(|&i| p.row_membership(i % 1000, 1000 + i % 24, 0, 100)).count();
    assert_eq!(hits, 0);
    // row 0 holds every edge
    assert!(p.row_membership(5, 9, 0, 0));
}

#[test]
fn small_scale_is_clamped() {
    let p = SketchParams::new(10, 1, 0);
    assert_eq!(p.x(), 4);
    assert_eq!(p.log_x(), 2);
    assert_eq!(p.rows(), 20);
    assert_eq!(p.multi_rows(), 40);
}

#[test]
fn isolated_edge_cancels() {
    let g = Graph::new(6, vec![(1, 4, 1)]).unwrap();
    let p = SketchParams::new(6, 16, 9);
    for t in 0..p.log_x() {
        let a = Sketch::of_node(p, t, &g, 1);
        let b = Sketch::of_node(p, t, &g, 4);
        assert!(a.xor(&b).unwrap().is_zero());
        assert_eq!(a.xor(&Sketch::zero(p, t)).unwrap(), a);
    }
}

#[test]
fn shapes_must_match() {
    let a = Sketch::zero(SketchParams::new(8, 4, 1), 0);
    assert_eq!(a.xor(&Sketch::zero(SketchParams::new(8, 4, 2), 0)), Err(SketchError::ShapeMismatch));
    assert_eq!(a.xor(&Sketch::zero(SketchParams::new(8, 16, 1), 0)), Err(SketchError::ShapeMismatch));
    assert_eq!(a.xor(&Sketch::zero(SketchParams::new(8, 4, 1), 1)), Err(SketchError::ShapeMismatch));
    let m = MultiSketch::zero(SketchParams::new(8, 4, 1));
    assert!(m.xor(&MultiSketch::zero(SketchParams::new(8, 8, 1))).is_err());
}

#[test]
fn singleton_sketches_xor_to_the_set_sketch() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..500u64 {
        let n = rng.gen_range(2..60);
        let g = generate(&GeneratorSpec::new(GraphFamily::Gnp { n, p: rng.gen_range(0.0..0.3) }), case).unwrap();
        let p = SketchParams::new(n, rng.gen_range(4..64), case);
        let mut nodes: Vec<NodeId> = (0..n as NodeId).collect();
        nodes.shuffle(&mut rng);
        let set = &nodes[..rng.gen_range(1..=n)];
        let t = rng.gen_range(0..p.log_x());
        let mut acc = Sketch::zero(p, t);
        for &v in set {
            acc.xor_assign(&Sketch::of_node(p, t, &g, v)).unwrap();
        }
        assert_eq!(acc, Sketch::of_set(p, t, &g, set), "case {case}");
    }
}

#[test]
fn single_edge_in_row_one_decodes() {
    let p = SketchParams::new(50, 8, 0);
    let (u, v) =
        (0..50u32).flat_map(|u| (u + 1..50).map(move |v| (u, v))).find(|&(u, v)| p.row_membership(u, v, 0, 1)).unwrap();
    let s = Sketch::build(p, 0, [(u, v)]).unwrap();
    assert_eq!(s.rows()[0], p.edge_id(u, v).unwrap().value());
    assert_eq!(s.decode(), Some((u, v)));
    assert_eq!(Sketch::zero(p, 0).decode(), None);
}

#[test]
fn hundred_edge_boundary_decodes_often_and_correctly() {
    let n = 4096;
    let mut ok = 0;
    for seed in 0..1000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let boundary: BTreeSet<(NodeId, NodeId)> =
            std::iter::repeat_with(|| (rng.gen_range(0..64), rng.gen_range(64..n as NodeId))).take(100).collect();
        let p = SketchParams::new(n, 16, seed);
        let s = Sketch::build(p, 0, boundary.iter().copied()).unwrap();
        if let Some(e) = s.decode() {
            assert!(boundary.contains(&e), "seed {seed}: {e:?} not in the boundary");
            ok += 1;
        }
    }
    assert!(ok >= 200, "{ok}");
}

#[test]
fn multi_sketch_round_trips_through_bits() {
    let g = generate(&GeneratorSpec::new(GraphFamily::Gnp { n: 40, p: 0.2 }), 3).unwrap();
    let p = SketchParams::new(40, 32, 11);
    let set: Vec<NodeId> = (0..15).collect();
    let m = MultiSketch::build(p, set.iter().flat_map(|&v| g.neighbors(v).iter().map(move |&(u, _)| (v, u)))).unwrap();
    for t in 0..p.log_x() {
        assert_eq!(*m.sketch(t), Sketch::of_set(p, t, &g, &set));
    }
    let bits = m.to_bits();
    assert_eq!(bits.len(), p.multi_rows() * p.row_bits());
    assert_eq!(MultiSketch::from_bits(p, &bits).unwrap(), m);
    let rows: Vec<u128> = (0..p.multi_rows()).map(|r| m.row(r)).collect();
    assert_eq!(MultiSketch::from_rows(p, &rows).unwrap(), m);
    assert_eq!(row_from_bits(p, &row_to_bits(p, rows[3])), rows[3]);
}

proptest! {
    #[test]
    fn disjoint_union_is_xor(
        edges in proptest::collection::btree_set((0u32..30, 0u32..30), 0..80),
        split in proptest::collection::vec(any::<bool>(), 30),
        seed in any::<u64>(),
    ) {
        let list: Vec<(u32, u32, u64)> = edges.iter().filter(|(u, v)| u < v).map(|&(u, v)| (u, v, 1)).collect();
        let g = Graph::new(30, list).unwrap();
        let a: Vec<NodeId> = (0..30).filter(|&v| split[v as usize]).collect();
        let b: Vec<NodeId> = (0..30).filter(|&v| !split[v as usize] && v % 3 != 0).collect();
        let union: Vec<NodeId> = a.iter().chain(&b).copied().collect();
        let p = SketchParams::new(30, 8, seed);
        for t in 0..p.log_x() {
            let sa = Sketch::of_set(p, t, &g, &a);
            let sb = Sketch::of_set(p, t, &g, &b);
            prop_assert_eq!(sa.xor(&sb).unwrap(), Sketch::of_set(p, t, &g, &union));
        }
    }
}
