use super::*;
use proptest::prelude::*;

fn bits(s: &str) -> Bits {
    s.parse().unwrap()
}

fn messages_for(n: usize, pairs: &[(NodeId, Bits)]) -> Vec<Option<Bits>> {
    let mut v = vec![None; n];
    for (t, m) in pairs {
        v[*t as usize] = Some(m.clone());
    }
    v
}

#[test]
fn one_transmitter_reaches_everyone_in_two_rounds() {
    let spec = LbSpec { transmitters: vec![5], receivers: (0..8).collect(), bits: 3 };
    let run = run_local_broadcast(8, vec![spec], &messages_for(8, &[(5, bits("101"))]), 4).unwrap();
    assert_eq!(run.metrics.rounds, 2);
    assert_eq!(run.metrics.beta, vec![1, 1]);
    assert!(run.metrics.max_range.iter().all(|&r| r <= 2));
    for got in &run.received {
        assert_eq!(got.as_deref(), Some(&vec![bits("101")]));
    }
}

#[test]
fn double_load_takes_two_repetitions() {
    // |T|·b = 2n
    let n = 8;
    let t: Vec<NodeId> = (0..4).collect();
    let msgs: Vec<(NodeId, Bits)> = t.iter().map(|&v| (v, Bits::from_uint(v as u64 * 5 + 3, 4))).collect();
    let spec = LbSpec { transmitters: t, receivers: (0..8).collect(), bits: 4 };
    let run = run_local_broadcast(n, vec![spec], &messages_for(n, &msgs), 4).unwrap();
    assert_eq!(run.metrics.rounds, 4);
    let want: Vec<Bits> = msgs.into_iter().map(|(_, m)| m).collect();
    assert!(run.received.iter().all(|g| g.as_deref() == Some(&want)));
}

#[test]
fn empty_transmitter_set_is_two_silent_rounds() {
    let spec = LbSpec { transmitters: vec![], receivers: vec![0, 1], bits: 3 };
    let run = run_local_broadcast(4, vec![spec], &[], 4).unwrap();
    assert_eq!(run.metrics.rounds, 2);
    assert_eq!(run.metrics.total_capacity, 0);
    assert_eq!(run.received[0].as_deref(), Some(&vec![]));
    assert_eq!(run.received[3], None);
}

#[test]
fn two_instances_on_disjoint_halves_share_rounds() {
    let n = 16;
    let a = LbSpec { transmitters: (0..8).collect(), receivers: (0..8).collect(), bits: 2 };
    let b = LbSpec { transmitters: (8..16).collect(), receivers: (8..16).collect(), bits: 2 };
    let msgs: Vec<(NodeId, Bits)> = (0..16).map(|v| (v, Bits::from_uint(v as u64 % 4, 2))).collect();
    let run = run_local_broadcast(n, vec![a, b], &messages_for(n, &msgs), 4).unwrap();
    assert_eq!(run.metrics.rounds, 2);
    assert_eq!(run.metrics.beta, vec![1, 1]);
    let first: Vec<Bits> = (0..8).map(|v| Bits::from_uint(v % 4, 2)).collect();
    assert_eq!(run.received[3].as_deref(), Some(&first));
    let second: Vec<Bits> = (8..16).map(|v| Bits::from_uint(v % 4, 2)).collect();
    assert_eq!(run.received[12].as_deref(), Some(&second));
}

#[test]
fn overlapping_instances_are_rejected() {
    let a = LbSpec { transmitters: vec![0], receivers: vec![1, 2], bits: 1 };
    let b = LbSpec { transmitters: vec![3], receivers: vec![2], bits: 1 };
    assert_eq!(LbPlan::new(4, vec![a.clone(), b], 4).unwrap_err(), PlanError::SharedReceiver(2));
    let c = LbSpec { transmitters: vec![0], receivers: vec![3], bits: 1 };
    assert_eq!(LbPlan::new(4, vec![a, c], 4).unwrap_err(), PlanError::SharedTransmitter(0));
}

#[test]
fn repetition_limit_is_enforced() {
    let spec = LbSpec { transmitters: (0..4).collect(), receivers: vec![], bits: 8 };
    assert!(matches!(LbPlan::new(4, vec![spec], 4), Err(PlanError::TooManyRepetitions { needed: 8, limit: 4, .. })));
}

#[test]
fn global_broadcast_chunking() {
    // |S| = b: one bit each
    let m = bits("1100101");
    let run = run_global_broadcast(10, vec![GbSpec { holders: (0..7).collect(), bits: 7 }], std::slice::from_ref(&m))
        .unwrap();
    assert_eq!((run.metrics.rounds, run.metrics.beta.clone()), (1, vec![1]));
    assert_eq!(run.messages[0], m);

    // |S| = 1: the holder sends everything
    let run = run_global_broadcast(10, vec![GbSpec { holders: vec![4], bits: 7 }], std::slice::from_ref(&m)).unwrap();
    assert_eq!(run.metrics.beta, vec![7]);
    assert_eq!(run.messages[0], m);

    // b = 10, |S| = 3: chunks 4, 4, 2
    let m = bits("1011001110");
    let run =
        run_global_broadcast(6, vec![GbSpec { holders: vec![0, 2, 5], bits: 10 }], std::slice::from_ref(&m)).unwrap();
    assert_eq!(run.metrics.beta, vec![4]);
    assert_eq!(run.metrics.per_node_bits, vec![4, 0, 4, 0, 0, 2]);
    assert_eq!(run.messages[0], m);
}

#[test]
fn more_holders_than_bits_leaves_some_silent() {
    let m = bits("10");
    let run =
        run_global_broadcast(5, vec![GbSpec { holders: (0..5).collect(), bits: 2 }], std::slice::from_ref(&m)).unwrap();
    assert_eq!(run.metrics.per_node_bits, vec![1, 1, 0, 0, 0]);
    assert_eq!(run.messages[0], m);
}

fn instance_strategy() -> impl Strategy<Value = (usize, Vec<(Vec<NodeId>, Vec<NodeId>, usize)>, u64)> {
    (4usize..40).prop_flat_map(|n| {
        let k = 1usize..4;
        (Just(n), k, any::<u64>()).prop_map(move |(n, k, seed)| {
            use rand::{seq::SliceRandom, Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut pool_t: Vec<NodeId> = (0..n as NodeId).collect();
            let mut pool_r = pool_t.clone();
            pool_t.shuffle(&mut rng);
            pool_r.shuffle(&mut rng);
            let mut out = Vec::new();
            for i in 0..k {
                let lo_t = i * n / k;
                let hi_t = (i + 1) * n / k;
                let t_len = rng.gen_range(0..=(hi_t - lo_t).min(4));
                let t = pool_t[lo_t..lo_t + t_len].to_vec();
                let r = pool_r[lo_t..hi_t].iter().copied().filter(|_| rng.gen_bool(0.7)).collect();
                let b = if t.is_empty() { 1 } else { rng.gen_range(1..=(2 * n / t.len()).max(1)) };
                out.push((t, r, b));
            }
            (n, out, seed)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]
    #[test]
    fn local_broadcast_is_bit_exact((n, inst, seed) in instance_strategy()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
        let mut messages = vec![None; n];
        let mut specs = Vec::new();
        for (t, r, b) in &inst {
            for &v in t {
                messages[v as usize] = Some(Bits::from_bools((0..*b).map(|_| rng.gen::<bool>())));
            }
            specs.push(LbSpec { transmitters: t.clone(), receivers: r.clone(), bits: *b });
        }
        let run = run_local_broadcast(n, specs.clone(), &messages, 8).unwrap();
        prop_assert!(run.metrics.beta.iter().all(|&b| b <= 1));
        prop_assert!(run.metrics.max_range.iter().all(|&r| r <= 2));
        let reps = specs.iter().map(|s| (s.transmitters.len() * s.bits).div_ceil(n).max(1)).max().unwrap();
        prop_assert_eq!(run.metrics.rounds, 2 * reps);
        for spec in &specs {
            let mut t = spec.transmitters.clone();
            t.sort();
            let want: Vec<Bits> = t.iter().map(|&v| messages[v as usize].clone().unwrap()).collect();
            for &v in &spec.receivers {
                prop_assert_eq!(run.received[v as usize].as_deref(), Some(&want));
            }
        }
    }
}
