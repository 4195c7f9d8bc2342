use fleet_cluster::{
    Autoscaler, ClusterConfig, ClusterState, EdgeRuntime, FragmentId, Node, NodeId, PowerState, Task,
    TaskKind, TaskState, Watermarks,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cluster(n: u32) -> ClusterState {
    let nodes = (0..n)
        .map(|i| {
            let node = Node::new(i, 4.0, 8.0);
            if i == 0 { node.hub() } else { node }
        })
        .collect();
    ClusterState::new(nodes, ClusterConfig::default())
}

fn check_capacity(c: &ClusterState) {
    for n in &c.nodes {
        let used: f64 = c.running_on(n.id).map(|t| t.cpu).sum();
        assert!(used <= n.cpu_capacity + 1e-9, "node {} over capacity: {used}", n.id);
    }
    let draining = c.nodes.iter().any(|n| n.power == PowerState::Draining);
    if !draining {
        assert!(c.allocated_cpu() <= c.cpu_total() + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn capacity_and_zero_priority_hold(seed in any::<u64>(), n_nodes in 1u32..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut c = cluster(n_nodes);
        for f in 0..6u64 {
            let holder = NodeId(rng.gen_range(0..n_nodes));
            c.seed_fragment(FragmentId(f), &[holder]).unwrap();
        }
        for _ in 0..60 {
            if rng.gen_bool(0.5) {
                let frag = FragmentId(rng.gen_range(0..8));
                let u: f64 = rng.gen();
                c.submit(Task::retrain("x", u, [frag], rng.gen_range(1.0..20.0)).unwrap());
            }
            if rng.gen_bool(0.2) {
                c.submit(Task::sensor("s", 1.0, None));
            }
            c.tick();
            check_capacity(&c);
            for t in &c.tasks {
                if t.kind == TaskKind::Retrain && t.level() == 0 {
                    prop_assert_eq!(t.state, TaskState::Pending);
                }
            }
        }
    }

    #[test]
    fn tick_is_pure(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut c = cluster(3);
        for _ in 0..10 {
            c.submit(Task::retrain("x", rng.gen(), [], rng.gen_range(1.0..10.0)).unwrap());
        }
        for _ in 0..5 {
            let mut twin = c.clone();
            let a = c.tick();
            let b = twin.tick();
            prop_assert_eq!(a, b);
            prop_assert_eq!(&c, &twin);
        }
    }

    #[test]
    fn priority_is_monotone(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(fleet_cluster::priority(lo).unwrap() <= fleet_cluster::priority(hi).unwrap());
    }
}

/// Random drain/wake schedules never leave a fragment without a live holder,
/// and the cluster re-replicates to the target once things settle.
#[test]
fn replica_availability_under_random_duty_cycling() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut total_steps = 0;
    for round in 0..20 {
        let mut c = cluster(5);
        for f in 0..12u64 {
            let a = rng.gen_range(0..5);
            let b = (a + rng.gen_range(1..5)) % 5;
            c.seed_fragment(FragmentId(f), &[NodeId(a), NodeId(b)]).unwrap();
        }
        let mut next_fragment = 100 + round * 1000;
        for _ in 0..500 {
            total_steps += 1;
            match rng.gen_range(0..10) {
                0 => {
                    let _ = c.begin_drain(NodeId(rng.gen_range(0..5)));
                }
                1 => {
                    let _ = c.wake(NodeId(rng.gen_range(0..5)));
                }
                2 | 3 => {
                    next_fragment += 1;
                    c.submit(Task::sensor("s", 1.0, Some(FragmentId(next_fragment))));
                }
                _ => {}
            }
            c.tick();
            for f in c.replicas.fragments() {
                assert!(c.live_holders(f) >= 1, "fragment {f} unavailable at tick {}", c.tick);
            }
            check_capacity(&c);
        }
        // Quiesce: wake everything and let replication settle.
        for id in 0..5 {
            let _ = c.wake(NodeId(id));
        }
        for _ in 0..200 {
            c.tick();
        }
        for f in c.replicas.fragments() {
            assert!(c.live_holders(f) >= 2, "fragment {f} under-replicated after quiescence");
        }
    }
    assert!(total_steps >= 10_000);
}

#[test]
fn draining_node_gets_no_new_placements() {
    let mut c = cluster(3);
    c.begin_drain(NodeId(2)).unwrap();
    for _ in 0..20 {
        c.submit(Task::sensor("s", 3.0, None));
    }
    for _ in 0..5 {
        for e in c.tick() {
            if let fleet_cluster::Event::Placed { node, .. } = e {
                assert_ne!(node, NodeId(2));
            }
        }
    }
}

/// Under saturation, higher priority levels never wait longer on average.
#[test]
fn wait_is_monotone_in_priority_under_saturation() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut sums = [0.0f64; 10];
    let mut counts = [0usize; 10];
    for _ in 0..10 {
        let mut rt = EdgeRuntime::new(cluster(4), None);
        for _ in 0..200 {
            for _ in 0..rng.gen_range(0..5) {
                let level = rng.gen_range(0..10) as f64;
                let u = (level / 10.0 + rng.gen_range(-0.04..0.04)).clamp(0.0, 1.0);
                rt.submit(Task::retrain("x", u, [], rng.gen_range(2.0..14.0)).unwrap());
            }
            rt.step();
        }
        rt.run_until_idle(5_000);
        for t in &rt.cluster.tasks {
            sums[t.level() as usize] += t.wait as f64;
            counts[t.level() as usize] += 1;
        }
    }
    let means: Vec<f64> = sums.iter().zip(counts).map(|(s, n)| s / n.max(1) as f64).collect();
    for w in means.windows(2) {
        assert!(w[1] <= w[0] + 1e-9, "wait not monotone: {means:?}");
    }
}

#[test]
fn autoscaled_runtime_uses_less_energy_than_always_on() {
    let build = |scale: bool| {
        let scaler = scale.then(|| Autoscaler::new(Watermarks::default()));
        let mut rt = EdgeRuntime::new(cluster(6), scaler);
        for tick in 0..300u64 {
            if tick % 2 == 0 {
                rt.submit(Task::sensor("s", 1.0, Some(FragmentId(tick))));
            }
            rt.step();
        }
        rt.ledger.total
    };
    let on = build(false);
    let scaled = build(true);
    assert!(scaled < on, "scaled {scaled} vs always-on {on}");
}
