use fleet_cluster::{apportion, priority, PRIORITY_STEP};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Half-up rounding of `10 U` done on decimal digits, clamped to level 9.
fn level_by_hand(u: f64) -> u64 {
    let tenths = u * 10.0;
    let whole = tenths.floor();
    let level = if tenths - whole >= 0.5 { whole + 1.0 } else { whole };
    (level as u64).min(9)
}

#[test]
fn priority_matches_hand_arithmetic() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for i in 0..1_000 {
        // Mix arbitrary reals with exact tenths and half-steps.
        let u = match i % 3 {
            0 => rng.gen_range(0.0..=1.0),
            1 => rng.gen_range(0..=10) as f64 / 10.0,
            _ => (rng.gen_range(0..10) as f64 + 0.5) / 10.0,
        };
        assert_eq!(priority(u).unwrap(), level_by_hand(u) * 100_000_000, "U = {u}");
    }
    assert_eq!(priority(0.73).unwrap(), 700_000_000);
    assert_eq!(priority(1.0).unwrap(), 900_000_000);
    assert!(priority(-0.01).is_err());
    assert!(priority(1.01).is_err());
}

#[test]
fn apportion_matches_hand_arithmetic() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..1_000 {
        let n = rng.gen_range(1..12);
        let levels: Vec<u64> = (0..n).map(|_| rng.gen_range(0..10)).collect();
        let priorities: Vec<u64> = levels.iter().map(|l| l * PRIORITY_STEP).collect();
        let cpu = rng.gen_range(1..64) as f64;
        let mem = rng.gen_range(1..128) as f64;
        let caps = apportion(&priorities, cpu, mem);
        let sum: u64 = levels.iter().sum();
        for (cap, &l) in caps.iter().zip(&levels) {
            let (want_cpu, want_mem) =
                if sum == 0 { (0.0, 0.0) } else { (cpu / sum as f64 * l as f64, mem / sum as f64 * l as f64) };
            assert_eq!(cap.cpu, want_cpu);
            assert_eq!(cap.mem, want_mem);
        }
    }
    let caps = apportion(&[9 * PRIORITY_STEP, PRIORITY_STEP], 10.0, 10.0);
    assert_eq!((caps[0].cpu, caps[1].cpu), (9.0, 1.0));
}
