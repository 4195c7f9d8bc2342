//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion.
//! Failures are reported but only fail the process when
//! `ACCEPTANCE_STRICT` is set.

use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use fleet_cli::commands::{bench, campaign, shape};
use fleet_cli::{setup, MissionConfig};
use fleet_cluster::{
    apportion, priority, ClusterConfig, ClusterState, FragmentId, Node, NodeId, Task, TaskState, PRIORITY_STEP,
};
use fleet_core::apps::camera::{build_correlations, track_query, CorrelationModel, DayIndex, Sighting, Visit};
use fleet_core::apps::crop::{gen_field, CropEval, CropMap};
use fleet_core::mission::{partition_states, run_mission, EdgeConfig, MissionOptions};
use fleet_core::online::project_to_simplex;
use fleet_core::shaping::{build_reward, ei_gaussian, evaluate_spec, BoSettings, CandidateSource};
use fleet_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn pass_if(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn pool() -> rayon::ThreadPool {
    setup::thread_pool().expect("thread pool")
}

fn crop_config() -> MissionConfig {
    MissionConfig { agents: 4, seeds: 10, ..MissionConfig::default() }
}

/// Criteria 1, 2 and 6 share one matched-seed crop bench.
fn crop_bench() -> (bench::CropBench, f64) {
    let t0 = Instant::now();
    let cfg = crop_config();
    let policy = bench::bench_policy(&cfg).expect("shaping");
    let b = bench::crop_bench(&cfg, &policy, &pool()).expect("crop bench");
    (b, t0.elapsed().as_secs_f64())
}

fn swarm_speedup(b: &bench::CropBench, secs: f64) -> Check {
    let s = b.mean.speedup();
    pass_if(
        s >= 3.0 && secs < 120.0,
        format!("single {:.1} vs 4-agent {:.1} steps, speedup {s:.2} (need >= 3.0), {secs:.0}s", b.mean.steps_single, b.mean.steps_fleet),
    )
}

fn coverage_efficiency(b: &bench::CropBench) -> Check {
    let (c, a) = (b.mean.coverage_vs_classic(), b.mean.coverage_vs_automated());
    pass_if(
        c <= 0.75 && a <= 0.60,
        format!(
            "coverage fleet {:.3}, classic {:.3}, automated {:.3}; ratios {c:.3} (<= 0.75), {a:.3} (<= 0.60)",
            b.mean.coverage_fleet, b.mean.coverage_classic, b.mean.coverage_automated
        ),
    )
}

fn online_improvement() -> Check {
    let target = 0.85;
    let cfg = MissionConfig {
        agents: 4,
        missions: 10,
        online: true,
        goals: vec![Goal::at_least(metric::ACCURACY, target)],
        ..MissionConfig::default()
    };
    let fleet = setup::crop_fleet(&cfg, cfg.agents).unwrap();
    let policy = shape::shape_crop(&cfg, &fleet).unwrap().policy();
    let seeds = 10;
    let runs: Vec<Vec<f64>> = pool().install(|| {
        use rayon::prelude::*;
        (0..seeds)
            .into_par_iter()
            .map(|s| {
                let (out, _) = campaign::crop_campaign(&cfg, &policy, s as u64).unwrap();
                out.reports().map(|r| r.metric(metric::ACCURACY).unwrap()).collect()
            })
            .collect()
    });
    let err = |i: usize| runs.iter().map(|a| (target - a[i]).abs() / target).sum::<f64>() / seeds as f64;
    let (first, last) = (err(0), err(9));
    let gain = 1.0 - last / first;
    pass_if(gain >= 0.05, format!("relative error {first:.4} -> {last:.4}, improvement {:.1}% (need >= 5%)", 100.0 * gain))
}

fn staleness() -> Check {
    let mut cfg = MissionConfig {
        app: fleet_cli::App::Camera,
        seeds: 10,
        goals: vec![Goal::at_least(metric::ACCURACY, 0.9)],
        ..MissionConfig::default()
    };
    cfg.camera.days = 15;
    cfg.camera.drift = 0.1;
    let b = bench::camera_bench(&cfg, &pool()).unwrap();
    let r0 = b.retrained[0];
    let dev = b.retrained.iter().map(|r| (r - r0).abs() / r0).fold(0.0, f64::max);
    let drop = (b.frozen[0] - b.frozen[14]) / b.frozen[0];
    pass_if(
        dev <= 0.02 && drop >= 0.03,
        format!("retrained max deviation {:.2}% (<= 2%), frozen drop by day 14 {:.2}% (>= 3%)", 100.0 * dev, 100.0 * drop),
    )
}

fn priority_scheduling() -> Check {
    let cfg = EdgeConfig { autoscale: false, ..EdgeConfig::default() };
    let (mut sums, mut counts) = ([0.0f64; 10], [0usize; 10]);
    for seed in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rt = cfg.build();
        let mean_work = 8.0;
        let rate = 2.0 * rt.cluster.cpu_total() / mean_work;
        for _ in 0..100 {
            let n = rate.floor() as usize + usize::from(rng.gen::<f64>() < rate.fract());
            for _ in 0..n {
                let level = rng.gen_range(0..10) as f64;
                rt.submit(Task::retrain("load", level / 10.0, [], rng.gen_range(4.0..12.0)).unwrap());
            }
            rt.step();
        }
        rt.run_until_idle(100_000);
        for t in &rt.cluster.tasks {
            assert!(t.state == TaskState::Done || t.state == TaskState::Dropped);
            sums[t.level() as usize] += t.wait as f64;
            counts[t.level() as usize] += 1;
        }
    }
    let mean: Vec<f64> = sums.iter().zip(counts).map(|(s, n)| s / n as f64).collect();
    let low = sums[..3].iter().sum::<f64>() / counts[..3].iter().sum::<usize>() as f64;
    let high = sums[8..].iter().sum::<f64>() / counts[8..].iter().sum::<usize>() as f64;
    let monotone = mean.windows(2).all(|w| w[0] >= w[1]);
    pass_if(
        low >= 2.0 * high && monotone,
        format!("wait levels 0-2 {low:.0} vs 8-9 {high:.0} ticks, ratio {:.2} (>= 2.0), monotone {monotone}", low / high),
    )
}

fn autoscaling_energy(b: &bench::CropBench) -> Check {
    let (saving, inflation) = (b.mean.energy_saving(), b.mean.completion_inflation());
    pass_if(
        saving >= 1.4 && inflation <= 1.05,
        format!(
            "always-on {:.0} vs autoscaled {:.0} watt-ticks, ratio {saving:.2} (>= 1.4), completion x{inflation:.3} (<= 1.05)",
            b.mean.energy_always_on, b.mean.energy_autoscaled
        ),
    )
}

fn random_state(rng: &mut ChaCha8Rng, dims: GridDims) -> StateId {
    StateId::new(rng.gen_range(0..dims.height), rng.gen_range(0..dims.width))
}

/// E[max(best - Y, 0)] for Y ~ N(mu, sigma^2) by composite Simpson.
fn ei_quadrature(mu: f64, sigma: f64, best: f64) -> f64 {
    let lo = mu - 12.0 * sigma;
    if best <= lo {
        return 0.0;
    }
    let n = 20_000;
    let h = (best - lo) / n as f64;
    let f = |y: f64| {
        let z = (y - mu) / sigma;
        (best - y) * (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
    };
    let inner: f64 = (1..n).map(|i| f(lo + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 }).sum();
    (f(lo) + f(best) + inner) * h / 3.0
}

fn formula_oracles() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(70);
    let mut bad = Vec::new();
    for _ in 0..1_000 {
        let u: f64 = rng.gen_range(0.0..=1.0);
        let tenths = u * 10.0;
        let level = (if tenths - tenths.floor() >= 0.5 { tenths.floor() + 1.0 } else { tenths.floor() } as u64).min(9);
        if priority(u).unwrap() != level * PRIORITY_STEP {
            bad.push(format!("priority({u})"));
        }
        let levels: Vec<u64> = (0..rng.gen_range(1..10)).map(|_| rng.gen_range(0..10)).collect();
        let ps: Vec<u64> = levels.iter().map(|l| l * PRIORITY_STEP).collect();
        let (cpu, mem) = (rng.gen_range(1..64) as f64, rng.gen_range(1..64) as f64);
        let sum: u64 = levels.iter().sum();
        for (cap, &l) in apportion(&ps, cpu, mem).iter().zip(&levels) {
            let want = if sum == 0 { (0.0, 0.0) } else { (cpu / sum as f64 * l as f64, mem / sum as f64 * l as f64) };
            if (cap.cpu, cap.mem) != want {
                bad.push(format!("apportion {levels:?}"));
            }
        }
    }
    let dims = GridDims::new(6, 6);
    let mut q_err: f64 = 0.0;
    for _ in 0..10_000 {
        let params = LearningParams { alpha: rng.gen_range(0.01..=1.0), gamma: rng.gen_range(0.0..0.99), ..LearningParams::default() };
        let mut table = QTable::new();
        let (s, s2) = (random_state(&mut rng, dims), random_state(&mut rng, dims));
        for a in ActionId::ALL {
            table.set(s2, a, rng.gen_range(-5.0..5.0));
        }
        let a = ActionId::ALL[rng.gen_range(0..5)];
        let old: f64 = rng.gen_range(-5.0..5.0);
        table.set(s, a, old);
        let r: f64 = rng.gen_range(-3.0..3.0);
        let valid = valid_actions(s2, dims);
        let best = valid.iter().map(|&b| table.get(s2, b)).fold(f64::NEG_INFINITY, f64::max);
        let want = old + params.alpha * (r + params.gamma * best - old);
        q_err = q_err.max((q_update(&mut table, s, a, s2, r, &params, &valid) - want).abs());
    }
    let mut ei_err: f64 = 0.0;
    for _ in 0..100 {
        let (mu, sigma, best) = (rng.gen_range(-2.0..2.0), rng.gen_range(0.05..2.0), rng.gen_range(-2.0..2.0));
        ei_err = ei_err.max((ei_gaussian(mu, sigma, best) - ei_quadrature(mu, sigma, best)).abs());
    }
    pass_if(
        bad.is_empty() && q_err <= 1e-12 && ei_err < 1e-4,
        format!("{} priority/apportion mismatches, max q_update error {q_err:.1e}, max EI error {ei_err:.1e}", bad.len()),
    )
}

struct FirstChannel;

impl MapFn<f64> for FirstChannel {
    fn n_features(&self) -> usize {
        1
    }

    fn map(&self, raw: &[f64]) -> Result<Vec<f64>> {
        Ok(vec![raw[0].clamp(0.0, 1.0)])
    }
}

fn shaping_argmin() -> bool {
    let dims = GridDims::new(2, 2);
    let truth = vec![0.1, 0.9, 0.4, 0.6];
    let contexts = [ExecutionContext::new("tiny", dims, 1, truth.clone(), truth).unwrap()];
    let goals = Goals::new(vec![Goal::at_least(metric::ACCURACY, 0.5)]).unwrap();
    let mut fleet: FleetSpec<f64> = FleetSpec::new(1, Arc::new(FirstChannel), Arc::new(CropEval), goals.clone());
    fleet.costs = CostWeights { steps: 0.1, ..CostWeights::default() };
    let grid = vec![
        RewardSpec::new(vec![1.0], 0.5, 1).unwrap(),
        RewardSpec::new(vec![0.5], 1.0, 2).unwrap(),
        RewardSpec::new(vec![0.0], 1.0, 9).unwrap(),
    ];
    let base = QTable::new();
    let settings = BoSettings::default().with_epochs(3);
    let shaped = build_reward(&contexts, &fleet, &base, &settings, &CandidateSource::Grid(grid.clone()), &goals, 9).unwrap();
    let scored: Vec<(f64, bool)> = grid
        .iter()
        .map(|s| evaluate_spec(&fleet, &contexts, &base, s, &goals, &MissionOptions::default(), 9).unwrap())
        .collect();
    let any_met = scored.iter().any(|s| s.1);
    let best = scored.iter().filter(|s| s.1 || !any_met).map(|s| s.0).fold(f64::INFINITY, f64::min);
    let chosen = grid.iter().position(|s| *s == shaped.spec());
    chosen.is_some_and(|c| scored[c].0 == best) && shaped.best_loss == best
}

fn allowed(model: &CorrelationModel, a: usize, j: usize, o: u32) -> bool {
    a == j || (model.spatial(a, j) >= model.spatial_threshold && model.temporal(a, j, o) >= model.temporal_threshold)
}

/// Frames of the target reachable by repeatedly scanning the whole day.
fn scan_all(q: Sighting, model: &CorrelationModel, day: &[Visit]) -> BTreeSet<(usize, u32)> {
    let later: Vec<(usize, u32)> =
        day.iter().filter(|x| x.target == q.target && x.minute > q.minute).map(|x| (x.camera, x.minute)).collect();
    let mut found = BTreeSet::new();
    loop {
        let anchors: Vec<(usize, u32)> = std::iter::once((q.camera, q.minute)).chain(found.iter().copied()).collect();
        let grown: Vec<(usize, u32)> = later
            .iter()
            .copied()
            .filter(|f| !found.contains(f))
            .filter(|&(j, m)| anchors.iter().any(|&(a, t)| m > t && m - t <= model.window && allowed(model, a, j, m - t)))
            .collect();
        if grown.is_empty() {
            return found;
        }
        found.extend(grown);
    }
}

fn tracking_matches_scan() -> bool {
    let v = |target, camera, minute| Visit { target, camera, minute };
    let day = vec![
        v(0, 0, 0), v(0, 1, 2), v(0, 2, 3), v(0, 2, 7), v(1, 0, 1), v(1, 1, 2), v(1, 0, 4), v(2, 1, 0),
        v(2, 2, 4), v(2, 0, 5), v(2, 1, 9), v(3, 2, 2), v(3, 0, 3), v(3, 1, 4), v(4, 0, 6), v(4, 2, 8),
    ];
    let index = DayIndex::new(&day, 3).unwrap();
    let base = build_correlations(&day, 3, 4).unwrap();
    let steps = [0.0, 0.1, 0.25, 0.5, 0.75, 1.0, 1.5];
    steps.iter().all(|&s| {
        steps.iter().all(|&t| {
            let model = base.clone().with_thresholds(s, t);
            index.queries().into_iter().all(|q| {
                let got: BTreeSet<(usize, u32)> = track_query(q, &model, &index).unwrap().returned.into_iter().collect();
                got == scan_all(q, &model, &day)
            })
        })
    })
}

fn one_hot_replay() -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(80);
    let dims = GridDims::new(8, 8);
    let tables: Vec<QTable<f64>> = (0..3)
        .map(|_| {
            let mut t = QTable::new();
            for s in dims.states() {
                for a in ActionId::ALL {
                    t.set(s, a, rng.gen_range(-1.0..1.0));
                }
            }
            t
        })
        .collect();
    let ens = ModelEnsemble::new(tables.clone(), vec![0.0, 0.0, 1.0]).unwrap();
    let (mut ra, mut rb) = (ChaCha8Rng::seed_from_u64(5), ChaCha8Rng::seed_from_u64(5));
    (0..1_000).all(|_| {
        let s = random_state(&mut rng, dims);
        let valid = valid_actions(s, dims);
        let eps = rng.gen_range(0.0..0.5);
        ensemble_select(&ens, s, &valid, eps, &mut ra).unwrap() == select_action(&tables[2], s, &valid, eps, &mut rb).unwrap()
    })
}

fn brute_force_equivalence() -> Check {
    let (a, b, c) = (shaping_argmin(), tracking_matches_scan(), one_hot_replay());
    pass_if(a && b && c, format!("shaping argmin {a}, tracking scan {b}, one-hot replay {c}"))
}

fn replica_availability(rng: &mut ChaCha8Rng) -> usize {
    let mut violations = 0;
    let mut steps = 0;
    let mut next = 1_000u64;
    while steps < 10_000 {
        let nodes = (0..5).map(|i| if i == 0 { Node::new(i, 4.0, 8.0).hub() } else { Node::new(i, 4.0, 8.0) }).collect();
        let mut c = ClusterState::new(nodes, ClusterConfig::default());
        for f in 0..12u64 {
            let a = rng.gen_range(0..5);
            c.seed_fragment(FragmentId(f), &[NodeId(a), NodeId((a + rng.gen_range(1..5)) % 5)]).unwrap();
        }
        for _ in 0..500 {
            steps += 1;
            match rng.gen_range(0..10) {
                0 => drop(c.begin_drain(NodeId(rng.gen_range(0..5)))),
                1 => drop(c.wake(NodeId(rng.gen_range(0..5)))),
                2 | 3 => {
                    next += 1;
                    c.submit(Task::sensor("s", 1.0, Some(FragmentId(next))));
                }
                _ => {}
            }
            c.tick();
            violations += c.replicas.fragments().filter(|&f| c.live_holders(f) == 0).count();
        }
    }
    violations
}

fn safety_invariants() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(90);
    let unavailable = replica_availability(&mut rng);

    let (mut escaped, mut over_bound, mut steps, mut round) = (0, 0, 0, 0u64);
    while steps < 10_000 {
        round += 1;
        let ctx = gen_field(rng.gen_range(6..16), rng.gen_range(6..16), rng.gen_range(0..6), round).unwrap();
        let dims = ctx.dims();
        let goals = Goals::new(vec![Goal::at_least(metric::ACCURACY, 0.7)]).unwrap();
        let mut fleet: FleetSpec<f64> = FleetSpec::new(1, Arc::new(CropMap::default()), Arc::new(CropEval), goals);
        let groups = fleet.tiling.n_groups(dims);
        fleet = fleet.with_agents(rng.gen_range(1..=groups.min(5)));
        fleet.learning.gamma = rng.gen_range(0.0..0.95);
        let spec = RewardSpec::new((0..3).map(|_| rng.gen_range(0.0..=1.0)).collect(), rng.gen_range(0.0..4.0), rng.gen_range(0..10)).unwrap();
        let opts = MissionOptions { epsilon: Some(rng.gen_range(0.0..0.6)), ..MissionOptions::default() };
        let out = run_mission(&fleet, &ctx, &[ModelEnsemble::single(QTable::new())], &spec, &opts, None, round).unwrap();
        let bands = partition_states(dims, fleet.tiling, fleet.n_agents).unwrap();
        for t in &out.trace.transitions {
            for s in [t.from, t.to] {
                escaped += usize::from(!bands[t.agent].contains(&group_of(s, dims, fleet.tiling).unwrap()));
            }
        }
        let bound = 3.0 / (1.0 - fleet.learning.gamma) + 1e-9;
        over_bound += out.tables.iter().flat_map(|t| t.entries()).filter(|e| e.q.abs() > bound).count();
        steps += out.trace.transitions.len();
    }

    let mut off_simplex = 0;
    for _ in 0..10_000 {
        let raw: Vec<f64> = (0..rng.gen_range(1..20)).map(|_| rng.gen_range(0.0..1e3)).collect();
        let w = project_to_simplex(&raw).unwrap();
        off_simplex += usize::from((w.iter().sum::<f64>() - 1.0).abs() > 1e-9 || w.iter().any(|&x| x < 0.0));
    }

    let ds = fleet_core::apps::camera::gen_trajectories(12, 40, 1, 0.0, 3).unwrap();
    let index = DayIndex::new(ds.day(0), 12).unwrap();
    let model = build_correlations(ds.day(0), 12, 6).unwrap();
    let queries = index.queries();
    let mut non_monotone = 0;
    for _ in 0..10_000 {
        let q = queries[rng.gen_range(0..queries.len())];
        let (s, t): (f64, f64) = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..0.5));
        let (s2, t2) = (s + rng.gen_range(0.0..0.5), t + rng.gen_range(0.0..0.3));
        let loose = track_query(q, &model.clone().with_thresholds(s, t), &index).unwrap().recall;
        let tight = track_query(q, &model.clone().with_thresholds(s2, t2), &index).unwrap().recall;
        non_monotone += usize::from(tight > loose);
    }
    pass_if(
        unavailable + escaped + over_bound + off_simplex + non_monotone == 0,
        format!(
            "violations: availability {unavailable}, partition {escaped}, Q bound {over_bound}, simplex {off_simplex}, pruning {non_monotone}"
        ),
    )
}

fn fleetsim(args: &[&str], cwd: &Path) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_fleetsim"))
        .args(args)
        .current_dir(cwd)
        .env("FLEETSIM_THREADS", "1")
        .output()
        .expect("fleetsim runs")
        .status
        .code()
        .unwrap_or(-1)
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn determinism() -> Check {
    let tmp = tempfile::tempdir().unwrap();
    let config = r#"{
        "agents": 4, "missions": 3, "cluster": true,
        "field": { "width": 16, "height": 16 },
        "reward": { "weights": [1.0, 0.5, 0.0], "t_u": 2.0, "t_v": 8 },
        "campaign": { "weight_search_epochs": 4 }
    }"#;
    std::fs::write(tmp.path().join("fleet.json"), config).unwrap();
    let mut identical = Vec::new();
    for cmd in ["run", "campaign"] {
        let outs: Vec<Vec<(String, Vec<u8>)>> = ["a", "b"]
            .iter()
            .map(|tag| {
                let out = format!("{cmd}-{tag}");
                let code = fleetsim(&[cmd, "--config", "fleet.json", "--seed", "7", "--out", &out], tmp.path());
                assert!(code == 0 || code == 3, "{cmd} exited with {code}");
                read_dir_sorted(&tmp.path().join(out))
            })
            .collect();
        identical.push(format!("{cmd}: {} files {}", outs[0].len(), if outs[0] == outs[1] { "identical" } else { "differ" }));
        if outs[0] != outs[1] || outs[0].is_empty() {
            return Err(identical.join(", "));
        }
    }
    Ok(identical.join(", "))
}

fn main() {
    let mut failed = 0;
    let mut report = |n: usize, name: &str, res: Check| {
        let (tag, detail) = match res {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {n:>2} {tag} {name}: {detail}");
    };
    let (crop, secs) = crop_bench();
    report(1, "swarm speedup", swarm_speedup(&crop, secs));
    report(2, "coverage efficiency", coverage_efficiency(&crop));
    report(3, "online improvement", online_improvement());
    report(4, "staleness", staleness());
    report(5, "priority scheduling", priority_scheduling());
    report(6, "autoscaling energy", autoscaling_energy(&crop));
    report(7, "formula oracles", formula_oracles());
    report(8, "brute-force equivalence", brute_force_equivalence());
    report(9, "safety invariants", safety_invariants());
    report(10, "determinism", determinism());
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        if std::env::var_os("ACCEPTANCE_STRICT").is_some() {
            std::process::exit(1);
        }
    }
}
