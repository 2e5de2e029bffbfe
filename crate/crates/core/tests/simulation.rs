use coopbandit::bandit::ActionDistribution;
use coopbandit::gen;
use coopbandit::partition::compute_centers_informed;
use coopbandit::sim::report::{individual_bound, neighborhood_bound};
use coopbandit::sim::run::run;
use coopbandit::sim::{
    regret_report, run_informed, run_uninformed, LossOracle, RunOptions, Setting, World,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const DEBUG: RunOptions = RunOptions {
    debug_invariants: true,
};

fn loss_matrix(oracle: &LossOracle, steps: u64) -> Vec<Vec<f64>> {
    (0..steps).map(|t| oracle.losses_at(t)).collect()
}

#[test]
fn identical_inputs_give_identical_results() {
    let g = gen::random_connected(15, 0.1, &mut ChaCha8Rng::seed_from_u64(4));
    let oracle = LossOracle::bernoulli(vec![0.3, 0.5, 0.5, 0.6], 17).unwrap();
    let a = run_uninformed(&g, 4, 30, 2_000, &oracle, 5, DEBUG).unwrap();
    let b = run_uninformed(&g, 4, 30, 2_000, &oracle, 5, DEBUG).unwrap();
    assert_eq!(a, b);
    let c = run_uninformed(&g, 4, 30, 2_000, &oracle, 6, DEBUG).unwrap();
    assert_ne!(a.digest, c.digest);
}

#[test]
fn adversary_ignores_the_policy() {
    let g = gen::star(5);
    let oracle = LossOracle::bernoulli(vec![0.2, 0.5, 0.7], 3).unwrap();
    let before = loss_matrix(&oracle, 500);
    let runs: Vec<_> = (0..4)
        .map(|seed| run_informed(&g, 3, 500, &oracle, seed, RunOptions::default()).unwrap())
        .collect();
    assert_eq!(loss_matrix(&oracle, 500), before);
    for r in &runs[1..] {
        assert_eq!(r.arm_loss, runs[0].arm_loss);
        assert_ne!(r.realized_loss, runs[0].realized_loss);
    }
    let per_arm: Vec<f64> = (0..3).map(|i| before.iter().map(|row| row[i]).sum()).collect();
    assert_eq!(per_arm, runs[0].arm_loss);
}

#[test]
fn relays_replay_the_center_after_their_delay() {
    // path of 7 with K = 2: node 3 is the only center needed, delays 3,2,1,0,1,2,3
    let g = gen::path(7);
    let k = 2;
    let p = compute_centers_informed(&g, k).unwrap().components.to_partition().unwrap();
    let mut world = World::new(&g, &p, k, 10_000, ChaCha8Rng::seed_from_u64(1), true).unwrap();
    let oracle = LossOracle::bernoulli(vec![0.3, 0.7], 2).unwrap();
    let rounds = 60u64;
    let mut played: Vec<Vec<ActionDistribution>> = Vec::new();
    for t in 0..rounds {
        let msgs = world.advance_round(&oracle.losses_at(t)).unwrap();
        played.push(msgs.into_iter().map(|m| m.distribution).collect());
    }
    for v in g.nodes() {
        let (c, d) = (p.center_of[v], p.delay[v]);
        for t in 0..rounds as usize - d {
            assert_eq!(played[t + d][v], played[t][c], "agent {v} at round {}", t + d);
        }
    }
    assert!(world.stats().clean());
}

#[test]
fn ledger_matches_the_log_in_both_settings() {
    let g = gen::random_connected(8, 0.2, &mut ChaCha8Rng::seed_from_u64(11));
    let oracle = LossOracle::bernoulli(vec![0.4, 0.5, 0.6], 8).unwrap();
    for setting in [Setting::Informed, Setting::Uninformed { n_bar: 10 }] {
        let mut log = Vec::new();
        let r = run(&g, 3, 300, setting, &oracle, 2, DEBUG, Some(&mut log)).unwrap();
        let mut charged = vec![0.0; g.node_count()];
        let mut rows = 0u64;
        for line in String::from_utf8(log).unwrap().lines() {
            let rec: serde_json::Value = serde_json::from_str(line).unwrap();
            let t = rec["t"].as_u64().unwrap();
            let arm = rec["action"].as_u64().unwrap() as usize;
            let loss = rec["loss"].as_f64().unwrap();
            assert_eq!(loss, oracle.loss(t, arm));
            charged[rec["v"].as_u64().unwrap() as usize] += loss;
            rows += 1;
        }
        assert_eq!(rows, r.timeline() * g.node_count() as u64);
        assert_eq!(charged, r.realized_loss);
    }
}

#[test]
fn zero_losses_give_zero_regret_regardless_of_setup() {
    let g = gen::path(2);
    let oracle = LossOracle::zeros(2);
    let r = run_uninformed(&g, 2, 50, 1_000, &oracle, 0, DEBUG).unwrap();
    assert!(r.setup_steps > 100);
    let report = regret_report(&g, &r);
    for a in &report.agents {
        assert_eq!((a.regret, a.regret_semi, a.ratio_individual), (0.0, 0.0, 0.0));
    }
}

#[test]
fn dominant_arm_takes_over() {
    let g = gen::random_connected(12, 0.1, &mut ChaCha8Rng::seed_from_u64(2));
    let k = 4;
    let horizon = 20_000;
    let oracle = LossOracle::matrix(vec![vec![0.0, 1.0, 1.0, 1.0]]).unwrap();
    let r = run_informed(&g, k, horizon, &oracle, 3, DEBUG).unwrap();
    assert!(r.invariants.clean());
    assert_eq!(r.best_arm, 0);
    for v in g.nodes() {
        assert!(r.semi_regret(v) < 0.05 * horizon as f64, "agent {v}: {}", r.semi_regret(v));
    }
}

#[test]
fn report_bounds_recompute_from_row_fields() {
    let g = gen::star(6);
    let oracle = LossOracle::bernoulli(vec![0.4, 0.5, 0.5], 1).unwrap();
    let r = run_informed(&g, 3, 5_000, &oracle, 7, DEBUG).unwrap();
    let rep = regret_report(&g, &r);
    for a in &rep.agents {
        let mass = a.mass_m as f64 * (-(a.mass_d as f64) / 6.0).exp();
        assert!((a.bound_individual - individual_bound(3, mass, 5_000)).abs() < 1e-9);
        assert_eq!(a.bound_corollary, neighborhood_bound(3, a.closed_degree, 5_000));
        assert!(a.ratio_individual.is_finite());
    }
    assert!(rep.average.unwrap().inverse_degree_sum_within_alpha);
}

#[test]
fn sandwich_holds_across_random_runs() {
    for (i, g) in gen::graph_sweep(10, 2, 20, 50).iter().enumerate() {
        let oracle = LossOracle::bernoulli(vec![0.3, 0.5, 0.5, 0.5, 0.8], i as u64).unwrap();
        let r = run_informed(g, 5, 1_000, &oracle, i as u64, DEBUG).unwrap();
        assert!(r.invariants.updates_checked > 0);
        assert!(r.invariants.clean(), "graph {i}: {:?}", r.invariants);
        assert!(r.invariants.max_weighted_estimate <= 1.0 + 1e-9);
    }
}
