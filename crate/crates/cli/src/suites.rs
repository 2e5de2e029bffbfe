//! Randomized property suites behind `coopbandit validate`.
//!
//! Every suite is a pure function of its seed. Instance counts:
//! graph-oracles 120 graphs, exp3 2000 updates plus 6 Monte-Carlo cells,
//! partition 200 graphs × K ∈ {2, 5, 10}, luby 100 graphs × 3 K × 4 universes,
//! simulation 12 graphs × 2 settings plus a relay-causality path.

use std::collections::BTreeSet;
use std::fmt;
use std::time::Instant;

use coopbandit::bandit::{
    check_sandwich, estimated_loss, observation_probability, ActionDistribution, Exp3State,
    ObservationEvent,
};
use coopbandit::gen;
use coopbandit::graph::{Graph, NodeId};
use coopbandit::partition::luby::luby_2mis;
use coopbandit::partition::{compute_centers_informed, luby_round_budget, validate_partition};
use coopbandit::sim::run::run;
use coopbandit::sim::{LossOracle, RunOptions, Setting, World};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub const SUITES: [&str; 5] = ["graph-oracles", "exp3", "partition", "luby", "simulation"];

const MAX_WITNESSES: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub witnesses: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub seed: u64,
    pub checks: Vec<SuiteCheck>,
    pub seconds: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&SuiteCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            writeln!(f, "{status} {}/{}: {}", self.suite, c.name, c.detail)?;
            for w in &c.witnesses {
                writeln!(f, "    {w}")?;
            }
        }
        let status = if self.passed() { "PASS" } else { "FAIL" };
        writeln!(f, "{status} suite {} (seed {}, {:.2}s)", self.suite, self.seed, self.seconds)
    }
}

/// Collects failures for one named check.
struct Tally {
    name: String,
    cases: usize,
    failures: usize,
    witnesses: Vec<String>,
}

impl Tally {
    fn new(name: &str) -> Self {
        Tally {
            name: name.to_owned(),
            cases: 0,
            failures: 0,
            witnesses: Vec::new(),
        }
    }

    fn assert(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            if self.witnesses.len() < MAX_WITNESSES {
                self.witnesses.push(witness());
            }
        }
    }

    fn finish(self) -> SuiteCheck {
        SuiteCheck {
            detail: format!("{} cases, {} failures", self.cases, self.failures),
            passed: self.failures == 0,
            name: self.name,
            witnesses: self.witnesses,
        }
    }
}

pub fn run_suite(name: &str, seed: u64) -> Option<SuiteReport> {
    let started = Instant::now();
    let (suite, checks) = match name {
        "graph-oracles" => ("graph-oracles", graph_oracles(seed)),
        "exp3" => ("exp3", exp3(seed)),
        "partition" => ("partition", partition_checks(seed, 200, 50)),
        "luby" => ("luby", luby(seed)),
        "simulation" => ("simulation", simulation(seed)),
        _ => return None,
    };
    Some(SuiteReport {
        suite,
        seed,
        checks,
        seconds: started.elapsed().as_secs_f64(),
    })
}

fn naive_independence_number(g: &Graph) -> usize {
    let n = g.node_count();
    (0u32..1 << n)
        .filter(|&mask| {
            g.edges()
                .all(|(u, v)| mask & (1 << u) == 0 || mask & (1 << v) == 0)
        })
        .map(|mask| mask.count_ones() as usize)
        .max()
        .unwrap_or(0)
}

fn greedy_2mis(g: &Graph, universe: &BTreeSet<NodeId>) -> BTreeSet<NodeId> {
    let mut chosen = BTreeSet::new();
    for &v in universe {
        if g.ball(v, 2).iter().all(|u| !chosen.contains(u)) {
            chosen.insert(v);
        }
    }
    chosen
}

fn graph_oracles(seed: u64) -> Vec<SuiteCheck> {
    let mut alpha = Tally::new("independence_number_matches_enumeration");
    let mut inverse = Tally::new("inverse_degree_sum_within_alpha");
    let mut metric = Tally::new("bfs_is_a_metric");
    let mut multi = Tally::new("multi_source_bfs_is_min_of_sources");
    let mut mis = Tally::new("r_mis_oracle");
    let mut round_trip = Tally::new("edge_list_round_trip");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    for (i, g) in gen::graph_sweep(120, 1, 14, seed).iter().enumerate() {
        let exact = g.independence_number().expect("small graph");
        let naive = naive_independence_number(g);
        alpha.assert(exact == naive, || format!("graph {i}: oracle {exact}, enumeration {naive}"));
        let s: f64 = g.nodes().map(|v| 1.0 / g.closed_degree(v) as f64).sum();
        inverse.assert(s <= exact as f64 + 1e-12, || format!("graph {i}: {s} > {exact}"));

        let dist: Vec<Vec<usize>> = g.nodes().map(|v| g.bfs_from(v)).collect();
        let mut ok = true;
        for u in g.nodes() {
            for v in g.nodes() {
                ok &= dist[u][v] == dist[v][u] && (dist[u][v] == 0) == (u == v);
                for w in g.nodes() {
                    ok &= dist[u][w] <= dist[u][v] + dist[v][w];
                }
            }
        }
        metric.assert(ok, || format!("graph {i}"));

        let sources: Vec<NodeId> = g.nodes().filter(|_| rng.gen_bool(0.3)).collect();
        if !sources.is_empty() {
            let got = g.multi_source_bfs(sources.iter().copied());
            let ok = g
                .nodes()
                .all(|v| got[v] == sources.iter().map(|&s| dist[s][v]).min().unwrap());
            multi.assert(ok, || format!("graph {i}, sources {sources:?}"));
        }

        let universe: BTreeSet<NodeId> = g.nodes().filter(|_| rng.gen_bool(0.6)).collect();
        let greedy = greedy_2mis(g, &universe);
        mis.assert(g.is_r_mis(&greedy, &universe, 2), || {
            format!("graph {i}: greedy {greedy:?} rejected for universe {universe:?}")
        });
        if let Some(&drop) = greedy.iter().next() {
            let mut smaller = greedy.clone();
            smaller.remove(&drop);
            mis.assert(!g.is_r_mis(&smaller, &universe, 2), || {
                format!("graph {i}: {smaller:?} accepted though {drop} can be added")
            });
        }

        let back: Result<Graph, _> = g.to_edge_list().parse();
        round_trip.assert(back.as_ref() == Ok(g), || format!("graph {i}"));
    }
    vec![
        alpha.finish(),
        inverse.finish(),
        metric.finish(),
        multi.finish(),
        mis.finish(),
        round_trip.finish(),
    ]
}

/// Sample mean and standard deviation of `n` estimates `ℓ·B/q` with
/// `B ~ Bernoulli(q)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorSample {
    pub q: f64,
    pub loss: f64,
    pub n: usize,
    pub mean: f64,
    pub std_dev: f64,
}

impl EstimatorSample {
    /// `|mean − ℓ| <= 3·σ̂/√n`.
    pub fn unbiased_within_3_sigma(&self) -> bool {
        (self.mean - self.loss).abs() <= 3.0 * self.std_dev / (self.n as f64).sqrt()
    }
}

pub fn estimator_sample<R: Rng + ?Sized>(q: f64, loss: f64, n: usize, rng: &mut R) -> EstimatorSample {
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..n {
        let observed = rng.gen::<f64>() < q;
        let est = estimated_loss(&ObservationEvent {
            arm: 0,
            observed,
            observe_prob: q,
            loss,
        })
        .expect("q is a valid probability");
        sum += est;
        sum_sq += est * est;
    }
    let mean = sum / n as f64;
    let var = (sum_sq - n as f64 * mean * mean) / (n as f64 - 1.0);
    EstimatorSample {
        q,
        loss,
        n,
        mean,
        std_dev: var.max(0.0).sqrt(),
    }
}

fn random_distribution<R: Rng + ?Sized>(k: usize, rng: &mut R) -> ActionDistribution {
    let logs: Vec<f64> = (0..k).map(|_| rng.gen_range(-8.0..0.0)).collect();
    Exp3State::from_log_weights(logs, 0.1)
        .expect("finite log weights")
        .distribution()
}

fn exp3(seed: u64) -> Vec<SuiteCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sandwich = Tally::new("update_sandwich");
    let mut bounded = Tally::new("weighted_estimate_at_most_one");
    let mut valid = Tally::new("update_keeps_distribution");
    for case in 0..2000 {
        let k = rng.gen_range(2..=10);
        // η <= 1/(2K) holds for every learning rate used when T >= K² ln K
        let eta = rng.gen_range(1e-6..=0.5 / k as f64);
        let state = Exp3State::from_log_weights(
            (0..k).map(|_| rng.gen_range(-6.0..0.0)).collect(),
            eta,
        )
        .expect("finite");
        let own = state.distribution();
        let others: Vec<ActionDistribution> = (0..rng.gen_range(0..6))
            .map(|_| random_distribution(k, &mut rng))
            .collect();
        let hood: Vec<&ActionDistribution> = std::iter::once(&own).chain(&others).collect();
        let played: Vec<usize> = hood.iter().map(|d| d.sample(rng.gen())).collect();
        let losses: Vec<f64> = (0..k).map(|_| rng.gen()).collect();
        let estimates: Vec<f64> = (0..k)
            .map(|arm| {
                estimated_loss(&ObservationEvent {
                    arm,
                    observed: played.contains(&arm),
                    observe_prob: observation_probability(hood.iter().copied(), arm),
                    loss: losses[arm],
                })
                .expect("own distribution keeps q positive")
            })
            .collect();
        for arm in 0..k {
            let w = own.prob(arm) * estimates[arm];
            bounded.assert(w <= 1.0 + 1e-12, || format!("case {case}, arm {arm}: p·ℓ̂ = {w}"));
        }
        match state.update(&estimates) {
            Ok(next) => {
                let after = next.distribution();
                let sum: f64 = after.probs().iter().sum();
                valid.assert((sum - 1.0).abs() < 1e-9, || format!("case {case}: sum {sum}"));
                let v = check_sandwich(&own, &after, &estimates, eta, 1e-9);
                sandwich.assert(v.is_empty(), || format!("case {case}: {v:?}"));
            }
            Err(e) => valid.assert(false, || format!("case {case}: {e}")),
        }
    }

    let mut unbiased = Tally::new("estimator_unbiased_3_sigma");
    for q in [0.1, 0.5, 0.9] {
        for loss in [0.3, 1.0] {
            let s = estimator_sample(q, loss, 100_000, &mut rng);
            unbiased.assert(s.unbiased_within_3_sigma(), || format!("{s:?}"));
        }
    }
    vec![
        sandwich.finish(),
        bounded.finish(),
        valid.finish(),
        unbiased.finish(),
    ]
}

/// Informed partitions of `graphs` random graphs with up to `max_nodes`
/// nodes, for every `K ∈ {2, 5, 10}`.
pub fn partition_checks(seed: u64, graphs: usize, max_nodes: usize) -> Vec<SuiteCheck> {
    let mut structure = Tally::new("partition_properties");
    let mut transcript = Tally::new("component_transcript_invariants");
    for (i, g) in gen::graph_sweep(graphs, 2, max_nodes, seed).iter().enumerate() {
        for k in [2, 5, 10] {
            let informed = match compute_centers_informed(g, k) {
                Ok(r) => r,
                Err(e) => {
                    structure.assert(false, || format!("graph {i}, K={k}: {e}"));
                    continue;
                }
            };
            let violations = informed.components.check_invariants(g);
            transcript.assert(violations.is_empty(), || {
                format!("graph {i}, K={k}: {}", violations.join("; "))
            });
            match informed.components.to_partition() {
                Ok(p) => {
                    let report = validate_partition(g, &p, k);
                    structure.assert(report.all_passed(), || {
                        let failed: Vec<String> = report
                            .failures()
                            .map(|c| format!("{} ({})", c.name, c.witnesses.join("; ")))
                            .collect();
                        format!("graph {i} (N={}), K={k}: {}", g.node_count(), failed.join(", "))
                    });
                }
                Err(e) => structure.assert(false, || format!("graph {i}, K={k}: {e}")),
            }
        }
    }
    vec![structure.finish(), transcript.finish()]
}

/// Largest failure count consistent with independent per-call failure
/// probabilities `ps` at 3σ.
pub fn binomial_allowance(ps: &[f64]) -> f64 {
    let mean: f64 = ps.iter().sum();
    let var: f64 = ps.iter().map(|p| p * (1.0 - p)).sum();
    mean + 3.0 * var.sqrt()
}

fn luby(seed: u64) -> Vec<SuiteCheck> {
    let horizon = 100_000u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut independent = Tally::new("joined_is_2_independent");
    let mut failure_ps = Vec::new();
    let mut nonmaximal = 0usize;
    for g in gen::graph_sweep(100, 2, 50, seed) {
        let n_bar = 2 * g.node_count();
        for k in [2, 5, 10] {
            let budget = luby_round_budget(n_bar, k, horizon);
            for density in [0.2, 0.5, 0.8, 1.0] {
                let universe: BTreeSet<NodeId> =
                    g.nodes().filter(|_| rng.gen_bool(density)).collect();
                let t = luby_2mis(&g, &universe, budget, &mut rng);
                independent.assert(
                    t.joined.is_subset(&universe) && g.is_r_independent(&t.joined, 2),
                    || format!("N={}, universe {universe:?}, joined {:?}", g.node_count(), t.joined),
                );
                failure_ps.push(1.0 / (k as f64 * horizon as f64));
                if !g.is_r_mis(&t.joined, &universe, 2) {
                    nonmaximal += 1;
                }
            }
        }
    }
    let allowance = binomial_allowance(&failure_ps);
    vec![
        independent.finish(),
        SuiteCheck {
            name: "non_maximal_rate".into(),
            passed: nonmaximal as f64 <= allowance,
            detail: format!(
                "{nonmaximal} non-maximal of {} calls, 3σ allowance {allowance:.3}",
                failure_ps.len()
            ),
            witnesses: Vec::new(),
        },
    ]
}

fn simulation(seed: u64) -> Vec<SuiteCheck> {
    let opts = RunOptions {
        debug_invariants: true,
    };
    let mut sandwich = Tally::new("center_update_sandwich");
    let mut determinism = Tally::new("determinism");
    let mut oblivious = Tally::new("obliviousness");
    let mut ledger = Tally::new("ledger_matches_log");
    let mut causality = Tally::new("relay_causality");

    for (i, g) in gen::graph_sweep(12, 2, 15, seed).iter().enumerate() {
        let k = [2, 3, 5][i % 3];
        let means: Vec<f64> = (0..k).map(|a| 0.3 + 0.1 * a as f64).collect();
        let oracle = LossOracle::bernoulli(means, seed.wrapping_add(i as u64)).expect("valid means");
        for setting in [
            Setting::Informed,
            Setting::Uninformed {
                n_bar: 2 * g.node_count(),
            },
        ] {
            let mut log = Vec::new();
            let a = match run(g, k, 2_000, setting, &oracle, i as u64, opts, Some(&mut log)) {
                Ok(r) => r,
                Err(e) => {
                    determinism.assert(false, || format!("graph {i}: {e}"));
                    continue;
                }
            };
            let b = run(g, k, 2_000, setting, &oracle, i as u64, opts, None).expect("ran once");
            let c = run(g, k, 2_000, setting, &oracle, i as u64 + 1, opts, None).expect("ran once");
            sandwich.assert(a.invariants.clean(), || format!("graph {i}: {:?}", a.invariants));
            determinism.assert(a == b, || format!("graph {i} {setting:?}"));
            oblivious.assert(a.arm_loss == c.arm_loss, || format!("graph {i} {setting:?}"));

            let mut charged = vec![0.0; g.node_count()];
            let mut ok = true;
            for line in String::from_utf8_lossy(&log).lines() {
                let rec: serde_json::Value = serde_json::from_str(line).expect("log is JSON");
                let t = rec["t"].as_u64().unwrap_or(0);
                let arm = rec["action"].as_u64().unwrap_or(0) as usize;
                let loss = rec["loss"].as_f64().unwrap_or(f64::NAN);
                ok &= loss == oracle.loss(t, arm);
                charged[rec["v"].as_u64().unwrap_or(0) as usize] += loss;
            }
            ledger.assert(ok && charged == a.realized_loss, || format!("graph {i} {setting:?}"));
        }
    }

    for k in [2, 4] {
        let g = gen::path(9);
        let p = compute_centers_informed(&g, k)
            .and_then(|r| r.components.to_partition())
            .expect("paths partition");
        let mut world = World::new(&g, &p, k, 10_000, ChaCha8Rng::seed_from_u64(seed), true)
            .expect("valid world");
        let oracle = LossOracle::bernoulli(vec![0.5; k], seed).expect("valid means");
        let mut played = Vec::new();
        for t in 0..80 {
            let msgs = world.advance_round(&oracle.losses_at(t)).expect("round");
            played.push(msgs.into_iter().map(|m| m.distribution).collect::<Vec<_>>());
        }
        for v in g.nodes() {
            let (c, d) = (p.center_of[v], p.delay[v]);
            for t in 0..played.len() - d {
                causality.assert(played[t + d][v] == played[t][c], || {
                    format!("K={k}: agent {v} at round {} differs from center {c} at {t}", t + d)
                });
            }
        }
    }

    vec![
        sandwich.finish(),
        determinism.finish(),
        oblivious.finish(),
        ledger.finish(),
        causality.finish(),
    ]
}
