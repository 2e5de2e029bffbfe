//! Full runs: partition, optional setup phase, then `T` policy rounds.

use std::io::Write;

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::bandit::{check_arms, horizon_in_regime, ActionDistribution, Arm};
use crate::graph::{Graph, NodeId};
use crate::partition::{compute_centers_informed, compute_centers_uninformed, Partition};

use super::adversary::LossOracle;
use super::world::{InvariantStats, World};
use super::SimError;

/// Policy randomness is split into two ChaCha streams of the same seed.
const ACTION_STREAM: u64 = 0;
const PARTITION_STREAM: u64 = 1;

fn policy_stream(policy_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(policy_seed);
    rng.set_stream(stream);
    rng
}

/// The generator a run with `policy_seed` hands to the uninformed protocol.
pub fn partition_rng(policy_seed: u64) -> ChaCha8Rng {
    policy_stream(policy_seed, PARTITION_STREAM)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Setting {
    /// Partition computed offline at no step cost.
    Informed,
    /// Partition computed by the distributed protocol; agents play uniformly
    /// at random while it runs.
    Uninformed { n_bar: usize },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Check the per-update distribution sandwich at every center.
    pub debug_invariants: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Setup,
    Center,
    CenterAdjacent,
    Simple,
}

impl Role {
    fn code(self) -> u8 {
        match self {
            Role::Setup => 0,
            Role::Center => 1,
            Role::CenterAdjacent => 2,
            Role::Simple => 3,
        }
    }

    fn of(partition: &Partition, v: NodeId) -> Role {
        match partition.delay[v] {
            0 => Role::Center,
            1 => Role::CenterAdjacent,
            _ => Role::Simple,
        }
    }
}

/// One line of the JSON-lines run log.
#[derive(Debug, Clone, Copy, Serialize)]
struct LogRecord {
    t: u64,
    v: NodeId,
    action: Arm,
    loss: f64,
    role: Role,
    /// Uniform play, either during setup or before a relay's first copy.
    warmup: bool,
}

/// Hashes every (round, agent) record and optionally mirrors it to a log.
struct Transcript<'w> {
    hasher: Sha256,
    log: Option<&'w mut dyn Write>,
}

impl Transcript<'_> {
    fn record(&mut self, rec: LogRecord) -> Result<(), SimError> {
        self.hasher.update(rec.t.to_le_bytes());
        self.hasher.update((rec.v as u64).to_le_bytes());
        self.hasher.update((rec.action as u64).to_le_bytes());
        self.hasher.update(rec.loss.to_bits().to_le_bytes());
        self.hasher.update([rec.role.code(), rec.warmup as u8]);
        if let Some(log) = self.log.as_mut() {
            serde_json::to_writer(&mut **log, &rec).map_err(std::io::Error::from)?;
            log.write_all(b"\n")?;
        }
        Ok(())
    }

    fn finish(self) -> u64 {
        let bytes = self.hasher.finalize();
        u64::from_be_bytes(bytes[..8].try_into().expect("sha256 is 32 bytes"))
    }
}

/// Per-agent and per-arm loss ledger of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub arms: usize,
    pub horizon: u64,
    pub setting: Setting,
    pub policy_seed: u64,
    pub adversary_seed: u64,
    /// Rounds of uniform play before the policy starts; 0 when informed.
    pub setup_steps: u64,
    pub partition: Partition,
    /// `Σ_t ℓ_t(I_t(v))` over setup and policy rounds.
    pub realized_loss: Vec<f64>,
    /// `Σ_t Σ_i p_t^v(i)·ℓ_t(i)` over setup and policy rounds.
    pub semi_loss: Vec<f64>,
    /// Policy rounds only.
    pub policy_realized_loss: Vec<f64>,
    pub policy_semi_loss: Vec<f64>,
    /// `Σ_t ℓ_t(i)` over the full timeline.
    pub arm_loss: Vec<f64>,
    pub policy_arm_loss: Vec<f64>,
    /// Argmin of `arm_loss`, lowest arm on ties.
    pub best_arm: Arm,
    pub policy_best_arm: Arm,
    /// 64-bit digest of the `(t, v, action, loss, role)` transcript.
    pub digest: u64,
    pub invariants: InvariantStats,
    pub luby_calls: usize,
    /// Luby calls whose output was not a maximal 2-independent set.
    pub luby_nonmaximal: usize,
    /// `T >= K² ln K`; the regret bounds are only claimed in this regime.
    pub bounds_applicable: bool,
}

fn argmin(values: &[f64]) -> Arm {
    let mut best = 0;
    for (i, &x) in values.iter().enumerate().skip(1) {
        if x < values[best] {
            best = i;
        }
    }
    best
}

impl RunResult {
    pub fn node_count(&self) -> usize {
        self.realized_loss.len()
    }

    /// Played rounds, setup included.
    pub fn timeline(&self) -> u64 {
        self.setup_steps + self.horizon
    }

    pub fn best_arm_loss(&self) -> f64 {
        self.arm_loss[self.best_arm]
    }

    pub fn policy_best_arm_loss(&self) -> f64 {
        self.policy_arm_loss[self.policy_best_arm]
    }

    /// Realized regret over the full timeline.
    pub fn regret(&self, v: NodeId) -> f64 {
        self.realized_loss[v] - self.best_arm_loss()
    }

    pub fn semi_regret(&self, v: NodeId) -> f64 {
        self.semi_loss[v] - self.best_arm_loss()
    }

    /// Regret of the policy rounds against the best arm of those rounds.
    pub fn policy_regret(&self, v: NodeId) -> f64 {
        self.policy_realized_loss[v] - self.policy_best_arm_loss()
    }

    pub fn policy_semi_regret(&self, v: NodeId) -> f64 {
        self.policy_semi_loss[v] - self.policy_best_arm_loss()
    }
}

pub fn run_informed(
    g: &Graph,
    arms: usize,
    horizon: u64,
    oracle: &LossOracle,
    policy_seed: u64,
    opts: RunOptions,
) -> Result<RunResult, SimError> {
    run(g, arms, horizon, Setting::Informed, oracle, policy_seed, opts, None)
}

pub fn run_uninformed(
    g: &Graph,
    arms: usize,
    n_bar: usize,
    horizon: u64,
    oracle: &LossOracle,
    policy_seed: u64,
    opts: RunOptions,
) -> Result<RunResult, SimError> {
    run(
        g,
        arms,
        horizon,
        Setting::Uninformed { n_bar },
        oracle,
        policy_seed,
        opts,
        None,
    )
}

/// General entry point; `log` receives one JSON object per agent per round.
#[allow(clippy::too_many_arguments)]
pub fn run(
    g: &Graph,
    arms: usize,
    horizon: u64,
    setting: Setting,
    oracle: &LossOracle,
    policy_seed: u64,
    opts: RunOptions,
    log: Option<&mut dyn Write>,
) -> Result<RunResult, SimError> {
    check_arms(arms)?;
    if oracle.arms() != arms {
        return Err(SimError::ArmsMismatch {
            adversary: oracle.arms(),
            run: arms,
        });
    }
    let bounds_applicable = horizon_in_regime(arms, horizon);
    if !bounds_applicable {
        warn!("T = {horizon} is below K² ln K for K = {arms}; regret bounds do not apply");
    }

    let mut action_rng = policy_stream(policy_seed, ACTION_STREAM);
    let mut partition_rng = partition_rng(policy_seed);

    let (partition, setup_steps, luby_calls, luby_nonmaximal) = match setting {
        Setting::Informed => {
            let informed = compute_centers_informed(g, arms)?;
            (informed.components.to_partition()?, 0, 0, 0)
        }
        Setting::Uninformed { n_bar } => {
            let un = compute_centers_uninformed(g, arms, n_bar, horizon, &mut partition_rng)?;
            let nonmaximal = un
                .luby_calls
                .iter()
                .filter(|c| !g.is_r_mis(&c.transcript.joined, &c.universe, 2))
                .count();
            let calls = un.luby_calls.len();
            (un.components.to_partition()?, un.setup_steps, calls, nonmaximal)
        }
    };

    let n = g.node_count();
    let mut transcript = Transcript {
        hasher: Sha256::new(),
        log,
    };
    let mut realized_loss = vec![0.0; n];
    let mut semi_loss = vec![0.0; n];
    let mut arm_loss = vec![0.0; arms];
    let mut losses = vec![0.0; arms];

    let uniform = ActionDistribution::uniform(arms);
    for t in 0..setup_steps {
        oracle.losses_into(t, &mut losses);
        let mean = uniform.expected_loss(&losses);
        for v in g.nodes() {
            let action = uniform.sample(action_rng.gen::<f64>());
            realized_loss[v] += losses[action];
            semi_loss[v] += mean;
            transcript.record(LogRecord {
                t,
                v,
                action,
                loss: losses[action],
                role: Role::Setup,
                warmup: true,
            })?;
        }
        for (total, l) in arm_loss.iter_mut().zip(&losses) {
            *total += l;
        }
    }

    let mut world = World::new(g, &partition, arms, horizon, action_rng, opts.debug_invariants)?;
    let mut policy_realized_loss = vec![0.0; n];
    let mut policy_semi_loss = vec![0.0; n];
    let mut policy_arm_loss = vec![0.0; arms];
    for s in 0..horizon {
        let t = setup_steps + s;
        oracle.losses_into(t, &mut losses);
        let warming: Vec<bool> = g.nodes().map(|v| world.is_warming_up(v)).collect();
        let messages = world.advance_round(&losses)?;
        for m in &messages {
            let v = m.sender;
            let semi = m.distribution.expected_loss(&losses);
            realized_loss[v] += m.loss;
            semi_loss[v] += semi;
            policy_realized_loss[v] += m.loss;
            policy_semi_loss[v] += semi;
            transcript.record(LogRecord {
                t,
                v,
                action: m.action,
                loss: m.loss,
                role: Role::of(&partition, v),
                warmup: warming[v],
            })?;
        }
        for ((total, policy), l) in arm_loss.iter_mut().zip(&mut policy_arm_loss).zip(&losses) {
            *total += l;
            *policy += l;
        }
    }

    let invariants = *world.stats();
    Ok(RunResult {
        arms,
        horizon,
        setting,
        policy_seed,
        adversary_seed: oracle.seed(),
        setup_steps,
        partition,
        realized_loss,
        semi_loss,
        policy_realized_loss,
        policy_semi_loss,
        best_arm: argmin(&arm_loss),
        policy_best_arm: argmin(&policy_arm_loss),
        arm_loss,
        policy_arm_loss,
        digest: transcript.finish(),
        invariants,
        luby_calls,
        luby_nonmaximal,
        bounds_applicable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;

    #[test]
    fn argmin_prefers_lowest_arm() {
        assert_eq!(argmin(&[3.0, 1.0, 1.0, 2.0]), 1);
        assert_eq!(argmin(&[0.0, 0.0]), 0);
    }

    #[test]
    fn zero_losses_give_zero_regret() {
        let g = gen::path(2);
        let oracle = LossOracle::zeros(2);
        let r = run_informed(&g, 2, 200, &oracle, 4, RunOptions::default()).unwrap();
        assert!(g.nodes().all(|v| r.regret(v) == 0.0 && r.semi_regret(v) == 0.0));
        let r = run_uninformed(&g, 2, 4, 200, &oracle, 4, RunOptions::default()).unwrap();
        assert!(r.setup_steps > 0);
        assert!(g.nodes().all(|v| r.regret(v) == 0.0));
    }

    #[test]
    fn arms_must_match_adversary() {
        let g = gen::path(3);
        let oracle = LossOracle::zeros(3);
        assert!(matches!(
            run_informed(&g, 2, 10, &oracle, 0, RunOptions::default()),
            Err(SimError::ArmsMismatch { .. })
        ));
    }

    #[test]
    fn log_lines_match_ledger() {
        let g = gen::star(3);
        let oracle = LossOracle::bernoulli(vec![0.3, 0.6, 0.9], 2).unwrap();
        let mut buf = Vec::new();
        let r = run(
            &g,
            3,
            50,
            Setting::Uninformed { n_bar: 4 },
            &oracle,
            9,
            RunOptions::default(),
            Some(&mut buf),
        )
        .unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<serde_json::Value> =
            text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        assert_eq!(lines.len() as u64, r.timeline() * 4);
        assert_eq!(lines[0]["role"], "setup");
        assert_eq!(lines.last().unwrap()["warmup"], false);
        let mut charged = [0.0; 4];
        for l in &lines {
            charged[l["v"].as_u64().unwrap() as usize] += l["loss"].as_f64().unwrap();
        }
        assert_eq!(charged.to_vec(), r.realized_loss);
    }
}
