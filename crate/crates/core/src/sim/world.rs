//! One synchronous round of the center-based policy.
//!
//! Each round every agent plays, the losses of the played arms are charged,
//! and every agent broadcasts `⟨v, t, I_t(v), ℓ_t(I_t(v)), p_t^v⟩` to its
//! closed neighborhood. Centers then update their weights from the messages
//! they received, and relays stage their origin's distribution for the next
//! round. Delivery is reliable with exactly one round of latency.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::bandit::{
    check_sandwich, estimated_loss, learning_rate, observation_probability, ActionDistribution,
    Arm, DelayedCopy, Exp3State, ObservationEvent,
};
use crate::graph::{Graph, NodeId};
use crate::partition::Partition;

use super::SimError;

/// Relative slack for the per-update distribution sandwich check.
pub const SANDWICH_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct RoundMessage {
    pub sender: NodeId,
    pub step: u64,
    pub action: Arm,
    pub loss: f64,
    pub distribution: ActionDistribution,
}

#[derive(Debug, Clone, PartialEq)]
enum AgentState {
    Center(Exp3State),
    Relay { origin: NodeId, copy: DelayedCopy },
}

/// Tally of the inline invariant checks run on center updates.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct InvariantStats {
    /// Center updates inspected.
    pub updates_checked: u64,
    /// Arms where `(1 − η·ℓ̂)·p <= p₊ <= 2·p` failed.
    pub sandwich_violations: u64,
    /// Arms where `p·ℓ̂ > 1`.
    pub estimate_violations: u64,
    /// Largest observed `p·ℓ̂`.
    pub max_weighted_estimate: f64,
    /// Arms whose probability had underflowed to zero across a whole
    /// neighborhood. Counted whether or not invariant checks are enabled.
    pub unobservable_arms: u64,
}

impl InvariantStats {
    pub fn clean(&self) -> bool {
        self.sandwich_violations == 0 && self.estimate_violations == 0
    }

    pub fn merge(&mut self, other: &InvariantStats) {
        self.updates_checked += other.updates_checked;
        self.sandwich_violations += other.sandwich_violations;
        self.estimate_violations += other.estimate_violations;
        self.max_weighted_estimate = self.max_weighted_estimate.max(other.max_weighted_estimate);
        self.unobservable_arms += other.unobservable_arms;
    }
}

/// Agents, their policy state and the policy random stream.
#[derive(Debug, Clone)]
pub struct World<'g> {
    graph: &'g Graph,
    arms: usize,
    agents: Vec<AgentState>,
    step: u64,
    rng: ChaCha8Rng,
    debug_invariants: bool,
    stats: InvariantStats,
    scratch_estimates: Vec<f64>,
}

impl<'g> World<'g> {
    /// Centers get `η(c) = ½·sqrt(ln K · M(c) / (K·T))`; everyone else relays
    /// from its origin neighbor.
    pub fn new(
        graph: &'g Graph,
        partition: &Partition,
        arms: usize,
        horizon: u64,
        rng: ChaCha8Rng,
        debug_invariants: bool,
    ) -> Result<Self, SimError> {
        if partition.node_count() != graph.node_count() {
            return Err(SimError::PartitionMismatch {
                partition: partition.node_count(),
                graph: graph.node_count(),
            });
        }
        let agents = graph
            .nodes()
            .map(|v| {
                if partition.is_center(v) {
                    let eta = learning_rate(partition.mass[v].value(), arms, horizon)?;
                    Ok(AgentState::Center(Exp3State::new(arms, eta)?))
                } else {
                    Ok(AgentState::Relay {
                        origin: partition.origin_of[v],
                        copy: DelayedCopy::new(arms),
                    })
                }
            })
            .collect::<Result<Vec<_>, SimError>>()?;
        Ok(World {
            graph,
            arms,
            agents,
            step: 0,
            rng,
            debug_invariants,
            stats: InvariantStats::default(),
            scratch_estimates: vec![0.0; arms],
        })
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn stats(&self) -> &InvariantStats {
        &self.stats
    }

    pub fn into_rng(self) -> ChaCha8Rng {
        self.rng
    }

    /// Distribution agent `v` will play in the next round.
    pub fn distribution(&self, v: NodeId) -> ActionDistribution {
        match &self.agents[v] {
            AgentState::Center(exp3) => exp3.distribution(),
            AgentState::Relay { copy, .. } => copy.current(),
        }
    }

    /// `true` for a relay that has not yet received any distribution.
    pub fn is_warming_up(&self, v: NodeId) -> bool {
        matches!(&self.agents[v], AgentState::Relay { copy, .. } if copy.is_warming_up())
    }

    pub fn exp3(&self, v: NodeId) -> Option<&Exp3State> {
        match &self.agents[v] {
            AgentState::Center(exp3) => Some(exp3),
            AgentState::Relay { .. } => None,
        }
    }

    /// Plays one synchronous round against the loss vector `losses` and
    /// returns the messages every agent broadcast, indexed by sender.
    pub fn advance_round(&mut self, losses: &[f64]) -> Result<Vec<RoundMessage>, SimError> {
        let step = self.step;
        let messages: Vec<RoundMessage> = self
            .graph
            .nodes()
            .map(|v| {
                let distribution = self.distribution(v);
                let action = distribution.sample(self.rng.gen::<f64>());
                RoundMessage {
                    sender: v,
                    step,
                    action,
                    loss: losses[action],
                    distribution,
                }
            })
            .collect();

        for v in self.graph.nodes() {
            match &mut self.agents[v] {
                AgentState::Center(exp3) => {
                    let inbox = || self.graph.closed_neighborhood(v).iter().map(|u| &messages[u]);
                    let before = &messages[v].distribution;
                    for arm in 0..self.arms {
                        let observer = inbox().find(|m| m.action == arm);
                        let observe_prob =
                            observation_probability(inbox().map(|m| &m.distribution), arm);
                        // p(i) can underflow to 0.0 at every member after a huge
                        // estimate; nobody can then play i and 0 is the exact estimate
                        self.scratch_estimates[arm] = if observe_prob == 0.0 && observer.is_none() {
                            self.stats.unobservable_arms += 1;
                            0.0
                        } else {
                            estimated_loss(&ObservationEvent {
                                arm,
                                observed: observer.is_some(),
                                observe_prob,
                                loss: observer.map_or(0.0, |m| m.loss),
                            })?
                        };
                    }
                    let next = exp3.update(&self.scratch_estimates)?;
                    if self.debug_invariants {
                        let after = next.distribution();
                        let violations = check_sandwich(
                            before,
                            &after,
                            &self.scratch_estimates,
                            exp3.learning_rate(),
                            SANDWICH_TOLERANCE,
                        );
                        self.stats.updates_checked += 1;
                        self.stats.sandwich_violations += violations.len() as u64;
                        for (arm, est) in self.scratch_estimates.iter().enumerate() {
                            let weighted = before.prob(arm) * est;
                            self.stats.max_weighted_estimate =
                                self.stats.max_weighted_estimate.max(weighted);
                            if weighted > 1.0 + SANDWICH_TOLERANCE {
                                self.stats.estimate_violations += 1;
                            }
                        }
                    }
                    *exp3 = next;
                }
                AgentState::Relay { origin, copy } => {
                    copy.stage(messages[*origin].distribution.clone());
                }
            }
        }
        self.step += 1;
        Ok(messages)
    }
}
