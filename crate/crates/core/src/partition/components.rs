//! Centers-to-Components: simultaneous mass-propagating broadcasts from every
//! center, simulated round by round with an explicit per-iteration transcript.

use std::collections::BTreeSet;

use crate::graph::{Graph, NodeId};

use super::{check_arms, Mass, Partition, PartitionError};

/// `Θ_K = ⌊12 ln K⌋`. The protocol runs `Θ_K + 1` message rounds.
pub fn theta(arms: usize) -> usize {
    (12.0 * (arms as f64).ln()).floor() as usize
}

/// Communication steps charged for one protocol run.
pub fn component_steps(arms: usize) -> usize {
    theta(arms) + 1
}

/// Per-node variables `(C_t(v), U_t(v), M_t(v))` at one iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeState {
    pub center: Option<NodeId>,
    pub origin: Option<NodeId>,
    pub mass: Mass,
}

impl NodeState {
    const NIL: NodeState = NodeState {
        center: None,
        origin: None,
        mass: Mass::NIL,
    };
}

/// Message `μ_t(v)` broadcast to `N(v)` each iteration.
#[derive(Debug, Clone, Copy)]
struct MassMessage {
    center: Option<NodeId>,
    mass: Mass,
}

/// Full history of one Centers-to-Components run: `snapshots[t]` holds every
/// node's variables after `t` iterations, for `t = 0..=Θ_K + 1`.
#[derive(Debug, Clone)]
pub struct ComponentTranscript {
    arms: usize,
    centers: BTreeSet<NodeId>,
    snapshots: Vec<Vec<NodeState>>,
}

pub fn centers_to_components(
    g: &Graph,
    centers: &BTreeSet<NodeId>,
    arms: usize,
) -> Result<ComponentTranscript, PartitionError> {
    check_arms(arms)?;
    if centers.is_empty() {
        return Err(PartitionError::EmptyCenterSet);
    }
    let n = g.node_count();
    if let Some(&bad) = centers.iter().find(|&&c| c >= n) {
        return Err(PartitionError::NodeOutOfRange(bad));
    }
    let is_center = |v: NodeId| centers.contains(&v);

    let initial: Vec<NodeState> = g
        .nodes()
        .map(|v| {
            if is_center(v) {
                NodeState {
                    center: Some(v),
                    origin: Some(v),
                    mass: Mass::of_center(g.closed_degree(v), arms),
                }
            } else {
                NodeState::NIL
            }
        })
        .collect();

    let rounds = component_steps(arms);
    let mut snapshots = Vec::with_capacity(rounds + 1);
    snapshots.push(initial);
    for _ in 0..rounds {
        let current = snapshots.last().expect("initial snapshot");
        let outbox: Vec<MassMessage> = current
            .iter()
            .map(|s| MassMessage {
                center: s.center,
                mass: s.mass,
            })
            .collect();
        let next = g
            .nodes()
            .map(|v| {
                let state = current[v];
                let frozen = state.origin.is_some_and(is_center);
                if frozen {
                    return state;
                }
                // argmax over N(v) \ {v}; strict comparison keeps the lowest id on ties
                let mut best: Option<NodeId> = None;
                for &u in g.neighbors(v) {
                    if best.is_none_or(|b| outbox[u].mass > outbox[b].mass) {
                        best = Some(u);
                    }
                }
                match best {
                    Some(u) => NodeState {
                        center: outbox[u].center,
                        origin: Some(u),
                        mass: outbox[u].mass.decayed(),
                    },
                    None => state,
                }
            })
            .collect();
        snapshots.push(next);
    }
    Ok(ComponentTranscript {
        arms,
        centers: centers.clone(),
        snapshots,
    })
}

impl ComponentTranscript {
    pub fn arms(&self) -> usize {
        self.arms
    }

    pub fn centers(&self) -> &BTreeSet<NodeId> {
        &self.centers
    }

    /// Number of message rounds executed (`Θ_K + 1`).
    pub fn rounds(&self) -> usize {
        self.snapshots.len() - 1
    }

    pub fn at(&self, iteration: usize) -> &[NodeState] {
        &self.snapshots[iteration]
    }

    pub fn final_states(&self) -> &[NodeState] {
        self.snapshots.last().expect("at least one snapshot")
    }

    /// `C_2(v) != nil`, which holds exactly when `v` is within two hops of a
    /// center.
    pub fn near_center(&self, v: NodeId) -> bool {
        self.snapshots[2.min(self.rounds())][v].center.is_some()
    }

    /// Checks the per-iteration invariants of the protocol: masses never
    /// decrease, and whenever a mass changes at iteration `t` it equals
    /// `e^{-t/6}` times the new center's mass with `t >= dist(v, C_t(v))`.
    /// Returns one message per violation.
    pub fn check_invariants(&self, g: &Graph) -> Vec<String> {
        let mut violations = Vec::new();
        let center_dist: std::collections::HashMap<NodeId, Vec<usize>> =
            self.centers.iter().map(|&c| (c, g.bfs_from(c))).collect();
        for t in 1..self.snapshots.len() {
            for v in g.nodes() {
                if self.centers.contains(&v) {
                    continue;
                }
                let (prev, cur) = (self.snapshots[t - 1][v], self.snapshots[t][v]);
                if cur.mass < prev.mass {
                    violations.push(format!(
                        "iteration {t}: mass of {v} decreased from {} to {}",
                        prev.mass, cur.mass
                    ));
                }
                if cur.mass != prev.mass {
                    let Some(c) = cur.center else {
                        violations.push(format!("iteration {t}: {v} gained mass without a center"));
                        continue;
                    };
                    let expected = Mass::new(self.snapshots[0][c].mass.center_mass, t as u32);
                    if cur.mass != expected {
                        violations.push(format!(
                            "iteration {t}: mass of {v} is {} but expected {expected}",
                            cur.mass
                        ));
                    }
                    if center_dist[&c][v] > t {
                        violations.push(format!(
                            "iteration {t}: {v} is {} hops from its center {c}",
                            center_dist[&c][v]
                        ));
                    }
                }
            }
        }
        violations
    }

    /// Final assignment, failing if some node was never reached.
    pub fn to_partition(&self) -> Result<Partition, PartitionError> {
        let states = self.final_states();
        let mut center_of = Vec::with_capacity(states.len());
        let mut origin_of = Vec::with_capacity(states.len());
        let mut delay = Vec::with_capacity(states.len());
        let mut mass = Vec::with_capacity(states.len());
        for (v, s) in states.iter().enumerate() {
            match (s.center, s.origin) {
                (Some(c), Some(u)) if !s.mass.is_nil() => {
                    center_of.push(c);
                    origin_of.push(u);
                    delay.push(s.mass.depth as usize);
                    mass.push(s.mass);
                }
                _ => return Err(PartitionError::Unassigned(v)),
            }
        }
        Ok(Partition {
            centers: self.centers.clone(),
            center_of,
            origin_of,
            delay,
            mass,
        })
    }
}
