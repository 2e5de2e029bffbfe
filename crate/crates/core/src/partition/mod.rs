//! Graph partitioning around high-mass center agents.
//!
//! [`components::centers_to_components`] grows components from a given center
//! set; [`informed::compute_centers_informed`] and
//! [`uninformed::compute_centers_uninformed`] choose the center set, the
//! latter through [`luby::luby_2mis`]. [`validate::validate_partition`]
//! checks a finished [`Partition`] against the structural guarantees the
//! regret bounds rely on.

pub mod components;
pub mod informed;
pub mod luby;
pub mod mass;
pub mod uninformed;
pub mod validate;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, NodeId};

pub use components::{centers_to_components, theta, ComponentTranscript};
pub use informed::{compute_centers_informed, InformedCenters};
pub use luby::{luby_2mis, luby_round_budget, LubyTranscript};
pub use mass::Mass;
pub use uninformed::{compute_centers_uninformed, UninformedCenters};
pub use validate::{validate_partition, PartitionReport, PropertyCheck};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PartitionError {
    #[error("at least 2 arms are required, got {0}")]
    ArmsTooFew(usize),
    #[error("center set is empty")]
    EmptyCenterSet,
    #[error("node {0} is out of range")]
    NodeOutOfRange(NodeId),
    #[error("node {0} was not reached by any center")]
    Unassigned(NodeId),
    #[error("n_bar = {n_bar} is smaller than the node count {node_count}")]
    NBarTooSmall { n_bar: usize, node_count: usize },
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("malformed partition dump: {0}")]
    InvalidDump(String),
}

pub(crate) fn check_arms(arms: usize) -> Result<(), PartitionError> {
    if arms < 2 {
        Err(PartitionError::ArmsTooFew(arms))
    } else {
        Ok(())
    }
}

/// Complete assignment of every agent to a component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub centers: BTreeSet<NodeId>,
    /// `C(v)`; centers map to themselves.
    pub center_of: Vec<NodeId>,
    /// `U(v)`; centers map to themselves.
    pub origin_of: Vec<NodeId>,
    /// `d(v)`; zero at centers.
    pub delay: Vec<usize>,
    pub mass: Vec<Mass>,
}

impl Partition {
    pub fn node_count(&self) -> usize {
        self.center_of.len()
    }

    pub fn is_center(&self, v: NodeId) -> bool {
        self.centers.contains(&v)
    }

    /// Members of `V_c`.
    pub fn component(&self, center: NodeId) -> BTreeSet<NodeId> {
        (0..self.node_count())
            .filter(|&v| self.center_of[v] == center)
            .collect()
    }

    pub fn to_dump(&self) -> PartitionDump {
        PartitionDump {
            centers: self.centers.iter().copied().collect(),
            center_of: self.center_of.clone(),
            origin_of: self.origin_of.clone(),
            delay: self.delay.clone(),
            mass_m: self.mass.iter().map(|m| m.center_mass).collect(),
            mass_d: self.mass.iter().map(|m| m.depth).collect(),
        }
    }

    /// Rebuilds a partition from its dump, checking shape against `g` when
    /// given.
    pub fn from_dump(dump: &PartitionDump, g: Option<&Graph>) -> Result<Self, PartitionError> {
        let n = dump.center_of.len();
        let lengths = [
            dump.origin_of.len(),
            dump.delay.len(),
            dump.mass_m.len(),
            dump.mass_d.len(),
        ];
        if lengths.iter().any(|&l| l != n) {
            return Err(PartitionError::InvalidDump(format!(
                "array lengths differ: center_of has {n}, others {lengths:?}"
            )));
        }
        if let Some(g) = g {
            if g.node_count() != n {
                return Err(PartitionError::InvalidDump(format!(
                    "dump has {n} nodes, graph has {}",
                    g.node_count()
                )));
            }
        }
        let ids = dump
            .centers
            .iter()
            .chain(&dump.center_of)
            .chain(&dump.origin_of);
        if let Some(&bad) = ids.into_iter().find(|&&v| v >= n) {
            return Err(PartitionError::NodeOutOfRange(bad));
        }
        let centers: BTreeSet<NodeId> = dump.centers.iter().copied().collect();
        if centers.len() != dump.centers.len() {
            return Err(PartitionError::InvalidDump("duplicate centers".into()));
        }
        Ok(Partition {
            centers,
            center_of: dump.center_of.clone(),
            origin_of: dump.origin_of.clone(),
            delay: dump.delay.clone(),
            mass: dump
                .mass_m
                .iter()
                .zip(&dump.mass_d)
                .map(|(&m, &d)| Mass::new(m, d))
                .collect(),
        })
    }
}

/// JSON layout of a [`Partition`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionDump {
    pub centers: Vec<NodeId>,
    pub center_of: Vec<NodeId>,
    pub origin_of: Vec<NodeId>,
    pub delay: Vec<usize>,
    pub mass_m: Vec<u32>,
    pub mass_d: Vec<u32>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;

    #[test]
    fn dump_round_trip() {
        let g = gen::path(7);
        let p = compute_centers_informed(&g, 3)
            .unwrap()
            .components
            .to_partition()
            .unwrap();
        let json = serde_json::to_string(&p.to_dump()).unwrap();
        let back: PartitionDump = serde_json::from_str(&json).unwrap();
        assert_eq!(Partition::from_dump(&back, Some(&g)).unwrap(), p);
        for key in ["centers", "center_of", "origin_of", "delay", "mass_m", "mass_d"] {
            assert!(json.contains(&format!("\"{key}\"")));
        }
    }

    #[test]
    fn dump_rejects_bad_shapes() {
        let mut dump = PartitionDump {
            centers: vec![0],
            center_of: vec![0, 0],
            origin_of: vec![0, 0],
            delay: vec![0, 1],
            mass_m: vec![2, 2],
            mass_d: vec![0],
        };
        assert!(matches!(
            Partition::from_dump(&dump, None),
            Err(PartitionError::InvalidDump(_))
        ));
        dump.mass_d.push(1);
        dump.origin_of[1] = 5;
        assert_eq!(
            Partition::from_dump(&dump, None),
            Err(PartitionError::NodeOutOfRange(5))
        );
    }
}
