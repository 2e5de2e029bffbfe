//! Property checks for a finished partition.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::graph::{Graph, NodeId, UNREACHABLE};

use super::{Mass, Partition};

const MAX_WITNESSES: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PropertyCheck {
    pub name: &'static str,
    pub passed: bool,
    /// Up to a handful of counterexamples when the check fails.
    pub witnesses: Vec<String>,
}

impl PropertyCheck {
    fn from_witnesses(name: &'static str, mut witnesses: Vec<String>) -> Self {
        witnesses.truncate(MAX_WITNESSES);
        PropertyCheck {
            name,
            passed: witnesses.is_empty(),
            witnesses,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartitionReport {
    pub checks: Vec<PropertyCheck>,
}

impl PartitionReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&PropertyCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &PropertyCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for PartitionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for check in &self.checks {
            let status = if check.passed { "PASS" } else { "FAIL" };
            writeln!(f, "{status} {}", check.name)?;
            for w in &check.witnesses {
                writeln!(f, "    {w}")?;
            }
        }
        Ok(())
    }
}

pub const DISJOINT_COVER: &str = "disjoint_cover";
pub const CENTER_NEIGHBORHOODS: &str = "center_neighborhood_connected";
pub const MASS_RECURRENCE: &str = "mass_recurrence";
pub const ORIGIN_MINIMALITY: &str = "origin_delay_minimal";
pub const TWO_INDEPENDENT: &str = "centers_2_independent";
pub const MASS_LOWER_BOUND: &str = "mass_lower_bound";
pub const CENTER_DISTANCE: &str = "center_distance";

/// Runs every structural check on `p`. Each check reports independently, so
/// a partition can fail several at once.
pub fn validate_partition(g: &Graph, p: &Partition, arms: usize) -> PartitionReport {
    let n = g.node_count();
    let shape_ok = [p.center_of.len(), p.origin_of.len(), p.delay.len(), p.mass.len()]
        .iter()
        .all(|&l| l == n)
        && p.centers.iter().all(|&c| c < n)
        && p.center_of.iter().chain(&p.origin_of).all(|&v| v < n);
    if !shape_ok || p.centers.is_empty() {
        return PartitionReport {
            checks: vec![PropertyCheck::from_witnesses(
                "shape",
                vec![format!("partition does not assign the {n} nodes of the graph")],
            )],
        };
    }

    let checks = vec![
        PropertyCheck::from_witnesses(DISJOINT_COVER, disjoint_cover(g, p)),
        PropertyCheck::from_witnesses(CENTER_NEIGHBORHOODS, center_neighborhoods(g, p)),
        PropertyCheck::from_witnesses(MASS_RECURRENCE, mass_recurrence(g, p, arms)),
        PropertyCheck::from_witnesses(ORIGIN_MINIMALITY, origin_minimality(g, p)),
        PropertyCheck::from_witnesses(TWO_INDEPENDENT, two_independent(g, &p.centers)),
        PropertyCheck::from_witnesses(MASS_LOWER_BOUND, mass_lower_bound(g, p, arms)),
        PropertyCheck::from_witnesses(CENTER_DISTANCE, center_distance(g, &p.centers, arms)),
    ];
    PartitionReport { checks }
}

fn disjoint_cover(g: &Graph, p: &Partition) -> Vec<String> {
    let mut out = Vec::new();
    for &c in &p.centers {
        if p.center_of[c] != c {
            out.push(format!("center {c} is assigned to {}", p.center_of[c]));
        }
    }
    for v in g.nodes() {
        if !p.centers.contains(&p.center_of[v]) {
            out.push(format!("node {v} assigned to non-center {}", p.center_of[v]));
        }
    }
    out
}

fn center_neighborhoods(g: &Graph, p: &Partition) -> Vec<String> {
    let mut out = Vec::new();
    for &c in &p.centers {
        for &u in g.neighbors(c) {
            if p.center_of[u] != c {
                out.push(format!("neighbor {u} of center {c} lies in V_{}", p.center_of[u]));
            }
        }
        let component = p.component(c);
        if !g.induced_subgraph(&component).is_connected() {
            out.push(format!("component of center {c} is disconnected"));
        }
    }
    out
}

fn mass_recurrence(g: &Graph, p: &Partition, arms: usize) -> Vec<String> {
    let mut out = Vec::new();
    let component_dist: std::collections::HashMap<NodeId, Vec<usize>> = p
        .centers
        .iter()
        .map(|&c| (c, g.induced_subgraph(&p.component(c)).bfs_from(c)))
        .collect();
    for v in g.nodes() {
        let c = p.center_of[v];
        let u = p.origin_of[v];
        if p.centers.contains(&v) {
            let expected = Mass::of_center(g.closed_degree(v), arms);
            if p.mass[v] != expected || p.delay[v] != 0 || u != v {
                out.push(format!(
                    "center {v}: mass {} delay {} origin {u}, expected mass {expected} delay 0 origin {v}",
                    p.mass[v], p.delay[v]
                ));
            }
            continue;
        }
        if !g.has_edge(v, u) {
            out.push(format!("origin {u} of {v} is not a neighbor"));
            continue;
        }
        if p.center_of[u] != c {
            out.push(format!("origin {u} of {v} lies in another component"));
        }
        if p.delay[v] != p.delay[u] + 1 {
            out.push(format!(
                "delay of {v} is {} but its origin {u} has delay {}",
                p.delay[v], p.delay[u]
            ));
        }
        let Some(dist) = component_dist.get(&c) else {
            continue;
        };
        if dist[v] != p.delay[v] {
            let shown = if dist[v] == UNREACHABLE { "inf".to_string() } else { dist[v].to_string() };
            out.push(format!(
                "delay of {v} is {} but its distance to {c} inside V_{c} is {shown}",
                p.delay[v]
            ));
        }
        let expected = Mass::new(p.mass[c].center_mass, p.delay[v] as u32);
        if p.mass[v] != expected {
            out.push(format!("mass of {v} is {} but expected {expected}", p.mass[v]));
        }
    }
    out
}

fn origin_minimality(g: &Graph, p: &Partition) -> Vec<String> {
    let mut out = Vec::new();
    for v in g.nodes().filter(|v| !p.centers.contains(v)) {
        let c = p.center_of[v];
        let best = g
            .neighbors(v)
            .iter()
            .filter(|&&u| p.center_of[u] == c)
            .map(|&u| p.delay[u])
            .min();
        match best {
            Some(best) if p.delay[p.origin_of[v]] == best => {}
            Some(best) => out.push(format!(
                "origin {} of {v} has delay {} but a neighbor in V_{c} has delay {best}",
                p.origin_of[v],
                p.delay[p.origin_of[v]]
            )),
            None => out.push(format!("{v} has no neighbor in its own component")),
        }
    }
    out
}

fn two_independent(g: &Graph, centers: &BTreeSet<NodeId>) -> Vec<String> {
    let mut out = Vec::new();
    for &c in centers {
        for u in g.ball(c, 2) {
            if u > c && centers.contains(&u) {
                out.push(format!("centers {c} and {u} are within distance 2"));
            }
        }
    }
    out
}

fn mass_lower_bound(g: &Graph, p: &Partition, arms: usize) -> Vec<String> {
    g.nodes()
        .filter_map(|v| {
            // e^{-1}·min{|N(v)|, K} is the pair (min{|N(v)|, K}, 6)
            let bound = Mass::new(g.closed_degree(v).min(arms) as u32, 6);
            (p.mass[v] < bound).then(|| {
                format!(
                    "mass of {v} is {} = {:.4} below e^-1·{} = {:.4}",
                    p.mass[v],
                    p.mass[v].value(),
                    bound.center_mass,
                    bound.value()
                )
            })
        })
        .collect()
}

fn center_distance(g: &Graph, centers: &BTreeSet<NodeId>, arms: usize) -> Vec<String> {
    let limit = 6.0 * (arms as f64).ln() - 1.0;
    let dist = g.multi_source_bfs(centers.iter().copied());
    g.nodes()
        .filter(|&v| dist[v] as f64 > limit)
        .map(|v| format!("{v} is {} hops from the nearest center, limit {limit:.3}", dist[v]))
        .collect()
}
