use std::collections::BTreeSet;

use crate::graph::{Graph, NodeId};

use super::components::{centers_to_components, ComponentTranscript};
use super::{check_arms, Mass, PartitionError};

/// Result of the greedy informed center selection.
#[derive(Debug, Clone)]
pub struct InformedCenters {
    pub centers: BTreeSet<NodeId>,
    /// Centers in the order they were added.
    pub order: Vec<NodeId>,
    /// Components for the returned center set.
    pub components: ComponentTranscript,
}

/// Greedy center selection for a graph known to every agent: repeatedly
/// promote the unsatisfied agent with the largest closed neighborhood (lowest
/// id on ties) until every agent either has mass at least `min(|N(v)|, K)` or
/// sits within two hops of a center.
pub fn compute_centers_informed(g: &Graph, arms: usize) -> Result<InformedCenters, PartitionError> {
    check_arms(arms)?;
    let mut unsatisfied: Vec<NodeId> = g.nodes().collect();
    let mut centers = BTreeSet::new();
    let mut order = Vec::new();
    let mut components = None;

    while !unsatisfied.is_empty() {
        let next = unsatisfied
            .iter()
            .copied()
            .fold(None::<NodeId>, |best, v| match best {
                Some(b) if g.closed_degree(b) >= g.closed_degree(v) => Some(b),
                _ => Some(v),
            })
            .expect("non-empty");
        debug_assert!(!centers.contains(&next));
        centers.insert(next);
        order.push(next);

        let transcript = centers_to_components(g, &centers, arms)?;
        let dist = g.multi_source_bfs(centers.iter().copied());
        let masses = transcript.final_states();
        unsatisfied = g
            .nodes()
            .filter(|&v| {
                let target = Mass::of_center(g.closed_degree(v), arms);
                masses[v].mass < target && dist[v] >= 3
            })
            .collect();
        components = Some(transcript);
    }

    Ok(InformedCenters {
        centers,
        order,
        components: components.expect("at least one iteration on a non-empty graph"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;

    #[test]
    fn star_picks_hub() {
        let k = 6;
        let g = gen::star(k);
        let r = compute_centers_informed(&g, k).unwrap();
        assert_eq!(r.centers, BTreeSet::from([0]));
    }

    #[test]
    fn clique_picks_lowest_id() {
        for n in 2..=6 {
            let r = compute_centers_informed(&gen::clique(n), 6).unwrap();
            assert_eq!(r.centers, BTreeSet::from([0]));
        }
    }

    #[test]
    fn edge_graph() {
        let r = compute_centers_informed(&gen::path(2), 2).unwrap();
        assert_eq!(r.centers, BTreeSet::from([0]));
        assert!(r.components.to_partition().is_ok());
    }

    #[test]
    fn long_path_gets_several_centers() {
        let g = gen::path(40);
        let r = compute_centers_informed(&g, 3).unwrap();
        assert!(r.centers.len() > 1);
        assert!(g.is_r_independent(&r.centers, 2));
        assert!(r.order.len() <= g.node_count());
        assert!(r.components.to_partition().is_ok());
    }
}
