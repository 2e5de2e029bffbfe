//! Distributed center selection for agents that only know their neighbors and
//! an upper bound `n̄ >= N`. Every step of the protocol is a played round, so
//! the step count is part of the result.

use std::collections::BTreeSet;

use log::{debug, warn};
use rand::Rng;

use crate::graph::{Graph, NodeId};

use super::components::{centers_to_components, component_steps, ComponentTranscript};
use super::luby::{luby_2mis, luby_round_budget, LubyTranscript, STEPS_PER_ROUND};
use super::{check_arms, Mass, PartitionError};

/// One Luby invocation inside the uninformed protocol.
#[derive(Debug, Clone)]
pub struct LubyCall {
    pub iteration: usize,
    pub universe: BTreeSet<NodeId>,
    pub transcript: LubyTranscript,
}

#[derive(Debug, Clone)]
pub struct UninformedCenters {
    pub centers: BTreeSet<NodeId>,
    /// Total communication steps, including the final component pass.
    pub setup_steps: u64,
    pub luby_calls: Vec<LubyCall>,
    /// Components from the final pass over the returned center set.
    pub components: ComponentTranscript,
}

/// Closed-form step count of the protocol: `K` iterations of a full Luby
/// budget plus one component pass each, then one final component pass.
pub fn uninformed_setup_steps(arms: usize, n_bar: usize, horizon: u64) -> u64 {
    let per_iteration =
        STEPS_PER_ROUND * luby_round_budget(n_bar, arms, horizon) + component_steps(arms);
    (arms * per_iteration + component_steps(arms)) as u64
}

/// Step count of the `K` iterations alone, without the final pass.
pub fn uninformed_iteration_steps(arms: usize, n_bar: usize, horizon: u64) -> u64 {
    uninformed_setup_steps(arms, n_bar, horizon) - component_steps(arms) as u64
}

/// `12·K·ln(K²·n̄·T)`, an upper bound on the iteration steps.
pub fn setup_step_bound(arms: usize, n_bar: usize, horizon: u64) -> f64 {
    let k = arms as f64;
    12.0 * k * (k * k * n_bar as f64 * horizon as f64).ln()
}

pub fn compute_centers_uninformed<R: Rng + ?Sized>(
    g: &Graph,
    arms: usize,
    n_bar: usize,
    horizon: u64,
    rng: &mut R,
) -> Result<UninformedCenters, PartitionError> {
    check_arms(arms)?;
    if n_bar < g.node_count() {
        return Err(PartitionError::NBarTooSmall {
            n_bar,
            node_count: g.node_count(),
        });
    }
    if horizon == 0 {
        return Err(PartitionError::ZeroHorizon);
    }
    let budget = luby_round_budget(n_bar, arms, horizon);
    let target: Vec<Mass> = g
        .nodes()
        .map(|v| Mass::of_center(g.closed_degree(v), arms))
        .collect();
    let mut unsatisfied = vec![true; g.node_count()];
    let mut centers = BTreeSet::new();
    let mut luby_calls = Vec::with_capacity(arms);
    let mut steps = 0u64;

    for iteration in 0..arms {
        let level = (arms - iteration) as u32;
        let universe: BTreeSet<NodeId> = g
            .nodes()
            .filter(|&v| unsatisfied[v] && target[v].center_mass == level)
            .collect();
        let transcript = luby_2mis(g, &universe, budget, rng);
        if transcript.exhausted {
            warn!(
                "Luby budget of {budget} rounds exhausted at iteration {iteration}; \
                 using a possibly non-maximal set"
            );
        }
        centers.extend(transcript.joined.iter().copied());
        steps += (STEPS_PER_ROUND * budget) as u64;

        // agents run the component protocol whether or not any center exists yet
        steps += component_steps(arms) as u64;
        if !centers.is_empty() {
            let components = centers_to_components(g, &centers, arms)?;
            let states = components.final_states();
            for v in g.nodes() {
                unsatisfied[v] = states[v].mass < target[v] && !components.near_center(v);
            }
        }
        luby_calls.push(LubyCall {
            iteration,
            universe,
            transcript,
        });
    }

    let components = centers_to_components(g, &centers, arms)?;
    steps += component_steps(arms) as u64;
    debug!(
        "uninformed setup: {} centers, {steps} steps including a final component pass of {}",
        centers.len(),
        component_steps(arms)
    );
    Ok(UninformedCenters {
        centers,
        setup_steps: steps,
        luby_calls,
        components,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn step_formula_and_bound() {
        // budget 35, Θ = 27: 10·(140 + 28) = 1680, plus a final pass of 28
        assert_eq!(uninformed_iteration_steps(10, 100, 100_000), 1680);
        assert_eq!(uninformed_setup_steps(10, 100, 100_000), 1708);
        assert!((setup_step_bound(10, 100, 100_000) - 2486.7919004335).abs() < 1e-6);
    }

    #[test]
    fn simulated_steps_match_formula() {
        let g = gen::star(6);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (k, n_bar, t) in [(2, 7, 10u64), (5, 20, 1000), (10, 7, 100_000)] {
            let r = compute_centers_uninformed(&g, k, n_bar, t, &mut rng).unwrap();
            assert_eq!(r.setup_steps, uninformed_setup_steps(k, n_bar, t));
            assert_eq!(r.luby_calls.len(), k);
        }
    }

    #[test]
    fn star_hub_enters_at_its_level() {
        // K = 5, hub |N| = 7 so min{7, 5} = 5 = K - 0: the hub is the only
        // member of S_0 and leaves are satisfied from then on
        let g = gen::star(6);
        let r = compute_centers_uninformed(&g, 5, 7, 1000, &mut ChaCha8Rng::seed_from_u64(9))
            .unwrap();
        assert_eq!(r.centers, BTreeSet::from([0]));
        assert_eq!(r.luby_calls[0].universe, BTreeSet::from([0]));
        assert!(r.luby_calls[1..].iter().all(|c| c.universe.is_empty()));

        // K = 10: hub level 7 is reached at iteration 3
        let r = compute_centers_uninformed(&g, 10, 7, 1000, &mut ChaCha8Rng::seed_from_u64(9))
            .unwrap();
        assert_eq!(r.centers, BTreeSet::from([0]));
        assert_eq!(r.luby_calls[3].transcript.joined, BTreeSet::from([0]));
    }

    #[test]
    fn edge_graph_gets_one_center() {
        let g = gen::path(2);
        for seed in 0..20 {
            let r = compute_centers_uninformed(&g, 2, 2, 100, &mut ChaCha8Rng::seed_from_u64(seed))
                .unwrap();
            assert_eq!(r.luby_calls[0].universe, BTreeSet::from([0, 1]));
            assert_eq!(r.centers.len(), 1);
            assert!(r.components.to_partition().is_ok());
        }
    }

    #[test]
    fn rejects_small_n_bar() {
        let g = gen::path(5);
        assert!(matches!(
            compute_centers_uninformed(&g, 3, 4, 10, &mut ChaCha8Rng::seed_from_u64(0)),
            Err(PartitionError::NBarTooSmall { .. })
        ));
    }
}
