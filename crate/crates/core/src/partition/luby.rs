//! Luby's randomized maximal independent set on the square of the graph,
//! restricted to a universe of participants. Two-hop information travels only
//! through common neighbors, so each round costs four message steps.

use std::collections::BTreeSet;

use rand::Rng;

use crate::graph::{Graph, NodeId};

/// Message steps per Luby round: draw broadcast, two-hop max relay, join
/// announcement, neighbor-joined relay.
pub const STEPS_PER_ROUND: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct LubyTranscript {
    pub rounds_used: usize,
    pub joined: BTreeSet<NodeId>,
    pub step_cost: usize,
    /// Budget ran out with participants still active; `joined` is independent
    /// but may not be maximal.
    pub exhausted: bool,
}

/// `⌈3 ln(n̄·√(K·T))⌉`: the round budget giving failure probability at most
/// `1/(K·T)` per call.
pub fn luby_round_budget(n_bar: usize, arms: usize, horizon: u64) -> usize {
    let inner = n_bar as f64 * (arms as f64 * horizon as f64).sqrt();
    (3.0 * inner.ln()).ceil().max(1.0) as usize
}

/// `(draw, id)` with the larger draw winning and the lower id breaking ties.
#[derive(Debug, Clone, Copy)]
struct Ticket {
    draw: f64,
    node: NodeId,
}

impl Ticket {
    fn beats(&self, other: &Ticket) -> bool {
        self.draw > other.draw || (self.draw == other.draw && self.node < other.node)
    }
}

fn best_of(tickets: impl Iterator<Item = Ticket>) -> Option<Ticket> {
    tickets.fold(None, |best, t| match best {
        Some(b) if !t.beats(&b) => Some(b),
        _ => Some(t),
    })
}

pub fn luby_2mis<R: Rng + ?Sized>(
    g: &Graph,
    universe: &BTreeSet<NodeId>,
    max_rounds: usize,
    rng: &mut R,
) -> LubyTranscript {
    let n = g.node_count();
    let mut participating = vec![false; n];
    for &v in universe {
        participating[v] = true;
    }
    let mut remaining = universe.len();
    let mut joined = BTreeSet::new();
    let mut rounds_used = 0;

    while remaining > 0 && rounds_used < max_rounds {
        rounds_used += 1;
        let draws: Vec<Option<f64>> = (0..n)
            .map(|v| participating[v].then(|| rng.gen::<f64>()))
            .collect();

        // step 1: every node hears the draws of participants in N(v)
        let one_hop: Vec<Option<Ticket>> = g
            .nodes()
            .map(|v| {
                best_of(
                    g.closed_neighborhood(v)
                        .iter()
                        .filter_map(|u| draws[u].map(|draw| Ticket { draw, node: u })),
                )
            })
            .collect();
        // step 2: relaying the one-hop maxima yields the two-hop maximum
        let two_hop: Vec<Option<Ticket>> = g
            .nodes()
            .map(|v| best_of(g.closed_neighborhood(v).iter().filter_map(|u| one_hop[u])))
            .collect();
        // step 3: local maxima join
        let joiners: Vec<NodeId> = g
            .nodes()
            .filter(|&v| participating[v] && two_hop[v].is_some_and(|t| t.node == v))
            .collect();
        let mut joined_now = vec![false; n];
        for &v in &joiners {
            joined_now[v] = true;
            joined.insert(v);
        }
        // step 4: neighbors of joiners relay, so participants within two hops drop out
        let neighbor_joined: Vec<bool> = g
            .nodes()
            .map(|v| g.closed_neighborhood(v).iter().any(|u| joined_now[u]))
            .collect();
        for v in g.nodes() {
            if participating[v] && g.closed_neighborhood(v).iter().any(|u| neighbor_joined[u]) {
                participating[v] = false;
                remaining -= 1;
            }
        }
    }

    LubyTranscript {
        rounds_used,
        joined,
        step_cost: STEPS_PER_ROUND * rounds_used,
        exhausted: remaining > 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn singleton_universe_joins_immediately() {
        let g = gen::path(4);
        let t = luby_2mis(&g, &BTreeSet::from([2]), 5, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(t.joined, BTreeSet::from([2]));
        assert_eq!(t.rounds_used, 1);
        assert_eq!(t.step_cost, 4);
        assert!(!t.exhausted);
    }

    #[test]
    fn empty_universe() {
        let g = gen::path(4);
        let t = luby_2mis(&g, &BTreeSet::new(), 5, &mut ChaCha8Rng::seed_from_u64(1));
        assert!(t.joined.is_empty());
        assert_eq!(t.rounds_used, 0);
        assert_eq!(t.step_cost, 0);
    }

    #[test]
    fn clique_has_single_winner() {
        let g = gen::clique(7);
        let universe: BTreeSet<_> = g.nodes().collect();
        for seed in 0..100 {
            let t = luby_2mis(&g, &universe, 10, &mut ChaCha8Rng::seed_from_u64(seed));
            assert_eq!(t.joined.len(), 1);
            assert_eq!(t.rounds_used, 1);
        }
    }

    #[test]
    fn output_is_two_independent_and_usually_maximal() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..200 {
            let n = rng.gen_range(2..40);
            let g = gen::random_connected(n, rng.gen_range(0.0..0.3), &mut rng);
            let universe: BTreeSet<_> = g.nodes().filter(|_| rng.gen_bool(0.6)).collect();
            let t = luby_2mis(&g, &universe, luby_round_budget(n, 5, 1000), &mut rng);
            assert!(g.is_r_independent(&t.joined, 2));
            assert!(t.joined.is_subset(&universe));
            assert!(!t.exhausted);
            assert!(g.is_r_mis(&t.joined, &universe, 2));
        }
    }

    #[test]
    fn exhausted_budget_stays_independent() {
        let g = gen::path(30);
        let universe: BTreeSet<_> = g.nodes().collect();
        let t = luby_2mis(&g, &universe, 1, &mut ChaCha8Rng::seed_from_u64(3));
        assert!(t.exhausted);
        assert!(g.is_r_independent(&t.joined, 2));
        assert!(!t.joined.is_empty());
    }

    #[test]
    fn budget_formula() {
        // ⌈3 ln(100·√(10·10⁵))⌉ = ⌈3·(4.6052 + 6.9078)⌉ = ⌈34.539⌉
        assert_eq!(luby_round_budget(100, 10, 100_000), 35);
    }
}
