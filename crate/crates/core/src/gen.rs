//! Small graph families and a seeded random connected-graph generator.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{Graph, NodeId};

pub fn path(n: usize) -> Graph {
    let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    Graph::from_edges(n, &edges).expect("path is connected")
}

/// Star with hub `0` and `leaves` leaves.
pub fn star(leaves: usize) -> Graph {
    let edges: Vec<_> = (1..=leaves).map(|i| (0, i)).collect();
    Graph::from_edges(leaves + 1, &edges).expect("star is connected")
}

pub fn clique(n: usize) -> Graph {
    let edges: Vec<_> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .collect();
    Graph::from_edges(n, &edges).expect("clique is connected")
}

/// Random connected graph: a uniformly shuffled random recursive tree plus
/// every remaining pair independently with probability `extra_density`.
pub fn random_connected<R: Rng + ?Sized>(n: usize, extra_density: f64, rng: &mut R) -> Graph {
    assert!(n >= 1);
    let mut labels: Vec<NodeId> = (0..n).collect();
    labels.shuffle(rng);
    let mut edges = Vec::new();
    let mut present = vec![false; n * n];
    for i in 1..n {
        let j = rng.gen_range(0..i);
        let (u, v) = (labels[i], labels[j]);
        present[u * n + v] = true;
        present[v * n + u] = true;
        edges.push((u, v));
    }
    for u in 0..n {
        for v in u + 1..n {
            if !present[u * n + v] && rng.gen_bool(extra_density.clamp(0.0, 1.0)) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, &edges).expect("spanning tree keeps the graph connected")
}

/// Edge densities cycled through by [`graph_sweep`].
pub const SWEEP_DENSITIES: [f64; 6] = [0.0, 0.02, 0.05, 0.1, 0.25, 0.5];

/// `count` random connected graphs with `N` drawn from `[min_nodes,
/// max_nodes]` and the extra-edge density cycling through
/// [`SWEEP_DENSITIES`]. Graph `i` depends on `seed + i` alone.
pub fn graph_sweep(count: usize, min_nodes: usize, max_nodes: usize, seed: u64) -> Vec<Graph> {
    (0..count)
        .map(|i| {
            let graph_seed = seed.wrapping_add(i as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(graph_seed);
            let n = rng.gen_range(min_nodes..=max_nodes);
            let density = SWEEP_DENSITIES[(graph_seed % SWEEP_DENSITIES.len() as u64) as usize];
            random_connected(n, density, &mut rng)
        })
        .collect()
}
