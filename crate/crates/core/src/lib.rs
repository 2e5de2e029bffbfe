//! Cooperative nonstochastic multi-armed bandits on communication graphs.
//!
//! Agents sit on the nodes of an undirected graph and exchange one message
//! per round with their neighbors. A few high-degree *center* agents run
//! exponential weights with importance-weighted estimates built from their
//! whole neighborhood's observations; every other agent copies the action
//! distribution of a neighbor one hop closer to its center.
//!
//! - [`graph`]: graph representation, distances and brute-force oracles.
//! - [`bandit`]: the exponential-weights state machine and relay mechanics.
//! - [`partition`]: center selection and component growth.
//! - [`sim`]: the synchronous round engine, adversaries and regret ledger.

pub mod bandit;
pub mod gen;
pub mod graph;
pub mod partition;
pub mod sim;

pub use graph::{Graph, GraphError, NodeId};
