//! Undirected communication graphs with dense node ids.
//!
//! A [`Graph`] is validated on construction (simple, symmetric, connected) and
//! is immutable afterwards. Distances are computed on demand by BFS; callers
//! that query the same sources repeatedly can hold a [`DistanceCache`].
//!
//! The brute-force combinatorial oracles at the bottom of this module are
//! exponential and hard-guarded at [`BRUTE_FORCE_LIMIT`] nodes.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Dense node identifier in `[0, N)`.
pub type NodeId = usize;

/// Largest graph the exhaustive oracles accept.
pub const BRUTE_FORCE_LIMIT: usize = 30;

/// Distance value used for unreachable pairs in a [`SubgraphView`].
pub const UNREACHABLE: usize = usize::MAX;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph must have at least one node")]
    Empty,
    #[error("node id {node} out of range for {node_count} nodes")]
    NodeOutOfRange { node: usize, node_count: usize },
    #[error("self-loop at node {0}")]
    SelfLoop(NodeId),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(NodeId, NodeId),
    #[error("graph is disconnected: node {unreached} not reachable from node 0")]
    Disconnected { unreached: NodeId },
    #[error("brute-force oracle limited to {limit} nodes, got {node_count}")]
    TooLarge { node_count: usize, limit: usize },
    #[error("edge list parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Undirected, connected, simple graph. Adjacency lists are sorted and never
/// contain the owner itself.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<NodeId>>,
    edge_count: usize,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("nodes", &self.node_count())
            .field("edges", &self.edge_count)
            .finish()
    }
}

impl Graph {
    /// Builds and validates a graph from an unordered edge list.
    pub fn from_edges(node_count: usize, edges: &[(NodeId, NodeId)]) -> Result<Self, GraphError> {
        if node_count == 0 {
            return Err(GraphError::Empty);
        }
        let mut adjacency = vec![Vec::new(); node_count];
        let mut seen = BTreeSet::new();
        for &(u, v) in edges {
            for node in [u, v] {
                if node >= node_count {
                    return Err(GraphError::NodeOutOfRange { node, node_count });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            let key = (u.min(v), u.max(v));
            if !seen.insert(key) {
                return Err(GraphError::DuplicateEdge(key.0, key.1));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        let graph = Graph {
            adjacency,
            edge_count: seen.len(),
        };
        let dist = graph.bfs_from(0);
        if let Some(unreached) = dist.iter().position(|&d| d == UNREACHABLE) {
            return Err(GraphError::Disconnected { unreached });
        }
        Ok(graph)
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn nodes(&self) -> std::ops::Range<NodeId> {
        0..self.node_count()
    }

    /// Open neighborhood (excludes `v`), sorted ascending.
    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.adjacency[v]
    }

    /// Plain degree, `|N(v)| - 1`.
    pub fn degree(&self, v: NodeId) -> usize {
        self.adjacency[v].len()
    }

    /// Size of the closed neighborhood `|N(v)|`, which counts `v` itself.
    pub fn closed_degree(&self, v: NodeId) -> usize {
        self.adjacency[v].len() + 1
    }

    pub fn closed_neighborhood(&self, v: NodeId) -> ClosedNeighborhood<'_> {
        ClosedNeighborhood {
            owner: v,
            open: &self.adjacency[v],
        }
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    /// Hop distances from `source` to every node.
    pub fn bfs_from(&self, source: NodeId) -> Vec<usize> {
        self.multi_source_bfs(std::iter::once(source))
    }

    /// Hop distance to the nearest of `sources`; [`UNREACHABLE`] when
    /// `sources` is empty.
    pub fn multi_source_bfs(&self, sources: impl IntoIterator<Item = NodeId>) -> Vec<usize> {
        let mut dist = vec![UNREACHABLE; self.node_count()];
        let mut queue = VecDeque::new();
        for s in sources {
            if dist[s] != 0 {
                dist[s] = 0;
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            let next = dist[u] + 1;
            for &w in &self.adjacency[u] {
                if dist[w] == UNREACHABLE {
                    dist[w] = next;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn bfs_distance(&self, u: NodeId, v: NodeId) -> usize {
        if u == v {
            return 0;
        }
        self.bfs_from(u)[v]
    }

    /// Nodes within `radius` hops of `center`, including `center`.
    pub fn ball(&self, center: NodeId, radius: usize) -> Vec<NodeId> {
        let mut dist = HashMap::new();
        dist.insert(center, 0usize);
        let mut queue = VecDeque::from([center]);
        let mut out = vec![center];
        while let Some(u) = queue.pop_front() {
            let du = dist[&u];
            if du == radius {
                continue;
            }
            for &w in &self.adjacency[u] {
                if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(w) {
                    e.insert(du + 1);
                    out.push(w);
                    queue.push_back(w);
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn induced_subgraph(&self, nodes: &BTreeSet<NodeId>) -> SubgraphView<'_> {
        SubgraphView { graph: self, nodes: nodes.clone() }
    }

    /// `true` iff every distinct pair of `nodes` is at least `r + 1` hops apart.
    pub fn is_r_independent(&self, nodes: &BTreeSet<NodeId>, r: usize) -> bool {
        nodes.iter().all(|&w| {
            self.ball(w, r)
                .into_iter()
                .all(|u| u == w || !nodes.contains(&u))
        })
    }

    /// `true` iff `candidate` is an `r`-independent subset of `universe` that no
    /// further member of `universe` can extend.
    pub fn is_r_mis(
        &self,
        candidate: &BTreeSet<NodeId>,
        universe: &BTreeSet<NodeId>,
        r: usize,
    ) -> bool {
        if !candidate.is_subset(universe) || !self.is_r_independent(candidate, r) {
            return false;
        }
        if candidate.is_empty() {
            return universe.is_empty();
        }
        let dist = self.multi_source_bfs(candidate.iter().copied());
        universe.iter().all(|&u| dist[u] <= r)
    }

    /// Size of a maximum independent set. Exponential; `N <= 30` only.
    pub fn independence_number(&self) -> Result<usize, GraphError> {
        let n = self.node_count();
        if n > BRUTE_FORCE_LIMIT {
            return Err(GraphError::TooLarge {
                node_count: n,
                limit: BRUTE_FORCE_LIMIT,
            });
        }
        let masks: Vec<u32> = self
            .adjacency
            .iter()
            .map(|list| list.iter().fold(0u32, |m, &v| m | (1 << v)))
            .collect();
        let all = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
        Ok(max_independent(all, &masks) as usize)
    }
}

fn max_independent(candidates: u32, masks: &[u32]) -> u32 {
    if candidates == 0 {
        return 0;
    }
    let v = candidates.trailing_zeros() as usize;
    let rest = candidates & !(1 << v);
    // a vertex with no remaining neighbors is always taken
    if masks[v] & rest == 0 {
        return 1 + max_independent(rest, masks);
    }
    let with = 1 + max_independent(rest & !masks[v], masks);
    if with > (rest.count_ones()) {
        return with;
    }
    with.max(max_independent(rest, masks))
}

/// `N(v)`: the owner together with its neighbors.
#[derive(Debug, Clone, Copy)]
pub struct ClosedNeighborhood<'g> {
    owner: NodeId,
    open: &'g [NodeId],
}

impl<'g> ClosedNeighborhood<'g> {
    pub fn owner(&self) -> NodeId {
        self.owner
    }

    pub fn len(&self) -> usize {
        self.open.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, v: NodeId) -> bool {
        v == self.owner || self.open.binary_search(&v).is_ok()
    }

    /// Members in ascending id order.
    pub fn iter(&self) -> impl Iterator<Item = NodeId> + 'g {
        let owner = self.owner;
        let split = self.open.partition_point(|&v| v < owner);
        let (lo, hi) = self.open.split_at(split);
        lo.iter()
            .copied()
            .chain(std::iter::once(owner))
            .chain(hi.iter().copied())
    }
}

/// Induced-subgraph view; unlike [`Graph`] it may be disconnected.
#[derive(Debug, Clone)]
pub struct SubgraphView<'g> {
    graph: &'g Graph,
    nodes: BTreeSet<NodeId>,
}

impl SubgraphView<'_> {
    pub fn nodes(&self) -> &BTreeSet<NodeId> {
        &self.nodes
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.nodes.contains(&v)
    }

    pub fn neighbors(&self, v: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.graph.neighbors(v).iter().copied().filter(|w| self.nodes.contains(w))
    }

    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        self.graph
            .edges()
            .filter(|(u, v)| self.nodes.contains(u) && self.nodes.contains(v))
            .collect()
    }

    /// BFS distances inside the view; nodes outside the view or unreachable
    /// within it get [`UNREACHABLE`].
    pub fn bfs_from(&self, source: NodeId) -> Vec<usize> {
        let mut dist = vec![UNREACHABLE; self.graph.node_count()];
        if !self.nodes.contains(&source) {
            return dist;
        }
        dist[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for w in self.neighbors(u) {
                if dist[w] == UNREACHABLE {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        match self.nodes.iter().next() {
            None => true,
            Some(&first) => {
                let dist = self.bfs_from(first);
                self.nodes.iter().all(|&v| dist[v] != UNREACHABLE)
            }
        }
    }
}

/// Per-source memoized BFS. Owned by the caller so [`Graph`] stays immutable.
#[derive(Debug)]
pub struct DistanceCache<'g> {
    graph: &'g Graph,
    rows: HashMap<NodeId, Vec<usize>>,
}

impl<'g> DistanceCache<'g> {
    pub fn new(graph: &'g Graph) -> Self {
        DistanceCache {
            graph,
            rows: HashMap::new(),
        }
    }

    pub fn distance(&mut self, u: NodeId, v: NodeId) -> usize {
        if u == v {
            return 0;
        }
        if let Some(row) = self.rows.get(&v) {
            return row[u];
        }
        let graph = self.graph;
        self.rows.entry(u).or_insert_with(|| graph.bfs_from(u))[v]
    }
}

impl FromStr for Graph {
    type Err = GraphError;

    /// Parses the edge-list text format: a header line `N M` followed by `M`
    /// lines `u v` with 0-based ids. Text after `#` is ignored.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, line)| (i + 1, line.split('#').next().unwrap_or("").trim()))
            .filter(|(_, line)| !line.is_empty());

        let parse_pair = |line_no: usize, line: &str| -> Result<(usize, usize), GraphError> {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(GraphError::Parse {
                    line: line_no,
                    message: format!("expected two integers, found {:?}", line),
                });
            }
            let num = |s: &str| {
                s.parse::<usize>().map_err(|e| GraphError::Parse {
                    line: line_no,
                    message: format!("{s:?}: {e}"),
                })
            };
            Ok((num(fields[0])?, num(fields[1])?))
        };

        let (header_line, header) = lines.next().ok_or(GraphError::Parse {
            line: 1,
            message: "missing `N M` header".into(),
        })?;
        let (node_count, edge_count) = parse_pair(header_line, header)?;
        let mut edges = Vec::with_capacity(edge_count);
        for (line_no, line) in lines {
            edges.push(parse_pair(line_no, line)?);
        }
        if edges.len() != edge_count {
            return Err(GraphError::Parse {
                line: header_line,
                message: format!("header declares {edge_count} edges, found {}", edges.len()),
            });
        }
        Graph::from_edges(node_count, &edges)
    }
}

impl Graph {
    /// Serializes to the edge-list text format accepted by [`Graph::from_str`].
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{} {}\n", self.node_count(), self.edge_count());
        for (u, v) in self.edges() {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Graph {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Graph::from_edges(n, &edges).unwrap()
    }

    fn set(items: &[usize]) -> BTreeSet<usize> {
        items.iter().copied().collect()
    }

    #[test]
    fn build_smallest_and_triangle() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        assert_eq!(g.neighbors(0), &[1]);
        let t = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(t.neighbors(1), &[0, 2]);
        assert_eq!(t.edge_count(), 3);
    }

    #[test]
    fn build_rejects_bad_input() {
        assert_eq!(
            Graph::from_edges(4, &[(0, 1), (2, 3)]),
            Err(GraphError::Disconnected { unreached: 2 })
        );
        assert_eq!(Graph::from_edges(2, &[(0, 0)]), Err(GraphError::SelfLoop(0)));
        assert_eq!(
            Graph::from_edges(2, &[(0, 1), (1, 0)]),
            Err(GraphError::DuplicateEdge(0, 1))
        );
        assert!(matches!(
            Graph::from_edges(2, &[(0, 2)]),
            Err(GraphError::NodeOutOfRange { node: 2, .. })
        ));
        assert_eq!(Graph::from_edges(0, &[]), Err(GraphError::Empty));
    }

    #[test]
    fn single_node_is_connected() {
        let g = Graph::from_edges(1, &[]).unwrap();
        assert_eq!(g.closed_degree(0), 1);
    }

    #[test]
    fn distances() {
        let p = path(5);
        assert_eq!(p.bfs_distance(0, 4), 4);
        assert_eq!(p.bfs_distance(3, 3), 0);
        let t = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(t.bfs_distance(0, 2), 1);
        let mut cache = DistanceCache::new(&p);
        assert_eq!(cache.distance(4, 1), 3);
        assert_eq!(cache.distance(1, 4), 3);
    }

    #[test]
    fn closed_neighborhood_iterates_in_order() {
        let g = Graph::from_edges(4, &[(0, 2), (1, 2), (2, 3)]).unwrap();
        let n: Vec<_> = g.closed_neighborhood(2).iter().collect();
        assert_eq!(n, vec![0, 1, 2, 3]);
        assert_eq!(g.closed_neighborhood(0).len(), 2);
        assert!(g.closed_neighborhood(0).contains(0));
    }

    #[test]
    fn induced_views() {
        let t = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(t.induced_subgraph(&set(&[0, 1])).edges(), vec![(0, 1)]);
        let all = set(&[0, 1, 2]);
        assert_eq!(t.induced_subgraph(&all).edges(), t.edges().collect::<Vec<_>>());
        let p = path(3);
        let view = p.induced_subgraph(&set(&[0, 2]));
        assert!(view.edges().is_empty());
        assert!(!view.is_connected());
    }

    #[test]
    fn r_independence() {
        let p = path(5);
        assert!(p.is_r_independent(&set(&[0, 3]), 2));
        assert!(!p.is_r_independent(&set(&[0, 2]), 2));
        assert!(p.is_r_independent(&set(&[4]), 7));
    }

    #[test]
    fn r_mis() {
        let p = path(5);
        let all = set(&[0, 1, 2, 3, 4]);
        assert!(p.is_r_mis(&set(&[0, 3]), &all, 2));
        assert!(!p.is_r_mis(&set(&[0]), &all, 2));
        assert!(p.is_r_mis(&set(&[2]), &set(&[2]), 3));
        assert!(p.is_r_mis(&set(&[]), &set(&[]), 2));
    }

    #[test]
    fn independence_numbers() {
        let k5: Vec<_> = (0..5).flat_map(|u| (u + 1..5).map(move |v| (u, v))).collect();
        assert_eq!(Graph::from_edges(5, &k5).unwrap().independence_number(), Ok(1));
        assert_eq!(path(5).independence_number(), Ok(3));
        let star: Vec<_> = (1..7).map(|i| (0, i)).collect();
        assert_eq!(Graph::from_edges(7, &star).unwrap().independence_number(), Ok(6));
        assert!(matches!(
            path(31).independence_number(),
            Err(GraphError::TooLarge { node_count: 31, .. })
        ));
    }

    #[test]
    fn edge_list_format() {
        let text = "# a path\n3 2\n0 1 # first\n\n1 2\n";
        let g: Graph = text.parse().unwrap();
        assert_eq!(g, path(3));
        assert_eq!(g.to_edge_list().parse::<Graph>().unwrap(), g);
        assert!(matches!("3 2\n0 1\n".parse::<Graph>(), Err(GraphError::Parse { .. })));
        assert!(matches!("2 1\n0 x\n".parse::<Graph>(), Err(GraphError::Parse { line: 2, .. })));
        assert!(matches!(
            "4 2\n0 1\n2 3\n".parse::<Graph>(),
            Err(GraphError::Disconnected { .. })
        ));
    }
}
