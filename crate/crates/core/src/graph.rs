//! Undirected communication graphs over `m` agents.
//!
//! Agents are 0-based internally. Anything that crosses the I/O boundary
//! (config files, CSV exports, error messages) uses 1-based agent ids.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("invalid graph size m = {m}: {reason}")]
    InvalidSize { m: usize, reason: &'static str },
    #[error("invalid degree d = {d} for m = {m}: {reason}")]
    InvalidDegree { m: usize, d: usize, reason: &'static str },
    #[error("handshake parity violated: m * d = {m} * {d} is odd")]
    HandshakeParity { m: usize, d: usize },
    #[error("self-loop at agent {0}")]
    SelfLoop(usize),
    #[error("edge ({0}, {1}) has an endpoint outside 1..={2}")]
    EndpointOutOfRange(usize, usize, usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("graph is not connected")]
    Disconnected,
}

/// Undirected simple graph. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkGraph {
    m: usize,
    /// Each edge stored once as `(i, j)` with `i < j`, 0-based.
    edges: BTreeSet<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
}

impl NetworkGraph {
    /// Builds a graph from 0-based edges, rejecting self-loops, out-of-range
    /// endpoints and duplicates (in either orientation).
    pub fn from_edges(m: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        if m == 0 {
            return Err(GraphError::InvalidSize { m, reason: "need at least one agent" });
        }
        let mut set = BTreeSet::new();
        for &(a, b) in edges {
            if a >= m || b >= m {
                return Err(GraphError::EndpointOutOfRange(a + 1, b + 1, m));
            }
            if a == b {
                return Err(GraphError::SelfLoop(a + 1));
            }
            let key = (a.min(b), a.max(b));
            if !set.insert(key) {
                return Err(GraphError::DuplicateEdge(key.0 + 1, key.1 + 1));
            }
        }
        let mut neighbors = vec![Vec::new(); m];
        for &(a, b) in &set {
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        Ok(Self { m, edges: set, neighbors })
    }

    /// Same as [`NetworkGraph::from_edges`] with 1-based endpoints.
    pub fn from_edges_one_based(m: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut shifted = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a == 0 || b == 0 {
                return Err(GraphError::EndpointOutOfRange(a, b, m));
            }
            shifted.push((a - 1, b - 1));
        }
        Self::from_edges(m, &shifted)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as 0-based `(i, j)` pairs with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edges.contains(&(i.min(j), i.max(j)))
    }

    /// Sorted 0-based neighbor list of agent `i`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.neighbors.iter().map(Vec::len).collect()
    }

    pub fn max_degree(&self) -> usize {
        self.neighbors.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Breadth-first reachability from agent 0.
    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.m];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut reached = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &self.neighbors[u] {
                if !seen[v] {
                    seen[v] = true;
                    reached += 1;
                    queue.push_back(v);
                }
            }
        }
        reached == self.m
    }
}

pub fn complete_graph(m: usize) -> Result<NetworkGraph, GraphError> {
    if m == 0 {
        return Err(GraphError::InvalidSize { m, reason: "need at least one agent" });
    }
    let edges: Vec<_> = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
    NetworkGraph::from_edges(m, &edges)
}

pub fn ring_graph(m: usize) -> Result<NetworkGraph, GraphError> {
    if m < 3 {
        return Err(GraphError::InvalidSize { m, reason: "a ring needs at least 3 agents" });
    }
    let edges: Vec<_> = (0..m).map(|i| (i, (i + 1) % m)).collect();
    NetworkGraph::from_edges(m, &edges)
}

/// Deterministic `d`-regular circulant graph: each agent links to offsets
/// `±1..=±⌊d/2⌋`, plus the antipodal offset `m/2` when `d` is odd.
pub fn circulant_regular_graph(m: usize, d: usize) -> Result<NetworkGraph, GraphError> {
    if m == 0 {
        return Err(GraphError::InvalidSize { m, reason: "need at least one agent" });
    }
    if d == 0 {
        return Err(GraphError::InvalidDegree { m, d, reason: "degree must be positive" });
    }
    if d >= m {
        return Err(GraphError::InvalidDegree { m, d, reason: "degree must be below m" });
    }
    if (m * d) % 2 == 1 {
        return Err(GraphError::HandshakeParity { m, d });
    }
    // Offset m/2 alone splits the ring into m/2 disjoint edges.
    if d == 1 && m > 2 {
        return Err(GraphError::Disconnected);
    }
    let mut edges = BTreeSet::new();
    for i in 0..m {
        for off in 1..=d / 2 {
            let j = (i + off) % m;
            edges.insert((i.min(j), i.max(j)));
        }
        if d % 2 == 1 {
            let j = (i + m / 2) % m;
            edges.insert((i.min(j), i.max(j)));
        }
    }
    let edges: Vec<_> = edges.into_iter().collect();
    let g = NetworkGraph::from_edges(m, &edges)?;
    debug_assert_eq!(g.edge_count(), m * d / 2);
    debug_assert!(g.degrees().iter().all(|&k| k == d));
    Ok(g)
}

/// Graph section of an experiment config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub kind: GraphKind,
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphKind {
    Complete,
    Ring,
    Circulant,
}

impl GraphSpec {
    pub fn build(&self) -> Result<NetworkGraph, GraphError> {
        match self.kind {
            GraphKind::Complete => complete_graph(self.m),
            GraphKind::Ring => ring_graph(self.m),
            GraphKind::Circulant => {
                let d = self.degree.ok_or(GraphError::InvalidDegree {
                    m: self.m,
                    d: 0,
                    reason: "circulant graphs require `degree`",
                })?;
                circulant_regular_graph(self.m, d)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn complete_graph_of_twenty_is_19_regular() {
        let g = complete_graph(20).unwrap();
        assert_eq!(g.edge_count(), 190);
        assert!(g.degrees().iter().all(|&d| d == 19));
        assert!(g.is_connected());
    }

    #[test]
    fn tiny_complete_graphs() {
        let g = complete_graph(1).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert!(g.is_connected());
        let g = complete_graph(2).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.degrees(), vec![1, 1]);
        assert!(matches!(complete_graph(0), Err(GraphError::InvalidSize { .. })));
    }

    #[test]
    fn rings() {
        let g = ring_graph(5).unwrap();
        assert_eq!(g.edge_count(), 5);
        assert!(g.degrees().iter().all(|&d| d == 2));
        assert_eq!(ring_graph(3).unwrap(), complete_graph(3).unwrap());
        assert!(ring_graph(2).is_err());
    }

    #[test]
    fn circulant_cases() {
        assert_eq!(circulant_regular_graph(20, 19).unwrap(), complete_graph(20).unwrap());
        assert_eq!(circulant_regular_graph(6, 2).unwrap(), ring_graph(6).unwrap());
        assert_eq!(
            circulant_regular_graph(5, 3),
            Err(GraphError::HandshakeParity { m: 5, d: 3 })
        );
        assert!(matches!(circulant_regular_graph(4, 4), Err(GraphError::InvalidDegree { .. })));
        assert!(matches!(circulant_regular_graph(4, 0), Err(GraphError::InvalidDegree { .. })));
        assert_eq!(circulant_regular_graph(6, 1), Err(GraphError::Disconnected));
        assert!(circulant_regular_graph(2, 1).unwrap().is_connected());
    }

    #[test]
    fn disconnected_pair_of_edges() {
        let g = NetworkGraph::from_edges_one_based(4, &[(1, 2), (3, 4)]).unwrap();
        assert!(!g.is_connected());
    }

    #[test]
    fn construction_rejects_bad_edges() {
        assert_eq!(NetworkGraph::from_edges(3, &[(1, 1)]), Err(GraphError::SelfLoop(2)));
        assert_eq!(
            NetworkGraph::from_edges(3, &[(0, 1), (1, 0)]),
            Err(GraphError::DuplicateEdge(1, 2))
        );
        assert!(matches!(
            NetworkGraph::from_edges(3, &[(0, 3)]),
            Err(GraphError::EndpointOutOfRange(..))
        ));
    }

    fn union_find_connected(m: usize, edges: &[(usize, usize)]) -> bool {
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut c = x;
            while p[c] != r {
                let next = p[c];
                p[c] = r;
                c = next;
            }
            r
        }
        let mut parent: Vec<usize> = (0..m).collect();
        for &(a, b) in edges {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra] = rb;
            }
        }
        let root = find(&mut parent, 0);
        (0..m).all(|v| find(&mut parent, v) == root)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn connectivity_matches_union_find(
            m in 1usize..=12,
            raw in proptest::collection::vec((0usize..12, 0usize..12), 0..20),
        ) {
            let mut seen = BTreeSet::new();
            let edges: Vec<_> = raw
                .into_iter()
                .map(|(a, b)| (a % m, b % m))
                .filter(|&(a, b)| a != b && seen.insert((a.min(b), a.max(b))))
                .collect();
            let g = NetworkGraph::from_edges(m, &edges).unwrap();
            prop_assert_eq!(g.is_connected(), union_find_connected(m, &edges));
            let total: usize = g.degrees().iter().sum();
            prop_assert_eq!(total, 2 * g.edge_count());
        }

        #[test]
        fn circulant_is_regular(m in 2usize..=30, d in 1usize..=29) {
            match circulant_regular_graph(m, d) {
                Ok(g) => {
                    prop_assert_eq!(g.edge_count(), m * d / 2);
                    prop_assert!(g.degrees().iter().all(|&k| k == d));
                    prop_assert!(g.is_connected());
                }
                Err(_) => prop_assert!(d >= m || (m * d) % 2 == 1 || (d == 1 && m > 2)),
            }
        }
    }
}
