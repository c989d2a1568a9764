//! Undirected graphs with node ids `1..=n` and their shortest-path metric.
//!
//! The text format is a header line `n m W` (`W` is `0` for unweighted, `1`
//! for weighted) followed by `m` edge lines `u v` or `u v w`.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Node identifier. Valid ids are `1..=n`.
pub type NodeId = u32;

/// Edge length (and path length) in the shortest-path metric.
pub type Length = u64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("graph must contain at least one node")]
    Empty,
    #[error("unknown node id {id} (valid ids are 1..={n})")]
    UnknownNode { id: NodeId, n: usize },
    #[error("self-loop at node {0}")]
    SelfLoop(NodeId),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(NodeId, NodeId),
    #[error("edge ({u}, {v}) has weight {w}; weights must be >= 1")]
    BadWeight { u: NodeId, v: NodeId, w: Length },
    #[error("edge ({u}, {v}) has weight {w} in an unweighted graph")]
    WeightInUnweighted { u: NodeId, v: NodeId, w: Length },
    #[error("graph is disconnected")]
    Disconnected,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// An undirected edge stored with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
    pub w: Length,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    weighted: bool,
    edges: Vec<Edge>,
    // adj[id - 1], sorted by neighbor id
    adj: Vec<Vec<(NodeId, Length)>>,
}

impl Graph {
    /// Builds a graph, rejecting self-loops, duplicate edges, unknown ids and
    /// non-positive weights. Unweighted graphs must use weight 1 throughout.
    pub fn new<I>(n: usize, weighted: bool, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (NodeId, NodeId, Length)>,
    {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut seen = BTreeSet::new();
        let mut list = Vec::new();
        for (a, b, w) in edges {
            for id in [a, b] {
                if id == 0 || id as usize > n {
                    return Err(GraphError::UnknownNode { id, n });
                }
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            if w == 0 {
                return Err(GraphError::BadWeight { u: a, v: b, w });
            }
            if !weighted && w != 1 {
                return Err(GraphError::WeightInUnweighted { u: a, v: b, w });
            }
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            if !seen.insert((u, v)) {
                return Err(GraphError::DuplicateEdge(u, v));
            }
            list.push(Edge { u, v, w });
        }
        list.sort();
        let mut adj = vec![Vec::new(); n];
        for e in &list {
            adj[e.u as usize - 1].push((e.v, e.w));
            adj[e.v as usize - 1].push((e.u, e.w));
        }
        for row in &mut adj {
            row.sort_unstable();
        }
        Ok(Self {
            n,
            weighted,
            edges: list,
            adj,
        })
    }

    /// Unweighted graph from plain `(u, v)` pairs.
    pub fn unweighted<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        Self::new(n, false, edges.into_iter().map(|(u, v)| (u, v, 1)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn is_weighted(&self) -> bool {
        self.weighted
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        1..=self.n as NodeId
    }

    pub fn contains(&self, id: NodeId) -> bool {
        id >= 1 && id as usize <= self.n
    }

    pub fn check_node(&self, id: NodeId) -> Result<(), GraphError> {
        if self.contains(id) {
            Ok(())
        } else {
            Err(GraphError::UnknownNode { id, n: self.n })
        }
    }

    /// Neighbors of `id` with edge weights, sorted by neighbor id.
    pub fn neighbors(&self, id: NodeId) -> &[(NodeId, Length)] {
        &self.adj[id as usize - 1]
    }

    pub fn degree(&self, id: NodeId) -> usize {
        self.adj[id as usize - 1].len()
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.contains(u)
            && self
                .neighbors(u)
                .binary_search_by_key(&v, |&(x, _)| x)
                .is_ok()
    }

    pub fn max_weight(&self) -> Length {
        self.edges.iter().map(|e| e.w).max().unwrap_or(1)
    }

    pub fn is_connected(&self) -> bool {
        hop_distances(self, 1).iter().all(Option::is_some)
    }

    pub fn ensure_connected(&self) -> Result<(), GraphError> {
        if self.is_connected() {
            Ok(())
        } else {
            Err(GraphError::Disconnected)
        }
    }

    /// Returns a copy of the graph with one more edge.
    pub fn with_edge(&self, u: NodeId, v: NodeId, w: Length) -> Result<Self, GraphError> {
        let edges = self
            .edges
            .iter()
            .map(|e| (e.u, e.v, e.w))
            .chain(std::iter::once((u, v, w)));
        Self::new(self.n, self.weighted, edges)
    }

    /// Parses the text format. Errors carry 1-based line numbers.
    pub fn parse(text: &str) -> Result<Self, GraphError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());

        let (hline, header) = lines.next().ok_or(GraphError::Parse {
            line: 1,
            msg: "missing header `n m W`".into(),
        })?;
        let head = parse_fields(hline, header, 3, 3)?;
        let (n, m, flag) = (head[0] as usize, head[1] as usize, head[2]);
        let weighted = match flag {
            0 => false,
            1 => true,
            other => {
                return Err(GraphError::Parse {
                    line: hline,
                    msg: format!("weight flag must be 0 or 1, got {other}"),
                })
            }
        };
        if n == 0 {
            return Err(GraphError::Parse {
                line: hline,
                msg: GraphError::Empty.to_string(),
            });
        }

        let mut edges = Vec::with_capacity(m);
        let mut seen = BTreeSet::new();
        let arity = if weighted { 3 } else { 2 };
        let mut last_line = hline;
        for (line, body) in lines {
            last_line = line;
            if edges.len() == m {
                return Err(GraphError::Parse {
                    line,
                    msg: format!("more than the {m} declared edges"),
                });
            }
            let f = parse_fields(line, body, arity, arity)?;
            let (u, v) = (f[0], f[1]);
            let w = if weighted { f[2] } else { 1 };
            let err = |e: GraphError| GraphError::Parse {
                line,
                msg: e.to_string(),
            };
            let as_id = |x: u64| -> Result<NodeId, GraphError> {
                if x == 0 || x > n as u64 {
                    Err(err(GraphError::UnknownNode {
                        id: x.min(NodeId::MAX as u64) as NodeId,
                        n,
                    }))
                } else {
                    Ok(x as NodeId)
                }
            };
            let (u, v) = (as_id(u)?, as_id(v)?);
            if u == v {
                return Err(err(GraphError::SelfLoop(u)));
            }
            if w == 0 {
                return Err(err(GraphError::BadWeight { u, v, w }));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(err(GraphError::DuplicateEdge(u.min(v), u.max(v))));
            }
            edges.push((u, v, w));
        }
        if edges.len() != m {
            return Err(GraphError::Parse {
                line: last_line,
                msg: format!("expected {m} edges, found {}", edges.len()),
            });
        }
        Self::new(n, weighted, edges)
    }

    /// Serializes to the text format (LF line endings, edges sorted).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {} {}", self.n, self.m(), u8::from(self.weighted));
        for e in &self.edges {
            if self.weighted {
                let _ = writeln!(out, "{} {} {}", e.u, e.v, e.w);
            } else {
                let _ = writeln!(out, "{} {}", e.u, e.v);
            }
        }
        out
    }
}

fn parse_fields(line: usize, body: &str, min: usize, max: usize) -> Result<Vec<u64>, GraphError> {
    let parts: Vec<&str> = body.split_whitespace().collect();
    if parts.len() < min || parts.len() > max {
        return Err(GraphError::Parse {
            line,
            msg: format!("expected {min} fields, found {}", parts.len()),
        });
    }
    parts
        .iter()
        .map(|p| {
            p.parse::<u64>().map_err(|_| GraphError::Parse {
                line,
                msg: format!("not a non-negative integer: {p:?}"),
            })
        })
        .collect()
}

/// Hop distances from `src` (ignoring weights); `None` for unreachable nodes.
pub fn hop_distances(g: &Graph, src: NodeId) -> Vec<Option<u64>> {
    let mut dist = vec![None; g.n()];
    let mut queue = VecDeque::new();
    dist[src as usize - 1] = Some(0);
    queue.push_back(src);
    while let Some(u) = queue.pop_front() {
        let du = dist[u as usize - 1].unwrap_or_default();
        for &(v, _) in g.neighbors(u) {
            let slot = &mut dist[v as usize - 1];
            if slot.is_none() {
                *slot = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Exact single-source shortest-path distances, indexed by `id - 1`.
///
/// BFS on unweighted graphs, Dijkstra otherwise.
pub fn sssp(g: &Graph, src: NodeId) -> Result<Vec<Length>, GraphError> {
    g.check_node(src)?;
    let dist = if g.is_weighted() {
        dijkstra(g, src)
    } else {
        hop_distances(g, src)
    };
    dist.into_iter()
        .map(|d| d.ok_or(GraphError::Disconnected))
        .collect()
}

fn dijkstra(g: &Graph, src: NodeId) -> Vec<Option<Length>> {
    let mut dist: Vec<Option<Length>> = vec![None; g.n()];
    let mut heap = BinaryHeap::new();
    dist[src as usize - 1] = Some(0);
    heap.push(Reverse((0, src)));
    while let Some(Reverse((d, u))) = heap.pop() {
        if dist[u as usize - 1].is_some_and(|best| d > best) {
            continue;
        }
        for &(v, w) in g.neighbors(u) {
            let nd = d + w;
            let slot = &mut dist[v as usize - 1];
            if slot.is_none_or(|cur| nd < cur) {
                *slot = Some(nd);
                heap.push(Reverse((nd, v)));
            }
        }
    }
    dist
}

/// All-pairs shortest-path distances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistMatrix {
    n: usize,
    d: Vec<Length>,
}

impl DistMatrix {
    pub fn new(g: &Graph) -> Result<Self, GraphError> {
        let mut d = Vec::with_capacity(g.n() * g.n());
        for src in g.nodes() {
            d.extend(sssp(g, src)?);
        }
        Ok(Self { n: g.n(), d })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, u: NodeId, v: NodeId) -> Length {
        self.d[(u as usize - 1) * self.n + (v as usize - 1)]
    }

    pub fn row(&self, u: NodeId) -> &[Length] {
        let start = (u as usize - 1) * self.n;
        &self.d[start..start + self.n]
    }

    pub fn eccentricity(&self, u: NodeId) -> Length {
        self.row(u).iter().copied().max().unwrap_or(0)
    }

    pub fn diameter(&self) -> Length {
        (1..=self.n as NodeId)
            .map(|u| self.eccentricity(u))
            .max()
            .unwrap_or(0)
    }
}

pub fn eccentricity(g: &Graph, v: NodeId) -> Result<Length, GraphError> {
    Ok(sssp(g, v)?.into_iter().max().unwrap_or(0))
}

pub fn diameter(g: &Graph) -> Result<Length, GraphError> {
    g.ensure_connected()?;
    let mut best = 0;
    for v in g.nodes() {
        best = best.max(eccentricity(g, v)?);
    }
    Ok(best)
}
