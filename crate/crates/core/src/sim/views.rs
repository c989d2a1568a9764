//! Distance-`t` neighborhoods, the information a `t`-round LOCAL node can
//! base its decision on.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::graph::{hop_distances, Edge, Graph, NodeId};

/// Induced subgraph on the nodes within `t` hops of `center`, original ids kept.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct View {
    pub center: NodeId,
    pub radius: usize,
    pub nodes: BTreeSet<NodeId>,
    pub edges: BTreeSet<Edge>,
}

impl View {
    pub fn neighbors_of(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.edges.iter().filter_map(move |e| {
            if e.u == id {
                Some(e.v)
            } else if e.v == id {
                Some(e.u)
            } else {
                None
            }
        })
    }

    /// Builds the view from a (possibly larger) set of known edges.
    pub fn from_edges(center: NodeId, radius: usize, known: &BTreeSet<Edge>) -> Self {
        let mut nodes = BTreeSet::from([center]);
        let mut frontier = vec![center];
        for _ in 0..radius {
            let mut next = Vec::new();
            for &u in &frontier {
                for e in known {
                    let other = if e.u == u {
                        e.v
                    } else if e.v == u {
                        e.u
                    } else {
                        continue;
                    };
                    if nodes.insert(other) {
                        next.push(other);
                    }
                }
            }
            frontier = next;
        }
        let edges = known
            .iter()
            .filter(|e| nodes.contains(&e.u) && nodes.contains(&e.v))
            .copied()
            .collect();
        Self {
            center,
            radius,
            nodes,
            edges,
        }
    }
}

/// One view per node, indexed by `id - 1`. Distances are hop counts.
pub fn local_views(g: &Graph, t: usize) -> Vec<View> {
    g.nodes().map(|v| local_view(g, v, t)).collect()
}

pub fn local_view(g: &Graph, v: NodeId, t: usize) -> View {
    let dist = hop_distances(g, v);
    let nodes: BTreeSet<NodeId> = g
        .nodes()
        .filter(|&u| dist[u as usize - 1].is_some_and(|d| d <= t as u64))
        .collect();
    let edges = g
        .edges()
        .iter()
        .filter(|e| nodes.contains(&e.u) && nodes.contains(&e.v))
        .copied()
        .collect();
    View {
        center: v,
        radius: t,
        nodes,
        edges,
    }
}
