//! CONGEST-model farthest-first greedy.
//!
//! Phase A elects the minimum id by competing BFS floods, confirms the tree
//! with echoes and spreads its depth `D'` (so `D' <= D <= 2D'`) together with
//! a common start round for phase B. Phase B runs `k - 1` iterations of fixed
//! length: a multi-source BFS from the current center set, then a max-flood
//! of `(distance, id)` that tells every node who is farthest (ties to the
//! smaller id). That node joins the set at the start of the next iteration.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::graph::{diameter, Graph, GraphError, Length, NodeId};
use crate::kcenter::{CenterSolution, KCenterError};
use crate::sim::{
    Field, LocalInput, ModelConfig, NodeProgram, RoundRecord, SimError, SimStats, Simulator, Step,
    WireError, WireMessage,
};

/// Rounds are asserted to stay within `ROUND_CONSTANT * k * max(D, 1)`.
pub const ROUND_CONSTANT: u64 = 10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CongestError {
    #[error("k must be at least 1")]
    ZeroK,
    #[error("the CONGEST algorithm runs on unweighted graphs only")]
    Weighted,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    KCenter(#[from] KCenterError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CongestMsg {
    /// BFS announcement for source `src`; `parent` is `None` at the source.
    Flood { src: NodeId, parent: Option<NodeId> },
    /// Subtree of the `src` tree below the sender is done; `depth` is its deepest level.
    Echo { src: NodeId, depth: u64 },
    /// Depth of the leader's tree.
    Depth(u64),
    /// Multi-source BFS wave from the center set.
    Wave,
    /// Best `(distance, id)` candidate seen so far.
    Best { dist: u64, id: NodeId },
}

impl WireMessage for CongestMsg {
    fn encode(&self) -> Vec<Field> {
        match *self {
            Self::Flood { src, parent } => vec![Field::Id(src), Field::Id(parent.unwrap_or(0))],
            Self::Echo { src, depth } => vec![Field::Id(src), Field::Dist(depth)],
            Self::Depth(d) => vec![Field::Dist(d)],
            Self::Wave => vec![Field::Count(0)],
            Self::Best { dist, id } => vec![Field::Dist(dist), Field::Id(id)],
        }
    }

    fn decode(fields: &[Field]) -> Result<Self, WireError> {
        Ok(match *fields {
            [Field::Id(src), Field::Id(p)] => Self::Flood {
                src,
                parent: (p != 0).then_some(p),
            },
            [Field::Id(src), Field::Dist(depth)] => Self::Echo { src, depth },
            [Field::Dist(d)] => Self::Depth(d),
            [Field::Count(0)] => Self::Wave,
            [Field::Dist(dist), Field::Id(id)] => Self::Best { dist, id },
            _ => return Err(WireError::Undecodable),
        })
    }
}

/// Algorithm program; immutable and reusable across runs.
#[derive(Debug, Clone, Copy)]
pub struct CongestKCenter {
    pub k: usize,
}

#[derive(Debug, Clone)]
pub struct CongestState {
    id: NodeId,
    neighbors: Vec<NodeId>,
    // phase A
    best: NodeId,
    parent: Option<NodeId>,
    depth: u64,
    adopted_at: u64,
    announced: BTreeMap<NodeId, (NodeId, Option<NodeId>)>,
    echoes: BTreeMap<NodeId, (NodeId, u64)>,
    echoed_for: Option<NodeId>,
    children: Vec<NodeId>,
    d_prime: Option<u64>,
    phase_b: Option<u64>,
    // phase B
    in_s: bool,
    dist: Option<u64>,
    last_dist: Option<u64>,
    candidate: Option<(u64, NodeId)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CongestOutput {
    pub is_center: bool,
    pub leader: NodeId,
    pub d_prime: Option<u64>,
    /// Distance to the center set as measured by the last BFS.
    pub dist_to_centers: Option<u64>,
}

/// `(dist, id)` ordering: larger distance wins, then smaller id.
fn beats(a: (u64, NodeId), b: Option<(u64, NodeId)>) -> bool {
    match b {
        None => true,
        Some(b) => a.0 > b.0 || (a.0 == b.0 && a.1 < b.1),
    }
}

impl CongestKCenter {
    fn broadcast(s: &CongestState, msg: CongestMsg, out: &mut Vec<(NodeId, CongestMsg)>) {
        out.extend(s.neighbors.iter().map(|&u| (u, msg)));
    }

    fn try_echo(s: &mut CongestState, round: u64, out: &mut Vec<(NodeId, CongestMsg)>) {
        if s.d_prime.is_some() || s.echoed_for == Some(s.best) || round <= s.adopted_at {
            return;
        }
        let settled = s
            .neighbors
            .iter()
            .all(|u| s.announced.get(u).is_some_and(|&(src, _)| src == s.best));
        if !settled {
            return;
        }
        let children: Vec<NodeId> = s
            .neighbors
            .iter()
            .copied()
            .filter(|u| s.announced[u] == (s.best, Some(s.id)))
            .collect();
        let mut deepest = s.depth;
        for c in &children {
            match s.echoes.get(c) {
                Some(&(src, d)) if src == s.best => deepest = deepest.max(d),
                _ => return,
            }
        }
        s.children = children;
        if let Some(parent) = s.parent {
            s.echoed_for = Some(s.best);
            out.push((
                parent,
                CongestMsg::Echo {
                    src: s.best,
                    depth: deepest,
                },
            ));
        } else {
            // leader: the whole graph has reported
            s.d_prime = Some(deepest);
            s.phase_b = Some(round + deepest + 1);
            for &c in &s.children {
                out.push((c, CongestMsg::Depth(deepest)));
            }
        }
    }
}

impl NodeProgram for CongestKCenter {
    type State = CongestState;
    type Msg = CongestMsg;
    type Output = CongestOutput;

    fn init(&self, input: &LocalInput) -> CongestState {
        CongestState {
            id: input.id,
            neighbors: input.neighbors.iter().map(|&(u, _)| u).collect(),
            best: input.id,
            parent: None,
            depth: 0,
            adopted_at: 0,
            announced: BTreeMap::new(),
            echoes: BTreeMap::new(),
            echoed_for: None,
            children: Vec::new(),
            d_prime: None,
            phase_b: None,
            in_s: false,
            dist: None,
            last_dist: None,
            candidate: None,
        }
    }

    fn on_round(
        &self,
        s: &mut CongestState,
        round: u64,
        inbox: &[(NodeId, CongestMsg)],
    ) -> Step<CongestMsg> {
        let mut out = Vec::new();
        if round == 1 {
            Self::broadcast(
                s,
                CongestMsg::Flood {
                    src: s.id,
                    parent: None,
                },
                &mut out,
            );
        }

        let mut adopt: Option<(NodeId, NodeId)> = None;
        let mut waved = false;
        let mut best_in: Option<(u64, NodeId)> = None;
        for &(from, msg) in inbox {
            match msg {
                CongestMsg::Flood { src, parent } => {
                    s.announced.insert(from, (src, parent));
                    let current = adopt.map_or(s.best, |(src, _)| src);
                    if src < current {
                        adopt = Some((src, from));
                    }
                }
                CongestMsg::Echo { src, depth } => {
                    s.echoes.insert(from, (src, depth));
                }
                CongestMsg::Depth(d) if Some(from) == s.parent => {
                    s.d_prime = Some(d);
                    s.phase_b = Some(round + (d - s.depth) + 1);
                    for &c in &s.children {
                        out.push((c, CongestMsg::Depth(d)));
                    }
                }
                CongestMsg::Depth(_) => {}
                CongestMsg::Wave => waved = true,
                CongestMsg::Best { dist, id } => {
                    if beats((dist, id), best_in) {
                        best_in = Some((dist, id));
                    }
                }
            }
        }

        if let Some((src, from)) = adopt {
            s.best = src;
            s.parent = Some(from);
            s.depth = round - 1;
            s.adopted_at = round;
            Self::broadcast(
                s,
                CongestMsg::Flood {
                    src,
                    parent: Some(from),
                },
                &mut out,
            );
        }
        Self::try_echo(s, round, &mut out);

        let (Some(start), Some(d_prime)) = (s.phase_b, s.d_prime) else {
            return Step::send(out);
        };
        if round < start {
            return Step::send(out);
        }
        if round == start && s.parent.is_none() {
            s.in_s = true;
        }
        let window = 2 * d_prime.max(1) + 1;
        let iter_len = 2 * window;
        let offset = round - start;
        let (iter, r) = (offset / iter_len, offset % iter_len);

        let mut improved = false;
        if let Some(b) = best_in {
            if beats(b, s.candidate) {
                s.candidate = Some(b);
                improved = true;
            }
        }
        if r == 0 && iter > 0 {
            if s.candidate.is_some_and(|(_, id)| id == s.id) {
                s.in_s = true;
            }
            s.last_dist = s.dist;
        }
        if iter + 1 >= self.k as u64 {
            return Step::halt_with(out);
        }

        if r == 0 {
            s.candidate = None;
            s.dist = s.in_s.then_some(0);
            if s.in_s {
                Self::broadcast(s, CongestMsg::Wave, &mut out);
            }
        } else if r < window {
            if waved && s.dist.is_none() {
                s.dist = Some(r);
                Self::broadcast(s, CongestMsg::Wave, &mut out);
            }
        } else if r == window {
            if !s.in_s {
                let own = (s.dist.unwrap_or(0), s.id);
                if beats(own, s.candidate) {
                    s.candidate = Some(own);
                    improved = true;
                }
            }
            if improved {
                Self::broadcast(s, best_msg(s.candidate), &mut out);
            }
        } else if improved {
            Self::broadcast(s, best_msg(s.candidate), &mut out);
        }
        Step::send(out)
    }

    fn output(&self, s: &CongestState) -> CongestOutput {
        CongestOutput {
            is_center: s.in_s,
            leader: s.best,
            d_prime: s.d_prime,
            dist_to_centers: if s.in_s {
                Some(0)
            } else {
                s.last_dist.or(s.dist)
            },
        }
    }
}

fn best_msg(c: Option<(u64, NodeId)>) -> CongestMsg {
    let (dist, id) = c.expect("candidate set before broadcast");
    CongestMsg::Best { dist, id }
}

#[derive(Debug, Clone, Serialize)]
pub struct CongestRun {
    pub solution: CenterSolution,
    pub stats: SimStats,
    pub diameter: Length,
    pub d_prime: u64,
    pub leader: NodeId,
    /// `ROUND_CONSTANT * k * max(D, 1)`.
    pub round_bound: u64,
    #[serde(skip)]
    pub trace: Vec<RoundRecord>,
}

impl CongestRun {
    pub fn rounds_ok(&self) -> bool {
        self.stats.rounds <= self.round_bound
    }
}

/// Runs the CONGEST algorithm in the simulator under `cfg` (normally
/// [`ModelConfig::congest`]).
pub fn congest_kcenter_with(
    g: &Graph,
    k: usize,
    cfg: ModelConfig,
    trace: bool,
) -> Result<CongestRun, CongestError> {
    if k == 0 {
        return Err(CongestError::ZeroK);
    }
    if g.is_weighted() {
        return Err(CongestError::Weighted);
    }
    g.ensure_connected()?;
    let d = diameter(g)?;
    let round_bound = ROUND_CONSTANT * k as u64 * d.max(1);
    // generous cap so that a slow run is reported instead of aborted
    let cap = 2 * round_bound + 4 * g.n() as u64 + 16;
    let out = Simulator::new(cfg, cap)
        .with_trace(trace)
        .run(g, &CongestKCenter { k })?;
    let centers: Vec<NodeId> = g
        .nodes()
        .filter(|&v| out.outputs[v as usize - 1].is_center)
        .collect();
    let first = &out.outputs[0];
    Ok(CongestRun {
        solution: CenterSolution::evaluate(g, &centers)?,
        stats: out.stats,
        diameter: d,
        d_prime: first.d_prime.unwrap_or(0),
        leader: first.leader,
        round_bound,
        trace: out.trace,
    })
}

pub fn congest_kcenter(g: &Graph, k: usize) -> Result<CongestRun, CongestError> {
    congest_kcenter_with(g, k, ModelConfig::congest(), false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{cycle, gnp, path, star};
    use crate::kcenter::{greedy_order, opt_k_bruteforce, DistanceSource};

    fn greedy_set(g: &Graph, k: usize) -> Vec<NodeId> {
        let mut s = greedy_order(&DistanceSource::exact(g).unwrap(), k, 1);
        s.sort_unstable();
        s
    }

    #[test]
    fn cycle_twelve_matches_greedy() {
        let g = cycle(12).unwrap();
        let run = congest_kcenter(&g, 3).unwrap();
        assert_eq!(run.solution.centers, greedy_set(&g, 3));
        assert_eq!(run.solution.centers, vec![1, 4, 7]);
        assert!(run.solution.radius <= 4);
        assert_eq!(run.leader, 1);
        assert_eq!(run.d_prime, 6);
        assert!(
            run.rounds_ok(),
            "{} > {}",
            run.stats.rounds,
            run.round_bound
        );
    }

    #[test]
    fn single_center_is_the_leader() {
        let g = path(7).unwrap();
        let run = congest_kcenter(&g, 1).unwrap();
        assert_eq!(run.solution.centers, vec![1]);
        assert_eq!(run.solution.radius, 6);
    }

    #[test]
    fn star_is_the_tight_case() {
        let g = star(9).unwrap();
        let run = congest_kcenter(&g, 2).unwrap();
        assert_eq!(run.solution.centers, vec![1, 2]);
        assert_eq!(run.solution.radius, 1);
        let g = star(9).unwrap();
        // seeded at a leaf instead, the greedy doubles the optimum
        let leafy = Graph::unweighted(9, g.edges().iter().map(|e| (10 - e.u, 10 - e.v))).unwrap();
        let run = congest_kcenter(&leafy, 2).unwrap();
        assert_eq!(run.solution.centers, vec![1, 2]);
        assert_eq!(run.solution.radius, 2);
        assert_eq!(opt_k_bruteforce(&leafy, 2).unwrap().radius, 1);
    }

    #[test]
    fn random_graphs_match_greedy() {
        for seed in 0..40 {
            let n = 2 + (seed as usize % 11);
            let g = gnp(n, 0.35, 1, seed).unwrap();
            for k in 1..=4 {
                let run = congest_kcenter(&g, k).unwrap();
                assert_eq!(run.solution.centers, greedy_set(&g, k), "seed {seed} k {k}");
                assert!(run.rounds_ok(), "seed {seed} k {k}");
                let budget = run.stats.budget_bits.unwrap();
                assert!(run.stats.max_message_bits <= budget);
            }
        }
    }

    #[test]
    fn more_centers_than_nodes() {
        let g = path(3).unwrap();
        let run = congest_kcenter(&g, 5).unwrap();
        assert_eq!(run.solution.centers, vec![1, 2, 3]);
        assert_eq!(run.solution.radius, 0);
    }

    #[test]
    fn single_node() {
        let g = Graph::unweighted(1, []).unwrap();
        let run = congest_kcenter(&g, 2).unwrap();
        assert_eq!(run.solution.centers, vec![1]);
    }

    #[test]
    fn tight_bandwidth_still_fits() {
        // three words cover the largest message, two tagged fields
        let g = gnp(12, 0.3, 1, 3).unwrap();
        let run = congest_kcenter_with(&g, 3, ModelConfig::congest().with_kappa(3), false).unwrap();
        assert_eq!(run.solution.centers, greedy_set(&g, 3));
    }

    #[test]
    fn rejects_weighted_input() {
        let g = gnp(6, 0.6, 4, 1).unwrap();
        assert_eq!(congest_kcenter(&g, 2).unwrap_err(), CongestError::Weighted);
    }

    #[test]
    fn messages_round_trip() {
        for m in [
            CongestMsg::Flood {
                src: 3,
                parent: None,
            },
            CongestMsg::Flood {
                src: 3,
                parent: Some(2),
            },
            CongestMsg::Echo { src: 1, depth: 4 },
            CongestMsg::Depth(7),
            CongestMsg::Wave,
            CongestMsg::Best { dist: 2, id: 9 },
        ] {
            assert_eq!(CongestMsg::decode(&m.encode()), Ok(m));
        }
    }
}
