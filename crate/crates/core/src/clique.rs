//! CLIQUE-model k-center: learn distances, then run the greedy in lockstep.
//!
//! Phase 1 either spreads the whole edge list to every node or hands each
//! node its row of an injected distance source. In phase 2 every node
//! broadcasts its distance to the center set once per iteration; all nodes
//! pick the same farthest node (smaller id on ties) and add it to the set.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::graph::{sssp, Edge, Graph, GraphError, Length, NodeId};
use crate::kcenter::{CenterSolution, DistanceSource, KCenterError};
use crate::sim::{
    Encoding, Field, LocalInput, ModelConfig, NodeProgram, SimError, SimStats, Simulator, Step,
    WireError, WireMessage,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliqueError {
    #[error("k must be at least 1")]
    ZeroK,
    #[error("distance source covers {got} nodes, graph has {expected}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("nodes disagree on the center sequence")]
    Inconsistent,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    KCenter(#[from] KCenterError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// How nodes learn their distances.
#[derive(Debug, Clone, Copy)]
pub enum Phase1<'a> {
    /// Spread every edge to every node, then run SSSP locally.
    ExactBroadcast,
    /// Each node starts with its row of the given source.
    Injected(&'a DistanceSource),
}

/// Textual phase-1 choice: `exact` or `inject:ALPHA[:SEED]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Phase1Spec {
    Exact,
    Inject { alpha: f64, seed: Option<u64> },
}

impl std::str::FromStr for Phase1Spec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("expected `exact` or `inject:ALPHA[:SEED]`, got `{s}`");
        let mut parts = s.split(':');
        match parts.next() {
            Some("exact") if parts.next().is_none() => Ok(Self::Exact),
            Some("inject") => {
                let alpha = parts.next().and_then(|a| a.parse().ok()).ok_or_else(bad)?;
                let seed = match parts.next() {
                    Some(x) => Some(x.parse().map_err(|_| bad())?),
                    None => None,
                };
                if parts.next().is_some() {
                    return Err(bad());
                }
                Ok(Self::Inject { alpha, seed })
            }
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CliqueMsg {
    Leader(NodeId),
    /// Number of edges the sender owns (edges to larger ids).
    EdgeCount(u64),
    Edge {
        u: NodeId,
        v: NodeId,
        w: Option<Length>,
    },
    /// An edge weight while edges are spread (when records are split in
    /// two), otherwise the sender's distance to the current center set.
    Value(Length),
}

impl WireMessage for CliqueMsg {
    fn encode(&self) -> Vec<Field> {
        match *self {
            Self::Leader(id) => vec![Field::Id(id)],
            Self::EdgeCount(c) => vec![Field::Count(c)],
            Self::Edge { u, v, w: None } => vec![Field::Id(u), Field::Id(v)],
            Self::Edge { u, v, w: Some(w) } => vec![Field::Id(u), Field::Id(v), Field::Dist(w)],
            Self::Value(d) => vec![Field::Dist(d)],
        }
    }

    fn decode(fields: &[Field]) -> Result<Self, WireError> {
        Ok(match *fields {
            [Field::Id(id)] => Self::Leader(id),
            [Field::Count(c)] => Self::EdgeCount(c),
            [Field::Id(u), Field::Id(v)] => Self::Edge { u, v, w: None },
            [Field::Id(u), Field::Id(v), Field::Dist(w)] => Self::Edge { u, v, w: Some(w) },
            [Field::Dist(d)] => Self::Value(d),
            _ => return Err(WireError::Undecodable),
        })
    }
}

/// Algorithm program. `elect` adds one round in which every node broadcasts
/// its id so that the seed is the minimum id rather than the assumed node 1.
#[derive(Debug, Clone, Copy)]
pub struct CliqueKCenter<'a> {
    pub k: usize,
    pub phase1: Phase1<'a>,
    pub elect: bool,
    pub weighted: bool,
    /// Send each weighted edge record over two rounds, ids first, when a
    /// whole record exceeds the per-pair budget.
    pub split: bool,
}

#[derive(Debug, Clone)]
pub struct CliqueState {
    id: NodeId,
    n: usize,
    own: Vec<Edge>,
    counts: Vec<u64>,
    relay: Vec<Edge>,
    known: Vec<Edge>,
    pending: BTreeMap<NodeId, (NodeId, NodeId)>,
    seed: NodeId,
    /// Distances from this node, once known.
    row: Option<Vec<Length>>,
    /// Round in which phase 2 starts.
    phase2_at: Option<u64>,
    centers: Vec<NodeId>,
    to_centers: Length,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CliqueOutput {
    pub is_center: bool,
    /// Centers in selection order, as replicated at this node.
    pub sequence: Vec<NodeId>,
    pub phase2_at: Option<u64>,
}

impl CliqueKCenter<'_> {
    fn offset(&self) -> u64 {
        self.elect as u64
    }

    fn slots(&self) -> u64 {
        if self.split {
            2
        } else {
            1
        }
    }

    /// Part `slot` of the record for `e`.
    fn edge_msg(&self, e: Edge, slot: u64) -> CliqueMsg {
        match slot {
            0 => CliqueMsg::Edge {
                u: e.u,
                v: e.v,
                w: (self.weighted && !self.split).then_some(e.w),
            },
            _ => CliqueMsg::Value(e.w),
        }
    }

    fn broadcast(s: &CliqueState, msg: CliqueMsg) -> Vec<(NodeId, CliqueMsg)> {
        (1..=s.n as NodeId)
            .filter(|&u| u != s.id)
            .map(|u| (u, msg))
            .collect()
    }

    fn join(&self, s: &mut CliqueState, v: NodeId) {
        s.centers.push(v);
        let row = s.row.as_ref().expect("distances known in phase 2");
        s.to_centers = s.to_centers.min(row[v as usize - 1]);
    }

    /// Starts phase 2 at `round`; returns the first broadcast.
    fn start_phase2(&self, s: &mut CliqueState, round: u64) -> Step<CliqueMsg> {
        s.phase2_at = Some(round);
        s.to_centers = Length::MAX;
        self.join(s, s.seed);
        if self.k <= 1 || s.n == 1 {
            return Step::halt();
        }
        Step::send(Self::broadcast(s, CliqueMsg::Value(s.to_centers)))
    }
}

impl NodeProgram for CliqueKCenter<'_> {
    type State = CliqueState;
    type Msg = CliqueMsg;
    type Output = CliqueOutput;

    fn init(&self, input: &LocalInput) -> CliqueState {
        let own = input
            .neighbors
            .iter()
            .filter(|&&(u, _)| u > input.id)
            .map(|&(u, w)| Edge {
                u: input.id,
                v: u,
                w,
            })
            .collect();
        let row = match self.phase1 {
            Phase1::Injected(ds) => Some(ds.row(input.id).to_vec()),
            Phase1::ExactBroadcast => None,
        };
        CliqueState {
            id: input.id,
            n: input.n,
            own,
            counts: Vec::new(),
            relay: Vec::new(),
            known: Vec::new(),
            pending: BTreeMap::new(),
            seed: 1,
            row,
            phase2_at: None,
            centers: Vec::new(),
            to_centers: Length::MAX,
        }
    }

    fn on_round(
        &self,
        s: &mut CliqueState,
        round: u64,
        inbox: &[(NodeId, CliqueMsg)],
    ) -> Step<CliqueMsg> {
        if self.elect && round == 1 {
            return Step::send(Self::broadcast(s, CliqueMsg::Leader(s.id)));
        }
        if self.elect && round == 2 {
            s.seed = inbox
                .iter()
                .filter_map(|&(_, m)| match m {
                    CliqueMsg::Leader(id) => Some(id),
                    _ => None,
                })
                .fold(s.id, NodeId::min);
        }
        let round = round - self.offset();

        if let Some(start) = s.phase2_at {
            // one broadcast per iteration, received the round after
            let mut pick: Option<(Length, NodeId)> = Some((s.to_centers, s.id));
            if s.centers.contains(&s.id) {
                pick = None;
            }
            for &(from, msg) in inbox {
                if let CliqueMsg::Value(d) = msg {
                    if !s.centers.contains(&from)
                        && pick.is_none_or(|(bd, bid)| d > bd || (d == bd && from < bid))
                    {
                        pick = Some((d, from));
                    }
                }
            }
            if let Some((_, v)) = pick {
                self.join(s, v);
            }
            let done = s.centers.len() >= self.k.min(s.n) || round - start + 1 >= self.k as u64;
            if done {
                return Step::halt();
            }
            return Step::send(Self::broadcast(s, CliqueMsg::Value(s.to_centers)));
        }

        if s.row.is_some() {
            return self.start_phase2(s, round);
        }

        match round {
            1 => Step::send(Self::broadcast(s, CliqueMsg::EdgeCount(s.own.len() as u64))),
            r => {
                let slots = self.slots();
                if r == 2 {
                    let mut counts = vec![0u64; s.n];
                    counts[s.id as usize - 1] = s.own.len() as u64;
                    for &(from, msg) in inbox {
                        if let CliqueMsg::EdgeCount(c) = msg {
                            counts[from as usize - 1] = c;
                        }
                    }
                    s.counts = counts;
                }
                // records sent in rounds 2..=1+slots reach their relays
                let collecting = r <= 2 + slots;
                for &(from, msg) in inbox {
                    let e = match msg {
                        CliqueMsg::Edge { u, v, w: None } if self.split => {
                            s.pending.insert(from, (u, v));
                            continue;
                        }
                        CliqueMsg::Edge { u, v, w } => Edge {
                            u,
                            v,
                            w: w.unwrap_or(1),
                        },
                        CliqueMsg::Value(w) => match s.pending.remove(&from) {
                            Some((u, v)) => Edge { u, v, w },
                            None => continue,
                        },
                        _ => continue,
                    };
                    if collecting {
                        s.relay.push(e);
                    } else {
                        s.known.push(e);
                    }
                }

                if r < 2 + slots {
                    let base: u64 = s.counts[..s.id as usize - 1].iter().sum();
                    let n = s.n as u64;
                    let slot = r - 2;
                    let mut out = Vec::new();
                    for (j, &e) in s.own.iter().enumerate() {
                        let relay = ((base + j as u64) % n) as NodeId + 1;
                        if relay != s.id {
                            out.push((relay, self.edge_msg(e, slot)));
                        } else if slot == 0 {
                            s.relay.push(e);
                        }
                    }
                    return Step::send(out);
                }
                if r == 2 + slots {
                    s.relay.sort_unstable();
                    s.known.extend(s.relay.iter().copied());
                }
                let m: u64 = s.counts.iter().sum();
                let spread_rounds = m.div_ceil(s.n as u64) * slots;
                let step = r - (2 + slots);
                if step < spread_rounds {
                    let msg = s
                        .relay
                        .get((step / slots) as usize)
                        .map(|&e| self.edge_msg(e, step % slots));
                    return Step::send(msg.map(|m| Self::broadcast(s, m)).unwrap_or_default());
                }
                let g = Graph::new(s.n, self.weighted, s.known.iter().map(|e| (e.u, e.v, e.w)))
                    .expect("edges rebuilt from valid input");
                s.row = Some(sssp(&g, s.id).expect("input graph is connected"));
                self.start_phase2(s, r)
            }
        }
    }

    fn output(&self, s: &CliqueState) -> CliqueOutput {
        CliqueOutput {
            is_center: s.centers.contains(&s.id),
            sequence: s.centers.clone(),
            phase2_at: s.phase2_at.map(|r| r + self.offset()),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CliqueRun {
    pub solution: CenterSolution,
    pub sequence: Vec<NodeId>,
    pub stats: SimStats,
    pub phase1_rounds: u64,
    /// Whether weighted edge records were sent in two parts.
    pub split_records: bool,
    /// Rounds of phase 2 in which messages were sent.
    pub phase2_rounds: u64,
}

pub fn clique_kcenter(g: &Graph, k: usize, phase1: Phase1<'_>) -> Result<CliqueRun, CliqueError> {
    clique_kcenter_with(g, k, phase1, false, ModelConfig::clique())
}

pub fn clique_kcenter_with(
    g: &Graph,
    k: usize,
    phase1: Phase1<'_>,
    elect: bool,
    cfg: ModelConfig,
) -> Result<CliqueRun, CliqueError> {
    if k == 0 {
        return Err(CliqueError::ZeroK);
    }
    g.ensure_connected()?;
    let mut enc = Encoding::for_graph(g);
    if let Phase1::Injected(ds) = phase1 {
        if ds.n() != g.n() {
            return Err(CliqueError::SizeMismatch {
                expected: g.n(),
                got: ds.n(),
            });
        }
        enc = Encoding::new(g.n(), enc.dist_cap.max(ds.max_value()));
    }
    let n = g.n() as NodeId;
    let record = [Field::Id(n), Field::Id(n), Field::Dist(g.max_weight())];
    let split = g.is_weighted()
        && matches!(phase1, Phase1::ExactBroadcast)
        && cfg
            .budget_bits(g.n())
            .is_some_and(|b| enc.message_bits(&record).map_or(true, |bits| bits > b));
    let prog = CliqueKCenter {
        k,
        phase1,
        elect,
        weighted: g.is_weighted(),
        split,
    };
    let cap = 8 + k as u64 + 2 * (g.m() as u64).div_ceil(g.n() as u64);
    let out = Simulator::new(cfg, cap).with_encoding(enc).run(g, &prog)?;

    let sequence = out.outputs[0].sequence.clone();
    if out.outputs.iter().any(|o| o.sequence != sequence) {
        return Err(CliqueError::Inconsistent);
    }
    let start = out.outputs[0].phase2_at.unwrap_or(1);
    let phase2_rounds = out.stats.active_rounds().filter(|&r| r >= start).count() as u64;
    let centers: Vec<NodeId> = g
        .nodes()
        .filter(|&v| out.outputs[v as usize - 1].is_center)
        .collect();
    Ok(CliqueRun {
        solution: CenterSolution::evaluate(g, &centers)?,
        sequence,
        stats: out.stats,
        phase1_rounds: start - 1,
        split_records: split,
        phase2_rounds,
    })
}
