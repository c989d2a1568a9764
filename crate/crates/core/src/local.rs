//! LOCAL-model k-center: the BFS-or-aggregate algorithm, plus the adapter
//! that runs any view-based rule as a node program.
//!
//! Node 1 grows a BFS tree of depth `ceil(t * k)` with `t = 2 + 4 / eps`.
//! If the tree spans the graph, node 1 collects the whole topology over the
//! tree, solves k-center with the farthest-first greedy and pushes the answer
//! back down. Otherwise node 1 is the only center.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::Ratio;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{Edge, Graph, GraphError, Length, NodeId};
use crate::kcenter::{greedy_order, CenterSolution, DistanceSource, KCenterError};
use crate::sim::{
    Field, LocalInput, ModelConfig, NodeProgram, SimError, SimStats, Simulator, Step, View,
    WireError, WireMessage,
};

pub type Rational = Ratio<i64>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LocalError {
    #[error("eps must be positive, got {0}")]
    BadEpsilon(Rational),
    #[error("k must be at least 1")]
    ZeroK,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    KCenter(#[from] KCenterError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Parses `3`, `1/3` or `0.25` into an exact rational.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let (num, den) = (num.trim().parse().ok()?, den.trim().parse::<i64>().ok()?);
        return (den != 0).then(|| Ratio::new(num, den));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) || frac.len() > 12 {
            return None;
        }
        let scale = 10i64.pow(frac.len() as u32);
        let neg = int.starts_with('-');
        let int: i64 = if int.is_empty() || int == "-" {
            0
        } else {
            int.parse().ok()?
        };
        let frac: i64 = frac.parse().ok()?;
        let mag = int.abs() * scale + frac;
        return Some(Ratio::new(if neg { -mag } else { mag }, scale));
    }
    s.parse::<i64>().ok().map(Ratio::from_integer)
}

/// `t = 2 + 4 / eps`.
pub fn round_factor(eps: Rational) -> Result<Rational, LocalError> {
    if eps <= Ratio::from_integer(0) {
        return Err(LocalError::BadEpsilon(eps));
    }
    Ok(Ratio::from_integer(2) + Ratio::from_integer(4) / eps)
}

/// BFS depth budget `ceil(t * k)`.
pub fn depth_budget(eps: Rational, k: usize) -> Result<u64, LocalError> {
    let tk = round_factor(eps)? * Ratio::from_integer(k as i64);
    Ok(tk.ceil().to_integer().max(1) as u64)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Alg1Msg {
    /// Sender joined the tree with this parent (`None` at the root).
    Explore {
        parent: Option<NodeId>,
    },
    /// Subtree summary sent to the parent; edges only when complete.
    Report {
        complete: bool,
        edges: Vec<Edge>,
    },
    Decision {
        centers: Vec<NodeId>,
    },
}

const EXPLORE: u64 = 0;
const REPORT: u64 = 1;
const DECISION: u64 = 2;

impl WireMessage for Alg1Msg {
    fn encode(&self) -> Vec<Field> {
        match self {
            Self::Explore { parent } => vec![Field::Count(EXPLORE), Field::Id(parent.unwrap_or(0))],
            Self::Report { complete, edges } => {
                let mut f = vec![Field::Count(REPORT), Field::Count(u64::from(*complete))];
                for e in edges {
                    f.extend([Field::Id(e.u), Field::Id(e.v), Field::Dist(e.w)]);
                }
                f
            }
            Self::Decision { centers } => std::iter::once(Field::Count(DECISION))
                .chain(centers.iter().map(|&c| Field::Id(c)))
                .collect(),
        }
    }

    fn decode(fields: &[Field]) -> Result<Self, WireError> {
        match fields {
            [Field::Count(EXPLORE), Field::Id(p)] => Ok(Self::Explore {
                parent: (*p != 0).then_some(*p),
            }),
            [Field::Count(REPORT), Field::Count(c @ 0..=1), rest @ ..] if rest.len() % 3 == 0 => {
                let edges = rest
                    .chunks(3)
                    .map(|ch| match ch {
                        [Field::Id(u), Field::Id(v), Field::Dist(w)] => Ok(Edge {
                            u: *u,
                            v: *v,
                            w: *w,
                        }),
                        _ => Err(WireError::Undecodable),
                    })
                    .collect::<Result<_, _>>()?;
                Ok(Self::Report {
                    complete: *c == 1,
                    edges,
                })
            }
            [Field::Count(DECISION), rest @ ..] => {
                let centers = rest
                    .iter()
                    .map(|f| match f {
                        Field::Id(c) => Ok(*c),
                        _ => Err(WireError::Undecodable),
                    })
                    .collect::<Result<_, _>>()?;
                Ok(Self::Decision { centers })
            }
            _ => Err(WireError::Undecodable),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalKCenter {
    pub k: usize,
    pub depth: u64,
}

#[derive(Debug, Clone)]
pub struct Alg1State {
    id: NodeId,
    n: usize,
    neighbors: Vec<(NodeId, Length)>,
    depth: Option<u64>,
    join_round: u64,
    parent: Option<NodeId>,
    announced: BTreeMap<NodeId, Option<NodeId>>,
    children: Option<Vec<NodeId>>,
    local_complete: bool,
    reports: BTreeMap<NodeId, (bool, Vec<Edge>)>,
    reported: bool,
    is_center: bool,
    aggregated: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Alg1Output {
    pub is_center: bool,
    pub depth: Option<u64>,
    /// Set at node 1 only: whether the tree spanned the graph.
    pub aggregated: Option<bool>,
}

impl LocalKCenter {
    fn own_edges(s: &Alg1State) -> impl Iterator<Item = Edge> + '_ {
        s.neighbors.iter().map(move |&(v, w)| Edge {
            u: s.id.min(v),
            v: s.id.max(v),
            w,
        })
    }

    fn decide(&self, s: &mut Alg1State, complete: bool, edges: BTreeSet<Edge>) -> Vec<NodeId> {
        s.aggregated = Some(complete);
        if !complete {
            return vec![s.id];
        }
        let g = Graph::new(s.n, true, edges.iter().map(|e| (e.u, e.v, e.w)))
            .expect("aggregated edges come from a valid graph");
        let ds = DistanceSource::exact(&g).expect("aggregated graph is connected");
        let mut centers = greedy_order(&ds, self.k, s.id);
        centers.sort_unstable();
        centers
    }
}

impl NodeProgram for LocalKCenter {
    type State = Alg1State;
    type Msg = Alg1Msg;
    type Output = Alg1Output;

    fn init(&self, input: &LocalInput) -> Alg1State {
        Alg1State {
            id: input.id,
            n: input.n,
            neighbors: input.neighbors.clone(),
            depth: None,
            join_round: 0,
            parent: None,
            announced: BTreeMap::new(),
            children: None,
            local_complete: false,
            reports: BTreeMap::new(),
            reported: false,
            is_center: false,
            aggregated: None,
        }
    }

    fn on_round(
        &self,
        s: &mut Alg1State,
        round: u64,
        inbox: &[(NodeId, Alg1Msg)],
    ) -> Step<Alg1Msg> {
        let mut explorers = Vec::new();
        for (from, msg) in inbox {
            match msg {
                Alg1Msg::Explore { parent } => {
                    s.announced.insert(*from, *parent);
                    explorers.push(*from);
                }
                Alg1Msg::Report { complete, edges } => {
                    s.reports.insert(*from, (*complete, edges.clone()));
                }
                Alg1Msg::Decision { centers } => {
                    s.is_center = centers.contains(&s.id);
                    let down = s.children.clone().unwrap_or_default();
                    return Step::halt_with(
                        down.into_iter()
                            .map(|c| {
                                (
                                    c,
                                    Alg1Msg::Decision {
                                        centers: centers.clone(),
                                    },
                                )
                            })
                            .collect(),
                    );
                }
            }
        }

        let everyone = |msg: Alg1Msg| -> Vec<(NodeId, Alg1Msg)> {
            s.neighbors.iter().map(|&(v, _)| (v, msg.clone())).collect()
        };

        if s.depth.is_none() {
            if s.id == 1 && round == 1 {
                s.depth = Some(0);
                s.join_round = round;
                return Step::send(everyone(Alg1Msg::Explore { parent: None }));
            }
            if !explorers.is_empty() && round - 1 <= self.depth {
                s.depth = Some(round - 1);
                s.join_round = round;
                s.parent = explorers.iter().copied().min();
                return Step::send(everyone(Alg1Msg::Explore { parent: s.parent }));
            }
            if round >= self.depth + 2 {
                // never reached by the bounded BFS
                return Step::halt();
            }
            return Step::idle();
        }

        if s.children.is_none() && round >= s.join_round + 2 {
            s.children = Some(
                s.neighbors
                    .iter()
                    .map(|&(v, _)| v)
                    .filter(|v| s.announced.get(v) == Some(&Some(s.id)))
                    .collect(),
            );
            s.local_complete = s.neighbors.iter().all(|(v, _)| s.announced.contains_key(v));
        }

        let Some(children) = s.children.clone() else {
            return Step::idle();
        };
        if s.reported || !children.iter().all(|c| s.reports.contains_key(c)) {
            return Step::idle();
        }
        s.reported = true;
        let complete = s.local_complete && children.iter().all(|c| s.reports[c].0);
        let mut edges = BTreeSet::new();
        if complete {
            edges.extend(Self::own_edges(s));
            for c in &children {
                edges.extend(s.reports[c].1.iter().copied());
            }
        }
        match s.parent {
            Some(p) => Step::send(vec![(
                p,
                Alg1Msg::Report {
                    complete,
                    edges: edges.into_iter().collect(),
                },
            )]),
            None => {
                let centers = self.decide(s, complete, edges);
                s.is_center = centers.contains(&s.id);
                Step::halt_with(
                    children
                        .into_iter()
                        .map(|c| {
                            (
                                c,
                                Alg1Msg::Decision {
                                    centers: centers.clone(),
                                },
                            )
                        })
                        .collect(),
                )
            }
        }
    }

    fn output(&self, s: &Alg1State) -> Alg1Output {
        Alg1Output {
            is_center: s.is_center,
            depth: s.depth,
            aggregated: s.aggregated,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalRun {
    pub solution: CenterSolution,
    pub stats: SimStats,
    /// `t = 2 + 4 / eps` as `num/den`.
    pub t: String,
    pub depth_budget: u64,
    /// True when the BFS spanned the graph and node 1 solved it centrally.
    pub aggregated: bool,
}

/// Runs the LOCAL algorithm on `g` in the simulator.
pub fn local_kcenter_alg1(g: &Graph, k: usize, eps: Rational) -> Result<LocalRun, LocalError> {
    if k == 0 {
        return Err(LocalError::ZeroK);
    }
    let t = round_factor(eps)?;
    let depth = depth_budget(eps, k)?;
    g.ensure_connected()?;
    let prog = LocalKCenter { k, depth };
    let out = Simulator::new(ModelConfig::local(), 4 * depth + 10).run(g, &prog)?;
    let centers: Vec<NodeId> = g
        .nodes()
        .filter(|&v| out.outputs[v as usize - 1].is_center)
        .collect();
    let solution = CenterSolution::evaluate(g, &centers)?;
    Ok(LocalRun {
        solution,
        stats: out.stats,
        t: t.to_string(),
        depth_budget: depth,
        aggregated: out.outputs[0].aggregated.unwrap_or(false),
    })
}

/// A `t`-round LOCAL rule given as a pure function of the distance-`t` view.
pub trait ViewAlgorithm {
    fn name(&self) -> String;
    /// Round budget `t`.
    fn rounds(&self) -> usize;
    /// Most centers the rule may report on any input of its size.
    fn max_centers(&self) -> usize;
    fn decide(&self, view: &View) -> bool;
}

/// Runs a [`ViewAlgorithm`] as a message-passing program: `t` rounds of edge
/// flooding, then a decision on the reconstructed view.
pub struct ViewProgram<'a, A: ?Sized> {
    pub alg: &'a A,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeBatch(pub Vec<Edge>);

impl WireMessage for EdgeBatch {
    fn encode(&self) -> Vec<Field> {
        self.0
            .iter()
            .flat_map(|e| [Field::Id(e.u), Field::Id(e.v), Field::Dist(e.w)])
            .collect()
    }

    fn decode(fields: &[Field]) -> Result<Self, WireError> {
        if !fields.len().is_multiple_of(3) {
            return Err(WireError::Undecodable);
        }
        fields
            .chunks(3)
            .map(|ch| match ch {
                [Field::Id(u), Field::Id(v), Field::Dist(w)] => Ok(Edge {
                    u: *u,
                    v: *v,
                    w: *w,
                }),
                _ => Err(WireError::Undecodable),
            })
            .collect::<Result<_, _>>()
            .map(Self)
    }
}

pub struct ViewState {
    id: NodeId,
    neighbors: Vec<NodeId>,
    known: BTreeSet<Edge>,
    fresh: Vec<Edge>,
    view: Option<View>,
    decision: bool,
}

impl<A: ViewAlgorithm + ?Sized> NodeProgram for ViewProgram<'_, A> {
    type State = ViewState;
    type Msg = EdgeBatch;
    type Output = (bool, Option<View>);

    fn init(&self, input: &LocalInput) -> ViewState {
        let own: Vec<Edge> = input
            .neighbors
            .iter()
            .map(|&(v, w)| Edge {
                u: input.id.min(v),
                v: input.id.max(v),
                w,
            })
            .collect();
        ViewState {
            id: input.id,
            neighbors: input.neighbors.iter().map(|&(v, _)| v).collect(),
            known: own.iter().copied().collect(),
            fresh: own,
            view: None,
            decision: false,
        }
    }

    fn on_round(
        &self,
        s: &mut ViewState,
        round: u64,
        inbox: &[(NodeId, EdgeBatch)],
    ) -> Step<EdgeBatch> {
        for (_, EdgeBatch(edges)) in inbox {
            for e in edges {
                if s.known.insert(*e) {
                    s.fresh.push(*e);
                }
            }
        }
        let t = self.alg.rounds() as u64;
        if round > t {
            let view = View::from_edges(s.id, t as usize, &s.known);
            s.decision = self.alg.decide(&view);
            s.view = Some(view);
            return Step::halt();
        }
        let batch = std::mem::take(&mut s.fresh);
        Step::send(
            s.neighbors
                .iter()
                .map(|&v| (v, EdgeBatch(batch.clone())))
                .collect(),
        )
    }

    fn output(&self, s: &ViewState) -> (bool, Option<View>) {
        (s.decision, s.view.clone())
    }
}
