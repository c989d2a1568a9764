//! Deterministic synchronous round engine for the LOCAL, CONGEST and CLIQUE
//! models.
//!
//! In every round each running node, in id order, consumes the messages sent
//! to it in the previous round and emits an outbox. Messages are encoded with
//! the canonical [`wire`] format, checked against the model, and delivered at
//! the start of the next round. A halted node sends nothing further; messages
//! addressed to it are dropped.

pub mod views;
pub mod wire;

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, Length, NodeId};
pub use views::{local_view, local_views, View};
pub use wire::{Encoding, Field, WireError, WireMessage};

/// Default number of `ceil(log2 n)`-bit words per message.
pub const DEFAULT_KAPPA: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Model {
    Local,
    Congest,
    Clique,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub model: Model,
    /// Words per (sender, recipient, round); ignored under LOCAL.
    pub kappa: u32,
}

impl ModelConfig {
    pub fn local() -> Self {
        Self {
            model: Model::Local,
            kappa: DEFAULT_KAPPA,
        }
    }

    pub fn congest() -> Self {
        Self {
            model: Model::Congest,
            kappa: DEFAULT_KAPPA,
        }
    }

    pub fn clique() -> Self {
        Self {
            model: Model::Clique,
            kappa: DEFAULT_KAPPA,
        }
    }

    pub fn with_kappa(mut self, kappa: u32) -> Self {
        self.kappa = kappa;
        self
    }

    /// `ceil(log2 n)`, at least 1.
    pub fn word_bits(n: usize) -> u64 {
        wire::ceil_log2(n as u64).max(1) as u64
    }

    /// Bit budget per ordered pair per round, `None` under LOCAL.
    pub fn budget_bits(&self, n: usize) -> Option<u64> {
        match self.model {
            Model::Local => None,
            Model::Congest | Model::Clique => Some(self.kappa as u64 * Self::word_bits(n)),
        }
    }
}

/// What a node knows before the first round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalInput {
    pub id: NodeId,
    pub n: usize,
    /// Incident edges as `(neighbor, weight)`, sorted by neighbor id.
    pub neighbors: Vec<(NodeId, Length)>,
}

/// Result of one `on_round` call.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step<M> {
    pub outbox: Vec<(NodeId, M)>,
    pub halt: bool,
}

impl<M> Step<M> {
    pub fn send(outbox: Vec<(NodeId, M)>) -> Self {
        Self {
            outbox,
            halt: false,
        }
    }

    pub fn idle() -> Self {
        Self::send(Vec::new())
    }

    pub fn halt_with(outbox: Vec<(NodeId, M)>) -> Self {
        Self { outbox, halt: true }
    }

    pub fn halt() -> Self {
        Self::halt_with(Vec::new())
    }
}

/// A per-node state machine. Transitions must be deterministic.
pub trait NodeProgram {
    type State;
    type Msg: WireMessage + Clone;
    type Output;

    fn init(&self, input: &LocalInput) -> Self::State;

    /// `inbox` holds `(sender, message)` pairs sorted by sender.
    fn on_round(
        &self,
        state: &mut Self::State,
        round: u64,
        inbox: &[(NodeId, Self::Msg)],
    ) -> Step<Self::Msg>;

    fn output(&self, state: &Self::State) -> Self::Output;
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundStats {
    pub messages: u64,
    pub bits: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimStats {
    pub rounds: u64,
    pub total_messages: u64,
    pub total_bits: u64,
    /// Largest number of bits sent from one node to one recipient in one round.
    pub max_message_bits: u64,
    pub budget_bits: Option<u64>,
    pub per_round: Vec<RoundStats>,
}

impl SimStats {
    /// Rounds (1-based) in which at least one message was sent.
    pub fn active_rounds(&self) -> impl Iterator<Item = u64> + '_ {
        self.per_round
            .iter()
            .enumerate()
            .filter(|(_, r)| r.messages > 0)
            .map(|(i, _)| i as u64 + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageRecord {
    pub from: NodeId,
    pub to: NodeId,
    pub bits: u64,
}

/// One JSON-lines trace record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: u64,
    pub messages: Vec<MessageRecord>,
    pub halted: Vec<NodeId>,
}

pub fn write_trace<W: Write>(mut out: W, trace: &[RoundRecord]) -> std::io::Result<()> {
    for rec in trace {
        serde_json::to_writer(&mut out, rec)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("round {round}: {from} -> {to} carries {bits} bits, budget is {budget}")]
    BandwidthExceeded {
        round: u64,
        from: NodeId,
        to: NodeId,
        bits: u64,
        budget: u64,
    },
    #[error("round {round}: {from} may not send to {to} under {model:?}")]
    IllegalRecipient {
        round: u64,
        from: NodeId,
        to: NodeId,
        model: Model,
    },
    #[error("round {round}: {from} -> {to}: {source}")]
    Wire {
        round: u64,
        from: NodeId,
        to: NodeId,
        source: WireError,
    },
    #[error("not all nodes halted within {max_rounds} rounds")]
    NonTermination { max_rounds: u64 },
    #[error("max_rounds must be at least 1")]
    ZeroRounds,
}

#[derive(Debug, Clone)]
pub struct SimOutcome<O> {
    /// Per-node outputs indexed by `id - 1`.
    pub outputs: Vec<O>,
    pub stats: SimStats,
    /// Empty unless tracing was enabled.
    pub trace: Vec<RoundRecord>,
}

/// Engine configuration for one run.
#[derive(Debug, Clone)]
pub struct Simulator {
    cfg: ModelConfig,
    max_rounds: u64,
    trace: bool,
    encoding: Option<Encoding>,
}

impl Simulator {
    pub fn new(cfg: ModelConfig, max_rounds: u64) -> Self {
        Self {
            cfg,
            max_rounds,
            trace: false,
            encoding: None,
        }
    }

    pub fn with_trace(mut self, on: bool) -> Self {
        self.trace = on;
        self
    }

    /// Overrides the default encoding derived from the graph.
    pub fn with_encoding(mut self, encoding: Encoding) -> Self {
        self.encoding = Some(encoding);
        self
    }

    pub fn run<P: NodeProgram>(
        &self,
        g: &Graph,
        prog: &P,
    ) -> Result<SimOutcome<P::Output>, SimError> {
        if self.max_rounds == 0 {
            return Err(SimError::ZeroRounds);
        }
        let n = g.n();
        let enc = self.encoding.unwrap_or_else(|| Encoding::for_graph(g));
        let budget = self.cfg.budget_bits(n);

        let mut states: Vec<P::State> = g
            .nodes()
            .map(|id| {
                prog.init(&LocalInput {
                    id,
                    n,
                    neighbors: g.neighbors(id).to_vec(),
                })
            })
            .collect();
        let mut halted = vec![false; n];
        let mut inboxes: Vec<Vec<(NodeId, P::Msg)>> = vec![Vec::new(); n];
        let mut stats = SimStats {
            budget_bits: budget,
            ..SimStats::default()
        };
        let mut trace = Vec::new();

        for round in 1..=self.max_rounds {
            if halted.iter().all(|&h| h) {
                break;
            }
            let mut next: Vec<Vec<(NodeId, P::Msg)>> = vec![Vec::new(); n];
            let mut round_stats = RoundStats::default();
            let mut records = Vec::new();
            let mut halted_now = Vec::new();

            for id in g.nodes() {
                let i = id as usize - 1;
                let inbox = std::mem::take(&mut inboxes[i]);
                if halted[i] {
                    continue;
                }
                let step = prog.on_round(&mut states[i], round, &inbox);

                let mut per_recipient: BTreeMap<NodeId, u64> = BTreeMap::new();
                for (to, msg) in step.outbox {
                    let legal = to != id
                        && g.contains(to)
                        && match self.cfg.model {
                            Model::Clique => true,
                            Model::Local | Model::Congest => g.has_edge(id, to),
                        };
                    if !legal {
                        return Err(SimError::IllegalRecipient {
                            round,
                            from: id,
                            to,
                            model: self.cfg.model,
                        });
                    }
                    let wire_err = |source| SimError::Wire {
                        round,
                        from: id,
                        to,
                        source,
                    };
                    let fields = msg.encode();
                    let bits = enc.message_bits(&fields).map_err(wire_err)?;
                    let delivered = P::Msg::decode(&fields).map_err(wire_err)?;

                    let pair_bits = per_recipient.entry(to).or_default();
                    *pair_bits += bits;
                    if let Some(budget) = budget {
                        if *pair_bits > budget {
                            return Err(SimError::BandwidthExceeded {
                                round,
                                from: id,
                                to,
                                bits: *pair_bits,
                                budget,
                            });
                        }
                    }
                    round_stats.messages += 1;
                    round_stats.bits += bits;
                    if self.trace {
                        records.push(MessageRecord { from: id, to, bits });
                    }
                    next[to as usize - 1].push((id, delivered));
                }
                if let Some(&max) = per_recipient.values().max() {
                    stats.max_message_bits = stats.max_message_bits.max(max);
                }
                if step.halt {
                    halted[i] = true;
                    halted_now.push(id);
                }
            }

            stats.rounds = round;
            stats.total_messages += round_stats.messages;
            stats.total_bits += round_stats.bits;
            stats.per_round.push(round_stats);
            if self.trace {
                trace.push(RoundRecord {
                    round,
                    messages: records,
                    halted: halted_now,
                });
            }
            inboxes = next;
        }

        if !halted.iter().all(|&h| h) {
            return Err(SimError::NonTermination {
                max_rounds: self.max_rounds,
            });
        }
        let outputs = states.iter().map(|s| prog.output(s)).collect();
        Ok(SimOutcome {
            outputs,
            stats,
            trace,
        })
    }
}

/// Runs `prog` on `g` until every node halts or `max_rounds` is exhausted.
pub fn run_sync<P: NodeProgram>(
    g: &Graph,
    prog: &P,
    cfg: ModelConfig,
    max_rounds: u64,
) -> Result<(Vec<P::Output>, SimStats), SimError> {
    let out = Simulator::new(cfg, max_rounds).run(g, prog)?;
    Ok((out.outputs, out.stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Floods the smallest id seen; halts after `rounds` rounds.
    struct MinFlood {
        rounds: u64,
    }

    #[derive(Debug, Clone, PartialEq)]
    struct IdMsg(NodeId);

    impl WireMessage for IdMsg {
        fn encode(&self) -> Vec<Field> {
            vec![Field::Id(self.0)]
        }
        fn decode(fields: &[Field]) -> Result<Self, WireError> {
            match fields {
                [Field::Id(id)] => Ok(Self(*id)),
                _ => Err(WireError::Undecodable),
            }
        }
    }

    struct FloodState {
        best: NodeId,
        nbrs: Vec<NodeId>,
        heard: Vec<(u64, NodeId)>,
    }

    impl NodeProgram for MinFlood {
        type State = FloodState;
        type Msg = IdMsg;
        type Output = (NodeId, Vec<(u64, NodeId)>);

        fn init(&self, input: &LocalInput) -> FloodState {
            FloodState {
                best: input.id,
                nbrs: input.neighbors.iter().map(|&(v, _)| v).collect(),
                heard: Vec::new(),
            }
        }

        fn on_round(
            &self,
            s: &mut FloodState,
            round: u64,
            inbox: &[(NodeId, IdMsg)],
        ) -> Step<IdMsg> {
            for (from, IdMsg(id)) in inbox {
                s.heard.push((round, *from));
                s.best = s.best.min(*id);
            }
            let out = s.nbrs.iter().map(|&v| (v, IdMsg(s.best))).collect();
            if round >= self.rounds {
                Step::halt_with(out)
            } else {
                Step::send(out)
            }
        }

        fn output(&self, s: &FloodState) -> Self::Output {
            (s.best, s.heard.clone())
        }
    }

    fn path(n: u32) -> Graph {
        Graph::unweighted(n as usize, (1..n).map(|i| (i, i + 1))).unwrap()
    }

    #[test]
    fn flooding_on_a_path() {
        let g = path(3);
        let (out, stats) =
            run_sync(&g, &MinFlood { rounds: 3 }, ModelConfig::congest(), 10).unwrap();
        assert!(out.iter().all(|(best, _)| *best == 1));
        assert!(stats.rounds <= 2 * 2 + 1);
        assert_eq!(stats.rounds, 3);
        // 4 directed edge slots per round, 3 rounds
        assert_eq!(stats.total_messages, 12);
    }

    #[test]
    fn delivery_is_next_round() {
        let g = path(4);
        let (out, _) = run_sync(&g, &MinFlood { rounds: 4 }, ModelConfig::local(), 10).unwrap();
        // node 1 hears from node 2 in rounds 2..=4 (sent in 1..=3)
        let rounds: Vec<u64> = out[0].1.iter().map(|&(r, _)| r).collect();
        assert_eq!(rounds, vec![2, 3, 4]);
    }

    #[test]
    fn non_termination() {
        let g = path(3);
        let err = run_sync(&g, &MinFlood { rounds: 50 }, ModelConfig::local(), 5).unwrap_err();
        assert_eq!(err, SimError::NonTermination { max_rounds: 5 });
    }

    /// Sends a fixed field list from node 1 to `to` in round 1.
    struct Blob {
        fields: Vec<Field>,
        to: NodeId,
    }

    #[derive(Debug, Clone)]
    struct Raw(Vec<Field>);

    impl WireMessage for Raw {
        fn encode(&self) -> Vec<Field> {
            self.0.clone()
        }
        fn decode(fields: &[Field]) -> Result<Self, WireError> {
            Ok(Self(fields.to_vec()))
        }
    }

    impl NodeProgram for Blob {
        type State = NodeId;
        type Msg = Raw;
        type Output = ();
        fn init(&self, input: &LocalInput) -> NodeId {
            input.id
        }
        fn on_round(&self, id: &mut NodeId, _: u64, _: &[(NodeId, Raw)]) -> Step<Raw> {
            if *id == 1 {
                Step::halt_with(vec![(self.to, Raw(self.fields.clone()))])
            } else {
                Step::halt()
            }
        }
        fn output(&self, _: &NodeId) {}
    }

    #[test]
    fn bandwidth_boundary() {
        // n = 16: budget 8 * 4 = 32 bits; one id field is 2 + 5 = 7 bits
        let g = path(16);
        let cfg = ModelConfig::congest();
        assert_eq!(cfg.budget_bits(16), Some(32));
        let four = Blob {
            fields: vec![Field::Id(3); 4],
            to: 2,
        };
        let (_, stats) = run_sync(&g, &four, cfg, 3).unwrap();
        assert_eq!(stats.max_message_bits, 28);

        let five = Blob {
            fields: vec![Field::Id(3); 5],
            to: 2,
        };
        let err = run_sync(&g, &five, cfg, 3).unwrap_err();
        assert_eq!(
            err,
            SimError::BandwidthExceeded {
                round: 1,
                from: 1,
                to: 2,
                bits: 35,
                budget: 32
            }
        );
        // LOCAL does not care
        assert!(run_sync(&g, &five, ModelConfig::local(), 3).is_ok());
    }

    #[test]
    fn exact_budget_plus_one_bit() {
        // n = 8: a word is 3 bits and a Count field 2 + 4 = 6 bits, so
        // kappa = 2 is exactly enough and kappa = 1 is not
        let g = path(8);
        let cfg = ModelConfig::congest().with_kappa(2);
        let ok = Blob {
            fields: vec![Field::Count(1)],
            to: 2,
        };
        assert_eq!(run_sync(&g, &ok, cfg, 2).unwrap().1.max_message_bits, 6);
        let cfg = ModelConfig::congest().with_kappa(1);
        assert!(matches!(
            run_sync(&g, &ok, cfg, 2),
            Err(SimError::BandwidthExceeded {
                bits: 6,
                budget: 3,
                ..
            })
        ));
    }

    #[test]
    fn recipients_by_model() {
        let g = path(5);
        let far = Blob {
            fields: vec![Field::Id(1)],
            to: 4,
        };
        assert!(matches!(
            run_sync(&g, &far, ModelConfig::congest(), 2),
            Err(SimError::IllegalRecipient { to: 4, .. })
        ));
        assert!(matches!(
            run_sync(&g, &far, ModelConfig::local(), 2),
            Err(SimError::IllegalRecipient { .. })
        ));
        assert!(run_sync(&g, &far, ModelConfig::clique(), 2).is_ok());
        let me = Blob {
            fields: vec![],
            to: 1,
        };
        assert!(run_sync(&g, &me, ModelConfig::clique(), 2).is_err());
    }

    #[test]
    fn unencodable_field() {
        let g = path(4);
        let bad = Blob {
            fields: vec![Field::Id(9)],
            to: 2,
        };
        assert!(matches!(
            run_sync(&g, &bad, ModelConfig::local(), 2),
            Err(SimError::Wire { .. })
        ));
    }

    #[test]
    fn trace_records() {
        let g = path(3);
        let out = Simulator::new(ModelConfig::congest(), 10)
            .with_trace(true)
            .run(&g, &MinFlood { rounds: 2 })
            .unwrap();
        assert_eq!(out.trace.len(), 2);
        assert_eq!(out.trace[0].messages.len(), 4);
        assert_eq!(out.trace[1].halted, vec![1, 2, 3]);
        let mut buf = Vec::new();
        write_trace(&mut buf, &out.trace).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.starts_with("{\"round\":1,\"messages\":[{\"from\":1,\"to\":2,\"bits\":"));
    }

    #[test]
    fn runs_are_deterministic() {
        let g = path(9);
        let a = Simulator::new(ModelConfig::congest(), 20)
            .with_trace(true)
            .run(&g, &MinFlood { rounds: 9 })
            .unwrap();
        let b = Simulator::new(ModelConfig::congest(), 20)
            .with_trace(true)
            .run(&g, &MinFlood { rounds: 9 })
            .unwrap();
        assert_eq!(a.stats, b.stats);
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.outputs, b.outputs);
    }
}
