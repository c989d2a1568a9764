//! Distributed k-center clustering in the LOCAL, CONGEST and CLIQUE models.
//!
//! The crate bundles a synchronous round simulator ([`sim`]), the graph metric
//! and exact oracle ([`graph`], [`kcenter`]), the three distributed
//! algorithms ([`local`], [`congest`], [`clique`]), the cycle-rearrangement
//! adversary for LOCAL ([`adversary`]), the disjointness gadget graphs
//! ([`gadgets`]), graph generators ([`generate`]) and the batch harness
//! ([`bench`]).

pub mod adversary;
pub mod bench;
pub mod clique;
pub mod congest;
pub mod gadgets;
pub mod generate;
pub mod graph;
pub mod kcenter;
pub mod local;
pub mod sim;

#[cfg(test)]
mod properties;

pub use graph::{DistMatrix, Edge, Graph, GraphError, Length, NodeId};
pub use kcenter::{
    coverage_radius, greedy_gonzalez, make_stretch_oracle, opt_k_bruteforce, CenterSolution,
    DistanceSource, KCenterError,
};
pub use sim::{run_sync, Model, ModelConfig, NodeProgram, SimError, SimStats, Simulator};

pub use adversary::build_rearranged_cycle;
pub use clique::{clique_kcenter, Phase1};
pub use congest::congest_kcenter;
pub use gadgets::{build_gkxy, build_gxy, verify_claim1, verify_claim2, verify_lemma4};
pub use local::local_kcenter_alg1;
