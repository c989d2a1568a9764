//! Deterministic graph generators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, GraphError, Length, NodeId};

/// Attempts per G(n, p) draw before giving up on connectivity.
pub const GNP_ATTEMPTS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GenSpec {
    Cycle {
        n: usize,
    },
    Path {
        n: usize,
    },
    /// Node 1 is the hub.
    Star {
        n: usize,
    },
    Gnp {
        n: usize,
        p: f64,
    },
    WeightedGnp {
        n: usize,
        p: f64,
        max_weight: Length,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenError {
    #[error("{0}")]
    Graph(#[from] GraphError),
    #[error("invalid parameter: {0}")]
    BadParam(String),
    #[error("no connected sample after {0} attempts")]
    NotConnected(usize),
}

impl GenSpec {
    pub fn n(&self) -> usize {
        match *self {
            Self::Cycle { n } | Self::Path { n } | Self::Star { n } => n,
            Self::Gnp { n, .. } | Self::WeightedGnp { n, .. } => n,
        }
    }

    /// Short label such as `gnp(n=10,p=0.4)`.
    pub fn label(&self) -> String {
        match self {
            Self::Cycle { n } => format!("cycle(n={n})"),
            Self::Path { n } => format!("path(n={n})"),
            Self::Star { n } => format!("star(n={n})"),
            Self::Gnp { n, p } => format!("gnp(n={n},p={p})"),
            Self::WeightedGnp { n, p, max_weight } => {
                format!("weighted-gnp(n={n},p={p},w<={max_weight})")
            }
        }
    }
}

pub fn generate(spec: &GenSpec, seed: u64) -> Result<Graph, GenError> {
    match *spec {
        GenSpec::Cycle { n } => cycle(n),
        GenSpec::Path { n } => path(n),
        GenSpec::Star { n } => star(n),
        GenSpec::Gnp { n, p } => gnp(n, p, 1, seed),
        GenSpec::WeightedGnp { n, p, max_weight } => gnp(n, p, max_weight, seed),
    }
}

pub fn cycle(n: usize) -> Result<Graph, GenError> {
    if n < 3 {
        return Err(GenError::BadParam(format!("cycle needs n >= 3, got {n}")));
    }
    let n32 = n as NodeId;
    Ok(Graph::unweighted(n, (1..=n32).map(|i| (i, i % n32 + 1)))?)
}

pub fn path(n: usize) -> Result<Graph, GenError> {
    let n32 = n as NodeId;
    Ok(Graph::unweighted(n, (1..n32).map(|i| (i, i + 1)))?)
}

pub fn star(n: usize) -> Result<Graph, GenError> {
    Ok(Graph::unweighted(n, (2..=n as NodeId).map(|i| (1, i)))?)
}

/// Connected G(n, p); weights uniform in `1..=max_weight` when `max_weight > 1`.
pub fn gnp(n: usize, p: f64, max_weight: Length, seed: u64) -> Result<Graph, GenError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(GenError::BadParam(format!("p must lie in [0, 1], got {p}")));
    }
    if max_weight == 0 {
        return Err(GenError::BadParam("max_weight must be >= 1".into()));
    }
    if n == 0 {
        return Err(GraphError::Empty.into());
    }
    let weighted = max_weight > 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..GNP_ATTEMPTS {
        let mut edges = Vec::new();
        for u in 1..=n as NodeId {
            for v in u + 1..=n as NodeId {
                if rng.gen_bool(p) {
                    let w = if weighted {
                        rng.gen_range(1..=max_weight)
                    } else {
                        1
                    };
                    edges.push((u, v, w));
                }
            }
        }
        let g = Graph::new(n, weighted, edges)?;
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(GenError::NotConnected(GNP_ATTEMPTS))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::diameter;

    #[test]
    fn fixed_families() {
        let c = cycle(12).unwrap();
        assert_eq!((c.n(), c.m()), (12, 12));
        assert_eq!(diameter(&path(5).unwrap()).unwrap(), 4);
        let s = star(9).unwrap();
        assert_eq!(s.degree(1), 8);
        assert!(cycle(2).is_err());
    }

    #[test]
    fn gnp_is_reproducible() {
        let a = gnp(10, 0.4, 1, 7).unwrap();
        let b = gnp(10, 0.4, 1, 7).unwrap();
        assert_eq!(a.to_text(), b.to_text());
        assert!(a.is_connected());
        let c = gnp(10, 0.4, 1, 8).unwrap();
        assert_ne!(a.to_text(), c.to_text());
    }

    #[test]
    fn weighted_gnp_respects_bounds() {
        let g = gnp(9, 0.5, 6, 3).unwrap();
        assert!(g.is_weighted());
        assert!(g.edges().iter().all(|e| (1..=6).contains(&e.w)));
    }

    #[test]
    fn hopeless_density_fails() {
        assert_eq!(gnp(6, 0.0, 1, 1), Err(GenError::NotConnected(GNP_ATTEMPTS)));
        assert!(gnp(6, 1.5, 1, 1).is_err());
    }
}
