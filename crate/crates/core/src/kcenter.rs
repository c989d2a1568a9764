//! k-center objective, the exhaustive oracle, and the farthest-first greedy.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{DistMatrix, Graph, GraphError, Length, NodeId};

/// Default cap on the number of center sets the oracle may evaluate.
pub const DEFAULT_ORACLE_LIMIT: u64 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KCenterError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("center set is empty")]
    EmptyCenters,
    #[error("k must be at least 1")]
    ZeroK,
    #[error("oracle needs {required} evaluations, limit is {limit}")]
    OracleTooLarge { required: u128, limit: u64 },
    #[error("stretch must be a finite value >= 1, got {0}")]
    BadStretch(f64),
    #[error("distance source covers {got} nodes, graph has {expected}")]
    SizeMismatch { expected: usize, got: usize },
}

/// Chosen centers (sorted ascending) and their true coverage radius.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CenterSolution {
    pub centers: Vec<NodeId>,
    pub radius: Length,
}

impl CenterSolution {
    /// Evaluates `centers` on `g` from scratch.
    pub fn evaluate(g: &Graph, centers: &[NodeId]) -> Result<Self, KCenterError> {
        let dm = DistMatrix::new(g)?;
        Self::evaluate_with(&dm, centers)
    }

    pub fn evaluate_with(dm: &DistMatrix, centers: &[NodeId]) -> Result<Self, KCenterError> {
        let mut centers = centers.to_vec();
        centers.sort_unstable();
        centers.dedup();
        let radius = radius_with(dm, &centers)?;
        Ok(Self { centers, radius })
    }
}

/// `max_v min_{s in centers} d(v, s)`.
pub fn coverage_radius(g: &Graph, centers: &[NodeId]) -> Result<Length, KCenterError> {
    if centers.is_empty() {
        return Err(KCenterError::EmptyCenters);
    }
    let dm = DistMatrix::new(g)?;
    radius_with(&dm, centers)
}

pub fn radius_with(dm: &DistMatrix, centers: &[NodeId]) -> Result<Length, KCenterError> {
    if centers.is_empty() {
        return Err(KCenterError::EmptyCenters);
    }
    for &c in centers {
        if c == 0 || c as usize > dm.n() {
            return Err(GraphError::UnknownNode { id: c, n: dm.n() }.into());
        }
    }
    Ok(radius_unchecked(dm, centers, Length::MAX))
}

// Stops early once the running maximum reaches `cutoff`.
fn radius_unchecked(dm: &DistMatrix, centers: &[NodeId], cutoff: Length) -> Length {
    let mut worst = 0;
    for v in 1..=dm.n() as NodeId {
        let near = centers.iter().map(|&c| dm.get(v, c)).min().unwrap_or(0);
        worst = worst.max(near);
        if worst >= cutoff {
            break;
        }
    }
    worst
}

/// Binomial coefficient, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(x) => x / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Calls `f` on every `size`-subset of `1..=n` in lexicographic order.
/// Stops when `f` returns `false`.
pub fn for_each_subset(n: usize, size: usize, mut f: impl FnMut(&[NodeId]) -> bool) {
    if size > n {
        return;
    }
    let mut idx: Vec<NodeId> = (1..=size as NodeId).collect();
    loop {
        if !f(&idx) {
            return;
        }
        // rightmost position that can still be incremented
        let mut i = size;
        while i > 0 && idx[i - 1] as usize == n - size + i {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..size {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Exact `OPT_k` by exhaustive search over all `min(k, n)`-subsets.
///
/// Ties resolve to the lexicographically smallest center set.
pub fn opt_k_bruteforce(g: &Graph, k: usize) -> Result<CenterSolution, KCenterError> {
    opt_k_bruteforce_limited(g, k, DEFAULT_ORACLE_LIMIT)
}

pub fn opt_k_bruteforce_limited(
    g: &Graph,
    k: usize,
    limit: u64,
) -> Result<CenterSolution, KCenterError> {
    let dm = DistMatrix::new(g)?;
    opt_k_with(&dm, k, limit)
}

pub fn opt_k_with(dm: &DistMatrix, k: usize, limit: u64) -> Result<CenterSolution, KCenterError> {
    if k == 0 {
        return Err(KCenterError::ZeroK);
    }
    let size = k.min(dm.n());
    let required = binomial(dm.n(), size);
    if required > limit as u128 {
        return Err(KCenterError::OracleTooLarge { required, limit });
    }
    let mut best: Option<CenterSolution> = None;
    for_each_subset(dm.n(), size, |set| {
        let cutoff = best.as_ref().map_or(Length::MAX, |b| b.radius);
        let r = radius_unchecked(dm, set, cutoff);
        if r < cutoff {
            best = Some(CenterSolution {
                centers: set.to_vec(),
                radius: r,
            });
        }
        best.as_ref().is_none_or(|b| b.radius > 0)
    });
    Ok(best.expect("at least one subset exists"))
}

/// Closed-form `OPT_k` of the `n`-cycle: each center covers at most `2r + 1`
/// nodes, and evenly spaced centers achieve that.
pub fn cycle_opt_k(n: usize, k: usize) -> Length {
    if k >= n {
        0
    } else {
        ((n - k) as Length).div_ceil(2 * k as Length)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceKind {
    Exact,
    Approximate,
}

/// Pairwise distance estimates `q` with `d(u,v) <= q(u,v) <= stretch * d(u,v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceSource {
    n: usize,
    values: Vec<Length>,
    stretch: f64,
    kind: DistanceKind,
}

impl DistanceSource {
    pub fn exact(g: &Graph) -> Result<Self, KCenterError> {
        Ok(Self::from_matrix(&DistMatrix::new(g)?))
    }

    pub fn from_matrix(dm: &DistMatrix) -> Self {
        let n = dm.n();
        let values = (1..=n as NodeId).flat_map(|u| dm.row(u).to_vec()).collect();
        Self {
            n,
            values,
            stretch: 1.0,
            kind: DistanceKind::Exact,
        }
    }

    /// One-sided pseudo-random stretch oracle. Each unordered pair gets an
    /// integer estimate drawn uniformly from `[d, floor(alpha * d)]`,
    /// deterministically from `seed`.
    pub fn stretched(g: &Graph, alpha: f64, seed: u64) -> Result<Self, KCenterError> {
        if !alpha.is_finite() || alpha < 1.0 {
            return Err(KCenterError::BadStretch(alpha));
        }
        let dm = DistMatrix::new(g)?;
        let n = dm.n();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut values = vec![0; n * n];
        for u in 1..=n as NodeId {
            for v in u + 1..=n as NodeId {
                let d = dm.get(u, v);
                let hi = ((alpha * d as f64).floor() as Length).max(d);
                let q = if hi > d { rng.gen_range(d..=hi) } else { d };
                values[(u as usize - 1) * n + (v as usize - 1)] = q;
                values[(v as usize - 1) * n + (u as usize - 1)] = q;
            }
        }
        let kind = if alpha == 1.0 {
            DistanceKind::Exact
        } else {
            DistanceKind::Approximate
        };
        Ok(Self {
            n,
            values,
            stretch: alpha,
            kind,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn stretch(&self) -> f64 {
        self.stretch
    }

    pub fn kind(&self) -> DistanceKind {
        self.kind
    }

    pub fn query(&self, u: NodeId, v: NodeId) -> Length {
        self.values[(u as usize - 1) * self.n + (v as usize - 1)]
    }

    pub fn row(&self, u: NodeId) -> &[Length] {
        let start = (u as usize - 1) * self.n;
        &self.values[start..start + self.n]
    }

    pub fn max_value(&self) -> Length {
        self.values.iter().copied().max().unwrap_or(0)
    }
}

/// Same as [`DistanceSource::stretched`].
pub fn make_stretch_oracle(
    g: &Graph,
    alpha: f64,
    seed: u64,
) -> Result<DistanceSource, KCenterError> {
    DistanceSource::stretched(g, alpha, seed)
}

/// Farthest-first selection order using `ds`: starts at `seed`, then
/// repeatedly adds the node maximizing its estimated distance to the chosen
/// set, breaking ties by minimum id. Returns at most `min(k, n)` nodes.
pub fn greedy_order(ds: &DistanceSource, k: usize, seed: NodeId) -> Vec<NodeId> {
    let n = ds.n();
    let target = k.min(n);
    let mut chosen = vec![seed];
    let mut in_set = vec![false; n];
    in_set[seed as usize - 1] = true;
    let mut to_set: Vec<Length> = ds.row(seed).to_vec();
    while chosen.len() < target {
        let mut pick: Option<(Length, NodeId)> = None;
        for v in 1..=n as NodeId {
            if in_set[v as usize - 1] {
                continue;
            }
            let d = to_set[v as usize - 1];
            if pick.is_none_or(|(best, _)| d > best) {
                pick = Some((d, v));
            }
        }
        let Some((_, v)) = pick else { break };
        chosen.push(v);
        in_set[v as usize - 1] = true;
        for (slot, &d) in to_set.iter_mut().zip(ds.row(v)) {
            *slot = (*slot).min(d);
        }
    }
    chosen
}

/// Farthest-first greedy. The reported radius is always the true radius of
/// the chosen set under exact distances.
pub fn greedy_gonzalez(
    g: &Graph,
    ds: &DistanceSource,
    k: usize,
    seed: NodeId,
) -> Result<CenterSolution, KCenterError> {
    if k == 0 {
        return Err(KCenterError::ZeroK);
    }
    g.check_node(seed)?;
    if ds.n() != g.n() {
        return Err(KCenterError::SizeMismatch {
            expected: g.n(),
            got: ds.n(),
        });
    }
    let order = greedy_order(ds, k, seed);
    CenterSolution::evaluate(g, &order)
}
