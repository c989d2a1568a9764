//! Cycle rearrangement against view-based LOCAL algorithms.
//!
//! Run the rule on a labeled `n`-cycle `C`, cut a segment of at most `2t + 1`
//! nodes around every chosen center, and concatenate the segments starting
//! right after a gap longer than `2t`, followed by all leftover nodes. Every
//! center sees the same distance-`t` view on the new cycle `C'`, so it is
//! chosen again, while the leftover stretch sits far from all centers.

use serde::Serialize;
use thiserror::Error;

use crate::generate;
use crate::graph::{Graph, GraphError, Length, NodeId};
use crate::kcenter::{coverage_radius, cycle_opt_k, opt_k_bruteforce, KCenterError};
use crate::local::ViewAlgorithm;
use crate::sim::{local_view, local_views, View};

/// Largest cycle on which the report also runs the exhaustive oracle.
pub const ORACLE_MAX_N: usize = 24;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AdversaryError {
    #[error("need n > 2*beta*k*t, got n={n}, beta={beta}, k={k}, t={t}")]
    CycleTooShort {
        n: usize,
        beta: f64,
        k: usize,
        t: usize,
    },
    #[error("need 1 <= k < n and beta >= 1")]
    BadParams,
    #[error("algorithm chose no center on the cycle")]
    NoCenters,
    #[error("algorithm chose {got} centers, more than beta*k = {limit}")]
    TooManyCenters { got: usize, limit: usize },
    #[error("no gap longer than 2t between consecutive centers")]
    NoGap,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    KCenter(#[from] KCenterError),
}

/// A segment of the base cycle, as clockwise positions `begin..=end`
/// (1-based; `begin` may be below 1 and `end` above `n` when wrapping).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Segment {
    pub center: NodeId,
    pub begin: i64,
    pub end: i64,
    pub nodes: Vec<NodeId>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RearrangementReport {
    pub algorithm: String,
    pub n: usize,
    pub k: usize,
    pub t: usize,
    pub beta: f64,
    /// Base cycle `C` as ids in clockwise order.
    pub cycle: Vec<NodeId>,
    /// Rearranged cycle `C'` as ids in clockwise order.
    pub rearranged: Vec<NodeId>,
    pub segments: Vec<Segment>,
    /// 1-based index of the center after which the long gap starts.
    pub i_star: usize,
    pub leftover: Vec<NodeId>,
    pub centers: Vec<NodeId>,
    pub centers_rearranged: Vec<NodeId>,
    pub views_identical: bool,
    pub radius_rearranged: Length,
    pub opt: Length,
    pub opt_oracle: Option<Length>,
    pub ratio: f64,
    pub lower_bound: f64,
    pub farthest_leftover: Length,
    /// `(n - (k' - 1)(2t + 1)) / 2` with `k'` centers on `C`.
    pub leftover_bound: f64,
    pub max_segment_len: usize,
}

impl RearrangementReport {
    pub fn holds(&self) -> bool {
        self.views_identical
            && self.max_segment_len <= 2 * self.t + 1
            && self.ratio >= self.lower_bound - 1e-9
    }
}

/// `k - (k^2 + k(beta*k - 1)(2t + 1)) / (n + k)`.
pub fn ratio_lower_bound(n: usize, k: usize, t: usize, beta: f64) -> f64 {
    let (n, k, t) = (n as f64, k as f64, t as f64);
    k - (k * k + k * (beta * k - 1.0) * (2.0 * t + 1.0)) / (n + k)
}

/// Cycle whose clockwise order is `seq`.
pub fn cycle_from_sequence(seq: &[NodeId]) -> Result<Graph, GraphError> {
    let n = seq.len();
    Graph::unweighted(n, (0..n).map(|i| (seq[i], seq[(i + 1) % n])))
}

fn chosen(alg: &dyn ViewAlgorithm, g: &Graph) -> Vec<NodeId> {
    local_views(g, alg.rounds())
        .iter()
        .filter(|v| alg.decide(v))
        .map(|v| v.center)
        .collect()
}

fn wrap(pos: i64, n: i64) -> usize {
    ((pos - 1).rem_euclid(n) + 1) as usize
}

struct Cut {
    segments: Vec<Segment>,
    i_star: usize,
    rearranged: Vec<NodeId>,
    leftover: Vec<NodeId>,
}

/// Segments and `C'` for centers at the given sorted positions of `seq`.
fn cut(seq: &[NodeId], pos: &[i64], t: i64) -> Result<Cut, AdversaryError> {
    let n = seq.len() as i64;
    let kp = pos.len();
    let next = |i: usize| if i + 1 < kp { pos[i + 1] } else { pos[0] + n };

    let mut ends = vec![0i64; kp];
    for i in 0..kp {
        ends[i] = (pos[i] + t).min(next(i) - 1);
    }
    let mut begins = vec![0i64; kp];
    begins[0] = (pos[0] - t).max(ends[kp - 1] - n + 1);
    for i in 1..kp {
        begins[i] = (pos[i] - t).max(ends[i - 1] + 1);
    }

    let i_star = (0..kp)
        .find(|&i| next(i) - pos[i] > 2 * t)
        .ok_or(AdversaryError::NoGap)?;

    let segments: Vec<Segment> = (0..kp)
        .map(|i| Segment {
            center: seq[pos[i] as usize - 1],
            begin: begins[i],
            end: ends[i],
            nodes: (begins[i]..=ends[i]).map(|p| seq[wrap(p, n) - 1]).collect(),
        })
        .collect();

    let mut used = vec![false; n as usize];
    let mut rearranged = Vec::with_capacity(n as usize);
    for i in (i_star + 1..kp).chain(0..=i_star) {
        for p in begins[i]..=ends[i] {
            used[wrap(p, n) - 1] = true;
            rearranged.push(seq[wrap(p, n) - 1]);
        }
    }
    let leftover: Vec<NodeId> = (1..=n)
        .map(|off| wrap(ends[i_star] + off, n))
        .filter(|&p| !used[p - 1])
        .map(|p| seq[p - 1])
        .collect();
    rearranged.extend(&leftover);
    Ok(Cut {
        segments,
        i_star: i_star + 1,
        rearranged,
        leftover,
    })
}

/// Builds `C'` for `alg` on `n`-cycles and measures the resulting ratio.
///
/// Starts from the canonical cycle `1..=n`. If the rule picks more centers on
/// `C'` than on `C`, the construction restarts from `C'` so that `C` always
/// carries the most centers seen, as the argument requires.
pub fn build_rearranged_cycle(
    alg: &dyn ViewAlgorithm,
    n: usize,
    k: usize,
    beta: f64,
) -> Result<RearrangementReport, AdversaryError> {
    let t = alg.rounds();
    if k == 0 || k >= n || beta.is_nan() || beta < 1.0 {
        return Err(AdversaryError::BadParams);
    }
    if (n as f64) <= 2.0 * beta * k as f64 * t as f64 {
        return Err(AdversaryError::CycleTooShort { n, beta, k, t });
    }
    let limit = (beta * k as f64).floor() as usize;

    let mut seq: Vec<NodeId> = (1..=n as NodeId).collect();
    loop {
        let base = cycle_from_sequence(&seq)?;
        let centers = chosen(alg, &base);
        if centers.is_empty() {
            return Err(AdversaryError::NoCenters);
        }
        if centers.len() > limit {
            return Err(AdversaryError::TooManyCenters {
                got: centers.len(),
                limit,
            });
        }
        let mut pos: Vec<i64> = seq
            .iter()
            .enumerate()
            .filter(|(_, id)| centers.contains(id))
            .map(|(p, _)| p as i64 + 1)
            .collect();
        pos.sort_unstable();

        let cut = cut(&seq, &pos, t as i64)?;
        let c_prime = cycle_from_sequence(&cut.rearranged)?;
        let mut centers_rearranged = chosen(alg, &c_prime);
        if centers_rearranged.len() > centers.len() {
            seq = cut.rearranged;
            continue;
        }
        centers_rearranged.sort_unstable();

        let views_identical = centers
            .iter()
            .all(|&c| local_view(&base, c, t) == local_view(&c_prime, c, t));
        let radius = if centers_rearranged.is_empty() {
            // no center at all on C': every node is uncovered
            Length::MAX
        } else {
            coverage_radius(&c_prime, &centers_rearranged)?
        };
        let opt = cycle_opt_k(n, k);
        let opt_oracle = if n <= ORACLE_MAX_N {
            Some(opt_k_bruteforce(&c_prime, k)?.radius)
        } else {
            None
        };
        let farthest_leftover = if centers_rearranged.is_empty() || cut.leftover.is_empty() {
            0
        } else {
            let dist_to_centers = nearest_center_distances(&c_prime, &centers_rearranged)?;
            cut.leftover
                .iter()
                .map(|&v| dist_to_centers[v as usize - 1])
                .max()
                .unwrap_or(0)
        };
        let kp = centers.len();
        let leftover_bound = (n as f64 - (kp as f64 - 1.0) * (2 * t + 1) as f64) / 2.0;
        let max_segment_len = cut
            .segments
            .iter()
            .map(|s| s.nodes.len())
            .max()
            .unwrap_or(0);

        let mut sorted_centers = centers;
        sorted_centers.sort_unstable();
        return Ok(RearrangementReport {
            algorithm: alg.name(),
            n,
            k,
            t,
            beta,
            cycle: seq,
            rearranged: cut.rearranged,
            segments: cut.segments,
            i_star: cut.i_star,
            leftover: cut.leftover,
            centers: sorted_centers,
            centers_rearranged,
            views_identical,
            radius_rearranged: radius,
            opt,
            opt_oracle,
            ratio: radius as f64 / opt as f64,
            lower_bound: ratio_lower_bound(n, k, t, beta),
            farthest_leftover,
            leftover_bound,
            max_segment_len,
        });
    }
}

fn nearest_center_distances(g: &Graph, centers: &[NodeId]) -> Result<Vec<Length>, GraphError> {
    let mut best = vec![Length::MAX; g.n()];
    for &c in centers {
        for (slot, d) in best.iter_mut().zip(crate::graph::sssp(g, c)?) {
            *slot = (*slot).min(d);
        }
    }
    Ok(best)
}

/// Centers at ids `1, 1 + m, 1 + 2m, ...` with `m = ceil(n / count)`.
#[derive(Debug, Clone)]
pub struct SpacedIds {
    pub t: usize,
    pub n: usize,
    pub count: usize,
}

impl SpacedIds {
    fn spacing(&self) -> u32 {
        self.n.div_ceil(self.count.max(1)) as u32
    }
}

impl ViewAlgorithm for SpacedIds {
    fn name(&self) -> String {
        "spaced".into()
    }
    fn rounds(&self) -> usize {
        self.t
    }
    fn max_centers(&self) -> usize {
        self.count
    }
    fn decide(&self, view: &View) -> bool {
        (view.center - 1).is_multiple_of(self.spacing())
    }
}

/// Centers are the ids `1..=count`.
#[derive(Debug, Clone)]
pub struct LowIds {
    pub t: usize,
    pub count: usize,
}

impl ViewAlgorithm for LowIds {
    fn name(&self) -> String {
        "low-ids".into()
    }
    fn rounds(&self) -> usize {
        self.t
    }
    fn max_centers(&self) -> usize {
        self.count
    }
    fn decide(&self, view: &View) -> bool {
        view.center as usize <= self.count
    }
}

/// A spaced id becomes a center only if no smaller spaced id is in its view.
#[derive(Debug, Clone)]
pub struct ViewMinSpaced {
    pub t: usize,
    pub n: usize,
    pub count: usize,
}

impl ViewAlgorithm for ViewMinSpaced {
    fn name(&self) -> String {
        "view-min-spaced".into()
    }
    fn rounds(&self) -> usize {
        self.t
    }
    fn max_centers(&self) -> usize {
        self.count
    }
    fn decide(&self, view: &View) -> bool {
        let m = self.n.div_ceil(self.count.max(1)) as u32;
        let spaced = |id: NodeId| (id - 1).is_multiple_of(m);
        spaced(view.center) && !view.nodes.iter().any(|&u| u < view.center && spaced(u))
    }
}

/// Names accepted by [`named_algorithm`].
pub const ALGORITHMS: [&str; 3] = ["spaced", "low-ids", "view-min-spaced"];

/// Test-rule factory; each rule reports at most `floor(beta * k)` centers.
pub fn named_algorithm(
    name: &str,
    n: usize,
    k: usize,
    t: usize,
    beta: f64,
) -> Option<Box<dyn ViewAlgorithm>> {
    let count = ((beta * k as f64).floor() as usize).max(1);
    match name {
        "spaced" => Some(Box::new(SpacedIds { t, n, count })),
        "low-ids" => Some(Box::new(LowIds { t, count })),
        "view-min-spaced" => Some(Box::new(ViewMinSpaced { t, n, count })),
        _ => None,
    }
}

/// The canonical labeled cycle `1..=n`.
pub fn canonical_cycle(n: usize) -> Result<Graph, generate::GenError> {
    generate::cycle(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spaced_on_forty() {
        let alg = SpacedIds {
            t: 2,
            n: 40,
            count: 2,
        };
        let rep = build_rearranged_cycle(&alg, 40, 2, 1.0).unwrap();
        assert_eq!(rep.centers, vec![1, 21]);
        assert_eq!(rep.i_star, 1);
        assert_eq!(rep.segments[0].nodes, vec![39, 40, 1, 2, 3]);
        assert_eq!(rep.segments[1].nodes, vec![19, 20, 21, 22, 23]);
        assert_eq!(
            &rep.rearranged[..10],
            &[19, 20, 21, 22, 23, 39, 40, 1, 2, 3]
        );
        assert_eq!(rep.leftover.first(), Some(&4));
        assert_eq!(rep.rearranged.len(), 40);
        assert!(rep.views_identical);
        assert_eq!(rep.centers_rearranged, rep.centers);
        assert!(rep.holds(), "{rep:?}");
    }

    #[test]
    fn rearranged_is_a_permutation() {
        for name in ALGORITHMS {
            for (n, k, t) in [(30, 2, 2), (57, 3, 3), (13, 1, 3), (100, 3, 1)] {
                let alg = named_algorithm(name, n, k, t, 1.0).unwrap();
                let rep = build_rearranged_cycle(alg.as_ref(), n, k, 1.0).unwrap();
                let mut ids = rep.rearranged.clone();
                ids.sort_unstable();
                assert_eq!(
                    ids,
                    (1..=n as NodeId).collect::<Vec<_>>(),
                    "{name} {n} {k} {t}"
                );
                assert!(rep.max_segment_len <= 2 * t + 1);
            }
        }
    }

    #[test]
    fn segment_formulas_handle_wraparound() {
        // centers at 2 and 39 on a 40-cycle with t = 3
        let seq: Vec<NodeId> = (1..=40).collect();
        let cut = cut(&seq, &[2, 39], 3).unwrap();
        // e_2 = min(42, 41) = 41 wraps to node 1; b_1 = max(-1, 2) = 2
        assert_eq!(cut.segments[1].nodes, vec![36, 37, 38, 39, 40, 1]);
        assert_eq!(cut.segments[0].nodes, vec![2, 3, 4, 5]);
        assert_eq!(cut.i_star, 1);
    }

    #[test]
    fn preconditions() {
        let alg = SpacedIds {
            t: 3,
            n: 12,
            count: 2,
        };
        assert!(matches!(
            build_rearranged_cycle(&alg, 12, 2, 1.0),
            Err(AdversaryError::CycleTooShort { .. })
        ));
        let alg = LowIds { t: 1, count: 5 };
        assert!(matches!(
            build_rearranged_cycle(&alg, 30, 2, 1.0),
            Err(AdversaryError::TooManyCenters { got: 5, limit: 2 })
        ));
        let alg = LowIds { t: 1, count: 0 };
        assert_eq!(
            build_rearranged_cycle(&alg, 30, 2, 1.0),
            Err(AdversaryError::NoCenters)
        );
    }

    #[test]
    fn lower_bound_formula() {
        // 2 - (4 + 2*1*5) / 42
        assert!((ratio_lower_bound(40, 2, 2, 1.0) - (2.0 - 14.0 / 42.0)).abs() < 1e-12);
        assert!((ratio_lower_bound(100, 1, 3, 1.0) - (1.0 - 1.0 / 101.0)).abs() < 1e-12);
    }
}
