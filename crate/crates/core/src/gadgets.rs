//! Set-disjointness gadget graphs for 1-center and k-center.
//!
//! `G_{x,y}` encodes Alice's string `x` as edges `a^i - c̄_A` and Bob's `y` as
//! edges `b^i - c̄_B`. Its 1-center optimum is 4 when the strings are disjoint
//! and 3 otherwise. `G^k_{x,y}` glues `k` copies together at `w²`.
//!
//! Ids are assigned per copy in role order
//! `A, B, F_A, T_A, F_B, T_B, c_A, c̄_A, c_B, c̄_B, w⁰, w¹`, copy after copy,
//! with the shared `w²` last.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{DistMatrix, Graph, GraphError, Length, NodeId};
use crate::kcenter::{
    for_each_subset, opt_k_with, radius_with, KCenterError, DEFAULT_ORACLE_LIMIT,
};

/// Sidecar format version.
pub const GADGET_FORMAT_VERSION: u32 = 1;

/// Largest `ℓ` accepted by [`verify_claim1`].
pub const CLAIM1_MAX_ELL: usize = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GadgetError {
    #[error("ell must be a power of two >= 2, got {0}")]
    BadEll(usize),
    #[error("bit strings must have length {ell}, got {got}")]
    LengthMismatch { ell: usize, got: usize },
    #[error("bit strings may only contain 0 and 1")]
    BadBits,
    #[error("need at least one copy")]
    ZeroCopies,
    #[error("instance too large for exhaustive verification")]
    TooLarge,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    KCenter(#[from] KCenterError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisjointnessInstance {
    pub ell: usize,
    pub x: Vec<bool>,
    pub y: Vec<bool>,
}

fn parse_bits(s: &str) -> Result<Vec<bool>, GadgetError> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(GadgetError::BadBits),
        })
        .collect()
}

pub fn bits_to_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

impl DisjointnessInstance {
    pub fn new(x: Vec<bool>, y: Vec<bool>) -> Result<Self, GadgetError> {
        let ell = x.len();
        if ell < 2 || !ell.is_power_of_two() {
            return Err(GadgetError::BadEll(ell));
        }
        if y.len() != ell {
            return Err(GadgetError::LengthMismatch { ell, got: y.len() });
        }
        Ok(Self { ell, x, y })
    }

    /// Parses strings such as `"0110"`; character `i` is bit `i`.
    pub fn parse(x: &str, y: &str) -> Result<Self, GadgetError> {
        Self::new(parse_bits(x)?, parse_bits(y)?)
    }

    /// Instance number `code` in `0..4^ell`: low `ell` bits give `x`.
    pub fn from_code(ell: usize, code: u64) -> Result<Self, GadgetError> {
        let bit = |j: usize| code >> j & 1 == 1;
        Self::new(
            (0..ell).map(bit).collect(),
            (ell..2 * ell).map(bit).collect(),
        )
    }

    pub fn is_disjoint(&self) -> bool {
        !self.x.iter().zip(&self.y).any(|(&a, &b)| a && b)
    }

    /// `log2(ell)`, the size of each of `F_A, T_A, F_B, T_B`.
    pub fn log_ell(&self) -> usize {
        self.ell.trailing_zeros() as usize
    }
}

/// Wiring of the four-node path through `c_A, c̄_A, c_B, c̄_B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CPath {
    /// `c_A - c̄_A - c_B - c̄_B`, in the listed order.
    Listed,
    /// `c_A - c̄_A - c̄_B - c_B`, the two bar nodes adjacent.
    BarsAdjacent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variant {
    pub c_path: CPath,
    /// Adds `f^h_A - t^h_A` on top of the cross edges `f_A - t_B`, `t_A - f_B`.
    pub same_side_ft: bool,
}

impl Default for Variant {
    /// The wiring under which both distance claims and the 4-versus-3 gap
    /// verify exhaustively at `ℓ = 4`.
    fn default() -> Self {
        Self {
            c_path: CPath::BarsAdjacent,
            same_side_ft: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoleKind {
    A,
    B,
    FA,
    TA,
    FB,
    TB,
    CA,
    CBarA,
    CB,
    CBarB,
    W0,
    W1,
    W2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Role {
    pub kind: RoleKind,
    /// `i` for `a^i`, `b^i`; `h` for `f^h`, `t^h`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    /// Copy number starting at 0; `None` for the shared `w²`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub copy: Option<usize>,
}

/// Ids of one copy's nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CopyIds {
    pub a: Vec<NodeId>,
    pub b: Vec<NodeId>,
    pub f_a: Vec<NodeId>,
    pub t_a: Vec<NodeId>,
    pub f_b: Vec<NodeId>,
    pub t_b: Vec<NodeId>,
    pub c_a: NodeId,
    pub cbar_a: NodeId,
    pub c_b: NodeId,
    pub cbar_b: NodeId,
    pub w0: NodeId,
    pub w1: NodeId,
}

#[derive(Debug, Clone)]
pub struct GadgetGraph {
    pub graph: Graph,
    pub instance: DisjointnessInstance,
    pub variant: Variant,
    pub copies: Vec<CopyIds>,
    pub w2: NodeId,
    /// `roles[id - 1]`.
    pub roles: Vec<Role>,
}

/// Nodes per copy, `w²` included: `2ℓ + 4 log2(ℓ) + 7`.
pub fn copy_size(ell: usize) -> usize {
    2 * ell + 4 * ell.trailing_zeros() as usize + 7
}

pub fn build_gxy(inst: &DisjointnessInstance) -> Result<GadgetGraph, GadgetError> {
    build_gkxy_with(inst, 1, Variant::default())
}

pub fn build_gkxy(inst: &DisjointnessInstance, k: usize) -> Result<GadgetGraph, GadgetError> {
    build_gkxy_with(inst, k, Variant::default())
}

pub fn build_gkxy_with(
    inst: &DisjointnessInstance,
    k: usize,
    variant: Variant,
) -> Result<GadgetGraph, GadgetError> {
    if k == 0 {
        return Err(GadgetError::ZeroCopies);
    }
    // re-validate in case the fields were set by hand
    let inst = DisjointnessInstance::new(inst.x.clone(), inst.y.clone())?;
    let (ell, lg) = (inst.ell, inst.log_ell());
    let per_copy = copy_size(ell) - 1;
    let n = k * per_copy + 1;
    let w2 = n as NodeId;

    let mut roles = Vec::with_capacity(n);
    let mut copies = Vec::with_capacity(k);
    let mut edges: Vec<(NodeId, NodeId)> = Vec::new();
    for copy in 0..k {
        let mut next = (copy * per_copy) as NodeId + 1;
        let mut take = |kind: RoleKind, count: usize, indexed: bool| -> Vec<NodeId> {
            (0..count)
                .map(|i| {
                    roles.push(Role {
                        kind,
                        index: indexed.then_some(i),
                        copy: Some(copy),
                    });
                    next += 1;
                    next - 1
                })
                .collect()
        };
        let a = take(RoleKind::A, ell, true);
        let b = take(RoleKind::B, ell, true);
        let f_a = take(RoleKind::FA, lg, true);
        let t_a = take(RoleKind::TA, lg, true);
        let f_b = take(RoleKind::FB, lg, true);
        let t_b = take(RoleKind::TB, lg, true);
        let ids = CopyIds {
            a,
            b,
            f_a,
            t_a,
            f_b,
            t_b,
            c_a: take(RoleKind::CA, 1, false)[0],
            cbar_a: take(RoleKind::CBarA, 1, false)[0],
            c_b: take(RoleKind::CB, 1, false)[0],
            cbar_b: take(RoleKind::CBarB, 1, false)[0],
            w0: take(RoleKind::W0, 1, false)[0],
            w1: take(RoleKind::W1, 1, false)[0],
        };

        for i in 0..ell {
            for h in 0..lg {
                let one = i >> h & 1 == 1;
                edges.push((ids.a[i], if one { ids.t_a[h] } else { ids.f_a[h] }));
                edges.push((ids.b[i], if one { ids.t_b[h] } else { ids.f_b[h] }));
            }
            if inst.x[i] {
                edges.push((ids.a[i], ids.cbar_a));
            }
            if inst.y[i] {
                edges.push((ids.b[i], ids.cbar_b));
            }
            edges.push((ids.c_a, ids.a[i]));
            edges.push((ids.c_b, ids.b[i]));
            edges.push((ids.w0, ids.a[i]));
        }
        for h in 0..lg {
            edges.push((ids.cbar_a, ids.f_a[h]));
            edges.push((ids.cbar_a, ids.t_a[h]));
            edges.push((ids.cbar_b, ids.f_b[h]));
            edges.push((ids.cbar_b, ids.t_b[h]));
            edges.push((ids.f_a[h], ids.t_b[h]));
            edges.push((ids.t_a[h], ids.f_b[h]));
            if variant.same_side_ft {
                edges.push((ids.f_a[h], ids.t_a[h]));
            }
        }
        edges.push((ids.c_a, ids.cbar_a));
        match variant.c_path {
            CPath::Listed => {
                edges.push((ids.cbar_a, ids.c_b));
                edges.push((ids.c_b, ids.cbar_b));
            }
            CPath::BarsAdjacent => {
                edges.push((ids.cbar_a, ids.cbar_b));
                edges.push((ids.cbar_b, ids.c_b));
            }
        }
        edges.push((ids.w0, ids.w1));
        edges.push((ids.w1, w2));
        copies.push(ids);
    }
    roles.push(Role {
        kind: RoleKind::W2,
        index: None,
        copy: None,
    });

    Ok(GadgetGraph {
        graph: Graph::unweighted(n, edges)?,
        instance: inst,
        variant,
        copies,
        w2,
        roles,
    })
}

impl GadgetGraph {
    pub fn role(&self, id: NodeId) -> Role {
        self.roles[id as usize - 1]
    }

    /// Human-readable label such as `a^2`, `c̄_B`, `w²` (with `#copy` when
    /// there are several copies).
    pub fn label(&self, id: NodeId) -> String {
        let r = self.role(id);
        let i = r.index.unwrap_or(0);
        let base = match r.kind {
            RoleKind::A => format!("a^{i}"),
            RoleKind::B => format!("b^{i}"),
            RoleKind::FA => format!("f^{i}_A"),
            RoleKind::TA => format!("t^{i}_A"),
            RoleKind::FB => format!("f^{i}_B"),
            RoleKind::TB => format!("t^{i}_B"),
            RoleKind::CA => "c_A".into(),
            RoleKind::CBarA => "cbar_A".into(),
            RoleKind::CB => "c_B".into(),
            RoleKind::CBarB => "cbar_B".into(),
            RoleKind::W0 => "w^0".into(),
            RoleKind::W1 => "w^1".into(),
            RoleKind::W2 => "w^2".into(),
        };
        match r.copy {
            Some(c) if self.copies.len() > 1 => format!("{base}#{c}"),
            _ => base,
        }
    }

    pub fn sidecar(&self) -> Sidecar {
        Sidecar {
            format_version: GADGET_FORMAT_VERSION,
            ell: self.instance.ell,
            x: bits_to_string(&self.instance.x),
            y: bits_to_string(&self.instance.y),
            copies: self.copies.len(),
            variant: self.variant,
            disjoint: self.instance.is_disjoint(),
            nodes: self
                .graph
                .nodes()
                .map(|id| SidecarNode {
                    id,
                    label: self.label(id),
                    role: self.role(id),
                })
                .collect(),
        }
    }
}

/// JSON companion to a gadget's graph file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Sidecar {
    pub format_version: u32,
    pub ell: usize,
    pub x: String,
    pub y: String,
    pub copies: usize,
    pub variant: Variant,
    pub disjoint: bool,
    pub nodes: Vec<SidecarNode>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SidecarNode {
    pub id: NodeId,
    pub label: String,
    pub role: Role,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Claim1Report {
    /// Every node outside `A` has eccentricity at least 4.
    pub part1: bool,
    /// Outside-`A` node with eccentricity below 4, and that eccentricity.
    pub part1_witness: Option<(NodeId, Length)>,
    /// `d(a^i, u) <= 3` for all `u` other than `b^i` and `c_B`.
    pub part2: bool,
    /// `(a^i, u, d)` with `d > 3`.
    pub part2_witness: Option<(NodeId, NodeId, Length)>,
}

impl Claim1Report {
    pub fn holds(&self) -> bool {
        self.part1 && self.part2
    }
}

/// Checks both distance claims on a single-copy gadget by all-pairs BFS.
pub fn verify_claim1(gg: &GadgetGraph) -> Result<Claim1Report, GadgetError> {
    if gg.copies.len() != 1 || gg.instance.ell > CLAIM1_MAX_ELL {
        return Err(GadgetError::TooLarge);
    }
    claim1_on(&gg.graph, &gg.copies[0])
}

/// Like [`verify_claim1`] but on an arbitrary graph that reuses the gadget's
/// ids, e.g. one with an extra edge.
pub fn claim1_on(g: &Graph, ids: &CopyIds) -> Result<Claim1Report, GadgetError> {
    let dm = DistMatrix::new(g)?;
    let part1_witness = g
        .nodes()
        .filter(|v| !ids.a.contains(v))
        .map(|v| (v, dm.eccentricity(v)))
        .find(|&(_, e)| e < 4);
    let mut part2_witness = None;
    'outer: for (i, &a) in ids.a.iter().enumerate() {
        for u in g.nodes() {
            if u == ids.b[i] || u == ids.c_b {
                continue;
            }
            let d = dm.get(a, u);
            if d > 3 {
                part2_witness = Some((a, u, d));
                break 'outer;
            }
        }
    }
    Ok(Claim1Report {
        part1: part1_witness.is_none(),
        part1_witness,
        part2: part2_witness.is_none(),
        part2_witness,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Lemma4Report {
    pub disjoint: bool,
    pub opt1: Length,
    /// Smallest-id node attaining `opt1`.
    pub center: NodeId,
    /// `opt1 == 4` when disjoint and `opt1 == 3` otherwise.
    pub holds: bool,
    /// `d(a^i, b^i) <= 3` exactly for the indices with `x[i] = y[i] = 1`.
    pub short_pairs_match: bool,
}

pub fn verify_lemma4(inst: &DisjointnessInstance) -> Result<Lemma4Report, GadgetError> {
    verify_lemma4_with(inst, Variant::default())
}

pub fn verify_lemma4_with(
    inst: &DisjointnessInstance,
    variant: Variant,
) -> Result<Lemma4Report, GadgetError> {
    if inst.ell > 8 {
        return Err(GadgetError::TooLarge);
    }
    let gg = build_gkxy_with(inst, 1, variant)?;
    let dm = DistMatrix::new(&gg.graph)?;
    let (opt1, center) = gg
        .graph
        .nodes()
        .map(|v| (dm.eccentricity(v), v))
        .min()
        .expect("gadget is non-empty");
    let disjoint = inst.is_disjoint();
    let ids = &gg.copies[0];
    let short_pairs_match =
        (0..inst.ell).all(|i| (dm.get(ids.a[i], ids.b[i]) <= 3) == (inst.x[i] && inst.y[i]));
    Ok(Lemma4Report {
        disjoint,
        opt1,
        center,
        holds: opt1 == if disjoint { 4 } else { 3 },
        short_pairs_match,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Claim2Report {
    pub k: usize,
    pub opt_k: Length,
    pub sets_checked: u64,
    /// Sets with radius below `1.5 * opt_k`.
    pub good_sets: u64,
    pub counterexamples: u64,
    /// First few counterexamples.
    pub examples: Vec<Vec<NodeId>>,
}

impl Claim2Report {
    pub fn holds(&self) -> bool {
        self.counterexamples == 0
    }
}

/// Enumerates all `k`-sets of `G^k_{x,y}` and checks that every set with
/// radius below `1.5 * OPT_k` has exactly one center in each copy.
pub fn verify_claim2(inst: &DisjointnessInstance, k: usize) -> Result<Claim2Report, GadgetError> {
    if inst.ell > 4 || k > 2 {
        return Err(GadgetError::TooLarge);
    }
    let gg = build_gkxy(inst, k)?;
    let dm = DistMatrix::new(&gg.graph)?;
    let opt_k = opt_k_with(&dm, k, DEFAULT_ORACLE_LIMIT)?.radius;
    let mut report = Claim2Report {
        k,
        opt_k,
        sets_checked: 0,
        good_sets: 0,
        counterexamples: 0,
        examples: Vec::new(),
    };
    let mut err = None;
    for_each_subset(gg.graph.n(), k, |set| {
        report.sets_checked += 1;
        let r = match radius_with(&dm, set) {
            Ok(r) => r,
            Err(e) => {
                err = Some(e);
                return false;
            }
        };
        if 2 * r >= 3 * opt_k {
            return true;
        }
        report.good_sets += 1;
        let mut per_copy = vec![0usize; k];
        let mut shared = false;
        for &v in set {
            match gg.role(v).copy {
                Some(c) => per_copy[c] += 1,
                None => shared = true,
            }
        }
        if shared || per_copy.iter().any(|&c| c != 1) {
            report.counterexamples += 1;
            if report.examples.len() < 5 {
                report.examples.push(set.to_vec());
            }
        }
        true
    });
    if let Some(e) = err {
        return Err(e.into());
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(x: &str, y: &str) -> DisjointnessInstance {
        DisjointnessInstance::parse(x, y).unwrap()
    }

    #[test]
    fn sizes_and_ids() {
        let gg = build_gxy(&inst("0000", "0000")).unwrap();
        assert_eq!(gg.graph.n(), copy_size(4));
        assert_eq!(gg.graph.n(), 23);
        assert_eq!(gg.copies[0].a, vec![1, 2, 3, 4]);
        assert_eq!(gg.copies[0].w1, 22);
        assert_eq!(gg.w2, 23);
        assert!(gg.graph.is_connected());

        let g2 = build_gkxy(&inst("0000", "0000"), 3).unwrap();
        assert_eq!(g2.graph.n(), 3 * 22 + 1);
        assert_eq!(g2.copies[1].a[0], 23);
        assert_eq!(g2.graph.degree(g2.w2), 3);
    }

    #[test]
    fn one_copy_equals_gxy() {
        let i = inst("1010", "0110");
        let a = build_gxy(&i).unwrap();
        let b = build_gkxy(&i, 1).unwrap();
        assert_eq!(a.graph, b.graph);
    }

    #[test]
    fn bad_ell() {
        assert_eq!(
            DisjointnessInstance::parse("101", "101").unwrap_err(),
            GadgetError::BadEll(3)
        );
        assert!(DisjointnessInstance::parse("1010", "10").is_err());
        assert_eq!(
            DisjointnessInstance::parse("10x0", "1000").unwrap_err(),
            GadgetError::BadBits
        );
    }

    #[test]
    fn lemma4_examples() {
        let r = verify_lemma4(&inst("0000", "0000")).unwrap();
        assert_eq!((r.opt1, r.holds), (4, true));
        let i = inst("0100", "0110");
        let r = verify_lemma4(&i).unwrap();
        assert_eq!((r.opt1, r.holds), (3, true));
        let gg = build_gxy(&i).unwrap();
        // the optimal center is a^1
        assert_eq!(r.center, gg.copies[0].a[1]);
    }

    #[test]
    fn claim1_exhaustive_small() {
        for code in 0..256 {
            let i = DisjointnessInstance::from_code(4, code).unwrap();
            let gg = build_gxy(&i).unwrap();
            let rep = verify_claim1(&gg).unwrap();
            assert!(rep.holds(), "{code}: {rep:?}");
            let l4 = verify_lemma4(&i).unwrap();
            assert!(l4.holds && l4.short_pairs_match, "{code}: {l4:?}");
        }
    }

    #[test]
    fn only_the_default_variant_verifies() {
        let mut passing = Vec::new();
        for c_path in [CPath::Listed, CPath::BarsAdjacent] {
            for same_side_ft in [false, true] {
                let v = Variant {
                    c_path,
                    same_side_ft,
                };
                let ok = (0..256).all(|code| {
                    let i = DisjointnessInstance::from_code(4, code).unwrap();
                    let gg = build_gkxy_with(&i, 1, v).unwrap();
                    verify_claim1(&gg).unwrap().holds() && verify_lemma4_with(&i, v).unwrap().holds
                });
                if ok {
                    passing.push(v);
                }
            }
        }
        assert_eq!(passing, vec![Variant::default()]);
    }

    #[test]
    fn listed_path_breaks_the_gap() {
        // with c̄_A - c_B adjacent, a^i reaches every b^j within 3 as soon as x[i] = 1
        let v = Variant {
            c_path: CPath::Listed,
            ..Variant::default()
        };
        let r = verify_lemma4_with(&inst("1000", "0000"), v).unwrap();
        assert!(!r.holds);
        assert_eq!(r.opt1, 3);
    }

    #[test]
    fn negative_control_fails_claim1() {
        let gg = build_gxy(&inst("1111", "1111")).unwrap();
        let ids = &gg.copies[0];
        let mutated = gg.graph.with_edge(gg.w2, ids.c_b, 1).unwrap();
        let rep = claim1_on(&mutated, ids).unwrap();
        assert!(!rep.part1);
        let (v, ecc) = rep.part1_witness.unwrap();
        assert!(ecc < 4);
        assert!(!ids.a.contains(&v));
    }

    #[test]
    fn b0_is_six_from_the_shared_node() {
        let gg = build_gkxy(&inst("1111", "1111"), 2).unwrap();
        let dm = DistMatrix::new(&gg.graph).unwrap();
        for ids in &gg.copies {
            assert_eq!(dm.get(ids.b[0], gg.w2), 6);
        }
    }

    #[test]
    fn claim2_examples() {
        let r = verify_claim2(&inst("1111", "1111"), 2).unwrap();
        assert_eq!(r.opt_k, 3);
        assert!(r.holds(), "{r:?}");
        let r = verify_claim2(&inst("0000", "1111"), 2).unwrap();
        assert!(r.opt_k <= 4);
        assert!(r.good_sets > 0);
        assert!(r.holds(), "{r:?}");
    }

    #[test]
    fn sidecar_labels() {
        let gg = build_gkxy(&inst("0000", "0000"), 2).unwrap();
        let sc = gg.sidecar();
        assert_eq!(sc.nodes.len(), 45);
        assert_eq!(sc.nodes[0].label, "a^0#0");
        assert_eq!(sc.nodes[44].label, "w^2");
        let json = serde_json::to_string(&sc).unwrap();
        assert!(json.contains("\"kind\":\"c_bar_a\""));
    }
}
