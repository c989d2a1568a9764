use proptest::prelude::*;

use crate::adversary::{build_rearranged_cycle, named_algorithm, ALGORITHMS};
use crate::clique::{clique_kcenter, Phase1};
use crate::congest::congest_kcenter;
use crate::generate::{cycle, gnp};
use crate::graph::{diameter, eccentricity, DistMatrix, Graph};
use crate::kcenter::{
    cycle_opt_k, greedy_gonzalez, greedy_order, opt_k_bruteforce, DistanceSource,
};
use crate::local::{local_kcenter_alg1, ViewProgram};
use crate::sim::{local_views, ModelConfig, Simulator};
use num_rational::Ratio;

fn graph(max_n: usize, max_w: u64) -> impl Strategy<Value = Graph> {
    (2..=max_n, 0.25f64..0.9, 1..=max_w, any::<u64>())
        .prop_map(|(n, p, w, seed)| gnp(n, p, w, seed).expect("dense enough to connect"))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn greedy_is_within_twice_opt(g in graph(10, 6), k in 1usize..=3) {
        let ds = DistanceSource::exact(&g).unwrap();
        let sol = greedy_gonzalez(&g, &ds, k, 1).unwrap();
        let opt = opt_k_bruteforce(&g, k).unwrap();
        prop_assert!(sol.radius <= 2 * opt.radius);
        prop_assert!(opt.radius <= sol.radius);
    }

    #[test]
    fn stretched_greedy_is_within_two_alpha(
        g in graph(10, 6),
        k in 1usize..=3,
        alpha in 1.0f64..3.0,
        seed in any::<u64>(),
    ) {
        let ds = DistanceSource::stretched(&g, alpha, seed).unwrap();
        let dm = DistMatrix::new(&g).unwrap();
        for u in g.nodes() {
            for v in g.nodes() {
                let (d, q) = (dm.get(u, v), ds.query(u, v));
                prop_assert!(d <= q && q as f64 <= alpha * d as f64 + 1e-9);
                prop_assert_eq!(q, ds.query(v, u));
            }
        }
        let sol = greedy_gonzalez(&g, &ds, k, 1).unwrap();
        let opt = opt_k_bruteforce(&g, k).unwrap().radius;
        prop_assert!(sol.radius as f64 <= 2.0 * alpha * opt as f64 + 1e-9);
    }

    #[test]
    fn metric_axioms(g in graph(12, 9)) {
        let dm = DistMatrix::new(&g).unwrap();
        let mut max_ecc = 0;
        for u in g.nodes() {
            prop_assert_eq!(dm.get(u, u), 0);
            max_ecc = max_ecc.max(eccentricity(&g, u).unwrap());
            for v in g.nodes() {
                prop_assert_eq!(dm.get(u, v), dm.get(v, u));
                for w in g.nodes() {
                    prop_assert!(dm.get(u, w) <= dm.get(u, v) + dm.get(v, w));
                }
            }
        }
        prop_assert_eq!(diameter(&g).unwrap(), max_ecc);
    }

    #[test]
    fn text_format_round_trips(g in graph(12, 9)) {
        prop_assert_eq!(Graph::parse(&g.to_text()).unwrap(), g);
    }

    #[test]
    fn cycle_closed_form(n in 3usize..=16, k in 1usize..=4) {
        let g = cycle(n).unwrap();
        prop_assert_eq!(opt_k_bruteforce(&g, k).unwrap().radius, cycle_opt_k(n, k));
        prop_assert!(cycle_opt_k(n, k) <= (n.saturating_sub(k) as u64).div_ceil(2 * k as u64));
    }

    #[test]
    fn congest_reproduces_the_greedy(g in graph(12, 1), k in 1usize..=4) {
        let run = congest_kcenter(&g, k).unwrap();
        let mut want = greedy_order(&DistanceSource::exact(&g).unwrap(), k, 1);
        want.sort_unstable();
        prop_assert_eq!(&run.solution.centers, &want);
        prop_assert!(run.rounds_ok());
        prop_assert!(run.stats.max_message_bits <= run.stats.budget_bits.unwrap());
    }

    #[test]
    fn clique_reproduces_the_greedy(g in graph(12, 8), k in 1usize..=4) {
        let run = clique_kcenter(&g, k, Phase1::ExactBroadcast).unwrap();
        let want = greedy_order(&DistanceSource::exact(&g).unwrap(), k, 1);
        prop_assert_eq!(run.phase2_rounds, want.len() as u64 - 1);
        prop_assert_eq!(run.sequence, want);
    }

    #[test]
    fn local_is_within_its_bound(g in graph(10, 1), k in 1usize..=3, eps in 1i64..=4) {
        let eps = Ratio::new(eps, 2);
        let run = local_kcenter_alg1(&g, k, eps).unwrap();
        let opt = opt_k_bruteforce(&g, k).unwrap().radius;
        let bound = (2.0 + *eps.numer() as f64 / *eps.denom() as f64) * k as f64;
        prop_assert!(run.solution.radius as f64 <= bound * opt as f64 + 1e-9);
        prop_assert!(run.solution.centers.len() <= k);
    }

    #[test]
    fn flooded_views_match_direct_views(g in graph(9, 1), t in 0usize..=3) {
        let alg = named_algorithm("low-ids", g.n(), 1, t, 1.0).unwrap();
        let prog = ViewProgram { alg: alg.as_ref() };
        let out = Simulator::new(ModelConfig::local(), t as u64 + 2).run(&g, &prog).unwrap();
        for (got, want) in out.outputs.iter().zip(local_views(&g, t)) {
            prop_assert_eq!(got.1.as_ref(), Some(&want));
        }
    }

    #[test]
    fn rearrangement_keeps_views(
        which in 0usize..ALGORITHMS.len(),
        k in 1usize..=3,
        t in 1usize..=3,
        extra in 1usize..=60,
    ) {
        let n = 2 * k * t + extra;
        let alg = named_algorithm(ALGORITHMS[which], n, k, t, 1.0).unwrap();
        let rep = build_rearranged_cycle(alg.as_ref(), n, k, 1.0).unwrap();
        prop_assert!(rep.views_identical);
        prop_assert!(rep.max_segment_len <= 2 * t + 1);
        // the free arc forces t + ceil(L/2); this is the best any view-preserving order can do
        let free = n - rep.segments.iter().map(|s| s.nodes.len()).sum::<usize>();
        prop_assert!(rep.radius_rearranged >= (t + free.div_ceil(2)) as u64, "{:?}", rep);
        let mut ids = rep.rearranged.clone();
        ids.sort_unstable();
        prop_assert_eq!(ids, (1..=n as u32).collect::<Vec<_>>());
    }
}
