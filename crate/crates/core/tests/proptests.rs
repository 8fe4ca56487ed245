use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use expanding_search::euclidean::portal_dp::{PortalConfig, PortalMetric};
use expanding_search::euclidean::quadtree::grid_round;
use expanding_search::euclidean::{EuclideanInstance, Point};
use expanding_search::hardness::{build_gadget, hardness_ratio, is_structured, structure_pattern, Gadget, St12Instance};
use expanding_search::oracles::{brute_force_esp, ExactOracle, Target, TreeOracle};
use expanding_search::unweighted::solve_unweighted;
use expanding_search::weighted::{build_quota_schedule, solve_weighted};
use expanding_search::{concat_patterns, total_latency, Instance, SearchPattern};

/// Connected graph on `n ≤ 6` vertices: a random tree plus extra edges.
fn graph(unit: bool) -> impl Strategy<Value = Instance> {
    (2usize..=6).prop_flat_map(move |n| {
        let parents: Vec<_> = (1..n).map(|i| 0..i).collect();
        let lengths = prop::collection::vec(1u64..=5, n - 1);
        let extras = prop::collection::vec((0..n, 0..n, 1u64..=5), 0..=n);
        let weights = prop::collection::vec(if unit { 1u64..=1 } else { 0u64..=3 }, n);
        (parents, lengths, extras, weights).prop_map(move |(parents, lengths, extras, mut weights)| {
            let mut edges: Vec<(usize, usize, u64)> =
                parents.iter().enumerate().map(|(i, &p)| (p, i + 1, lengths[i])).collect();
            for (u, v, l) in extras {
                let (u, v) = (u.min(v), u.max(v));
                if u != v && !edges.iter().any(|&(a, b, _)| (a.min(b), a.max(b)) == (u, v)) {
                    edges.push((u, v, l));
                }
            }
            if unit {
                weights[0] = 1;
            }
            Instance::indexed(weights, &edges).unwrap()
        })
    })
}

/// Random edge order of a search pattern that explores everything.
fn arbitrary_pattern(inst: &Instance, mut picks: Vec<usize>) -> SearchPattern {
    let mut seen = vec![false; inst.n()];
    seen[inst.root()] = true;
    let mut out = Vec::new();
    while !seen.iter().all(|&s| s) {
        let frontier: Vec<usize> = (0..inst.m())
            .filter(|&e| seen[inst.edge(e).u] != seen[inst.edge(e).v])
            .collect();
        let e = frontier[picks.pop().unwrap_or(0) % frontier.len()];
        seen[inst.edge(e).u] = true;
        seen[inst.edge(e).v] = true;
        out.push(e);
    }
    SearchPattern::new(out)
}

fn points() -> impl Strategy<Value = EuclideanInstance> {
    prop::collection::vec((0.0f64..10.0, 0.0f64..10.0, 0u64..=3), 2..=5).prop_map(|pts| {
        let points = pts.into_iter().map(|(x, y, weight)| Point { x, y, weight }).collect();
        EuclideanInstance::new(0, points).unwrap()
    })
}

fn gadget() -> impl Strategy<Value = Gadget> {
    (2usize..=4, 2usize..=3, any::<u64>()).prop_map(|(n, k, seed)| {
        let st = St12Instance::random(n, 2 + seed as usize % (n - 1), 0.5, seed).unwrap();
        build_gadget(&st, k).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn unweighted_stays_within_e(inst in graph(true)) {
        let sol = solve_unweighted(&inst, &ExactOracle::default()).unwrap();
        let replay = total_latency(&inst, &sol.pattern).unwrap().total;
        prop_assert_eq!(replay, sol.report.total);
        let opt = brute_force_esp(&inst).unwrap().latency;
        prop_assert!(opt <= replay);
        prop_assert!(replay as f64 <= std::f64::consts::E * opt as f64 + 1e-9);
    }

    #[test]
    fn weighted_covers_every_weighted_vertex(inst in graph(false)) {
        let eps = BigRational::new(BigInt::from(1), BigInt::from(2));
        let sol = solve_weighted(&inst, &eps, &ExactOracle::default()).unwrap();
        for v in inst.weighted_vertices() {
            prop_assert!(sol.report.latencies[v].is_some());
        }
        prop_assert!(brute_force_esp(&inst).unwrap().latency <= sol.report.total);
    }

    #[test]
    fn exact_trees_grow_with_k(inst in graph(false)) {
        let oracle = ExactOracle::default();
        let mut prev = 0;
        for k in 1..=inst.n() {
            let t = oracle.solve(&inst, Target::Vertices(k)).unwrap();
            prop_assert!(t.vertices().len() >= k);
            prop_assert!(t.length() >= prev);
            prev = t.length();
        }
    }

    #[test]
    fn quota_targets_increase_to_total(w in 1u64..200, den in 1i64..=8) {
        let eps = BigRational::new(BigInt::from(1), BigInt::from(den));
        let s = build_quota_schedule(w, &eps).unwrap();
        let targets: Vec<u64> = (1..=s.omega).map(|i| s.target(i)).collect();
        prop_assert!(targets.windows(2).all(|p| p[0] <= p[1]));
        prop_assert_eq!(*targets.last().unwrap(), w);
    }

    #[test]
    fn concatenation_keeps_first_and_covers_both(
        inst in graph(false),
        a in prop::collection::vec(any::<usize>(), 8),
        b in prop::collection::vec(any::<usize>(), 8),
        cut in 0usize..6,
    ) {
        let first = arbitrary_pattern(&inst, a);
        let first = first.prefix(cut.min(first.len()));
        let second = arbitrary_pattern(&inst, b);
        let joined = concat_patterns(&first, &second, &inst);
        prop_assert_eq!(&joined.edges()[..first.len()], first.edges());
        prop_assert_eq!(joined.len(), inst.n() - 1);
        prop_assert!(total_latency(&inst, &joined).is_ok());
    }

    #[test]
    fn pattern_json_round_trips(inst in graph(false), picks in prop::collection::vec(any::<usize>(), 8)) {
        let pat = arbitrary_pattern(&inst, picks);
        let back = SearchPattern::from_json_str(&inst, &pat.to_json_string(&inst)).unwrap();
        prop_assert_eq!(back, pat);
        let again = Instance::from_json_str(&inst.to_json_string()).unwrap();
        prop_assert_eq!(again.to_json_string(), inst.to_json_string());
    }

    #[test]
    fn rounding_moves_points_at_most_half_a_diagonal(inst in points(), eps in 0.1f64..1.0) {
        let r = grid_round(&inst, eps, 1.0).unwrap();
        for (p, q) in inst.points.iter().zip(r.to_instance().points) {
            prop_assert!(p.dist(&q) <= r.g * std::f64::consts::FRAC_1_SQRT_2 + 1e-9);
        }
    }

    #[test]
    fn portal_metric_dominates_and_improves_with_portals(inst in points()) {
        let cfg = PortalConfig::default();
        let r = grid_round(&inst, 0.5, cfg.quadtree.c_g).unwrap();
        let exact = r.to_instance().distances();
        let mut prev: Option<Vec<Vec<f64>>> = None;
        for portals in [2, 8, 32] {
            let m = PortalMetric::build(&r, (0, 0), &PortalConfig { portals: Some(portals), ..cfg.clone() }, 0.5).unwrap();
            let d = m.distances();
            for i in 0..d.len() {
                for j in 0..d.len() {
                    prop_assert!(d[i][j] + 1e-9 >= exact[i][j]);
                    prop_assert_eq!(d[i][j], d[j][i]);
                    if let Some(p) = &prev {
                        prop_assert!(d[i][j] <= p[i][j] + 1e-9);
                    }
                }
            }
            prev = Some(d);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn structuring_is_monotone_and_idempotent(g in gadget(), seed in any::<u64>()) {
        let inst = &g.instance;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let picks: Vec<usize> = (0..inst.n()).map(|_| rand::Rng::gen(&mut rng)).collect();
        let pat = arbitrary_pattern(inst, picks);
        let s = structure_pattern(&g, &pat).unwrap();
        prop_assert!(is_structured(&g, &s));
        prop_assert!(total_latency(inst, &s).unwrap().total <= total_latency(inst, &pat).unwrap().total);
        prop_assert_eq!(structure_pattern(&g, &s).unwrap(), s);
    }

    #[test]
    fn gadget_files_are_recognized(g in gadget()) {
        let parsed = Gadget::from_instance(&g.instance).unwrap();
        prop_assert_eq!(parsed.k, g.k);
        prop_assert_eq!(parsed.a, g.a);
        let st = St12Instance::from_json_str(&g.st.to_json_string()).unwrap();
        prop_assert_eq!(st.edges(), g.st.edges());
    }

    #[test]
    fn hardness_ratio_falls_with_copies(num in 1i64..40, k in 2u64..50) {
        let beta = BigRational::new(BigInt::from(num + 40), BigInt::from(40));
        let r = hardness_ratio(&beta, k).unwrap();
        let next = hardness_ratio(&beta, k + 1).unwrap();
        prop_assert!(next < r);
        prop_assert!(next > BigRational::from_integer(BigInt::from(3)) * &beta - BigRational::from_integer(BigInt::from(2)));
    }
}
