//! Acceptance gate: one PASS/FAIL line per criterion.
//!
//! Every optimum compared against here comes from an oracle written in this
//! file (or from one already cross-checked by criterion 1), never from the
//! code under test.

use std::fmt::Write as _;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;
use std::thread;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use expanding_search::bench::{
    connected_graphs, sweep_instances, sweep_small_graphs, Algorithm, SweepConfig, SweepReport,
};
use expanding_search::euclidean::decompose::{derandomize_shift, time_point, DecomposeConfig, SegmentedBounded};
use expanding_search::euclidean::portal_dp::{solve_on_metric, Breakpoints, PortalConfig, PortalMetric};
use expanding_search::euclidean::quadtree::{grid_round, shift_grid, RoundedInstance};
use expanding_search::euclidean::{EuclideanInstance, Point};
use expanding_search::hardness::{
    build_gadget, extract_best_steiner, is_structured, steiner_optimum, structure_pattern, Gadget, St12Instance,
};
use expanding_search::oracles::{brute_force_esp, brute_force_esp_with_limit, ExactOracle, HeuristicOracle, InflatedOracle, TreeOracle};
use expanding_search::unweighted::solve_unweighted;
use expanding_search::weighted::{build_quota_schedule, solve_weighted};
use expanding_search::{total_latency, EspError, Instance, SearchPattern};

type Outcome = Result<String, String>;

/// e rounded up at ten decimals.
const E_NUM: u64 = 27_182_818_285;
const E_DEN: u64 = 10_000_000_000;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn big(x: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

fn e_upper() -> BigRational {
    BigRational::new(BigInt::from(E_NUM), BigInt::from(E_DEN))
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------------------
// Criterion 1: brute force against permutation enumeration.

/// Tries every order of the non-root vertices in which each vertex is
/// adjacent to those before it, joining it by its cheapest edge.
fn permutation_optimum(inst: &Instance) -> u64 {
    fn go(inst: &Instance, explored: &mut Vec<bool>, clock: u64, cost: u64, best: &mut u64) {
        if cost >= *best {
            return;
        }
        let mut any = false;
        for v in 0..inst.n() {
            if explored[v] {
                continue;
            }
            let join = inst
                .neighbors(v)
                .iter()
                .filter(|(u, _)| explored[*u])
                .map(|&(_, e)| inst.edge(e).length)
                .min();
            let Some(len) = join else { continue };
            any = true;
            explored[v] = true;
            let t = clock + len;
            go(inst, explored, t, cost + inst.weight(v) * t, best);
            explored[v] = false;
        }
        if !any {
            *best = (*best).min(cost);
        }
    }
    let mut explored = vec![false; inst.n()];
    explored[inst.root()] = true;
    let mut best = u64::MAX;
    go(inst, &mut explored, 0, 0, &mut best);
    best
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut count = 0;
    for n in 1..=6 {
        for graph in connected_graphs(n) {
            for _ in 0..3 {
                let edges: Vec<(usize, usize, u64)> =
                    graph.iter().map(|&(u, v)| (u, v, rng.gen_range(1..=3))).collect();
                let weights: Vec<u64> = (0..n).map(|_| rng.gen_range(0..=2)).collect();
                let inst = Instance::indexed(weights, &edges).map_err(|e| e.to_string())?;
                let brute = brute_force_esp(&inst).map_err(|e| e.to_string())?;
                let replay = total_latency(&inst, &brute.pattern).map_err(|e| e.to_string())?.total;
                let oracle = permutation_optimum(&inst);
                ensure(brute.latency == oracle && replay == oracle, || {
                    format!("n={n} edges={edges:?}: brute {} replay {replay} permutations {oracle}", brute.latency)
                })?;
                count += 1;
            }
        }
    }
    Ok(format!("{count} instances agree exactly"))
}

// ---------------------------------------------------------------------------
// Criterion 2: path cost and π bounds on every unweighted run.

fn criterion_2() -> Outcome {
    let instances = sweep_instances(&SweepConfig::unweighted(6)).map_err(|e| e.to_string())?;
    let oracles: Vec<Box<dyn TreeOracle>> = vec![
        Box::new(ExactOracle::default()),
        Box::new(InflatedOracle::new(Ratio::new(2, 1))),
        Box::new(HeuristicOracle),
    ];
    let mut runs = 0;
    for (id, inst) in &instances {
        for oracle in &oracles {
            let sol = solve_unweighted(inst, oracle.as_ref()).map_err(|e| format!("{id}: {e}"))?;
            let n = inst.n() as u64;
            let labels = &sol.plan.labels;
            ensure(labels.first() == Some(&1) && labels.last() == Some(&inst.n()), || {
                format!("{id}: path {labels:?} does not run from 1 to n")
            })?;
            // c(P) = Σ (n − i)·ℓ(T_j) over the arcs (i, j) of the path.
            let path_cost: u64 = labels
                .windows(2)
                .map(|w| (n - w[0] as u64) * sol.tree_lengths[w[1] - 1])
                .sum();
            ensure(big(path_cost) == sol.plan.cost, || format!("{id}: recomputed path cost differs"))?;
            ensure(sol.report.total <= path_cost, || {
                format!("{id} ({}): L = {} > c(P) = {path_cost}", oracle.name(), sol.report.total)
            })?;
            let mut prefix = Vec::new();
            let mut acc = 0;
            for &l in labels {
                acc += sol.tree_lengths[l - 1];
                prefix.push(acc);
            }
            for (pos, &v) in sol.report.order.iter().enumerate() {
                let i = pos + 1;
                let j = labels.iter().position(|&l| l >= i).expect("last label is n");
                let lat = sol.report.latencies[v].expect("explored");
                ensure(lat <= prefix[j], || format!("{id}: vertex #{i} latency {lat} > π = {}", prefix[j]))?;
            }
            runs += 1;
        }
    }
    Ok(format!("{runs} runs satisfy L ≤ c(P) and L_v ≤ π(i)"))
}

// ---------------------------------------------------------------------------
// Criteria 3 and 4: sweeps against brute force.

/// Largest `alg/opt` and whether every row satisfies `alg ≤ bound · opt`.
fn check_sweep(report: &SweepReport, bound: &BigRational) -> (bool, f64, String) {
    let mut ok = true;
    let mut worst = (1.0f64, String::new());
    for r in &report.records {
        let opt = r.optimum.expect("sweeps record the optimum");
        if big(r.latency) > bound * big(opt) {
            ok = false;
        }
        let ratio = r.latency as f64 / opt as f64;
        if ratio > worst.0 {
            worst = (ratio, r.instance.clone());
        }
    }
    (ok, worst.0, worst.1)
}

fn criterion_3() -> Outcome {
    let config = SweepConfig::unweighted(6);
    let eps = rat(1, 4);
    let mut notes = Vec::new();
    for (oracle, factor) in [
        (Box::new(ExactOracle::default()) as Box<dyn TreeOracle>, big(1)),
        (Box::new(InflatedOracle::new(Ratio::new(2, 1))), big(2)),
    ] {
        let report = sweep_small_graphs(&config, Algorithm::Unweighted, oracle.as_ref(), &eps).map_err(|e| e.to_string())?;
        let bound = &factor * e_upper();
        let (ok, worst, at) = check_sweep(&report, &bound);
        ensure(ok, || format!("{}: ratio {worst:.6} on {at} exceeds {bound}", oracle.name()))?;
        notes.push(format!("{} worst {worst:.4} ≤ {}e over {} runs", oracle.name(), factor, report.records.len()));
    }
    Ok(notes.join("; "))
}

fn criterion_4() -> Outcome {
    let eps = rat(1, 4);
    let config = SweepConfig::weighted(5, 3);
    let mut notes = Vec::new();
    for (oracle, factor) in [
        (Box::new(ExactOracle::default()) as Box<dyn TreeOracle>, big(1)),
        (Box::new(InflatedOracle::new(Ratio::new(5, 2))), rat(5, 2)),
    ] {
        let report = sweep_small_graphs(&config, Algorithm::Weighted, oracle.as_ref(), &eps).map_err(|e| e.to_string())?;
        let bound = &factor * (big(1) + &eps) * e_upper();
        let (ok, worst, at) = check_sweep(&report, &bound);
        ensure(ok, || format!("{}: ratio {worst:.6} on {at} exceeds {bound}", oracle.name()))?;
        notes.push(format!("{} worst {worst:.4} over {} runs", oracle.name(), report.records.len()));
    }
    // W = 4, ε = 1: residuals 4, 2, 1, 1/2, so the last quota is 7/2 and its
    // integer target is the full weight.
    let schedule = build_quota_schedule(4, &big(1)).map_err(|e| e.to_string())?;
    ensure(schedule.omega == 3, || format!("ω = {} for W = 4, ε = 1", schedule.omega))?;
    ensure(schedule.target(schedule.omega) == 4, || {
        format!("last target {} < W = 4", schedule.target(schedule.omega))
    })?;
    let inst = Instance::indexed(vec![0, 1, 1, 2], &[(0, 1, 1), (1, 2, 2), (0, 3, 5)]).map_err(|e| e.to_string())?;
    let sol = solve_weighted(&inst, &big(1), &ExactOracle::default()).map_err(|e| e.to_string())?;
    let covered = (1..4).all(|v| sol.report.latencies[v].is_some());
    ensure(covered, || "W = 4, ε = 1 run leaves weight uncovered".into())?;
    notes.push("W=4, ε=1 forces full coverage".into());
    Ok(notes.join("; "))
}

// ---------------------------------------------------------------------------
// Criterion 5: decomposition inequalities and ratio.

fn criterion_5() -> Outcome {
    let mut notes = Vec::new();
    for (eps_num, eps_den) in [(1i64, 2i64), (1, 1)] {
        let eps = eps_num as f64 / eps_den as f64;
        let cfg = DecomposeConfig::new(eps);
        let solver = SegmentedBounded::new(eps);
        let (gamma, a) = (cfg.gamma(), cfg.a());
        let mut worst = 1.0f64;
        let mut phases = 0;
        for seed in 0..200u64 {
            let n = 3 + (seed % 6) as usize;
            let inst = EuclideanInstance::random(n, 10.0, 3, seed);
            let sweep = derandomize_shift(&inst, &cfg, &solver, None).map_err(|e| format!("seed {seed}: {e}"))?;
            let b = sweep.best.shift;
            for p in &sweep.best.phases {
                // γ·t_{i+1} − γ·t_i with t_i = e^{(i−2)a + b}.
                let t = |i: usize| ((i as f64 - 2.0) * a + b).exp();
                let bound = gamma * t(p.class + 1) - gamma * t(p.class);
                ensure(p.t == time_point(p.class, a, b) && p.length <= bound, || {
                    format!("seed {seed}: phase {} length {} > {bound}", p.class, p.length)
                })?;
                ensure(p.worst_splice <= 1.0 + eps, || {
                    format!("seed {seed}: phase {} splice {} > 1 + ε", p.class, p.worst_splice)
                })?;
                phases += 1;
            }
            let graph = inst.to_graph(cfg.scale).map_err(|e| e.to_string())?;
            let opt = brute_force_esp(&graph).map_err(|e| e.to_string())?.latency;
            let alg = total_latency(&graph, &sweep.best.pattern).map_err(|e| e.to_string())?.total;
            ensure(alg == sweep.best.latency, || format!("seed {seed}: reported latency differs"))?;
            // alg ≤ (1 + 5ε)·opt, in integers.
            let lhs = alg as u128 * eps_den as u128;
            let rhs = (eps_den + 5 * eps_num) as u128 * opt as u128;
            ensure(lhs <= rhs, || format!("seed {seed}: ratio {} > 1 + 5ε", alg as f64 / opt as f64))?;
            if opt > 0 {
                worst = worst.max(alg as f64 / opt as f64);
            }
        }
        notes.push(format!("ε={eps}: {phases} phases within bounds, worst ratio {worst:.4} ≤ {}", 1.0 + 5.0 * eps));
    }
    Ok(notes.join("; "))
}

// ---------------------------------------------------------------------------
// Criterion 6: portal DP against a segmented brute force.

/// Best segmented objective over every exploration sequence (weighted
/// points mandatory, others optional) and every choice of at most `kappa`
/// breakpoints among the resulting latencies.
fn segmented_brute(dist: &[Vec<f64>], weights: &[u64], root: usize, kappa: usize) -> f64 {
    let n = dist.len();
    let mut best = f64::INFINITY;
    let mut seq = vec![root];
    let mut lat = vec![f64::NAN; n];
    lat[root] = 0.0;
    fn charge(lat: &[f64], weights: &[u64], kappa: usize) -> f64 {
        let mut times: Vec<f64> = (0..lat.len()).filter(|&v| weights[v] > 0 && lat[v] > 0.0).map(|v| lat[v]).collect();
        times.sort_by(f64::total_cmp);
        times.dedup();
        if times.is_empty() {
            return 0.0;
        }
        let last = *times.last().unwrap();
        let inner = &times[..times.len() - 1];
        let mut best = f64::INFINITY;
        // Choose up to kappa − 1 further breakpoints besides the last.
        for mask in 0u32..1 << inner.len() {
            if mask.count_ones() as usize + 1 > kappa {
                continue;
            }
            let mut bps: Vec<f64> = (0..inner.len()).filter(|&i| mask >> i & 1 == 1).map(|i| inner[i]).collect();
            bps.push(last);
            let cost: f64 = (0..lat.len())
                .filter(|&v| weights[v] > 0 && lat[v] > 0.0)
                .map(|v| weights[v] as f64 * *bps.iter().find(|&&b| b >= lat[v]).unwrap())
                .sum();
            best = best.min(cost);
        }
        best
    }
    fn go(
        dist: &[Vec<f64>],
        weights: &[u64],
        kappa: usize,
        seq: &mut Vec<usize>,
        lat: &mut Vec<f64>,
        clock: f64,
        best: &mut f64,
    ) {
        let n = dist.len();
        if (0..n).all(|v| weights[v] == 0 || !lat[v].is_nan()) {
            *best = best.min(charge(lat, weights, kappa));
        }
        for v in 0..n {
            if !lat[v].is_nan() {
                continue;
            }
            let join = seq.iter().map(|&u| dist[u][v]).fold(f64::INFINITY, f64::min);
            lat[v] = clock + join;
            seq.push(v);
            go(dist, weights, kappa, seq, lat, clock + join, best);
            seq.pop();
            lat[v] = f64::NAN;
        }
    }
    go(dist, weights, kappa, &mut seq, &mut lat, 0.0, &mut best);
    best
}

fn fixtures_6() -> Vec<EuclideanInstance> {
    let mut out: Vec<EuclideanInstance> = (0..12u64)
        .map(|seed| EuclideanInstance::random(2 + (seed % 4) as usize, 10.0, 3, 1000 + seed))
        .collect();
    let p = |x: f64, y: f64, weight: u64| Point { x, y, weight };
    out.push(EuclideanInstance::new(0, vec![p(0.0, 0.0, 0), p(1.0, 0.0, 1), p(2.0, 0.0, 1), p(3.0, 0.0, 1), p(4.0, 0.0, 1)]).unwrap());
    out.push(EuclideanInstance::new(2, vec![p(0.0, 0.0, 2), p(0.0, 0.0, 1), p(5.0, 5.0, 0), p(5.0, 0.0, 3), p(0.0, 5.0, 0)]).unwrap());
    out.push(EuclideanInstance::new(0, vec![p(0.0, 0.0, 0), p(-3.0, 4.0, 1), p(3.0, 4.0, 1), p(0.0, -5.0, 5)]).unwrap());
    out
}

fn portal_cost(rounded: &RoundedInstance, shift: (i64, i64), cfg: &PortalConfig, kappa: usize) -> Result<f64, String> {
    match PortalMetric::build(rounded, shift, cfg, 0.5) {
        Ok(m) => solve_on_metric(&m, rounded, &Breakpoints::Free(kappa))
            .map(|s| s.solution.objective)
            .map_err(|e| e.to_string()),
        Err(EspError::Solver(_)) => Ok(f64::INFINITY),
        Err(e) => Err(e.to_string()),
    }
}

fn criterion_6() -> Outcome {
    let eps = 0.5;
    let cfg = PortalConfig::default();
    let fixtures = fixtures_6();
    let mut worst = 1.0f64;
    for (f, inst) in fixtures.iter().enumerate() {
        let rounded = grid_round(inst, eps, cfg.quadtree.c_g).map_err(|e| e.to_string())?;
        let exact = rounded.to_instance();
        let dist = exact.distances();
        let mut best = [f64::INFINITY; 3];
        for shift in shift_grid(&rounded, 3) {
            let metric = PortalMetric::build(&rounded, shift, &cfg, eps).map_err(|e| e.to_string())?;
            for kappa in 1..=2 {
                let sol = solve_on_metric(&metric, &rounded, &Breakpoints::Free(kappa)).map_err(|e| e.to_string())?;
                best[kappa] = best[kappa].min(sol.solution.objective);
            }
        }
        for kappa in 1..=2 {
            let bf = segmented_brute(&dist, &rounded.weights, rounded.root, kappa);
            ensure(best[kappa] <= (1.0 + eps) * bf * (1.0 + 1e-12) + 1e-12, || {
                format!("fixture {f}, κ={kappa}: DP {} > (1+ε)·{bf}", best[kappa])
            })?;
            if bf > 0.0 {
                worst = worst.max(best[kappa] / bf);
            }
        }
    }
    // Monotonicity at a fixed shift.
    let mut checked = 0;
    for inst in fixtures.iter().filter(|i| i.n() >= 4).take(4) {
        let rounded = grid_round(inst, eps, cfg.quadtree.c_g).map_err(|e| e.to_string())?;
        let mut last = f64::INFINITY;
        for portals in [2, 4, 8, 16] {
            let c = portal_cost(&rounded, (0, 0), &PortalConfig { portals: Some(portals), ..cfg.clone() }, 2)?;
            ensure(c <= last * (1.0 + 1e-12), || format!("portal count {portals}: {c} > {last}"))?;
            last = c;
        }
        let mut last = f64::INFINITY;
        for cap in [1, 2, 4, 6, 10, 20] {
            let c = portal_cost(&rounded, (0, 0), &PortalConfig { cap: Some(cap), ..cfg.clone() }, 2)?;
            ensure(c <= last * (1.0 + 1e-12), || format!("crossing cap {cap}: {c} > {last}"))?;
            last = c;
        }
        checked += 1;
    }
    Ok(format!(
        "{} fixtures, worst min-over-shifts ratio {worst:.4} ≤ 1.5; monotone on {checked} fixtures",
        fixtures.len()
    ))
}

// ---------------------------------------------------------------------------
// Criterion 7: structured patterns and the gadget inequalities.

/// Optimal Steiner tree by enumerating edge subsets.
fn steiner_by_edge_subsets(st: &St12Instance) -> u64 {
    let edges = st.edges();
    let mut best = u64::MAX;
    for mask in 1u32..1 << edges.len() {
        let chosen: Vec<_> = (0..edges.len()).filter(|&i| mask >> i & 1 == 1).map(|i| edges[i]).collect();
        let cost: u64 = chosen.iter().map(|e| e.2 as u64).sum();
        if cost >= best {
            continue;
        }
        let mut parent: Vec<usize> = (0..st.n()).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            if p[x] != x {
                let r = find(p, p[x]);
                p[x] = r;
            }
            p[x]
        }
        let mut acyclic = true;
        for &(u, v, _) in &chosen {
            let (a, b) = (find(&mut parent, u), find(&mut parent, v));
            if a == b {
                acyclic = false;
                break;
            }
            parent[a] = b;
        }
        let t = st.terminals();
        let root = find(&mut parent, t[0]);
        if acyclic && t.iter().all(|&x| find(&mut parent, x) == root) {
            best = cost;
        }
    }
    best
}

fn random_pattern(g: &Gadget, rng: &mut ChaCha8Rng) -> SearchPattern {
    let inst = &g.instance;
    let mut seen = vec![false; inst.n()];
    seen[inst.root()] = true;
    let mut edges = Vec::new();
    loop {
        let covered = (0..inst.n()).all(|v| seen[v] || inst.weight(v) == 0);
        if covered && rng.gen_bool(0.5) {
            break;
        }
        let frontier: Vec<usize> = (0..inst.m())
            .filter(|&e| seen[inst.edge(e).u] != seen[inst.edge(e).v])
            .collect();
        if frontier.is_empty() {
            break;
        }
        let e = frontier[rng.gen_range(0..frontier.len())];
        seen[inst.edge(e).u] = true;
        seen[inst.edge(e).v] = true;
        edges.push(e);
    }
    SearchPattern::new(edges)
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut strict = 0;
    let mut gadgets = 0;
    for case in 0..1000u64 {
        let n = rng.gen_range(2..=4);
        let t = rng.gen_range(2..=n);
        let k = rng.gen_range(2..=3);
        let st = St12Instance::random(n, t, 0.5, case).map_err(|e| e.to_string())?;
        let g = build_gadget(&st, k).map_err(|e| e.to_string())?;
        let inst = &g.instance;
        let pat = random_pattern(&g, &mut rng);
        let before = total_latency(inst, &pat).map_err(|e| e.to_string())?.total;
        let s = structure_pattern(&g, &pat).map_err(|e| format!("case {case}: {e}"))?;
        let after = total_latency(inst, &s).map_err(|e| format!("case {case}: {e}"))?.total;
        ensure(after <= before, || format!("case {case}: latency {before} → {after}"))?;
        ensure(is_structured(&g, &s), || format!("case {case}: output not structured"))?;
        let again = structure_pattern(&g, &s).map_err(|e| e.to_string())?;
        ensure(again == s, || format!("case {case}: not idempotent"))?;
        if after < before {
            strict += 1;
        }

        // Extraction: per-copy accounting and the rearranged upper bound,
        // with weights scaled by |T|.
        let x = extract_best_steiner(&g, &s).map_err(|e| e.to_string())?;
        let tt = t as u64;
        ensure(x.latency_lower_bound(g.a, tt) <= after, || format!("case {case}: accounting bound fails"))?;
        let (ku, a) = (k as u64, g.a);
        ensure((ku - 1) * ku * x.best_cost() * tt <= 2 * after - ku * (ku + 1) * a * tt, || {
            format!("case {case}: c(T*) = {} above the rearranged bound", x.best_cost())
        })?;

        // Steiner sandwich and the ESP upper bound against independent optima.
        let opt_st = steiner_by_edge_subsets(&st);
        let (lib_st, _) = steiner_optimum(&st).map_err(|e| e.to_string())?;
        ensure(opt_st == lib_st, || format!("case {case}: Steiner oracles disagree {opt_st} vs {lib_st}"))?;
        ensure(tt - 1 <= opt_st && opt_st <= a && a <= 2 * opt_st, || {
            format!("case {case}: |T|-1 = {}, OPT_ST = {opt_st}, a = {a}", tt - 1)
        })?;
        ensure(x.best_cost() >= opt_st, || format!("case {case}: extracted tree beats the optimum"))?;
        let opt_esp = brute_force_esp_with_limit(inst, 13).map_err(|e| e.to_string())?.latency;
        ensure(opt_esp * 2 <= tt * ku * (ku + 1) * (a + opt_st), || {
            format!("case {case}: OPT_ESP = {opt_esp} above k(k+1)/2·(a + OPT_ST)")
        })?;
        ensure(opt_esp <= after, || format!("case {case}: structured pattern beats brute force"))?;
        gadgets += 1;
    }
    Ok(format!("{gadgets} fuzz cases ({strict} strictly improved); gadget bounds hold"))
}

// ---------------------------------------------------------------------------
// Criterion 8: CLI round trips and determinism.

fn esp(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_esp")).args(args).output().expect("esp runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

/// CSV text without the trailing wall-time column.
fn strip_wall(csv: &str) -> String {
    csv.lines().map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head)).collect::<Vec<_>>().join("\n")
}

fn criterion_8() -> Outcome {
    let fixtures = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let fx = |name: &str| fixtures.join(name).to_string_lossy().into_owned();
    let dir = std::env::temp_dir().join(format!("esp-acceptance-{}", std::process::id()));
    fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let tmp = |name: &str| dir.join(name).to_string_lossy().into_owned();
    let mut log = String::new();

    let runs: Vec<(&str, Vec<&str>)> = vec![
        ("triangle.json", vec!["--algo", "unweighted"]),
        ("triangle.json", vec!["--algo", "brute"]),
        ("weighted.json", vec!["--algo", "weighted", "--oracle", "heuristic"]),
        ("weighted.json", vec!["--algo", "weighted"]),
        ("points5.json", vec!["--algo", "euclidean", "--epsilon", "1/2"]),
        ("points5.json", vec!["--algo", "euclidean", "--epsilon", "1/2", "--kappa", "2", "--shift-sweep", "2"]),
    ];
    for (i, (file, extra)) in runs.iter().enumerate() {
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let out = tmp(&format!("run{i}-{rep}.json"));
            let mut args = vec!["solve", "--input", &fx(file), "--output", &out, "--seed", "7", "--optimum"]
                .into_iter()
                .map(String::from)
                .collect::<Vec<_>>();
            args.extend(extra.iter().map(|s| s.to_string()));
            let argv: Vec<&str> = args.iter().map(String::as_str).collect();
            let (code, stdout, stderr) = esp(&argv);
            ensure(code == 0, || format!("{file} {extra:?}: exit {code}: {stderr}"))?;
            let (vcode, _, verr) = esp(&["validate", "--input", &fx(file), "--pattern", &out]);
            ensure(vcode == 0, || format!("{file} {extra:?}: pattern fails validation: {verr}"))?;
            outputs.push((fs::read(&out).map_err(|e| e.to_string())?, strip_wall(&stdout)));
        }
        ensure(outputs[0] == outputs[1], || format!("{file} {extra:?}: outputs differ between identical runs"))?;
        let _ = write!(log, "{file} {} ok; ", extra.join(" "));
    }

    // Gadget round trip through solve, structure and validate.
    let gadget = tmp("gadget.json");
    let (code, _, err) = esp(&["gadget", "--st12", &fx("hub.st12.json"), "--copies", "2", "--out", &gadget]);
    ensure(code == 0, || format!("gadget: {err}"))?;
    let raw = tmp("gadget-pattern.json");
    let (code, _, err) = esp(&["solve", "--input", &gadget, "--algo", "weighted", "--output", &raw]);
    ensure(code == 0, || format!("solve on gadget: {err}"))?;
    let structured = tmp("gadget-structured.json");
    let (code, summary, err) = esp(&["structure", "--instance", &gadget, "--pattern", &raw, "--output", &structured]);
    ensure(code == 0, || format!("structure: {err}"))?;
    let summary: serde_json::Value = serde_json::from_str(&summary).map_err(|e| e.to_string())?;
    ensure(summary["latency_after"].as_u64() <= summary["latency_before"].as_u64(), || "structure raised latency".into())?;
    let (code, _, err) = esp(&["validate", "--input", &gadget, "--pattern", &structured]);
    ensure(code == 0, || format!("structured pattern fails validation: {err}"))?;
    log.push_str("gadget/structure ok; ");

    // Sweeps with the same seed agree.
    let a = esp(&["sweep", "--max-n", "4", "--seed", "3"]);
    let b = esp(&["sweep", "--max-n", "4", "--seed", "3"]);
    ensure(a.0 == 0 && b.0 == 0, || "sweep failed".into())?;
    ensure(strip_wall(&a.1) == strip_wall(&b.1), || "sweep output differs for equal seeds".into())?;
    log.push_str("sweep deterministic; ");

    // Exit codes.
    let (code, _, _) = esp(&["solve", "--input", &gadget, "--algo", "brute"]);
    ensure(code == 2, || format!("oversized brute force exited {code}, expected 2"))?;
    let (code, _, _) = esp(&["solve", "--input", &fx("triangle.json"), "--algo", "nope"]);
    ensure(code == 1, || format!("bad algorithm exited {code}, expected 1"))?;
    log.push_str("exit codes 1/2 ok");
    let _ = fs::remove_dir_all(&dir);
    Ok(log)
}

// ---------------------------------------------------------------------------

fn main() {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("brute force matches permutation enumeration", criterion_1),
        ("unweighted runs respect c(P) and π bounds", criterion_2),
        ("unweighted sweep within e and 2e", criterion_3),
        ("weighted sweep within (1+ε)e and (5/2)(1+ε)e", criterion_4),
        ("decomposition inequalities and 1+5ε ratio", criterion_5),
        ("portal DP within 1+ε of segmented optimum, monotone", criterion_6),
        ("structuring and gadget bounds", criterion_7),
        ("CLI round trip and determinism", criterion_8),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let results: Vec<(usize, &str, Outcome, f64)> = thread::scope(|s| {
        let handles: Vec<_> = criteria
            .iter()
            .enumerate()
            .filter(|(i, _)| filter.is_empty() || filter.iter().any(|f| f == &(i + 1).to_string()))
            .map(|(i, &(name, run))| {
                s.spawn(move || {
                    let start = Instant::now();
                    let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
                        let msg = p
                            .downcast_ref::<String>()
                            .cloned()
                            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                            .unwrap_or_default();
                        Err(format!("panicked: {msg}"))
                    });
                    (i + 1, name, outcome, start.elapsed().as_secs_f64())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("criterion thread")).collect()
    });
    let mut failed = 0;
    for (i, name, outcome, secs) in &results {
        match outcome {
            Ok(detail) => println!("PASS criterion {i}: {name} [{secs:.1}s] {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {i}: {name} [{secs:.1}s] {why}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
