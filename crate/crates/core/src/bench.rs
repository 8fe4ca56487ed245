//! Ratio benchmarking: small-graph enumeration, seeded instance sweeps and
//! CSV run records.

use std::collections::HashSet;
use std::io::Write;
use std::time::Instant;

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{EspError, Result};
use crate::instance::Instance;
use crate::oracles::{brute_force_esp_with_limit, TreeOracle};
use crate::pattern::{total_latency, SearchPattern};
use crate::rational::ratio_f64;
use crate::unweighted::solve_unweighted;
use crate::weighted::solve_weighted;

/// Largest vertex count the sweep enumerates.
pub const SWEEP_MAX_N: usize = 7;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    Unweighted,
    Weighted,
    Brute,
}

impl Algorithm {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "unweighted" => Ok(Self::Unweighted),
            "weighted" => Ok(Self::Weighted),
            "brute" => Ok(Self::Brute),
            other => Err(EspError::Parameter(format!("unknown algorithm {other:?}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Unweighted => "unweighted",
            Self::Weighted => "weighted",
            Self::Brute => "brute",
        }
    }
}

/// Runs one graph algorithm and returns its pattern and total latency.
pub fn run_algorithm(
    inst: &Instance,
    algo: Algorithm,
    oracle: &dyn TreeOracle,
    epsilon: &BigRational,
    brute_limit: usize,
) -> Result<(SearchPattern, u64)> {
    match algo {
        Algorithm::Unweighted => {
            let sol = solve_unweighted(inst, oracle)?;
            Ok((sol.pattern, sol.report.total))
        }
        Algorithm::Weighted => {
            let sol = solve_weighted(inst, epsilon, oracle)?;
            Ok((sol.pattern, sol.report.total))
        }
        Algorithm::Brute => {
            let sol = brute_force_esp_with_limit(inst, brute_limit)?;
            let total = total_latency(inst, &sol.pattern)?.total;
            Ok((sol.pattern, total))
        }
    }
}

/// One row of benchmark output.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunRecord {
    pub instance: String,
    pub algorithm: String,
    pub oracle: String,
    pub epsilon: String,
    pub seed: u64,
    pub latency: u64,
    pub optimum: Option<u64>,
    pub ratio: Option<String>,
    pub wall_ms: u64,
}

impl RunRecord {
    pub fn new(
        instance: &str,
        algorithm: &str,
        oracle: &str,
        epsilon: &BigRational,
        seed: u64,
        latency: u64,
        optimum: Option<u64>,
        wall_ms: u64,
    ) -> Self {
        Self {
            instance: instance.to_string(),
            algorithm: algorithm.to_string(),
            oracle: oracle.to_string(),
            epsilon: epsilon.to_string(),
            seed,
            latency,
            optimum,
            ratio: optimum.map(|opt| format!("{:.6}", ratio_f64(latency, opt))),
            wall_ms,
        }
    }
}

pub const CSV_HEADER: [&str; 9] = [
    "instance", "algorithm", "oracle", "epsilon", "seed", "latency", "optimum", "ratio", "wall_ms",
];

/// Writes records with the fixed header.
pub fn write_csv<W: Write>(out: W, records: &[RunRecord]) -> Result<()> {
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    let io = |e: csv::Error| EspError::Solver(format!("csv: {e}"));
    writer.write_record(CSV_HEADER).map_err(io)?;
    for r in records {
        writer.serialize(r).map_err(io)?;
    }
    writer.flush().map_err(|e| EspError::Solver(format!("csv: {e}")))?;
    Ok(())
}

/// Edge lists of all connected graphs on `n` vertices up to isomorphism.
///
/// Every connected graph has a vertex whose removal keeps it connected, so
/// each one arises from a smaller connected graph plus a vertex attached to a
/// non-empty subset.
pub fn connected_graphs(n: usize) -> Vec<Vec<(usize, usize)>> {
    assert!(n <= SWEEP_MAX_N, "graph enumeration is limited to {SWEEP_MAX_N} vertices");
    if n == 0 {
        return Vec::new();
    }
    let mut level: Vec<Vec<u8>> = vec![vec![0]];
    for size in 2..=n {
        let mut seen = HashSet::new();
        let mut next = Vec::new();
        for adj in &level {
            for subset in 1u8..(1 << (size - 1)) {
                let mut grown = adj.clone();
                grown.push(subset);
                for (v, row) in grown.iter_mut().enumerate().take(size - 1) {
                    if subset >> v & 1 == 1 {
                        *row |= 1 << (size - 1);
                    }
                }
                if seen.insert(canonical_code(&grown)) {
                    next.push(grown);
                }
            }
        }
        level = next;
    }
    let mut graphs: Vec<Vec<(usize, usize)>> = level
        .iter()
        .map(|adj| {
            let mut edges = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    if adj[u] >> v & 1 == 1 {
                        edges.push((u, v));
                    }
                }
            }
            edges
        })
        .collect();
    graphs.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
    graphs
}

/// Smallest upper-triangle bit code over relabelings that sort vertices by degree.
fn canonical_code(adj: &[u8]) -> u32 {
    let n = adj.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| adj[v].count_ones());
    let degree = |v: usize| adj[v].count_ones();
    let mut blocks: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    for i in 1..=n {
        if i == n || degree(order[i]) != degree(order[start]) {
            blocks.push((start, i));
            start = i;
        }
    }
    let mut best = u32::MAX;
    permute_blocks(&mut order, &blocks, 0, adj, &mut best);
    best
}

fn permute_blocks(order: &mut [usize], blocks: &[(usize, usize)], b: usize, adj: &[u8], best: &mut u32) {
    if b == blocks.len() {
        let n = order.len();
        let mut code = 0u32;
        let mut bit = 0;
        for i in 0..n {
            for j in i + 1..n {
                if adj[order[i]] >> order[j] & 1 == 1 {
                    code |= 1 << bit;
                }
                bit += 1;
            }
        }
        *best = (*best).min(code);
        return;
    }
    let (lo, hi) = blocks[b];
    heap_permutations(order, lo, hi - lo, &mut |o| permute_blocks(o, blocks, b + 1, adj, best));
}

fn heap_permutations(
    order: &mut [usize],
    lo: usize,
    k: usize,
    visit: &mut dyn FnMut(&mut [usize]),
) {
    if k <= 1 {
        visit(order);
        return;
    }
    for i in 0..k - 1 {
        heap_permutations(order, lo, k - 1, visit);
        if k.is_multiple_of(2) {
            order.swap(lo + i, lo + k - 1);
        } else {
            order.swap(lo, lo + k - 1);
        }
    }
    heap_permutations(order, lo, k - 1, visit);
}

/// Parameters of a seeded sweep over small connected graphs.
#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub min_n: usize,
    pub max_n: usize,
    pub lengths: Vec<u64>,
    /// Weight grid; `None` means unit weights.
    pub weights: Option<Vec<u64>>,
    pub samples: usize,
    pub seed: u64,
}

impl SweepConfig {
    pub fn unweighted(max_n: usize) -> Self {
        Self {
            min_n: 1,
            max_n,
            lengths: vec![1, 2, 3],
            weights: None,
            samples: 3,
            seed: 0,
        }
    }

    pub fn weighted(max_n: usize, max_weight: u64) -> Self {
        Self {
            weights: Some((0..=max_weight).collect()),
            ..Self::unweighted(max_n)
        }
    }
}

/// All sweep instances in a fixed order: every graph, every root, `samples`
/// random length/weight draws from one seeded stream.
pub fn sweep_instances(config: &SweepConfig) -> Result<Vec<(String, Instance)>> {
    if config.max_n > SWEEP_MAX_N {
        return Err(EspError::TooLarge {
            what: "sweep vertex count",
            actual: config.max_n,
            limit: SWEEP_MAX_N,
        });
    }
    if config.lengths.is_empty() || config.weights.as_ref().is_some_and(|w| w.is_empty()) {
        return Err(EspError::Parameter("empty sampling grid".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut out = Vec::new();
    for n in config.min_n.max(1)..=config.max_n {
        for (g, edges) in connected_graphs(n).iter().enumerate() {
            for root in 0..n {
                for s in 0..config.samples {
                    let lens: Vec<(usize, usize, u64)> = edges
                        .iter()
                        .map(|&(u, v)| (u, v, config.lengths[rng.gen_range(0..config.lengths.len())]))
                        .collect();
                    let weights = match &config.weights {
                        None => vec![1; n],
                        Some(grid) => (0..n).map(|_| grid[rng.gen_range(0..grid.len())]).collect(),
                    };
                    let inst = Instance::indexed_rooted(weights, &lens, root)?;
                    out.push((format!("n{n}-g{g}-r{root}-s{s}"), inst));
                }
            }
        }
    }
    Ok(out)
}

/// Records plus the worst ratio, kept as an exact fraction.
#[derive(Clone, Debug)]
pub struct SweepReport {
    pub records: Vec<RunRecord>,
    pub worst: Option<(String, u64, u64)>,
}

impl SweepReport {
    pub fn worst_ratio(&self) -> f64 {
        self.worst.as_ref().map_or(1.0, |(_, a, o)| ratio_f64(*a, *o))
    }

    /// `alg ≤ factor · opt` on every instance.
    pub fn all_within(&self, factor: &BigRational) -> bool {
        self.records.iter().all(|r| {
            r.optimum
                .is_none_or(|opt| crate::rational::within_factor(r.latency, opt, factor))
        })
    }
}

/// Runs `algo` and brute force on every sweep instance.
pub fn sweep_small_graphs(
    config: &SweepConfig,
    algo: Algorithm,
    oracle: &dyn TreeOracle,
    epsilon: &BigRational,
) -> Result<SweepReport> {
    let mut records = Vec::new();
    let mut worst: Option<(String, u64, u64)> = None;
    for (id, inst) in sweep_instances(config)? {
        let start = Instant::now();
        let (_, latency) = run_algorithm(&inst, algo, oracle, epsilon, SWEEP_MAX_N)?;
        let wall_ms = start.elapsed().as_millis() as u64;
        let opt = brute_force_esp_with_limit(&inst, SWEEP_MAX_N)?.latency;
        // a/o > b/p  ⇔  a·p > b·o, with 0/0 counted as 1.
        let worse = match &worst {
            None => true,
            Some((_, a, o)) => {
                let (a, o) = if *o == 0 { (1, 1) } else { (*a, *o) };
                let (b, p) = if opt == 0 { (1, 1) } else { (latency, opt) };
                (b as u128) * (o as u128) > (a as u128) * (p as u128)
            }
        };
        if worse {
            worst = Some((id.clone(), latency, opt));
        }
        records.push(RunRecord::new(
            &id,
            algo.name(),
            oracle.name(),
            epsilon,
            config.seed,
            latency,
            Some(opt),
            wall_ms,
        ));
    }
    Ok(SweepReport { records, worst })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_counts_match_known_sequence() {
        let counts: Vec<usize> = (1..=6).map(|n| connected_graphs(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 6, 21, 112]);
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in [Algorithm::Unweighted, Algorithm::Weighted, Algorithm::Brute] {
            assert_eq!(Algorithm::parse(a.name()).unwrap(), a);
        }
        assert!(Algorithm::parse("nope").is_err());
    }

    #[test]
    fn csv_has_fixed_header() {
        let r = RunRecord::new("x", "brute", "exact", &BigRational::from_integer(1.into()), 0, 3, Some(3), 0);
        let mut buf = Vec::new();
        write_csv(&mut buf, &[r]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "instance,algorithm,oracle,epsilon,seed,latency,optimum,ratio,wall_ms\nx,brute,exact,1,0,3,3,1.000000,0\n"
        );
    }
}
