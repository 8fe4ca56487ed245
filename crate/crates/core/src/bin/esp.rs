//! Command line front end: solving, sweeps, gadgets and pattern checks.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;
use serde_json::json;

use expanding_search::bench::{run_algorithm, sweep_small_graphs, write_csv, Algorithm, RunRecord, SweepConfig};
use expanding_search::euclidean::decompose::{derandomize_shift, DecomposeConfig, SegmentedBounded};
use expanding_search::euclidean::portal_dp::{portal_dp_over_shifts, Breakpoints, PortalConfig};
use expanding_search::euclidean::quadtree::{grid_round, max_shift, shift_grid};
use expanding_search::euclidean::{pattern_from_steps, EuclideanInstance};
use expanding_search::hardness::{build_gadget, extract_best_steiner, is_structured, structure_pattern, Gadget, St12Instance};
use expanding_search::oracles::{brute_force_esp_with_limit, oracle_by_name, BRUTE_FORCE_DEFAULT_LIMIT};
use expanding_search::rational::{parse_positive, to_f64};
use expanding_search::{total_latency, validate_pattern, EspError, Instance, SearchPattern};

/// Integer lengths per input unit when solving Euclidean instances.
const EUCLIDEAN_SCALE: f64 = 1000.0;
/// Per-axis cap for `--shift-sweep all`.
const DENSE_SWEEP_CAP: usize = 64;

#[derive(Parser)]
#[command(name = "esp", version, about = "Expanding search solvers and benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance and print a CSV run record.
    Solve(SolveArgs),
    /// Run an algorithm on every small connected graph and report ratios.
    Sweep(SweepArgs),
    /// Build the k-copy gadget from a Steiner tree instance with costs 1 and 2.
    Gadget(GadgetArgs),
    /// Make a gadget pattern structured and extract Steiner trees from it.
    Structure(StructureArgs),
    /// Check a pattern against an instance and print its latencies.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    input: PathBuf,
    /// Pattern file to write.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value = "unweighted", value_parser = ["unweighted", "weighted", "brute", "euclidean"])]
    algo: String,
    #[arg(long, default_value = "exact")]
    oracle: String,
    #[arg(long, default_value = "1/4")]
    epsilon: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Euclidean only: run the portal DP with this many free breakpoints.
    #[arg(long)]
    kappa: Option<usize>,
    /// Euclidean only: quadtree shifts per axis, or `all`.
    #[arg(long, default_value = "3")]
    shift_sweep: String,
    /// Also run brute force for the ratio column.
    #[arg(long)]
    optimum: bool,
    /// Dump phase reports or DP keys as JSON.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value_t = 5)]
    max_n: usize,
    #[arg(long, default_value_t = 2)]
    min_n: usize,
    #[arg(long, default_value = "unweighted", value_parser = ["unweighted", "weighted"])]
    algo: String,
    #[arg(long, default_value = "exact")]
    oracle: String,
    #[arg(long, default_value = "1/4")]
    epsilon: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest vertex weight for weighted sweeps.
    #[arg(long, default_value_t = 3)]
    max_weight: u64,
    #[arg(long, default_value_t = 3)]
    samples: usize,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct GadgetArgs {
    #[arg(long)]
    st12: PathBuf,
    #[arg(long, default_value_t = 2)]
    copies: usize,
    #[arg(long, alias = "out")]
    output: PathBuf,
}

#[derive(Args)]
struct StructureArgs {
    /// Gadget instance written by `gadget`.
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    pattern: PathBuf,
    /// Structured pattern file to write.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    pattern: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Sweep(a) => sweep(a),
        Command::Gadget(a) => gadget(a),
        Command::Structure(a) => structure(a),
        Command::Validate(a) => validate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.chain().find_map(|c| c.downcast_ref::<EspError>()) {
        Some(EspError::TooLarge { .. }) => 2,
        Some(EspError::Solver(_) | EspError::Bound(_) | EspError::Target(_)) => 3,
        _ => 1,
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Writes a pattern and checks that it reads back to a valid pattern.
fn write_pattern(path: &Path, inst: &Instance, pat: &SearchPattern) -> anyhow::Result<()> {
    write(path, &pat.to_json_string(inst))?;
    let back = SearchPattern::from_json_str(inst, &read(path)?)?;
    if back != *pat {
        return Err(anyhow!("pattern changed on read-back"));
    }
    validate_pattern(inst, &back).map_err(EspError::from)?;
    Ok(())
}

/// Prints a line, treating a closed pipe as success.
fn emit(text: &str) -> anyhow::Result<()> {
    match writeln!(io::stdout().lock(), "{text}") {
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn epsilon(text: &str) -> anyhow::Result<BigRational> {
    Ok(parse_positive(text)?)
}

fn instance_id(path: &Path) -> String {
    path.file_stem().map_or_else(|| "instance".into(), |s| s.to_string_lossy().into_owned())
}

fn solve(a: SolveArgs) -> anyhow::Result<()> {
    let eps = epsilon(&a.epsilon)?;
    let text = read(&a.input)?;
    let start = Instant::now();
    let (graph, pattern, oracle_name) = if a.algo == "euclidean" {
        let inst = EuclideanInstance::from_json_str(&text)?;
        let (graph, pattern) = solve_euclidean(&inst, &eps, &a)?;
        (graph, pattern, "none".to_string())
    } else {
        let inst = Instance::from_json_str(&text)?;
        let oracle = oracle_by_name(&a.oracle)?;
        let algo = Algorithm::parse(&a.algo)?;
        let (pattern, _) = run_algorithm(&inst, algo, oracle.as_ref(), &eps, BRUTE_FORCE_DEFAULT_LIMIT)?;
        let name = if algo == Algorithm::Brute { "none" } else { oracle.name() };
        (inst, pattern, name.to_string())
    };
    let wall_ms = start.elapsed().as_millis() as u64;
    let latency = total_latency(&graph, &pattern)?.total;
    let optimum = if a.optimum {
        Some(total_latency(&graph, &brute_force_esp_with_limit(&graph, BRUTE_FORCE_DEFAULT_LIMIT)?.pattern)?.total)
    } else {
        None
    };
    if let Some(path) = &a.output {
        write_pattern(path, &graph, &pattern)?;
    }
    let record = RunRecord::new(&instance_id(&a.input), &a.algo, &oracle_name, &eps, a.seed, latency, optimum, wall_ms);
    write_csv(io::stdout().lock(), &[record])?;
    Ok(())
}

fn solve_euclidean(inst: &EuclideanInstance, eps: &BigRational, a: &SolveArgs) -> anyhow::Result<(Instance, SearchPattern)> {
    let eps_f = to_f64(eps);
    let graph = inst.to_graph(EUCLIDEAN_SCALE)?;
    if let Some(kappa) = a.kappa {
        let cfg = PortalConfig::default();
        let rounded = grid_round(inst, eps_f, cfg.quadtree.c_g)?;
        let shifts = match a.shift_sweep.as_str() {
            "all" => {
                let k = (2 * max_shift(&rounded) as usize + 1).min(DENSE_SWEEP_CAP);
                shift_grid(&rounded, k)
            }
            n => shift_grid(&rounded, n.parse().map_err(|_| anyhow!("--shift-sweep takes a count or `all`"))?),
        };
        let (best, tried) = portal_dp_over_shifts(&rounded, &shifts, &cfg, eps_f, &Breakpoints::Free(kappa))?;
        if let Some(path) = &a.trace {
            let trace = json!({
                "shift": best.shift,
                "portals": best.portals,
                "cap": best.cap,
                "objective": best.solution.objective,
                "breakpoints": best.solution.breakpoints,
                "tried": tried,
                "keys": best.keys.iter().filter(|k| k.segments.iter().any(|s| s.length > 0)).collect::<Vec<_>>(),
            });
            write(path, &serde_json::to_string_pretty(&trace)?)?;
        }
        let pattern = pattern_from_steps(&graph, &best.solution.steps)?;
        return Ok((graph, pattern));
    }
    let cfg = DecomposeConfig::new(eps_f);
    let solver = SegmentedBounded::new(eps_f);
    let sweep = derandomize_shift(inst, &cfg, &solver, None)?;
    if let Some(path) = &a.trace {
        let trace = json!({
            "shift": sweep.best.shift,
            "classes": sweep.best.classes,
            "phases": sweep.best.phases,
            "tried": sweep.tried,
        });
        write(path, &serde_json::to_string_pretty(&trace)?)?;
    }
    Ok((graph, sweep.best.pattern))
}

fn sweep(a: SweepArgs) -> anyhow::Result<()> {
    let eps = epsilon(&a.epsilon)?;
    let algo = Algorithm::parse(&a.algo)?;
    let oracle = oracle_by_name(&a.oracle)?;
    let mut config = match algo {
        Algorithm::Weighted => SweepConfig::weighted(a.max_n, a.max_weight),
        _ => SweepConfig::unweighted(a.max_n),
    };
    config.min_n = a.min_n;
    config.samples = a.samples;
    config.seed = a.seed;
    let report = sweep_small_graphs(&config, algo, oracle.as_ref(), &eps)?;
    match &a.output {
        Some(path) => {
            let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
            write_csv(file, &report.records)?;
        }
        None => write_csv(io::stdout().lock(), &report.records)?,
    }
    if let Some((id, alg, opt)) = &report.worst {
        eprintln!(
            "worst ratio {:.6} on {id} ({alg} vs {opt}) over {} runs",
            *alg as f64 / *opt as f64,
            report.records.len()
        );
    }
    Ok(())
}

fn gadget(a: GadgetArgs) -> anyhow::Result<()> {
    let st = St12Instance::from_json_str(&read(&a.st12)?)?;
    let g = build_gadget(&st, a.copies)?;
    write(&a.output, &g.instance.to_json_string())?;
    emit(&format!("copies {} vertices {} root edge cost {}", g.k, g.instance.n(), g.a))
}

fn structure(a: StructureArgs) -> anyhow::Result<()> {
    let inst = Instance::from_json_str(&read(&a.instance)?)?;
    let g = Gadget::from_instance(&inst)?;
    let pat = SearchPattern::from_json_str(&inst, &read(&a.pattern)?)?;
    let before = total_latency(&inst, &pat)?.total;
    let out = structure_pattern(&g, &pat)?;
    let after = total_latency(&inst, &out)?.total;
    let x = extract_best_steiner(&g, &out)?;
    if let Some(path) = &a.output {
        write_pattern(path, &inst, &out)?;
    }
    let summary = json!({
        "latency_before": before,
        "latency_after": after,
        "was_structured": is_structured(&g, &pat),
        "copy_order": x.order,
        "tree_costs": x.costs,
        "best_tree": x.best_tree(),
        "best_cost": x.best_cost(),
    });
    emit(&serde_json::to_string_pretty(&summary)?)
}

fn validate(a: ValidateArgs) -> anyhow::Result<()> {
    let text = read(&a.input)?;
    let inst = match Instance::from_json_str(&text) {
        Ok(inst) => inst,
        Err(_) => EuclideanInstance::from_json_str(&text)?.to_graph(EUCLIDEAN_SCALE)?,
    };
    let pat = SearchPattern::from_json_str(&inst, &read(&a.pattern)?)?;
    let report = total_latency(&inst, &pat)?;
    let latencies: serde_json::Map<String, serde_json::Value> = report
        .latencies
        .iter()
        .enumerate()
        .map(|(v, l)| (inst.id(v).to_string(), json!(l)))
        .collect();
    let summary = json!({
        "valid": true,
        "edges": pat.len(),
        "length": report.length,
        "total_latency": report.total,
        "latencies": latencies,
    });
    emit(&serde_json::to_string_pretty(&summary)?)
}
