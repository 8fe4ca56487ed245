//! Decomposition of a Euclidean instance into delay-bounded subinstances.
//!
//! A base solution σ_β orders the points by latency. Cutting that order at
//! `t_i = e^{(i−2)a+b}` gives classes `V_i`; each class is solved on its own
//! (all other points kept as weight-0 Steiner candidates), truncated at a
//! length cap, patched with the prefix of σ_β covering `V_1 ∪ … ∪ V_i`, and
//! the pieces are concatenated.

use num_rational::BigRational;
use serde::Serialize;

use super::portal_dp::{portal_metric, PortalConfig};
use super::reduce::reduce_weights_01;
use super::segmented::{bounded_to_segmented, segmented_optimum_fixed};
use super::{pattern_from_steps, EuclideanInstance};
use crate::error::{EspError, Result};
use crate::instance::Instance;
use crate::oracles::{brute_force_esp_with_limit, ExactOracle, HeuristicOracle, TreeOracle, EXACT_DEFAULT_LIMIT};
use crate::pattern::{concat_patterns, total_latency, SearchPattern};
use crate::weighted::solve_weighted;

#[derive(Clone, Debug)]
pub struct DecomposeConfig {
    /// 0 < ε ≤ 1.
    pub epsilon: f64,
    /// Proven factor of the base solver, used for `a = βγ/ε`.
    pub beta: f64,
    /// Graph lengths are `round(dist · scale)`.
    pub scale: f64,
    /// ε handed to the weighted base solver.
    pub base_epsilon: BigRational,
}

impl DecomposeConfig {
    pub fn new(epsilon: f64) -> Self {
        let base_epsilon = BigRational::new(1.into(), 4.into());
        Self {
            epsilon,
            // (1 + 1/4)·e for the weighted solver with an exact oracle.
            beta: 1.25 * std::f64::consts::E,
            scale: 1000.0,
            base_epsilon,
        }
    }

    pub fn gamma(&self) -> f64 {
        3.0 / self.epsilon
    }

    pub fn a(&self) -> f64 {
        self.beta * self.gamma() / self.epsilon
    }

    /// δ for which every subinstance is delay-bounded: `e^a / γ`.
    pub fn delta(&self) -> f64 {
        self.a().exp() / self.gamma()
    }

    fn check(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(EspError::Parameter(format!("ε = {} outside (0, 1]", self.epsilon)));
        }
        if self.beta < 1.0 || self.scale <= 0.0 {
            return Err(EspError::Parameter("β must be ≥ 1 and scale positive".into()));
        }
        Ok(())
    }
}

/// Solver for a subinstance with delay `delay` that is `delta`-bounded.
pub trait BoundedSolver {
    fn name(&self) -> &str;

    /// Returns a pattern on `graph` covering every positive-weight point.
    fn solve(&self, sub: &EuclideanInstance, graph: &Instance, delay: f64, delta: f64) -> Result<SearchPattern>;
}

/// Exact subinstance solutions by subset DP.
#[derive(Clone, Debug)]
pub struct BruteBounded {
    pub limit: usize,
}

impl Default for BruteBounded {
    fn default() -> Self {
        Self { limit: 10 }
    }
}

impl BoundedSolver for BruteBounded {
    fn name(&self) -> &str {
        "brute"
    }

    fn solve(&self, _sub: &EuclideanInstance, graph: &Instance, _delay: f64, _delta: f64) -> Result<SearchPattern> {
        Ok(brute_force_esp_with_limit(graph, self.limit)?.pattern)
    }
}

/// Weight rounding, geometric breakpoints and a segmented DP, either on the
/// exact metric or on a portal-respecting metric.
#[derive(Clone, Debug)]
pub struct SegmentedBounded {
    pub epsilon: f64,
    /// Breakpoints run up to `horizon · (1 + δ) · delay`.
    pub horizon: f64,
    /// Largest split instance the weight rounding may produce.
    pub budget: usize,
    pub portal: Option<PortalConfig>,
}

impl SegmentedBounded {
    pub fn new(epsilon: f64) -> Self {
        Self {
            epsilon,
            horizon: 8.0,
            budget: 64,
            portal: None,
        }
    }
}

impl BoundedSolver for SegmentedBounded {
    fn name(&self) -> &str {
        if self.portal.is_some() {
            "segmented-portal"
        } else {
            "segmented"
        }
    }

    fn solve(&self, sub: &EuclideanInstance, graph: &Instance, delay: f64, delta: f64) -> Result<SearchPattern> {
        // Unit copies share their point, so the DP can run on the rounded
        // weights directly; fall back to the given weights when rounding
        // would blow past the budget.
        let weights = match reduce_weights_01(sub, delta, self.epsilon, self.budget) {
            Ok(r) => r.rounded,
            Err(EspError::TooLarge { .. }) => sub.weights(),
            Err(e) => return Err(e),
        };
        let dist: Vec<Vec<f64>> = match &self.portal {
            None => (0..graph.n())
                .map(|u| {
                    (0..graph.n())
                        .map(|v| graph.edge_between(u, v).map_or(0.0, |e| graph.edge(e).length as f64))
                        .collect()
                })
                .collect(),
            Some(cfg) => {
                let scale = graph_scale(sub, graph);
                portal_metric(sub, cfg, self.epsilon)?
                    .iter()
                    .map(|row| row.iter().map(|d| d * scale).collect())
                    .collect()
            }
        };
        let sol = bounded_to_segmented(delay, delta, self.epsilon, self.horizon, |bps| {
            segmented_optimum_fixed(&dist, &weights, sub.root, bps)
        })?;
        pattern_from_steps(graph, &sol.steps)
    }
}

/// Ratio between graph lengths and Euclidean distances.
fn graph_scale(sub: &EuclideanInstance, graph: &Instance) -> f64 {
    let d = sub.distances();
    graph
        .edges()
        .iter()
        .filter(|e| d[e.u][e.v] > 0.0)
        .map(|e| e.length as f64 / d[e.u][e.v])
        .next()
        .unwrap_or(1.0)
}

/// σ_β: the weighted solver with an exact oracle when it fits.
pub fn base_solution(graph: &Instance, cfg: &DecomposeConfig) -> Result<SearchPattern> {
    let oracle: Box<dyn TreeOracle> = if graph.n() <= EXACT_DEFAULT_LIMIT {
        Box::new(ExactOracle::default())
    } else {
        Box::new(HeuristicOracle)
    };
    Ok(solve_weighted(graph, &cfg.base_epsilon, oracle.as_ref())?.pattern)
}

#[derive(Clone, Debug, Serialize)]
pub struct PhaseReport {
    pub class: usize,
    pub t: f64,
    pub delay: f64,
    pub prefix_cap: f64,
    pub length: f64,
    pub length_bound: f64,
    pub worst_splice: f64,
}

#[derive(Clone, Debug)]
pub struct DecomposeOutcome {
    pub pattern: SearchPattern,
    pub latency: u64,
    pub shift: f64,
    /// Class index of every point explored by σ_β (`None` otherwise).
    pub classes: Vec<Option<usize>>,
    pub phases: Vec<PhaseReport>,
}

/// `t_i = e^{(i−2)a+b}`.
pub fn time_point(i: usize, a: f64, b: f64) -> f64 {
    ((i as f64 - 2.0) * a + b).exp()
}

/// Class of a latency: the `i ≥ 1` with `t_i ≤ c < t_{i+1}`; zero latencies
/// go to class 1.
pub fn class_of(c: f64, a: f64, b: f64) -> usize {
    if c <= 0.0 {
        return 1;
    }
    let mut i = (((c.ln() - b) / a).floor() + 2.0).max(1.0) as usize;
    while i > 1 && time_point(i, a, b) > c {
        i -= 1;
    }
    while time_point(i + 1, a, b) <= c {
        i += 1;
    }
    i
}

pub fn partition(latencies: &[Option<u64>], a: f64, b: f64) -> Vec<Option<usize>> {
    latencies.iter().map(|l| l.map(|c| class_of(c as f64, a, b))).collect()
}

/// One run of the decomposition for a fixed shift `b ∈ [0, a]`.
pub fn decompose_solve(
    inst: &EuclideanInstance,
    cfg: &DecomposeConfig,
    b: f64,
    base: &SearchPattern,
    solver: &dyn BoundedSolver,
) -> Result<DecomposeOutcome> {
    cfg.check()?;
    let graph = inst.to_graph(cfg.scale)?;
    let base_report = total_latency(&graph, base)?;
    let (gamma, a, eps) = (cfg.gamma(), cfg.a(), cfg.epsilon);
    let delta = cfg.delta();
    let classes = partition(&base_report.latencies, a, b);
    let q = classes.iter().flatten().copied().max().unwrap_or(1);

    let mut pieces = Vec::new();
    let mut phases = Vec::new();
    for i in 1..=q {
        let members: Vec<usize> = (0..inst.n())
            .filter(|&v| classes[v] == Some(i) && inst.points[v].weight > 0)
            .collect();
        if members.is_empty() {
            continue;
        }
        let weights: Vec<u64> = (0..inst.n())
            .map(|v| if classes[v] == Some(i) { inst.points[v].weight } else { 0 })
            .collect();
        let sub = inst.with_weights(&weights);
        let sub_graph = graph.with_weights(weights)?;
        let t_i = time_point(i, a, b);
        let t_next = time_point(i + 1, a, b);
        let delay = gamma * t_i;
        let sub_pattern = solver.solve(&sub, &sub_graph, delay, delta)?;
        let sub_report = total_latency(&sub_graph, &sub_pattern)?;

        // Longest prefix of the subinstance solution within the cap.
        let cap = (1.0 + a.exp() / (eps * gamma)) * gamma * t_i;
        let mut clock = 0u64;
        let mut keep = 0;
        for &e in sub_pattern.edges() {
            if (clock + graph.edge(e).length) as f64 > cap {
                break;
            }
            clock += graph.edge(e).length;
            keep += 1;
        }
        let truncated = sub_pattern.prefix(keep);

        // Prefix of σ_β up to the last point of class ≤ i.
        let base_keep = base_report.order[1..]
            .iter()
            .take_while(|&&v| classes[v].is_some_and(|c| c <= i))
            .count();
        let patched = concat_patterns(&truncated, &base.prefix(base_keep), &graph);
        let report = total_latency(&sub_graph, &patched)?;

        let length = report.length as f64;
        let length_bound = gamma * t_next - gamma * t_i;
        if length > length_bound {
            return Err(EspError::Bound(format!(
                "phase {i} has length {length} > {length_bound}"
            )));
        }
        let mut worst_splice: f64 = 1.0;
        for &v in &members {
            let after = report.latencies[v].expect("patched phase covers its class") as f64;
            let before = sub_report.latencies[v].expect("subinstance solution covers its class") as f64;
            let ratio = (delay + after) / (delay + before);
            if ratio > 1.0 + eps {
                return Err(EspError::Bound(format!(
                    "phase {i}: splice degrades point {v} by {ratio} > 1 + ε"
                )));
            }
            worst_splice = worst_splice.max(ratio);
        }
        phases.push(PhaseReport {
            class: i,
            t: t_i,
            delay,
            prefix_cap: cap,
            length,
            length_bound,
            worst_splice,
        });
        pieces.push(patched);
    }

    let pattern = pieces
        .iter()
        .fold(SearchPattern::empty(), |acc, p| concat_patterns(&acc, p, &graph));
    let latency = total_latency(&graph, &pattern)?.total;
    Ok(DecomposeOutcome {
        pattern,
        latency,
        shift: b,
        classes,
        phases,
    })
}

/// Shifts covering every distinct partition: the class of a latency `c`
/// changes only when `b` passes `ln c mod a`, so one shift per gap between
/// consecutive critical values suffices.
pub fn shift_candidates(latencies: &[Option<u64>], a: f64) -> Vec<f64> {
    let mut crit: Vec<f64> = latencies
        .iter()
        .flatten()
        .filter(|&&c| c > 0)
        .map(|&c| (c as f64).ln().rem_euclid(a))
        .collect();
    crit.sort_by(f64::total_cmp);
    crit.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
    if crit.is_empty() {
        return vec![a / 2.0];
    }
    let mut out: Vec<f64> = crit.windows(2).map(|w| (w[0] + w[1]) / 2.0).collect();
    let first = crit[0];
    let last = *crit.last().unwrap();
    out.push(((last + first + a) / 2.0).rem_euclid(a));
    out.sort_by(f64::total_cmp);
    out
}

#[derive(Clone, Debug)]
pub struct ShiftSweep {
    pub best: DecomposeOutcome,
    /// `(b, latency)` for every evaluated shift.
    pub tried: Vec<(f64, u64)>,
}

/// Runs the decomposition for every candidate shift (or the first `limit`)
/// and keeps the cheapest result.
pub fn derandomize_shift(
    inst: &EuclideanInstance,
    cfg: &DecomposeConfig,
    solver: &dyn BoundedSolver,
    limit: Option<usize>,
) -> Result<ShiftSweep> {
    cfg.check()?;
    let graph = inst.to_graph(cfg.scale)?;
    let base = base_solution(&graph, cfg)?;
    let latencies = total_latency(&graph, &base)?.latencies;
    let mut shifts = shift_candidates(&latencies, cfg.a());
    if let Some(k) = limit {
        shifts.truncate(k.max(1));
    }
    let mut best: Option<DecomposeOutcome> = None;
    let mut tried = Vec::new();
    for b in shifts {
        let out = decompose_solve(inst, cfg, b, &base, solver)?;
        tried.push((b, out.latency));
        if best.as_ref().is_none_or(|cur| out.latency < cur.latency) {
            best = Some(out);
        }
    }
    Ok(ShiftSweep {
        best: best.expect("at least one shift"),
        tried,
    })
}
