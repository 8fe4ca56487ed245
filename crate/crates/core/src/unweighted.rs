//! Unit-weight expanding search by concatenating k-MSTs along a shortest
//! path in the delay DAG.

use serde::Serialize;

use crate::error::{EspError, Result};
use crate::instance::Instance;
use crate::oracles::{Target, TreeOracle, TreeSolution};
use crate::pattern::{total_latency, LatencyReport, SearchPattern};
use crate::phases::{int, phases_to_pattern, shortest_path_dag, AuxPathGraph, PhasePlan};

/// T_1..T_n; `T_k` reaches k vertices. T_1 is always the bare root.
pub fn build_tree_family(inst: &Instance, oracle: &dyn TreeOracle) -> Result<Vec<TreeSolution>> {
    let targets: Vec<Target> = (2..=inst.n()).map(Target::Vertices).collect();
    let mut trees = vec![TreeSolution::root_only(inst)];
    trees.extend(oracle.solve_many(inst, &targets)?);
    for (k, t) in trees.iter().enumerate() {
        if !t.is_feasible(Target::Vertices(k + 1)) {
            return Err(EspError::Solver(format!(
                "oracle {} returned {} vertices for k = {}",
                oracle.name(),
                t.vertices().len(),
                k + 1
            )));
        }
    }
    Ok(trees)
}

/// H with nodes labelled 1..n and `c_{i,j} = (n − i)·ℓ(T_j)`.
pub fn build_aux_unweighted(trees: Vec<TreeSolution>) -> AuxPathGraph {
    let n = trees.len();
    let lengths: Vec<u64> = trees.iter().map(|t| t.length()).collect();
    AuxPathGraph::new((1..=n).collect(), trees, move |i, j| {
        // Node i holds label i + 1.
        int((n - (i + 1)) as u64) * int(lengths[j])
    })
}

#[derive(Clone, Debug)]
pub struct UnweightedSolution {
    pub pattern: SearchPattern,
    pub report: LatencyReport,
    pub plan: PhasePlan,
    pub tree_lengths: Vec<u64>,
}

impl UnweightedSolution {
    pub fn summary(&self) -> PlanSummary {
        PlanSummary {
            path: self.plan.labels.clone(),
            path_cost: self.plan.cost.to_string(),
            prefix_lengths: self.plan.prefix_lengths.clone(),
            tree_lengths: self.tree_lengths.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PlanSummary {
    pub path: Vec<usize>,
    pub path_cost: String,
    pub prefix_lengths: Vec<u64>,
    pub tree_lengths: Vec<u64>,
}

/// Runs the full pipeline and checks the per-vertex π bound and
/// `L(σ) ≤ c(P)` before returning.
pub fn solve_unweighted(inst: &Instance, oracle: &dyn TreeOracle) -> Result<UnweightedSolution> {
    if !inst.is_unit_weight() {
        return Err(EspError::Parameter(
            "unweighted algorithm needs every non-root vertex weight equal to 1".into(),
        ));
    }
    let trees = build_tree_family(inst, oracle)?;
    let tree_lengths = trees.iter().map(|t| t.length()).collect();
    let h = build_aux_unweighted(trees);
    let plan = shortest_path_dag(&h, 0, h.len() - 1)?;
    let phase_trees: Vec<&TreeSolution> = plan.nodes.iter().map(|&v| h.tree(v)).collect();
    let pattern = phases_to_pattern(inst, &phase_trees)?;
    let report = total_latency(inst, &pattern)?;
    check_pi_bound(&report, &plan)?;
    if int(report.total) > plan.cost {
        return Err(EspError::Bound(format!(
            "latency {} exceeds path cost {}",
            report.total, plan.cost
        )));
    }
    Ok(UnweightedSolution {
        pattern,
        report,
        plan,
        tree_lengths,
    })
}

/// The i-th explored vertex (root is i = 1) has latency at most
/// `Σ_{k ≤ j(i)} ℓ(T_{n_k})`, where `j(i)` is the first phase with `n_j ≥ i`.
fn check_pi_bound(report: &LatencyReport, plan: &PhasePlan) -> Result<()> {
    for (pos, &v) in report.order.iter().enumerate() {
        let i = pos + 1;
        let j = plan
            .labels
            .iter()
            .position(|&label| label >= i)
            .expect("last phase spans every vertex");
        let latency = report.latencies[v].expect("ordered vertices are explored");
        if latency > plan.prefix_lengths[j] {
            return Err(EspError::Bound(format!(
                "vertex #{i} has latency {latency} > π = {}",
                plan.prefix_lengths[j]
            )));
        }
    }
    Ok(())
}
