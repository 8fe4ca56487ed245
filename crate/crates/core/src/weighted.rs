//! Weighted expanding search: quota trees on a geometric schedule,
//! concatenated along a shortest path in the weighted delay DAG.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{EspError, Result};
use crate::instance::Instance;
use crate::oracles::{Target, TreeOracle, TreeSolution};
use crate::pattern::{total_latency, LatencyReport, SearchPattern};
use crate::phases::{int, phases_to_pattern, shortest_path_dag, AuxPathGraph, PhasePlan};
use crate::rational::ceil_u64;
use crate::unweighted::PlanSummary;

/// Quotas `q_i = W − W(1+ε)^{−i}` for `i = 0..=ω`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotaSchedule {
    pub epsilon: BigRational,
    pub total_weight: u64,
    pub omega: usize,
    /// `(1+ε)^{−i}·W` for each i: the weight still allowed to be missing.
    pub residuals: Vec<BigRational>,
    pub quotas: Vec<BigRational>,
}

impl QuotaSchedule {
    /// Integer oracle target for quota i: collected weight is an integer,
    /// so reaching `q_i` means reaching `⌈q_i⌉`.
    pub fn target(&self, i: usize) -> u64 {
        ceil_u64(&self.quotas[i])
    }
}

/// ω is the smallest integer with `W(1+ε)^{−ω} < 1`, so the last quota
/// exceeds `W − 1` and forces full coverage with integer weights.
pub fn build_quota_schedule(total_weight: u64, epsilon: &BigRational) -> Result<QuotaSchedule> {
    if !epsilon.is_positive() {
        return Err(EspError::Parameter(format!("ε = {epsilon} must be positive")));
    }
    if total_weight == 0 {
        return Err(EspError::Parameter("total weight must be at least 1".into()));
    }
    let w = int(total_weight);
    let shrink = BigRational::one() / (BigRational::one() + epsilon);
    let mut residuals = vec![w.clone()];
    while residuals.last().unwrap() >= &BigRational::one() {
        let next = residuals.last().unwrap() * &shrink;
        residuals.push(next);
    }
    let quotas = residuals.iter().map(|r| &w - r).collect();
    Ok(QuotaSchedule {
        epsilon: epsilon.clone(),
        total_weight,
        omega: residuals.len() - 1,
        residuals,
        quotas,
    })
}

/// T_0..T_ω on `inst` (whose root weight should already be zero).
pub fn build_quota_trees(
    inst: &Instance,
    schedule: &QuotaSchedule,
    oracle: &dyn TreeOracle,
) -> Result<Vec<TreeSolution>> {
    let targets: Vec<Target> = (1..=schedule.omega)
        .map(|i| Target::Weight(schedule.target(i)))
        .collect();
    let mut trees = vec![TreeSolution::root_only(inst)];
    trees.extend(oracle.solve_many(inst, &targets)?);
    for (i, t) in trees.iter().enumerate() {
        if int(t.weight()) < schedule.quotas[i] {
            return Err(EspError::Solver(format!(
                "oracle {} collected {} below quota {}",
                oracle.name(),
                t.weight(),
                schedule.quotas[i]
            )));
        }
    }
    Ok(trees)
}

/// H over the deduplicated trees with `c_{i,j} = W(1+ε)^{−i}·ℓ(T_j)`, where
/// i and j are schedule indices. Of each run of identical consecutive trees
/// only the last survives; T_0 is always kept.
pub fn build_aux_weighted(trees: Vec<TreeSolution>, schedule: &QuotaSchedule) -> AuxPathGraph {
    let mut labels = Vec::new();
    let mut kept: Vec<TreeSolution> = Vec::new();
    for (i, t) in trees.into_iter().enumerate() {
        let duplicate = kept.len() >= 2 && kept.last().is_some_and(|prev| prev.edges() == t.edges());
        if duplicate {
            labels.pop();
            kept.pop();
        }
        labels.push(i);
        kept.push(t);
    }
    let lengths: Vec<u64> = kept.iter().map(|t| t.length()).collect();
    let residuals: Vec<BigRational> = labels.iter().map(|&i| schedule.residuals[i].clone()).collect();
    AuxPathGraph::new(labels, kept, move |a, b| &residuals[a] * int(lengths[b]))
}

#[derive(Clone, Debug)]
pub struct WeightedSolution {
    pub pattern: SearchPattern,
    pub report: LatencyReport,
    pub plan: PhasePlan,
    pub schedule: QuotaSchedule,
    pub tree_lengths: Vec<u64>,
}

impl WeightedSolution {
    pub fn summary(&self) -> PlanSummary {
        PlanSummary {
            path: self.plan.labels.clone(),
            path_cost: self.plan.cost.to_string(),
            prefix_lengths: self.plan.prefix_lengths.clone(),
            tree_lengths: self.tree_lengths.clone(),
        }
    }
}

/// Runs the pipeline on `inst` with the root weight zeroed. The reported
/// latency is measured on the original instance; the root contributes 0
/// either way. Checks the quota π bound and `L(σ) ≤ c(P)`.
pub fn solve_weighted(
    inst: &Instance,
    epsilon: &BigRational,
    oracle: &dyn TreeOracle,
) -> Result<WeightedSolution> {
    let zeroed = inst.with_root_weight_zero();
    let w = zeroed.total_weight();
    if w == 0 {
        // Nothing to find: the empty pattern is optimal.
        let schedule = QuotaSchedule {
            epsilon: epsilon.clone(),
            total_weight: 0,
            omega: 0,
            residuals: vec![BigRational::zero()],
            quotas: vec![BigRational::zero()],
        };
        let pattern = SearchPattern::empty();
        let report = total_latency(inst, &pattern)?;
        let plan = PhasePlan {
            nodes: vec![0],
            labels: vec![0],
            cost: BigRational::zero(),
            prefix_lengths: vec![0],
        };
        return Ok(WeightedSolution {
            pattern,
            report,
            plan,
            schedule,
            tree_lengths: vec![0],
        });
    }
    let schedule = build_quota_schedule(w, epsilon)?;
    let trees = build_quota_trees(&zeroed, &schedule, oracle)?;
    let tree_lengths = trees.iter().map(|t| t.length()).collect();
    let h = build_aux_weighted(trees, &schedule);
    let plan = shortest_path_dag(&h, 0, h.len() - 1)?;
    let phase_trees: Vec<&TreeSolution> = plan.nodes.iter().map(|&v| h.tree(v)).collect();
    let pattern = phases_to_pattern(&zeroed, &phase_trees)?;
    let zeroed_report = total_latency(&zeroed, &pattern)?;
    check_quota_pi_bound(&zeroed, &zeroed_report, &plan, &schedule)?;
    if int(zeroed_report.total) > plan.cost {
        return Err(EspError::Bound(format!(
            "latency {} exceeds path cost {}",
            zeroed_report.total, plan.cost
        )));
    }
    let report = total_latency(inst, &pattern)?;
    Ok(WeightedSolution {
        pattern,
        report,
        plan,
        schedule,
        tree_lengths,
    })
}

/// For each quota `q_i`, the clock when cumulative weight first reaches
/// `q_i` is at most `Σ_{k ≤ j} ℓ(T_{n_k})` for the first phase j with `n_j ≥ i`.
fn check_quota_pi_bound(
    inst: &Instance,
    report: &LatencyReport,
    plan: &PhasePlan,
    schedule: &QuotaSchedule,
) -> Result<()> {
    let mut reached: Vec<(u64, u64)> = Vec::with_capacity(report.order.len());
    let mut acc = 0u64;
    for &v in &report.order {
        acc += inst.weight(v);
        reached.push((acc, report.latencies[v].expect("ordered vertices are explored")));
    }
    for i in 1..=schedule.omega {
        let need = schedule.target(i);
        let clock = reached
            .iter()
            .find(|&&(w, _)| w >= need)
            .map(|&(_, t)| t)
            .ok_or_else(|| EspError::Bound(format!("quota {} never reached", schedule.quotas[i])))?;
        let j = plan
            .labels
            .iter()
            .position(|&label| label >= i)
            .expect("last phase carries the final quota");
        if clock > plan.prefix_lengths[j] {
            return Err(EspError::Bound(format!(
                "quota {} reached at {clock} > π = {}",
                schedule.quotas[i], plan.prefix_lengths[j]
            )));
        }
    }
    Ok(())
}

/// `(1+ε)·e` style factor with ε rational: `base · (1 + ε)`.
pub fn scaled_factor(base: &BigRational, epsilon: &BigRational) -> BigRational {
    base * (BigRational::one() + epsilon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{brute_force_esp, ExactOracle};
    use num_bigint::BigInt;

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn schedule_examples() {
        let one = ratio(1, 1);
        let s = build_quota_schedule(5, &one).unwrap();
        assert_eq!(s.omega, 3);
        assert_eq!(
            s.quotas,
            vec![ratio(0, 1), ratio(5, 2), ratio(15, 4), ratio(35, 8)]
        );
        assert_eq!(s.target(3), 5);

        let s = build_quota_schedule(4, &one).unwrap();
        assert_eq!(s.omega, 3);
        assert!(s.quotas[3] > ratio(3, 1));

        let s = build_quota_schedule(1, &ratio(1, 4)).unwrap();
        assert_eq!(s.omega, 1);
        assert_eq!(s.target(1), 1);

        assert!(build_quota_schedule(3, &ratio(0, 1)).is_err());
    }

    #[test]
    fn aux_costs() {
        let inst = Instance::indexed(vec![0, 4], &[(0, 1, 3)]).unwrap();
        let s = build_quota_schedule(4, &ratio(1, 1)).unwrap();
        let trees = build_quota_trees(&inst, &s, &ExactOracle::default()).unwrap();
        let h = build_aux_weighted(trees, &s);
        // T_1..T_3 are the same single edge, so only T_0 and T_3 survive.
        assert_eq!(h.labels(), &[0, 3]);
        assert_eq!(h.cost(0, 1), &int(12));
    }

    #[test]
    fn path_instance_is_optimal() {
        let inst = Instance::indexed(vec![0, 2, 1], &[(0, 1, 1), (1, 2, 1)]).unwrap();
        let s = build_quota_schedule(3, &ratio(1, 1)).unwrap();
        let trees = build_quota_trees(&inst, &s, &ExactOracle::default()).unwrap();
        assert_eq!(trees[1].length(), 1);
        let sol = solve_weighted(&inst, &ratio(1, 2), &ExactOracle::default()).unwrap();
        assert_eq!(sol.pattern.edges(), &[0, 1]);
        assert_eq!(sol.report.total, 4);
        assert_eq!(brute_force_esp(&inst).unwrap().latency, 4);
    }
}
