//! Exact rooted k-MST and quota trees by enumerating connected vertex sets.
//!
//! A tree spanning vertex set S is at least as long as the MST of G[S], so the
//! optimum over all trees is the minimum of MST(G[S]) over connected S that
//! contain the root.

use num_rational::Ratio;

use super::{check_target, Target, TreeOracle, TreeSolution};
use crate::error::{EspError, Result};
use crate::instance::{EdgeId, Instance};

/// Largest instance the subset table accepts by default.
pub const EXACT_DEFAULT_LIMIT: usize = 16;
const EXACT_HARD_LIMIT: usize = 22;

/// MST of every connected induced subgraph containing the root.
pub struct SubtreeTable {
    // Indexed by vertex mask; `None` when G[mask] is disconnected or misses the root.
    entries: Vec<Option<(u64, Vec<EdgeId>)>>,
    weights: Vec<u64>,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

impl SubtreeTable {
    pub fn build(inst: &Instance, limit: usize) -> Result<Self> {
        let n = inst.n();
        let limit = limit.min(EXACT_HARD_LIMIT);
        if n > limit {
            return Err(EspError::TooLarge {
                what: "vertex count for exact tree oracle",
                actual: n,
                limit,
            });
        }
        let mut order: Vec<EdgeId> = (0..inst.m()).collect();
        order.sort_by_key(|&e| (inst.edge(e).length, e));
        let root_bit = 1usize << inst.root();
        let mut entries = vec![None; 1 << n];
        let mut weights = vec![0u64; 1 << n];
        let mut parent = vec![0usize; n];
        for mask in 1usize..1 << n {
            let low = mask.trailing_zeros() as usize;
            weights[mask] = weights[mask & (mask - 1)] + inst.weight(low);
            if mask & root_bit == 0 {
                continue;
            }
            for (i, p) in parent.iter_mut().enumerate() {
                *p = i;
            }
            let need = mask.count_ones() as usize - 1;
            let mut chosen = Vec::with_capacity(need);
            let mut length = 0u64;
            for &e in &order {
                if chosen.len() == need {
                    break;
                }
                let edge = inst.edge(e);
                if mask >> edge.u & 1 == 0 || mask >> edge.v & 1 == 0 {
                    continue;
                }
                let (a, b) = (find(&mut parent, edge.u), find(&mut parent, edge.v));
                if a != b {
                    parent[a] = b;
                    chosen.push(e);
                    length += edge.length;
                }
            }
            if chosen.len() == need {
                chosen.sort_unstable();
                entries[mask] = Some((length, chosen));
            }
        }
        Ok(Self { entries, weights })
    }

    fn feasible(&self, mask: usize, target: Target) -> bool {
        match target {
            Target::Vertices(k) => mask.count_ones() as usize >= k,
            Target::Weight(q) => self.weights[mask] >= q,
        }
    }

    /// Length of the shortest feasible tree.
    pub fn optimum(&self, target: Target) -> Option<u64> {
        self.entries
            .iter()
            .enumerate()
            .filter_map(|(mask, e)| e.as_ref().map(|(len, _)| (mask, *len)))
            .filter(|&(mask, _)| self.feasible(mask, target))
            .map(|(_, len)| len)
            .min()
    }

    /// Shortest feasible tree; ties go to the lexicographically smallest edge list.
    pub fn best(&self, target: Target) -> Option<&[EdgeId]> {
        self.pick(target, |len, best| len < best, |_| true)
    }

    /// Longest feasible tree no longer than `cap`; ties as in [`Self::best`].
    pub fn longest_within(&self, target: Target, cap: Ratio<u64>) -> Option<&[EdgeId]> {
        self.pick(
            target,
            |len, best| len > best,
            |len| Ratio::from_integer(len) <= cap,
        )
    }

    fn pick(
        &self,
        target: Target,
        better: impl Fn(u64, u64) -> bool,
        allowed: impl Fn(u64) -> bool,
    ) -> Option<&[EdgeId]> {
        let mut best: Option<(u64, &[EdgeId])> = None;
        for (mask, entry) in self.entries.iter().enumerate() {
            let Some((len, edges)) = entry else { continue };
            if !self.feasible(mask, target) || !allowed(*len) {
                continue;
            }
            let replace = match best {
                None => true,
                Some((b_len, b_edges)) => {
                    better(*len, b_len) || (*len == b_len && edges.as_slice() < b_edges)
                }
            };
            if replace {
                best = Some((*len, edges.as_slice()));
            }
        }
        best.map(|(_, edges)| edges)
    }
}

/// Minimum-length tree containing the root and at least `k` vertices.
pub fn exact_kmst(inst: &Instance, k: usize) -> Result<TreeSolution> {
    ExactOracle::default().solve(inst, Target::Vertices(k))
}

/// Minimum-length tree containing the root with collected weight at least `q`.
pub fn exact_quota_tree(inst: &Instance, q: u64) -> Result<TreeSolution> {
    ExactOracle::default().solve(inst, Target::Weight(q))
}

/// Exact oracle backed by [`SubtreeTable`].
#[derive(Clone, Debug)]
pub struct ExactOracle {
    pub limit: usize,
}

impl Default for ExactOracle {
    fn default() -> Self {
        Self {
            limit: EXACT_DEFAULT_LIMIT,
        }
    }
}

impl TreeOracle for ExactOracle {
    fn name(&self) -> &str {
        "exact"
    }

    fn factor(&self) -> Option<f64> {
        Some(1.0)
    }

    fn solve(&self, inst: &Instance, target: Target) -> Result<TreeSolution> {
        Ok(self.solve_many(inst, &[target])?.remove(0))
    }

    fn solve_many(&self, inst: &Instance, targets: &[Target]) -> Result<Vec<TreeSolution>> {
        for &t in targets {
            check_target(inst, t)?;
        }
        let table = SubtreeTable::build(inst, self.limit)?;
        targets
            .iter()
            .map(|&t| {
                let edges = table
                    .best(t)
                    .ok_or_else(|| EspError::Solver(format!("no tree reaches {t:?}")))?;
                TreeSolution::from_edges(inst, edges.to_vec())
            })
            .collect()
    }
}

/// Adversarial oracle: returns the longest feasible tree within `factor` times
/// the optimum. Exercises algorithms against a worst-case approximate oracle.
#[derive(Clone, Debug)]
pub struct InflatedOracle {
    pub factor: Ratio<u64>,
    pub limit: usize,
}

impl InflatedOracle {
    pub fn new(factor: Ratio<u64>) -> Self {
        Self {
            factor,
            limit: EXACT_DEFAULT_LIMIT,
        }
    }
}

impl TreeOracle for InflatedOracle {
    fn name(&self) -> &str {
        "inflated"
    }

    fn factor(&self) -> Option<f64> {
        Some(*self.factor.numer() as f64 / *self.factor.denom() as f64)
    }

    fn solve(&self, inst: &Instance, target: Target) -> Result<TreeSolution> {
        Ok(self.solve_many(inst, &[target])?.remove(0))
    }

    fn solve_many(&self, inst: &Instance, targets: &[Target]) -> Result<Vec<TreeSolution>> {
        for &t in targets {
            check_target(inst, t)?;
        }
        let table = SubtreeTable::build(inst, self.limit)?;
        targets
            .iter()
            .map(|&t| {
                let opt = table
                    .optimum(t)
                    .ok_or_else(|| EspError::Solver(format!("no tree reaches {t:?}")))?;
                let cap = self.factor * Ratio::from_integer(opt);
                let edges = table
                    .longest_within(t, cap)
                    .expect("the optimum itself is within the cap");
                TreeSolution::from_edges(inst, edges.to_vec())
            })
            .collect()
    }
}
