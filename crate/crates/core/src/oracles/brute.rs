//! Exact ESP by dynamic programming over explored vertex sets.
//!
//! Once a set S is explored, every weighted vertex outside S pays the length
//! of the next edge. So the remaining cost from S is
//! `min_v c(S, v) * (W - w(S)) + f(S + v)`, with `c(S, v)` the cheapest edge
//! from S to v.

use crate::error::{EspError, Result};
use crate::instance::{EdgeId, Instance};
use crate::pattern::SearchPattern;

pub const BRUTE_FORCE_DEFAULT_LIMIT: usize = 8;
const BRUTE_FORCE_HARD_LIMIT: usize = 20;

#[derive(Clone, Debug)]
pub struct BruteForceSolution {
    pub pattern: SearchPattern,
    pub latency: u64,
}

pub fn brute_force_esp(inst: &Instance) -> Result<BruteForceSolution> {
    brute_force_esp_with_limit(inst, BRUTE_FORCE_DEFAULT_LIMIT)
}

pub fn brute_force_esp_with_limit(inst: &Instance, limit: usize) -> Result<BruteForceSolution> {
    let n = inst.n();
    let limit = limit.min(BRUTE_FORCE_HARD_LIMIT);
    if n > limit {
        return Err(EspError::TooLarge {
            what: "vertex count for brute-force search",
            actual: n,
            limit,
        });
    }
    let full = (1usize << n) - 1;
    let root_bit = 1usize << inst.root();
    let needed: usize = inst.weighted_vertices().map(|v| 1usize << v).sum();
    let w = inst.total_weight();

    let mut weight = vec![0u64; 1 << n];
    for mask in 1..=full {
        let low = mask.trailing_zeros() as usize;
        weight[mask] = weight[mask & (mask - 1)] + inst.weight(low);
    }

    // cost[mask] and the move (edge) that achieves it.
    let mut cost = vec![u64::MAX; 1 << n];
    let mut step: Vec<Option<EdgeId>> = vec![None; 1 << n];
    for mask in (0..=full).rev() {
        if mask & root_bit == 0 {
            continue;
        }
        if mask & needed == needed {
            cost[mask] = 0;
            continue;
        }
        let remaining = w - weight[mask];
        let mut best: Option<(u64, EdgeId)> = None;
        for v in 0..n {
            if mask >> v & 1 == 1 {
                continue;
            }
            let cheapest = inst
                .neighbors(v)
                .iter()
                .filter(|&&(u, _)| mask >> u & 1 == 1)
                .map(|&(_, e)| (inst.edge(e).length, e))
                .min();
            let Some((len, e)) = cheapest else { continue };
            let next = cost[mask | 1 << v];
            if next == u64::MAX {
                continue;
            }
            let total = len * remaining + next;
            if best.is_none_or(|(b, _)| total < b) {
                best = Some((total, e));
            }
        }
        if let Some((total, e)) = best {
            cost[mask] = total;
            step[mask] = Some(e);
        }
    }

    let mut mask = root_bit;
    let mut edges = Vec::new();
    while let Some(e) = step[mask] {
        edges.push(e);
        let edge = inst.edge(e);
        mask |= 1 << edge.u | 1 << edge.v;
    }
    Ok(BruteForceSolution {
        pattern: SearchPattern::new(edges),
        latency: cost[root_bit],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::total_latency;

    #[test]
    fn star_prefers_heavy_leaf_first() {
        // r-a (1, w=1), r-b (2, w=3): b first gives 2*4 + 1*1 = 9, a first 1*4 + 2*3 = 10.
        let inst = Instance::indexed(vec![0, 1, 3], &[(0, 1, 1), (0, 2, 2)]).unwrap();
        let sol = brute_force_esp(&inst).unwrap();
        assert_eq!(sol.latency, 9);
        assert_eq!(total_latency(&inst, &sol.pattern).unwrap().total, 9);
    }

    #[test]
    fn single_vertex_has_zero_latency() {
        let inst = Instance::indexed(vec![5], &[]).unwrap();
        let sol = brute_force_esp(&inst).unwrap();
        assert_eq!(sol.latency, 0);
        assert!(sol.pattern.is_empty());
    }

    #[test]
    fn limit_enforced() {
        let edges: Vec<_> = (1..10).map(|i| (i - 1, i, 1)).collect();
        let inst = Instance::indexed(vec![1; 10], &edges).unwrap();
        assert!(brute_force_esp(&inst).is_err());
        assert_eq!(brute_force_esp_with_limit(&inst, 10).unwrap().latency, 45);
    }
}
