//! Reduction from quota trees to k-MST on a unit-weight instance.

use crate::error::{EspError, Result};
use crate::instance::{Edge, Instance};

use super::TreeSolution;

/// Unit-weight instance where each vertex `v` carries `2n·w_v` pendant copies
/// attached by zero-length edges. Original vertices keep their indices and
/// original edges keep their ids.
#[derive(Clone, Debug)]
pub struct SplitInstance {
    pub instance: Instance,
    pub original_n: usize,
    pub original_m: usize,
    pub pendants: Vec<usize>,
}

impl SplitInstance {
    /// k-MST target matching quota `q` on the original instance.
    pub fn k_for_quota(&self, q: u64) -> usize {
        2 * self.original_n * q as usize
    }

    /// Restricts a tree on the split instance to original edges.
    pub fn project(&self, original: &Instance, tree: &TreeSolution) -> Result<TreeSolution> {
        let edges = tree
            .edges()
            .iter()
            .copied()
            .filter(|&e| e < self.original_m)
            .collect();
        TreeSolution::from_edges(original, edges)
    }
}

/// Splits weights into pendants; fails if the result exceeds `budget` vertices.
pub fn split_vertices_for_quota(inst: &Instance, budget: usize) -> Result<SplitInstance> {
    let n = inst.n();
    let pendants: Vec<usize> = (0..n).map(|v| 2 * n * inst.weight(v) as usize).collect();
    let total = n + pendants.iter().sum::<usize>();
    if total > budget {
        return Err(EspError::TooLarge {
            what: "split instance vertex count",
            actual: total,
            limit: budget,
        });
    }
    let mut ids = inst.ids().to_vec();
    let mut edges = inst.edges().to_vec();
    for (v, &count) in pendants.iter().enumerate() {
        for j in 0..count {
            edges.push(Edge {
                u: v,
                v: ids.len(),
                length: 0,
            });
            ids.push(format!("{}#{j}", inst.id(v)));
        }
    }
    // Original vertices count toward k as well; the 2n-fold blow-up makes
    // those n extra units smaller than one unit of original weight.
    let weights = vec![1; ids.len()];
    let instance = Instance::new(ids, weights, edges, inst.root())?;
    Ok(SplitInstance {
        instance,
        original_n: n,
        original_m: inst.m(),
        pendants,
    })
}
