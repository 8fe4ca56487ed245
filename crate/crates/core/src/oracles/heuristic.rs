//! Greedy tree oracle for instances beyond exact reach. No guarantee.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::{check_target, Target, TreeOracle, TreeSolution};
use crate::error::Result;
use crate::instance::{EdgeId, Instance, VertexId};

/// Prim's algorithm stopped at `k` vertices for vertex targets; for weight
/// targets, repeatedly attaches the vertex with the best distance-to-weight
/// ratio along its shortest path from the current tree.
#[derive(Clone, Copy, Debug, Default)]
pub struct HeuristicOracle;

pub fn heuristic_tree_oracle(inst: &Instance, target: Target) -> Result<TreeSolution> {
    HeuristicOracle.solve(inst, target)
}

impl TreeOracle for HeuristicOracle {
    fn name(&self) -> &str {
        "heuristic"
    }

    fn factor(&self) -> Option<f64> {
        None
    }

    fn solve(&self, inst: &Instance, target: Target) -> Result<TreeSolution> {
        check_target(inst, target)?;
        let edges = match target {
            Target::Vertices(k) => prim_prefix(inst, k),
            Target::Weight(q) => greedy_ratio(inst, q),
        };
        TreeSolution::from_edges(inst, edges)
    }
}

fn prim_prefix(inst: &Instance, k: usize) -> Vec<EdgeId> {
    let mut inside = vec![false; inst.n()];
    inside[inst.root()] = true;
    let mut count = 1;
    let mut heap = BinaryHeap::new();
    let push_all = |heap: &mut BinaryHeap<_>, x: VertexId| {
        for &(y, e) in inst.neighbors(x) {
            heap.push(Reverse((inst.edge(e).length, e, y)));
        }
    };
    push_all(&mut heap, inst.root());
    let mut edges = Vec::new();
    while count < k {
        let Some(Reverse((_, e, y))) = heap.pop() else { break };
        if inside[y] {
            continue;
        }
        inside[y] = true;
        count += 1;
        edges.push(e);
        push_all(&mut heap, y);
    }
    edges
}

fn greedy_ratio(inst: &Instance, q: u64) -> Vec<EdgeId> {
    let n = inst.n();
    let mut inside = vec![false; n];
    inside[inst.root()] = true;
    let mut collected = inst.weight(inst.root());
    let mut edges = Vec::new();
    while collected < q {
        // Multi-source Dijkstra from the current tree.
        let mut dist = vec![u64::MAX; n];
        let mut via: Vec<Option<EdgeId>> = vec![None; n];
        let mut heap = BinaryHeap::new();
        for v in 0..n {
            if inside[v] {
                dist[v] = 0;
                heap.push(Reverse((0u64, v)));
            }
        }
        while let Some(Reverse((d, x))) = heap.pop() {
            if d > dist[x] {
                continue;
            }
            for &(y, e) in inst.neighbors(x) {
                let nd = d + inst.edge(e).length;
                if nd < dist[y] {
                    dist[y] = nd;
                    via[y] = Some(e);
                    heap.push(Reverse((nd, y)));
                }
            }
        }
        let pick = (0..n)
            .filter(|&v| !inside[v] && inst.weight(v) > 0)
            .min_by(|&a, &b| {
                let lhs = dist[a] as u128 * inst.weight(b) as u128;
                let rhs = dist[b] as u128 * inst.weight(a) as u128;
                lhs.cmp(&rhs).then(a.cmp(&b))
            })
            .expect("an outside vertex with positive weight exists while below quota");
        let mut x = pick;
        while !inside[x] {
            inside[x] = true;
            collected += inst.weight(x);
            let e = via[x].expect("reachable vertex has a predecessor edge");
            edges.push(e);
            x = inst.edge(e).other(x);
        }
    }
    edges
}
