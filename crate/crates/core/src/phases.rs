//! Auxiliary DAG over a tree family, its shortest path, and the phase-wise
//! concatenation of trees into a search pattern.

use std::collections::VecDeque;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{EspError, Result};
use crate::instance::{EdgeId, Instance};
use crate::oracles::TreeSolution;
use crate::pattern::SearchPattern;

/// DAG on nodes `0..len()` with an arc from every node to every later node.
/// Each node carries a tree and an external label (its index in the usual
/// numbering, e.g. `k` for the k-MST or `i` for the i-th quota).
#[derive(Clone, Debug)]
pub struct AuxPathGraph {
    labels: Vec<usize>,
    trees: Vec<TreeSolution>,
    // costs[i][j - i - 1] is the arc cost from node i to node j.
    costs: Vec<Vec<BigRational>>,
}

impl AuxPathGraph {
    pub fn new(
        labels: Vec<usize>,
        trees: Vec<TreeSolution>,
        cost: impl Fn(usize, usize) -> BigRational,
    ) -> Self {
        assert_eq!(labels.len(), trees.len());
        let n = labels.len();
        let costs = (0..n)
            .map(|i| (i + 1..n).map(|j| cost(i, j)).collect())
            .collect();
        Self {
            labels,
            trees,
            costs,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, node: usize) -> usize {
        self.labels[node]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn tree(&self, node: usize) -> &TreeSolution {
        &self.trees[node]
    }

    pub fn trees(&self) -> &[TreeSolution] {
        &self.trees
    }

    /// Cost of arc `(i, j)`, `i < j`.
    pub fn cost(&self, i: usize, j: usize) -> &BigRational {
        assert!(i < j, "arcs only go forward");
        &self.costs[i][j - i - 1]
    }

    /// Node holding external label `label`, if present.
    pub fn node_of(&self, label: usize) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }
}

/// A shortest path through the auxiliary graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhasePlan {
    /// Nodes `n_0 < n_1 < … < n_l` (graph node indices).
    pub nodes: Vec<usize>,
    /// External labels of those nodes.
    pub labels: Vec<usize>,
    /// c(P).
    pub cost: BigRational,
    /// π after each phase: `prefix_lengths[j] = Σ_{k ≤ j} ℓ(T_{n_k})`.
    pub prefix_lengths: Vec<u64>,
}

impl PhasePlan {
    pub fn phases(&self) -> usize {
        self.nodes.len()
    }
}

/// Minimum-cost `s → t` path by DP in index order. Ties prefer fewer hops,
/// then the lexicographically smallest node sequence.
pub fn shortest_path_dag(h: &AuxPathGraph, s: usize, t: usize) -> Result<PhasePlan> {
    if s > t || t >= h.len() {
        return Err(EspError::Parameter(format!(
            "path endpoints {s}, {t} invalid for {} nodes",
            h.len()
        )));
    }
    let mut best: Vec<Option<(BigRational, Vec<usize>)>> = vec![None; h.len()];
    best[s] = Some((BigRational::zero(), vec![s]));
    for j in s + 1..=t {
        let mut choice: Option<(BigRational, Vec<usize>)> = None;
        for i in s..j {
            let Some((ci, pi)) = &best[i] else { continue };
            let cost = ci + h.cost(i, j);
            let better = match &choice {
                None => true,
                Some((cb, pb)) => {
                    cost < *cb
                        || (cost == *cb
                            && (pi.len() + 1, pi.as_slice()) < (pb.len(), &pb[..pb.len() - 1]))
                }
            };
            if better {
                let mut path = pi.clone();
                path.push(j);
                choice = Some((cost, path));
            }
        }
        best[j] = choice;
    }
    let (cost, nodes) = best[t].take().expect("upward arcs make every node reachable");
    let labels = nodes.iter().map(|&v| h.label(v)).collect();
    let mut acc = 0u64;
    let prefix_lengths = nodes
        .iter()
        .map(|&v| {
            acc += h.tree(v).length();
            acc
        })
        .collect();
    Ok(PhasePlan {
        nodes,
        labels,
        cost,
        prefix_lengths,
    })
}

/// Explores the trees of the plan in order. Within a phase, edges of the
/// phase tree with an unexplored endpoint are added in BFS order from the
/// already explored part of the tree.
pub fn phases_to_pattern(inst: &Instance, trees: &[&TreeSolution]) -> Result<SearchPattern> {
    let n = inst.n();
    let mut explored = vec![false; n];
    explored[inst.root()] = true;
    let mut edges = Vec::new();
    let mut tree_adj: Vec<Vec<(usize, EdgeId)>> = vec![Vec::new(); n];
    for tree in trees {
        for list in tree_adj.iter_mut() {
            list.clear();
        }
        for &e in tree.edges() {
            let edge = inst.edge(e);
            tree_adj[edge.u].push((edge.v, e));
            tree_adj[edge.v].push((edge.u, e));
        }
        let mut queue: VecDeque<usize> =
            tree.vertices().iter().copied().filter(|&v| explored[v]).collect();
        while let Some(x) = queue.pop_front() {
            for &(y, e) in &tree_adj[x] {
                if !explored[y] {
                    explored[y] = true;
                    edges.push(e);
                    queue.push_back(y);
                }
            }
        }
        if let Some(&v) = tree.vertices().iter().find(|&&v| !explored[v]) {
            return Err(EspError::Solver(format!(
                "phase tree vertex {} unreachable from explored set",
                inst.id(v)
            )));
        }
    }
    Ok(SearchPattern::new(edges))
}

pub(crate) fn int(x: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}
