//! Tree oracles (rooted k-MST and quota trees) and exact desk-scale solvers.

mod brute;
mod exact;
mod heuristic;
mod split;

use serde::Serialize;

use crate::error::{EspError, Result};
use crate::instance::{EdgeId, Instance, VertexId};

pub use brute::{brute_force_esp, brute_force_esp_with_limit, BruteForceSolution, BRUTE_FORCE_DEFAULT_LIMIT};
pub use exact::{exact_kmst, exact_quota_tree, ExactOracle, InflatedOracle, SubtreeTable, EXACT_DEFAULT_LIMIT};
pub use heuristic::{heuristic_tree_oracle, HeuristicOracle};
pub use split::{split_vertices_for_quota, SplitInstance};

/// A subtree of the instance graph that contains the root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeSolution {
    edges: Vec<EdgeId>,
    vertices: Vec<VertexId>,
    length: u64,
    weight: u64,
}

impl TreeSolution {
    pub fn root_only(inst: &Instance) -> Self {
        Self {
            edges: Vec::new(),
            vertices: vec![inst.root()],
            length: 0,
            weight: inst.weight(inst.root()),
        }
    }

    /// Checks that `edges` form a tree containing the root.
    pub fn from_edges(inst: &Instance, mut edges: Vec<EdgeId>) -> Result<Self> {
        edges.sort_unstable();
        edges.dedup();
        let mut inside = vec![false; inst.n()];
        inside[inst.root()] = true;
        let mut pending: Vec<EdgeId> = edges.clone();
        let mut vertices = vec![inst.root()];
        // Grow from the root; any leftover edge is disconnected or cyclic.
        loop {
            let before = pending.len();
            let mut rest = Vec::with_capacity(pending.len());
            for e in pending {
                let edge = inst.edge(e);
                match (inside[edge.u], inside[edge.v]) {
                    (true, true) => {
                        return Err(EspError::Solver(format!("tree edge {e} closes a cycle")))
                    }
                    (true, false) | (false, true) => {
                        let fresh = if inside[edge.u] { edge.v } else { edge.u };
                        inside[fresh] = true;
                        vertices.push(fresh);
                    }
                    (false, false) => rest.push(e),
                }
            }
            pending = rest;
            if pending.is_empty() {
                break;
            }
            if pending.len() == before {
                return Err(EspError::Solver("tree is disconnected from the root".into()));
            }
        }
        vertices.sort_unstable();
        let length = edges.iter().map(|&e| inst.edge(e).length).sum();
        let weight = vertices.iter().map(|&v| inst.weight(v)).sum();
        Ok(Self {
            edges,
            vertices,
            length,
            weight,
        })
    }

    /// Edge ids in increasing order.
    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    /// Vertex ids in increasing order; always includes the root.
    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }

    /// ℓ(T).
    pub fn length(&self) -> u64 {
        self.length
    }

    /// Σ_{v ∈ V_T} w_v.
    pub fn weight(&self) -> u64 {
        self.weight
    }

    pub fn is_feasible(&self, target: Target) -> bool {
        match target {
            Target::Vertices(k) => self.vertices.len() >= k,
            Target::Weight(q) => self.weight >= q,
        }
    }

    pub fn to_json(&self, inst: &Instance) -> TreeJson {
        TreeJson {
            edges: self
                .edges
                .iter()
                .map(|&e| {
                    let edge = inst.edge(e);
                    (inst.id(edge.u).to_string(), inst.id(edge.v).to_string())
                })
                .collect(),
            vertices: self.vertices.iter().map(|&v| inst.id(v).to_string()).collect(),
            length: self.length,
            weight: self.weight,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TreeJson {
    pub edges: Vec<(String, String)>,
    pub vertices: Vec<String>,
    pub length: u64,
    pub weight: u64,
}

/// What a tree oracle must reach.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Target {
    /// At least `k` vertices, root included (rooted k-MST).
    Vertices(usize),
    /// Collected weight of at least `q` (rooted quota tree).
    Weight(u64),
}

/// Produces rooted trees reaching a target.
pub trait TreeOracle {
    fn name(&self) -> &str;

    /// Advertised approximation factor, if any.
    fn factor(&self) -> Option<f64>;

    fn solve(&self, inst: &Instance, target: Target) -> Result<TreeSolution>;

    /// Solves a batch of targets on one instance. Implementations may share
    /// preprocessing across the batch.
    fn solve_many(&self, inst: &Instance, targets: &[Target]) -> Result<Vec<TreeSolution>> {
        targets.iter().map(|&t| self.solve(inst, t)).collect()
    }
}

pub(crate) fn check_target(inst: &Instance, target: Target) -> Result<()> {
    match target {
        Target::Vertices(k) if k == 0 || k > inst.n() => Err(EspError::Target(format!(
            "k = {k} outside 1..={}",
            inst.n()
        ))),
        Target::Weight(q) if q > inst.total_weight() => Err(EspError::Target(format!(
            "quota {q} exceeds total weight {}",
            inst.total_weight()
        ))),
        _ => Ok(()),
    }
}

/// Oracle selection by name, as exposed on the command line.
pub fn oracle_by_name(name: &str) -> Result<Box<dyn TreeOracle + Send + Sync>> {
    match name {
        "exact" => Ok(Box::new(ExactOracle::default())),
        "heuristic" => Ok(Box::new(HeuristicOracle)),
        other => Err(EspError::Parameter(format!("unknown oracle {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_edges_rejects_non_trees() {
        let tri = Instance::indexed(vec![1, 1, 1], &[(0, 1, 1), (0, 2, 2), (1, 2, 1)]).unwrap();
        assert!(TreeSolution::from_edges(&tri, vec![0, 1, 2]).is_err());
        let path = Instance::indexed(vec![1, 1, 1, 1], &[(0, 1, 1), (1, 2, 1), (2, 3, 1)]).unwrap();
        assert!(TreeSolution::from_edges(&path, vec![2]).is_err());
        let t = TreeSolution::from_edges(&path, vec![1, 0]).unwrap();
        assert_eq!(t.vertices(), &[0, 1, 2]);
        assert_eq!(t.length(), 2);
        assert_eq!(t.weight(), 3);
    }

    #[test]
    fn target_range_checks() {
        let inst = Instance::indexed(vec![0, 2], &[(0, 1, 1)]).unwrap();
        assert!(check_target(&inst, Target::Vertices(0)).is_err());
        assert!(check_target(&inst, Target::Vertices(3)).is_err());
        assert!(check_target(&inst, Target::Weight(3)).is_err());
        assert!(check_target(&inst, Target::Weight(2)).is_ok());
    }
}
