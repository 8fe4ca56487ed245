//! Rooted, vertex-weighted graphs with integer edge lengths.
//!
//! Vertex ids are opaque strings at the JSON boundary and dense indices
//! everywhere else. Edges are undirected; at most one edge joins a pair.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{EspError, Result};

pub type VertexId = usize;
pub type EdgeId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
    pub length: u64,
}

impl Edge {
    pub fn touches(&self, x: VertexId) -> bool {
        self.u == x || self.v == x
    }

    /// The endpoint that is not `x`. Panics if `x` is not an endpoint.
    pub fn other(&self, x: VertexId) -> VertexId {
        if self.u == x {
            self.v
        } else {
            assert_eq!(self.v, x, "vertex {x} is not an endpoint");
            self.u
        }
    }
}

#[derive(Clone, Debug)]
pub struct Instance {
    ids: Vec<String>,
    weights: Vec<u64>,
    edges: Vec<Edge>,
    root: VertexId,
    total_weight: u64,
    adjacency: Vec<Vec<(VertexId, EdgeId)>>,
    by_id: HashMap<String, VertexId>,
    by_pair: HashMap<(VertexId, VertexId), EdgeId>,
}

fn pair_key(u: VertexId, v: VertexId) -> (VertexId, VertexId) {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

impl Instance {
    /// Builds and validates an instance: connected, no self-loops, no
    /// parallel edges, root present, total weight representable.
    pub fn new(
        ids: Vec<String>,
        weights: Vec<u64>,
        edges: Vec<Edge>,
        root: VertexId,
    ) -> Result<Self> {
        let n = ids.len();
        if n == 0 {
            return Err(EspError::Instance("no vertices".into()));
        }
        if weights.len() != n {
            return Err(EspError::Instance(format!(
                "{} weights for {n} vertices",
                weights.len()
            )));
        }
        if root >= n {
            return Err(EspError::Instance(format!("root index {root} out of range")));
        }
        let mut by_id = HashMap::with_capacity(n);
        for (i, id) in ids.iter().enumerate() {
            if by_id.insert(id.clone(), i).is_some() {
                return Err(EspError::Instance(format!("duplicate vertex id {id:?}")));
            }
        }
        let total_weight = weights
            .iter()
            .try_fold(0u64, |acc, &w| acc.checked_add(w))
            .ok_or_else(|| EspError::Instance("total weight overflows u64".into()))?;

        let mut adjacency = vec![Vec::new(); n];
        let mut by_pair = HashMap::with_capacity(edges.len());
        for (e, edge) in edges.iter().enumerate() {
            if edge.u >= n || edge.v >= n {
                return Err(EspError::Instance(format!("edge {e} has an unknown endpoint")));
            }
            if edge.u == edge.v {
                return Err(EspError::Instance(format!(
                    "self-loop at {:?}",
                    ids[edge.u]
                )));
            }
            if by_pair.insert(pair_key(edge.u, edge.v), e).is_some() {
                return Err(EspError::Instance(format!(
                    "parallel edge between {:?} and {:?}",
                    ids[edge.u], ids[edge.v]
                )));
            }
            adjacency[edge.u].push((edge.v, e));
            adjacency[edge.v].push((edge.u, e));
        }

        let inst = Instance {
            ids,
            weights,
            edges,
            root,
            total_weight,
            adjacency,
            by_id,
            by_pair,
        };
        if !inst.is_connected() {
            return Err(EspError::Instance("graph is not connected".into()));
        }
        Ok(inst)
    }

    /// Instance with ids `"0".."n-1"`, root 0.
    pub fn indexed(weights: Vec<u64>, edges: &[(VertexId, VertexId, u64)]) -> Result<Self> {
        Self::indexed_rooted(weights, edges, 0)
    }

    pub fn indexed_rooted(
        weights: Vec<u64>,
        edges: &[(VertexId, VertexId, u64)],
        root: VertexId,
    ) -> Result<Self> {
        let ids = (0..weights.len()).map(|i| i.to_string()).collect();
        let edges = edges
            .iter()
            .map(|&(u, v, length)| Edge { u, v, length })
            .collect();
        Self::new(ids, weights, edges, root)
    }

    /// Complete graph over `dist` (only the upper triangle is read).
    pub fn complete(
        ids: Vec<String>,
        weights: Vec<u64>,
        dist: &[Vec<u64>],
        root: VertexId,
    ) -> Result<Self> {
        let n = ids.len();
        let mut edges = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for u in 0..n {
            for v in u + 1..n {
                edges.push(Edge { u, v, length: dist[u][v] });
            }
        }
        Self::new(ids, weights, edges, root)
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n()];
        let mut queue = VecDeque::from([self.root]);
        seen[self.root] = true;
        let mut count = 1;
        while let Some(x) = queue.pop_front() {
            for &(y, _) in &self.adjacency[x] {
                if !seen[y] {
                    seen[y] = true;
                    count += 1;
                    queue.push_back(y);
                }
            }
        }
        count == self.n()
    }

    pub fn n(&self) -> usize {
        self.ids.len()
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn root(&self) -> VertexId {
        self.root
    }

    pub fn id(&self, v: VertexId) -> &str {
        &self.ids[v]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn vertex(&self, id: &str) -> Option<VertexId> {
        self.by_id.get(id).copied()
    }

    pub fn weight(&self, v: VertexId) -> u64 {
        self.weights[v]
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    /// W, the sum of all vertex weights.
    pub fn total_weight(&self) -> u64 {
        self.total_weight
    }

    /// V*, the vertices of positive weight, in index order.
    pub fn weighted_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.n()).filter(|&v| self.weights[v] > 0)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e]
    }

    pub fn edge_between(&self, u: VertexId, v: VertexId) -> Option<EdgeId> {
        self.by_pair.get(&pair_key(u, v)).copied()
    }

    pub fn neighbors(&self, v: VertexId) -> &[(VertexId, EdgeId)] {
        &self.adjacency[v]
    }

    /// Every non-root vertex has weight 1. The root's weight never counts
    /// since its latency is 0.
    pub fn is_unit_weight(&self) -> bool {
        self.weights.iter().enumerate().all(|(v, &w)| v == self.root || w == 1)
    }

    /// Same graph with replaced vertex weights.
    pub fn with_weights(&self, weights: Vec<u64>) -> Result<Self> {
        Self::new(self.ids.clone(), weights, self.edges.clone(), self.root)
    }

    /// Same graph with the root's weight set to zero.
    pub fn with_root_weight_zero(&self) -> Self {
        let mut weights = self.weights.clone();
        weights[self.root] = 0;
        self.with_weights(weights)
            .expect("reweighting a valid instance cannot fail")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: InstanceJson = serde_json::from_str(s)?;
        raw.try_into()
    }

    pub fn to_json(&self) -> InstanceJson {
        InstanceJson {
            root: self.ids[self.root].clone(),
            vertices: self
                .ids
                .iter()
                .zip(&self.weights)
                .map(|(id, &weight)| VertexJson {
                    id: id.clone(),
                    weight,
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeJson {
                    u: self.ids[e.u].clone(),
                    v: self.ids[e.v].clone(),
                    length: e.length,
                })
                .collect(),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("instance serializes")
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VertexJson {
    pub id: String,
    #[serde(default)]
    pub weight: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EdgeJson {
    pub u: String,
    pub v: String,
    pub length: u64,
}

/// Wire format: `{"root": id, "vertices": [{"id", "weight"}], "edges": [{"u", "v", "length"}]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InstanceJson {
    pub root: String,
    pub vertices: Vec<VertexJson>,
    pub edges: Vec<EdgeJson>,
}

impl TryFrom<InstanceJson> for Instance {
    type Error = EspError;

    fn try_from(raw: InstanceJson) -> Result<Self> {
        let ids: Vec<String> = raw.vertices.iter().map(|v| v.id.clone()).collect();
        let weights = raw.vertices.iter().map(|v| v.weight).collect();
        let lookup: HashMap<&str, usize> =
            ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
        let resolve = |id: &str| {
            lookup
                .get(id)
                .copied()
                .ok_or_else(|| EspError::Instance(format!("unknown vertex id {id:?}")))
        };
        let root = resolve(&raw.root)?;
        let edges = raw
            .edges
            .iter()
            .map(|e| {
                Ok(Edge {
                    u: resolve(&e.u)?,
                    v: resolve(&e.v)?,
                    length: e.length,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Instance::new(ids, weights, edges, root)
    }
}
