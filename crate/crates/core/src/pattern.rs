//! Expanding search patterns: validation, latency, concatenation.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::Result;
use crate::instance::{EdgeId, Instance, VertexId};

/// An ordered edge sequence; every prefix must be a tree containing the root.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct SearchPattern {
    edges: Vec<EdgeId>,
}

impl SearchPattern {
    pub fn new(edges: Vec<EdgeId>) -> Self {
        Self { edges }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn push(&mut self, e: EdgeId) {
        self.edges.push(e);
    }

    /// ℓ(σ), the summed length of all edges.
    pub fn length(&self, inst: &Instance) -> u64 {
        self.edges.iter().map(|&e| inst.edge(e).length).sum()
    }

    pub fn prefix(&self, k: usize) -> SearchPattern {
        SearchPattern::new(self.edges[..k.min(self.edges.len())].to_vec())
    }

    /// Resolves endpoint-id pairs to edges of `inst`.
    pub fn from_pairs(inst: &Instance, pairs: &[(String, String)]) -> Result<Self> {
        let mut edges = Vec::with_capacity(pairs.len());
        for (i, (a, b)) in pairs.iter().enumerate() {
            let lookup = |id: &str| {
                inst.vertex(id).ok_or(PatternError {
                    index: i + 1,
                    kind: Violation::UnknownEdge,
                })
            };
            let (u, v) = (lookup(a)?, lookup(b)?);
            let e = inst.edge_between(u, v).ok_or(PatternError {
                index: i + 1,
                kind: Violation::UnknownEdge,
            })?;
            edges.push(e);
        }
        Ok(Self::new(edges))
    }

    /// Endpoint-id pairs, oriented from the explored side to the new vertex
    /// when the pattern is a valid prefix tree.
    pub fn to_pairs(&self, inst: &Instance) -> Vec<(String, String)> {
        let mut explored = vec![false; inst.n()];
        explored[inst.root()] = true;
        self.edges
            .iter()
            .map(|&e| {
                let edge = inst.edge(e);
                let (a, b) = if explored[edge.v] && !explored[edge.u] {
                    (edge.v, edge.u)
                } else {
                    (edge.u, edge.v)
                };
                explored[a] = true;
                explored[b] = true;
                (inst.id(a).to_string(), inst.id(b).to_string())
            })
            .collect()
    }

    pub fn from_json_str(inst: &Instance, s: &str) -> Result<Self> {
        let pairs: Vec<(String, String)> = serde_json::from_str(s)?;
        Self::from_pairs(inst, &pairs)
    }

    /// Wire format: a JSON list of `[u, v]` id pairs.
    pub fn to_json_string(&self, inst: &Instance) -> String {
        serde_json::to_string(&self.to_pairs(inst)).expect("pairs serialize")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    /// The first edge does not contain the root.
    RootMiss,
    /// Both endpoints were already explored.
    Cycle,
    /// Neither endpoint was explored yet.
    Disconnected,
    /// A weighted vertex is never reached.
    Uncovered(VertexId),
    /// The edge is not part of the instance.
    UnknownEdge,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::RootMiss => write!(f, "first edge misses the root"),
            Violation::Cycle => write!(f, "edge closes a cycle"),
            Violation::Disconnected => write!(f, "edge is disconnected from the explored tree"),
            Violation::Uncovered(v) => write!(f, "weighted vertex {v} is never explored"),
            Violation::UnknownEdge => write!(f, "edge does not exist"),
        }
    }
}

/// `index` is 1-based; coverage failures report the pattern length.
#[derive(Clone, Copy, Debug, Error, PartialEq, Eq)]
#[error("{kind} (index {index})")]
pub struct PatternError {
    pub index: usize,
    pub kind: Violation,
}

/// Per-vertex latencies of a pattern.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatencyReport {
    /// `Some(L_v)` for explored vertices, `None` otherwise. The root has 0.
    pub latencies: Vec<Option<u64>>,
    /// Vertices in exploration order, starting with the root.
    pub order: Vec<VertexId>,
    /// L(σ) = Σ w_v L_v over explored vertices.
    pub total: u64,
    /// ℓ(σ).
    pub length: u64,
}

impl LatencyReport {
    pub fn latency(&self, v: VertexId) -> Option<u64> {
        self.latencies[v]
    }
}

/// Walks the pattern, checking only that each prefix is a rooted tree.
pub fn explore(inst: &Instance, pat: &SearchPattern) -> Result<LatencyReport, PatternError> {
    let n = inst.n();
    let mut latencies = vec![None; n];
    latencies[inst.root()] = Some(0);
    let mut order = vec![inst.root()];
    let mut clock = 0u64;
    let mut total = 0u64;
    for (i, &e) in pat.edges().iter().enumerate() {
        let index = i + 1;
        if e >= inst.m() {
            return Err(PatternError {
                index,
                kind: Violation::UnknownEdge,
            });
        }
        let edge = inst.edge(e);
        let fresh = match (latencies[edge.u].is_some(), latencies[edge.v].is_some()) {
            (true, true) => {
                return Err(PatternError {
                    index,
                    kind: Violation::Cycle,
                })
            }
            (false, false) => {
                let kind = if i == 0 {
                    Violation::RootMiss
                } else {
                    Violation::Disconnected
                };
                return Err(PatternError { index, kind });
            }
            (true, false) => edge.v,
            (false, true) => edge.u,
        };
        clock += edge.length;
        latencies[fresh] = Some(clock);
        order.push(fresh);
        total += inst.weight(fresh) * clock;
    }
    Ok(LatencyReport {
        latencies,
        order,
        total,
        length: clock,
    })
}

/// Accepts iff every prefix is a tree containing the root and V* is covered.
pub fn validate_pattern(inst: &Instance, pat: &SearchPattern) -> Result<(), PatternError> {
    let report = explore(inst, pat)?;
    check_coverage(inst, pat, &report)
}

fn check_coverage(
    inst: &Instance,
    pat: &SearchPattern,
    report: &LatencyReport,
) -> Result<(), PatternError> {
    match inst.weighted_vertices().find(|&v| report.latencies[v].is_none()) {
        Some(v) => Err(PatternError {
            index: pat.len(),
            kind: Violation::Uncovered(v),
        }),
        None => Ok(()),
    }
}

/// L(σ) together with per-vertex latencies; rejects invalid patterns.
pub fn total_latency(inst: &Instance, pat: &SearchPattern) -> Result<LatencyReport> {
    let report = explore(inst, pat)?;
    check_coverage(inst, pat, &report)?;
    Ok(report)
}

/// σ + σ′: the edges of σ followed by those of σ′, skipping every edge whose
/// endpoints are both explored already.
pub fn concat_patterns(first: &SearchPattern, second: &SearchPattern, inst: &Instance) -> SearchPattern {
    let mut explored = vec![false; inst.n()];
    explored[inst.root()] = true;
    let mut out = Vec::with_capacity(first.len() + second.len());
    for &e in first.edges().iter().chain(second.edges()) {
        let edge = inst.edge(e);
        if explored[edge.u] && explored[edge.v] {
            continue;
        }
        explored[edge.u] = true;
        explored[edge.v] = true;
        out.push(e);
    }
    SearchPattern::new(out)
}
