//! Expanding search among points in the plane.
//!
//! The pipeline has three layers: a decomposition into delay-bounded
//! subinstances ([`decompose`]), a rounding of bounded instances to unit
//! weights and breakpoint-rounded ("segmented") objectives ([`reduce`],
//! [`segmented`]), and a quadtree/portal dynamic program for the segmented
//! problem ([`quadtree`], [`portal_dp`]).

pub mod decompose;
pub mod portal_dp;
pub mod quadtree;
pub mod reduce;
pub mod segmented;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{EspError, Result};
use crate::instance::Instance;
use crate::pattern::SearchPattern;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub weight: u64,
}

impl Point {
    pub fn dist(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Wire format: `{"root": idx, "points": [{"x", "y", "weight"}]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EuclideanInstance {
    pub root: usize,
    pub points: Vec<Point>,
}

impl EuclideanInstance {
    pub fn new(root: usize, points: Vec<Point>) -> Result<Self> {
        let inst = Self { root, points };
        inst.check()?;
        Ok(inst)
    }

    fn check(&self) -> Result<()> {
        if self.points.is_empty() {
            return Err(EspError::Instance("no points".into()));
        }
        if self.root >= self.points.len() {
            return Err(EspError::Instance(format!("root index {} out of range", self.root)));
        }
        if self.points.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(EspError::Instance("non-finite coordinate".into()));
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let inst: Self = serde_json::from_str(s)?;
        inst.check()?;
        Ok(inst)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("points serialize")
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn weights(&self) -> Vec<u64> {
        self.points.iter().map(|p| p.weight).collect()
    }

    pub fn total_weight(&self) -> u64 {
        self.points.iter().map(|p| p.weight).sum()
    }

    pub fn with_weights(&self, weights: &[u64]) -> Self {
        let points = self
            .points
            .iter()
            .zip(weights)
            .map(|(p, &weight)| Point { weight, ..*p })
            .collect();
        Self {
            root: self.root,
            points,
        }
    }

    /// Pairwise Euclidean distances.
    pub fn distances(&self) -> Vec<Vec<f64>> {
        self.points
            .iter()
            .map(|p| self.points.iter().map(|q| p.dist(q)).collect())
            .collect()
    }

    /// Complete graph with lengths `round(dist · scale)`; vertex ids are the
    /// point indices.
    pub fn to_graph(&self, scale: f64) -> Result<Instance> {
        let n = self.n();
        let ids = (0..n).map(|i| i.to_string()).collect();
        let dist: Vec<Vec<u64>> = self
            .distances()
            .iter()
            .map(|row| row.iter().map(|d| (d * scale).round() as u64).collect())
            .collect();
        Instance::complete(ids, self.weights(), &dist, self.root)
    }

    /// Seeded instance with `n` points in `[0, side)²`, root 0 with weight 0,
    /// other weights uniform in `1..=max_weight`.
    pub fn random(n: usize, side: f64, max_weight: u64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points = (0..n)
            .map(|i| Point {
                x: rng.gen_range(0.0..side),
                y: rng.gen_range(0.0..side),
                weight: if i == 0 { 0 } else { rng.gen_range(1..=max_weight) },
            })
            .collect();
        Self { root: 0, points }
    }
}

/// Visiting order of a pattern on a point graph: each entry is `(from, to)`
/// with `from` already explored.
pub fn pattern_steps(graph: &Instance, pat: &SearchPattern) -> Vec<(usize, usize)> {
    let mut seen = vec![false; graph.n()];
    seen[graph.root()] = true;
    pat.edges()
        .iter()
        .map(|&e| {
            let edge = graph.edge(e);
            let (from, to) = if seen[edge.u] { (edge.u, edge.v) } else { (edge.v, edge.u) };
            seen[to] = true;
            (from, to)
        })
        .collect()
}

/// Pattern on the complete point graph from `(from, to)` steps.
pub fn pattern_from_steps(graph: &Instance, steps: &[(usize, usize)]) -> Result<SearchPattern> {
    steps
        .iter()
        .map(|&(u, v)| {
            graph
                .edge_between(u, v)
                .ok_or_else(|| EspError::Solver(format!("no edge between {u} and {v}")))
        })
        .collect::<Result<Vec<_>>>()
        .map(SearchPattern::new)
}

/// Real-valued latencies of a pattern given as steps under metric `dist`.
pub fn step_latencies(n: usize, root: usize, steps: &[(usize, usize)], dist: &[Vec<f64>]) -> Vec<Option<f64>> {
    let mut lat = vec![None; n];
    lat[root] = Some(0.0);
    let mut clock = 0.0;
    for &(u, v) in steps {
        clock += dist[u][v];
        lat[v] = Some(clock);
    }
    lat
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let text = r#"{"root": 0, "points": [{"x": 0, "y": 0}, {"x": 3, "y": 4, "weight": 2}]}"#;
        let inst = EuclideanInstance::from_json_str(text).unwrap();
        assert_eq!(inst.points[0].weight, 0);
        assert_eq!(inst.distances()[0][1], 5.0);
        let back = EuclideanInstance::from_json_str(&inst.to_json_string()).unwrap();
        assert_eq!(back, inst);
        let g = inst.to_graph(10.0).unwrap();
        assert_eq!(g.edge(0).length, 50);
    }

    #[test]
    fn rejects_bad_root() {
        assert!(EuclideanInstance::from_json_str(r#"{"root": 2, "points": [{"x": 0, "y": 0}]}"#).is_err());
    }

    #[test]
    fn random_is_seeded() {
        assert_eq!(EuclideanInstance::random(6, 10.0, 3, 7), EuclideanInstance::random(6, 10.0, 3, 7));
        assert_ne!(EuclideanInstance::random(6, 10.0, 3, 7), EuclideanInstance::random(6, 10.0, 3, 8));
    }
}
