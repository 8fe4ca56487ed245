//! Weight rounding for delay-bounded instances: `w′ = ⌊w / M⌋` with
//! `M = ε/(n + n²δ) · max w`, then unit copies at the same location.

use super::{EuclideanInstance, Point};
use crate::error::{EspError, Result};

#[derive(Clone, Debug)]
pub struct ReducedInstance {
    /// Rounded weights on the original points.
    pub rounded: Vec<u64>,
    /// Unit-weight instance: one copy per unit of rounded weight, plus the
    /// original points with weight 0.
    pub split: EuclideanInstance,
    /// Original point index of every split point.
    pub origin: Vec<usize>,
    pub m: f64,
}

pub fn rounding_unit(inst: &EuclideanInstance, delta: f64, epsilon: f64) -> f64 {
    let n = inst.n() as f64;
    let max_w = inst.points.iter().map(|p| p.weight).max().unwrap_or(0) as f64;
    epsilon / (n + n * n * delta) * max_w
}

/// Rounds weights and splits them into unit copies. Instances whose weights
/// are already in {0, 1} are returned unchanged. Fails when the split would
/// exceed `budget` points.
pub fn reduce_weights_01(
    inst: &EuclideanInstance,
    delta: f64,
    epsilon: f64,
    budget: usize,
) -> Result<ReducedInstance> {
    let m = rounding_unit(inst, delta, epsilon);
    if inst.points.iter().all(|p| p.weight <= 1) {
        return Ok(ReducedInstance {
            rounded: inst.weights(),
            split: inst.clone(),
            origin: (0..inst.n()).collect(),
            m,
        });
    }
    let rounded: Vec<u64> = inst
        .points
        .iter()
        .map(|p| {
            let r = (p.weight as f64 / m).floor();
            if r.is_finite() && r < budget as f64 {
                Ok(r as u64)
            } else {
                Err(EspError::TooLarge {
                    what: "rounded weight",
                    actual: usize::MAX,
                    limit: budget,
                })
            }
        })
        .collect::<Result<_>>()?;
    let copies: u64 = rounded.iter().sum();
    let total = inst.n() as u64 + copies;
    if total > budget as u64 {
        return Err(EspError::TooLarge {
            what: "unit-weight split point count",
            actual: total as usize,
            limit: budget,
        });
    }
    let mut points: Vec<Point> = inst.points.iter().map(|p| Point { weight: 0, ..*p }).collect();
    let mut origin: Vec<usize> = (0..inst.n()).collect();
    for (v, &r) in rounded.iter().enumerate() {
        for _ in 0..r {
            points.push(Point {
                weight: 1,
                ..inst.points[v]
            });
            origin.push(v);
        }
    }
    Ok(ReducedInstance {
        rounded,
        split: EuclideanInstance {
            root: inst.root,
            points,
        },
        origin,
        m,
    })
}
