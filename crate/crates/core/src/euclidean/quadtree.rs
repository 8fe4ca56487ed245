//! Grid rounding and the shifted quadtree dissection with nested portals.
//!
//! Coordinates live on three integer scales: the rounding grid (spacing `g`
//! in input units), and a fine scale with `portals` fine units per grid unit
//! so every portal position is an integer.

use std::collections::BTreeMap;

use serde::Serialize;

use super::EuclideanInstance;
use crate::error::{EspError, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct QuadtreeConfig {
    /// Grid granularity `g = c_g · ε · L / n⁴`.
    pub c_g: f64,
    /// Portal count per side is at least `⌈c_p · log₂ n / ε⌉`.
    pub c_p: f64,
}

impl Default for QuadtreeConfig {
    fn default() -> Self {
        Self { c_g: 1.0, c_p: 2.0 }
    }
}

/// Points snapped to the rounding grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundedInstance {
    /// Grid coordinates of every input point.
    pub grid_points: Vec<(i64, i64)>,
    pub weights: Vec<u64>,
    pub root: usize,
    /// Input coordinates of grid point (0, 0).
    pub origin: (f64, f64),
    /// Grid spacing g in input units.
    pub g: f64,
    /// Side of the bounding square S₀.
    pub l0: f64,
    /// Side of the enlarged square S, `(3n² + 1)·L₀`.
    pub l: f64,
}

impl RoundedInstance {
    /// Input-space position of a grid point.
    pub fn position(&self, p: (i64, i64)) -> (f64, f64) {
        (self.origin.0 + p.0 as f64 * self.g, self.origin.1 + p.1 as f64 * self.g)
    }

    /// The rounded points as a Euclidean instance.
    pub fn to_instance(&self) -> EuclideanInstance {
        let points = self
            .grid_points
            .iter()
            .zip(&self.weights)
            .map(|(&p, &weight)| {
                let (x, y) = self.position(p);
                super::Point { x, y, weight }
            })
            .collect();
        EuclideanInstance {
            root: self.root,
            points,
        }
    }
}

/// Moves every point to its nearest grid point. The grid has spacing
/// `c_g·ε·L/n⁴` and is anchored at the lower-left corner of S₀, the bounding
/// square of all points.
pub fn grid_round(inst: &EuclideanInstance, epsilon: f64, c_g: f64) -> Result<RoundedInstance> {
    if !(epsilon > 0.0 && c_g > 0.0) {
        return Err(EspError::Parameter("ε and c_g must be positive".into()));
    }
    let n = inst.n().max(2) as f64;
    let (mut x_lo, mut y_lo, mut x_hi, mut y_hi) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for p in &inst.points {
        x_lo = x_lo.min(p.x);
        y_lo = y_lo.min(p.y);
        x_hi = x_hi.max(p.x);
        y_hi = y_hi.max(p.y);
    }
    let mut l0 = (x_hi - x_lo).max(y_hi - y_lo);
    if l0 <= 0.0 {
        l0 = 1.0;
    }
    let l = (3.0 * n * n + 1.0) * l0;
    let g = c_g * epsilon * l / n.powi(4);
    let grid_points = inst
        .points
        .iter()
        .map(|p| (((p.x - x_lo) / g).round() as i64, ((p.y - y_lo) / g).round() as i64))
        .collect();
    Ok(RoundedInstance {
        grid_points,
        weights: inst.weights(),
        root: inst.root,
        origin: (x_lo, y_lo),
        g,
        l0,
        l,
    })
}

/// Portal subdivisions per cell side: a power of two that is at least
/// `⌈c_p·log₂ n/ε⌉ − 1`, so the side carries at least `⌈c_p·log₂ n/ε⌉`
/// portals including both corners. Powers of two make portal sets nest.
pub fn portal_subdivisions(n: usize, epsilon: f64, c_p: f64) -> u64 {
    let n = n.max(2) as f64;
    let want = (c_p * n.log2() / epsilon).ceil().max(2.0) as u64 - 1;
    want.max(1).next_power_of_two()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cell {
    /// Lower-left corner in grid units.
    pub x0: i64,
    pub y0: i64,
    /// Side in grid units (a power of two).
    pub side: i64,
    pub depth: usize,
    pub parent: Option<usize>,
    /// Quadrants in the order BL, BR, TL, TR; empty for leaves.
    pub children: Vec<usize>,
    /// Occupied locations inside the half-open square.
    pub locations: Vec<usize>,
}

impl Cell {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    fn contains(&self, p: (i64, i64)) -> bool {
        p.0 >= self.x0 && p.0 < self.x0 + self.side && p.1 >= self.y0 && p.1 < self.y0 + self.side
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ShiftedQuadtree {
    pub shift: (i64, i64),
    /// Side of S′ in grid units.
    pub side: i64,
    /// Fine units per grid unit; equals the portal subdivisions per side.
    pub portals: u64,
    pub cells: Vec<Cell>,
    /// Distinct occupied grid locations.
    pub locations: Vec<(i64, i64)>,
    /// Location index of every input point.
    pub point_location: Vec<usize>,
}

impl ShiftedQuadtree {
    pub fn root(&self) -> usize {
        0
    }

    pub fn depth(&self) -> usize {
        self.cells.iter().map(|c| c.depth).max().unwrap_or(0)
    }

    /// Fine-unit coordinates of a location.
    pub fn location_fine(&self, loc: usize) -> (i64, i64) {
        let p = self.locations[loc];
        let k = self.portals as i64;
        (p.0 * k, p.1 * k)
    }

    /// Portal positions (fine units) on the boundary of `cell`, counter-
    /// clockwise from the lower-left corner. Spacing is `side` fine units.
    pub fn boundary_portals(&self, cell: usize) -> Vec<(i64, i64)> {
        let c = &self.cells[cell];
        let k = self.portals as i64;
        let (x0, y0, s) = (c.x0 * k, c.y0 * k, c.side * k);
        let step = c.side;
        let mut out = Vec::with_capacity(4 * k as usize);
        for i in 0..k {
            out.push((x0 + i * step, y0));
        }
        for i in 0..k {
            out.push((x0 + s, y0 + i * step));
        }
        for i in 0..k {
            out.push((x0 + s - i * step, y0 + s));
        }
        for i in 0..k {
            out.push((x0, y0 + s - i * step));
        }
        out
    }

    /// Whether a fine-unit position lies on the boundary of `cell`.
    pub fn on_boundary(&self, cell: usize, p: (i64, i64)) -> bool {
        let c = &self.cells[cell];
        let k = self.portals as i64;
        let (x0, y0, s) = (c.x0 * k, c.y0 * k, c.side * k);
        let inside = p.0 >= x0 && p.0 <= x0 + s && p.1 >= y0 && p.1 <= y0 + s;
        inside && (p.0 == x0 || p.0 == x0 + s || p.1 == y0 || p.1 == y0 + s)
    }

    /// Leaf cell containing a location.
    pub fn leaf_of(&self, loc: usize) -> usize {
        let mut c = 0;
        while !self.cells[c].is_leaf() {
            c = *self.cells[c]
                .children
                .iter()
                .find(|&&ch| self.cells[ch].locations.contains(&loc))
                .expect("a child holds every location of its parent");
        }
        c
    }
}

/// Smallest power of two ≥ `2L/g + 1`, in grid units.
pub fn enclosing_side(rounded: &RoundedInstance) -> i64 {
    let need = (2.0 * rounded.l / rounded.g + 1.0).ceil() as u64;
    need.next_power_of_two() as i64
}

/// Largest allowed shift magnitude in grid units, `⌊L/(2g)⌋`.
pub fn max_shift(rounded: &RoundedInstance) -> i64 {
    (rounded.l / (2.0 * rounded.g)).floor() as i64
}

/// Dissection of S′ (S enlarged to a power-of-two side, moved by `shift`).
/// A cell is a leaf once it holds at most one occupied location.
pub fn build_quadtree(
    rounded: &RoundedInstance,
    shift: (i64, i64),
    portals: u64,
) -> Result<ShiftedQuadtree> {
    let bound = max_shift(rounded);
    if shift.0.abs() > bound || shift.1.abs() > bound {
        return Err(EspError::Parameter(format!(
            "shift {shift:?} outside ±{bound}"
        )));
    }
    if !portals.is_power_of_two() {
        return Err(EspError::Parameter("portal subdivisions must be a power of two".into()));
    }
    let mut index: BTreeMap<(i64, i64), usize> = BTreeMap::new();
    let mut locations = Vec::new();
    let point_location = rounded
        .grid_points
        .iter()
        .map(|&p| {
            *index.entry(p).or_insert_with(|| {
                locations.push(p);
                locations.len() - 1
            })
        })
        .collect();
    let side = enclosing_side(rounded);
    // Center of S in grid units; S₀ starts at the grid origin.
    let center = ((rounded.l0 / rounded.g) / 2.0).round() as i64;
    let x0 = center - side / 2 + shift.0;
    let y0 = center - side / 2 + shift.1;
    let root = Cell {
        x0,
        y0,
        side,
        depth: 0,
        parent: None,
        children: Vec::new(),
        locations: (0..locations.len()).collect(),
    };
    if locations.iter().any(|&p| !root.contains(p)) {
        return Err(EspError::Solver("a point lies outside the dissection square".into()));
    }
    let mut cells = vec![root];
    let mut stack = vec![0];
    while let Some(c) = stack.pop() {
        if cells[c].locations.len() <= 1 || cells[c].side == 1 {
            continue;
        }
        let (cx, cy, half, depth) = (cells[c].x0, cells[c].y0, cells[c].side / 2, cells[c].depth);
        for (dx, dy) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
            let mut child = Cell {
                x0: cx + dx * half,
                y0: cy + dy * half,
                side: half,
                depth: depth + 1,
                parent: Some(c),
                children: Vec::new(),
                locations: Vec::new(),
            };
            child.locations = cells[c]
                .locations
                .iter()
                .copied()
                .filter(|&l| child.contains(locations[l]))
                .collect();
            let id = cells.len();
            cells.push(child);
            cells[c].children.push(id);
            stack.push(id);
        }
    }
    Ok(ShiftedQuadtree {
        shift,
        side,
        portals,
        cells,
        locations,
        point_location,
    })
}

/// `k × k` shifts: per axis, the centers of `k` equal bins of the
/// `2·max + 1` admissible values. Evenly spaced endpoints would share the
/// power-of-two alignment of the cell sides and cut the points identically.
pub fn shift_grid(rounded: &RoundedInstance, k: usize) -> Vec<(i64, i64)> {
    let bound = max_shift(rounded);
    let span = 2 * bound + 1;
    let k = (k.max(1) as i64).min(span);
    if k == 1 {
        return vec![(0, 0)];
    }
    let coords: Vec<i64> = (0..k).map(|i| -bound + ((2 * i + 1) * span) / (2 * k)).collect();
    let mut out = Vec::with_capacity(coords.len().pow(2));
    for &x in &coords {
        for &y in &coords {
            out.push((x, y));
        }
    }
    out
}
