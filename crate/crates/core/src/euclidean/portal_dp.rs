//! Portal-respecting segmented dynamic program.
//!
//! Level one works per quadtree cell, bottom-up: for every pair of interface
//! nodes (boundary portals and occupied locations) it stores the shortest
//! path inside the cell that crosses the boundaries between its children only
//! at their portals, at most `cap` times. Leaves use straight pieces. Level
//! two runs the segmented DP on the resulting metric between points. The
//! per-cell keys (in-cell length and crossings per segment) are read off the
//! recovered paths.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::sync::Arc;

use serde::Serialize;

use super::quadtree::{build_quadtree, grid_round, portal_subdivisions, QuadtreeConfig, RoundedInstance, ShiftedQuadtree};
use super::segmented::{segmented_optimum_fixed, segmented_optimum_free, SegmentedSolution};
use super::EuclideanInstance;
use crate::error::{EspError, Result};

const INF: u64 = u64::MAX;

#[derive(Clone, Debug, PartialEq)]
pub struct PortalConfig {
    pub quadtree: QuadtreeConfig,
    /// Crossing cap is `⌈c_m · log₂ n / ε⌉` unless `cap` overrides it.
    pub c_m: f64,
    /// Integer lengths are `⌈dist · res⌉` in fine units.
    pub res: u64,
    pub portals: Option<u64>,
    pub cap: Option<usize>,
    pub shift: (i64, i64),
}

impl Default for PortalConfig {
    fn default() -> Self {
        Self {
            quadtree: QuadtreeConfig::default(),
            c_m: 2.0,
            res: 4,
            portals: None,
            cap: None,
            shift: (0, 0),
        }
    }
}

impl PortalConfig {
    pub fn portals_for(&self, n: usize, epsilon: f64) -> u64 {
        self.portals
            .unwrap_or_else(|| portal_subdivisions(n, epsilon, self.quadtree.c_p))
    }

    pub fn cap_for(&self, n: usize, epsilon: f64) -> usize {
        self.cap.unwrap_or_else(|| {
            let n = n.max(2) as f64;
            (self.c_m * n.log2() / epsilon).ceil() as usize
        })
    }
}

/// One piece of a recovered path: a straight segment inside a leaf.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Piece {
    pub leaf: usize,
    pub from: (i64, i64),
    pub to: (i64, i64),
    pub length: u64,
}

#[derive(Clone, Debug)]
struct Hop {
    child: usize,
    from: usize,
    to: usize,
}

#[derive(Clone, Debug)]
struct CellTable {
    nodes: Vec<(i64, i64)>,
    index: HashMap<(i64, i64), usize>,
    /// Row-major `nodes.len()²` distances.
    dist: Arc<Vec<u64>>,
    /// Child hops realizing each entry; empty for leaves.
    paths: Vec<Vec<Hop>>,
}

impl CellTable {
    fn size(&self) -> usize {
        self.nodes.len()
    }

    fn get(&self, a: usize, b: usize) -> u64 {
        self.dist[a * self.size() + b]
    }
}

fn straight(a: (i64, i64), b: (i64, i64), res: u64) -> u64 {
    let d = ((a.0 - b.0) as f64).hypot((a.1 - b.1) as f64) * res as f64;
    (d - 1e-9).ceil().max(0.0) as u64
}

/// Interface nodes of a cell: its portals, then its locations.
fn interface(tree: &ShiftedQuadtree, cell: usize) -> (Vec<(i64, i64)>, HashMap<(i64, i64), usize>) {
    let mut nodes = tree.boundary_portals(cell);
    for &loc in &tree.cells[cell].locations {
        nodes.push(tree.location_fine(loc));
    }
    let mut index = HashMap::with_capacity(nodes.len());
    let mut uniq = Vec::with_capacity(nodes.len());
    for p in nodes {
        if let std::collections::hash_map::Entry::Vacant(e) = index.entry(p) {
            e.insert(uniq.len());
            uniq.push(p);
        }
    }
    (uniq, index)
}

/// Per-cell portal tables for a quadtree, plus the metric between locations.
pub struct PortalTables {
    pub tree: ShiftedQuadtree,
    pub res: u64,
    pub cap: usize,
    /// Highest cell with two non-empty children; tables exist for its subtree.
    pub top: usize,
    tables: HashMap<usize, CellTable>,
}

impl PortalTables {
    pub fn build(tree: ShiftedQuadtree, res: u64, cap: usize) -> Self {
        let mut top = tree.root();
        loop {
            let cell = &tree.cells[top];
            let busy: Vec<usize> = cell
                .children
                .iter()
                .copied()
                .filter(|&c| !tree.cells[c].locations.is_empty())
                .collect();
            if busy.len() == 1 {
                top = busy[0];
            } else {
                break;
            }
        }
        let mut order = vec![top];
        let mut i = 0;
        while i < order.len() {
            order.extend(tree.cells[order[i]].children.iter().copied());
            i += 1;
        }
        let mut leaf_cache: HashMap<i64, Arc<Vec<u64>>> = HashMap::new();
        let mut tables = HashMap::new();
        for &c in order.iter().rev() {
            let table = if tree.cells[c].is_leaf() {
                leaf_table(&tree, c, res, &mut leaf_cache)
            } else {
                internal_table(&tree, c, cap, &tables)
            };
            tables.insert(c, table);
        }
        Self {
            tree,
            res,
            cap,
            top,
            tables,
        }
    }

    /// Integer length of the portal-respecting path between two locations.
    pub fn location_distance(&self, a: usize, b: usize) -> u64 {
        if a == b {
            return 0;
        }
        let t = &self.tables[&self.top];
        let ia = t.index[&self.tree.location_fine(a)];
        let ib = t.index[&self.tree.location_fine(b)];
        t.get(ia, ib)
    }

    /// Leaf pieces of the path between two locations.
    pub fn location_path(&self, a: usize, b: usize) -> Vec<Piece> {
        if a == b {
            return Vec::new();
        }
        let t = &self.tables[&self.top];
        let ia = t.index[&self.tree.location_fine(a)];
        let ib = t.index[&self.tree.location_fine(b)];
        let mut out = Vec::new();
        self.expand(self.top, ia, ib, &mut out);
        out
    }

    fn expand(&self, cell: usize, a: usize, b: usize, out: &mut Vec<Piece>) {
        let t = &self.tables[&cell];
        if self.tree.cells[cell].is_leaf() {
            if a != b {
                out.push(Piece {
                    leaf: cell,
                    from: t.nodes[a],
                    to: t.nodes[b],
                    length: t.get(a, b),
                });
            }
            return;
        }
        let size = t.size();
        for hop in &t.paths[a * size + b] {
            self.expand(hop.child, hop.from, hop.to, out);
        }
    }

    pub fn cells_with_tables(&self) -> impl Iterator<Item = usize> + '_ {
        self.tables.keys().copied()
    }

    /// Whether `cell` lies in the subtree of `ancestor`.
    pub fn is_within(&self, mut cell: usize, ancestor: usize) -> bool {
        loop {
            if cell == ancestor {
                return true;
            }
            match self.tree.cells[cell].parent {
                Some(p) => cell = p,
                None => return false,
            }
        }
    }
}

fn leaf_table(
    tree: &ShiftedQuadtree,
    cell: usize,
    res: u64,
    cache: &mut HashMap<i64, Arc<Vec<u64>>>,
) -> CellTable {
    let (nodes, index) = interface(tree, cell);
    let n = nodes.len();
    let empty = tree.cells[cell].locations.is_empty();
    let dist = if empty {
        cache
            .entry(tree.cells[cell].side)
            .or_insert_with(|| Arc::new(straight_matrix(&nodes, res)))
            .clone()
    } else {
        Arc::new(straight_matrix(&nodes, res))
    };
    debug_assert_eq!(dist.len(), n * n);
    CellTable {
        nodes,
        index,
        dist,
        paths: Vec::new(),
    }
}

fn straight_matrix(nodes: &[(i64, i64)], res: u64) -> Vec<u64> {
    let n = nodes.len();
    let mut d = vec![0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let v = straight(nodes[i], nodes[j], res);
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    d
}

fn internal_table(
    tree: &ShiftedQuadtree,
    cell: usize,
    cap: usize,
    tables: &HashMap<usize, CellTable>,
) -> CellTable {
    let (nodes, index) = interface(tree, cell);
    let children = &tree.cells[cell].children;

    // Union graph over the children's interface nodes.
    let mut union_nodes: Vec<(i64, i64)> = Vec::new();
    let mut union_index: HashMap<(i64, i64), usize> = HashMap::new();
    // memberships[u] = (child slot, local index)
    let mut memberships: Vec<Vec<(usize, usize)>> = Vec::new();
    for (slot, &ch) in children.iter().enumerate() {
        for (local, &p) in tables[&ch].nodes.iter().enumerate() {
            let u = *union_index.entry(p).or_insert_with(|| {
                union_nodes.push(p);
                memberships.push(Vec::new());
                union_nodes.len() - 1
            });
            memberships[u].push((slot, local));
        }
    }
    let locals: Vec<Vec<usize>> = children
        .iter()
        .map(|&ch| tables[&ch].nodes.iter().map(|p| union_index[p]).collect())
        .collect();
    let k = tree.portals as i64;
    let c = &tree.cells[cell];
    let (mx, my) = ((c.x0 + c.side / 2) * k, (c.y0 + c.side / 2) * k);
    let crossing: Vec<bool> = union_nodes
        .iter()
        .map(|&p| !tree.on_boundary(cell, p) && (p.0 == mx || p.1 == my))
        .collect();

    let graph = UnionGraph {
        children,
        tables: children.iter().map(|ch| &tables[ch]).collect(),
        memberships: &memberships,
        locals: &locals,
        crossing: &crossing,
    };
    let size = nodes.len();
    let mut dist = vec![INF; size * size];
    let mut paths = vec![Vec::new(); size * size];
    let targets: Vec<usize> = nodes.iter().map(|p| union_index[p]).collect();
    // Distances are symmetric, so each source only needs the later targets.
    for a in 0..size {
        let src = targets[a];
        let later = &targets[a..];
        let mut run = graph.dijkstra(src, later);
        if later.iter().any(|&t| run.hops[t] != u32::MAX && run.hops[t] as usize > cap) {
            run = graph.capped(src, cap);
        }
        for (b, &t) in targets.iter().enumerate().skip(a) {
            dist[a * size + b] = run.len[t];
            dist[b * size + a] = run.len[t];
            if a != b && run.len[t] != INF {
                let forward = run.path_to(t);
                let backward = forward
                    .iter()
                    .rev()
                    .map(|h| Hop {
                        child: h.child,
                        from: h.to,
                        to: h.from,
                    })
                    .collect();
                paths[a * size + b] = forward;
                paths[b * size + a] = backward;
            }
        }
    }
    CellTable {
        nodes,
        index,
        dist: Arc::new(dist),
        paths,
    }
}

struct UnionGraph<'a> {
    children: &'a [usize],
    tables: Vec<&'a CellTable>,
    memberships: &'a [Vec<(usize, usize)>],
    locals: &'a [Vec<usize>],
    crossing: &'a [bool],
}

struct Run {
    len: Vec<u64>,
    hops: Vec<u32>,
    // Predecessor hop into each reached node: (previous node, child slot, local from, local to).
    pred: Vec<Option<(usize, usize, usize, usize)>>,
    explicit: Option<HashMap<usize, Vec<Hop>>>,
    children: Vec<usize>,
}

impl Run {
    fn path_to(&self, t: usize) -> Vec<Hop> {
        if let Some(explicit) = &self.explicit {
            return explicit.get(&t).cloned().unwrap_or_default();
        }
        let mut hops = Vec::new();
        let mut v = t;
        while let Some((u, slot, from, to)) = self.pred[v] {
            hops.push(Hop {
                child: self.children[slot],
                from,
                to,
            });
            v = u;
        }
        hops.reverse();
        hops
    }
}

impl UnionGraph<'_> {
    fn edges(&self, u: usize, mut visit: impl FnMut(usize, u64, usize, usize, usize)) {
        for &(slot, lu) in &self.memberships[u] {
            let t = self.tables[slot];
            let size = t.size();
            let row = &t.dist[lu * size..(lu + 1) * size];
            let locals = &self.locals[slot];
            for (lv, &w) in row.iter().enumerate() {
                if lv != lu && w != INF {
                    visit(locals[lv], w, slot, lu, lv);
                }
            }
        }
    }

    /// Lexicographic (length, crossings) shortest paths; stops once every
    /// target is settled.
    fn dijkstra(&self, src: usize, targets: &[usize]) -> Run {
        let n = self.memberships.len();
        let mut len = vec![INF; n];
        let mut hops = vec![u32::MAX; n];
        let mut pred = vec![None; n];
        len[src] = 0;
        hops[src] = 0;
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((0u64, 0u32, src)));
        let mut wanted = vec![false; n];
        let mut left = 0;
        for &t in targets {
            if !wanted[t] {
                wanted[t] = true;
                left += 1;
            }
        }
        while let Some(Reverse((d, h, u))) = heap.pop() {
            if (d, h) > (len[u], hops[u]) {
                continue;
            }
            if wanted[u] {
                wanted[u] = false;
                left -= 1;
                if left == 0 {
                    break;
                }
            }
            self.edges(u, |v, w, slot, lu, lv| {
                let nd = d + w;
                let nh = h + self.crossing[v] as u32;
                if (nd, nh) < (len[v], hops[v]) {
                    len[v] = nd;
                    hops[v] = nh;
                    pred[v] = Some((u, slot, lu, lv));
                    heap.push(Reverse((nd, nh, v)));
                }
            });
        }
        Run {
            len,
            hops,
            pred,
            explicit: None,
            children: self.children.to_vec(),
        }
    }

    /// Shortest paths with at most `cap` crossings, by Dijkstra over
    /// (node, crossings used).
    fn capped(&self, src: usize, cap: usize) -> Run {
        let n = self.memberships.len();
        let layers = cap + 1;
        let idx = |v: usize, h: usize| h * n + v;
        let mut len = vec![INF; n * layers];
        let mut pred: Vec<Option<(usize, usize, usize, usize, usize)>> = vec![None; n * layers];
        len[idx(src, 0)] = 0;
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((0u64, 0usize, src)));
        while let Some(Reverse((d, h, u))) = heap.pop() {
            if d > len[idx(u, h)] {
                continue;
            }
            self.edges(u, |v, w, slot, lu, lv| {
                let nh = h + self.crossing[v] as usize;
                if nh > cap {
                    return;
                }
                let nd = d + w;
                if nd < len[idx(v, nh)] {
                    len[idx(v, nh)] = nd;
                    pred[idx(v, nh)] = Some((u, h, slot, lu, lv));
                    heap.push(Reverse((nd, nh, v)));
                }
            });
        }
        let mut out_len = vec![INF; n];
        let mut out_hops = vec![u32::MAX; n];
        let mut explicit = HashMap::new();
        for v in 0..n {
            let Some(h) = (0..layers).min_by_key(|&h| (len[idx(v, h)], h)) else {
                continue;
            };
            if len[idx(v, h)] == INF {
                continue;
            }
            out_len[v] = len[idx(v, h)];
            out_hops[v] = h as u32;
            let mut hops = Vec::new();
            let (mut x, mut hx) = (v, h);
            while let Some((u, hu, slot, lu, lv)) = pred[idx(x, hx)] {
                hops.push(Hop {
                    child: self.children[slot],
                    from: lu,
                    to: lv,
                });
                x = u;
                hx = hu;
            }
            hops.reverse();
            explicit.insert(v, hops);
        }
        Run {
            len: out_len,
            hops: out_hops,
            pred: vec![None; n],
            explicit: Some(explicit),
            children: self.children.to_vec(),
        }
    }
}

/// Breakpoint handling for the segmented DP.
#[derive(Clone, Debug, PartialEq)]
pub enum Breakpoints {
    /// `κ` breakpoints chosen by the DP.
    Free(usize),
    /// Fixed breakpoints in input units, starting at 0.
    Fixed(Vec<f64>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Crossing {
    /// Fine-unit position on the cell boundary.
    pub portal: (i64, i64),
    pub enter: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SegmentKey {
    /// Integer length of the solution inside the cell during the segment.
    pub length: u64,
    pub crossings: Vec<Crossing>,
}

/// DP entry key of one cell, read off the recovered solution.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DpEntryKey {
    pub cell: usize,
    pub segments: Vec<SegmentKey>,
}

#[derive(Clone, Debug)]
pub struct PortalSolution {
    pub shift: (i64, i64),
    pub portals: u64,
    pub cap: usize,
    /// Input units per integer length unit.
    pub unit: f64,
    /// Steps over input point indices; objective in input units.
    pub solution: SegmentedSolution,
    /// Integer length of every step.
    pub step_lengths: Vec<u64>,
    /// Leaf pieces realizing every step.
    pub step_pieces: Vec<Vec<Piece>>,
    pub keys: Vec<DpEntryKey>,
    pub top: usize,
}

impl PortalSolution {
    pub fn key(&self, cell: usize) -> Option<&DpEntryKey> {
        self.keys.iter().find(|k| k.cell == cell)
    }
}

/// Portal tables for one shift, with their unit and the integer metric
/// between input points.
pub struct PortalMetric {
    pub tables: PortalTables,
    pub unit: f64,
    pub units: Vec<Vec<u64>>,
}

impl PortalMetric {
    pub fn build(rounded: &RoundedInstance, shift: (i64, i64), cfg: &PortalConfig, epsilon: f64) -> Result<Self> {
        if cfg.res == 0 {
            return Err(EspError::Parameter("resolution must be positive".into()));
        }
        let n = rounded.grid_points.len();
        let portals = cfg.portals_for(n, epsilon);
        let cap = cfg.cap_for(n, epsilon);
        let tree = build_quadtree(rounded, shift, portals)?;
        let tables = PortalTables::build(tree, cfg.res, cap);
        let loc = &tables.tree.point_location;
        let units: Vec<Vec<u64>> = (0..n)
            .map(|i| (0..n).map(|j| tables.location_distance(loc[i], loc[j])).collect())
            .collect();
        if units.iter().flatten().any(|&d| d == INF) {
            return Err(EspError::Solver("crossing cap leaves points disconnected".into()));
        }
        let unit = rounded.g / (portals as f64 * cfg.res as f64);
        Ok(Self { tables, unit, units })
    }

    pub fn distances(&self) -> Vec<Vec<f64>> {
        self.units
            .iter()
            .map(|row| row.iter().map(|&d| d as f64 * self.unit).collect())
            .collect()
    }
}

/// Segmented DP on the portal-respecting metric for one shift.
pub fn segmented_portal_dp(
    rounded: &RoundedInstance,
    shift: (i64, i64),
    cfg: &PortalConfig,
    epsilon: f64,
    mode: &Breakpoints,
) -> Result<PortalSolution> {
    let metric = PortalMetric::build(rounded, shift, cfg, epsilon)?;
    solve_on_metric(&metric, rounded, mode)
}

/// The segmented DP on prebuilt portal tables.
pub fn solve_on_metric(metric: &PortalMetric, rounded: &RoundedInstance, mode: &Breakpoints) -> Result<PortalSolution> {
    let dist = metric.distances();
    let solution = match mode {
        Breakpoints::Free(kappa) => segmented_optimum_free(&dist, &rounded.weights, rounded.root, *kappa)?,
        Breakpoints::Fixed(bps) => segmented_optimum_fixed(&dist, &rounded.weights, rounded.root, bps)?,
    };
    let tables = &metric.tables;
    let loc = &tables.tree.point_location;
    let step_lengths: Vec<u64> = solution.steps.iter().map(|&(u, v)| metric.units[u][v]).collect();
    let step_pieces: Vec<Vec<Piece>> = solution
        .steps
        .iter()
        .map(|&(u, v)| tables.location_path(loc[u], loc[v]))
        .collect();
    let segments = solution.breakpoints.len();
    let keys = recover_keys(tables, &step_pieces, &solution.step_segments, segments);
    Ok(PortalSolution {
        shift: tables.tree.shift,
        portals: tables.tree.portals,
        cap: tables.cap,
        unit: metric.unit,
        solution,
        step_lengths,
        step_pieces,
        keys,
        top: tables.top,
    })
}

fn recover_keys(
    tables: &PortalTables,
    step_pieces: &[Vec<Piece>],
    step_segments: &[usize],
    segments: usize,
) -> Vec<DpEntryKey> {
    let mut cells: Vec<usize> = tables.cells_with_tables().collect();
    cells.sort_unstable();
    let mut keys: Vec<DpEntryKey> = cells
        .iter()
        .map(|&cell| DpEntryKey {
            cell,
            segments: vec![SegmentKey::default(); segments],
        })
        .collect();
    let slot: HashMap<usize, usize> = cells.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let chain = |leaf: usize| {
        let mut out = Vec::new();
        let mut c = Some(leaf);
        while let Some(x) = c {
            if let Some(&i) = slot.get(&x) {
                out.push(i);
            }
            c = tables.tree.cells[x].parent;
        }
        out
    };
    for (pieces, &h) in step_pieces.iter().zip(step_segments) {
        let h = h.min(segments - 1);
        for p in pieces {
            for i in chain(p.leaf) {
                keys[i].segments[h].length += p.length;
            }
        }
        for w in pieces.windows(2) {
            let (a, b) = (chain(w[0].leaf), chain(w[1].leaf));
            for &i in a.iter().filter(|i| !b.contains(i)) {
                keys[i].segments[h].crossings.push(Crossing { portal: w[0].to, enter: false });
            }
            for &i in b.iter().filter(|i| !a.contains(i)) {
                keys[i].segments[h].crossings.push(Crossing { portal: w[1].from, enter: true });
            }
        }
    }
    keys
}

/// Runs the DP for every shift and keeps the cheapest; ties go to the
/// earlier shift.
pub fn portal_dp_over_shifts(
    rounded: &RoundedInstance,
    shifts: &[(i64, i64)],
    cfg: &PortalConfig,
    epsilon: f64,
    mode: &Breakpoints,
) -> Result<(PortalSolution, Vec<((i64, i64), f64)>)> {
    let mut best: Option<PortalSolution> = None;
    let mut tried = Vec::with_capacity(shifts.len());
    for &shift in shifts {
        let sol = segmented_portal_dp(rounded, shift, cfg, epsilon, mode)?;
        tried.push((shift, sol.solution.objective));
        if best
            .as_ref()
            .is_none_or(|b| sol.solution.objective < b.solution.objective)
        {
            best = Some(sol);
        }
    }
    let best = best.ok_or_else(|| EspError::Parameter("no shifts to try".into()))?;
    Ok((best, tried))
}

/// Portal-respecting distances between the rounded points of `inst`, in
/// input units, using the configured shift.
pub fn portal_metric(inst: &EuclideanInstance, cfg: &PortalConfig, epsilon: f64) -> Result<Vec<Vec<f64>>> {
    let rounded = grid_round(inst, epsilon, cfg.quadtree.c_g)?;
    Ok(PortalMetric::build(&rounded, cfg.shift, cfg, epsilon)?.distances())
}
