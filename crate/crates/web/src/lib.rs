//! Browser demo bindings. Every export takes and returns JSON text so the
//! same functions can be exercised natively; failures come back as
//! `{"error": "..."}`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use expanding_search::euclidean::decompose::{derandomize_shift, DecomposeConfig, SegmentedBounded};
use expanding_search::euclidean::portal_dp::{solve_on_metric, Breakpoints, PortalConfig, PortalMetric};
use expanding_search::euclidean::quadtree::{grid_round, max_shift, RoundedInstance};
use expanding_search::euclidean::segmented::segmented_optimum_free;
use expanding_search::euclidean::{pattern_steps, EuclideanInstance};
use expanding_search::hardness::{
    build_gadget, extract_best_steiner, hardness_ratio, steiner_optimum, structure_pattern, Gadget, St12Instance,
};
use expanding_search::oracles::brute_force_esp_with_limit;
use expanding_search::{total_latency, SearchPattern};

/// Brute force is only attempted up to this many points.
const BRUTE_LIMIT: usize = 9;

fn respond(result: Result<Value, String>) -> String {
    result.unwrap_or_else(|e| json!({ "error": e })).to_string()
}

/// Decomposition with the derandomized shift, plus the exact optimum when
/// the instance is small enough.
#[wasm_bindgen]
pub fn solve_points(instance_json: &str, epsilon: f64) -> String {
    respond(solve_points_impl(instance_json, epsilon))
}

fn solve_points_impl(instance_json: &str, epsilon: f64) -> Result<Value, String> {
    let inst = EuclideanInstance::from_json_str(instance_json).map_err(|e| e.to_string())?;
    let cfg = DecomposeConfig::new(epsilon);
    let solver = SegmentedBounded::new(epsilon);
    let sweep = derandomize_shift(&inst, &cfg, &solver, None).map_err(|e| e.to_string())?;
    let graph = inst.to_graph(cfg.scale).map_err(|e| e.to_string())?;
    let best = &sweep.best;
    let report = total_latency(&graph, &best.pattern).map_err(|e| e.to_string())?;
    let latencies: Vec<Option<f64>> = report.latencies.iter().map(|l| l.map(|l| l as f64 / cfg.scale)).collect();
    let optimum = (inst.n() <= BRUTE_LIMIT)
        .then(|| brute_force_esp_with_limit(&graph, BRUTE_LIMIT).ok())
        .flatten()
        .map(|b| json!({
            "latency": b.latency as f64 / cfg.scale,
            "steps": pattern_steps(&graph, &b.pattern),
        }));
    Ok(json!({
        "steps": pattern_steps(&graph, &best.pattern),
        "latency": best.latency as f64 / cfg.scale,
        "latencies": latencies,
        "classes": best.classes,
        "shift": best.shift,
        "shifts_tried": sweep.tried.len(),
        "phases": best.phases.iter().map(|p| json!({
            "class": p.class,
            "t": p.t,
            "length": p.length,
            "length_bound": p.length_bound,
            "worst_splice": p.worst_splice,
        })).collect::<Vec<_>>(),
        "optimum": optimum,
    }))
}

/// Quadtree, portals and the portal-respecting segmented optimum for one
/// shift. Coordinates are in input units.
#[wasm_bindgen]
pub fn portal_view(instance_json: &str, epsilon: f64, shift_x: i32, shift_y: i32, kappa: u32) -> String {
    respond(portal_view_impl(instance_json, epsilon, (shift_x as i64, shift_y as i64), kappa as usize))
}

fn portal_view_impl(instance_json: &str, epsilon: f64, shift: (i64, i64), kappa: usize) -> Result<Value, String> {
    let inst = EuclideanInstance::from_json_str(instance_json).map_err(|e| e.to_string())?;
    let cfg = PortalConfig::default();
    let rounded = grid_round(&inst, epsilon, cfg.quadtree.c_g).map_err(|e| e.to_string())?;
    let bound = max_shift(&rounded);
    let shift = (shift.0.clamp(-bound, bound), shift.1.clamp(-bound, bound));
    let metric = PortalMetric::build(&rounded, shift, &cfg, epsilon).map_err(|e| e.to_string())?;
    let sol = solve_on_metric(&metric, &rounded, &Breakpoints::Free(kappa.max(1))).map_err(|e| e.to_string())?;
    let exact = segmented_optimum_free(&rounded.to_instance().distances(), &rounded.weights, rounded.root, kappa.max(1))
        .map_err(|e| e.to_string())?;

    let tables = &metric.tables;
    let tree = &tables.tree;
    let k = tree.portals as f64;
    let fine = |p: (i64, i64)| to_input(&rounded, p.0 as f64 / k, p.1 as f64 / k);
    let cells: Vec<Value> = tree
        .cells
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.locations.is_empty())
        .map(|(i, c)| {
            let (x, y) = to_input(&rounded, c.x0 as f64, c.y0 as f64);
            json!({ "x": x, "y": y, "side": c.side as f64 * rounded.g, "depth": c.depth, "dp": tables.is_within(i, tables.top) })
        })
        .collect();
    let portals: Vec<(f64, f64)> = tables
        .cells_with_tables()
        .filter(|&c| !tree.cells[c].is_leaf())
        .flat_map(|c| tree.boundary_portals(c))
        .map(fine)
        .collect();
    let routes: Vec<Vec<(f64, f64)>> = sol
        .step_pieces
        .iter()
        .map(|pieces| {
            let mut line: Vec<(f64, f64)> = pieces.first().map(|p| fine(p.from)).into_iter().collect();
            line.extend(pieces.iter().map(|p| fine(p.to)));
            line
        })
        .collect();
    Ok(json!({
        "shift": shift,
        "max_shift": bound,
        "grid": rounded.g,
        "portals_per_side": tree.portals,
        "cap": tables.cap,
        "cells": cells,
        "portals": portals,
        "rounded": rounded.to_instance().points.iter().map(|p| (p.x, p.y)).collect::<Vec<_>>(),
        "steps": sol.solution.steps,
        "segments": sol.solution.step_segments,
        "routes": routes,
        "breakpoints": sol.solution.breakpoints,
        "objective": sol.solution.objective,
        "exact_objective": exact.objective,
    }))
}

fn to_input(rounded: &RoundedInstance, gx: f64, gy: f64) -> (f64, f64) {
    (rounded.origin.0 + gx * rounded.g, rounded.origin.1 + gy * rounded.g)
}

/// Builds the gadget, explores it copy by copy in round robin, structures
/// that pattern and extracts the per-copy Steiner trees.
#[wasm_bindgen]
pub fn structure_gadget(st12_json: &str, copies: u32) -> String {
    respond(structure_gadget_impl(st12_json, copies as usize))
}

fn structure_gadget_impl(st12_json: &str, copies: usize) -> Result<Value, String> {
    let st = St12Instance::from_json_str(st12_json).map_err(|e| e.to_string())?;
    let g = build_gadget(&st, copies).map_err(|e| e.to_string())?;
    let before = round_robin(&g);
    let after = structure_pattern(&g, &before).map_err(|e| e.to_string())?;
    let latency = |p: &SearchPattern| total_latency(&g.instance, p).map(|r| r.total).map_err(|e| e.to_string());
    let extraction = extract_best_steiner(&g, &after).map_err(|e| e.to_string())?;
    let (optimum, optimal_tree) = steiner_optimum(&st).map_err(|e| e.to_string())?;
    let one = BigRational::from_integer(BigInt::from(1));
    let curve: Vec<(u64, f64)> = (2..=12u64)
        .filter_map(|k| Some((k, hardness_ratio(&one, k).ok()?.to_f64()?)))
        .collect();
    Ok(json!({
        "n": st.n(),
        "terminals": st.terminals(),
        "a": g.a,
        "before": timeline(&g, &before),
        "after": timeline(&g, &after),
        "latency_before": latency(&before)?,
        "latency_after": latency(&after)?,
        "copy_order": extraction.order,
        "copy_costs": extraction.costs,
        "best_tree": extraction.best_tree(),
        "lower_bound": extraction.latency_lower_bound(g.a, st.terminals().len() as u64),
        "steiner_optimum": optimum,
        "optimal_tree": optimal_tree,
        "ratio_curve": curve,
    }))
}

/// Deliberately unstructured: each copy in turn takes its cheapest frontier
/// edge until all of its terminals are explored.
fn round_robin(g: &Gadget) -> SearchPattern {
    let inst = &g.instance;
    let mut seen = vec![false; inst.n()];
    seen[inst.root()] = true;
    let done = |seen: &[bool], c: usize| (0..g.st.n()).all(|u| !g.st.is_terminal(u) || seen[g.vertex(c, u)]);
    let mut edges = Vec::new();
    while (0..g.k).any(|c| !done(&seen, c)) {
        for c in 0..g.k {
            if done(&seen, c) {
                continue;
            }
            let next = (0..inst.m())
                .filter(|&e| g.copy_of_edge(e) == c && seen[inst.edge(e).u] != seen[inst.edge(e).v])
                .min_by_key(|&e| (inst.edge(e).length, e));
            if let Some(e) = next {
                seen[inst.edge(e).u] = true;
                seen[inst.edge(e).v] = true;
                edges.push(e);
            }
        }
    }
    SearchPattern::new(edges)
}

/// One entry per step: copy, length and whether it reached a terminal.
fn timeline(g: &Gadget, pat: &SearchPattern) -> Vec<Value> {
    let inst = &g.instance;
    let mut seen = vec![false; inst.n()];
    seen[inst.root()] = true;
    pat.edges()
        .iter()
        .map(|&e| {
            let edge = inst.edge(e);
            let to = if seen[edge.u] { edge.v } else { edge.u };
            seen[to] = true;
            json!({ "copy": g.copy_of_edge(e), "length": edge.length, "terminal": g.is_terminal(to), "root_edge": g.is_root_edge(e) })
        })
        .collect()
}
