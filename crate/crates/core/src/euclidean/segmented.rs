//! Segmented expanding search on a metric given as a distance matrix.
//!
//! A segmented solution comes with breakpoints `0 = t⁰ ≤ t¹ ≤ … ≤ tᵏ`; each
//! vertex is charged the smallest breakpoint at or after its latency.

use serde::Serialize;

use crate::error::{EspError, Result};

/// Slack for comparing accumulated float lengths against breakpoints.
const TIME_EPS: f64 = 1e-9;

fn le(a: f64, b: f64) -> bool {
    a <= b + TIME_EPS * (1.0 + b.abs())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SegmentedSolution {
    /// Exploration steps `(from, to)`.
    pub steps: Vec<(usize, usize)>,
    /// `t⁰ = 0, t¹, …, tᵏ`.
    pub breakpoints: Vec<f64>,
    /// Segment index (into `breakpoints`) in which each step finishes.
    pub step_segments: Vec<usize>,
    /// C̄(σ).
    pub objective: f64,
}

/// Smallest breakpoint ≥ `time`, if any.
pub fn round_up(time: f64, breakpoints: &[f64]) -> Option<f64> {
    breakpoints.iter().copied().find(|&t| le(time, t))
}

/// C̄(σ) for given latencies; `None` if a weighted vertex is unexplored or
/// later than the last breakpoint.
pub fn rounded_objective(weights: &[u64], latencies: &[Option<f64>], breakpoints: &[f64]) -> Option<f64> {
    let mut total = 0.0;
    for (v, &w) in weights.iter().enumerate() {
        if w == 0 {
            continue;
        }
        total += w as f64 * round_up(latencies[v]?, breakpoints)?;
    }
    Some(total)
}

/// Extends vertex set `from` to `to ⊇ from` by a minimum spanning forest of
/// `to` with `from` contracted. Returns the length and the steps in Prim order.
pub fn extension(dist: &[Vec<f64>], from: usize, to: usize) -> (f64, Vec<(usize, usize)>) {
    let n = dist.len();
    let mut best = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    for v in 0..n {
        if to >> v & 1 == 1 && from >> v & 1 == 0 {
            for u in 0..n {
                if from >> u & 1 == 1 && dist[u][v] < best[v] {
                    best[v] = dist[u][v];
                    parent[v] = u;
                }
            }
        }
    }
    let mut inside = from;
    let mut total = 0.0;
    let mut steps = Vec::new();
    while inside != to {
        let v = (0..n)
            .filter(|&v| to >> v & 1 == 1 && inside >> v & 1 == 0)
            .min_by(|&a, &b| best[a].total_cmp(&best[b]).then(a.cmp(&b)))
            .expect("a vertex remains outside");
        inside |= 1 << v;
        total += best[v];
        steps.push((parent[v], v));
        for u in 0..n {
            if to >> u & 1 == 1 && inside >> u & 1 == 0 && dist[v][u] < best[u] {
                best[u] = dist[v][u];
                parent[u] = v;
            }
        }
    }
    (total, steps)
}

fn check_size(n: usize, limit: usize) -> Result<()> {
    if n > limit {
        return Err(EspError::TooLarge {
            what: "points for segmented dynamic program",
            actual: n,
            limit,
        });
    }
    Ok(())
}

pub const SEGMENTED_LIMIT: usize = 12;

/// Optimal segmented solution with `kappa` freely chosen breakpoints.
///
/// With explored sets `S₀ ⊂ … ⊂ Sₖ`, the objective telescopes to
/// `Σ_h ext(S_{h-1} → S_h) · (W − w(S_{h-1}))`, so the DP runs over vertex
/// sets with the segment count as the stage.
pub fn segmented_optimum_free(
    dist: &[Vec<f64>],
    weights: &[u64],
    root: usize,
    kappa: usize,
) -> Result<SegmentedSolution> {
    let n = dist.len();
    check_size(n, SEGMENTED_LIMIT)?;
    let full = (1usize << n) - 1;
    let root_bit = 1usize << root;
    let needed: usize = (0..n).filter(|&v| weights[v] > 0).map(|v| 1 << v).sum();
    let total: u64 = weights.iter().sum();
    let mut wsum = vec![0u64; 1 << n];
    for mask in 1..=full {
        let low = mask.trailing_zeros() as usize;
        wsum[mask] = wsum[mask & (mask - 1)] + weights[low];
    }
    let sets: Vec<usize> = (0..=full).filter(|m| m & root_bit != 0).collect();

    // Stage 0: everything reachable from the root at zero length.
    let mut dp = vec![f64::INFINITY; 1 << n];
    for &s in &sets {
        if extension(dist, root_bit, s).0 == 0.0 {
            dp[s] = 0.0;
        }
    }
    let mut back: Vec<Vec<usize>> = vec![vec![usize::MAX; 1 << n]];
    let mut stages = vec![dp.clone()];
    for _ in 1..=kappa {
        let prev = stages.last().unwrap();
        let mut cur = prev.clone();
        let mut arg: Vec<usize> = sets.iter().fold(vec![usize::MAX; 1 << n], |mut a, &s| {
            a[s] = s;
            a
        });
        for &s in &sets {
            // Proper subsets of s that contain the root.
            let rest = s & !root_bit;
            let mut sub = rest;
            loop {
                let from = sub | root_bit;
                if from != s && prev[from].is_finite() {
                    let (len, _) = extension(dist, from, s);
                    let cost = prev[from] + len * (total - wsum[from]) as f64;
                    if cost < cur[s] - TIME_EPS * (1.0 + cost.abs()) {
                        cur[s] = cost;
                        arg[s] = from;
                    }
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & rest;
            }
        }
        back.push(arg);
        stages.push(cur);
    }
    let last = &stages[kappa];
    let best = sets
        .iter()
        .copied()
        .filter(|&s| s & needed == needed && last[s].is_finite())
        .min_by(|&a, &b| last[a].total_cmp(&last[b]).then(a.count_ones().cmp(&b.count_ones())))
        .ok_or_else(|| EspError::Solver("no segmented solution covers the weighted points".into()))?;

    // Walk back through the stages.
    let mut chain = vec![best];
    let mut s = best;
    for h in (1..=kappa).rev() {
        let from = back[h][s];
        chain.push(from);
        s = from;
    }
    chain.reverse();
    let mut steps = Vec::new();
    let mut step_segments = Vec::new();
    let mut breakpoints = vec![0.0];
    let (_, zero_steps) = extension(dist, root_bit, chain[0]);
    step_segments.extend(std::iter::repeat_n(0, zero_steps.len()));
    steps.extend(zero_steps);
    let mut clock = 0.0;
    for h in 1..chain.len() {
        let (len, seg) = extension(dist, chain[h - 1], chain[h]);
        clock += len;
        breakpoints.push(clock);
        step_segments.extend(std::iter::repeat_n(h, seg.len()));
        steps.extend(seg);
    }
    Ok(SegmentedSolution {
        steps,
        breakpoints,
        step_segments,
        objective: last[best],
    })
}

/// Optimal pattern for fixed breakpoints, by a Pareto DP over
/// (explored set, elapsed length, charged cost).
pub fn segmented_optimum_fixed(
    dist: &[Vec<f64>],
    weights: &[u64],
    root: usize,
    breakpoints: &[f64],
) -> Result<SegmentedSolution> {
    let n = dist.len();
    check_size(n, SEGMENTED_LIMIT)?;
    if breakpoints.first() != Some(&0.0) || breakpoints.windows(2).any(|w| w[0] > w[1]) {
        return Err(EspError::Parameter(
            "breakpoints must start at 0 and be non-decreasing".into(),
        ));
    }
    let full = (1usize << n) - 1;
    let root_bit = 1usize << root;
    let needed: usize = (0..n).filter(|&v| weights[v] > 0).map(|v| 1 << v).sum();
    let last_t = *breakpoints.last().unwrap();

    // Label: (time, cost, predecessor mask, predecessor label index, step).
    type Label = (f64, f64, usize, usize, (usize, usize));
    let mut labels: Vec<Vec<Label>> = vec![Vec::new(); 1 << n];
    labels[root_bit].push((0.0, 0.0, usize::MAX, usize::MAX, (root, root)));
    let mut order: Vec<usize> = (0..=full).filter(|m| m & root_bit != 0).collect();
    order.sort_by_key(|m| m.count_ones());
    let mut best: Option<(f64, usize, usize)> = None;
    for &mask in &order {
        let mut list = std::mem::take(&mut labels[mask]);
        // Pareto filter: increasing time, strictly decreasing cost.
        list.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let mut kept: Vec<Label> = Vec::new();
        for l in list {
            if kept.last().is_none_or(|k| l.1 < k.1 - TIME_EPS * (1.0 + k.1.abs())) {
                kept.push(l);
            }
        }
        labels[mask] = kept;
        if mask & needed == needed {
            for (i, l) in labels[mask].iter().enumerate() {
                if best.is_none_or(|(c, _, _)| l.1 < c) {
                    best = Some((l.1, mask, i));
                }
            }
            continue;
        }
        for v in 0..n {
            if mask >> v & 1 == 1 {
                continue;
            }
            let (u, c) = (0..n)
                .filter(|&u| mask >> u & 1 == 1)
                .map(|u| (u, dist[u][v]))
                .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
                .expect("mask contains the root");
            let next = mask | 1 << v;
            for i in 0..labels[mask].len() {
                let (time, cost, ..) = labels[mask][i];
                let t = time + c;
                let charged = if weights[v] == 0 {
                    0.0
                } else {
                    match round_up(t, breakpoints) {
                        Some(r) => weights[v] as f64 * r,
                        None => continue,
                    }
                };
                if !le(t, last_t) && weights[v] == 0 && (needed & !next) != 0 {
                    continue;
                }
                labels[next].push((t, cost + charged, mask, i, (u, v)));
            }
        }
    }
    let (objective, mut mask, mut i) =
        best.ok_or_else(|| EspError::Solver("breakpoints too short for any pattern".into()))?;
    let mut steps = Vec::new();
    let mut times = Vec::new();
    while labels[mask][i].2 != usize::MAX {
        let (t, _, pm, pi, step) = labels[mask][i];
        steps.push(step);
        times.push(t);
        mask = pm;
        i = pi;
    }
    steps.reverse();
    times.reverse();
    let step_segments = times
        .iter()
        .map(|&t| {
            breakpoints
                .iter()
                .position(|&b| le(t, b))
                .unwrap_or(breakpoints.len())
        })
        .collect();
    Ok(SegmentedSolution {
        steps,
        breakpoints: breakpoints.to_vec(),
        step_segments,
        objective,
    })
}

/// Breakpoints for a delay-bounded instance with delay `delay`, in the plain
/// latency frame: `t⁽ⁱ⁾ = delay·((1+ε)^i − 1)` while `delay·(1+ε)^i` stays
/// within `horizon·(1+δ)·delay`.
pub fn bounded_breakpoints(delay: f64, delta: f64, epsilon: f64, horizon: f64) -> Result<Vec<f64>> {
    if !(delay > 0.0 && epsilon > 0.0 && delta >= 0.0 && horizon > 0.0) {
        return Err(EspError::Parameter(
            "bounded breakpoints need positive delay, ε and horizon".into(),
        ));
    }
    let limit = horizon * (1.0 + delta) * delay;
    let mut out = Vec::new();
    let mut shifted = delay;
    while le(shifted, limit) {
        out.push(shifted - delay);
        shifted *= 1.0 + epsilon;
    }
    if out.is_empty() {
        out.push(0.0);
    }
    Ok(out)
}

/// Solves a delay-bounded instance through the segmented problem with
/// geometric breakpoints. `solve` receives the breakpoints.
pub fn bounded_to_segmented(
    delay: f64,
    delta: f64,
    epsilon: f64,
    horizon: f64,
    solve: impl FnOnce(&[f64]) -> Result<SegmentedSolution>,
) -> Result<SegmentedSolution> {
    let breakpoints = bounded_breakpoints(delay, delta, epsilon, horizon)?;
    solve(&breakpoints)
}
