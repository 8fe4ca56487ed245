//! Turning any gadget pattern into a structured one without increasing its
//! total latency, and reading Steiner trees back out of it.
//!
//! A pattern is structured when every copy is entered from the root exactly
//! once and all edges of a copy (including that root edge) form one run.

use serde::Serialize;

use super::gadget::Gadget;
use crate::error::{EspError, Result};
use crate::instance::VertexId;
use crate::pattern::{total_latency, SearchPattern};

/// `(explored endpoint, new endpoint)` of one pattern edge.
type Step = (VertexId, VertexId);

/// Length and newly connected terminal count of a run of steps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SubsequenceRatio {
    pub start: usize,
    pub end: usize,
    pub length: u64,
    pub terminals: u64,
}

impl SubsequenceRatio {
    /// `length / terminals`; undefined without terminals.
    pub fn ratio(&self) -> Option<f64> {
        (self.terminals > 0).then(|| self.length as f64 / self.terminals as f64)
    }

    /// `r(self) ≥ r(other)`, by cross multiplication.
    fn at_least(&self, other: &Self) -> bool {
        self.length as u128 * other.terminals as u128 >= other.length as u128 * self.terminals as u128
    }
}

struct Work<'a> {
    g: &'a Gadget,
    steps: Vec<Step>,
}

impl Work<'_> {
    fn copy_of(&self, s: Step) -> usize {
        self.g.locate(s.1).expect("steps enter non-root vertices").0
    }

    fn len(&self, s: Step) -> u64 {
        let e = self.g.instance.edge_between(s.0, s.1).expect("gadget edge");
        self.g.instance.edge(e).length
    }

    fn measure(&self, start: usize, end: usize) -> SubsequenceRatio {
        let run = &self.steps[start..end];
        SubsequenceRatio {
            start,
            end,
            length: run.iter().map(|&s| self.len(s)).sum(),
            terminals: run.iter().filter(|s| self.g.is_terminal(s.1)).count() as u64,
        }
    }

    /// Maximal runs; `true` marks runs of `copy`.
    fn blocks(&self, copy: usize) -> Vec<(bool, SubsequenceRatio)> {
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..=self.steps.len() {
            let split = i == self.steps.len()
                || (self.copy_of(self.steps[i]) == copy) != (self.copy_of(self.steps[start]) == copy);
            if split {
                out.push((self.copy_of(self.steps[start]) == copy, self.measure(start, i)));
                start = i;
            }
        }
        out
    }

    fn swap(&mut self, x: SubsequenceRatio, y: SubsequenceRatio) {
        debug_assert_eq!(x.end, y.start);
        self.steps[x.start..y.end].rotate_left(x.end - x.start);
    }

    /// Every later root edge into a copy becomes an edge from the copy's
    /// first entry vertex.
    fn single_entries(&mut self) {
        let mut entry: Vec<Option<VertexId>> = vec![None; self.g.k];
        for s in self.steps.iter_mut() {
            if s.0 != self.g.root() {
                continue;
            }
            let c = self.g.locate(s.1).expect("non-root").0;
            match entry[c] {
                None => entry[c] = Some(s.1),
                Some(v) => s.0 = v,
            }
        }
    }

    /// Makes the runs of `copy` consecutive.
    fn gather(&mut self, copy: usize, budget: &mut usize) -> Result<()> {
        loop {
            let blocks = self.blocks(copy);
            let mine: Vec<usize> = (0..blocks.len()).filter(|&i| blocks[i].0).collect();
            if mine.len() <= 1 {
                return Ok(());
            }
            if *budget == 0 {
                return Err(EspError::Solver("structuring did not terminate".into()));
            }
            *budget -= 1;
            let (first, last) = (mine[0], *mine.last().unwrap());

            // Inner runs without terminals move back one place; a trailing
            // one is dropped.
            if let Some(j) = (first..=last).find(|&j| blocks[j].1.terminals == 0) {
                let b = blocks[j].1;
                if j + 1 < blocks.len() {
                    self.swap(b, blocks[j + 1].1);
                } else {
                    self.steps.truncate(b.start);
                }
                continue;
            }

            // The last run of the copy must have ratio at most 2.
            let tail = blocks[last].1;
            if tail.length > 2 * tail.terminals {
                self.repair_tail(tail);
                continue;
            }

            // Swap the last adjacent pair whose earlier ratio is at least
            // the later one.
            let pair = (first + 1..=last)
                .rev()
                .find(|&j| blocks[j - 1].1.at_least(&blocks[j].1))
                .ok_or_else(|| EspError::Solver("no swappable pair of runs".into()))?;
            self.swap(blocks[pair - 1].1, blocks[pair].1);
        }
    }

    /// Replaces the shortest over-priced suffix of the run by one cheapest
    /// edge per terminal it connects.
    fn repair_tail(&mut self, run: SubsequenceRatio) {
        let last = self.steps[run.end - 1];
        if !self.g.is_terminal(last.1) {
            self.steps.remove(run.end - 1);
            return;
        }
        let p = (run.start..run.end)
            .rev()
            .find(|&p| {
                let m = self.measure(p, run.end);
                m.length > 2 * m.terminals
            })
            .expect("the whole run qualifies");
        let copy = self.copy_of(last);
        let mut explored: Vec<VertexId> = self.steps[..p]
            .iter()
            .filter(|&&s| self.copy_of(s) == copy)
            .map(|s| s.1)
            .collect();
        let targets: Vec<VertexId> = self.steps[p..run.end]
            .iter()
            .map(|s| s.1)
            .filter(|&v| self.g.is_terminal(v))
            .collect();
        let mut fresh = Vec::with_capacity(targets.len());
        for q in targets {
            let from = *explored
                .iter()
                .min_by_key(|&&u| (self.len((u, q)), u))
                .expect("the copy was entered before the run");
            fresh.push((from, q));
            explored.push(q);
        }
        self.steps.splice(p..run.end, fresh);
    }
}

fn to_steps(g: &Gadget, pat: &SearchPattern) -> Result<Vec<Step>> {
    let report = total_latency(&g.instance, pat)?;
    let mut seen = vec![false; g.instance.n()];
    seen[g.root()] = true;
    let steps = pat
        .edges()
        .iter()
        .map(|&e| {
            let edge = g.instance.edge(e);
            let s = if seen[edge.u] { (edge.u, edge.v) } else { (edge.v, edge.u) };
            seen[s.1] = true;
            s
        })
        .collect();
    debug_assert_eq!(report.order.len(), pat.len() + 1);
    Ok(steps)
}

fn from_steps(g: &Gadget, steps: &[Step]) -> SearchPattern {
    SearchPattern::new(
        steps
            .iter()
            .map(|&(u, v)| g.instance.edge_between(u, v).expect("gadget edge"))
            .collect(),
    )
}

pub fn is_structured(g: &Gadget, pat: &SearchPattern) -> bool {
    let mut done = vec![false; g.k];
    let mut current: Option<usize> = None;
    for &e in pat.edges() {
        let c = g.copy_of_edge(e);
        if current != Some(c) {
            if done[c] || !g.is_root_edge(e) {
                return false;
            }
            if let Some(prev) = current {
                done[prev] = true;
            }
            current = Some(c);
        } else if g.is_root_edge(e) {
            return false;
        }
    }
    true
}

/// Structured pattern with total latency at most that of `pat`.
pub fn structure_pattern(g: &Gadget, pat: &SearchPattern) -> Result<SearchPattern> {
    let mut work = Work {
        g,
        steps: to_steps(g, pat)?,
    };
    work.single_entries();
    let n = work.steps.len().max(1);
    let mut budget = 64 * n * n * g.k;
    for copy in 0..g.k {
        work.gather(copy, &mut budget)?;
    }
    let out = from_steps(g, &work.steps);
    debug_assert!(is_structured(g, &out));
    Ok(out)
}

/// Per-copy Steiner trees of a structured pattern, in visiting order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SteinerExtraction {
    pub order: Vec<usize>,
    /// Edges of each visited copy, as original vertex pairs.
    pub trees: Vec<Vec<(usize, usize)>>,
    pub costs: Vec<u64>,
    /// Position in `order` of the cheapest tree.
    pub best: usize,
}

impl SteinerExtraction {
    pub fn best_cost(&self) -> u64 {
        self.costs[self.best]
    }

    pub fn best_tree(&self) -> &[(usize, usize)] {
        &self.trees[self.best]
    }

    /// `Σ_i (i·a + Σ_{j<i} c(T_j))` scaled by `|T|`: a lower bound on the
    /// total latency of the pattern.
    pub fn latency_lower_bound(&self, a: u64, terminals: u64) -> u64 {
        let mut before = 0;
        let mut sum = 0;
        for (i, &c) in self.costs.iter().enumerate() {
            sum += (i as u64 + 1) * a + before;
            before += c;
        }
        sum * terminals
    }
}

pub fn extract_best_steiner(g: &Gadget, pat: &SearchPattern) -> Result<SteinerExtraction> {
    if !is_structured(g, pat) {
        return Err(EspError::Parameter("pattern is not structured".into()));
    }
    let steps = to_steps(g, pat)?;
    let mut order = Vec::new();
    let mut trees: Vec<Vec<(usize, usize)>> = Vec::new();
    let mut reached: Vec<Vec<usize>> = Vec::new();
    for (u, v) in steps {
        let (c, ov) = g.locate(v).expect("non-root");
        if u == g.root() {
            order.push(c);
            trees.push(Vec::new());
            reached.push(vec![ov]);
            continue;
        }
        let ou = g.locate(u).expect("non-root").1;
        trees.last_mut().unwrap().push((ou.min(ov), ou.max(ov)));
        reached.last_mut().unwrap().push(ov);
    }
    for (c, seen) in order.iter().zip(&reached) {
        if g.st.terminals().iter().any(|t| !seen.contains(t)) {
            return Err(EspError::Parameter(format!("copy {c} leaves a terminal unconnected")));
        }
    }
    if order.len() != g.k {
        return Err(EspError::Parameter("pattern skips a copy".into()));
    }
    for t in trees.iter_mut() {
        t.sort_unstable();
    }
    let costs: Vec<u64> = trees.iter().map(|t| g.st.tree_cost(t)).collect();
    let best = (0..costs.len()).min_by_key(|&i| (costs[i], i)).expect("k ≥ 2");
    Ok(SteinerExtraction {
        order,
        trees,
        costs,
        best,
    })
}
