//! Steiner tree instances with costs in {1, 2} and the k-copy gadget built
//! from them.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{EspError, Result};
use crate::instance::{Edge, EdgeId, Instance, VertexId};

/// Largest graph accepted by [`steiner_optimum`].
pub const STEINER_LIMIT: usize = 16;

/// Complete graph with edge costs in {1, 2} and a terminal set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct St12Instance {
    n: usize,
    terminals: Vec<usize>,
    cost: Vec<Vec<u8>>,
}

#[derive(Serialize, Deserialize)]
struct St12Json {
    n: usize,
    terminals: Vec<usize>,
    edges: Vec<(usize, usize, u8)>,
}

impl St12Instance {
    /// `edges` must list every vertex pair exactly once.
    pub fn new(n: usize, terminals: Vec<usize>, edges: &[(usize, usize, u8)]) -> Result<Self> {
        let bad = |msg: String| Err(EspError::Instance(msg));
        if n < 2 {
            return bad("need at least two vertices".into());
        }
        let mut terminals = terminals;
        terminals.sort_unstable();
        terminals.dedup();
        if terminals.len() < 2 {
            return bad("need at least two distinct terminals".into());
        }
        if terminals.iter().any(|&t| t >= n) {
            return bad("terminal out of range".into());
        }
        let mut cost = vec![vec![0u8; n]; n];
        for &(u, v, c) in edges {
            if u >= n || v >= n || u == v {
                return bad(format!("bad edge ({u}, {v})"));
            }
            if !(c == 1 || c == 2) {
                return bad(format!("edge ({u}, {v}) has cost {c}, expected 1 or 2"));
            }
            if cost[u][v] != 0 {
                return bad(format!("edge ({u}, {v}) listed twice"));
            }
            cost[u][v] = c;
            cost[v][u] = c;
        }
        let missing = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).find(|&(u, v)| cost[u][v] == 0);
        if let Some((u, v)) = missing {
            return bad(format!("graph is not complete: ({u}, {v}) missing"));
        }
        Ok(Self { n, terminals, cost })
    }

    /// Random instance; each pair gets cost 2 with probability `p_two`.
    pub fn random(n: usize, terminals: usize, p_two: f64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                edges.push((u, v, if rng.gen_bool(p_two) { 2 } else { 1 }));
            }
        }
        let mut all: Vec<usize> = (0..n).collect();
        all.shuffle(&mut rng);
        all.truncate(terminals);
        Self::new(n, all, &edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terminals(&self) -> &[usize] {
        &self.terminals
    }

    pub fn is_terminal(&self, v: usize) -> bool {
        self.terminals.binary_search(&v).is_ok()
    }

    pub fn cost(&self, u: usize, v: usize) -> u64 {
        self.cost[u][v] as u64
    }

    pub fn tree_cost(&self, edges: &[(usize, usize)]) -> u64 {
        edges.iter().map(|&(u, v)| self.cost(u, v)).sum()
    }

    pub fn edges(&self) -> Vec<(usize, usize, u8)> {
        (0..self.n)
            .flat_map(|u| (u + 1..self.n).map(move |v| (u, v)))
            .map(|(u, v)| (u, v, self.cost[u][v]))
            .collect()
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let j: St12Json = serde_json::from_str(s)?;
        Self::new(j.n, j.terminals, &j.edges)
    }

    pub fn to_json_string(&self) -> String {
        let j = St12Json {
            n: self.n,
            terminals: self.terminals.clone(),
            edges: self.edges(),
        };
        serde_json::to_string_pretty(&j).expect("serializable")
    }
}

/// Optimal Steiner tree by enumerating the Steiner vertex set and taking a
/// minimum spanning tree of terminals plus that set.
pub fn steiner_optimum(st: &St12Instance) -> Result<(u64, Vec<(usize, usize)>)> {
    if st.n > STEINER_LIMIT {
        return Err(EspError::TooLarge {
            what: "Steiner enumeration vertex count",
            actual: st.n,
            limit: STEINER_LIMIT,
        });
    }
    let others: Vec<usize> = (0..st.n).filter(|&v| !st.is_terminal(v)).collect();
    let mut best: Option<(u64, Vec<(usize, usize)>)> = None;
    for mask in 0u32..1 << others.len() {
        let mut set = st.terminals.clone();
        set.extend(others.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &v)| v));
        let (c, edges) = prim(st, &set);
        if best.as_ref().is_none_or(|(b, _)| c < *b) {
            best = Some((c, edges));
        }
    }
    Ok(best.expect("at least one subset"))
}

fn prim(st: &St12Instance, set: &[usize]) -> (u64, Vec<(usize, usize)>) {
    let mut in_tree = vec![false; set.len()];
    let mut best = vec![(u64::MAX, 0usize); set.len()];
    in_tree[0] = true;
    for j in 1..set.len() {
        best[j] = (st.cost(set[0], set[j]), 0);
    }
    let mut total = 0;
    let mut edges = Vec::with_capacity(set.len() - 1);
    for _ in 1..set.len() {
        let j = (0..set.len())
            .filter(|&j| !in_tree[j])
            .min_by_key(|&j| (best[j].0, j))
            .expect("vertices remain");
        in_tree[j] = true;
        total += best[j].0;
        let (a, b) = (set[best[j].1], set[j]);
        edges.push((a.min(b), a.max(b)));
        for x in 0..set.len() {
            let c = st.cost(set[j], set[x]);
            if !in_tree[x] && c < best[x].0 {
                best[x] = (c, j);
            }
        }
    }
    edges.sort_unstable();
    (total, edges)
}

/// `k` copies of an ST(1,2) graph joined to a new root by edges of cost
/// `a = 2(|T| − 1)`. Terminal copies get weight 1 (the fractional weights
/// `1/|T|` scaled by `|T|`), all other vertices weight 0.
#[derive(Clone, Debug)]
pub struct Gadget {
    pub st: St12Instance,
    pub k: usize,
    pub a: u64,
    pub instance: Instance,
}

impl Gadget {
    pub fn root(&self) -> VertexId {
        0
    }

    /// Gadget vertex of original vertex `u` in copy `copy`.
    pub fn vertex(&self, copy: usize, u: usize) -> VertexId {
        1 + copy * self.st.n + u
    }

    /// `(copy, original vertex)` of a non-root gadget vertex.
    pub fn locate(&self, v: VertexId) -> Option<(usize, usize)> {
        (v != 0).then(|| ((v - 1) / self.st.n, (v - 1) % self.st.n))
    }

    pub fn is_terminal(&self, v: VertexId) -> bool {
        self.instance.weight(v) > 0
    }

    /// Copy an edge belongs to; root edges belong to the copy they enter.
    pub fn copy_of_edge(&self, e: EdgeId) -> usize {
        let edge = self.instance.edge(e);
        let v = if edge.u == 0 { edge.v } else { edge.u };
        self.locate(v).expect("non-root endpoint").0
    }

    pub fn is_root_edge(&self, e: EdgeId) -> bool {
        self.instance.edge(e).touches(0)
    }

    /// Recognizes an instance written by [`build_gadget`].
    pub fn from_instance(inst: &Instance) -> Result<Self> {
        let bad = || EspError::Instance("not a gadget instance".into());
        let mut k = 0;
        let mut n = 0;
        for id in inst.ids().iter().skip(1) {
            let (c, u) = id
                .strip_prefix('c')
                .and_then(|s| s.split_once('v'))
                .ok_or_else(bad)?;
            let c: usize = c.parse().map_err(|_| bad())?;
            let u: usize = u.parse().map_err(|_| bad())?;
            k = k.max(c + 1);
            n = n.max(u + 1);
        }
        if inst.id(0) != "r" || n == 0 || inst.n() != 1 + k * n {
            return Err(bad());
        }
        let terminals: Vec<usize> = (0..n).filter(|&u| inst.weight(1 + u) > 0).collect();
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                let e = inst.edge_between(1 + u, 1 + v).ok_or_else(bad)?;
                let c = u8::try_from(inst.edge(e).length).map_err(|_| bad())?;
                edges.push((u, v, c));
            }
        }
        let g = build_gadget(&St12Instance::new(n, terminals, &edges)?, k)?;
        if g.instance.to_json_string() != inst.to_json_string() {
            return Err(bad());
        }
        Ok(g)
    }
}

pub fn build_gadget(st: &St12Instance, k: usize) -> Result<Gadget> {
    if k < 2 {
        return Err(EspError::Parameter("the gadget needs at least two copies".into()));
    }
    let n = st.n;
    let a = 2 * (st.terminals.len() as u64 - 1);
    let total = 1 + k * n;
    let mut ids = Vec::with_capacity(total);
    let mut weights = Vec::with_capacity(total);
    ids.push("r".to_string());
    weights.push(0);
    for c in 0..k {
        for u in 0..n {
            ids.push(format!("c{c}v{u}"));
            weights.push(st.is_terminal(u) as u64);
        }
    }
    let mut edges = Vec::new();
    for c in 0..k {
        let base = 1 + c * n;
        for u in 0..n {
            edges.push(Edge { u: 0, v: base + u, length: a });
        }
        for u in 0..n {
            for v in u + 1..n {
                edges.push(Edge {
                    u: base + u,
                    v: base + v,
                    length: st.cost(u, v),
                });
            }
        }
    }
    let instance = Instance::new(ids, weights, edges, 0)?;
    Ok(Gadget {
        st: st.clone(),
        k,
        a,
        instance,
    })
}

/// `γ = (k+1)/(k−1) · (3β − 2)`.
pub fn hardness_ratio(beta: &BigRational, k: u64) -> Result<BigRational> {
    if k < 2 {
        return Err(EspError::Parameter("k must be at least 2".into()));
    }
    let one = BigRational::from_integer(BigInt::from(1));
    if *beta < one {
        return Err(EspError::Parameter("β must be at least 1".into()));
    }
    let k = BigInt::from(k);
    let factor = BigRational::new(&k + 1, &k - 1);
    let three = BigRational::from_integer(BigInt::from(3));
    let two = BigRational::from_integer(BigInt::from(2));
    Ok(factor * (three * beta - two))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::parse_rational;

    fn path3() -> St12Instance {
        St12Instance::new(3, vec![0, 1, 2], &[(0, 1, 1), (1, 2, 1), (0, 2, 2)]).unwrap()
    }

    #[test]
    fn root_edge_cost_and_size() {
        let g = build_gadget(&path3(), 2).unwrap();
        assert_eq!(g.a, 4);
        assert_eq!(g.instance.n(), 7);
        assert_eq!(g.instance.total_weight(), 6);
        assert_eq!(g.locate(g.vertex(1, 2)), Some((1, 2)));
    }

    #[test]
    fn recognized_from_json() {
        let g = build_gadget(&St12Instance::random(4, 2, 0.5, 3).unwrap(), 3).unwrap();
        let back = Instance::from_json_str(&g.instance.to_json_string()).unwrap();
        let h = Gadget::from_instance(&back).unwrap();
        assert_eq!((h.st, h.k, h.a), (g.st, 3, 2));
        let plain = Instance::indexed(vec![0, 1], &[(0, 1, 1)]).unwrap();
        assert!(Gadget::from_instance(&plain).is_err());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(St12Instance::new(3, vec![0], &[(0, 1, 1), (1, 2, 1), (0, 2, 2)]).is_err());
        assert!(St12Instance::new(3, vec![0, 1], &[(0, 1, 1), (1, 2, 3), (0, 2, 2)]).is_err());
        assert!(St12Instance::new(3, vec![0, 1], &[(0, 1, 1), (1, 2, 1)]).is_err());
        assert!(build_gadget(&path3(), 1).is_err());
    }

    #[test]
    fn json_round_trip() {
        let st = St12Instance::random(5, 3, 0.5, 7).unwrap();
        assert_eq!(St12Instance::from_json_str(&st.to_json_string()).unwrap(), st);
    }

    #[test]
    fn steiner_uses_cheap_hub() {
        // Terminals pairwise at cost 2, hub 3 at cost 1 from each.
        let st = St12Instance::new(
            4,
            vec![0, 1, 2],
            &[(0, 1, 2), (0, 2, 2), (1, 2, 2), (0, 3, 1), (1, 3, 1), (2, 3, 1)],
        )
        .unwrap();
        let (c, edges) = steiner_optimum(&st).unwrap();
        assert_eq!(c, 3);
        assert_eq!(edges.len(), 3);
    }

    #[test]
    fn ratio_examples() {
        let r = |b: &str, k| hardness_ratio(&parse_rational(b).unwrap(), k).unwrap();
        assert_eq!(r("2", 3), parse_rational("8").unwrap());
        assert_eq!(r("11/10", 100), parse_rational("101/99").unwrap() * parse_rational("13/10").unwrap());
        // β = 1 leaves (k+1)/(k−1), which tends to 1.
        assert_eq!(r("1", 1001), parse_rational("1002/1000").unwrap());
        assert!(hardness_ratio(&parse_rational("2").unwrap(), 1).is_err());
    }
}
