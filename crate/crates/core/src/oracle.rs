//! Brute-force references. Nothing here calls into the transforms or recurrences it is
//! used to check; expression bookkeeping is re-derived locally.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::Serialize;

use crate::convolution::{Lattice, Ring, SetFamily};
use crate::dp::{DpInstance, DpTable, Problem, StateSpace};
use crate::error::{ConvError, OracleError};
use crate::expr::{CliqueExpression, Node};
use crate::graph::{Label, LabeledGraph, Vertex};
use crate::transform::Annotations;

pub const BRUTE_MAX_N: usize = 22;
pub const VERIFY_MAX_N: usize = 8;
pub const NAIVE_MAX_K: usize = 5;

fn guard(what: &'static str, value: usize, limit: usize) -> Result<(), OracleError> {
    if value > limit {
        Err(OracleError::Guard { what, value, limit })
    } else {
        Ok(())
    }
}

fn adjacency_masks(graph: &LabeledGraph) -> Vec<u32> {
    (0..graph.n()).map(|v| graph.neighbors(v).iter().fold(0u32, |m, &u| m | 1 << u)).collect()
}

/// Whether the subgraph induced by `set` is connected (the empty set counts as connected).
fn induced_connected(adj: &[u32], set: u32) -> bool {
    if set == 0 {
        return true;
    }
    let mut seen = set & set.wrapping_neg();
    let mut frontier = seen;
    while frontier != 0 {
        let v = frontier.trailing_zeros() as usize;
        frontier &= frontier - 1;
        let new = adj[v] & set & !seen;
        seen |= new;
        frontier |= new;
    }
    seen == set
}

fn subset_cost(costs: &[u64], set: u32) -> u64 {
    (0..costs.len()).filter(|&v| set >> v & 1 == 1).map(|v| costs[v]).sum()
}

/// Minimum cost of a connected vertex cover, by enumeration.
pub fn brute_cvc(graph: &LabeledGraph, costs: &[u64]) -> Result<Option<u64>, OracleError> {
    let n = graph.n();
    guard("n", n, BRUTE_MAX_N)?;
    let adj = adjacency_masks(graph);
    let edges: Vec<(Vertex, Vertex)> = graph.edges().collect();
    let mut best: Option<u64> = None;
    for set in 0u32..1 << n {
        if edges.iter().all(|&(u, v)| set >> u & 1 == 1 || set >> v & 1 == 1) && induced_connected(&adj, set) {
            let c = subset_cost(costs, set);
            best = Some(best.map_or(c, |b| b.min(c)));
        }
    }
    Ok(best)
}

/// Minimum cost of a connected dominating set, by enumeration.
pub fn brute_cds(graph: &LabeledGraph, costs: &[u64]) -> Result<Option<u64>, OracleError> {
    let n = graph.n();
    guard("n", n, BRUTE_MAX_N)?;
    let adj = adjacency_masks(graph);
    let all = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let mut best: Option<u64> = None;
    for set in 1u32..1 << n {
        let closed = (0..n).filter(|&v| set >> v & 1 == 1).fold(set, |m, v| m | adj[v]);
        if closed == all && induced_connected(&adj, set) {
            let c = subset_cost(costs, set);
            best = Some(best.map_or(c, |b| b.min(c)));
        }
    }
    Ok(best)
}

/// Number of consistent cuts `(X_L, X_R)` of `G[X]` with `v*` on the left.
pub fn count_consistent_cuts(graph: &LabeledGraph, x: &[Vertex], vstar: Vertex) -> Result<u64, OracleError> {
    let pos = x.iter().position(|&v| v == vstar).ok_or(OracleError::NotInSubset(vstar))?;
    guard("|X|", x.len(), 30)?;
    let inner: Vec<(usize, usize)> = (0..x.len())
        .flat_map(|i| (i + 1..x.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| graph.has_edge(x[i], x[j]))
        .collect();
    let mut count = 0;
    for left in 0u64..1 << x.len() {
        if left >> pos & 1 == 0 {
            continue;
        }
        if inner.iter().all(|&(i, j)| (left >> i & 1) == (left >> j & 1)) {
            count += 1;
        }
    }
    Ok(count)
}

/// Number of components of `G[X]`, by union-find.
pub fn components_of_subset(graph: &LabeledGraph, x: &[Vertex]) -> usize {
    let index: HashMap<Vertex, usize> = x.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut parent: Vec<usize> = (0..x.len()).collect();
    fn find(p: &mut [usize], mut a: usize) -> usize {
        while p[a] != a {
            p[a] = p[p[a]];
            a = p[a];
        }
        a
    }
    for (i, &v) in x.iter().enumerate() {
        for u in graph.neighbors(v) {
            if let Some(&j) = index.get(u) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    (0..x.len()).filter(|&i| find(&mut parent, i) == i).count()
}

/// Node data re-derived from the expression alone.
struct NodeFacts {
    vertices: Vec<Vertex>,
    label_of: BTreeMap<Vertex, Label>,
    edges: BTreeSet<(Vertex, Vertex)>,
    live: BTreeSet<Label>,
}

fn node_facts(expr: &CliqueExpression) -> Vec<NodeFacts> {
    let mut out: Vec<NodeFacts> = Vec::with_capacity(expr.len());
    for node in expr.nodes() {
        let facts = match *node {
            Node::Intro { label, vertex } => NodeFacts {
                vertices: vec![vertex],
                label_of: BTreeMap::from([(vertex, label)]),
                edges: BTreeSet::new(),
                live: BTreeSet::from([label]),
            },
            Node::Union(l, r) => {
                let (a, b) = (&out[l], &out[r]);
                NodeFacts {
                    vertices: a.vertices.iter().chain(&b.vertices).copied().collect(),
                    label_of: a.label_of.iter().chain(&b.label_of).map(|(&v, &l)| (v, l)).collect(),
                    edges: a.edges.union(&b.edges).copied().collect(),
                    live: a.live.union(&b.live).copied().collect(),
                }
            }
            Node::Relabel { from, to, child } => {
                let c = &out[child];
                let mut live = c.live.clone();
                if live.remove(&from) {
                    live.insert(to);
                }
                NodeFacts {
                    vertices: c.vertices.clone(),
                    label_of: c.label_of.iter().map(|(&v, &l)| (v, if l == from { to } else { l })).collect(),
                    edges: c.edges.clone(),
                    live,
                }
            }
            Node::Join { a, b, child } => {
                let c = &out[child];
                let mut edges = c.edges.clone();
                for (&x, &lx) in &c.label_of {
                    for (&y, &ly) in &c.label_of {
                        if x < y && ((lx == a && ly == b) || (lx == b && ly == a)) {
                            edges.insert((x, y));
                        }
                    }
                }
                NodeFacts { vertices: c.vertices.clone(), label_of: c.label_of.clone(), edges, live: c.live.clone() }
            }
            Node::Dead { label, child } => {
                let c = &out[child];
                let mut live = c.live.clone();
                live.remove(&label);
                NodeFacts { vertices: c.vertices.clone(), label_of: c.label_of.clone(), edges: c.edges.clone(), live }
            }
        };
        out.push(facts);
    }
    out
}

/// How a per-class tag set maps to a state index for each supported state space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Encoding {
    Cvc,
    Cds,
    CdsExact,
}

impl Encoding {
    fn state(self, mask: u8) -> Option<usize> {
        match self {
            // bit 0: outside the cover, bit 1: left, bit 2: right
            Encoding::Cvc => match mask {
                1 => Some(0),
                2 => Some(1),
                4 => Some(2),
                3 => Some(3),
                5 => Some(4),
                6 => Some(5),
                _ => None,
            },
            // bit 0: F, bit 1: L, bit 2: R
            Encoding::Cds => Some(match mask {
                0 => 0,
                1 => 1,
                2 => 2,
                4 => 3,
                _ => 4,
            }),
            Encoding::CdsExact => Some(mask as usize),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    /// 1-based node id.
    pub node: usize,
    pub signature: Vec<String>,
    pub cost: usize,
    pub weight: usize,
    pub expected: bool,
    pub found: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub problem: Problem,
    pub vstar: Vertex,
    pub nodes_checked: usize,
    pub partial_solutions: usize,
    pub mismatch: Option<Mismatch>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.mismatch.is_none()
    }
}

/// Parity of every partial-solution family, from the definitions, keyed by
/// `(signature code, cost, weight)`.
fn enumerate_node(
    enc: Encoding,
    radix: usize,
    facts: &NodeFacts,
    costs: &[u64],
    weights: &[u64],
    vstar: Vertex,
) -> (HashSet<(usize, usize, usize)>, usize) {
    let vs = &facts.vertices;
    let live: Vec<Label> = facts.live.iter().copied().collect();
    let dead_labels: BTreeSet<Label> = facts.label_of.values().copied().filter(|l| !facts.live.contains(l)).collect();
    let symbols: usize = if enc == Encoding::Cvc { 3 } else { 4 };
    let mut parity: HashSet<(usize, usize, usize)> = HashSet::new();
    let mut counted = 0;
    let mut assign = vec![0u8; vs.len()];
    let total = symbols.pow(vs.len() as u32);
    let adj = |v: Vertex| {
        facts.edges.iter().filter_map(move |&(a, b)| {
            if a == v {
                Some(b)
            } else if b == v {
                Some(a)
            } else {
                None
            }
        })
    };
    for mut code in 0..total {
        for a in assign.iter_mut() {
            *a = (code % symbols) as u8;
            code /= symbols;
        }
        let of: HashMap<Vertex, u8> = vs.iter().copied().zip(assign.iter().copied()).collect();
        // CVC symbols: 0 outside, 1 left, 2 right. CDS: 0 none, 1 F, 2 left, 3 right.
        let (left, right) = if enc == Encoding::Cvc { (1, 2) } else { (2, 3) };
        let in_x = |v: Vertex| of[&v] == left || of[&v] == right;
        if let Some(&s) = of.get(&vstar) {
            if s != left {
                continue;
            }
        }
        let cut_ok = facts
            .edges
            .iter()
            .all(|&(a, b)| !((of[&a] == left && of[&b] == right) || (of[&a] == right && of[&b] == left)));
        if !cut_ok {
            continue;
        }
        if enc == Encoding::Cvc {
            if !facts.edges.iter().all(|&(a, b)| in_x(a) || in_x(b)) {
                continue;
            }
        } else {
            let dominated = |v: Vertex| in_x(v) || adj(v).any(in_x);
            if vs.iter().any(|&v| of[&v] == 1 && dominated(v)) {
                continue;
            }
            let undominated_dead = vs.iter().any(|&v| dead_labels.contains(&facts.label_of[&v]) && !dominated(v));
            if undominated_dead {
                continue;
            }
        }
        let mut sig = 0usize;
        let mut ok = true;
        for &l in live.iter().rev() {
            let mask = vs.iter().filter(|v| facts.label_of[v] == l).fold(0u8, |m, v| {
                let s = of[v];
                m | if enc == Encoding::Cvc {
                    1 << s
                } else if s == 0 {
                    0
                } else {
                    1 << (s - 1)
                }
            });
            match enc.state(mask) {
                Some(state) => sig = sig * radix + state,
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let c: u64 = vs.iter().filter(|&&v| in_x(v)).map(|&v| costs[v]).sum();
        let w: u64 = vs.iter().filter(|&&v| in_x(v)).map(|&v| weights[v]).sum();
        counted += 1;
        let key = (sig, c as usize, w as usize);
        if !parity.remove(&key) {
            parity.insert(key);
        }
    }
    (parity, counted)
}

/// Compares every node table of the DP with a direct enumeration of the partial
/// solutions it is meant to count. `expr` must be augmented and nice.
pub fn verify_dp_tables(
    problem: Problem,
    space: &StateSpace,
    expr: &CliqueExpression,
    costs: &[u64],
    weights: &[u64],
    vstar: Vertex,
) -> Result<VerifyReport, OracleError> {
    guard("n", expr.n(), VERIFY_MAX_N)?;
    let enc = match (problem, space.radix()) {
        (Problem::Cvc, 6) => Encoding::Cvc,
        (Problem::Cds, 5) => Encoding::Cds,
        (Problem::Cds, 8) => Encoding::CdsExact,
        _ => return Err(OracleError::Guard { what: "state count", value: space.radix(), limit: 8 }),
    };
    let ann = Annotations::compute(expr);
    let cmax: u64 = costs.iter().sum();
    let wmax: u64 = weights.iter().sum();
    let inst = DpInstance { space, expr, ann: &ann, costs, weights, vstar, cmax: cmax as usize, wmax: wmax as usize };
    let tables = inst.run(true)?;
    let facts = node_facts(expr);
    let mut partial_solutions = 0;
    for (t, f) in facts.iter().enumerate() {
        let table: &DpTable = tables[t].as_ref().expect("all tables kept");
        let (expected, counted) = enumerate_node(enc, space.radix(), f, costs, weights, vstar);
        partial_solutions += counted;
        let found: HashSet<(usize, usize, usize)> = table.ones().into_iter().collect();
        let mut diff: Vec<(usize, usize, usize)> = expected.symmetric_difference(&found).copied().collect();
        diff.sort_unstable();
        if let Some(&(sig, c, w)) = diff.first() {
            let signature = table.decode(sig).into_iter().map(|s| space.names[s].to_string()).collect();
            return Ok(VerifyReport {
                problem,
                vstar,
                nodes_checked: t + 1,
                partial_solutions,
                mismatch: Some(Mismatch {
                    node: t + 1,
                    signature,
                    cost: c,
                    weight: w,
                    expected: expected.contains(&(sig, c, w)),
                    found: found.contains(&(sig, c, w)),
                }),
            });
        }
    }
    Ok(VerifyReport { problem, vstar, nodes_checked: facts.len(), partial_solutions, mismatch: None })
}

fn checked<R: Ring>(x: Option<R>) -> Result<R, OracleError> {
    x.ok_or(OracleError::Solve(ConvError::Overflow.into()))
}

/// Componentwise cover product by a double loop over all pairs of tuples.
pub fn naive_componentwise_cover<R: Ring>(
    family: &SetFamily,
    k: usize,
    a: &[R],
    b: &[R],
) -> Result<Vec<R>, OracleError> {
    guard("k", k, NAIVE_MAX_K)?;
    let members = family.members();
    let r = members.len();
    let size = r.pow(k as u32);
    let mut out = vec![R::zero(); size];
    for (i, &x) in a.iter().enumerate().take(size) {
        if x.is_zero() {
            continue;
        }
        'pairs: for (j, &y) in b.iter().enumerate().take(size) {
            let (mut ci, mut cj, mut code, mut place) = (i, j, 0, 1);
            for _ in 0..k {
                let u = members[ci % r] | members[cj % r];
                let Some(pos) = members.iter().position(|&m| m == u) else { continue 'pairs };
                code += pos * place;
                place *= r;
                ci /= r;
                cj /= r;
            }
            out[code] = checked(out[code].checked_add(&checked(x.checked_mul(&y))?))?;
        }
    }
    Ok(out)
}

/// ∨-product over `L^k` by a double loop over all pairs of tuples.
pub fn naive_vee_product<R: Ring>(lattice: &Lattice, k: usize, a: &[R], b: &[R]) -> Result<Vec<R>, OracleError> {
    guard("k", k, NAIVE_MAX_K)?;
    let r = lattice.size();
    let size = r.pow(k as u32);
    let mut out = vec![R::zero(); size];
    for (i, &x) in a.iter().enumerate().take(size) {
        if x.is_zero() {
            continue;
        }
        for (j, &y) in b.iter().enumerate().take(size) {
            let (mut ci, mut cj, mut code, mut place) = (i, j, 0, 1);
            for _ in 0..k {
                code += lattice.join(ci % r, cj % r) * place;
                place *= r;
                ci /= r;
                cj /= r;
            }
            out[code] = checked(out[code].checked_add(&checked(x.checked_mul(&y))?))?;
        }
    }
    Ok(out)
}
