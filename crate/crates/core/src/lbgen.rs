//! Lower-bound instances: SAT formulas turned into connected vertex cover and connected
//! dominating set instances of small linear clique-width, with budgets and expressions.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::Serialize;

use crate::dp::Problem;
use crate::error::GenError;
use crate::expr::{CliqueExpression, LinearBuilder};
use crate::graph::{Label, LabeledGraph, Vertex};

/// A CNF formula. Literals are nonzero, `v` or `-v` for a variable `1..=n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SatInstance {
    n: usize,
    clauses: Vec<Vec<i64>>,
}

impl SatInstance {
    pub fn new(n: usize, clauses: Vec<Vec<i64>>) -> Result<Self, GenError> {
        if clauses.is_empty() {
            return Err(GenError::NoClauses);
        }
        for (idx, clause) in clauses.iter().enumerate() {
            if clause.is_empty() {
                return Err(GenError::Cnf { line: 0, msg: format!("clause {idx} is empty") });
            }
            if let Some(&bad) = clause.iter().find(|&&l| l == 0 || l.unsigned_abs() as usize > n) {
                return Err(GenError::Cnf { line: 0, msg: format!("literal {bad} out of range for {n} variables") });
            }
        }
        Ok(Self { n, clauses })
    }

    /// Reads DIMACS CNF: `c` comments, one `p cnf <vars> <clauses>` header, clauses
    /// terminated by `0` and free to span lines. A `%` line ends the input.
    pub fn parse_dimacs(text: &str) -> Result<Self, GenError> {
        let err = |line: usize, msg: String| GenError::Cnf { line, msg };
        let mut header: Option<(usize, usize)> = None;
        let mut clauses = Vec::new();
        let mut current = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('c') {
                continue;
            }
            if trimmed.starts_with('%') {
                break;
            }
            if trimmed.starts_with('p') {
                let parts: Vec<&str> = trimmed.split_whitespace().collect();
                if header.is_some() {
                    return Err(err(line, "second header".into()));
                }
                match parts.as_slice() {
                    ["p", "cnf", v, c] => {
                        let v = v.parse().map_err(|_| err(line, format!("bad variable count {v:?}")))?;
                        let c = c.parse().map_err(|_| err(line, format!("bad clause count {c:?}")))?;
                        header = Some((v, c));
                    }
                    _ => return Err(err(line, "expected `p cnf <vars> <clauses>`".into())),
                }
                continue;
            }
            let Some((n, _)) = header else { return Err(err(line, "clause before header".into())) };
            for tok in trimmed.split_whitespace() {
                let lit: i64 = tok.parse().map_err(|_| err(line, format!("bad literal {tok:?}")))?;
                if lit == 0 {
                    if current.is_empty() {
                        return Err(err(line, "empty clause".into()));
                    }
                    clauses.push(std::mem::take(&mut current));
                } else if lit.unsigned_abs() as usize > n {
                    return Err(err(line, format!("literal {lit} exceeds {n} variables")));
                } else {
                    current.push(lit);
                }
            }
        }
        let Some((n, m)) = header else { return Err(err(0, "missing header".into())) };
        if !current.is_empty() {
            clauses.push(current);
        }
        if clauses.len() != m {
            return Err(err(0, format!("header declares {m} clauses, found {}", clauses.len())));
        }
        Self::new(n, clauses)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Vec<i64>] {
        &self.clauses
    }

    /// `assignment[v]` is the value of variable `v + 1`.
    pub fn satisfied_by(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|c| c.iter().any(|&l| literal_true(l, assignment)))
    }
}

fn literal_true(lit: i64, assignment: &[bool]) -> bool {
    let v = lit.unsigned_abs() as usize - 1;
    assignment[v] == (lit > 0)
}

/// Sizes derived from the formula and the group size `beta`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GadgetParams {
    pub problem: Problem,
    pub beta: usize,
    pub n: usize,
    pub m: usize,
    /// Number of variable groups.
    pub t: usize,
    /// Path rows per group.
    pub p: usize,
    /// Gadget states: 6 for CVC, 5 for CDS.
    pub base: usize,
    pub columns: usize,
}

impl GadgetParams {
    pub fn new(problem: Problem, sat: &SatInstance, beta: usize) -> Result<Self, GenError> {
        if beta == 0 || beta > 20 {
            return Err(GenError::Beta);
        }
        let base: usize = match problem {
            Problem::Cvc => 6,
            Problem::Cds => 5,
        };
        let t = sat.n().div_ceil(beta).max(1);
        let mut p = 0;
        while base.pow(p as u32) < 1usize << beta {
            p += 1;
        }
        let regions = (base - 1) * t * p + 1;
        Ok(Self { problem, beta, n: sat.n(), m: sat.m(), t, p, base, columns: sat.m() * regions })
    }

    /// Number of digit sequences, `base^p`.
    pub fn sequences(&self) -> usize {
        self.base.pow(self.p as u32)
    }

    /// Variables (0-based) of group `i`.
    pub fn group_vars(&self, i: usize) -> std::ops::Range<usize> {
        (i * self.beta).min(self.n)..((i + 1) * self.beta).min(self.n)
    }

    /// The sequence for assignment number `a` of a group: its base-`base` digits, each
    /// shifted to `1..=base`.
    pub fn kappa(&self, a: usize) -> Vec<usize> {
        let mut digits = Vec::with_capacity(self.p);
        let mut rest = a;
        for _ in 0..self.p {
            digits.push(rest % self.base + 1);
            rest /= self.base;
        }
        digits
    }

    /// Vertices a partial solution must spend per path gadget.
    pub fn gadget_cost(&self) -> u64 {
        match self.problem {
            Problem::Cvc => 21,
            Problem::Cds => 14,
        }
    }

    pub fn budget(&self) -> u64 {
        let (t, p, cols) = (self.t as u64, self.p as u64, self.columns as u64);
        (self.gadget_cost() * t * p + (self.sequences() as u64 + 2) * t + 1) * cols + 1
    }

    /// Label count of the column-by-column construction: path labels, decoding labels,
    /// one label per gadget vertex that is live at once, two clause labels, root and trash.
    pub fn width_bound(&self) -> usize {
        let gadget_labels = match self.problem {
            Problem::Cvc => 38,
            Problem::Cds => 28,
        };
        self.t * self.p + 3 * self.sequences() + 2 + gadget_labels + 2 + 1 + 1
    }
}

/// Vertex states at a gadget boundary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Atom {
    /// Outside the solution (vertex cover).
    Zero,
    /// Outside the solution and not dominated.
    ZeroUndominated,
    /// Outside the solution and dominated.
    ZeroDominated,
    /// In the solution, not connected to the root.
    OneDisconnected,
    /// In the solution and connected to the root.
    OneConnected,
}

impl Atom {
    pub fn name(self) -> &'static str {
        match self {
            Atom::Zero => "0",
            Atom::ZeroUndominated => "0_0",
            Atom::ZeroDominated => "0_1",
            Atom::OneDisconnected => "1_0",
            Atom::OneConnected => "1_1",
        }
    }

    fn sol(self) -> usize {
        matches!(self, Atom::OneDisconnected | Atom::OneConnected) as usize
    }

    fn conn(self) -> usize {
        (self == Atom::OneConnected) as usize
    }

    fn dom(self) -> usize {
        (self == Atom::ZeroDominated) as usize
    }
}

/// The gadget states in transition order.
pub fn gadget_states(problem: Problem) -> Vec<[Atom; 4]> {
    use Atom::*;
    match problem {
        Problem::Cvc => vec![
            [Zero, Zero, OneConnected, OneConnected],
            [OneDisconnected, Zero, OneConnected, OneDisconnected],
            [OneDisconnected, OneDisconnected, OneConnected, Zero],
            [OneConnected, Zero, OneDisconnected, OneDisconnected],
            [OneConnected, OneDisconnected, OneDisconnected, Zero],
            [OneConnected, OneConnected, Zero, Zero],
        ],
        Problem::Cds => vec![
            [ZeroDominated, ZeroUndominated, OneConnected, ZeroDominated],
            [ZeroDominated, ZeroDominated, ZeroDominated, ZeroDominated],
            [OneDisconnected, ZeroUndominated, OneConnected, ZeroUndominated],
            [OneConnected, ZeroUndominated, OneDisconnected, ZeroUndominated],
            [OneConnected, ZeroDominated, ZeroDominated, ZeroUndominated],
        ],
    }
}

/// A path gadget on local vertices `0..n`. The root is not part of the gadget; the
/// vertices listed in `root_adjacent` are adjacent to it.
#[derive(Clone, Debug)]
pub struct PathGadget {
    pub problem: Problem,
    names: Vec<(String, String)>,
    pub edges: Vec<(usize, usize)>,
    pub root_adjacent: Vec<usize>,
    /// Boundary vertices; the first two face the previous gadget, the last two the next.
    pub join: [usize; 4],
    pub clique: Vec<usize>,
    /// Canonical partial solution per state.
    pub solutions: Vec<Vec<usize>>,
    /// Closed neighbourhoods used in the cost lower bound (only for CDS).
    pub packing: Vec<usize>,
}

impl PathGadget {
    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, v: usize) -> String {
        let (base, sub) = &self.names[v];
        format!("{base}_{sub}")
    }

    /// Name with a copy index written as a superscript.
    pub fn name_in_copy(&self, v: usize, copy: usize) -> String {
        let (base, sub) = &self.names[v];
        format!("{base}^{copy}_{sub}")
    }

    pub fn find(&self, name: &str) -> Option<usize> {
        (0..self.n()).find(|&v| self.name(v) == name)
    }

    /// The gadget plus the root as a graph; the root is vertex `n`.
    pub fn with_root(&self) -> LabeledGraph {
        let r = self.n();
        let edges = self.edges.iter().copied().chain(self.root_adjacent.iter().map(|&v| (v, r)));
        LabeledGraph::unlabeled(r + 1, edges).expect("gadget edges are valid")
    }
}

#[derive(Default)]
struct GadgetBuilder {
    names: Vec<(String, String)>,
    edges: Vec<(usize, usize)>,
}

impl GadgetBuilder {
    fn add(&mut self, base: &str, sub: impl Into<String>) -> usize {
        self.names.push((base.to_string(), sub.into()));
        self.names.len() - 1
    }

    fn edge(&mut self, a: usize, b: usize) {
        self.edges.push((a, b));
    }

    fn subdivide(&mut self, a: usize, b: usize) -> usize {
        let sub = format!("{{{},{}}}", self.full(a), self.full(b));
        let w = self.add("w", sub);
        self.edge(a, w);
        self.edge(w, b);
        w
    }

    fn full(&self, v: usize) -> String {
        let (base, sub) = &self.names[v];
        format!("{base}_{sub}")
    }
}

/// The 38-vertex connected vertex cover path gadget.
pub fn build_cvc_path_gadget() -> PathGadget {
    let mut g = GadgetBuilder::default();
    let u: Vec<usize> = (1..=4).map(|i| g.add("u", i.to_string())).collect();
    let a: Vec<[usize; 3]> = (1..=4).map(|i| [1, 2, 3].map(|k| g.add("a", format!("{{{i},{k}}}")))).collect();
    let b: Vec<[usize; 2]> = (1..=4).map(|i| [0, 1].map(|s| g.add("b", format!("{{{i},{s}}}")))).collect();
    let c: Vec<[usize; 2]> = (1..=4).map(|i| [0, 1].map(|s| g.add("c", format!("{{{i},{s}}}")))).collect();
    let v: Vec<usize> = (1..=6).map(|l| g.add("v", l.to_string())).collect();
    for i in 0..4 {
        for (x, y) in [
            (u[i], a[i][0]),
            (u[i], a[i][2]),
            (u[i], b[i][0]),
            (a[i][0], a[i][1]),
            (a[i][0], b[i][0]),
            (a[i][0], c[i][1]),
            (a[i][2], b[i][1]),
            (b[i][0], b[i][1]),
            (c[i][0], c[i][1]),
        ] {
            g.edge(x, y);
        }
    }
    for x in 0..6 {
        for y in x + 1..6 {
            g.edge(v[x], v[y]);
        }
    }
    let states = gadget_states(Problem::Cvc);
    for (l, s) in states.iter().enumerate() {
        for i in 0..4 {
            g.edge(v[l], b[i][s[i].sol()]);
            g.edge(v[l], c[i][s[i].conn()]);
        }
    }
    let mut root_adjacent: Vec<usize> = a.iter().map(|x| x[2]).collect();
    root_adjacent.extend(b.iter().flatten());
    root_adjacent.extend(c.iter().flatten());
    root_adjacent.extend(&v);
    let solutions = states
        .iter()
        .enumerate()
        .map(|(l, s)| {
            let mut x: Vec<usize> = v.iter().copied().filter(|&w| w != v[l]).collect();
            for i in 0..4 {
                x.push(a[i][0]);
                x.push(if s[i].sol() == 1 { u[i] } else { a[i][2] });
                x.push(b[i][s[i].sol()]);
                x.push(c[i][s[i].conn()]);
            }
            x.sort_unstable();
            x
        })
        .collect();
    PathGadget {
        problem: Problem::Cvc,
        names: g.names,
        edges: g.edges,
        root_adjacent,
        join: [u[0], u[1], u[2], u[3]],
        clique: v,
        solutions,
        packing: Vec::new(),
    }
}

/// The connected dominating set path gadget, with every edge that only a solution
/// vertex may resolve subdivided.
pub fn build_cds_path_gadget() -> PathGadget {
    let mut g = GadgetBuilder::default();
    let mut u = [[0; 2]; 2];
    for (i, row) in u.iter_mut().enumerate() {
        for (k, slot) in row.iter_mut().enumerate() {
            *slot = g.add("u", format!("{{{},{}}}", i + 1, k + 1));
        }
    }
    let a: Vec<[usize; 3]> = (1..=2).map(|i| [1, 2, 3].map(|k| g.add("a", format!("{{{i},{k}}}")))).collect();
    let b: Vec<[usize; 2]> = (1..=2).map(|i| [0, 1].map(|s| g.add("b", format!("{{{i},{s}}}")))).collect();
    let c: Vec<[usize; 2]> = (1..=2).map(|i| [0, 1].map(|s| g.add("c", format!("{{{i},{s}}}")))).collect();
    let d: Vec<[usize; 2]> = (1..=2).map(|i| [0, 1].map(|s| g.add("d", format!("{{{i},{s}}}")))).collect();
    let v: Vec<usize> = (1..=5).map(|l| g.add("v", l.to_string())).collect();
    let mut packing = Vec::new();
    for i in 0..2 {
        g.edge(u[i][0], a[i][0]);
        g.edge(a[i][0], a[i][1]);
        g.edge(a[i][0], b[i][0]);
        g.edge(a[i][0], c[i][1]);
        g.edge(u[i][1], d[i][1]);
        let w_ua = g.subdivide(u[i][0], a[i][2]);
        g.subdivide(u[i][0], b[i][0]);
        g.subdivide(a[i][2], b[i][1]);
        let w_b = g.subdivide(b[i][0], b[i][1]);
        let w_c = g.subdivide(c[i][0], c[i][1]);
        let w_d = g.subdivide(d[i][0], d[i][1]);
        packing.extend([a[i][1], w_b, w_ua, w_c, w_d]);
    }
    for x in 0..5 {
        for y in x + 1..5 {
            g.subdivide(v[x], v[y]);
        }
    }
    let states = gadget_states(Problem::Cds);
    for (l, s) in states.iter().enumerate() {
        for i in 0..2 {
            g.subdivide(v[l], b[i][s[2 * i].sol()]);
            g.subdivide(v[l], c[i][s[2 * i].conn()]);
            g.subdivide(v[l], d[i][s[2 * i + 1].dom()]);
        }
    }
    let mut root_adjacent: Vec<usize> = a.iter().map(|x| x[2]).collect();
    root_adjacent.extend(b.iter().flatten());
    root_adjacent.extend(c.iter().flatten());
    root_adjacent.extend(d.iter().flatten());
    root_adjacent.extend(&v);
    let solutions = states
        .iter()
        .enumerate()
        .map(|(l, s)| {
            let mut x: Vec<usize> = v.iter().copied().filter(|&w| w != v[l]).collect();
            for i in 0..2 {
                let first = s[2 * i];
                x.push(a[i][0]);
                x.push(if first.sol() == 1 { u[i][0] } else { a[i][2] });
                x.push(b[i][first.sol()]);
                x.push(c[i][first.conn()]);
                x.push(d[i][s[2 * i + 1].dom()]);
            }
            x.sort_unstable();
            x
        })
        .collect();
    PathGadget {
        problem: Problem::Cds,
        names: g.names,
        edges: g.edges,
        root_adjacent,
        join: [u[0][0], u[0][1], u[1][0], u[1][1]],
        clique: v,
        solutions,
        packing,
    }
}

pub fn build_path_gadget(problem: Problem) -> PathGadget {
    match problem {
        Problem::Cvc => build_cvc_path_gadget(),
        Problem::Cds => build_cds_path_gadget(),
    }
}

/// Vertices of `graph` reachable from `root` inside `set` (the root is always included).
fn root_component(graph: &LabeledGraph, set: &[bool], root: Vertex) -> Vec<bool> {
    let mut seen = vec![false; graph.n()];
    seen[root] = true;
    let mut queue = VecDeque::from([root]);
    while let Some(x) = queue.pop_front() {
        for &y in graph.neighbors(x) {
            if set[y] && !seen[y] {
                seen[y] = true;
                queue.push_back(y);
            }
        }
    }
    seen
}

/// State of every vertex of `graph` under the partial solution `set`, relative to `root`.
pub fn vertex_states(problem: Problem, graph: &LabeledGraph, set: &[bool], root: Vertex) -> Vec<Atom> {
    let mut with_root = set.to_vec();
    with_root[root] = true;
    let reach = root_component(graph, &with_root, root);
    (0..graph.n())
        .map(|v| {
            if with_root[v] {
                if reach[v] {
                    Atom::OneConnected
                } else {
                    Atom::OneDisconnected
                }
            } else if problem == Problem::Cvc {
                Atom::Zero
            } else if graph.neighbors(v).iter().any(|&w| with_root[w]) {
                Atom::ZeroDominated
            } else {
                Atom::ZeroUndominated
            }
        })
        .collect()
}

/// Boundary state of a gadget under a set of local vertices.
pub fn boundary_state(gadget: &PathGadget, set: &[usize]) -> [Atom; 4] {
    let graph = gadget.with_root();
    let mut mask = vec![false; graph.n()];
    for &v in set {
        mask[v] = true;
    }
    let states = vertex_states(gadget.problem, &graph, &mask, gadget.n());
    gadget.join.map(|u| states[u])
}

/// Checks every canonical partial solution of the gadget; returns one message per failure.
pub fn check_canonical_solutions(gadget: &PathGadget) -> Vec<String> {
    let mut failures = Vec::new();
    let graph = gadget.with_root();
    let root = gadget.n();
    let expected_size = match gadget.problem {
        Problem::Cvc => 21,
        Problem::Cds => 14,
    };
    for (l, (sol, state)) in gadget.solutions.iter().zip(gadget_states(gadget.problem)).enumerate() {
        let ell = l + 1;
        let mut mask = vec![false; graph.n()];
        for &v in sol {
            mask[v] = true;
        }
        if sol.len() != expected_size {
            failures.push(format!("state {ell}: size {} instead of {expected_size}", sol.len()));
        }
        let missing: Vec<usize> = gadget.clique.iter().copied().filter(|&v| !mask[v]).collect();
        if missing != [gadget.clique[l]] {
            failures.push(format!("state {ell}: clique vertices outside the solution {missing:?}"));
        }
        if boundary_state(gadget, sol) != state {
            failures.push(format!("state {ell}: boundary state differs"));
        }
        // boundary vertices are taken to be connected or dominated from outside
        let mut helped = graph.edges().collect::<Vec<_>>();
        for &u in &gadget.join {
            helped.push((u, root));
        }
        let helped = LabeledGraph::unlabeled(graph.n(), helped).expect("valid edges");
        let states = vertex_states(gadget.problem, &helped, &mask, root);
        match gadget.problem {
            Problem::Cvc => {
                if let Some((x, y)) = gadget.edges.iter().find(|&&(x, y)| !mask[x] && !mask[y]) {
                    failures.push(format!("state {ell}: edge {}-{} uncovered", gadget.name(*x), gadget.name(*y)));
                }
                for v in 0..gadget.n() {
                    if mask[v] && states[v] != Atom::OneConnected {
                        failures.push(format!("state {ell}: {} not root-connected", gadget.name(v)));
                    }
                }
            }
            Problem::Cds => {
                let plain = vertex_states(gadget.problem, &graph, &mask, root);
                for v in 0..gadget.n() {
                    let name = gadget.name(v);
                    let exempt = gadget.join.contains(&v) || name == "a_{1,1}" || name == "a_{2,1}";
                    if !exempt && !matches!(plain[v], Atom::ZeroDominated | Atom::OneConnected) {
                        failures.push(format!("state {ell}: {} is {}", gadget.name(v), plain[v].name()));
                    }
                    if !matches!(states[v], Atom::ZeroDominated | Atom::OneConnected) {
                        failures.push(format!(
                            "state {ell}: {} is {} with a served boundary",
                            gadget.name(v),
                            states[v].name()
                        ));
                    }
                }
            }
        }
    }
    failures
}

/// Constraint broken at the boundary between two consecutive gadgets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Violation {
    UncoveredEdge(String, String),
    Undominated(String),
    NotRootConnected(String),
}

#[derive(Clone, Debug, Serialize)]
pub struct TransitionCheck {
    /// 1-based state of the first gadget.
    pub from: usize,
    /// 1-based state of the second gadget.
    pub to: usize,
    pub violations: Vec<Violation>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TransitionReport {
    pub problem: Problem,
    pub checks: Vec<TransitionCheck>,
}

impl TransitionReport {
    /// Backward transitions all break a constraint and staying in a state breaks none.
    pub fn ok(&self) -> bool {
        self.checks.iter().all(|c| {
            if c.from > c.to {
                !c.violations.is_empty()
            } else if c.from == c.to {
                c.violations.is_empty()
            } else {
                true
            }
        })
    }

    pub fn get(&self, from: usize, to: usize) -> Option<&TransitionCheck> {
        self.checks.iter().find(|c| c.from == from && c.to == to)
    }
}

/// Joins two gadget copies as in a path row and checks every pair of canonical solutions
/// at the four inner boundary vertices.
pub fn verify_gadget_transitions(problem: Problem) -> TransitionReport {
    let gadget = build_path_gadget(problem);
    let n = gadget.n();
    let root = 2 * n;
    let mut edges = Vec::new();
    for copy in 0..2 {
        let off = copy * n;
        edges.extend(gadget.edges.iter().map(|&(x, y)| (x + off, y + off)));
        edges.extend(gadget.root_adjacent.iter().map(|&x| (x + off, root)));
    }
    let left = [gadget.join[2], gadget.join[3]];
    let right = [gadget.join[0] + n, gadget.join[1] + n];
    let mut join_edges = Vec::new();
    for x in left {
        for y in right {
            join_edges.push((x, y));
        }
    }
    edges.extend(&join_edges);
    let graph = LabeledGraph::unlabeled(root + 1, edges).expect("valid edges");
    let name = |v: usize| if v < n { gadget.name_in_copy(v, 1) } else { gadget.name_in_copy(v - n, 2) };
    let inner: Vec<usize> = left.iter().chain(&right).copied().collect();
    let states = gadget.solutions.len();
    let mut checks = Vec::new();
    for l1 in 0..states {
        for l2 in 0..states {
            let mut mask = vec![false; graph.n()];
            for &v in &gadget.solutions[l1] {
                mask[v] = true;
            }
            for &v in &gadget.solutions[l2] {
                mask[v + n] = true;
            }
            mask[root] = true;
            let vs = vertex_states(problem, &graph, &mask, root);
            let mut violations = Vec::new();
            if problem == Problem::Cvc {
                for &(x, y) in &join_edges {
                    if !mask[x] && !mask[y] {
                        violations.push(Violation::UncoveredEdge(name(x), name(y)));
                    }
                }
            }
            for &v in &inner {
                match vs[v] {
                    Atom::ZeroUndominated => violations.push(Violation::Undominated(name(v))),
                    Atom::OneDisconnected => violations.push(Violation::NotRootConnected(name(v))),
                    _ => {}
                }
            }
            checks.push(TransitionCheck { from: l1 + 1, to: l2 + 1, violations });
        }
    }
    TransitionReport { problem, checks }
}

/// Parts of a decoding gadget; `h` indexes the digit sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum DecodingPart {
    X(usize),
    XBar(usize),
    Y(usize),
    Z,
    ZBar,
}

/// What a vertex of a generated instance stands for. Groups, rows and columns are 0-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Role {
    Root,
    RootLeaf,
    Clause { column: usize, bar: bool },
    Decoding { group: usize, column: usize, part: DecodingPart },
    Gadget { group: usize, row: usize, column: usize, local: usize },
}

#[derive(Clone, Debug)]
pub struct GeneratedInstance {
    pub params: GadgetParams,
    pub graph: LabeledGraph,
    pub expression: CliqueExpression,
    pub budget: u64,
    pub roles: Vec<Role>,
}

impl GeneratedInstance {
    pub fn vertex(&self, role: Role) -> Option<Vertex> {
        self.roles.iter().position(|&r| r == role)
    }

    /// Human-readable name of a vertex.
    pub fn vertex_name(&self, v: Vertex, gadget: &PathGadget) -> String {
        match self.roles[v] {
            Role::Root => "r".into(),
            Role::RootLeaf => "r'".into(),
            Role::Clause { column, bar } => format!("{}^{}", if bar { "obar" } else { "o" }, column + 1),
            Role::Decoding { group, column, part } => {
                let sup = format!("{},{}", group + 1, column + 1);
                match part {
                    DecodingPart::X(h) => format!("x^{{{sup}}}_{h}"),
                    DecodingPart::XBar(h) => format!("xbar^{{{sup}}}_{h}"),
                    DecodingPart::Y(h) => format!("y^{{{sup}}}_{h}"),
                    DecodingPart::Z => format!("z^{{{sup}}}"),
                    DecodingPart::ZBar => format!("zbar^{{{sup}}}"),
                }
            }
            Role::Gadget { group, row, column, local } => {
                let (base, sub) = &gadget.names[local];
                format!("{base}^{{{},{},{}}}_{sub}", group + 1, row + 1, column + 1)
            }
        }
    }
}

struct InstanceBuilder {
    roles: Vec<Role>,
    edges: Vec<(Vertex, Vertex)>,
}

impl InstanceBuilder {
    fn add(&mut self, role: Role) -> Vertex {
        self.roles.push(role);
        self.roles.len() - 1
    }
}

/// Whether assignment number `a` of group `group` satisfies `clause`.
fn group_satisfies(params: &GadgetParams, group: usize, a: usize, clause: &[i64]) -> bool {
    let vars = params.group_vars(group);
    clause.iter().any(|&lit| {
        let v = lit.unsigned_abs() as usize - 1;
        vars.contains(&v) && ((a >> (v - vars.start)) & 1 == 1) == (lit > 0)
    })
}

fn build_instance(problem: Problem, sat: &SatInstance, beta: usize) -> Result<GeneratedInstance, GenError> {
    let params = GadgetParams::new(problem, sat, beta)?;
    let gadget = build_path_gadget(problem);
    let seqs = params.sequences();
    let mut b = InstanceBuilder { roles: Vec::new(), edges: Vec::new() };
    let root = b.add(Role::Root);
    let leaf = b.add(Role::RootLeaf);
    b.edges.push((root, leaf));
    // boundary vertices of the previous column, per (group, row)
    let mut previous: HashMap<(usize, usize), [Vertex; 2]> = HashMap::new();
    for column in 0..params.columns {
        let o = b.add(Role::Clause { column, bar: false });
        let obar = b.add(Role::Clause { column, bar: true });
        b.edges.push((o, obar));
        let clause = &sat.clauses()[column % params.m];
        for group in 0..params.t {
            let dec = |part| Role::Decoding { group, column, part };
            let z = b.add(dec(DecodingPart::Z));
            let zbar = b.add(dec(DecodingPart::ZBar));
            b.edges.push((z, zbar));
            let assignments = 1usize << params.group_vars(group).len();
            let mut xs = Vec::with_capacity(seqs);
            for h in 0..seqs {
                let y = b.add(dec(DecodingPart::Y(h)));
                let x = b.add(dec(DecodingPart::X(h)));
                let xbar = b.add(dec(DecodingPart::XBar(h)));
                b.edges.extend([(x, xbar), (x, y), (y, root), (z, y)]);
                if h < assignments && group_satisfies(&params, group, h, clause) {
                    b.edges.push((o, y));
                }
                xs.push(x);
            }
            for row in 0..params.p {
                let base = b.roles.len();
                for local in 0..gadget.n() {
                    b.add(Role::Gadget { group, row, column, local });
                }
                b.edges.extend(gadget.edges.iter().map(|&(x, y)| (base + x, base + y)));
                b.edges.extend(gadget.root_adjacent.iter().map(|&x| (base + x, root)));
                let [u1, u2, u3, u4] = gadget.join.map(|u| base + u);
                match previous.insert((group, row), [u3, u4]) {
                    Some(prev) => {
                        for x in prev {
                            b.edges.extend([(x, u1), (x, u2)]);
                        }
                    }
                    None => b.edges.extend([(u1, root), (u2, root)]),
                }
                if column + 1 == params.columns {
                    b.edges.extend([(u3, root), (u4, root)]);
                }
                for (h, &x) in xs.iter().enumerate() {
                    let digit = params.kappa(h)[row];
                    b.edges.push((x, base + gadget.clique[digit - 1]));
                }
            }
        }
    }
    let graph = LabeledGraph::unlabeled(b.roles.len(), b.edges)?;
    let budget = params.budget();
    let expression = emit_linear(&params, &gadget, &graph, &b.roles)?;
    Ok(GeneratedInstance { params, graph, expression, budget, roles: b.roles })
}

pub fn build_cvc_instance(sat: &SatInstance, beta: usize) -> Result<GeneratedInstance, GenError> {
    build_instance(Problem::Cvc, sat, beta)
}

pub fn build_cds_instance(sat: &SatInstance, beta: usize) -> Result<GeneratedInstance, GenError> {
    build_instance(Problem::Cds, sat, beta)
}

pub fn build_generated(problem: Problem, sat: &SatInstance, beta: usize) -> Result<GeneratedInstance, GenError> {
    build_instance(problem, sat, beta)
}

pub fn emit_cvc_linear_expression(instance: &GeneratedInstance) -> Result<CliqueExpression, GenError> {
    emit_linear(&instance.params, &build_cvc_path_gadget(), &instance.graph, &instance.roles)
}

pub fn emit_cds_linear_expression(instance: &GeneratedInstance) -> Result<CliqueExpression, GenError> {
    emit_linear(&instance.params, &build_cds_path_gadget(), &instance.graph, &instance.roles)
}

/// Position of a vertex in the column-by-column order: root first, then per column the
/// clause pair, then per group its decoding gadget followed by its path gadgets.
fn emission_key(role: Role) -> (usize, usize, usize, usize) {
    match role {
        Role::Root => (0, 0, 0, 0),
        Role::RootLeaf => (0, 0, 0, 1),
        Role::Clause { column, bar } => (column + 1, 0, 0, bar as usize),
        Role::Decoding { group, column, part } => {
            let rank = match part {
                DecodingPart::Z => 0,
                DecodingPart::ZBar => 1,
                DecodingPart::Y(h) => 2 + 3 * h,
                DecodingPart::X(h) => 3 + 3 * h,
                DecodingPart::XBar(h) => 4 + 3 * h,
            };
            (column + 1, group + 1, 0, rank)
        }
        Role::Gadget { group, row, column, local } => (column + 1, group + 1, row + 1, local),
    }
}

const TRASH: Label = 1;

/// Introduces vertices one at a time with a fresh label, joins each to the label classes
/// of its earlier neighbours and sends vertices whose neighbours are all present to the
/// trash label, freeing their labels for reuse.
struct Emitter<'a> {
    graph: &'a LabeledGraph,
    builder: LinearBuilder,
    label: Vec<Option<Label>>,
    pending: Vec<usize>,
    classes: BTreeMap<Label, Vec<Vertex>>,
    free: BTreeSet<Label>,
    next: Label,
}

impl<'a> Emitter<'a> {
    fn new(graph: &'a LabeledGraph) -> Self {
        Self {
            graph,
            builder: LinearBuilder::new(),
            label: vec![None; graph.n()],
            pending: (0..graph.n()).map(|v| graph.degree(v)).collect(),
            classes: BTreeMap::new(),
            free: BTreeSet::new(),
            next: TRASH + 1,
        }
    }

    fn alloc(&mut self) -> Label {
        self.free.pop_first().unwrap_or_else(|| {
            self.next += 1;
            self.next - 1
        })
    }

    fn intro(&mut self, v: Vertex) -> Result<(), GenError> {
        let own = self.alloc();
        self.builder.intro_vertex(own, v);
        let mut seen: BTreeMap<Label, usize> = BTreeMap::new();
        for &w in self.graph.neighbors(v) {
            if let Some(l) = self.label[w] {
                *seen.entry(l).or_default() += 1;
                self.pending[w] -= 1;
                self.pending[v] -= 1;
            }
        }
        for (&l, &count) in &seen {
            if l == TRASH || count != self.classes[&l].len() {
                return Err(GenError::Emit(v));
            }
            self.builder.join(own, l);
        }
        self.label[v] = Some(own);
        self.classes.insert(own, vec![v]);
        let touched: Vec<Label> = std::iter::once(own).chain(seen.keys().copied()).collect();
        for l in touched {
            self.retire(l);
        }
        Ok(())
    }

    fn retire(&mut self, l: Label) {
        if l == TRASH || !self.classes[&l].iter().all(|&w| self.pending[w] == 0) {
            return;
        }
        self.builder.relabel(l, TRASH);
        for w in self.classes.remove(&l).expect("live class") {
            self.label[w] = Some(TRASH);
        }
        self.free.insert(l);
    }

    /// Moves `b` into the class of `a` when both are still live.
    fn merge(&mut self, a: Vertex, b: Vertex) {
        let (Some(la), Some(lb)) = (self.label[a], self.label[b]) else { return };
        if la == TRASH || lb == TRASH || la == lb {
            return;
        }
        self.builder.relabel(lb, la);
        let moved = self.classes.remove(&lb).expect("live class");
        for &w in &moved {
            self.label[w] = Some(la);
        }
        self.classes.get_mut(&la).expect("live class").extend(moved);
        self.free.insert(lb);
    }

    fn finish(self) -> Result<CliqueExpression, GenError> {
        let k = self.next - 1;
        Ok(self.builder.finish(k)?)
    }
}

fn emit_linear(
    params: &GadgetParams,
    gadget: &PathGadget,
    graph: &LabeledGraph,
    roles: &[Role],
) -> Result<CliqueExpression, GenError> {
    if gadget.problem != params.problem || roles.len() != graph.n() {
        return Err(GenError::Emit(0));
    }
    let mut order: Vec<Vertex> = (0..graph.n()).collect();
    order.sort_by_key(|&v| emission_key(roles[v]));
    let mut emitter = Emitter::new(graph);
    let mut gadget_base: Option<Vertex> = None;
    for v in order {
        emitter.intro(v)?;
        if let Role::Gadget { local, .. } = roles[v] {
            if local == 0 {
                gadget_base = Some(v);
            }
            if local + 1 == gadget.n() {
                // the outgoing boundary pair shares one label until the next column
                let base = gadget_base.ok_or(GenError::Emit(v))?;
                emitter.merge(base + gadget.join[2], base + gadget.join[3]);
            }
        }
    }
    emitter.finish()
}

/// The solution built from an assignment of all variables: the root, every clause vertex,
/// and per block the decoding vertices and canonical gadget solutions selected by the
/// assignment. Its size equals the budget; it is feasible exactly when the assignment
/// satisfies the formula.
pub fn canonical_solution(instance: &GeneratedInstance, assignment: &[bool]) -> Vec<Vertex> {
    let params = &instance.params;
    let gadget = build_path_gadget(params.problem);
    let codes: Vec<usize> = (0..params.t)
        .map(|i| params.group_vars(i).enumerate().filter(|&(_, v)| assignment[v]).map(|(bit, _)| 1 << bit).sum())
        .collect();
    let digits: Vec<Vec<usize>> = codes.iter().map(|&a| params.kappa(a)).collect();
    let mut chosen: Vec<Vertex> = Vec::new();
    for (v, &role) in instance.roles.iter().enumerate() {
        let keep = match role {
            Role::Root => true,
            Role::RootLeaf => false,
            Role::Clause { bar, .. } => !bar,
            Role::Decoding { group, part, .. } => match part {
                DecodingPart::X(_) | DecodingPart::Z => true,
                DecodingPart::Y(h) => h == codes[group],
                DecodingPart::XBar(_) | DecodingPart::ZBar => false,
            },
            Role::Gadget { group, row, local, .. } => {
                gadget.solutions[digits[group][row] - 1].binary_search(&local).is_ok()
            }
        };
        if keep {
            chosen.push(v);
        }
    }
    chosen
}

fn induced_connected(graph: &LabeledGraph, mask: &[bool]) -> bool {
    let Some(start) = mask.iter().position(|&x| x) else { return true };
    let reach = root_component(graph, mask, start);
    (0..graph.n()).all(|v| !mask[v] || reach[v])
}

pub fn is_connected_vertex_cover(graph: &LabeledGraph, set: &[Vertex]) -> bool {
    let mut mask = vec![false; graph.n()];
    for &v in set {
        mask[v] = true;
    }
    graph.edges().all(|(x, y)| mask[x] || mask[y]) && induced_connected(graph, &mask)
}

pub fn is_connected_dominating_set(graph: &LabeledGraph, set: &[Vertex]) -> bool {
    let mut mask = vec![false; graph.n()];
    for &v in set {
        mask[v] = true;
    }
    !set.is_empty()
        && (0..graph.n()).all(|v| mask[v] || graph.neighbors(v).iter().any(|&w| mask[w]))
        && induced_connected(graph, &mask)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::is_irredundant;

    fn single() -> SatInstance {
        SatInstance::new(1, vec![vec![1]]).unwrap()
    }

    #[test]
    fn dimacs_round_trip() {
        let sat = SatInstance::parse_dimacs("c demo\np cnf 3 2\n1 -2 0\n2\n3 0\n%\n0\n").unwrap();
        assert_eq!(sat.n(), 3);
        assert_eq!(sat.clauses(), &[vec![1, -2], vec![2, 3]]);
        assert!(SatInstance::parse_dimacs("p cnf 1 1\n2 0\n").is_err());
        assert!(SatInstance::parse_dimacs("p cnf 1 1\n0\n").is_err());
        assert!(SatInstance::parse_dimacs("p cnf 1 2\n1 0\n").is_err());
        assert!(SatInstance::parse_dimacs("1 0\n").is_err());
    }

    #[test]
    fn params_for_one_variable() {
        let p = GadgetParams::new(Problem::Cvc, &single(), 1).unwrap();
        assert_eq!((p.t, p.p, p.columns), (1, 1, 6));
        assert_eq!(p.budget(), (21 + 8 + 1) * 6 + 1);
        let p = GadgetParams::new(Problem::Cds, &single(), 1).unwrap();
        assert_eq!((p.t, p.p, p.columns), (1, 1, 5));
        assert_eq!(p.budget(), (14 + 7 + 1) * 5 + 1);
        let sat = SatInstance::new(5, vec![vec![1, 2], vec![-3], vec![4, -5]]).unwrap();
        let p = GadgetParams::new(Problem::Cvc, &sat, 3).unwrap();
        // 6^2 = 36 >= 8
        assert_eq!((p.t, p.p, p.columns), (2, 2, 3 * 21));
        assert!(GadgetParams::new(Problem::Cvc, &sat, 0).is_err());
    }

    #[test]
    fn kappa_is_injective() {
        let p = GadgetParams::new(Problem::Cds, &SatInstance::new(4, vec![vec![1]]).unwrap(), 4).unwrap();
        let seqs: BTreeSet<Vec<usize>> = (0..16).map(|a| p.kappa(a)).collect();
        assert_eq!(seqs.len(), 16);
        assert!(seqs.iter().flatten().all(|&d| (1..=5).contains(&d)));
    }

    #[test]
    fn cvc_gadget_shape() {
        let g = build_cvc_path_gadget();
        assert_eq!(g.n(), 38);
        let graph = g.with_root();
        for (i, &x) in g.clique.iter().enumerate() {
            for &y in &g.clique[i + 1..] {
                assert!(graph.has_edge(x, y));
            }
        }
        assert_eq!(g.find("u_3"), Some(g.join[2]));
        assert!(check_canonical_solutions(&g).is_empty(), "{:?}", check_canonical_solutions(&g));
    }

    #[test]
    fn cds_gadget_shape() {
        let g = build_cds_path_gadget();
        assert_eq!(g.n(), 27 + 12 + 10 + 30);
        assert!(check_canonical_solutions(&g).is_empty(), "{:?}", check_canonical_solutions(&g));
        let graph = g.with_root();
        let mut used = BTreeSet::new();
        for &v in &g.packing {
            for w in std::iter::once(v).chain(graph.neighbors(v).iter().copied()) {
                assert!(used.insert(w), "closed neighbourhoods overlap at {}", g.name(w));
            }
        }
        assert_eq!(g.packing.len(), 10);
    }

    #[test]
    fn transitions() {
        for problem in [Problem::Cvc, Problem::Cds] {
            let report = verify_gadget_transitions(problem);
            assert!(report.ok(), "{problem:?}");
        }
        let cvc = verify_gadget_transitions(Problem::Cvc);
        assert!(matches!(cvc.get(3, 1).unwrap().violations[0], Violation::UncoveredEdge(..)));
        let cds = verify_gadget_transitions(Problem::Cds);
        assert!(cds.get(4, 3).unwrap().violations.contains(&Violation::NotRootConnected("u^2_{1,1}".into())));
    }

    #[test]
    fn instance_expression_matches_graph() {
        for problem in [Problem::Cvc, Problem::Cds] {
            let inst = build_generated(problem, &single(), 1).unwrap();
            let e = &inst.expression;
            assert!(e.is_linear());
            assert!(is_irredundant(e));
            assert!(e.evaluate().same_edges(&inst.graph));
            assert!(e.width() as usize <= inst.params.width_bound(), "{} > {}", e.width(), inst.params.width_bound());
        }
    }

    #[test]
    fn canonical_solution_tracks_satisfaction() {
        let sat = SatInstance::new(2, vec![vec![1, 2], vec![-1], vec![-2, 1]]).unwrap();
        let unsat_everywhere = [[false, false], [true, false], [false, true], [true, true]];
        for problem in [Problem::Cvc, Problem::Cds] {
            let inst = build_generated(problem, &sat, 1).unwrap();
            let check = |set: &[Vertex]| match problem {
                Problem::Cvc => is_connected_vertex_cover(&inst.graph, set),
                Problem::Cds => is_connected_dominating_set(&inst.graph, set),
            };
            for a in unsat_everywhere {
                let x = canonical_solution(&inst, &a);
                assert_eq!(x.len() as u64, inst.budget);
                assert_eq!(check(&x), sat.satisfied_by(&a), "{problem:?} {a:?}");
            }
        }
        let sat = SatInstance::new(2, vec![vec![1, 2], vec![-1]]).unwrap();
        for problem in [Problem::Cvc, Problem::Cds] {
            let inst = build_generated(problem, &sat, 2).unwrap();
            let x = canonical_solution(&inst, &[false, true]);
            assert_eq!(x.len() as u64, inst.budget);
            let ok = match problem {
                Problem::Cvc => is_connected_vertex_cover(&inst.graph, &x),
                Problem::Cds => is_connected_dominating_set(&inst.graph, &x),
            };
            assert!(ok);
        }
    }
}
