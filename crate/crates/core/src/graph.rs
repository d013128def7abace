//! Labeled graphs, cost and weight functions, and the text format for graphs.

use std::fmt::Write as _;

use rand::Rng;
use rand::SeedableRng;
use rand_xoshiro::SplitMix64;

use crate::error::GraphError;

pub type Vertex = usize;
pub type Label = u32;

/// Undirected simple graph on `0..n` with a label in `1..=k` per vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledGraph {
    k: Label,
    labels: Vec<Label>,
    adj: Vec<Vec<Vertex>>,
    m: usize,
}

impl LabeledGraph {
    pub fn new(
        k: Label,
        labels: Vec<Label>,
        edges: impl IntoIterator<Item = (Vertex, Vertex)>,
    ) -> Result<Self, GraphError> {
        let n = labels.len();
        for (v, &l) in labels.iter().enumerate() {
            if l == 0 || l > k {
                return Err(GraphError::LabelOutOfRange { vertex: v, label: l, k });
            }
        }
        let mut adj = vec![Vec::new(); n];
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(GraphError::VertexOutOfRange { vertex: u.max(v), n });
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut m = 0;
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
            m += list.len();
        }
        Ok(Self { k, labels, adj, m: m / 2 })
    }

    /// Graph with all vertices carrying label 1.
    pub fn unlabeled(n: usize, edges: impl IntoIterator<Item = (Vertex, Vertex)>) -> Result<Self, GraphError> {
        Self::new(1, vec![1; n], edges)
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> Label {
        self.k
    }

    pub fn label(&self, v: Vertex) -> Label {
        self.labels[v]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.adj[v]
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    /// Edges `(u, v)` with `u < v` in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, list)| list.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    /// Same vertex ids and edge set, ignoring labels.
    pub fn same_edges(&self, other: &LabeledGraph) -> bool {
        self.adj == other.adj
    }

    pub fn with_labels(&self, k: Label, labels: Vec<Label>) -> Result<Self, GraphError> {
        Self::new(k, labels, self.edges())
    }

    /// Number of connected components of the subgraph induced by `mask`.
    pub fn components_within(&self, mask: &[bool]) -> usize {
        let mut seen = vec![false; self.n()];
        let mut stack = Vec::new();
        let mut count = 0;
        for s in 0..self.n() {
            if !mask[s] || seen[s] {
                continue;
            }
            count += 1;
            seen[s] = true;
            stack.push(s);
            while let Some(u) = stack.pop() {
                for &v in &self.adj[u] {
                    if mask[v] && !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
        }
        count
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "p graph {} {} {}", self.n(), self.m(), self.k);
        for (v, l) in self.labels.iter().enumerate() {
            let _ = writeln!(out, "l {v} {l}");
        }
        for (u, v) in self.edges() {
            let _ = writeln!(out, "e {u} {v}");
        }
        out
    }
}

pub fn connected_components(graph: &LabeledGraph) -> usize {
    graph.components_within(&vec![true; graph.n()])
}

pub fn is_connected(graph: &LabeledGraph) -> bool {
    graph.n() >= 1 && connected_components(graph) == 1
}

/// Positive vertex costs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Costs(Vec<u64>);

/// Default polynomial cap on the total cost, as an exponent of `n`.
pub const COST_CAP_EXPONENT: u32 = 3;

impl Costs {
    pub fn unit(n: usize) -> Self {
        Self(vec![1; n])
    }

    pub fn new(values: Vec<u64>) -> Result<Self, GraphError> {
        let n = values.len() as u64;
        Self::with_cap(values, n.saturating_pow(COST_CAP_EXPONENT))
    }

    pub fn with_cap(values: Vec<u64>, cap: u64) -> Result<Self, GraphError> {
        if let Some(v) = values.iter().position(|&c| c == 0) {
            return Err(GraphError::NonPositiveCost(v));
        }
        let total = values.iter().try_fold(0u64, |acc, &c| acc.checked_add(c));
        match total {
            Some(t) if t <= cap => Ok(Self(values)),
            _ => Err(GraphError::CostCap { cap }),
        }
    }

    pub fn get(&self, v: Vertex) -> u64 {
        self.0[v]
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    pub fn values(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Isolation weights in `[1, 2n]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Weights(Vec<u64>);

impl Weights {
    pub fn from_values(values: Vec<u64>) -> Self {
        Self(values)
    }

    pub fn get(&self, v: Vertex) -> u64 {
        self.0[v]
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    pub fn values(&self) -> &[u64] {
        &self.0
    }
}

/// Draws `w(v)` uniformly from `[1, 2n]` with a SplitMix64 stream seeded by `seed`.
pub fn sample_weights(graph: &LabeledGraph, seed: u64) -> Result<Weights, GraphError> {
    sample_weights_n(graph.n(), seed)
}

pub fn sample_weights_n(n: usize, seed: u64) -> Result<Weights, GraphError> {
    if n == 0 {
        return Err(GraphError::Empty);
    }
    let range = 2 * n as u64;
    let mut rng = SplitMix64::seed_from_u64(seed);
    Ok(Weights((0..n).map(|_| rng.gen_range(1..=range)).collect()))
}

/// Graph file contents: the graph plus optional per-vertex costs (`c <v> <cost>` lines).
#[derive(Clone, Debug)]
pub struct GraphFile {
    pub graph: LabeledGraph,
    pub costs: Option<Vec<u64>>,
}

pub fn parse_graph(text: &str) -> Result<GraphFile, GraphError> {
    let mut header: Option<(usize, usize, Label)> = None;
    let mut labels: Vec<Option<Label>> = Vec::new();
    let mut costs: Vec<Option<u64>> = Vec::new();
    let mut edges = Vec::new();
    let mut any_cost = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("c ") && header.is_none() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let num = |i: usize| -> Result<u64, GraphError> {
            toks.get(i)
                .and_then(|t| t.parse::<u64>().ok())
                .ok_or(GraphError::Syntax { line: line_no, text: raw.to_string() })
        };
        match toks[0] {
            "p" => {
                if toks.get(1) != Some(&"graph") || header.is_some() {
                    return Err(GraphError::Syntax { line: line_no, text: raw.to_string() });
                }
                let n = num(2)? as usize;
                header = Some((n, num(3)? as usize, num(4)? as Label));
                labels = vec![None; n];
                costs = vec![None; n];
            }
            "l" | "e" | "c" => {
                let Some((n, _, _)) = header else {
                    return Err(GraphError::MissingHeader);
                };
                let a = num(1)? as usize;
                let b = num(2)?;
                if a >= n {
                    return Err(GraphError::VertexOutOfRange { vertex: a, n });
                }
                match toks[0] {
                    "l" => labels[a] = Some(b as Label),
                    "c" => {
                        costs[a] = Some(b);
                        any_cost = true;
                    }
                    _ => edges.push((a, b as usize)),
                }
            }
            _ => return Err(GraphError::Syntax { line: line_no, text: raw.to_string() }),
        }
    }
    let (_, m, k) = header.ok_or(GraphError::MissingHeader)?;
    let labels: Vec<Label> =
        labels.iter().enumerate().map(|(v, l)| l.ok_or(GraphError::MissingLabel(v))).collect::<Result<_, _>>()?;
    let graph = LabeledGraph::new(k, labels, edges)?;
    if graph.m() != m {
        return Err(GraphError::EdgeCount { declared: m, found: graph.m() });
    }
    let costs = if any_cost { Some(costs.iter().map(|c| c.unwrap_or(1)).collect()) } else { None };
    Ok(GraphFile { graph, costs })
}
