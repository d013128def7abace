//! Clique-expression syntax trees, the line-oriented text format, and evaluation.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use crate::error::ExprError;
use crate::graph::{Label, LabeledGraph, Vertex};

pub type NodeId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Intro { label: Label, vertex: Vertex },
    Union(NodeId, NodeId),
    Relabel { from: Label, to: Label, child: NodeId },
    Join { a: Label, b: Label, child: NodeId },
    Dead { label: Label, child: NodeId },
}

impl Node {
    pub fn children(&self) -> impl Iterator<Item = NodeId> {
        let (a, b) = match *self {
            Node::Intro { .. } => (None, None),
            Node::Union(l, r) => (Some(l), Some(r)),
            Node::Relabel { child, .. } | Node::Join { child, .. } | Node::Dead { child, .. } => (Some(child), None),
        };
        a.into_iter().chain(b)
    }

    fn labels(&self) -> impl Iterator<Item = Label> {
        let (a, b) = match *self {
            Node::Intro { label, .. } | Node::Dead { label, .. } => (Some(label), None),
            Node::Relabel { from, to, .. } => (Some(from), Some(to)),
            Node::Join { a, b, .. } => (Some(a), Some(b)),
            Node::Union(..) => (None, None),
        };
        a.into_iter().chain(b)
    }

    pub(crate) fn remap_children(self, map: impl Fn(NodeId) -> NodeId) -> Node {
        match self {
            Node::Intro { .. } => self,
            Node::Union(l, r) => Node::Union(map(l), map(r)),
            Node::Relabel { from, to, child } => Node::Relabel { from, to, child: map(child) },
            Node::Join { a, b, child } => Node::Join { a, b, child: map(child) },
            Node::Dead { label, child } => Node::Dead { label, child: map(child) },
        }
    }
}

/// A validated expression. Nodes are stored children-first and the root is the last node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliqueExpression {
    nodes: Vec<Node>,
    k: Label,
    n: usize,
}

impl CliqueExpression {
    /// Validates `nodes` (children before parents, root last) against width `k`.
    pub fn new(nodes: Vec<Node>, k: Label) -> Result<Self, ExprError> {
        if nodes.is_empty() {
            return Err(ExprError::Empty);
        }
        let mut has_parent = vec![false; nodes.len()];
        let mut seen_vertex: HashSet<Vertex> = HashSet::new();
        for (idx, node) in nodes.iter().enumerate() {
            let line = idx + 1;
            for l in node.labels() {
                if l == 0 || l > k {
                    return Err(ExprError::LabelOutOfRange { line, label: l, k });
                }
            }
            match *node {
                Node::Join { a, b, .. } if a == b => return Err(ExprError::SelfJoin { line, label: a }),
                Node::Intro { vertex, .. } if !seen_vertex.insert(vertex) => {
                    return Err(ExprError::DuplicateVertex { line, vertex })
                }
                _ => {}
            }
            for c in node.children() {
                if c >= idx {
                    return Err(ExprError::DanglingReference { line, id: c as u64 + 1 });
                }
                if std::mem::replace(&mut has_parent[c], true) {
                    return Err(ExprError::SharedChild { line, id: c as u64 + 1 });
                }
            }
        }
        if let Some(orphan) = has_parent[..nodes.len() - 1].iter().position(|&p| !p) {
            return Err(ExprError::Unreachable(orphan as u64 + 1));
        }
        let n = seen_vertex.len();
        if let Some(missing) = (0..n).find(|v| !seen_vertex.contains(v)) {
            return Err(ExprError::VertexGap { n, missing });
        }
        Ok(Self { nodes, k, n })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> Node {
        self.nodes[id]
    }

    pub fn root(&self) -> NodeId {
        self.nodes.len() - 1
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Declared width.
    pub fn k(&self) -> Label {
        self.k
    }

    /// Number of introduced vertices.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Largest label mentioned by any node.
    pub fn width(&self) -> Label {
        self.nodes.iter().flat_map(|n| n.labels()).max().unwrap_or(0)
    }

    /// Every union has a single introduce as its right operand.
    pub fn is_linear(&self) -> bool {
        self.nodes.iter().all(|n| match *n {
            Node::Union(_, r) => matches!(self.nodes[r], Node::Intro { .. }),
            _ => true,
        })
    }

    pub fn has_dead_nodes(&self) -> bool {
        self.nodes.iter().any(|n| matches!(n, Node::Dead { .. }))
    }

    /// Parent of every node (`None` for the root).
    pub fn parents(&self) -> Vec<Option<NodeId>> {
        let mut parent = vec![None; self.nodes.len()];
        for (idx, node) in self.nodes.iter().enumerate() {
            for c in node.children() {
                parent[c] = Some(idx);
            }
        }
        parent
    }

    /// Keeps the nodes marked in `keep` (the root must be kept); a dropped unary node is
    /// replaced by its child. Dropped union or introduce nodes are not allowed.
    pub(crate) fn splice(&self, keep: &[bool], k: Label) -> Result<Self, ExprError> {
        let mut new_id: Vec<NodeId> = vec![usize::MAX; self.nodes.len()];
        let mut out = Vec::with_capacity(self.nodes.len());
        for (idx, node) in self.nodes.iter().enumerate() {
            if keep[idx] {
                out.push(node.remap_children(|c| new_id[c]));
                new_id[idx] = out.len() - 1;
            } else {
                let child = node.children().next().expect("only unary nodes are dropped");
                new_id[idx] = new_id[child];
            }
        }
        if !keep[self.root()] {
            // the root collapsed onto a descendant: drop everything above that node
            let target = new_id[self.root()];
            out.truncate(target + 1);
        }
        Self::new(out, k)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "p expr {}{}", self.k, if self.is_linear() { " linear" } else { "" });
        for (idx, node) in self.nodes.iter().enumerate() {
            let id = idx + 1;
            let _ = match *node {
                Node::Intro { label, vertex } => writeln!(out, "{id}: intro {label} {vertex}"),
                Node::Union(l, r) => writeln!(out, "{id}: union {} {}", l + 1, r + 1),
                Node::Relabel { from, to, child } => writeln!(out, "{id}: relabel {from} {to} {}", child + 1),
                Node::Join { a, b, child } => writeln!(out, "{id}: join {a} {b} {}", child + 1),
                Node::Dead { label, child } => writeln!(out, "{id}: dead {label} {}", child + 1),
            };
        }
        let _ = writeln!(out, "root {}", self.nodes.len());
        out
    }

    /// Evaluates the expression into its labeled graph.
    pub fn evaluate(&self) -> LabeledGraph {
        let mut eval = Evaluator::new(self);
        eval.run(|_, _| {});
        eval.finish()
    }

    /// Per join node: (number of vertex pairs, number of those pairs already adjacent).
    pub fn join_overlaps(&self) -> Vec<(NodeId, usize, usize)> {
        let mut report = Vec::new();
        let mut eval = Evaluator::new(self);
        eval.run(|node, overlap| report.push((node, overlap.0, overlap.1)));
        report
    }
}

/// Streaming evaluator: each subtree's label classes are consumed by its parent.
struct Evaluator<'a> {
    expr: &'a CliqueExpression,
    edges: HashSet<(Vertex, Vertex)>,
    state: Vec<Option<BTreeMap<Label, Vec<Vertex>>>>,
}

impl<'a> Evaluator<'a> {
    fn new(expr: &'a CliqueExpression) -> Self {
        Self { expr, edges: HashSet::new(), state: vec![None; expr.len()] }
    }

    fn run(&mut self, mut on_join: impl FnMut(NodeId, (usize, usize))) {
        for idx in 0..self.expr.len() {
            let classes = match self.expr.nodes[idx] {
                Node::Intro { label, vertex } => BTreeMap::from([(label, vec![vertex])]),
                Node::Union(l, r) => {
                    let mut a = self.state[l].take().unwrap();
                    let mut b = self.state[r].take().unwrap();
                    if a.len() < b.len() {
                        std::mem::swap(&mut a, &mut b);
                    }
                    for (label, mut vs) in b {
                        a.entry(label).or_default().append(&mut vs);
                    }
                    a
                }
                Node::Relabel { from, to, child } => {
                    let mut c = self.state[child].take().unwrap();
                    if from != to {
                        if let Some(mut vs) = c.remove(&from) {
                            c.entry(to).or_default().append(&mut vs);
                        }
                    }
                    c
                }
                Node::Join { a, b, child } => {
                    let c = self.state[child].take().unwrap();
                    let empty = Vec::new();
                    let va = c.get(&a).unwrap_or(&empty);
                    let vb = c.get(&b).unwrap_or(&empty);
                    let mut overlap = 0;
                    for &x in va {
                        for &y in vb {
                            if !self.edges.insert((x.min(y), x.max(y))) {
                                overlap += 1;
                            }
                        }
                    }
                    on_join(idx, (va.len() * vb.len(), overlap));
                    c
                }
                Node::Dead { child, .. } => self.state[child].take().unwrap(),
            };
            self.state[idx] = Some(classes);
        }
    }

    fn finish(mut self) -> LabeledGraph {
        let root = self.state[self.expr.root()].take().unwrap();
        let mut labels = vec![0; self.expr.n()];
        for (label, vs) in root {
            for v in vs {
                labels[v] = label;
            }
        }
        LabeledGraph::new(self.expr.k.max(1), labels, self.edges).expect("expression produces a valid graph")
    }
}

/// Parses the line format. Header `p expr <k> [linear]` is optional; without it the
/// width is the largest label used.
pub fn parse_expression(text: &str) -> Result<CliqueExpression, ExprError> {
    let mut declared_k: Option<Label> = None;
    let mut claims_linear = false;
    let mut nodes = Vec::new();
    let mut lines = Vec::new();
    let mut index_of: HashMap<u64, NodeId> = HashMap::new();
    let mut root: Option<(usize, u64)> = None;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with("c ") {
            continue;
        }
        let syntax = || ExprError::Syntax { line, text: raw.to_string() };
        let mut body = trimmed;
        if let Some(rest) = body.strip_prefix("p ") {
            let toks: Vec<&str> = rest.split_whitespace().collect();
            if toks.first() != Some(&"expr") || toks.len() < 2 {
                return Err(syntax());
            }
            declared_k = Some(toks[1].parse().map_err(|_| syntax())?);
            claims_linear = toks[2..].contains(&"linear");
            continue;
        }
        if trimmed == "linear" {
            claims_linear = true;
            continue;
        }
        let mut is_root = false;
        if let Some(rest) = body.strip_prefix("root") {
            let rest = rest.trim_start();
            if !rest.contains(':') {
                let id: u64 = rest.trim().parse().map_err(|_| syntax())?;
                root = Some((line, id));
                continue;
            }
            is_root = true;
            body = rest;
        }
        let (id_part, op_part) = body.split_once(':').ok_or_else(syntax)?;
        let id: u64 = id_part.trim().parse().map_err(|_| syntax())?;
        let toks: Vec<&str> = op_part.split_whitespace().collect();
        let num =
            |i: usize| -> Result<u64, ExprError> { toks.get(i).and_then(|t| t.parse::<u64>().ok()).ok_or_else(syntax) };
        let child = |i: usize| -> Result<NodeId, ExprError> {
            let cid = num(i)?;
            index_of.get(&cid).copied().ok_or(ExprError::DanglingReference { line, id: cid })
        };
        let label = |i: usize| -> Result<Label, ExprError> {
            let l = num(i)?;
            Label::try_from(l).map_err(|_| ExprError::LabelOutOfRange { line, label: Label::MAX, k: 0 })
        };
        let expected = match toks.first().copied() {
            Some("intro") | Some("union") | Some("relabel") | Some("join") => {
                if toks[0] == "relabel" || toks[0] == "join" {
                    4
                } else {
                    3
                }
            }
            Some("dead") => 3,
            _ => return Err(syntax()),
        };
        if toks.len() != expected {
            return Err(syntax());
        }
        let node = match toks[0] {
            "intro" => Node::Intro { label: label(1)?, vertex: num(2)? as Vertex },
            "union" => Node::Union(child(1)?, child(2)?),
            "relabel" => Node::Relabel { from: label(1)?, to: label(2)?, child: child(3)? },
            "join" => {
                let (a, b) = (label(1)?, label(2)?);
                if a == b {
                    return Err(ExprError::SelfJoin { line, label: a });
                }
                Node::Join { a, b, child: child(3)? }
            }
            _ => Node::Dead { label: label(1)?, child: child(2)? },
        };
        if index_of.insert(id, nodes.len()).is_some() {
            return Err(ExprError::DuplicateId { line, id });
        }
        nodes.push(node);
        lines.push((line, id));
        if is_root {
            root = Some((line, id));
        }
    }

    let (root_line, root_id) = root.ok_or(ExprError::MissingRoot)?;
    let root_idx = *index_of.get(&root_id).ok_or(ExprError::DanglingReference { line: root_line, id: root_id })?;
    if root_idx + 1 != nodes.len() {
        // nodes defined after the root cannot be reachable from it
        let extra = lines[root_idx + 1].1;
        return Err(ExprError::Unreachable(extra));
    }
    let max_label = nodes.iter().flat_map(|n| n.labels()).max().unwrap_or(1);
    let k = declared_k.unwrap_or(max_label.max(1));
    // report errors against the original line numbers
    CliqueExpression::new(nodes, k).map_err(|e| relocate(e, &lines)).and_then(|e| {
        if claims_linear && !e.is_linear() {
            Err(ExprError::Syntax { line: 1, text: "header claims linear but expression is not".into() })
        } else {
            Ok(e)
        }
    })
}

fn relocate(err: ExprError, lines: &[(usize, u64)]) -> ExprError {
    let fix = |idx: usize| lines.get(idx - 1).map(|&(l, _)| l).unwrap_or(idx);
    let id_of = |internal: u64| lines.get(internal as usize - 1).map(|&(_, id)| id).unwrap_or(internal);
    match err {
        ExprError::DuplicateVertex { line, vertex } => ExprError::DuplicateVertex { line: fix(line), vertex },
        ExprError::SelfJoin { line, label } => ExprError::SelfJoin { line: fix(line), label },
        ExprError::LabelOutOfRange { line, label, k } => ExprError::LabelOutOfRange { line: fix(line), label, k },
        ExprError::SharedChild { line, id } => ExprError::SharedChild { line: fix(line), id: id_of(id) },
        ExprError::Unreachable(id) => ExprError::Unreachable(id_of(id)),
        other => other,
    }
}

/// Incremental builder for linear expressions: every introduce is unioned onto the
/// expression built so far.
#[derive(Debug, Default)]
pub struct LinearBuilder {
    nodes: Vec<Node>,
    current: Option<NodeId>,
    next_vertex: Vertex,
}

impl LinearBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Introduces the next vertex id with `label` and returns it.
    pub fn intro(&mut self, label: Label) -> Vertex {
        let v = self.next_vertex;
        self.intro_vertex(label, v);
        self.next_vertex += 1;
        v
    }

    pub fn intro_vertex(&mut self, label: Label, vertex: Vertex) {
        self.nodes.push(Node::Intro { label, vertex });
        let leaf = self.nodes.len() - 1;
        self.current = Some(match self.current {
            None => leaf,
            Some(cur) => {
                self.nodes.push(Node::Union(cur, leaf));
                self.nodes.len() - 1
            }
        });
    }

    pub fn join(&mut self, a: Label, b: Label) {
        let child = self.current.expect("join before any introduce");
        self.nodes.push(Node::Join { a, b, child });
        self.current = Some(self.nodes.len() - 1);
    }

    pub fn relabel(&mut self, from: Label, to: Label) {
        let child = self.current.expect("relabel before any introduce");
        self.nodes.push(Node::Relabel { from, to, child });
        self.current = Some(self.nodes.len() - 1);
    }

    pub fn finish(self, k: Label) -> Result<CliqueExpression, ExprError> {
        CliqueExpression::new(self.nodes, k)
    }
}
