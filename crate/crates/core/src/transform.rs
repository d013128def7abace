//! Irredundant and nice expressions, dead vertices, dead nodes, and live-label bookkeeping.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::ExprError;
use crate::expr::{CliqueExpression, Node, NodeId};
use crate::graph::{Label, LabeledGraph, Vertex};

/// Per-node data of an evaluated expression.
#[derive(Clone, Debug)]
pub struct NodeInfo {
    /// Nonempty label classes `V_t^l`, each sorted.
    pub classes: BTreeMap<Label, Vec<Vertex>>,
    /// `|E_t|`.
    pub edges: usize,
    /// Live labels computed by the dead-node recurrence, sorted.
    pub live: Vec<Label>,
}

impl NodeInfo {
    pub fn labels(&self) -> Vec<Label> {
        self.classes.keys().copied().collect()
    }

    pub fn class(&self, label: Label) -> &[Vertex] {
        self.classes.get(&label).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.classes.values().flatten().copied()
    }

    pub fn dead_labels(&self) -> Vec<Label> {
        self.classes.keys().copied().filter(|l| self.live.binary_search(l).is_err()).collect()
    }
}

#[derive(Clone, Debug)]
pub struct Annotations {
    pub graph: LabeledGraph,
    pub info: Vec<NodeInfo>,
    /// Node at which each vertex becomes dead (all incident edges present).
    pub death: Vec<NodeId>,
}

impl Annotations {
    pub fn compute(expr: &CliqueExpression) -> Self {
        let graph = expr.evaluate();
        let n = expr.n();
        let mut deg = vec![0usize; n];
        let mut death = vec![usize::MAX; n];
        let mut seen: HashSet<(Vertex, Vertex)> = HashSet::new();
        let mut info: Vec<NodeInfo> = Vec::with_capacity(expr.len());
        for (idx, node) in expr.nodes().iter().enumerate() {
            let entry = match *node {
                Node::Intro { label, vertex } => {
                    if graph.degree(vertex) == 0 {
                        death[vertex] = idx;
                    }
                    NodeInfo { classes: BTreeMap::from([(label, vec![vertex])]), edges: 0, live: vec![label] }
                }
                Node::Union(l, r) => {
                    let (a, b) = (&info[l], &info[r]);
                    let mut classes = a.classes.clone();
                    for (label, vs) in &b.classes {
                        let slot = classes.entry(*label).or_default();
                        slot.extend(vs);
                        slot.sort_unstable();
                    }
                    let live: BTreeSet<Label> = a.live.iter().chain(&b.live).copied().collect();
                    NodeInfo { classes, edges: a.edges + b.edges, live: live.into_iter().collect() }
                }
                Node::Relabel { from, to, child } => {
                    let c = &info[child];
                    let mut classes = c.classes.clone();
                    if from != to {
                        if let Some(vs) = classes.remove(&from) {
                            let slot = classes.entry(to).or_default();
                            slot.extend(vs);
                            slot.sort_unstable();
                        }
                    }
                    let mut live: Vec<Label> = c.live.iter().copied().filter(|&l| l != from).collect();
                    if from != to && c.live.contains(&from) && !live.contains(&to) {
                        live.push(to);
                        live.sort_unstable();
                    }
                    NodeInfo { classes, edges: c.edges, live }
                }
                Node::Join { a, b, child } => {
                    let c = &info[child];
                    let mut added = 0;
                    for &x in c.class(a) {
                        for &y in c.class(b) {
                            if seen.insert((x.min(y), x.max(y))) {
                                added += 1;
                                deg[x] += 1;
                                deg[y] += 1;
                            }
                        }
                    }
                    for &x in c.class(a).iter().chain(c.class(b)) {
                        if deg[x] == graph.degree(x) && death[x] == usize::MAX {
                            death[x] = idx;
                        }
                    }
                    NodeInfo { classes: c.classes.clone(), edges: c.edges + added, live: c.live.clone() }
                }
                Node::Dead { label, child } => {
                    let c = &info[child];
                    let live = c.live.iter().copied().filter(|&l| l != label).collect();
                    NodeInfo { classes: c.classes.clone(), edges: c.edges, live }
                }
            };
            info.push(entry);
        }
        Self { graph, info, death }
    }

    /// `D_t`, sorted.
    pub fn dead_vertices(&self, t: NodeId) -> Vec<Vertex> {
        let mut d: Vec<Vertex> = self.info[t].vertices().filter(|&v| self.death[v] <= t).collect();
        d.sort_unstable();
        d
    }

    pub fn is_dead(&self, t: NodeId, v: Vertex) -> bool {
        self.death[v] <= t
    }
}

/// Per-node dead vertex sets `D_t`.
pub fn compute_dead_sets(expr: &CliqueExpression) -> Vec<Vec<Vertex>> {
    let ann = Annotations::compute(expr);
    (0..expr.len()).map(|t| ann.dead_vertices(t)).collect()
}

/// Removes dead nodes (they do not change the graph).
pub fn strip_dead_nodes(expr: &CliqueExpression) -> CliqueExpression {
    if !expr.has_dead_nodes() {
        return expr.clone();
    }
    let keep: Vec<bool> = expr.nodes().iter().map(|n| !matches!(n, Node::Dead { .. })).collect();
    expr.splice(&keep, expr.k()).expect("stripping dead nodes keeps the expression valid")
}

pub fn is_irredundant(expr: &CliqueExpression) -> bool {
    expr.join_overlaps().iter().all(|&(_, _, overlap)| overlap == 0)
}

/// Drops joins whose every pair is already an edge. Joins that both repeat and add
/// edges are rejected.
pub fn make_irredundant(expr: &CliqueExpression) -> Result<CliqueExpression, ExprError> {
    let expr = strip_dead_nodes(expr);
    let mut keep = vec![true; expr.len()];
    for (node, pairs, overlap) in expr.join_overlaps() {
        if overlap == 0 {
            continue;
        }
        if overlap < pairs {
            let Node::Join { a, b, .. } = expr.node(node) else { unreachable!() };
            return Err(ExprError::MixedRedundantJoin { node: node + 1, i: a, j: b });
        }
        keep[node] = false;
    }
    if keep.iter().all(|&k| k) {
        return Ok(expr);
    }
    expr.splice(&keep, expr.k())
}

/// Why a node breaks niceness, if it does.
fn nice_violation(expr: &CliqueExpression, ann: &Annotations, t: NodeId) -> Option<&'static str> {
    match expr.node(t) {
        Node::Join { a, b, child } => {
            let c = &ann.info[child];
            (c.class(a).is_empty() || c.class(b).is_empty()).then_some("join with an empty label")
        }
        Node::Relabel { from, to, child } => {
            let c = &ann.info[child];
            if from == to {
                Some("relabel onto itself")
            } else if c.class(from).is_empty() {
                Some("relabel of an empty label")
            } else if c.class(to).is_empty() {
                Some("relabel onto an empty label")
            } else {
                None
            }
        }
        _ => None,
    }
}

pub fn is_nice(expr: &CliqueExpression) -> bool {
    check_nice(expr).is_ok()
}

pub fn check_nice(expr: &CliqueExpression) -> Result<(), ExprError> {
    if let Some((node, _, _)) = expr.join_overlaps().into_iter().find(|&(_, _, o)| o > 0) {
        return Err(ExprError::NotIrredundant { node: node + 1 });
    }
    let ann = Annotations::compute(expr);
    for t in 0..expr.len() {
        if let Some(reason) = nice_violation(expr, &ann, t) {
            return Err(ExprError::NotNice { node: t + 1, reason });
        }
    }
    Ok(())
}

/// Rewrites an irredundant expression into a nice one with the same labeled graph.
///
/// Joins with an empty side and relabels of an empty label are removed. A relabel
/// `i -> j` with `j` empty is removed after swapping `i` and `j` in its subtree.
pub fn make_nice(expr: &CliqueExpression) -> Result<CliqueExpression, ExprError> {
    let expr = strip_dead_nodes(expr);
    if let Some((node, _, _)) = expr.join_overlaps().into_iter().find(|&(_, _, o)| o > 0) {
        return Err(ExprError::NotIrredundant { node: node + 1 });
    }
    let ann = Annotations::compute(&expr);
    let k = expr.k() as usize;
    let identity: Vec<Label> = (0..=k as Label).collect();
    let mut perm: Vec<Option<Vec<Label>>> = vec![None; expr.len()];
    perm[expr.root()] = Some(identity);
    let mut keep = vec![true; expr.len()];
    for t in (0..expr.len()).rev() {
        let pi = perm[t].take().expect("parents are visited first");
        let node = expr.node(t);
        let mut child_pi = pi.clone();
        if let Some(reason) = nice_violation(&expr, &ann, t) {
            keep[t] = false;
            if let (Node::Relabel { from, to, .. }, "relabel onto an empty label") = (node, reason) {
                child_pi = (0..=k).map(|l| pi[swap_label(l as Label, from, to) as usize]).collect();
            }
        }
        for c in node.children() {
            perm[c] = Some(child_pi.clone());
        }
        perm[t] = Some(pi);
    }
    let mapped: Vec<Node> = expr
        .nodes()
        .iter()
        .enumerate()
        .map(|(t, node)| {
            let pi = perm[t].as_ref().unwrap();
            let m = |l: Label| pi[l as usize];
            match *node {
                Node::Intro { label, vertex } => Node::Intro { label: m(label), vertex },
                Node::Union(l, r) => Node::Union(l, r),
                Node::Relabel { from, to, child } => Node::Relabel { from: m(from), to: m(to), child },
                Node::Join { a, b, child } => Node::Join { a: m(a), b: m(b), child },
                Node::Dead { label, child } => Node::Dead { label: m(label), child },
            }
        })
        .collect();
    let relabeled = CliqueExpression::new(mapped, expr.k())?;
    relabeled.splice(&keep, expr.k())
}

fn swap_label(l: Label, a: Label, b: Label) -> Label {
    if l == a {
        b
    } else if l == b {
        a
    } else {
        l
    }
}

/// Inserts dead nodes above joins where a participating label becomes dead.
/// Requires a nice expression; when both labels die the lower one is inserted first.
pub fn augment_with_dead_nodes(expr: &CliqueExpression) -> Result<CliqueExpression, ExprError> {
    let expr = strip_dead_nodes(expr);
    check_nice(&expr)?;
    let ann = Annotations::compute(&expr);
    let mut nodes = Vec::with_capacity(expr.len() * 2);
    let mut new_id = vec![0usize; expr.len()];
    for (t, node) in expr.nodes().iter().enumerate() {
        nodes.push(node.remap_children(|c| new_id[c]));
        let mut top = nodes.len() - 1;
        if let Node::Join { a, b, child } = *node {
            let (lo, hi) = (a.min(b), a.max(b));
            for label in [lo, hi] {
                let class = ann.info[t].class(label);
                let dies_here =
                    class.iter().all(|&v| ann.is_dead(t, v)) && class.iter().all(|&v| !ann.is_dead(child, v));
                if dies_here {
                    nodes.push(Node::Dead { label, child: top });
                    top = nodes.len() - 1;
                }
            }
        }
        new_id[t] = top;
    }
    CliqueExpression::new(nodes, expr.k())
}

/// Live labels only on the left, only on the right, and on both sides of a union.
pub type UnionSplit = (Vec<Label>, Vec<Label>, Vec<Label>);

/// Union-split `(L~1, L~2, L~12)` of a union node in an augmented expression.
pub fn union_split(expr: &CliqueExpression, ann: &Annotations, t: NodeId) -> Result<UnionSplit, ExprError> {
    let Node::Union(l, r) = expr.node(t) else {
        return Err(ExprError::NotUnion { node: t + 1 });
    };
    let (a, b) = (&ann.info[l], &ann.info[r]);
    let only_left = a.live.iter().copied().filter(|x| !b.classes.contains_key(x)).collect();
    let only_right = b.live.iter().copied().filter(|x| !a.classes.contains_key(x)).collect();
    let shared = a.live.iter().copied().filter(|x| b.live.contains(x)).collect();
    Ok((only_left, only_right, shared))
}

/// Full preprocessing chain used by the solvers.
pub fn prepare(expr: &CliqueExpression) -> Result<CliqueExpression, ExprError> {
    augment_with_dead_nodes(&make_nice(&make_irredundant(expr)?)?)
}

/// Random irredundant k-expression on `n` vertices whose graph is connected.
///
/// Subexpressions are combined pairwise; every union is followed by a join that links
/// the two sides, plus occasional extra joins, merging relabels, and no-op operations
/// (empty joins, relabels onto empty labels) that the nice transform must remove.
pub fn random_expression(n: usize, k: Label, seed: u64) -> CliqueExpression {
    assert!(n >= 1 && k >= 2, "random_expression needs n >= 1 and k >= 2");
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    loop {
        let mut g = RandomBuild { nodes: Vec::new(), edges: HashSet::new(), k };
        let mut order: Vec<Vertex> = (0..n).collect();
        order.shuffle(&mut rng);
        let (_, _) = g.build(&order, &mut rng);
        let expr = CliqueExpression::new(g.nodes, k).expect("generator emits valid expressions");
        if n == 1 || crate::graph::is_connected(&expr.evaluate()) {
            return expr;
        }
    }
}

struct RandomBuild {
    nodes: Vec<Node>,
    edges: HashSet<(Vertex, Vertex)>,
    k: Label,
}

type Classes = BTreeMap<Label, Vec<Vertex>>;

impl RandomBuild {
    fn push(&mut self, node: Node) -> NodeId {
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    fn relabel(&mut self, root: NodeId, classes: &mut Classes, from: Label, to: Label) -> NodeId {
        if let Some(vs) = classes.remove(&from) {
            classes.entry(to).or_default().extend(vs);
        }
        self.push(Node::Relabel { from, to, child: root })
    }

    fn join_is_clean(&self, classes: &Classes, a: Label, b: Label) -> bool {
        let (Some(va), Some(vb)) = (classes.get(&a), classes.get(&b)) else { return false };
        va.iter().all(|&x| vb.iter().all(|&y| !self.edges.contains(&(x.min(y), x.max(y)))))
    }

    fn join(&mut self, root: NodeId, classes: &Classes, a: Label, b: Label) -> NodeId {
        if let (Some(va), Some(vb)) = (classes.get(&a), classes.get(&b)) {
            for &x in va {
                for &y in vb {
                    self.edges.insert((x.min(y), x.max(y)));
                }
            }
        }
        self.push(Node::Join { a, b, child: root })
    }

    fn build(&mut self, vertices: &[Vertex], rng: &mut Xoshiro256PlusPlus) -> (NodeId, Classes) {
        let k = self.k;
        if vertices.len() == 1 {
            let label = rng.gen_range(1..=k);
            let id = self.push(Node::Intro { label, vertex: vertices[0] });
            return (id, BTreeMap::from([(label, vec![vertices[0]])]));
        }
        let cut = rng.gen_range(1..vertices.len());
        let (mut ra, mut ca) = self.build(&vertices[..cut], rng);
        let (mut rb, mut cb) = self.build(&vertices[cut..], rng);

        if rng.gen_bool(0.6) {
            // make the two sides use disjoint labels so a cross join is always clean
            while ca.len() + cb.len() > k as usize {
                let (root, classes) = if ca.len() >= cb.len() { (&mut ra, &mut ca) } else { (&mut rb, &mut cb) };
                let labels: Vec<Label> = classes.keys().copied().collect();
                let pick: Vec<&Label> = labels.choose_multiple(rng, 2).collect();
                *root = self.relabel(*root, classes, *pick[0], *pick[1]);
            }
            let collisions: Vec<Label> = cb.keys().copied().filter(|l| ca.contains_key(l)).collect();
            for l in collisions {
                let free = (1..=k).find(|f| !ca.contains_key(f) && !cb.contains_key(f)).unwrap();
                rb = self.relabel(rb, &mut cb, l, free);
            }
        }
        let side_a: Vec<Label> = ca.keys().copied().collect();
        let side_b: Vec<Label> = cb.keys().copied().collect();
        let mut root = self.push(Node::Union(ra, rb));
        let mut classes = ca;
        for (l, vs) in cb {
            classes.entry(l).or_default().extend(vs);
        }

        // one join linking the sides, if a clean one exists
        let mut cross: Vec<(Label, Label)> = Vec::new();
        for &i in &side_a {
            for &j in &side_b {
                if i != j && self.join_is_clean(&classes, i, j) {
                    cross.push((i, j));
                }
            }
        }
        if let Some(&(i, j)) = cross.choose(rng) {
            root = self.join(root, &classes, i, j);
        }
        for _ in 0..rng.gen_range(0..3) {
            let labels: Vec<Label> = classes.keys().copied().collect();
            let i = rng.gen_range(1..=k);
            let j = rng.gen_range(1..=k);
            if i == j {
                continue;
            }
            let roll: f64 = rng.gen();
            if roll < 0.45 {
                if self.join_is_clean(&classes, i, j) {
                    root = self.join(root, &classes, i, j);
                }
            } else if roll < 0.75 {
                if labels.contains(&i) && labels.contains(&j) {
                    root = self.relabel(root, &mut classes, i, j);
                }
            } else if roll < 0.85 {
                if !labels.contains(&i) || !labels.contains(&j) {
                    // join with an empty side: adds nothing
                    root = self.push(Node::Join { a: i, b: j, child: root });
                }
            } else {
                // relabel from an empty label, or onto an empty one
                root = self.relabel(root, &mut classes, i, j);
            }
        }
        (root, classes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;

    fn p3() -> CliqueExpression {
        // 0 - 1 - 2 with 1 in the middle
        parse_expression(
            "1: intro 1 0\n2: intro 2 1\n3: union 1 2\n4: join 1 2 3\n5: relabel 1 3 4\n\
             6: intro 1 2\n7: union 5 6\n8: join 1 2 7\nroot 8\n",
        )
        .unwrap()
    }

    #[test]
    fn irredundancy_checks() {
        let dup = parse_expression("1: intro 1 0\n2: intro 2 1\n3: union 1 2\n4: join 1 2 3\n5: join 1 2 4\nroot 5\n")
            .unwrap();
        assert!(!is_irredundant(&dup));
        let fixed = make_irredundant(&dup).unwrap();
        assert!(is_irredundant(&fixed));
        assert_eq!(fixed.len(), 4);
        assert!(fixed.evaluate().same_edges(&dup.evaluate()));
        let no_join = parse_expression("1: intro 1 0\n2: intro 2 1\n3: union 1 2\nroot 3\n").unwrap();
        assert!(is_irredundant(&no_join));
        assert_eq!(make_irredundant(&p3()).unwrap(), p3());
    }

    #[test]
    fn mixed_join_rejected() {
        let e = parse_expression(
            "1: intro 1 0\n2: intro 2 1\n3: union 1 2\n4: join 1 2 3\n5: intro 2 2\n6: union 4 5\n\
             7: join 1 2 6\nroot 7\n",
        )
        .unwrap();
        let err = make_irredundant(&e).unwrap_err();
        assert!(err.to_string().contains("mixed-redundant join unsupported"));
    }

    #[test]
    fn unnecessary_relabel_swaps_below() {
        let e = parse_expression("1: intro 1 0\n2: intro 3 1\n3: union 1 2\n4: relabel 1 2 3\n5: join 2 3 4\nroot 5\n")
            .unwrap();
        let nice = make_nice(&e).unwrap();
        assert!(is_nice(&nice));
        assert!(!nice.nodes().iter().any(|n| matches!(n, Node::Relabel { .. })));
        assert_eq!(nice.nodes()[0], Node::Intro { label: 2, vertex: 0 });
        assert_eq!(nice.evaluate(), e.evaluate());
    }

    #[test]
    fn dead_sets_on_p3() {
        let e = p3();
        let dead = compute_dead_sets(&e);
        // after the first join vertex 0 is complete; vertex 1 needs the second join
        assert_eq!(dead[3], vec![0]);
        assert_eq!(dead[7], vec![0, 1, 2]);
    }

    #[test]
    fn augment_final_join_kills_both() {
        let e = parse_expression("1: intro 1 0\n2: intro 2 1\n3: union 1 2\n4: join 1 2 3\nroot 4\n").unwrap();
        let aug = augment_with_dead_nodes(&e).unwrap();
        assert_eq!(aug.nodes()[4], Node::Dead { label: 1, child: 3 });
        assert_eq!(aug.nodes()[5], Node::Dead { label: 2, child: 4 });
        let ann = Annotations::compute(&aug);
        assert!(ann.info[aug.root()].live.is_empty());
    }

    #[test]
    fn no_dead_node_while_label_joins_again() {
        let aug = prepare(&p3()).unwrap();
        // vertex 1 joins twice, so only the label of vertex 0 dies at the first join
        let first_join = aug.nodes().iter().position(|n| matches!(n, Node::Join { .. })).unwrap();
        let Node::Intro { label, .. } = aug.nodes()[0] else { panic!() };
        assert_eq!(aug.nodes()[first_join + 1], Node::Dead { label, child: first_join });
        assert!(!matches!(aug.nodes()[first_join + 2], Node::Dead { .. }));
    }

    #[test]
    fn union_split_cases() {
        let e = parse_expression("1: intro 1 0\n2: intro 2 1\n3: union 1 2\n4: join 1 2 3\nroot 4\n").unwrap();
        let ann = Annotations::compute(&e);
        let (a, b, s) = union_split(&e, &ann, 2).unwrap();
        assert_eq!((a, b, s), (vec![1], vec![2], vec![]));
        assert!(union_split(&e, &ann, 3).is_err());
    }

    #[test]
    fn generator_contract() {
        for seed in 0..200 {
            let n = 2 + (seed as usize % 9);
            let k = 2 + (seed as u32 % 3);
            let e = random_expression(n, k, seed);
            assert!(e.width() <= k);
            assert!(is_irredundant(&e));
            assert!(crate::graph::is_connected(&e.evaluate()));
        }
        let e = random_expression(2, 2, 7);
        assert_eq!(e.evaluate().m(), 1);
    }
}
