//! Bit-packed GF(2) dynamic-programming tables and the node recurrences shared by the
//! connected vertex cover and connected dominating set solvers.

use std::borrow::Cow;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::convolution::{apply_axis, AxisKernel, Gf2x64};
use crate::error::SolveError;
use crate::expr::{CliqueExpression, Node};
use crate::graph::{sample_weights, Costs, Label, LabeledGraph, Vertex};
use crate::transform::{prepare, Annotations};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    Cvc,
    Cds,
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Problem::Cvc => "cvc",
            Problem::Cds => "cds",
        })
    }
}

impl FromStr for Problem {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "cvc" => Ok(Problem::Cvc),
            "cds" => Ok(Problem::Cds),
            other => Err(format!("unknown problem `{other}` (expected cvc or cds)")),
        }
    }
}

/// The per-label state set of a solver, described by its tables.
#[derive(Clone, Debug)]
pub struct StateSpace {
    pub names: Vec<&'static str>,
    /// State reached when two classes with these states are merged by a relabel.
    pub combine: Vec<Vec<Option<usize>>>,
    /// Whether a join between classes in these states keeps the partial solution.
    pub feas: Vec<Vec<bool>>,
    /// `(state, vertex in X)` pairs for an introduced vertex other than `v*`.
    pub intro: Vec<(usize, bool)>,
    /// The same for `v*`.
    pub intro_root: Vec<(usize, bool)>,
    /// Transform that turns `combine` into a pointwise product, and its inverse.
    pub zeta: AxisKernel<Gf2x64>,
    pub mobius: AxisKernel<Gf2x64>,
}

impl StateSpace {
    pub fn radix(&self) -> usize {
        self.names.len()
    }
}

/// Table of parities indexed by (signature, cost, weight).
///
/// Signatures assign a state to every live label; the code is little-endian in the
/// sorted label order. Weights are packed 64 per word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DpTable {
    labels: Vec<Label>,
    radix: usize,
    cmax: usize,
    wmax: usize,
    words: usize,
    data: Vec<Gf2x64>,
}

impl DpTable {
    pub fn zeros(labels: Vec<Label>, radix: usize, cmax: usize, wmax: usize) -> Self {
        let words = wmax / 64 + 1;
        let sigs = radix.pow(labels.len() as u32);
        Self { labels, radix, cmax, wmax, words, data: vec![Gf2x64(0); sigs * (cmax + 1) * words] }
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn signatures(&self) -> usize {
        self.radix.pow(self.labels.len() as u32)
    }

    pub fn cmax(&self) -> usize {
        self.cmax
    }

    pub fn wmax(&self) -> usize {
        self.wmax
    }

    fn block(&self) -> usize {
        (self.cmax + 1) * self.words
    }

    fn row_start(&self, sig: usize, c: usize) -> usize {
        sig * self.block() + c * self.words
    }

    pub fn get(&self, sig: usize, c: usize, w: usize) -> bool {
        self.data[self.row_start(sig, c) + w / 64].0 >> (w % 64) & 1 == 1
    }

    pub fn toggle(&mut self, sig: usize, c: usize, w: usize) {
        let i = self.row_start(sig, c) + w / 64;
        self.data[i].0 ^= 1 << (w % 64);
    }

    /// Signature code of a state per live label (in label order).
    pub fn encode(&self, states: &[usize]) -> usize {
        states.iter().rev().fold(0, |acc, &s| acc * self.radix + s)
    }

    pub fn decode(&self, mut sig: usize) -> Vec<usize> {
        (0..self.labels.len())
            .map(|_| {
                let d = sig % self.radix;
                sig /= self.radix;
                d
            })
            .collect()
    }

    /// All `(signature, cost, weight)` cells holding a one.
    pub fn ones(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for sig in 0..self.signatures() {
            for c in 0..=self.cmax {
                let start = self.row_start(sig, c);
                for (wi, word) in self.data[start..start + self.words].iter().enumerate() {
                    let mut bits = word.0;
                    while bits != 0 {
                        out.push((sig, c, wi * 64 + bits.trailing_zeros() as usize));
                        bits &= bits - 1;
                    }
                }
            }
        }
        out
    }

    /// Smallest cost with a nonzero cell in signature `sig`.
    pub fn min_cost(&self, sig: usize) -> Option<usize> {
        (0..=self.cmax).find(|&c| {
            let s = self.row_start(sig, c);
            self.data[s..s + self.words].iter().any(|x| x.0 != 0)
        })
    }

    fn same_shape(&self, labels: Vec<Label>) -> Self {
        Self::zeros(labels, self.radix, self.cmax, self.wmax)
    }

    fn xor_block(&mut self, dst: usize, src: &Self, sig: usize) {
        let b = self.block();
        let (d, s) = (dst * b, sig * b);
        for (x, y) in self.data[d..d + b].iter_mut().zip(&src.data[s..s + b]) {
            x.0 ^= y.0;
        }
    }

    /// Applies `kernel` along the coordinate at `pos`.
    fn transform(&mut self, pos: usize, kernel: &AxisKernel<Gf2x64>) {
        let below = self.radix.pow(pos as u32);
        let outer = self.signatures() / (below * self.radix);
        let inner = below * self.block();
        apply_axis(&mut self.data, outer, self.radix, inner, kernel).expect("GF(2) arithmetic cannot fail");
    }

    fn mask_row_tail(&mut self) {
        let spare = 64 * self.words - (self.wmax + 1);
        if spare == 0 {
            return;
        }
        let mask = u64::MAX >> spare;
        for row in self.data.chunks_mut(self.words) {
            row[self.words - 1].0 &= mask;
        }
    }
}

fn split_digit(code: usize, pos: usize, radix: usize) -> (usize, usize) {
    let low_mod = radix.pow(pos as u32);
    let low = code % low_mod;
    let rest = code / low_mod;
    (rest % radix, low + low_mod * (rest / radix))
}

fn set_digit(code: usize, pos: usize, radix: usize, digit: usize) -> usize {
    let p = radix.pow(pos as u32);
    let old = code / p % radix;
    code - old * p + digit * p
}

/// `out ^= a * b` as polynomials over GF(2), truncated to the row length.
fn polymul_xor(out: &mut [Gf2x64], a: &[Gf2x64], b: &[Gf2x64]) {
    let words = out.len();
    for (wa, word) in a.iter().enumerate() {
        let mut bits = word.0;
        while bits != 0 {
            let s = wa * 64 + bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let (q, r) = (s / 64, s % 64);
            if r == 0 {
                for i in q..words {
                    out[i].0 ^= b[i - q].0;
                }
            } else {
                out[q].0 ^= b[0].0 << r;
                for i in q + 1..words {
                    out[i].0 ^= b[i - q].0 << r | b[i - q - 1].0 >> (64 - r);
                }
            }
        }
    }
}

pub fn dp_introduce(
    space: &StateSpace,
    label: Label,
    is_root: bool,
    cost: u64,
    weight: u64,
    cmax: usize,
    wmax: usize,
) -> DpTable {
    let mut t = DpTable::zeros(vec![label], space.radix(), cmax, wmax);
    let entries = if is_root { &space.intro_root } else { &space.intro };
    for &(state, in_x) in entries {
        let (c, w) = if in_x { (cost as usize, weight as usize) } else { (0, 0) };
        if c <= cmax && w <= wmax {
            t.toggle(state, c, w);
        }
    }
    t
}

/// Relabel `i -> j` with both labels live: states of the two classes are combined.
pub fn dp_relabel(space: &StateSpace, child: &DpTable, i: Label, j: Label) -> DpTable {
    let pi = child.labels.binary_search(&i).expect("relabel source is live");
    let pj = child.labels.binary_search(&j).expect("relabel target is live");
    let labels: Vec<Label> = child.labels.iter().copied().filter(|&l| l != i).collect();
    let pj_out = if pi < pj { pj - 1 } else { pj };
    let mut out = child.same_shape(labels);
    let r = child.radix;
    for sig in 0..child.signatures() {
        let (si, rest) = split_digit(sig, pi, r);
        let (sj, _) = split_digit(rest, pj_out, r);
        if let Some(s) = space.combine[si][sj] {
            out.xor_block(set_digit(rest, pj_out, r, s), child, sig);
        }
    }
    out
}

pub fn dp_join(space: &StateSpace, child: &DpTable, i: Label, j: Label) -> DpTable {
    let pi = child.labels.binary_search(&i).expect("join label is live");
    let pj = child.labels.binary_search(&j).expect("join label is live");
    let mut out = child.clone();
    let b = out.block();
    for sig in 0..out.signatures() {
        let si = sig / out.radix.pow(pi as u32) % out.radix;
        let sj = sig / out.radix.pow(pj as u32) % out.radix;
        if !space.feas[si][sj] {
            out.data[sig * b..(sig + 1) * b].fill(Gf2x64(0));
        }
    }
    out
}

/// Sums over the state of a label that just became dead and drops it from the domain.
pub fn dp_dead(child: &DpTable, label: Label) -> DpTable {
    let p = child.labels.binary_search(&label).expect("dead label is live");
    let labels: Vec<Label> = child.labels.iter().copied().filter(|&l| l != label).collect();
    let mut out = child.same_shape(labels);
    for sig in 0..child.signatures() {
        let (_, rest) = split_digit(sig, p, child.radix);
        out.xor_block(rest, child, sig);
    }
    out
}

/// Output signatures per unit of parallel work in a union.
const UNION_CHUNK: usize = 4096;

/// Union of two disjoint subexpressions: budgets add up, and labels live on both sides
/// combine through the transform of the state space.
pub fn dp_union(space: &StateSpace, left: &DpTable, right: &DpTable) -> DpTable {
    let mut labels: Vec<Label> = left.labels.iter().chain(&right.labels).copied().collect();
    labels.sort_unstable();
    labels.dedup();
    let shared: Vec<Label> = left.labels.iter().copied().filter(|l| right.labels.contains(l)).collect();
    fn transformed<'t>(tab: &'t DpTable, shared: &[Label], zeta: &AxisKernel<Gf2x64>) -> Cow<'t, DpTable> {
        if shared.is_empty() {
            return Cow::Borrowed(tab);
        }
        let mut t = tab.clone();
        for l in shared {
            t.transform(t.labels.binary_search(l).unwrap(), zeta);
        }
        Cow::Owned(t)
    }
    let (a, b) = (transformed(left, &shared, &space.zeta), transformed(right, &shared, &space.zeta));
    let mut out = left.same_shape(labels);
    let r = out.radix;
    let stride = |tab: &DpTable, l: &Label| tab.labels.binary_search(l).map_or(0, |p| r.pow(p as u32));
    let sl: Vec<usize> = out.labels.iter().map(|l| stride(&a, l)).collect();
    let sr: Vec<usize> = out.labels.iter().map(|l| stride(&b, l)).collect();
    let (words, cmax, block) = (out.words, out.cmax, out.block());
    // each chunk decodes its first signature once and then steps the digits like an odometer
    let product = |(chunk_idx, chunk): (usize, &mut [Gf2x64])| {
        let mut sig = chunk_idx * UNION_CHUNK;
        let mut digits = vec![0usize; sl.len()];
        for d in digits.iter_mut() {
            *d = sig % r;
            sig /= r;
        }
        for dst in chunk.chunks_mut(block) {
            let ca: usize = digits.iter().zip(&sl).map(|(d, s)| d * s).sum();
            let cb: usize = digits.iter().zip(&sr).map(|(d, s)| d * s).sum();
            for c1 in 0..=cmax {
                let ra = &a.data[a.row_start(ca, c1)..a.row_start(ca, c1) + words];
                if ra.iter().all(|x| x.0 == 0) {
                    continue;
                }
                for c2 in 0..=cmax - c1 {
                    let rb = &b.data[b.row_start(cb, c2)..b.row_start(cb, c2) + words];
                    if rb.iter().all(|x| x.0 == 0) {
                        continue;
                    }
                    polymul_xor(&mut dst[(c1 + c2) * words..(c1 + c2 + 1) * words], ra, rb);
                }
            }
            for d in digits.iter_mut() {
                *d += 1;
                if *d < r {
                    break;
                }
                *d = 0;
            }
        }
    };
    if out.signatures() <= UNION_CHUNK {
        out.data.chunks_mut(block * UNION_CHUNK).enumerate().for_each(product);
    } else {
        out.data.par_chunks_mut(block * UNION_CHUNK).enumerate().for_each(product);
    }
    out.mask_row_tail();
    for l in &shared {
        out.transform(out.labels.binary_search(l).unwrap(), &space.mobius);
    }
    out
}

/// Inputs of one DP pass over an augmented nice expression.
pub struct DpInstance<'a> {
    pub space: &'a StateSpace,
    pub expr: &'a CliqueExpression,
    pub ann: &'a Annotations,
    pub costs: &'a [u64],
    pub weights: &'a [u64],
    pub vstar: Vertex,
    pub cmax: usize,
    pub wmax: usize,
}

impl DpInstance<'_> {
    /// Runs the recurrences bottom-up. With `keep_all` every node's table is returned;
    /// otherwise only the root table survives.
    pub fn run(&self, keep_all: bool) -> Result<Vec<Option<DpTable>>, SolveError> {
        let mut tables: Vec<Option<DpTable>> = vec![None; self.expr.len()];
        let take = |tables: &mut Vec<Option<DpTable>>, id: usize| -> DpTable {
            if keep_all {
                tables[id].clone().expect("child computed first")
            } else {
                tables[id].take().expect("child computed first")
            }
        };
        for (t, node) in self.expr.nodes().iter().enumerate() {
            let live = |id: usize, l: Label| self.ann.info[id].live.contains(&l);
            let table = match *node {
                Node::Intro { label, vertex } => dp_introduce(
                    self.space,
                    label,
                    vertex == self.vstar,
                    self.costs[vertex],
                    self.weights[vertex],
                    self.cmax,
                    self.wmax,
                ),
                Node::Union(l, r) => {
                    for (x, y) in [(l, r), (r, l)] {
                        for &lab in &self.ann.info[x].live {
                            if self.ann.info[y].classes.contains_key(&lab) && !live(y, lab) {
                                return Err(SolveError::MixedUnion { node: t + 1, label: lab });
                            }
                        }
                    }
                    let a = take(&mut tables, l);
                    let b = take(&mut tables, r);
                    dp_union(self.space, &a, &b)
                }
                Node::Relabel { from, to, child } => {
                    let c = take(&mut tables, child);
                    match (live(child, from), live(child, to)) {
                        (true, true) => dp_relabel(self.space, &c, from, to),
                        (false, false) => c,
                        _ => return Err(SolveError::MixedRelabel { node: t + 1 }),
                    }
                }
                Node::Join { a, b, child } => {
                    for l in [a, b] {
                        if !live(child, l) {
                            return Err(SolveError::NotLive { node: t + 1, label: l });
                        }
                    }
                    let c = take(&mut tables, child);
                    dp_join(self.space, &c, a, b)
                }
                Node::Dead { label, child } => {
                    if !live(child, label) {
                        return Err(SolveError::NotLive { node: t + 1, label });
                    }
                    let c = take(&mut tables, child);
                    dp_dead(&c, label)
                }
            };
            debug_assert_eq!(table.labels, self.ann.info[t].live);
            tables[t] = Some(table);
        }
        Ok(tables)
    }
}

/// Default memory cap for one table, in bytes.
pub const DEFAULT_MEM_CAP: u64 = 4 << 30;

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub budget: u64,
    pub seed: u64,
    pub repeats: u32,
    pub mem_cap: u64,
    pub jobs: usize,
}

impl SolveOptions {
    pub fn new(budget: u64, seed: u64) -> Self {
        Self { budget, seed, repeats: 20, mem_cap: DEFAULT_MEM_CAP, jobs: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SolveOutcome {
    pub problem: Problem,
    pub decision: bool,
    /// Trials run: the index of the first successful trial plus one, or all of them.
    pub trials: u32,
    /// Smallest cost of a nonzero root cell in the successful trial.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_cost_found: Option<u64>,
    pub seed: u64,
}

/// Seed of the weight function used by `trial`.
pub fn trial_seed(seed: u64, trial: u32) -> u64 {
    seed.wrapping_add(u64::from(trial).wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// Cost and weight axis bounds. Cells above them can never come back under the budget
/// because every recurrence only adds costs and weights.
pub fn budget_bounds(costs: &[u64], weights: &[u64], budget: u64) -> (usize, usize) {
    let ctotal: u64 = costs.iter().sum();
    let cmax = ctotal.min(budget);
    let cmin = costs.iter().copied().min().unwrap_or(1).max(1);
    let mut sorted = weights.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let count = ((cmax / cmin) as usize).min(sorted.len());
    let wmax: u64 = sorted[..count].iter().sum();
    (cmax as usize, wmax as usize)
}

/// Largest number of simultaneously live labels over the nodes.
pub fn max_live(ann: &Annotations) -> usize {
    ann.info.iter().map(|i| i.live.len()).max().unwrap_or(0)
}

pub(crate) fn check_memory(radix: usize, live: usize, cmax: usize, wmax: usize, cap: u64) -> Result<(), SolveError> {
    let words = (wmax / 64 + 1) as u128;
    let cells = (radix as u128).pow(live as u32) * (cmax as u128 + 1) * words * 64;
    let cap_bits = u128::from(cap) * 8;
    if cells > cap_bits {
        return Err(SolveError::MemoryCap { cells, cap: cap_bits });
    }
    Ok(())
}

/// Everything the cut-and-count driver needs from a problem.
pub(crate) struct Driver<'a> {
    pub problem: Problem,
    pub space: &'a StateSpace,
    pub branches: fn(&LabeledGraph) -> Vec<Vertex>,
}

impl Driver<'_> {
    pub fn solve(
        &self,
        prepared: &CliqueExpression,
        costs: &Costs,
        opts: &SolveOptions,
    ) -> Result<SolveOutcome, SolveError> {
        let ann = Annotations::compute(prepared);
        let graph = &ann.graph;
        if costs.len() != graph.n() {
            return Err(SolveError::SizeMismatch);
        }
        let branches = (self.branches)(graph);
        let live = max_live(&ann);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(opts.jobs.max(1)).build().expect("thread pool");
        for trial in 0..opts.repeats {
            let weights = sample_weights(graph, trial_seed(opts.seed, trial))?;
            let (cmax, wmax) = budget_bounds(costs.values(), weights.values(), opts.budget);
            check_memory(self.space.radix(), live, cmax, wmax, opts.mem_cap)?;
            let run = |&vstar: &Vertex| -> Result<Option<usize>, SolveError> {
                let inst = DpInstance {
                    space: self.space,
                    expr: prepared,
                    ann: &ann,
                    costs: costs.values(),
                    weights: weights.values(),
                    vstar,
                    cmax,
                    wmax,
                };
                let root = inst.run(false)?.pop().flatten().expect("root table");
                Ok(root.min_cost(0))
            };
            let found: Vec<Option<usize>> = if opts.jobs > 1 {
                pool.install(|| branches.par_iter().map(run).collect::<Result<_, _>>())?
            } else {
                branches.iter().map(run).collect::<Result<_, _>>()?
            };
            if let Some(best) = found.into_iter().flatten().min() {
                return Ok(SolveOutcome {
                    problem: self.problem,
                    decision: true,
                    trials: trial + 1,
                    best_cost_found: Some(best as u64),
                    seed: opts.seed,
                });
            }
        }
        Ok(SolveOutcome {
            problem: self.problem,
            decision: false,
            trials: opts.repeats,
            best_cost_found: None,
            seed: opts.seed,
        })
    }
}

/// Validates the graph and runs the preprocessing chain.
pub(crate) fn prepare_connected(expr: &CliqueExpression) -> Result<(CliqueExpression, LabeledGraph), SolveError> {
    let prepared = prepare(expr)?;
    let graph = prepared.evaluate();
    Ok((prepared, graph))
}
