use thiserror::Error;

use crate::graph::{Label, Vertex};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("empty graph")]
    Empty,
    #[error("vertex {vertex} has label {label} outside 1..={k}")]
    LabelOutOfRange { vertex: Vertex, label: Label, k: Label },
    #[error("vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange { vertex: Vertex, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(Vertex),
    #[error("vertex {0} has non-positive cost")]
    NonPositiveCost(Vertex),
    #[error("total cost exceeds cap {cap}")]
    CostCap { cap: u64 },
    #[error("graph file: missing `p graph` header")]
    MissingHeader,
    #[error("graph file: vertex {0} has no label line")]
    MissingLabel(Vertex),
    #[error("graph file: header declares {declared} edges, found {found}")]
    EdgeCount { declared: usize, found: usize },
    #[error("graph file line {line}: cannot parse `{text}`")]
    Syntax { line: usize, text: String },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExprError {
    #[error("line {line}: duplicate vertex {vertex}")]
    DuplicateVertex { line: usize, vertex: Vertex },
    #[error("line {line}: self-join on label {label}")]
    SelfJoin { line: usize, label: Label },
    #[error("line {line}: label out of range: {label} not in 1..={k}")]
    LabelOutOfRange { line: usize, label: Label, k: Label },
    #[error("line {line}: dangling reference to node {id}")]
    DanglingReference { line: usize, id: u64 },
    #[error("line {line}: node {id} already has a parent")]
    SharedChild { line: usize, id: u64 },
    #[error("line {line}: node id {id} defined twice")]
    DuplicateId { line: usize, id: u64 },
    #[error("line {line}: cannot parse `{text}`")]
    Syntax { line: usize, text: String },
    #[error("missing `root` line")]
    MissingRoot,
    #[error("node {0} is not reachable from the root")]
    Unreachable(u64),
    #[error("vertex ids must be exactly 0..{n}; vertex {missing} is never introduced")]
    VertexGap { n: usize, missing: Vertex },
    #[error("expression has no nodes")]
    Empty,
    #[error("mixed-redundant join unsupported (node {node}: join {i} {j})")]
    MixedRedundantJoin { node: usize, i: Label, j: Label },
    #[error("expression is not irredundant (node {node})")]
    NotIrredundant { node: usize },
    #[error("node {node} is not a union node")]
    NotUnion { node: usize },
    #[error("expression is not nice at node {node}: {reason}")]
    NotNice { node: usize, reason: &'static str },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConvError {
    #[error("family is not a closure difference")]
    NotClosureDifference,
    #[error("universe of size {0} exceeds the limit of 28")]
    UniverseTooLarge(usize),
    #[error("table length {found} does not match family size {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("operands use different families or lattices")]
    FamilyMismatch,
    #[error("integer overflow in ring arithmetic")]
    Overflow,
    #[error("lattice zeta matrix is not invertible over this ring")]
    Singular,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error("input graph must be connected")]
    Disconnected,
    #[error("node {node} uses label {label}, which is not live")]
    NotLive { node: usize, label: Label },
    #[error("union on node {node} merges a live and a dead class of label {label}")]
    MixedUnion { node: usize, label: Label },
    #[error("relabel on node {node} mixes live and dead labels")]
    MixedRelabel { node: usize },
    #[error("table of {cells} cells exceeds the memory cap {cap}")]
    MemoryCap { cells: u128, cap: u128 },
    #[error("cost/weight vectors do not match the vertex count")]
    SizeMismatch,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Conv(#[from] ConvError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("oracle size guard exceeded: {what} = {value} > {limit}")]
    Guard { what: &'static str, value: usize, limit: usize },
    #[error("vertex {0} is not in X")]
    NotInSubset(Vertex),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenError {
    #[error("cnf line {line}: {msg}")]
    Cnf { line: usize, msg: String },
    #[error("beta must be at least 1")]
    Beta,
    #[error("formula has no clauses")]
    NoClauses,
    #[error("vertex {0} cannot be introduced: an earlier neighbour shares its label with a non-neighbour")]
    Emit(usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Expr(#[from] ExprError),
}
