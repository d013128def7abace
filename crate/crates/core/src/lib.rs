//! Counting-modulo-two solvers for connected vertex cover and connected dominating set
//! parameterized by clique-width, with the matching lower-bound instance generator.

pub mod bench;
pub mod cds;
pub mod convolution;
pub mod cvc;
pub mod dp;
pub mod error;
pub mod expr;
pub mod graph;
pub mod lbgen;
pub mod oracle;
pub mod transform;

pub use cds::solve_cds;
pub use convolution::{Gf2, Gf2x64, Lattice, PowerLatticeTable, Ring, RingTable, SetFamily};
pub use cvc::solve_cvc;
pub use dp::{DpTable, Problem, SolveOptions, SolveOutcome};
pub use error::{ConvError, ExprError, GenError, GraphError, OracleError, SolveError};
pub use expr::{parse_expression, CliqueExpression, LinearBuilder, Node, NodeId};
pub use graph::{parse_graph, Costs, Label, LabeledGraph, Vertex, Weights};
pub use lbgen::{GeneratedInstance, SatInstance};

/// Set-family table over GF(2), as used by the solvers.
pub type Gf2Table = RingTable<Gf2>;
/// Set-family table over the integers, as used by the reference checks.
pub type IntTable = RingTable<i64>;
/// Power-lattice table over GF(2).
pub type Gf2LatticeTable = PowerLatticeTable<Gf2>;
/// Power-lattice table over the integers.
pub type IntLatticeTable = PowerLatticeTable<i64>;
