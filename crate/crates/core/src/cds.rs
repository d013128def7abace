//! Connected dominating set by cut-and-count over GF(2), with inclusion-exclusion on
//! undominated vertices.

use crate::convolution::{Gf2x64, Lattice};
use crate::dp::{prepare_connected, Driver, Problem, SolveOptions, SolveOutcome, StateSpace};
use crate::error::SolveError;
use crate::expr::CliqueExpression;
use crate::graph::{Costs, LabeledGraph, Vertex};

/// Tags seen in a label class: `F` (forbidden to be dominated), `L`, `R` (in the
/// solution, on either side of the cut); two or more distinct tags collapse to `TwoPlus`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CdsState {
    Empty,
    F,
    L,
    R,
    TwoPlus,
}

impl CdsState {
    pub const ALL: [CdsState; 5] = [CdsState::Empty, CdsState::F, CdsState::L, CdsState::R, CdsState::TwoPlus];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        ["{}", "{F}", "{L}", "{R}", "2+"][self.index()]
    }
}

pub fn merge_cds(a: CdsState, b: CdsState) -> CdsState {
    match (a, b) {
        (CdsState::Empty, x) | (x, CdsState::Empty) => x,
        (x, y) if x == y => x,
        _ => CdsState::TwoPlus,
    }
}

/// Whether joining classes in these states creates no edge from `F` into the solution and
/// no edge across the cut.
pub fn feas_cds(a: CdsState, b: CdsState) -> bool {
    let both = a != CdsState::Empty && b != CdsState::Empty;
    !(both && (a != b || a == CdsState::TwoPlus))
}

/// Position of a state in the five-element lattice of [`Lattice::cds`].
pub fn kappa(s: CdsState) -> usize {
    s.index()
}

pub fn cds_space() -> StateSpace {
    let lattice = Lattice::cds();
    let all = CdsState::ALL;
    StateSpace {
        names: all.iter().map(|s| s.name()).collect(),
        combine: all.iter().map(|&a| all.iter().map(|&b| Some(merge_cds(a, b).index())).collect()).collect(),
        feas: all.iter().map(|&a| all.iter().map(|&b| feas_cds(a, b)).collect()).collect(),
        intro: vec![
            (CdsState::Empty.index(), false),
            (CdsState::F.index(), false),
            (CdsState::L.index(), true),
            (CdsState::R.index(), true),
        ],
        intro_root: vec![(CdsState::L.index(), true)],
        zeta: Lattice::kernel::<Gf2x64>(lattice.zeta_matrix()).expect("small entries"),
        mobius: Lattice::kernel::<Gf2x64>(lattice.mobius_matrix()).expect("small entries"),
    }
}

const TAG_F: usize = 1;
const TAG_L: usize = 2;
const TAG_R: usize = 4;

/// Eight-state variant that keeps the exact tag set of each class. It agrees with
/// [`cds_space`] at the root and exists to cross-check the collapse of large tag sets.
pub fn cds_refined_space() -> StateSpace {
    let join: Vec<Vec<usize>> = (0..8).map(|a| (0..8).map(|b| a | b).collect()).collect();
    let lattice = Lattice::new(join).expect("boolean lattice");
    let bad = |a: usize, b: usize| (a & TAG_F != 0 && b & (TAG_L | TAG_R) != 0) || (a & TAG_L != 0 && b & TAG_R != 0);
    StateSpace {
        names: vec!["{}", "{F}", "{L}", "{F,L}", "{R}", "{F,R}", "{L,R}", "{F,L,R}"],
        combine: (0..8).map(|a| (0..8).map(|b| Some(a | b)).collect()).collect(),
        feas: (0..8).map(|a| (0..8).map(|b| !bad(a, b) && !bad(b, a)).collect()).collect(),
        intro: vec![(0, false), (TAG_F, false), (TAG_L, true), (TAG_R, true)],
        intro_root: vec![(TAG_L, true)],
        zeta: Lattice::kernel::<Gf2x64>(lattice.zeta_matrix()).expect("small entries"),
        mobius: Lattice::kernel::<Gf2x64>(lattice.mobius_matrix()).expect("small entries"),
    }
}

/// Closed neighbourhood of a minimum-degree vertex.
pub fn cds_branches(graph: &LabeledGraph) -> Vec<Vertex> {
    let Some(v) = (0..graph.n()).min_by_key(|&v| (graph.degree(v), v)) else { return Vec::new() };
    let mut out = vec![v];
    out.extend(graph.neighbors(v));
    out.sort_unstable();
    out
}

/// Decides whether a connected dominating set of cost at most the budget exists.
pub fn solve_cds(expr: &CliqueExpression, costs: &Costs, opts: &SolveOptions) -> Result<SolveOutcome, SolveError> {
    solve_cds_with(&cds_space(), expr, costs, opts)
}

/// [`solve_cds`] over a caller-supplied state space.
pub fn solve_cds_with(
    space: &StateSpace,
    expr: &CliqueExpression,
    costs: &Costs,
    opts: &SolveOptions,
) -> Result<SolveOutcome, SolveError> {
    let (prepared, graph) = prepare_connected(expr)?;
    if costs.len() != graph.n() {
        return Err(SolveError::SizeMismatch);
    }
    if graph.n() == 1 {
        let c = costs.get(0);
        let yes = opts.budget >= c;
        return Ok(SolveOutcome {
            problem: Problem::Cds,
            decision: yes,
            trials: 1,
            best_cost_found: yes.then_some(c),
            seed: opts.seed,
        });
    }
    if !crate::graph::is_connected(&graph) {
        return Err(SolveError::Disconnected);
    }
    Driver { problem: Problem::Cds, space, branches: cds_branches }.solve(&prepared, costs, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;
    use CdsState::*;

    #[test]
    fn merge_table() {
        for x in CdsState::ALL {
            assert_eq!(merge_cds(Empty, x), x);
            assert_eq!(merge_cds(TwoPlus, x), TwoPlus);
            assert_eq!(merge_cds(x, x), x);
        }
        assert_eq!(merge_cds(F, L), TwoPlus);
        let two_plus = CdsState::ALL
            .iter()
            .flat_map(|&a| CdsState::ALL.iter().map(move |&b| merge_cds(a, b)))
            .filter(|&m| m == TwoPlus)
            .count();
        assert_eq!(two_plus, 15);
    }

    #[test]
    fn feas_table() {
        for x in CdsState::ALL {
            assert!(feas_cds(Empty, x));
        }
        assert!(!feas_cds(L, R));
        assert!(feas_cds(F, F));
        assert!(!feas_cds(TwoPlus, TwoPlus));
    }

    #[test]
    fn kappa_is_a_homomorphism() {
        let lat = Lattice::cds();
        for a in CdsState::ALL {
            for b in CdsState::ALL {
                assert_eq!(kappa(merge_cds(a, b)), lat.join(kappa(a), kappa(b)));
            }
        }
    }

    #[test]
    fn introduce_cells() {
        let space = cds_space();
        let t = crate::dp::dp_introduce(&space, 1, false, 2, 3, 5, 10);
        assert_eq!(t.ones(), vec![(0, 0, 0), (1, 0, 0), (2, 2, 3), (3, 2, 3)]);
        let t = crate::dp::dp_introduce(&space, 1, true, 2, 3, 5, 10);
        assert_eq!(t.ones(), vec![(2, 2, 3)]);
    }

    fn solve(text: &str, budget: u64) -> bool {
        let e = parse_expression(text).unwrap();
        solve_cds(&e, &Costs::unit(e.n()), &SolveOptions::new(budget, 3)).unwrap().decision
    }

    const P4: &str = "1: intro 1 0\n2: intro 2 1\n3: union 1 2\n4: join 1 2 3\n5: relabel 1 3 4\n\
                      6: intro 1 2\n7: union 5 6\n8: join 1 2 7\n9: relabel 2 3 8\n10: intro 2 3\n\
                      11: union 9 10\n12: join 1 2 11\nroot 12\n";
    const STAR: &str = "1: intro 1 0\n2: intro 2 1\n3: intro 2 2\n4: intro 2 3\n5: union 2 3\n6: union 5 4\n\
                        7: union 1 6\n8: join 1 2 7\nroot 8\n";

    #[test]
    fn small_decisions() {
        assert!(solve(STAR, 1));
        assert!(!solve(P4, 1));
        assert!(solve(P4, 2));
        assert!(solve("1: intro 1 0\n2: intro 2 1\n3: union 1 2\n4: join 1 2 3\nroot 4\n", 1));
        assert!(solve("1: intro 1 0\nroot 1\n", 1));
        assert!(!solve("1: intro 1 0\nroot 1\n", 0));
    }

    #[test]
    fn refined_space_agrees() {
        let e = parse_expression(P4).unwrap();
        for b in 0..4 {
            let opts = SolveOptions::new(b, 5);
            let a = solve_cds(&e, &Costs::unit(4), &opts).unwrap();
            let r = solve_cds_with(&cds_refined_space(), &e, &Costs::unit(4), &opts).unwrap();
            assert_eq!(a, r);
        }
    }
}
