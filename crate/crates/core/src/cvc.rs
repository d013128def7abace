//! Connected vertex cover by cut-and-count over GF(2).

use crate::convolution::{AxisKernel, SetFamily};
use crate::dp::{prepare_connected, Driver, Problem, SolveOptions, SolveOutcome, StateSpace};
use crate::error::SolveError;
use crate::expr::CliqueExpression;
use crate::graph::{Costs, LabeledGraph, Vertex};

/// Which of `0` (a vertex outside the cover), `1_L` and `1_R` occur in a label class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CvcState {
    Zero,
    OneL,
    OneR,
    ZeroOneL,
    ZeroOneR,
    OneLOneR,
}

const ZERO: u8 = 1;
const ONE_L: u8 = 2;
const ONE_R: u8 = 4;

impl CvcState {
    pub const ALL: [CvcState; 6] =
        [CvcState::Zero, CvcState::OneL, CvcState::OneR, CvcState::ZeroOneL, CvcState::ZeroOneR, CvcState::OneLOneR];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Bit 0 for `0`, bit 1 for `1_L`, bit 2 for `1_R`.
    pub fn mask(self) -> u8 {
        match self {
            CvcState::Zero => ZERO,
            CvcState::OneL => ONE_L,
            CvcState::OneR => ONE_R,
            CvcState::ZeroOneL => ZERO | ONE_L,
            CvcState::ZeroOneR => ZERO | ONE_R,
            CvcState::OneLOneR => ONE_L | ONE_R,
        }
    }

    /// `None` for the empty set and the full set.
    pub fn from_mask(mask: u8) -> Option<CvcState> {
        Self::ALL.into_iter().find(|s| s.mask() == mask)
    }

    pub fn name(self) -> &'static str {
        ["{0}", "{1L}", "{1R}", "{0,1L}", "{0,1R}", "{1L,1R}"][self.index()]
    }
}

/// Whether joining classes in these states leaves every new edge covered and uncut.
pub fn feas_cvc(a: CvcState, b: CvcState) -> bool {
    let (a, b) = (a.mask(), b.mask());
    let covered = a & ZERO == 0 || b & ZERO == 0;
    let l_to_r = a & ONE_L == 0 || b & ONE_R == 0;
    let r_to_l = a & ONE_R == 0 || b & ONE_L == 0;
    covered && l_to_r && r_to_l
}

/// State of the union of two classes; `None` when all three symbols appear.
pub fn union_state(a: CvcState, b: CvcState) -> Option<CvcState> {
    CvcState::from_mask(a.mask() | b.mask())
}

/// The six states as a family over `{0, 1_L, 1_R}`.
pub fn state_family() -> SetFamily {
    SetFamily::by_size(3, 1, 2).expect("small universe")
}

pub fn cvc_space() -> StateSpace {
    let family = state_family();
    let to_state = |m: u64| CvcState::from_mask(m as u8).expect("member is a state").index();
    let steps: Vec<(usize, usize)> = family
        .zeta_steps()
        .into_iter()
        .map(|(d, s)| (to_state(family.members()[d]), to_state(family.members()[s])))
        .collect();
    let all = CvcState::ALL;
    StateSpace {
        names: all.iter().map(|s| s.name()).collect(),
        combine: all.iter().map(|&a| all.iter().map(|&b| union_state(a, b).map(CvcState::index)).collect()).collect(),
        feas: all.iter().map(|&a| all.iter().map(|&b| feas_cvc(a, b)).collect()).collect(),
        intro: vec![(CvcState::Zero.index(), false), (CvcState::OneL.index(), true), (CvcState::OneR.index(), true)],
        intro_root: vec![(CvcState::OneL.index(), true)],
        // over GF(2) the inverse transform repeats the same steps
        zeta: AxisKernel::Steps(steps.clone()),
        mobius: AxisKernel::Steps(steps),
    }
}

/// Both endpoints of the smallest edge.
pub fn cvc_branches(graph: &LabeledGraph) -> Vec<Vertex> {
    graph.edges().next().map(|(u, v)| vec![u, v]).unwrap_or_default()
}

/// Decides whether a connected vertex cover of cost at most the budget exists.
/// A yes answer is always correct; a no answer is wrong with probability at most
/// `2^-repeats`.
pub fn solve_cvc(expr: &CliqueExpression, costs: &Costs, opts: &SolveOptions) -> Result<SolveOutcome, SolveError> {
    let (prepared, graph) = prepare_connected(expr)?;
    if costs.len() != graph.n() {
        return Err(SolveError::SizeMismatch);
    }
    if graph.m() == 0 {
        // the empty set covers no edges and is taken as connected
        return Ok(SolveOutcome {
            problem: Problem::Cvc,
            decision: true,
            trials: 1,
            best_cost_found: Some(0),
            seed: opts.seed,
        });
    }
    if !crate::graph::is_connected(&graph) {
        return Err(SolveError::Disconnected);
    }
    let space = cvc_space();
    Driver { problem: Problem::Cvc, space: &space, branches: cvc_branches }.solve(&prepared, costs, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;
    use CvcState::*;

    #[test]
    fn feas_examples() {
        assert!(feas_cvc(Zero, OneL));
        assert!(!feas_cvc(ZeroOneL, ZeroOneR));
        for s in CvcState::ALL {
            assert_eq!(feas_cvc(s, s), matches!(s, OneL | OneR), "{s:?}");
        }
        // the table is symmetric
        for a in CvcState::ALL {
            for b in CvcState::ALL {
                assert_eq!(feas_cvc(a, b), feas_cvc(b, a));
            }
        }
    }

    #[test]
    fn union_preimages_of_one_l_one_r() {
        let pairs: Vec<_> = CvcState::ALL
            .iter()
            .flat_map(|&a| CvcState::ALL.iter().map(move |&b| (a, b)))
            .filter(|&(a, b)| union_state(a, b) == Some(OneLOneR))
            .collect();
        assert_eq!(pairs.len(), 7);
        assert_eq!(union_state(Zero, OneLOneR), None);
        let zero: Vec<_> = CvcState::ALL
            .iter()
            .flat_map(|&a| CvcState::ALL.iter().map(move |&b| (a, b)))
            .filter(|&(a, b)| union_state(a, b) == Some(Zero))
            .collect();
        assert_eq!(zero, vec![(Zero, Zero)]);
    }

    #[test]
    fn introduce_cells() {
        let space = cvc_space();
        let t = crate::dp::dp_introduce(&space, 1, false, 1, 3, 5, 10);
        assert_eq!(t.ones(), vec![(0, 0, 0), (1, 1, 3), (2, 1, 3)]);
        let t = crate::dp::dp_introduce(&space, 1, true, 1, 3, 5, 10);
        assert_eq!(t.ones(), vec![(1, 1, 3)]);
    }

    fn solve(text: &str, budget: u64) -> bool {
        let e = parse_expression(text).unwrap();
        let costs = Costs::unit(e.n());
        solve_cvc(&e, &costs, &SolveOptions::new(budget, 1)).unwrap().decision
    }

    const EDGE: &str = "1: intro 1 0\n2: intro 2 1\n3: union 1 2\n4: join 1 2 3\nroot 4\n";
    const TRIANGLE: &str = "1: intro 1 0\n2: intro 2 1\n3: union 1 2\n4: join 1 2 3\n5: relabel 2 1 4\n\
                            6: intro 2 2\n7: union 5 6\n8: join 1 2 7\nroot 8\n";
    const STAR: &str = "1: intro 1 0\n2: intro 2 1\n3: intro 2 2\n4: intro 2 3\n5: union 2 3\n6: union 5 4\n\
                        7: union 1 6\n8: join 1 2 7\nroot 8\n";

    #[test]
    fn small_decisions() {
        assert!(solve(EDGE, 1));
        assert!(!solve(EDGE, 0));
        assert!(!solve(TRIANGLE, 1));
        assert!(solve(TRIANGLE, 2));
        assert!(solve(STAR, 1));
    }

    #[test]
    fn disconnected_rejected() {
        let e = parse_expression(
            "1: intro 1 0\n2: intro 2 1\n3: union 1 2\n4: join 1 2 3\n5: intro 3 2\n6: intro 4 3\n7: union 5 6\n\
             8: join 3 4 7\n9: union 4 8\nroot 9\n",
        )
        .unwrap();
        let err = solve_cvc(&e, &Costs::unit(4), &SolveOptions::new(4, 0)).unwrap_err();
        assert_eq!(err.to_string(), "input graph must be connected");
    }

    #[test]
    fn edgeless_is_yes() {
        let e = parse_expression("1: intro 1 0\nroot 1\n").unwrap();
        assert!(solve_cvc(&e, &Costs::unit(1), &SolveOptions::new(0, 0)).unwrap().decision);
    }
}
