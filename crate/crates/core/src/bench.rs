//! Timing of the table recurrences on synthetic expressions with `k` live labels.

use std::fmt::Write as _;
use std::time::Instant;

use serde::Serialize;

use crate::cds::cds_space;
use crate::cvc::cvc_space;
use crate::dp::{budget_bounds, max_live, DpInstance, Problem, StateSpace};
use crate::error::SolveError;
use crate::expr::{CliqueExpression, LinearBuilder};
use crate::graph::{sample_weights_n, Label};
use crate::transform::{prepare, Annotations};

/// Vertices introduced while all `k` labels are live.
pub const BENCH_PEAK: usize = 12;

/// Vertex count of the synthetic expression for `k`: `k - 1` vertices to fill the classes,
/// then [`BENCH_PEAK`] more, so consecutive `k` differ by one radix factor in table size.
pub fn bench_vertices(k: usize) -> usize {
    k - 1 + BENCH_PEAK
}

/// A connected linear expression on `n` vertices that keeps `k - 1` label classes live and
/// introduces each vertex on label `k` before joining it to the classes of its two
/// neighbours in cyclic class order. Needs `k >= 3`.
pub fn bench_expression(n: usize, k: Label) -> CliqueExpression {
    assert!(k >= 3 && n >= 1, "bench expressions need k >= 3");
    let classes = k as usize - 1;
    let class = |i: usize| (i % classes) as Label + 1;
    let mut b = LinearBuilder::new();
    b.intro(class(0));
    for i in 1..n {
        b.intro(k);
        b.join(k, class(i - 1));
        // class(i + 1) already holds vertex i + 1 - classes
        if i + 1 >= classes && class(i + 1) != class(i - 1) {
            b.join(k, class(i + 1));
        }
        b.relabel(k, class(i));
    }
    b.finish(k).expect("well-formed")
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchRow {
    pub problem: Problem,
    pub k: usize,
    pub n: usize,
    pub nodes: usize,
    /// Most live labels at one node.
    pub live: usize,
    /// Signatures summed over all nodes.
    pub cells: u64,
    /// Fastest of the repeats, in seconds.
    pub seconds: f64,
}

struct Prepared {
    k: usize,
    expr: CliqueExpression,
    ann: Annotations,
    weights: Vec<u64>,
    cmax: usize,
    wmax: usize,
}

fn prepare_bench(k: usize, n: usize, seed: u64) -> Result<Prepared, SolveError> {
    let expr = prepare(&bench_expression(n, k as Label))?;
    let ann = Annotations::compute(&expr);
    let weights = sample_weights_n(n, seed)?.values().to_vec();
    let (cmax, wmax) = budget_bounds(&vec![1; n], &weights, 1);
    Ok(Prepared { k, expr, ann, weights, cmax, wmax })
}

fn time_once(space: &StateSpace, p: &Prepared) -> Result<f64, SolveError> {
    let costs = vec![1u64; p.expr.n()];
    let inst = DpInstance {
        space,
        expr: &p.expr,
        ann: &p.ann,
        costs: &costs,
        weights: &p.weights,
        vstar: 0,
        cmax: p.cmax,
        wmax: p.wmax,
    };
    let start = Instant::now();
    inst.run(false)?;
    Ok(start.elapsed().as_secs_f64())
}

/// Times one trial of the recurrences (budget 1, unit costs) for every `k`. Repeats go
/// round-robin over `k` so that a slow stretch of the machine hits all rows alike; each
/// row keeps its fastest time.
pub fn bench(
    problem: Problem,
    ks: std::ops::RangeInclusive<usize>,
    repeats: usize,
    seed: u64,
) -> Result<Vec<BenchRow>, SolveError> {
    let space = match problem {
        Problem::Cvc => cvc_space(),
        Problem::Cds => cds_space(),
    };
    let prepared = ks.map(|k| prepare_bench(k, bench_vertices(k), seed)).collect::<Result<Vec<_>, _>>()?;
    let mut best = vec![f64::INFINITY; prepared.len()];
    for _ in 0..repeats.max(1) {
        for (slot, p) in best.iter_mut().zip(&prepared) {
            *slot = slot.min(time_once(&space, p)?);
        }
    }
    let radix = space.names.len() as u64;
    Ok(prepared
        .iter()
        .zip(best)
        .map(|(p, seconds)| BenchRow {
            problem,
            k: p.k,
            n: p.expr.n(),
            nodes: p.expr.len(),
            live: max_live(&p.ann),
            cells: p.ann.info.iter().map(|i| radix.pow(i.live.len() as u32)).sum(),
            seconds,
        })
        .collect())
}

/// Time of each row divided by the time of the row before it.
pub fn time_ratios(rows: &[BenchRow]) -> Vec<f64> {
    rows.windows(2).map(|w| w[1].seconds / w[0].seconds).collect()
}

pub fn to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("problem,k,n,nodes,live,cells,seconds,ratio\n");
    let mut prev: Option<f64> = None;
    for r in rows {
        let ratio = prev.map(|p| format!("{:.3}", r.seconds / p)).unwrap_or_default();
        writeln!(out, "{},{},{},{},{},{},{:.6},{}", r.problem, r.k, r.n, r.nodes, r.live, r.cells, r.seconds, ratio)
            .expect("write to string");
        prev = Some(r.seconds);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::is_connected;

    #[test]
    fn expressions_are_connected_and_keep_k_live() {
        for k in 3..=7 {
            let e = bench_expression(bench_vertices(k as usize), k);
            assert!(is_connected(&e.evaluate()), "k={k}");
            let ann = Annotations::compute(&prepare(&e).unwrap());
            assert_eq!(max_live(&ann), k as usize, "k={k}");
        }
    }

    #[test]
    fn cells_scale_with_the_radix() {
        let rows = bench(Problem::Cvc, 4..=5, 1, 1).unwrap();
        let ratio = rows[1].cells as f64 / rows[0].cells as f64;
        assert!((5.0..=6.0).contains(&ratio), "{ratio}");
        assert_eq!(to_csv(&rows).lines().count(), 3);
    }
}
