use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use cutcount::bench::{bench, to_csv};
use cutcount::cds::{cds_branches, cds_space};
use cutcount::cvc::{cvc_branches, cvc_space};
use cutcount::dp::DEFAULT_MEM_CAP;
use cutcount::graph::sample_weights;
use cutcount::lbgen::build_generated;
use cutcount::oracle::{brute_cds, brute_cvc, verify_dp_tables, VerifyReport};
use cutcount::transform::prepare;
use cutcount::{
    parse_expression, parse_graph, solve_cds, solve_cvc, CliqueExpression, Costs, LabeledGraph, Problem, SatInstance,
    SolveOptions, SolveOutcome,
};

#[derive(Parser)]
#[command(
    name = "cutcount",
    version,
    about = "Connected vertex cover and connected dominating set over clique-width expressions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether a solution of cost at most the budget exists.
    Solve(SolveArgs),
    /// Rewrite an expression into augmented nice form.
    Transform(TransformArgs),
    /// Check every DP table and the decision against brute force (n <= 8).
    Verify(VerifyArgs),
    /// Build a lower-bound instance from a CNF formula.
    Generate(GenerateArgs),
    /// Time the recurrences on synthetic expressions for a range of widths.
    Bench(BenchArgs),
}

#[derive(Args)]
struct InstanceArgs {
    #[arg(long)]
    problem: Problem,
    /// Clique-expression file.
    #[arg(long)]
    expr: PathBuf,
    /// Graph file with `c <v> <cost>` lines; its edges must match the expression.
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Independent trials before answering no.
    #[arg(long, default_value_t = 20)]
    repeats: u32,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Largest table allowed, in bytes.
    #[arg(long, default_value_t = DEFAULT_MEM_CAP)]
    mem_cap: u64,
    /// Write the JSON result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    inst: InstanceArgs,
    #[arg(long, required_unless_present = "find_min_cost")]
    budget: Option<u64>,
    /// Binary search for the smallest budget the solver accepts.
    #[arg(long)]
    find_min_cost: bool,
}

#[derive(Args)]
struct TransformArgs {
    #[arg(long)]
    expr: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    inst: InstanceArgs,
    /// Negate the join feasibility table before running (the check must then fail).
    #[arg(long)]
    corrupt: bool,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    problem: Problem,
    /// DIMACS CNF file.
    #[arg(long)]
    cnf: PathBuf,
    /// Variables per group.
    #[arg(long)]
    beta: usize,
    /// Output directory for graph.txt, expr.cex, roles.txt and manifest.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    problem: Problem,
    #[arg(long, default_value_t = 4)]
    k_min: usize,
    #[arg(long, default_value_t = 9)]
    k_max: usize,
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(&a),
        Command::Transform(a) => cmd_transform(&a).map(|()| true),
        Command::Verify(a) => cmd_verify(&a),
        Command::Generate(a) => cmd_generate(&a).map(|()| true),
        Command::Bench(a) => cmd_bench(&a).map(|()| true),
    };
    match result {
        Ok(true) => ExitCode::from(0),
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    emit(out, &(serde_json::to_string_pretty(value)? + "\n"))
}

struct Loaded {
    expr: CliqueExpression,
    graph: LabeledGraph,
    costs: Costs,
}

fn load(a: &InstanceArgs) -> Result<Loaded> {
    let expr = parse_expression(&read(&a.expr)?).with_context(|| format!("parsing {}", a.expr.display()))?;
    let graph = expr.evaluate();
    let costs = match &a.graph {
        Some(path) => {
            let file = parse_graph(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
            if !file.graph.same_edges(&graph) {
                bail!("{} does not describe the graph of the expression", path.display());
            }
            Costs::new(file.costs.unwrap_or_else(|| vec![1; graph.n()]))?
        }
        None => Costs::unit(graph.n()),
    };
    Ok(Loaded { expr, graph, costs })
}

fn options(a: &InstanceArgs, budget: u64) -> SolveOptions {
    SolveOptions { budget, seed: a.seed, repeats: a.repeats, mem_cap: a.mem_cap, jobs: a.jobs }
}

fn run_solver(problem: Problem, l: &Loaded, opts: &SolveOptions) -> Result<SolveOutcome> {
    Ok(match problem {
        Problem::Cvc => solve_cvc(&l.expr, &l.costs, opts)?,
        Problem::Cds => solve_cds(&l.expr, &l.costs, opts)?,
    })
}

#[derive(Serialize)]
struct MinCost {
    problem: Problem,
    min_cost: Option<u64>,
    solves: u32,
    seed: u64,
}

fn cmd_solve(a: &SolveArgs) -> Result<bool> {
    let l = load(&a.inst)?;
    if !a.find_min_cost {
        let outcome = run_solver(a.inst.problem, &l, &options(&a.inst, a.budget.expect("required by clap")))?;
        emit_json(a.inst.out.as_deref(), &outcome)?;
        return Ok(outcome.decision);
    }
    // smallest accepted budget in [lo, hi]; a yes also caps hi at the cost it found
    let (mut lo, mut hi) = (0, l.costs.total());
    let mut solves = 0;
    let mut found = None;
    while lo <= hi {
        let mid = lo + (hi - lo) / 2;
        let outcome = run_solver(a.inst.problem, &l, &options(&a.inst, mid))?;
        solves += 1;
        match outcome.best_cost_found.filter(|_| outcome.decision) {
            Some(cost) => {
                found = Some(cost);
                if cost == 0 {
                    break;
                }
                hi = cost - 1;
            }
            None => lo = mid + 1,
        }
    }
    let result = MinCost { problem: a.inst.problem, min_cost: found, solves, seed: a.inst.seed };
    emit_json(a.inst.out.as_deref(), &result)?;
    Ok(found.is_some())
}

fn cmd_transform(a: &TransformArgs) -> Result<()> {
    let expr = parse_expression(&read(&a.expr)?).with_context(|| format!("parsing {}", a.expr.display()))?;
    let out = prepare(&expr)?;
    eprintln!("width before: {}, after: {}", expr.width(), out.width());
    emit(a.out.as_deref(), &out.to_text())
}

#[derive(Serialize)]
struct DecisionCheck {
    budget: u64,
    expected: bool,
    found: bool,
}

#[derive(Serialize)]
struct VerifyOutput {
    problem: Problem,
    pass: bool,
    optimum: Option<u64>,
    tables: Vec<VerifyReport>,
    decisions: Vec<DecisionCheck>,
}

fn cmd_verify(a: &VerifyArgs) -> Result<bool> {
    let l = load(&a.inst)?;
    let problem = a.inst.problem;
    let prepared = prepare(&l.expr)?;
    let mut space = match problem {
        Problem::Cvc => cvc_space(),
        Problem::Cds => cds_space(),
    };
    if a.corrupt {
        for row in &mut space.feas {
            for f in row.iter_mut() {
                *f = !*f;
            }
        }
    }
    let weights = sample_weights(&l.graph, a.inst.seed)?;
    let mut roots = match problem {
        Problem::Cvc => cvc_branches(&l.graph),
        Problem::Cds => cds_branches(&l.graph),
    };
    if roots.is_empty() {
        roots.push(0);
    }
    let mut tables = Vec::new();
    for vstar in roots {
        tables.push(verify_dp_tables(problem, &space, &prepared, l.costs.values(), weights.values(), vstar)?);
    }
    let optimum = match problem {
        Problem::Cvc => brute_cvc(&l.graph, l.costs.values())?,
        Problem::Cds => brute_cds(&l.graph, l.costs.values())?,
    };
    let mut decisions = Vec::new();
    if let Some(opt) = optimum {
        let budgets = if opt > 0 { vec![opt - 1, opt] } else { vec![opt] };
        for budget in budgets {
            let outcome = run_solver(problem, &l, &options(&a.inst, budget))?;
            decisions.push(DecisionCheck { budget, expected: budget >= opt, found: outcome.decision });
        }
    }
    let pass = tables.iter().all(VerifyReport::ok) && decisions.iter().all(|d| d.expected == d.found);
    emit_json(a.inst.out.as_deref(), &VerifyOutput { problem, pass, optimum, tables, decisions })?;
    Ok(pass)
}

#[derive(Serialize)]
struct Manifest {
    problem: Problem,
    beta: usize,
    t: usize,
    p: usize,
    columns: usize,
    budget: u64,
    width: u32,
    width_bound: usize,
    vertices: usize,
    edges: usize,
}

fn cmd_generate(a: &GenerateArgs) -> Result<()> {
    let sat = SatInstance::parse_dimacs(&read(&a.cnf)?).with_context(|| format!("parsing {}", a.cnf.display()))?;
    let inst = build_generated(a.problem, &sat, a.beta)?;
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let gadget = cutcount::lbgen::build_path_gadget(a.problem);
    let roles: String = (0..inst.graph.n()).map(|v| format!("{v} {}\n", inst.vertex_name(v, &gadget))).collect();
    let manifest = Manifest {
        problem: a.problem,
        beta: a.beta,
        t: inst.params.t,
        p: inst.params.p,
        columns: inst.params.columns,
        budget: inst.budget,
        width: inst.expression.width(),
        width_bound: inst.params.width_bound(),
        vertices: inst.graph.n(),
        edges: inst.graph.m(),
    };
    let json = serde_json::to_string_pretty(&manifest)? + "\n";
    for (name, text) in [
        ("graph.txt", inst.graph.to_text()),
        ("expr.cex", inst.expression.to_text()),
        ("roles.txt", roles),
        ("manifest.json", json.clone()),
    ] {
        let path = a.out.join(name);
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    print!("{json}");
    Ok(())
}

fn cmd_bench(a: &BenchArgs) -> Result<()> {
    if a.k_min < 3 || a.k_max < a.k_min {
        bail!("need 3 <= k-min <= k-max");
    }
    let rows = bench(a.problem, a.k_min..=a.k_max, a.repeats, a.seed)?;
    emit(a.out.as_deref(), &to_csv(&rows))
}
