use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use efx_core::anneal::init_random_allocation;
use efx_core::rng::solver_rng;
use efx_core::{
    anneal_solve, anneal_solve_warm, brute_force_efx, count_violations, descent_solve, is_efx,
    n_plus_one_pick, round_robin, violating_triples, welfare_max_allocation, Allocation,
    AnnealParams, GenKind, GenSpec, IdenticalInstance, Instance, DEFAULT_BRUTE_FORCE_CAP,
    DEFAULT_SCALE,
};
use efx_harness::{
    effective_workers, read_allocation, read_instance, records_to_csv, run_experiment,
    write_allocation, write_instance, ExperimentConfig, SolverKind,
};

/// Fair-division toolkit: generate instances, search for EFX allocations,
/// verify them, and benchmark the solvers.
///
/// Exit codes: 0 on success (an EFX result where one was sought), 1 when
/// the result is not EFX or the budget ran out, 2 on usage or input errors.
#[derive(Parser)]
#[command(name = "efx", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a valuation instance and write it as JSON.
    Gen(GenCmd),
    /// Run one solver on an instance file.
    Solve(SolveCmd),
    /// Check an allocation file against its instance and list violations.
    Verify(VerifyCmd),
    /// Run a multi-trial benchmark and print summary statistics.
    Bench(BenchCmd),
    /// Exhaustively search a small instance for any EFX allocation.
    Brute(BruteCmd),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Uniform,
    Correlated,
    Identical,
}

impl From<KindArg> for GenKind {
    fn from(kind: KindArg) -> GenKind {
        match kind {
            KindArg::Uniform => GenKind::Uniform,
            KindArg::Correlated => GenKind::Correlated,
            KindArg::Identical => GenKind::Identical,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SolverArg {
    Anneal,
    Descent,
    RoundRobin,
    NPlusOne,
    Brute,
}

impl From<SolverArg> for SolverKind {
    fn from(solver: SolverArg) -> SolverKind {
        match solver {
            SolverArg::Anneal => SolverKind::Anneal,
            SolverArg::Descent => SolverKind::Descent,
            SolverArg::RoundRobin => SolverKind::RoundRobin,
            SolverArg::NPlusOne => SolverKind::NPlusOne,
            SolverArg::Brute => SolverKind::BruteForce,
        }
    }
}

#[derive(Args)]
struct GenOpts {
    /// Valuation family to draw from.
    #[arg(long, value_enum)]
    kind: KindArg,
    /// Number of agents.
    #[arg(long)]
    n: usize,
    /// Number of goods.
    #[arg(long)]
    m: usize,
    /// Correlation strength in [0, 1]; only the correlated family reads it.
    #[arg(long, default_value_t = 0.0)]
    rho: f64,
    /// Upper bound on each drawn value.
    #[arg(long, default_value_t = DEFAULT_SCALE)]
    scale: u64,
}

impl GenOpts {
    fn to_spec(&self, seed: u64) -> GenSpec {
        GenSpec { kind: self.kind.into(), n: self.n, m: self.m, rho: self.rho, seed, scale: self.scale }
    }
}

#[derive(Args)]
struct AnnealOpts {
    /// Temperature at the start of each cooling cycle.
    #[arg(long, default_value_t = 5.0)]
    t_initial: f64,
    /// Temperature floor that triggers a restart.
    #[arg(long, default_value_t = 1e-4)]
    t_min: f64,
    /// Geometric cooling factor applied per temperature level.
    #[arg(long, default_value_t = 0.99)]
    cooling: f64,
    /// Proposals per temperature level; defaults to 100 * n * m.
    #[arg(long)]
    steps_per_level: Option<u64>,
    /// Total proposal budget across restarts; unlimited when absent.
    #[arg(long)]
    max_steps: Option<u64>,
}

impl AnnealOpts {
    fn to_params(&self, seed: u64) -> AnnealParams {
        AnnealParams {
            t_initial: self.t_initial,
            t_min: self.t_min,
            steps_per_level: self.steps_per_level,
            cooling: self.cooling,
            max_total_steps: self.max_steps,
            seed,
        }
    }
}

#[derive(Args)]
struct GenCmd {
    #[command(flatten)]
    gen: GenOpts,
    /// Generator seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveCmd {
    /// Instance file to solve.
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum)]
    solver: SolverArg,
    /// Solver seed (annealing and the descent starting allocation).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    anneal: AnnealOpts,
    /// Start annealing from the welfare maximizer instead of random.
    #[arg(long)]
    warm_start: bool,
    /// State cap for the brute solver.
    #[arg(long, default_value_t = DEFAULT_BRUTE_FORCE_CAP)]
    brute_cap: u128,
    /// Write the resulting allocation here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyCmd {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    allocation: PathBuf,
}

#[derive(Args)]
struct BenchCmd {
    #[command(flatten)]
    gen: GenOpts,
    /// Base seed; trial t uses seed + t for its instance and its solver.
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum)]
    solver: SolverArg,
    /// Number of trials.
    #[arg(long, default_value_t = 1)]
    trials: u64,
    /// Worker threads; defaults to $EFX_WORKERS, then 1.
    #[arg(long)]
    workers: Option<usize>,
    /// Start annealing from the welfare maximizer instead of random.
    #[arg(long)]
    warm_start: bool,
    #[command(flatten)]
    anneal: AnnealOpts,
    /// State cap for the brute solver.
    #[arg(long, default_value_t = DEFAULT_BRUTE_FORCE_CAP)]
    brute_cap: u128,
    /// Stream per-trial records to this file as JSON Lines.
    #[arg(long)]
    output_path: Option<PathBuf>,
    /// Also write the summary document here (it always prints to stdout).
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Also write the records as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Record elapsed_ms as 0 so repeated runs are byte-identical.
    #[arg(long)]
    zero_elapsed: bool,
}

#[derive(Args)]
struct BruteCmd {
    #[arg(long)]
    instance: PathBuf,
    /// Give up when the allocation count exceeds this cap.
    #[arg(long, default_value_t = DEFAULT_BRUTE_FORCE_CAP)]
    cap: u128,
    /// Write the found allocation here.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run() -> Result<u8> {
    match Cli::parse().cmd {
        Cmd::Gen(cmd) => run_gen(cmd),
        Cmd::Solve(cmd) => run_solve(cmd),
        Cmd::Verify(cmd) => run_verify(cmd),
        Cmd::Bench(cmd) => run_bench(cmd),
        Cmd::Brute(cmd) => run_brute(cmd),
    }
}

fn run_gen(cmd: GenCmd) -> Result<u8> {
    let spec = cmd.gen.to_spec(cmd.seed);
    let inst = spec.generate()?;
    match &cmd.out {
        Some(path) => write_instance(path, &inst, spec.scale)
            .with_context(|| format!("writing {}", path.display()))?,
        None => println!("{}", efx_harness::instance_to_json(&inst, spec.scale)?),
    }
    Ok(0)
}

fn load_instance(path: &Path) -> Result<Instance> {
    let (inst, _scale) = read_instance(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(inst)
}

fn run_solve(cmd: SolveCmd) -> Result<u8> {
    let inst = load_instance(&cmd.instance)?;
    if cmd.warm_start && cmd.solver != SolverArg::Anneal {
        bail!("warm starts only apply to the annealing solver");
    }
    let (solved, steps, restarts, alloc): (bool, u64, u64, Option<Allocation>) = match cmd.solver {
        SolverArg::Anneal => {
            let params = cmd.anneal.to_params(cmd.seed);
            let result = if cmd.warm_start {
                let start = welfare_max_allocation(&inst);
                anneal_solve_warm(&inst, &params, &start)?
            } else {
                anneal_solve(&inst, &params)?
            };
            (result.solved, result.steps, result.restarts, Some(result.allocation))
        }
        SolverArg::Descent => {
            if !inst.has_identical_rows() {
                bail!("the descent solver requires identical valuation rows");
            }
            let ident = IdenticalInstance::new(inst.num_agents(), inst.agent_values(0).to_vec())?;
            let start = init_random_allocation(
                &mut solver_rng(cmd.seed),
                inst.num_agents(),
                inst.num_goods(),
            );
            let trace = descent_solve(&ident, &start)?;
            (true, trace.moves.len() as u64, 0, Some(trace.allocation))
        }
        SolverArg::RoundRobin => {
            let alloc = round_robin(&inst);
            (is_efx(&inst, &alloc)?, 0, 0, Some(alloc))
        }
        SolverArg::NPlusOne => {
            let alloc = n_plus_one_pick(&inst)?;
            (is_efx(&inst, &alloc)?, 0, 0, Some(alloc))
        }
        SolverArg::Brute => match brute_force_efx(&inst, cmd.brute_cap)? {
            Some(alloc) => (true, 0, 0, Some(alloc)),
            None => (false, 0, 0, None),
        },
    };
    println!("solved: {solved}");
    println!("steps: {steps}");
    println!("restarts: {restarts}");
    if let Some(alloc) = &alloc {
        println!("violations: {}", count_violations(&inst, alloc)?.total());
        if let Some(path) = &cmd.out {
            write_allocation(path, alloc, &inst)
                .with_context(|| format!("writing {}", path.display()))?;
        }
    } else if cmd.out.is_some() {
        bail!("no EFX allocation exists to write");
    }
    Ok(if solved { 0 } else { 1 })
}

/// Prints the violation count, every envious pair, and every violating
/// triple, all 1-based like the file format.
fn run_verify(cmd: VerifyCmd) -> Result<u8> {
    let inst = load_instance(&cmd.instance)?;
    let alloc = read_allocation(&cmd.allocation, &inst)
        .with_context(|| format!("reading {}", cmd.allocation.display()))?;
    let counts = count_violations(&inst, &alloc)?;
    println!("violations: {}", counts.total());
    let n = inst.num_agents();
    for viewer in 0..n {
        for holder in 0..n {
            if viewer == holder {
                continue;
            }
            let count = counts.per_pair(viewer, holder);
            if count > 0 {
                println!("pair viewer={} holder={} count={}", viewer + 1, holder + 1, count);
            }
        }
    }
    for (viewer, holder, good) in violating_triples(&inst, &alloc)? {
        println!("triple viewer={} holder={} good={}", viewer + 1, holder + 1, good + 1);
    }
    Ok(if counts.total() == 0 { 0 } else { 1 })
}

fn run_bench(cmd: BenchCmd) -> Result<u8> {
    let config = ExperimentConfig {
        gen: cmd.gen.to_spec(cmd.seed),
        solver: cmd.solver.into(),
        params: cmd.anneal.to_params(cmd.seed),
        trials: cmd.trials,
        workers: effective_workers(cmd.workers)?,
        warm_start: cmd.warm_start,
        brute_cap: cmd.brute_cap,
        zero_elapsed: cmd.zero_elapsed,
        output_path: cmd.output_path,
    };
    let (summary, records) = run_experiment(&config)?;
    if let Some(path) = &cmd.csv {
        fs::write(path, records_to_csv(&records))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    let doc = serde_json::to_string_pretty(&summary)?;
    if let Some(path) = &cmd.summary {
        fs::write(path, doc.clone() + "\n").with_context(|| format!("writing {}", path.display()))?;
    }
    println!("{doc}");
    Ok(if summary.success_rate == 1.0 { 0 } else { 1 })
}

fn run_brute(cmd: BruteCmd) -> Result<u8> {
    let inst = load_instance(&cmd.instance)?;
    match brute_force_efx(&inst, cmd.cap)? {
        Some(alloc) => {
            let owners: Vec<usize> = alloc.owners().iter().map(|&a| a + 1).collect();
            println!("efx: found");
            println!("owner: {owners:?}");
            if let Some(path) = &cmd.out {
                write_allocation(path, &alloc, &inst)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            Ok(0)
        }
        None => {
            println!("efx: none");
            Ok(1)
        }
    }
}
