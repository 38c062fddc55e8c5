//! elimq command line: corpus generation, offline training, solving and
//! benchmarking. Batch-oriented; all primary outputs are JSON/CSV and
//! byte-deterministic for a fixed seed in sequential mode.

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use elimq::driver::{
    generate_corpus, run_solver, CorpusOptions, DriverError, FamilySpec, OrderingStrategy,
    SchedulingStrategy, SolverStrategies,
};
use elimq::ordering::OrderingAction;
use elimq::pivoting::{PivotAction, PivotError, PivotStrategy};
use elimq::qlearn::{
    load_qtable, save_qtable, train_offline, Domain, Environment, OrderingEnv, PivotingEnv,
    Policy, SchedulingEnv, TrainConfig,
};
use elimq::scheduling::{MachineModel, RewardWeights, SchedulerAction};
use elimq::sparse::{load_matrix_market, write_matrix_market, Permutation, SparseMatrix};

use config::ConfigFile;

/// Exit code for usage or input errors.
const EXIT_USAGE: u8 = 2;
/// Exit code for numeric failures.
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser)]
#[command(name = "elimq", about = "Sparse elimination lab with Q-learned strategies")]
struct Cli {
    /// Flat key=value config file; command-line flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a Matrix Market corpus plus manifest.
    Gen(GenArgs),
    /// Train a Q-table offline on a corpus.
    Train(TrainArgs),
    /// Solve one matrix, emitting a JSON report.
    Solve(SolveArgs),
    /// Compare strategies across a corpus, emitting CSV.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Comma-separated family descriptors, e.g. path:5,grid2d:3x3,random:10:0.3
    #[arg(long)]
    families: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for .mtx files and manifest.json.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Disable diagonal dominance of generated values.
    #[arg(long)]
    non_dominant: bool,
}

#[derive(Args)]
struct TrainArgs {
    /// Decision domain: ordering | pivoting | scheduling
    #[arg(long)]
    domain: Option<String>,
    /// Directory of .mtx files.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Q-table output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Training-curve CSV output path.
    #[arg(long)]
    curve: Option<PathBuf>,
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    epsilon_start: Option<f64>,
    #[arg(long)]
    epsilon_end: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Reward weights a,b,g,d (scheduling domain).
    #[arg(long)]
    weights: Option<String>,
    /// Worker count for the scheduling machine model.
    #[arg(long)]
    workers: Option<usize>,
    /// Cross-worker communication cost.
    #[arg(long)]
    comm: Option<f64>,
}

#[derive(Args)]
struct SolveArgs {
    /// Input matrix (.mtx).
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Fixed ordering action (MD|AMD|MMDF|MIND|MMF) or `natural`.
    #[arg(long)]
    order: Option<String>,
    /// Fixed pivot action (PP|RP|CP|SKIP).
    #[arg(long)]
    pivot: Option<String>,
    /// Fixed dispatch heuristic (TIME|MEM|BALANCE|LOCALITY).
    #[arg(long)]
    sched: Option<String>,
    /// Learned ordering policy.
    #[arg(long)]
    qtable_ordering: Option<PathBuf>,
    /// Learned pivoting policy.
    #[arg(long)]
    qtable_pivoting: Option<PathBuf>,
    /// Learned scheduling policy.
    #[arg(long)]
    qtable_scheduling: Option<PathBuf>,
    /// Report path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    weights: Option<String>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    comm: Option<f64>,
    /// Include wall-clock timing in the report (breaks byte determinism).
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory of .mtx files.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Comma-separated fixed ordering actions to compare.
    #[arg(long)]
    orderings: Option<String>,
    /// Learned ordering policy, benched as strategy `learned`.
    #[arg(long)]
    qtable_ordering: Option<PathBuf>,
    /// Fixed pivot action used for every strategy.
    #[arg(long)]
    pivot: Option<String>,
    /// Fixed dispatch heuristic used for every strategy.
    #[arg(long)]
    sched: Option<String>,
    /// CSV output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    weights: Option<String>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    comm: Option<f64>,
    /// Parallelism across corpus members (within-member work stays
    /// sequential).
    #[arg(long)]
    jobs: Option<usize>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("ELIMQ_LOG")).init();
    let cli = Cli::parse();
    let cfg = match cli.config.as_deref().map(ConfigFile::load).transpose() {
        Ok(c) => c.unwrap_or_default(),
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let result = match cli.command {
        Command::Gen(args) => cmd_gen(args, &cfg),
        Command::Train(args) => cmd_train(args, &cfg),
        Command::Solve(args) => cmd_solve(args, &cfg),
        Command::Bench(args) => cmd_bench(args, &cfg),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let numeric = e.chain().any(|cause| {
                cause.downcast_ref::<PivotError>().is_some()
                    || matches!(
                        cause.downcast_ref::<DriverError>(),
                        Some(DriverError::Pivot(_))
                    )
            });
            ExitCode::from(if numeric { EXIT_NUMERIC } else { EXIT_USAGE })
        }
    }
}

fn parse_weights(text: &str) -> Result<RewardWeights> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .with_context(|| format!("bad weights '{text}'"))?;
    if parts.len() != 4 {
        bail!("weights must be four comma-separated numbers, got '{text}'");
    }
    RewardWeights::new(parts[0], parts[1], parts[2], parts[3])
        .map_err(|e| anyhow!("invalid weights: {e}"))
}

fn machine_from(workers: usize, comm: f64) -> MachineModel {
    MachineModel::uniform(workers, 1.0, comm)
}

fn load_matrix_file(path: &Path) -> Result<SparseMatrix<f64>> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read matrix file {}", path.display()))?;
    load_matrix_market(&text).with_context(|| format!("cannot parse {}", path.display()))
}

fn load_corpus_dir(dir: &Path) -> Result<Vec<(String, SparseMatrix<f64>)>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("cannot read corpus directory {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "mtx"))
        .collect();
    files.sort();
    if files.is_empty() {
        bail!("no .mtx files in {}", dir.display());
    }
    files
        .into_iter()
        .map(|p| {
            let id = p.file_stem().unwrap().to_string_lossy().into_owned();
            Ok((id, load_matrix_file(&p)?))
        })
        .collect()
}

fn load_policy(path: &Path, expected: Domain) -> Result<Policy> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read Q-table {}", path.display()))?;
    let table = load_qtable(&text)?;
    if table.domain() != expected {
        bail!(
            "Q-table {} is for domain {}, expected {}",
            path.display(),
            table.domain().name(),
            expected.name()
        );
    }
    Ok(Policy::greedy(table, 0))
}

// ---------------------------------------------------------------------------

fn cmd_gen(args: GenArgs, cfg: &ConfigFile) -> Result<()> {
    let families = cfg
        .resolve("families", args.families)?
        .ok_or_else(|| anyhow!("--families is required"))?;
    let seed = cfg.resolve("seed", args.seed)?.unwrap_or(0);
    let out: PathBuf = cfg
        .resolve("out", args.out)?
        .ok_or_else(|| anyhow!("--out is required"))?;
    let specs: Vec<FamilySpec> = families
        .split(',')
        .map(|f| FamilySpec::parse(f.trim()).map_err(|e| anyhow!("{e}")))
        .collect::<Result<_>>()?;
    let opts = CorpusOptions { diagonally_dominant: !args.non_dominant };
    let corpus = generate_corpus(&specs, seed, &opts);
    fs::create_dir_all(&out)?;
    let mut manifest = Vec::new();
    for member in &corpus {
        let file = format!("{}.mtx", member.id);
        fs::write(out.join(&file), write_matrix_market(&member.matrix))?;
        manifest.push(serde_json::json!({
            "id": member.id,
            "file": file,
            "n": member.matrix.n(),
            "nnz": member.matrix.nnz(),
        }));
    }
    let manifest = serde_json::json!({ "seed": seed, "matrices": manifest });
    fs::write(out.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    log::info!("wrote {} matrices to {}", corpus.len(), out.display());
    Ok(())
}

fn build_envs(
    domain: Domain,
    corpus: &[(String, SparseMatrix<f64>)],
    machine: &MachineModel,
    weights: &RewardWeights,
) -> Result<Vec<Box<dyn Environment>>> {
    let mut envs: Vec<Box<dyn Environment>> = Vec::with_capacity(corpus.len());
    for (_, m) in corpus {
        match domain {
            Domain::Ordering => envs.push(Box::new(OrderingEnv::new(m.pattern().clone()))),
            Domain::Pivoting => envs.push(Box::new(PivotingEnv::new(m.clone()))),
            Domain::Scheduling => {
                let perm = elimq::ordering::greedy_order(m.pattern(), OrderingAction::Md).perm;
                let dag = elimq::scheduling::dag_from_etree(m.pattern(), &perm)?;
                envs.push(Box::new(SchedulingEnv::new(dag, machine.clone(), *weights)?));
            }
        }
    }
    Ok(envs)
}

fn cmd_train(args: TrainArgs, cfg: &ConfigFile) -> Result<()> {
    let domain_name: String = cfg
        .resolve("domain", args.domain)?
        .ok_or_else(|| anyhow!("--domain is required"))?;
    let domain = Domain::from_name(&domain_name)
        .ok_or_else(|| anyhow!("unknown domain '{domain_name}'"))?;
    let corpus_dir: PathBuf = cfg
        .resolve("corpus", args.corpus)?
        .ok_or_else(|| anyhow!("--corpus is required"))?;
    let out: PathBuf = cfg
        .resolve("out", args.out)?
        .ok_or_else(|| anyhow!("--out is required"))?;
    let default_gamma = match domain {
        Domain::Ordering | Domain::Pivoting => 1.0,
        Domain::Scheduling => 0.99,
    };
    let defaults = TrainConfig::default();
    let train_cfg = TrainConfig {
        alpha: cfg.resolve("alpha", args.alpha)?.unwrap_or(defaults.alpha),
        gamma: cfg.resolve("gamma", args.gamma)?.unwrap_or(default_gamma),
        epsilon_start: cfg
            .resolve("epsilon_start", args.epsilon_start)?
            .unwrap_or(defaults.epsilon_start),
        epsilon_end: cfg
            .resolve("epsilon_end", args.epsilon_end)?
            .unwrap_or(defaults.epsilon_end),
        episodes: cfg.resolve("episodes", args.episodes)?.unwrap_or(defaults.episodes),
        seed: cfg.resolve("seed", args.seed)?.unwrap_or(0),
    };
    let weights = match cfg.resolve("weights", args.weights)? {
        Some(w) => parse_weights(&w)?,
        None => RewardWeights::makespan_only(),
    };
    let machine = machine_from(
        cfg.resolve("workers", args.workers)?.unwrap_or(2),
        cfg.resolve("comm", args.comm)?.unwrap_or(0.0),
    );

    let corpus = load_corpus_dir(&corpus_dir)?;
    let mut envs = build_envs(domain, &corpus, &machine, &weights)?;
    let (table, curve) = train_offline(&mut envs, domain, &train_cfg)?;
    fs::write(&out, save_qtable(&table))?;
    if let Some(curve_path) = cfg.resolve("curve", args.curve)? {
        let mut csv = String::from("episode,return\n");
        for (ep, ret) in curve.iter().enumerate() {
            csv.push_str(&format!("{ep},{ret}\n"));
        }
        fs::write(&curve_path, csv)?;
    }
    log::info!("trained {} entries for domain {}", table.len(), domain.name());
    Ok(())
}

fn cmd_solve(args: SolveArgs, cfg: &ConfigFile) -> Result<()> {
    let matrix_path: PathBuf = cfg
        .resolve("matrix", args.matrix)?
        .ok_or_else(|| anyhow!("--matrix is required"))?;
    let m = load_matrix_file(&matrix_path)?;
    let seed = cfg.resolve("seed", args.seed)?.unwrap_or(0);
    let weights = match cfg.resolve("weights", args.weights)? {
        Some(w) => parse_weights(&w)?,
        None => RewardWeights::makespan_only(),
    };
    let machine = machine_from(
        cfg.resolve("workers", args.workers)?.unwrap_or(2),
        cfg.resolve("comm", args.comm)?.unwrap_or(0.0),
    );

    let ordering_policy = args
        .qtable_ordering
        .as_deref()
        .map(|p| load_policy(p, Domain::Ordering))
        .transpose()?;
    let pivot_policy = args
        .qtable_pivoting
        .as_deref()
        .map(|p| load_policy(p, Domain::Pivoting))
        .transpose()?;
    let sched_policy = args
        .qtable_scheduling
        .as_deref()
        .map(|p| load_policy(p, Domain::Scheduling))
        .transpose()?;

    let order_flag = cfg.resolve("order", args.order)?;
    let ordering = match (&ordering_policy, order_flag.as_deref()) {
        (Some(pol), _) => OrderingStrategy::Learned(pol),
        (None, Some(name)) if name.eq_ignore_ascii_case("natural") => {
            OrderingStrategy::Forced(Permutation::identity(m.n()))
        }
        (None, Some(name)) => OrderingStrategy::Fixed(
            OrderingAction::from_name(name)
                .ok_or_else(|| anyhow!("unknown ordering action '{name}'"))?,
        ),
        (None, None) => OrderingStrategy::Fixed(OrderingAction::Md),
    };
    let pivot_flag = cfg.resolve("pivot", args.pivot)?;
    let pivoting = match (&pivot_policy, pivot_flag.as_deref()) {
        (Some(pol), _) => PivotStrategy::Learned(pol),
        (None, Some(name)) => PivotStrategy::Fixed(
            PivotAction::from_name(name).ok_or_else(|| anyhow!("unknown pivot action '{name}'"))?,
        ),
        (None, None) => PivotStrategy::Fixed(PivotAction::Pp),
    };
    let sched_flag = cfg.resolve("sched", args.sched)?;
    let scheduling = match (&sched_policy, sched_flag.as_deref()) {
        (Some(pol), _) => SchedulingStrategy::Learned(pol),
        (None, Some(name)) => SchedulingStrategy::Fixed(
            SchedulerAction::from_name(name)
                .ok_or_else(|| anyhow!("unknown scheduler action '{name}'"))?,
        ),
        (None, None) => SchedulingStrategy::Fixed(SchedulerAction::Time),
    };

    let strategies = SolverStrategies { ordering, pivoting, scheduling };
    let b = m.mul_vec(&vec![1.0; m.n()]);
    let started = std::time::Instant::now();
    let mut run = run_solver(
        &m,
        matrix_path.file_stem().unwrap().to_string_lossy().as_ref(),
        &strategies,
        &machine,
        &weights,
        &b,
        seed,
    )?;
    if args.timing {
        run.timing = Some(started.elapsed().as_secs_f64());
    }
    let report = serde_json::to_string_pretty(&run)?;
    match cfg.resolve("out", args.out)? {
        Some(path) => fs::write(&path, report)?,
        None => println!("{report}"),
    }
    Ok(())
}

struct BenchRow {
    id: String,
    n: usize,
    nnz: usize,
    strategy: String,
    fill: usize,
    rho: f64,
    makespan: f64,
    residual: f64,
}

fn cmd_bench(args: BenchArgs, cfg: &ConfigFile) -> Result<()> {
    let corpus_dir: PathBuf = cfg
        .resolve("corpus", args.corpus)?
        .ok_or_else(|| anyhow!("--corpus is required"))?;
    let corpus = load_corpus_dir(&corpus_dir)?;
    let seed = cfg.resolve("seed", args.seed)?.unwrap_or(0);
    let weights = match cfg.resolve("weights", args.weights)? {
        Some(w) => parse_weights(&w)?,
        None => RewardWeights::makespan_only(),
    };
    let machine = machine_from(
        cfg.resolve("workers", args.workers)?.unwrap_or(2),
        cfg.resolve("comm", args.comm)?.unwrap_or(0.0),
    );
    let pivot = match cfg.resolve("pivot", args.pivot)?.as_deref() {
        Some(name) => PivotAction::from_name(name)
            .ok_or_else(|| anyhow!("unknown pivot action '{name}'"))?,
        None => PivotAction::Pp,
    };
    let sched = match cfg.resolve("sched", args.sched)?.as_deref() {
        Some(name) => SchedulerAction::from_name(name)
            .ok_or_else(|| anyhow!("unknown scheduler action '{name}'"))?,
        None => SchedulerAction::Time,
    };
    let orderings: Vec<OrderingAction> = match cfg.resolve("orderings", args.orderings)? {
        Some(list) => list
            .split(',')
            .map(|s| {
                OrderingAction::from_name(s.trim())
                    .ok_or_else(|| anyhow!("unknown ordering action '{s}'"))
            })
            .collect::<Result<_>>()?,
        None => OrderingAction::ALL.to_vec(),
    };
    let ordering_policy = args
        .qtable_ordering
        .as_deref()
        .map(|p| load_policy(p, Domain::Ordering))
        .transpose()?;

    let jobs = cfg.resolve("jobs", args.jobs)?.unwrap_or(1).max(1);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;

    let bench_one = |(id, m): &(String, SparseMatrix<f64>)| -> Result<Vec<BenchRow>> {
        let mut rows = Vec::new();
        let mut strategies: Vec<(String, OrderingStrategy<'_>)> = orderings
            .iter()
            .map(|&a| (a.name().to_string(), OrderingStrategy::Fixed(a)))
            .collect();
        if let Some(pol) = &ordering_policy {
            strategies.push(("learned".to_string(), OrderingStrategy::Learned(pol)));
        }
        for (name, ordering) in strategies {
            let strategies = SolverStrategies {
                ordering,
                pivoting: PivotStrategy::FixedWithFallback(pivot),
                scheduling: SchedulingStrategy::Fixed(sched),
            };
            let b = m.mul_vec(&vec![1.0; m.n()]);
            let run = run_solver(m, id, &strategies, &machine, &weights, &b, seed)?;
            rows.push(BenchRow {
                id: id.clone(),
                n: m.n(),
                nnz: m.nnz(),
                strategy: name,
                fill: run.ordering.total_fill,
                rho: run.factor.rho().map_err(|e| anyhow!("{e}"))?,
                makespan: run.schedule.metrics.makespan,
                residual: run.residual,
            });
        }
        Ok(rows)
    };

    let results: Vec<Result<Vec<BenchRow>>> = if jobs > 1 {
        pool.install(|| corpus.par_iter().map(bench_one).collect())
    } else {
        corpus.iter().map(bench_one).collect()
    };

    let mut csv = String::from("id,n,nnz,strategy,fill,rho,makespan,residual\n");
    let mut by_strategy: std::collections::BTreeMap<String, (f64, f64, f64, usize)> =
        Default::default();
    for rows in results {
        for r in rows? {
            csv.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.id, r.n, r.nnz, r.strategy, r.fill, r.rho, r.makespan, r.residual
            ));
            let agg = by_strategy.entry(r.strategy).or_insert((0.0, 0.0, 0.0, 0));
            agg.0 += r.fill as f64;
            agg.1 += r.rho;
            agg.2 += r.makespan;
            agg.3 += 1;
        }
    }
    for (strategy, (fill, rho, makespan, count)) in by_strategy {
        let c = count as f64;
        csv.push_str(&format!(
            "aggregate,,,{strategy},{},{},{},\n",
            fill / c,
            rho / c,
            makespan / c
        ));
    }
    match cfg.resolve("out", args.out)? {
        Some(path) => fs::write(&path, csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}
