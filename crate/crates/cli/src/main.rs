//! `dss`: homogeneous cost sweeps, one-shot store selection, and
//! trace-driven cache simulations.
//!
//! Exit status: 0 on success, 1 for usage errors, 2 for bad input data,
//! 3 for internal failures.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use dss_core::context_file::load_context;
use dss_core::format::sig6;
use dss_core::homogeneous::{hit_grid, homogeneous_sweep, sweep_csv};
use dss_core::sim::{
    metrics_csv, run_cell, run_with, SimConfig, SimMetrics, SimStrategy, TraceSource, Workload,
    ZipfTrace,
};
use dss_core::strategies::EXHAUSTIVE_LIMIT;
use dss_core::{DssError, SelectionContext, Strategy};

#[derive(Parser)]
#[command(
    name = "dss",
    version,
    about = "Data store selection under false-positive indicators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form expected costs of the homogeneous system over hit ratios.
    Analyze(AnalyzeArgs),
    /// Runs every strategy on one selection context.
    Select(SelectArgs),
    /// Simulates one strategy over a trace.
    Simulate(SimulateArgs),
    /// Simulates a grid of strategies, penalties, placements, and seeds.
    Bench(BenchArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Number of stores.
    #[arg(long, default_value_t = 20)]
    n: usize,
    #[arg(long, default_value_t = 0.02)]
    fpr: f64,
    /// Miss penalty.
    #[arg(long, default_value_t = 100.0)]
    beta: f64,
    #[arg(long, default_value_t = 0.05)]
    hit_step: f64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SelectArgs {
    /// TOML file with `beta` and `[[stores]]` tables (`id`, `cost`, `rho`).
    #[arg(long)]
    context: PathBuf,
    /// Overrides the file's miss penalty.
    #[arg(long)]
    beta: Option<f64>,
}

#[derive(Args)]
struct WorkloadArgs {
    /// Topology TOML; the bundled 19-node synthetic topology when omitted.
    #[arg(long)]
    topology: Option<PathBuf>,
    /// One request token per line; a synthetic Zipf trace when omitted.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    store_size: usize,
    #[arg(long, default_value_t = 0.02)]
    target_fpr: f64,
    /// Weight of hop count against inverse bandwidth in access costs.
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// Bandwidth scale; the widest pairwise bottleneck when omitted.
    #[arg(long)]
    big_t: Option<f64>,
    /// Synthetic trace length.
    #[arg(long, default_value_t = ZipfTrace::default().requests)]
    requests: usize,
    /// Synthetic trace item universe.
    #[arg(long, default_value_t = ZipfTrace::default().items)]
    items: u64,
    /// Synthetic trace Zipf exponent.
    #[arg(long, default_value_t = ZipfTrace::default().skew)]
    zipf: f64,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl WorkloadArgs {
    fn config(&self, strategy: SimStrategy, beta: f64, k: usize, seed: u64) -> SimConfig {
        let trace = match &self.trace {
            Some(path) => TraceSource::File(path.clone()),
            None => TraceSource::Zipf(ZipfTrace {
                requests: self.requests,
                items: self.items,
                skew: self.zipf,
            }),
        };
        SimConfig {
            strategy,
            miss_penalty: beta,
            locations_per_item: k,
            store_capacity: self.store_size,
            target_fpr: self.target_fpr,
            alpha: self.alpha,
            big_t: self.big_t,
            seed,
            topology: self.topology.clone(),
            trace,
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    workload: WorkloadArgs,
    #[arg(long, default_value = "cpi")]
    strategy: String,
    #[arg(long, default_value_t = 100.0)]
    beta: f64,
    /// Stores each item may be placed in.
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    workload: WorkloadArgs,
    #[arg(long, value_delimiter = ',', default_value = "100,1000")]
    betas: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "1,5")]
    ks: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "pi,cpi,epi,umb,pot,pgm")]
    strategies: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    seeds: Vec<u64>,
    /// Markdown summary; `<out>.md` when `--out` is set, stderr otherwise.
    #[arg(long)]
    summary: Option<PathBuf>,
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), DssError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| DssError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| DssError::Io {
                    path: "<stdout>".into(),
                    message: e.to_string(),
                })
        }
    }
}

fn analyze(args: &AnalyzeArgs) -> Result<(), DssError> {
    let grid = hit_grid(args.hit_step)?;
    let rows = homogeneous_sweep(args.n, args.fpr, args.beta, &grid)?;
    write_output(args.out.as_deref(), &sweep_csv(&rows))
}

fn id_list(ids: &[usize]) -> String {
    if ids.is_empty() {
        return "∅".into();
    }
    let parts: Vec<String> = ids.iter().map(|i| i.to_string()).collect();
    format!("{{{}}}", parts.join(","))
}

fn selection_report(ctx: &SelectionContext) -> String {
    let mut out = String::new();
    for s in Strategy::ALL {
        let line = match s.select(ctx) {
            Ok(ids) => {
                let cost = ctx.evaluate(&ids);
                format!(
                    "{} access={} phi={}",
                    id_list(&ids),
                    sig6(cost.access_cost),
                    sig6(cost.total)
                )
            }
            Err(DssError::TooManyCandidates(n)) => {
                format!("skipped: {n} candidates exceed {EXHAUSTIVE_LIMIT}")
            }
            Err(e) => format!("skipped: {e}"),
        };
        writeln!(out, "{:<4} {line}", s.name()).unwrap();
    }
    out
}

fn select(args: &SelectArgs) -> Result<(), DssError> {
    let ctx = load_context(&args.context, args.beta)?;
    write_output(None, &selection_report(&ctx))
}

fn simulate(args: &SimulateArgs) -> Result<(), DssError> {
    let strategy: SimStrategy = args.strategy.parse()?;
    let config = args.workload.config(strategy, args.beta, args.k, args.seed);
    let metrics = run_with(&config, &Workload::load(&config)?)?;
    write_output(args.workload.out.as_deref(), &metrics_csv(&[metrics]))
}

fn markdown_summary(rows: &[SimMetrics], strategies: &[SimStrategy]) -> String {
    let mut out = String::from("| beta | k | seed |");
    for s in strategies {
        write!(out, " {s} |").unwrap();
    }
    out.push_str("\n|---|---|---|");
    out.push_str(&"---|".repeat(strategies.len()));
    out.push('\n');
    for cell in rows.chunks(strategies.len()) {
        let head = &cell[0];
        write!(
            out,
            "| {} | {} | {} |",
            sig6(head.miss_penalty),
            head.locations_per_item,
            head.seed
        )
        .unwrap();
        for m in cell {
            write!(out, " {} ({}) |", sig6(m.tc_norm), sig6(m.ac_norm)).unwrap();
        }
        out.push('\n');
    }
    out.push_str(
        "\nEach entry is normalized total cost, with normalized access cost in parentheses.\n",
    );
    out
}

fn bench(args: &BenchArgs) -> Result<(), DssError> {
    if args.betas.is_empty()
        || args.ks.is_empty()
        || args.seeds.is_empty()
        || args.strategies.is_empty()
    {
        return Err(DssError::Config("bench grid is empty".into()));
    }
    let strategies = args
        .strategies
        .iter()
        .map(|s| s.parse())
        .collect::<Result<Vec<SimStrategy>, _>>()?;

    let first = args
        .workload
        .config(SimStrategy::Pi, args.betas[0], args.ks[0], args.seeds[0]);
    let topology = first.load_topology()?;
    let workloads = args
        .seeds
        .iter()
        .map(|&seed| {
            let trace = args
                .workload
                .config(SimStrategy::Pi, 1.0, 1, seed)
                .trace
                .materialize(seed)?;
            Ok(Workload {
                topology: topology.clone(),
                trace,
            })
        })
        .collect::<Result<Vec<_>, DssError>>()?;

    let mut cells = Vec::new();
    for &beta in &args.betas {
        for &k in &args.ks {
            for (i, &seed) in args.seeds.iter().enumerate() {
                cells.push((args.workload.config(SimStrategy::Pi, beta, k, seed), i));
            }
        }
    }
    let results: Vec<Result<Vec<SimMetrics>, DssError>> = cells
        .par_iter()
        .map(|(config, i)| run_cell(config, &strategies, &workloads[*i]))
        .collect();
    let mut rows = Vec::with_capacity(cells.len() * strategies.len());
    for r in results {
        rows.extend(r?);
    }

    let out = args.workload.out.as_deref();
    write_output(out, &metrics_csv(&rows))?;
    let summary = markdown_summary(&rows, &strategies);
    let summary_path = args
        .summary
        .clone()
        .or_else(|| out.map(|p| p.with_extension("md")));
    match summary_path {
        Some(path) => write_output(Some(&path), &summary),
        None => {
            eprint!("{summary}");
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Result<(), DssError> {
    match &cli.command {
        Command::Analyze(a) => analyze(a),
        Command::Select(a) => select(a),
        Command::Simulate(a) => simulate(a),
        Command::Bench(a) => bench(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match std::panic::catch_unwind(|| run(&cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(_) => {
            eprintln!("error: internal failure");
            ExitCode::from(3)
        }
    }
}
