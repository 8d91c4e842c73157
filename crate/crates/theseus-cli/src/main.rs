mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use theseus::catalog::{self, BUILTIN_NAMES};
use theseus::discovery::srv::srv_benchmark;
use theseus::discovery::{theseus_with_limits, SearchLimits};
use theseus::interface::{
    graph_from_any_json, graph_to_dot, graph_to_json, parse_target, solution_to_json,
    trace_to_jsonl,
};
use theseus::{
    count_rate, ColoredGraph, ConditioningSpec, DetectorModel, Error, L1Norm, Objective,
    PrunePolicy, SearchSpace, Solution, Target,
};

use config::{Overrides, SEED_ENV};

#[derive(Parser)]
#[command(
    name = "theseus",
    version,
    about = "Design photonic experiments as sparse colored graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search for a small graph that produces the target state or gate.
    Discover(DiscoverArgs),
    /// Report fidelity, event probability and count rate of an existing graph.
    Evaluate(EvaluateArgs),
    /// Run a built-in benchmark.
    #[command(subcommand)]
    Benchmark(BenchmarkCommand),
    /// Write a graph as DOT or JSON.
    Export(ExportArgs),
}

#[derive(Subcommand)]
enum BenchmarkCommand {
    /// Try to reach every Schmidt-rank class up to a local dimension.
    Srv(SrvArgs),
}

#[derive(Args)]
struct OptimizerFlags {
    /// L1 regularization strength.
    #[arg(long)]
    alpha: Option<f64>,
    /// Fidelity a solution must reach.
    #[arg(long)]
    flimit: Option<f64>,
    /// Largest allowed weight magnitude.
    #[arg(long)]
    omega_limit: Option<f64>,
    /// Restarts per topology.
    #[arg(long)]
    climit: Option<usize>,
    /// BFGS iterations per restart.
    #[arg(long)]
    max_iterations: Option<usize>,
    /// Seed for restarts and edge selection; falls back to THESEUS_SEED.
    #[arg(long)]
    seed: Option<u64>,
    /// TOML file with optimizer settings.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Edge-removal policy: greedy, uniform, boltzmann or boltzmann:T.
    #[arg(long, default_value = "greedy")]
    policy: PrunePolicy,
}

impl OptimizerFlags {
    fn resolve(&self) -> Result<theseus::OptimizerConfig> {
        let env = std::env::var(SEED_ENV).ok();
        config::resolve(
            self.config.as_deref(),
            env.as_deref(),
            &Overrides {
                alpha: self.alpha,
                f_limit: self.flimit,
                omega_limit: self.omega_limit,
                c_limit: self.climit,
                max_iterations: self.max_iterations,
                seed: self.seed,
            },
        )
    }
}

#[derive(Args)]
struct ConditioningFlags {
    /// Comma-separated herald vertices.
    #[arg(long, value_delimiter = ',')]
    heralds: Vec<usize>,
    /// Herald detector: threshold or nr.
    #[arg(long, default_value = "threshold")]
    detector: DetectorModel,
    /// Truncation order of the pair expansion.
    #[arg(long)]
    max_pairs: Option<usize>,
    /// Also require exactly one photon in every output path.
    #[arg(long)]
    postselect: bool,
}

impl ConditioningFlags {
    fn spec(&self, g: &ColoredGraph) -> Result<ConditioningSpec> {
        let spec = if self.heralds.is_empty() {
            ConditioningSpec::postselected(g)
        } else {
            ConditioningSpec::heralded(g, &self.heralds, self.detector, self.max_pairs)
                .with_postselected_outputs(self.postselect)
        };
        spec.validate(g)?;
        Ok(spec)
    }
}

#[derive(Args)]
struct DiscoverArgs {
    /// Target expression, e.g. "ghz(4,2)" or "|00> - |11>".
    #[arg(long)]
    target: String,
    /// Number of photon paths.
    #[arg(long)]
    vertices: usize,
    /// Modes per output path.
    #[arg(long)]
    dims: usize,
    #[command(flatten)]
    conditioning: ConditioningFlags,
    #[command(flatten)]
    optimizer: OptimizerFlags,
    /// Prune attempts; defaults to five per initial edge.
    #[arg(long)]
    max_steps: Option<usize>,
    /// Directory for solution.json, solution.dot and trace.jsonl.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
#[group(id = "source", required = true, multiple = false)]
struct GraphSource {
    /// Graph or solution JSON file.
    #[arg(long, value_name = "FILE", group = "source")]
    graph: Option<PathBuf>,
    /// Catalog graph: ghz4, ghz63, bell3-heralded or cnot.
    #[arg(long, value_name = "NAME", group = "source")]
    builtin: Option<String>,
}

impl GraphSource {
    fn load(&self) -> Result<ColoredGraph> {
        match (&self.graph, &self.builtin) {
            (Some(path), _) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("cannot read {}", path.display()))?;
                Ok(graph_from_any_json(&text)?)
            }
            (_, Some(name)) => catalog::builtin(name).with_context(|| {
                format!("unknown builtin {name:?}; expected one of {BUILTIN_NAMES:?}")
            }),
            _ => bail!("give --graph or --builtin"),
        }
    }
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    source: GraphSource,
    #[arg(long)]
    target: String,
    #[command(flatten)]
    conditioning: ConditioningFlags,
    /// Pump repetition rate in Hz.
    #[arg(long, default_value_t = 80e6)]
    rep_rate: f64,
}

#[derive(Args)]
struct SrvArgs {
    /// Largest Schmidt rank considered.
    #[arg(long, default_value_t = 5)]
    max_dim: usize,
    /// Wall-clock budget in seconds.
    #[arg(long, default_value_t = 1800)]
    budget: u64,
    #[command(flatten)]
    optimizer: OptimizerFlags,
    /// Write srv.json with every found graph here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Dot,
    Json,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    source: GraphSource,
    #[arg(long, value_enum)]
    format: Format,
    /// Write here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Discover(a) => discover(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Benchmark(BenchmarkCommand::Srv(a)) => benchmark_srv(a),
        Command::Export(a) => export(a),
    }
}

fn discover(a: DiscoverArgs) -> Result<ExitCode> {
    let target = parse_target(&a.target).context("--target")?;
    let cfg = a.optimizer.resolve()?;
    let c = &a.conditioning;
    let space = match &target {
        Target::State(_) => SearchSpace::for_state(
            a.vertices,
            a.dims,
            &c.heralds,
            c.detector,
            c.max_pairs,
            c.postselect,
        )?,
        Target::Gate(g) => SearchSpace::for_gate(
            a.vertices,
            g.input_basis()[0].len(),
            a.dims,
            &c.heralds,
            c.detector,
            c.max_pairs,
        )?,
    };
    let limits = SearchLimits {
        max_steps: a.max_steps,
        deadline: None,
    };
    match theseus_with_limits(&target, &space, &cfg, &a.optimizer.policy, limits) {
        Ok(sol) => {
            write_solution(&a.out, &sol, &a.target)?;
            println!(
                "qualified solution: fidelity {:.6}, {} edges (from {})",
                sol.fidelity,
                sol.graph.edge_count(),
                space.initial.edge_count()
            );
            Ok(ExitCode::SUCCESS)
        }
        Err(Error::SearchFailed(sol)) => {
            write_solution(&a.out, &sol, &a.target)?;
            eprintln!(
                "search failed: no restart on the complete graph reached fidelity {} with \
                 weights within {} (best fidelity {:.6})",
                cfg.f_limit, cfg.omega_limit, sol.fidelity
            );
            Ok(ExitCode::from(1))
        }
        Err(e) => Err(e.into()),
    }
}

fn write_solution(dir: &Path, sol: &Solution, target: &str) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let write = |name: &str, text: String| {
        let p = dir.join(name);
        fs::write(&p, text).with_context(|| format!("cannot write {}", p.display()))
    };
    write("solution.json", solution_to_json(sol, target) + "\n")?;
    write("solution.dot", graph_to_dot(&sol.graph))?;
    write("trace.jsonl", trace_to_jsonl(&sol.trace))
}

fn evaluate(a: EvaluateArgs) -> Result<ExitCode> {
    let g = a.source.load()?;
    let target = parse_target(&a.target).context("--target")?;
    let cond = a.conditioning.spec(&g)?;
    let obj = Objective::new(&g, &target, &cond, 0.0, L1Norm::default())?;
    let x = g.weights_flat();
    let f = obj.fidelity(&x)?;
    let p = obj.event_probability(&x);
    println!("fidelity: {f:.10}");
    println!("event_probability: {p:.6e}");
    println!("count_rate_hz: {:.4}", count_rate(p, a.rep_rate));
    println!("edges: {}", g.edge_count());
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct SrvEntry {
    class: [usize; 3],
    fidelity: f64,
    edge_count: usize,
    graph: serde_json::Value,
}

fn benchmark_srv(a: SrvArgs) -> Result<ExitCode> {
    let cfg = a.optimizer.resolve()?;
    let report = srv_benchmark(
        a.max_dim,
        Duration::from_secs(a.budget),
        &cfg,
        &a.optimizer.policy,
    )?;
    for (class, sol) in &report.found {
        println!(
            "found  {class}  fidelity {:.6}  {} edges",
            sol.fidelity,
            sol.graph.edge_count()
        );
    }
    for (class, measured) in &report.missed {
        match measured {
            Some(m) => println!("missed {class}  best graph has {m}"),
            None => println!("missed {class}"),
        }
    }
    println!(
        "{} of {} classes in {:.1} s",
        report.found.len(),
        report.found.len() + report.missed.len(),
        report.elapsed.as_secs_f64()
    );
    if let Some(dir) = a.out {
        fs::create_dir_all(&dir)?;
        let entries: Vec<SrvEntry> = report
            .found
            .iter()
            .map(|(c, s)| {
                Ok(SrvEntry {
                    class: c.ranks,
                    fidelity: s.fidelity,
                    edge_count: s.graph.edge_count(),
                    graph: serde_json::from_str(&graph_to_json(&s.graph))?,
                })
            })
            .collect::<Result<_>>()?;
        fs::write(
            dir.join("srv.json"),
            serde_json::to_string_pretty(&entries)? + "\n",
        )?;
    }
    Ok(ExitCode::SUCCESS)
}

fn export(a: ExportArgs) -> Result<ExitCode> {
    let g = a.source.load()?;
    let text = match a.format {
        Format::Dot => graph_to_dot(&g),
        Format::Json => graph_to_json(&g) + "\n",
    };
    match a.output {
        Some(p) => fs::write(&p, text).with_context(|| format!("cannot write {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}
