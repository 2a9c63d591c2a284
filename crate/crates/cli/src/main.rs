use std::fs;
use std::io::{self, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use minorfind::engine::{
    compute_params_with, find_minor, verify_witness, MinorWitness, Mode, Outcome, Overrides, RunOptions,
};
use minorfind::generators::{Family, GenSpec};
use minorfind::harness::{self, ExperimentConfig, Format as TableFormat, ENGINE_STREAM};
use minorfind::spectral::{analyze, gate_theorem_hypotheses, DEFAULT_TOL};
use minorfind::walks::{covering_set, default_covering_constant, default_retries, run_walk, Start};
use minorfind::{Graph, RngStream, VertexSet};

#[derive(Parser)]
#[command(name = "minorfind", version, about = "Find large complete minors in expanding graphs")]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Worker threads for experiment sweeps (defaults to the available cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a graph and print it as an edge list.
    Gen(GenArgs),
    /// Expansion metrics and the hypothesis gate.
    Analyze(AnalyzeArgs),
    /// Lazy random walk, or a covering set with --targets.
    Walk(WalkArgs),
    /// Run the minor engine.
    FindMinor(FindArgs),
    /// Check a witness against a graph; exits 0 iff valid.
    Verify(VerifyArgs),
    /// Run a configured sweep.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    family: Family,
    #[arg(long, default_value_t = 0)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    d: usize,
    #[arg(long, default_value_t = 0.0)]
    p: f64,
    /// Small side of complete-bipartite.
    #[arg(long, default_value_t = 0)]
    a: usize,
    /// Large side of complete-bipartite.
    #[arg(long, default_value_t = 0)]
    b: usize,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Edge-list file, or `-` for stdin.
    graph: PathBuf,
    /// Size bound for the restricted constant; defaults to n/2.
    #[arg(long)]
    k: Option<usize>,
    /// Also report which route certifies the engine hypotheses at this eps.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
}

#[derive(Args)]
struct WalkArgs {
    /// Edge-list file, or `-` for stdin.
    graph: PathBuf,
    #[arg(long, default_value_t = 100)]
    steps: usize,
    /// Start vertex; defaults to a stationary draw.
    #[arg(long)]
    start: Option<usize>,
    /// JSON list of target vertex lists; builds a covering set instead of a plain walk.
    #[arg(long)]
    targets: Option<PathBuf>,
    /// Stated minimum target size (defaults to the smallest target).
    #[arg(long)]
    s: Option<usize>,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
}

#[derive(Args)]
struct FindArgs {
    /// Edge-list file, or `-` for stdin.
    graph: PathBuf,
    #[arg(long, default_value_t = 0.3)]
    eps: f64,
    #[arg(long, default_value = "constd")]
    mode: Mode,
    /// Degree bound; defaults to the maximum degree (at least 3).
    #[arg(long)]
    d: Option<usize>,
    /// Iteration cap; defaults to 2n.
    #[arg(long)]
    max_iter: Option<usize>,
    /// Include every rule application in the output.
    #[arg(long)]
    emit_history: bool,
    /// Write the witness JSON here.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Branch-set size scale.
    #[arg(long)]
    t: Option<usize>,
    /// Target order.
    #[arg(long)]
    r: Option<usize>,
    /// Covering-set size constant.
    #[arg(long = "cover-k")]
    k: Option<f64>,
    /// Retry coefficient: ceil(C ln n) covering attempts.
    #[arg(long = "retry-c")]
    c: Option<f64>,
    /// Cap on covering-walk length.
    #[arg(long)]
    walk_cap: Option<usize>,
    /// Expansion assumed by the covering walk.
    #[arg(long)]
    cover_eps: Option<f64>,
}

#[derive(Args)]
struct VerifyArgs {
    graph: PathBuf,
    /// Witness JSON file.
    witness: PathBuf,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Config file.
    #[arg(env = "MINORFIND_CONFIG")]
    config: PathBuf,
    /// Keep rows already in the CSV output and run only the missing cells.
    #[arg(long)]
    resume: bool,
    /// Override the CSV output path.
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        // output closed early, e.g. piped into `head`
        Err(e) if e.downcast_ref::<io::Error>().is_some_and(|e| e.kind() == io::ErrorKind::BrokenPipe) => {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    let out = &mut io::stdout().lock();
    match cli.command {
        Command::Gen(a) => {
            let spec = GenSpec { family: a.family, n: a.n, d: a.d, p: a.p, a: a.a, b: a.b, seed: cli.seed };
            let g = spec.generate()?;
            match a.output {
                Some(path) => {
                    fs::write(&path, g.to_edge_list()).with_context(|| format!("writing {}", path.display()))?
                }
                None => out.write_all(g.to_edge_list().as_bytes())?,
            }
            Ok(0)
        }
        Command::Analyze(a) => {
            let g = read_graph(&a.graph)?;
            let report = analyze(&g, a.k, a.tol)?;
            let gate = a.eps.map(|eps| gate_theorem_hypotheses(&g, eps));
            if cli.format == Format::Json {
                let v = serde_json::json!({ "metrics": report, "gate": gate });
                writeln!(out, "{}", serde_json::to_string_pretty(&v)?)?;
            } else {
                writeln!(
                    out,
                    "n = {}, m = {}, degrees {}..{}, connected = {}",
                    report.n, report.m, report.min_degree, report.max_degree, report.connected
                )?;
                let line = |name: &str, m: &minorfind::spectral::Metric| {
                    format!("{name:<12} {:.6}  ({:?})", m.value, m.method)
                };
                writeln!(out, "{}", line("h", &report.h))?;
                writeln!(out, "{}", line(&format!("h_{}", report.k), &report.h_k))?;
                writeln!(out, "{}", line("h'", &report.h_prime))?;
                writeln!(out, "{}", line("phi", &report.phi))?;
                writeln!(out, "{}  residual {:.1e}", line("lambda", &report.lambda_norm), report.lambda_residual)?;
                if let Some(r) = report.sweep_ratio {
                    writeln!(out, "{:<12} {r:.6}", "sweep ratio")?;
                }
                if let Some(m) = &report.lambda2_adj {
                    writeln!(out, "{}", line("lambda2(A)", m))?;
                }
                if let Some(gate) = gate {
                    writeln!(out, "gate at eps = {}: route {}", gate.eps, gate.route.name())?;
                }
            }
            Ok(0)
        }
        Command::Walk(a) => walk(&a, cli.seed, cli.format, out),
        Command::FindMinor(a) => find(&a, cli.seed, cli.format, out),
        Command::Verify(a) => {
            let g = read_graph(&a.graph)?;
            let text = fs::read_to_string(&a.witness).with_context(|| format!("reading {}", a.witness.display()))?;
            let w = MinorWitness::from_json(&text).context("parsing witness")?;
            let report = verify_witness(&g, &w);
            if cli.format == Format::Json {
                writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
            } else if let Some(v) = &report.violation {
                writeln!(out, "invalid: {v}")?;
            } else {
                writeln!(out, "valid: order {}", report.order)?;
            }
            Ok(if report.valid { 0 } else { 2 })
        }
        Command::Experiment(a) => {
            let mut cfg = ExperimentConfig::load(&a.config)?;
            if let Some(csv) = a.csv {
                cfg.output.csv = Some(csv);
            }
            let jobs = cli.jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let rows = harness::run_experiment(&cfg, jobs, a.resume)?;
            let table = match cli.format {
                Format::Json => harness::emit(&rows, TableFormat::Json)?,
                _ => harness::emit(&rows, TableFormat::Csv)?,
            };
            out.write_all(table.as_bytes())?;
            Ok(harness::exit_code(&rows) as u8)
        }
    }
}

fn read_graph(path: &Path) -> Result<Graph> {
    let g = if path == Path::new("-") {
        let mut text = String::new();
        io::stdin().read_to_string(&mut text)?;
        Graph::parse_edge_list(&text)?
    } else {
        let f = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
        Graph::read_edge_list(BufReader::new(f)).with_context(|| format!("reading {}", path.display()))?
    };
    Ok(g)
}

fn walk(a: &WalkArgs, seed: u64, format: Format, out: &mut impl Write) -> Result<u8> {
    let g = read_graph(&a.graph)?;
    let mut rng = RngStream::new(seed, ENGINE_STREAM);
    if let Some(path) = &a.targets {
        let lists: Vec<Vec<usize>> = serde_json::from_str(&fs::read_to_string(path)?).context("parsing targets")?;
        let targets = lists.into_iter().map(|l| VertexSet::new(g.n(), l)).collect::<Result<Vec<_>, _>>()?;
        let s = a.s.unwrap_or_else(|| targets.iter().map(VertexSet::len).min().unwrap_or(1)).max(1);
        let c = covering_set(&g, &targets, s, a.eps, default_covering_constant(a.eps), default_retries(g.n()), &rng)?;
        if format == Format::Json {
            writeln!(out, "{}", serde_json::to_string_pretty(&c)?)?;
        } else {
            writeln!(
                out,
                "covering set of {} vertices (bound {:.1}, attempt {}): {:?}",
                c.set.len(),
                c.bound,
                c.attempts,
                c.set.as_slice()
            )?;
        }
        return Ok(0);
    }
    let start = a.start.map_or(Start::Stationary, Start::Vertex);
    let trace = run_walk(&g, a.steps, &mut rng, start)?;
    if format == Format::Json {
        writeln!(out, "{}", serde_json::to_string_pretty(&trace)?)?;
    } else {
        writeln!(out, "{} steps, {} distinct vertices", a.steps, trace.visited.len())?;
        let line: Vec<String> = trace.vertices.iter().map(usize::to_string).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    Ok(0)
}

fn find(a: &FindArgs, seed: u64, format: Format, out: &mut impl Write) -> Result<u8> {
    let g = read_graph(&a.graph)?;
    let d = a.d.unwrap_or_else(|| g.max_degree().max(3));
    let ov = Overrides { k: a.k, c: a.c, t: a.t, r: a.r, walk_cap: a.walk_cap, cover_eps: a.cover_eps };
    let params = compute_params_with(g.n(), d, a.eps, a.mode, &ov)?;
    let opts = RunOptions { max_iterations: a.max_iter, ..RunOptions::default() };
    let report = find_minor(&g, &params, &RngStream::new(seed, ENGINE_STREAM), opts)?;
    if report.outcome != Outcome::Success && report.witness.is_none() && format != Format::Json {
        writeln!(out, "{:?}: {}", report.outcome, report.reason.as_deref().unwrap_or(""))?;
    }
    if let (Some(path), Some(w)) = (&a.output, &report.witness) {
        if report.outcome == Outcome::Success {
            fs::write(path, w.to_json()).with_context(|| format!("writing {}", path.display()))?;
        }
    }
    if format == Format::Json {
        let mut v = serde_json::to_value(&report)?;
        if !a.emit_history {
            v.as_object_mut().expect("object").remove("history");
        }
        writeln!(out, "{}", serde_json::to_string_pretty(&v)?)?;
    } else {
        writeln!(
            out,
            "{}: order {} of target {} after {} iterations (t = {}, mode {})",
            match report.outcome {
                Outcome::Success => "success",
                Outcome::Failure => "failure",
                Outcome::Timeout => "timeout",
            },
            report.achieved_order,
            report.target_order,
            report.iterations,
            params.t,
            params.mode
        )?;
        if let Some(reason) = &report.reason {
            writeln!(out, "reason: {reason}")?;
        }
        if report.outcome == Outcome::Success {
            if let Some(w) = &report.witness {
                writeln!(out, "{}", w.to_json())?;
            }
        }
        if a.emit_history {
            for h in &report.history {
                writeln!(out, "{}", serde_json::to_string(h)?)?;
            }
        }
    }
    Ok(if report.outcome == Outcome::Success { 0 } else { 2 })
}
