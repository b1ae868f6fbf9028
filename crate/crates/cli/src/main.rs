use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ocd_core::benchmark::{
    cover_modularity, planted_overlap_graph, sweep, write_lfr_communities, write_lfr_network, PlantedParams,
    SweepSpec,
};
use ocd_core::metrics::MetricRow;
use ocd_core::overlap::{detect, Algorithm};
use ocd_core::walks::{diplacian_embedding, stationary_with, walktrap_embedding};
use ocd_core::{
    load_cover, load_edge_list, onmi, overlap_modularity_avg, overlap_modularity_q0, read_cover, theta_modularity,
    write_cover, ClusteringConfig, Cover, Error, Graph, OverlapParams, StationaryOptions, ThetaVariant,
};
use serde_json::json;

#[derive(Parser)]
#[command(name = "ocd", version, about = "Two-step overlapping community detection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Step one plus one expansion rule; writes the cover.
    Detect(DetectArgs),
    /// Scores a cover against another cover and/or a graph.
    Eval(EvalArgs),
    /// Runs expansion rules over θ grids.
    Sweep(SweepArgs),
    /// Generates a planted-overlap graph and its cover in LFR format.
    Gen(GenArgs),
    /// Writes vertex coordinates as CSV.
    Embed(EmbedArgs),
}

#[derive(Args)]
struct GraphInput {
    /// Edge list path, or `-` for stdin.
    input: PathBuf,
    /// Treat each line as an arc from the first id to the second.
    #[arg(long)]
    directed: bool,
    /// Vertex ids start at 1 (ids below 1 are rejected).
    #[arg(long)]
    one_indexed: bool,
}

impl GraphInput {
    fn load(&self) -> Result<Graph, Failure> {
        Ok(load_edge_list(open(&self.input)?, self.directed, self.one_indexed)?)
    }
}

#[derive(Args)]
struct RuleArgs {
    /// Walk length for the cosine rule.
    #[arg(long, default_value_t = 4)]
    t: usize,
    /// Embedding dimension for di-cosine (default: step-one community count).
    #[arg(long)]
    k: Option<usize>,
    /// Teleportation probability for the stationary distribution (di-paramet-sd).
    #[arg(long)]
    teleport: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CoverFormat {
    Cover,
    Json,
    Csv,
}

#[derive(Args)]
struct DetectArgs {
    #[command(flatten)]
    graph: GraphInput,
    #[arg(long, value_parser = parse_algorithm)]
    algo: Algorithm,
    #[arg(long)]
    theta: f64,
    #[command(flatten)]
    rule: RuleArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = CoverFormat::Cover)]
    format: CoverFormat,
    /// Write every admission test as JSON to this path.
    #[arg(long)]
    decisions: Option<PathBuf>,
    /// Output path (default stdout).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Cover to score (one line per vertex: id followed by community ids).
    cover: PathBuf,
    /// Second cover; reports ONMI.
    #[arg(long)]
    against: Option<PathBuf>,
    /// Graph; reports modularity metrics.
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long)]
    directed: bool,
    #[arg(long)]
    one_indexed: bool,
    /// θ for the θ-modularity rows.
    #[arg(long, default_value_t = 1.0)]
    theta: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Csv,
    Json,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    graph: GraphInput,
    /// Rules to sweep (repeatable; default: every rule matching the graph).
    #[arg(long = "algo", value_parser = parse_algorithm)]
    algos: Vec<Algorithm>,
    /// Ground-truth cover; adds the ONMI column.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Comma-separated θ values replacing the default grid.
    #[arg(long, value_delimiter = ',')]
    grid: Vec<f64>,
    #[command(flatten)]
    rule: RuleArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = ReportFormat::Csv)]
    format: ReportFormat,
    /// Include wall-clock runtimes (output is then not reproducible).
    #[arg(long)]
    timings: bool,
    /// Write per-rule θ series as JSON to this path.
    #[arg(long)]
    plot_data: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    /// Number of planted communities.
    #[arg(long)]
    k: usize,
    /// Overlapping vertices.
    #[arg(long, default_value_t = 0)]
    on: usize,
    /// Memberships per overlapping vertex.
    #[arg(long, default_value_t = 2)]
    om: usize,
    #[arg(long)]
    pin: f64,
    #[arg(long)]
    pout: f64,
    #[arg(long)]
    directed: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for network.dat and community.dat.
    #[arg(short, long, default_value = ".")]
    output: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum EmbeddingChoice {
    Walk,
    Diplacian,
}

#[derive(Args)]
struct EmbedArgs {
    #[command(flatten)]
    graph: GraphInput,
    #[arg(long, value_enum, default_value_t = EmbeddingChoice::Walk)]
    kind: EmbeddingChoice,
    #[arg(long, default_value_t = 4)]
    t: usize,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse::<Algorithm>().map_err(|e| e.to_string())
}

/// Exit 2 for bad input, 3 for numerical failures.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { code: if e.is_numerical() { 3 } else { 2 }, message: e.to_string() }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure { code: 2, message: e.to_string() }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure { code: 2, message: e.to_string() }
    }
}

fn open(path: &Path) -> Result<Box<dyn BufRead>, Failure> {
    if path.as_os_str() == "-" {
        return Ok(Box::new(BufReader::new(io::stdin())));
    }
    let file = File::open(path).map_err(|e| Failure { code: 2, message: format!("{}: {e}", path.display()) })?;
    Ok(Box::new(BufReader::new(file)))
}

fn create(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| Failure { code: 2, message: format!("{}: {e}", p.display()) })?;
            Ok(Box::new(io::BufWriter::new(file)))
        }
        None => Ok(Box::new(io::stdout().lock())),
    }
}

fn overlap_params(theta: f64, rule: &RuleArgs) -> OverlapParams {
    OverlapParams { theta, t: rule.t, k: rule.k, teleport: rule.teleport, ..Default::default() }
}

fn cmd_detect(args: DetectArgs) -> Result<(), Failure> {
    let graph = args.graph.load()?;
    let mut params = overlap_params(args.theta, &args.rule);
    params.record_decisions = args.decisions.is_some();
    let detection = detect(&graph, args.algo, &params, &ClusteringConfig::with_seed(args.seed))?;
    let cover = &detection.outcome.cover;
    let q = cover_modularity(&graph, cover)?;
    let metric = if graph.is_directed() { "theta_modularity_d" } else { "overlap_modularity_avg" };

    let mut out = create(args.output.as_deref())?;
    let ids = graph.ids();
    match args.format {
        CoverFormat::Cover => write_cover(cover, ids, true, &mut out)?,
        CoverFormat::Csv => {
            writeln!(out, "vertex,community")?;
            for (u, member) in cover.memberships().iter().enumerate() {
                for j in member {
                    writeln!(out, "{},{}", ids.external(u), j + 1)?;
                }
            }
        }
        CoverFormat::Json => {
            let communities: Vec<Vec<i64>> =
                cover.communities().iter().map(|c| c.iter().map(|&u| ids.external(u)).collect()).collect();
            let doc = json!({
                "algorithm": args.algo,
                "theta": args.theta,
                "seed": args.seed,
                "step_one_communities": detection.partition.k(),
                "passes": detection.outcome.passes,
                metric: q,
                "overlapping": cover.overlapping_vertices(),
                "communities": communities,
            });
            serde_json::to_writer_pretty(&mut out, &doc)?;
            writeln!(out)?;
        }
    }
    out.flush()?;

    if let Some(path) = &args.decisions {
        let log: Vec<_> = detection
            .outcome
            .decisions
            .iter()
            .map(|d| {
                json!({
                    "vertex": ids.external(d.vertex),
                    "community": d.community + 1,
                    "pass": d.pass,
                    "lhs": d.lhs,
                    "rhs": d.rhs,
                    "accepted": d.accepted,
                })
            })
            .collect();
        let mut w = create(Some(path))?;
        serde_json::to_writer_pretty(&mut w, &log)?;
        writeln!(w)?;
        w.flush()?;
    }
    eprintln!(
        "{metric} {q:.7} communities {} overlapping {}",
        cover.k(),
        cover.overlapping_vertices()
    );
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<(), Failure> {
    if args.against.is_none() && args.graph.is_none() {
        return Err(Failure { code: 2, message: "eval needs --against and/or --graph".into() });
    }
    let mut rows = Vec::new();
    let graph = match &args.graph {
        Some(path) => Some(load_edge_list(open(path)?, args.directed, args.one_indexed)?),
        None => None,
    };
    let load = |path: &Path| -> Result<Cover, Failure> {
        Ok(match &graph {
            Some(g) => read_cover(open(path)?, g.ids())?,
            None => load_cover(open(path)?, args.one_indexed)?,
        })
    };
    let cover = load(&args.cover)?;
    if let Some(other) = &args.against {
        let b = load(other)?;
        rows.push(MetricRow::new("onmi", onmi(&cover, &b)?, json!({})));
    }
    if let Some(g) = &graph {
        let theta = json!({ "theta": args.theta });
        if g.is_directed() {
            let d = theta_modularity(g, &cover, args.theta, ThetaVariant::DirectedD)?;
            rows.push(MetricRow::new("theta_modularity_d", d, theta.clone()));
            let phi = stationary_with(g, &StationaryOptions::default())?;
            let sd = theta_modularity(g, &cover, args.theta, ThetaVariant::DirectedSd(&phi))?;
            rows.push(MetricRow::new("theta_modularity_sd", sd, theta));
        } else {
            rows.push(MetricRow::new("overlap_modularity_avg", overlap_modularity_avg(g, &cover)?, json!({})));
            rows.push(MetricRow::new("overlap_modularity_q0", overlap_modularity_q0(g, &cover)?, json!({})));
            let q = theta_modularity(g, &cover, args.theta, ThetaVariant::Undirected)?;
            rows.push(MetricRow::new("theta_modularity", q, theta));
        }
    }
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, &rows)?;
    writeln!(out)?;
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<(), Failure> {
    let graph = args.graph.load()?;
    let truth = match &args.truth {
        Some(path) => Some(read_cover(open(path)?, graph.ids())?),
        None => None,
    };
    let algos = if args.algos.is_empty() {
        Algorithm::ALL.into_iter().filter(|a| a.directed() == graph.is_directed()).collect()
    } else {
        args.algos.clone()
    };
    let specs: Vec<SweepSpec> = algos
        .into_iter()
        .map(|algorithm| SweepSpec {
            algorithm,
            grid: if args.grid.is_empty() { algorithm.default_grid() } else { args.grid.clone() },
            params: overlap_params(1.0, &args.rule),
        })
        .collect();
    let report = sweep(&graph, truth.as_ref(), &specs, args.seed)?;
    let mut out = create(args.output.as_deref())?;
    match args.format {
        ReportFormat::Csv => report.write_csv(&mut out, args.timings)?,
        ReportFormat::Json => {
            let mut doc = serde_json::to_value(&report)?;
            if !args.timings {
                for row in doc["rows"].as_array_mut().into_iter().flatten() {
                    row.as_object_mut().map(|r| r.remove("runtime_ms"));
                }
            }
            serde_json::to_writer_pretty(&mut out, &doc)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    if let Some(path) = &args.plot_data {
        let mut w = create(Some(path))?;
        serde_json::to_writer_pretty(&mut w, &report.plot_data())?;
        writeln!(w)?;
        w.flush()?;
    }
    Ok(())
}

fn cmd_gen(args: GenArgs) -> Result<(), Failure> {
    let params = PlantedParams {
        n: args.n,
        k_communities: args.k,
        on: args.on,
        om: args.om,
        p_in: args.pin,
        p_out: args.pout,
        directed: args.directed,
        seed: args.seed,
    };
    let (graph, cover) = planted_overlap_graph(&params)?;
    std::fs::create_dir_all(&args.output)?;
    let network = args.output.join("network.dat");
    let community = args.output.join("community.dat");
    let mut w = create(Some(&network))?;
    write_lfr_network(&graph, &mut w)?;
    w.flush()?;
    let mut w = create(Some(&community))?;
    write_lfr_communities(&cover, &mut w)?;
    w.flush()?;
    eprintln!(
        "wrote {} and {} (n {}, m {}, communities {})",
        network.display(),
        community.display(),
        graph.n(),
        graph.m(),
        cover.k()
    );
    Ok(())
}

fn cmd_embed(args: EmbedArgs) -> Result<(), Failure> {
    let graph = args.graph.load()?;
    let embedding = match args.kind {
        EmbeddingChoice::Walk => walktrap_embedding(&graph, args.t)?,
        EmbeddingChoice::Diplacian => diplacian_embedding(&graph, args.k)?,
    };
    let mut out = create(args.output.as_deref())?;
    embedding.write_csv(graph.ids(), &mut out)?;
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Detect(a) => cmd_detect(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Embed(a) => cmd_embed(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
