//! Command-line front end: estimation, benchmarking, partitioning, the
//! exact oracle, and plot-data export.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::annealing::{estimate_barycenter, BetaKind, ScheduleParams};
use crate::bench::{exact_barycenter, success_ratio, BenchMode, BenchSetup};
use crate::graph::MetricGraph;
use crate::multiscale::{
    estimate_multiscale, update_online, PipelineState, RepStrategy,
};
use crate::partition::{balanced_partition, Partition};
use crate::report;
use crate::seeds;
use crate::stream::{ObservationStream, ReplayMode};
use crate::{Error, Result};

#[derive(Parser, Debug)]
#[command(
    name = "gbary",
    version,
    about = "Streaming barycenter estimation on weighted graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one estimation and emit a report.
    Estimate(EstimateArgs),
    /// Monte Carlo sweep: success ratio against the exact oracle.
    Bench(BenchArgs),
    /// Compute a balanced partition and write it to a file.
    Partition(PartitionArgs),
    /// Exact barycenter of the observation measure (desk scale only).
    Oracle(OracleArgs),
    /// Export nodes, coordinates, and chosen barycenters as delimited text.
    ExportPlot(ExportPlotArgs),
}

#[derive(Args, Debug, Clone)]
struct ScheduleArgs {
    /// Temperature schedule shape.
    #[arg(long = "beta", value_name = "log|linear", default_value = "log")]
    beta: String,
    /// Multiplier on the calibrated inverse-temperature constant.
    #[arg(long = "beta-mult", default_value_t = 1.0)]
    beta_mult: f64,
    /// Multiplier on the stopping time T* = 0.1 #N + 100.
    #[arg(long = "tmax-mult", default_value_t = 1.0)]
    tmax_mult: f64,
    /// Observation budget per estimation stage.
    #[arg(long = "s-star", default_value_t = crate::annealing::DEFAULT_S_STAR)]
    s_star: u64,
    /// Multiplier on the observation budget.
    #[arg(long = "obs-mult", default_value_t = 1.0)]
    obs_mult: f64,
    /// Exponent of the Poisson intensity (0 = constant rate).
    #[arg(long = "alpha-gamma", default_value_t = 0.0)]
    alpha_gamma: f64,
    /// Observation replay policy.
    #[arg(long = "obs-mode", value_name = "subsample|replay|resume", default_value = "replay")]
    obs_mode: String,
    /// Base RNG seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl ScheduleArgs {
    fn params(&self) -> std::result::Result<ScheduleParams, String> {
        let beta_kind = BetaKind::parse(&self.beta)
            .ok_or_else(|| format!("unknown beta kind {:?} (use log or linear)", self.beta))?;
        Ok(ScheduleParams {
            beta_kind,
            beta_mult: self.beta_mult,
            tmax_mult: self.tmax_mult,
            s_star: self.s_star,
            obs_mult: self.obs_mult,
            alpha_gamma: self.alpha_gamma,
            seed: self.seed,
            record_trajectory: false,
        })
    }

    fn replay_mode(&self) -> std::result::Result<ReplayMode, String> {
        ReplayMode::parse(&self.obs_mode)
            .ok_or_else(|| format!("unknown obs mode {:?}", self.obs_mode))
    }
}

#[derive(Args, Debug)]
struct EstimateArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    obs: PathBuf,
    /// single | multiscale | multiscale-random
    #[arg(long, default_value = "single")]
    mode: String,
    /// Partition file (multiscale modes).
    #[arg(long)]
    partition: Option<PathBuf>,
    /// Build a balanced partition with this many clusters instead.
    #[arg(long)]
    k: Option<usize>,
    /// Pipeline state file: created on the first run, reused to refresh
    /// the estimate when the observation file has grown.
    #[arg(long)]
    state: Option<PathBuf>,
    /// Write the canonical report here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write a `<t> <position> <nearest-node>` line per drift step.
    #[arg(long)]
    trajectory: Option<PathBuf>,
    #[command(flatten)]
    schedule: ScheduleArgs,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    obs: PathBuf,
    #[arg(long, default_value = "single")]
    mode: String,
    #[arg(long)]
    partition: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 100)]
    runs: usize,
    /// Worker pool size (default: available parallelism).
    #[arg(long)]
    threads: Option<usize>,
    /// Write the key-value summary here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write one CSV record per run here.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    schedule: ScheduleArgs,
}

#[derive(Args, Debug)]
struct PartitionArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    obs: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExportPlotArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Coordinates file: `<node> <x> <y>` per line.
    #[arg(long)]
    coords: PathBuf,
    /// Estimation report(s) whose barycenters get flagged.
    #[arg(long)]
    report: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

/// Parse and dispatch. Returns the process exit code.
pub fn run_command<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Estimate(args) => cmd_estimate(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Partition(args) => cmd_partition(args),
        Command::Oracle(args) => cmd_oracle(args),
        Command::ExportPlot(args) => cmd_export_plot(args),
    };
    match outcome {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("gbary: {msg}");
            1
        }
        Err(CliError::Data(e)) => {
            eprintln!("gbary: {e}");
            2
        }
    }
}

enum CliError {
    Usage(String),
    Data(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Data(e)
    }
}

type CliResult = std::result::Result<(), CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Load the partition named by `--partition`, or build one with `--k`.
fn resolve_partition(
    g: &MetricGraph,
    partition: &Option<PathBuf>,
    k: &Option<usize>,
    seed: u64,
) -> std::result::Result<Partition, CliError> {
    match (partition, k) {
        (Some(path), None) => Ok(Partition::load_path(path, g)?),
        (None, Some(k)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seeds::derive(seed, seeds::SALT_PARTITION));
            Ok(balanced_partition(g, *k, &mut rng)?)
        }
        (Some(_), Some(_)) => Err(usage("give either --partition or --k, not both")),
        (None, None) => Err(usage("multiscale modes need --partition or --k")),
    }
}

fn write_out(path: &Path, content: &str) -> Result<()> {
    std::fs::write(path, content)?;
    Ok(())
}

fn cmd_estimate(args: EstimateArgs) -> CliResult {
    let mut params = args.schedule.params().map_err(usage)?;
    params.record_trajectory = args.trajectory.is_some();
    let replay = args.schedule.replay_mode().map_err(usage)?;
    let g = MetricGraph::load_path(&args.graph)?;
    eprintln!(
        "loaded graph: {} nodes, {} edges",
        g.node_count(),
        g.edge_count()
    );

    // A pre-existing state file takes over the multiscale configuration.
    if let Some(state_path) = &args.state {
        if state_path.exists() {
            let mut state = PipelineState::load(state_path)?;
            let mode = ReplayMode::parse(&state.stream_mode)
                .ok_or_else(|| Error::StaleState("bad stream mode in state".into()))?;
            let stream = ObservationStream::load_path(&args.obs, &g, mode, state.stream_seed)?;
            let new_obs = stream.len().saturating_sub(state.observations_seen);
            let (report, changed) = update_online(&g, &stream, &mut state)?;
            state.save(state_path)?;
            eprintln!(
                "online update: {} new observations, central cluster {}",
                new_obs,
                if changed { "changed" } else { "unchanged" }
            );
            return finish_estimate(&g, report, &args);
        }
    }

    let stream = ObservationStream::load_path(&args.obs, &g, replay, params.seed)?;
    eprintln!("loaded {} observations", stream.len());

    match args.mode.as_str() {
        "single" => {
            if args.partition.is_some() || args.k.is_some() {
                return Err(usage("--partition/--k only apply to multiscale modes"));
            }
            let schedule = params.resolve(g.node_count())?;
            let mut s = stream;
            let report = estimate_barycenter(&g, &mut s, &schedule, None)?;
            finish_estimate(&g, report, &args)
        }
        mode @ ("multiscale" | "multiscale-random") => {
            let strategy = if mode == "multiscale" {
                RepStrategy::ClusterBarycenter
            } else {
                RepStrategy::Random
            };
            let p = resolve_partition(&g, &args.partition, &args.k, params.seed)?;
            let run = estimate_multiscale(&g, &stream, &params, &p, strategy)?;
            if let Some(state_path) = &args.state {
                let state = PipelineState::from_run(&g, &p, &run, strategy, &params, &stream)?;
                state.save(state_path)?;
                eprintln!("pipeline state saved to {}", state_path.display());
            }
            finish_estimate(&g, run.report, &args)
        }
        other => Err(usage(format!("unknown mode {other:?}"))),
    }
}

fn finish_estimate(
    g: &MetricGraph,
    report: crate::annealing::EstimationReport,
    args: &EstimateArgs,
) -> CliResult {
    println!("barycenter: {}", report.barycenter);
    if let Some(up) = &report.upscale_barycenter {
        println!("upscale_barycenter: {up}");
    }
    if let Some(central) = &report.central_cluster {
        println!("central_cluster: {central}");
    }
    println!("final_position: {}", report.final_position);
    println!("observations_used: {}", report.observations_used);
    eprintln!("wall_time_ms: {:.3}", report.wall.as_secs_f64() * 1e3);
    if let Some(out) = &args.out {
        write_out(out, &report.to_json())?;
    }
    if let Some(path) = &args.trajectory {
        let mut w = BufWriter::new(File::create(path).map_err(Error::from)?);
        report::write_trajectory(&mut w, g, &report)?;
        w.flush().map_err(Error::from)?;
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> CliResult {
    let params = args.schedule.params().map_err(usage)?;
    let replay = args.schedule.replay_mode().map_err(usage)?;
    let mode = BenchMode::parse(&args.mode)
        .ok_or_else(|| usage(format!("unknown mode {:?}", args.mode)))?;
    if let Some(threads) = args.threads {
        // Ignore failure: the global pool can only be sized once.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    let g = MetricGraph::load_path(&args.graph)?;
    let stream = ObservationStream::load_path(&args.obs, &g, replay, params.seed)?;
    let partition = match mode {
        BenchMode::Single => None,
        _ => Some(resolve_partition(&g, &args.partition, &args.k, params.seed)?),
    };
    let setup = BenchSetup {
        mode,
        runs: args.runs,
        params,
        partition: partition.as_ref(),
    };
    let result = success_ratio(&g, &stream, &setup)?;

    let mut text = Vec::new();
    report::write_bench_text(&mut text, &result)?;
    let text = String::from_utf8(text).expect("utf8 report");
    print!("{text}");
    if let Some(out) = &args.out {
        write_out(out, &text)?;
    }
    if let Some(csv_path) = &args.csv {
        let mut csv = Vec::new();
        report::write_bench_csv(&mut csv, &result)?;
        write_out(csv_path, &String::from_utf8(csv).expect("utf8 csv"))?;
    }
    Ok(())
}

fn cmd_partition(args: PartitionArgs) -> CliResult {
    let g = MetricGraph::load_path(&args.graph)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seeds::derive(args.seed, seeds::SALT_PARTITION));
    let p = balanced_partition(&g, args.k, &mut rng)?;
    let sizes = p.sizes();
    let (min, max) = (
        sizes.iter().min().copied().unwrap_or(0),
        sizes.iter().max().copied().unwrap_or(0),
    );
    let mut w = BufWriter::new(File::create(&args.out).map_err(Error::from)?);
    p.write(&g, &mut w)?;
    w.flush().map_err(Error::from)?;
    println!(
        "partition: k={} min_size={} max_size={} balance={:.2}",
        args.k,
        min,
        max,
        max as f64 / min.max(1) as f64
    );
    Ok(())
}

fn cmd_oracle(args: OracleArgs) -> CliResult {
    let g = MetricGraph::load_path(&args.graph)?;
    let stream = ObservationStream::load_path(&args.obs, &g, ReplayMode::Resumable, 0)?;
    let oracle = exact_barycenter(&g, &stream.empirical_measure(&g))?;
    let labels: Vec<&str> = oracle.argmins.iter().map(|&n| g.label(n)).collect();
    let mut text = String::new();
    text.push_str(&format!("barycenter: {}\n", labels[0]));
    text.push_str(&format!("frechet_value: {}\n", oracle.value));
    if labels.len() > 1 {
        text.push_str(&format!("ties: {}\n", labels.join(" ")));
    }
    print!("{text}");
    if let Some(out) = &args.out {
        write_out(out, &text)?;
    }
    Ok(())
}

fn load_coords(path: &Path) -> Result<HashMap<String, (f64, f64)>> {
    let mut coords = HashMap::new();
    let reader = BufReader::new(File::open(path)?);
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: lineno + 1,
                msg: format!("expected `<node> <x> <y>`, got {} fields", fields.len()),
            });
        }
        let x: f64 = fields[1].parse().map_err(|_| Error::Parse {
            line: lineno + 1,
            msg: format!("bad x coordinate {:?}", fields[1]),
        })?;
        let y: f64 = fields[2].parse().map_err(|_| Error::Parse {
            line: lineno + 1,
            msg: format!("bad y coordinate {:?}", fields[2]),
        })?;
        coords.insert(fields[0].to_owned(), (x, y));
    }
    Ok(coords)
}

fn cmd_export_plot(args: ExportPlotArgs) -> CliResult {
    let g = MetricGraph::load_path(&args.graph)?;
    let coords = load_coords(&args.coords)?;
    let mut marked: HashSet<String> = HashSet::new();
    for path in &args.report {
        let data = std::fs::read_to_string(path).map_err(Error::from)?;
        let value: serde_json::Value = serde_json::from_str(&data).map_err(Error::from)?;
        match value.get("barycenter").and_then(|v| v.as_str()) {
            Some(b) => {
                marked.insert(b.to_owned());
            }
            None => {
                return Err(CliError::Data(Error::Parse {
                    line: 0,
                    msg: format!("{} has no barycenter field", path.display()),
                }))
            }
        }
    }
    let mut out = Vec::new();
    report::write_plot_export(&mut out, &g, &coords, &marked)?;
    write_out(&args.out, &String::from_utf8(out).expect("utf8 export"))?;
    println!(
        "exported {} nodes ({} flagged) to {}",
        g.node_count(),
        marked.len(),
        args.out.display()
    );
    Ok(())
}
