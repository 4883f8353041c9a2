//! Commands behind the `mcgi` binary.
//!
//! Commands that produce a CSV write it to `--out` (or stdout) and a short
//! human summary to the error stream. The other commands print their report
//! to stdout. [`run`] returns the process exit code: 0 when every requested
//! check passed, 1 when a check failed.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mcgi::dataset::{compute_ground_truth, read_vecs_auto, write_vecs};
use mcgi::experiments::{
    calibrated_alphas, routing_csv, routing_difficulty_experiment, run_sweep, verify_connectivity,
    RoutingConfig, VERIFY_MAX_POINTS,
};
use mcgi::graph::build;
use mcgi::lid::calibrate;
use mcgi::search::MemoryIndex;
use mcgi::storage::{
    load_index, open_disk_index, required_block_size, save_index, ReadMode, DEFAULT_BLOCK_SIZE,
};
use mcgi::synthetic::{generate_synthetic, split_queries, SyntheticKind};
use mcgi::{
    BuildMode, BuildParams, GroundTruth, LidProfile, MappedAlphas, MappingConfig, SearchParams,
    VectorDataset,
};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] mcgi::Error),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },

    #[error("{0}")]
    Usage(String),

    #[error("cannot start thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Parser)]
#[command(name = "mcgi", version, about = "Adaptive-alpha graph index: build, search, evaluate")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic base set, held-out queries and exact ground truth.
    Gen(GenArgs),
    /// Calibrate LID, map per-node alpha, build the graph and save the index.
    Build(BuildArgs),
    /// Recall@10 / QPS / latency sweep over beam widths.
    Sweep(SweepArgs),
    /// Check EMST and RNG inclusion and reachability on a small base set.
    Verify(VerifyArgs),
    /// Per-node LID estimates as CSV, with mean and std.
    LidStats(LidStatsArgs),
    /// Greedy routing cost against intrinsic dimension.
    RoutingDifficulty(RoutingArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// uniform-ball, gaussian-clusters, embedded-manifold or mixed-lid.
    #[arg(long, default_value = "uniform-ball")]
    pub kind: String,
    /// Base vectors (queries are generated in addition).
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[arg(long, default_value_t = 64)]
    pub dim: usize,
    #[arg(long, default_value_t = 4)]
    pub intrinsic_dim: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Standard deviation of isotropic noise added to every coordinate.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 100)]
    pub queries: usize,
    /// Ground-truth neighbors per query.
    #[arg(long, default_value_t = 100)]
    pub k: usize,
    /// Cluster count for gaussian-clusters.
    #[arg(long, default_value_t = 10)]
    pub clusters: usize,
    /// Intrinsic dimension of the second block for mixed-lid.
    #[arg(long, default_value_t = 12)]
    pub second_dim: usize,
    /// Output directory for base.fvecs, query.fvecs and gt.ivecs.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[arg(long)]
    pub base: PathBuf,
    #[arg(long)]
    pub index: PathBuf,
    /// LID profile sidecar; defaults to `<index>.lid`.
    #[arg(long)]
    pub profile: Option<PathBuf>,
    /// Maximum out-degree.
    #[arg(long = "R", default_value_t = 64)]
    pub max_degree: usize,
    #[arg(long = "L-build", default_value_t = 100)]
    pub beam_build: usize,
    #[arg(long, default_value_t = 1.0)]
    pub alpha_min: f64,
    #[arg(long, default_value_t = 1.5)]
    pub alpha_max: f64,
    #[arg(long, default_value_t = 32)]
    pub k_lid: usize,
    /// Refinement passes.
    #[arg(long, default_value_t = 2)]
    pub iters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Use this alpha for every node instead of the LID mapping.
    #[arg(long)]
    pub fixed_alpha: Option<f64>,
    /// Do not cap out-degree.
    #[arg(long)]
    pub uncapped: bool,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Disk block size; defaults to the smallest that fits a node record, at least 4096.
    #[arg(long)]
    pub block_size: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DiskMode {
    Buffered,
    Unbuffered,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub index: PathBuf,
    #[arg(long)]
    pub queries: PathBuf,
    /// Ground truth (.ivecs) with at least 10 neighbors per query.
    #[arg(long)]
    pub gt: Option<PathBuf>,
    /// LID profile for adaptive search; defaults to `<index>.lid`.
    #[arg(long)]
    pub profile: Option<PathBuf>,
    /// Beam widths to sweep. In adaptive mode these are the beam_min values;
    /// default 10,20,50,100 (static) or the single --beam-min (adaptive).
    #[arg(long = "L-list", value_delimiter = ',')]
    pub beams: Option<Vec<usize>>,
    #[arg(long)]
    pub adaptive: bool,
    #[arg(long, default_value_t = 0.25)]
    pub lambda: f64,
    #[arg(long, default_value_t = 10)]
    pub beam_min: usize,
    #[arg(long, default_value_t = 400)]
    pub beam_max: usize,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Serve adjacency from the index file instead of memory.
    #[arg(long, value_enum)]
    pub disk_mode: Option<DiskMode>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub base: PathBuf,
    /// Cap out-degree at R; missing edges are then reported, not failed.
    #[arg(long = "R")]
    pub max_degree: Option<usize>,
    #[arg(long = "L-build", default_value_t = 100)]
    pub beam_build: usize,
    #[arg(long, default_value_t = 1.0)]
    pub alpha_min: f64,
    #[arg(long, default_value_t = 1.5)]
    pub alpha_max: f64,
    #[arg(long, default_value_t = 32)]
    pub k_lid: usize,
    #[arg(long, default_value_t = 2)]
    pub iters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Counterexample edges listed per property.
    #[arg(long, default_value_t = 20)]
    pub show: usize,
}

#[derive(Debug, Args)]
pub struct LidStatsArgs {
    #[arg(long)]
    pub base: PathBuf,
    #[arg(long, default_value_t = 32)]
    pub k_lid: usize,
    #[arg(long, default_value_t = 10)]
    pub bins: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RoutingArgs {
    #[arg(long, value_delimiter = ',', default_value = "2,4,8,16")]
    pub dims: Vec<usize>,
    #[arg(long, default_value_t = 2000)]
    pub n: usize,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parse `args` (including the program name) and run the command.
pub fn run_from<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<i32>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Usage(e.to_string()))?;
    run(&cli, out, err)
}

pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<i32> {
    match &cli.command {
        Command::Gen(a) => cmd_gen(a, out),
        Command::Build(a) => cmd_build(a, out),
        Command::Sweep(a) => cmd_sweep(a, out, err),
        Command::Verify(a) => cmd_verify(a, out),
        Command::LidStats(a) => cmd_lid_stats(a, out, err),
        Command::RoutingDifficulty(a) => cmd_routing_difficulty(a, out, err),
    }
}

fn write_report(out: &mut dyn Write, text: &str) -> CliResult<()> {
    out.write_all(text.as_bytes())
        .map_err(io_err(Path::new("<output>")))
}

fn emit_csv(csv: &str, path: Option<&Path>, out: &mut dyn Write) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, csv).map_err(io_err(p)),
        None => write_report(out, csv),
    }
}

fn thread_pool(threads: usize) -> CliResult<rayon::ThreadPool> {
    if threads == 0 {
        return Err(CliError::Usage("--threads must be >= 1".into()));
    }
    Ok(rayon::ThreadPoolBuilder::new().num_threads(threads).build()?)
}

fn sidecar_path(index: &Path) -> PathBuf {
    let mut s = index.as_os_str().to_owned();
    s.push(".lid");
    PathBuf::from(s)
}

pub fn cmd_gen(args: &GenArgs, out: &mut dyn Write) -> CliResult<i32> {
    let kind = SyntheticKind::parse(&args.kind, args.clusters, args.second_dim)?;
    if args.n == 0 {
        return Err(CliError::Usage("--n must be >= 1".into()));
    }
    if args.queries > 0 && args.k > args.n {
        return Err(CliError::Usage(format!(
            "--k {} exceeds the base size {}",
            args.k, args.n
        )));
    }
    let all = generate_synthetic(
        kind,
        args.n + args.queries,
        args.dim,
        args.intrinsic_dim,
        args.seed,
        args.noise,
    )?;
    fs::create_dir_all(&args.out).map_err(io_err(&args.out))?;
    let base_path = args.out.join("base.fvecs");
    if args.queries == 0 {
        write_vecs(&all, &base_path)?;
        write_report(
            out,
            &format!("wrote {} base vectors (dim {}) to {}\n", all.len(), all.dim(), base_path.display()),
        )?;
        return Ok(0);
    }
    let (base, queries, _) = split_queries(&all, args.queries, args.seed)?;
    let gt = compute_ground_truth(&base, &queries, args.k)?;
    let query_path = args.out.join("query.fvecs");
    let gt_path = args.out.join("gt.ivecs");
    write_vecs(&base, &base_path)?;
    write_vecs(&queries, &query_path)?;
    gt.write(&gt_path)?;
    write_report(
        out,
        &format!(
            "wrote {} base vectors, {} queries (dim {}, intrinsic {}) and {}-NN ground truth to {}\n",
            base.len(),
            queries.len(),
            base.dim(),
            args.intrinsic_dim,
            args.k,
            args.out.display()
        ),
    )?;
    Ok(0)
}

/// Profile for the sidecar when α does not come from it. Degenerate data
/// yields no profile and a warning.
fn profile_only(base: &VectorDataset, k_lid: usize) -> CliResult<Option<LidProfile>> {
    let k = k_lid.min(base.len().saturating_sub(1));
    if k < 2 {
        log::warn!("{} points are too few to calibrate LID; no profile written", base.len());
        return Ok(None);
    }
    match calibrate(base, k) {
        Ok(c) => Ok(Some(c.profile)),
        Err(mcgi::Error::Degenerate(msg)) => {
            log::warn!("LID calibration degenerate ({msg}); no profile written");
            Ok(None)
        }
        Err(e) => Err(e.into()),
    }
}

fn histogram_lines(alphas: &MappedAlphas, cfg: &MappingConfig, bins: usize) -> String {
    use std::fmt::Write as _;
    let mut s = String::new();
    if cfg.is_fixed() {
        let _ = writeln!(s, "  {:.3}  {}", cfg.alpha_min(), alphas.len());
        return s;
    }
    let (lo, hi) = (cfg.alpha_min(), cfg.alpha_max());
    let width = (hi - lo) / bins as f64;
    for (i, c) in alphas.histogram(lo, hi, bins).iter().enumerate() {
        let a = lo + width * i as f64;
        let close = if i + 1 == bins { ']' } else { ')' };
        let _ = writeln!(s, "  [{:.3}, {:.3}{close}  {c}", a, a + width);
    }
    s
}

pub fn cmd_build(args: &BuildArgs, out: &mut dyn Write) -> CliResult<i32> {
    let cfg = MappingConfig::new(args.alpha_min, args.alpha_max)?;
    let base = read_vecs_auto(&args.base)?;
    if base.is_empty() {
        return Err(CliError::Usage(format!("{} has no vectors", args.base.display())));
    }
    let params = BuildParams {
        max_degree: args.max_degree,
        beam_build: args.beam_build,
        max_iter: args.iters,
        seed: args.seed,
        degree_uncapped: args.uncapped,
        mode: if args.threads > 1 {
            BuildMode::Parallel
        } else {
            BuildMode::Sequential
        },
    };
    params.validate()?;
    let pool = thread_pool(args.threads)?;

    let started = Instant::now();
    let (profile, alphas, range) = pool.install(|| -> CliResult<_> {
        Ok(match args.fixed_alpha {
            Some(a) => {
                let fixed = MappingConfig::new(a, a)?;
                let profile = profile_only(&base, args.k_lid)?;
                (profile, MappedAlphas::uniform(base.len(), a)?, fixed)
            }
            None => {
                let (profile, alphas) = calibrated_alphas(&base, args.k_lid, &cfg)?;
                (profile, alphas, cfg)
            }
        })
    })?;
    let calibration_secs = started.elapsed().as_secs_f64();
    let graph_started = Instant::now();
    let graph = pool.install(|| build(&base, &params, &alphas))?;
    let graph_secs = graph_started.elapsed().as_secs_f64();

    let block_size = args.block_size.unwrap_or_else(|| {
        DEFAULT_BLOCK_SIZE.max(required_block_size(graph.max_degree(), base.dim(), base.elements()))
    });
    save_index(&graph, &base, &args.index, block_size)?;
    let profile_path = args.profile.clone().unwrap_or_else(|| sidecar_path(&args.index));
    if let Some(p) = &profile {
        p.write(&profile_path)?;
    }

    let mut r = String::new();
    use std::fmt::Write as _;
    let _ = writeln!(r, "base: {} vectors, dim {}", base.len(), base.dim());
    match args.fixed_alpha {
        Some(a) => {
            let _ = writeln!(r, "alpha: fixed {a}");
        }
        None => {
            let _ = writeln!(r, "alpha: adaptive in [{}, {}]", cfg.alpha_min(), cfg.alpha_max());
        }
    }
    match &profile {
        Some(p) => {
            let _ = writeln!(r, "LID profile (k_lid {}):", p.k_lid());
            let _ = writeln!(r, "  mu_LID (Mean)    {:.1}", p.mu());
            let _ = writeln!(r, "  sigma_LID (Std)  {:.1}", p.sigma());
        }
        None => {
            let _ = writeln!(r, "LID profile: unavailable (uniform alpha {})", alphas.get(0));
        }
    }
    let _ = writeln!(r, "alpha histogram:");
    r.push_str(&histogram_lines(&alphas, &range, 10));
    let _ = writeln!(
        r,
        "graph: {} edges, mean degree {:.2}, max degree {}{}, entry point {}",
        graph.edge_count(),
        graph.mean_degree(),
        graph.max_degree(),
        if args.uncapped { " (uncapped)" } else { "" },
        graph.entry_point()
    );
    let _ = writeln!(
        r,
        "build time: {:.3} s (calibration {:.3} s, graph {:.3} s; R {}, L_build {}, {} passes, seed {}, {} threads)",
        calibration_secs + graph_secs,
        calibration_secs,
        graph_secs,
        args.max_degree,
        args.beam_build,
        args.iters,
        args.seed,
        args.threads
    );
    let _ = writeln!(r, "index: {} (block size {block_size})", args.index.display());
    if profile.is_some() {
        let _ = writeln!(r, "profile: {}", profile_path.display());
    }
    write_report(out, &r)?;
    Ok(0)
}

pub fn cmd_sweep(args: &SweepArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<i32> {
    let gt_path = args
        .gt
        .as_ref()
        .ok_or_else(|| CliError::Usage("sweep needs ground truth (--gt)".into()))?;
    let truth = GroundTruth::read(gt_path)?;
    let queries = read_vecs_auto(&args.queries)?;
    let beams = match &args.beams {
        Some(b) if b.is_empty() => return Err(CliError::Usage("--L-list is empty".into())),
        Some(b) => b.clone(),
        None if args.adaptive => vec![args.beam_min],
        None => vec![10, 20, 50, 100],
    };
    let params = SearchParams {
        adaptive: args.adaptive,
        lambda: args.lambda,
        beam_min: args.beam_min,
        beam_max: args.beam_max,
        ..SearchParams::default()
    };
    params.validate()?;
    let profile = if args.adaptive {
        match &args.profile {
            Some(p) => Some(LidProfile::read(p)?),
            None => {
                let p = sidecar_path(&args.index);
                if p.exists() {
                    Some(LidProfile::read(&p)?)
                } else {
                    log::warn!("no LID profile at {}; adaptive search runs static", p.display());
                    None
                }
            }
        }
    } else {
        None
    };

    let (report, source) = match args.disk_mode {
        Some(mode) => {
            let mode = match mode {
                DiskMode::Buffered => ReadMode::Buffered,
                DiskMode::Unbuffered => ReadMode::Unbuffered,
            };
            let disk = open_disk_index(&args.index, mode)?;
            check_query_dim(disk.header().dim as usize, &queries)?;
            let rep = run_sweep(&disk, &queries, &truth, &beams, &params, profile.as_ref(), args.threads)?;
            (rep, format!("disk ({:?}), {} block reads", disk.mode(), disk.block_reads()))
        }
        None => {
            let (graph, base) = load_index(&args.index)?;
            check_query_dim(base.dim(), &queries)?;
            let mem = MemoryIndex::new(&graph, &base)?;
            let rep = run_sweep(&mem, &queries, &truth, &beams, &params, profile.as_ref(), args.threads)?;
            (rep, "memory".to_string())
        }
    };
    emit_csv(&report.to_csv(), args.out.as_deref(), out)?;

    let mut s = format!(
        "sweep: {} queries, {} search, {} threads, source {source}\n",
        queries.len(),
        if args.adaptive { "adaptive" } else { "static" },
        args.threads
    );
    for row in &report.rows {
        s.push_str(&format!(
            "  L {:>4}  recall@10 {:.4}  qps {:.0}  p99 {:.3} ms  mean beam {:.1}\n",
            row.beam, row.recall_at_10, row.qps, row.p99_latency_ms, row.mean_beam_used
        ));
    }
    write_report(err, &s)?;
    Ok(0)
}

fn check_query_dim(index_dim: usize, queries: &VectorDataset) -> CliResult<()> {
    if index_dim != queries.dim() {
        return Err(CliError::Usage(format!(
            "index dim {index_dim} != query dim {}",
            queries.dim()
        )));
    }
    Ok(())
}

fn edge_list(edges: &[(u32, u32)], show: usize) -> String {
    let mut s: Vec<String> = edges.iter().take(show).map(|(a, b)| format!("({a},{b})")).collect();
    if edges.len() > show {
        s.push(format!("... {} more", edges.len() - show));
    }
    s.join(" ")
}

pub fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> CliResult<i32> {
    let cfg = MappingConfig::new(args.alpha_min, args.alpha_max)?;
    let base = read_vecs_auto(&args.base)?;
    if base.len() > VERIFY_MAX_POINTS {
        return Err(CliError::Usage(format!(
            "verification is limited to n <= {VERIFY_MAX_POINTS}; {} has {} vectors",
            args.base.display(),
            base.len()
        )));
    }
    let params = BuildParams {
        max_degree: args.max_degree.unwrap_or(BuildParams::default().max_degree),
        beam_build: args.beam_build,
        max_iter: args.iters,
        seed: args.seed,
        degree_uncapped: args.max_degree.is_none(),
        mode: BuildMode::Sequential,
    };
    params.validate()?;
    let (_, alphas) = calibrated_alphas(&base, args.k_lid, &cfg)?;
    let rep = verify_connectivity(&base, &params, &alphas)?;

    use std::fmt::Write as _;
    let mut r = String::new();
    let _ = writeln!(
        r,
        "verify: n {}, {}, L_build {}, seed {}",
        rep.n,
        match args.max_degree {
            Some(d) => format!("capped R {d}"),
            None => "uncapped".to_string(),
        },
        args.beam_build,
        args.seed
    );
    let status = |ok: bool, missing: usize| -> String {
        match (ok, rep.capped) {
            (true, _) => "PASS".into(),
            (false, false) => "FAIL".into(),
            (false, true) => format!("{missing} missing (degree-cap caveat)"),
        }
    };
    let _ = writeln!(r, "EMST inclusion: {}", status(rep.emst_holds(), rep.emst_missing.len()));
    if !rep.emst_holds() {
        let _ = writeln!(r, "  missing: {}", edge_list(&rep.emst_missing, args.show));
    }
    let _ = writeln!(
        r,
        "RNG inclusion: {} ({} boundary ties)",
        status(rep.rng_holds(), rep.rng_missing.len()),
        rep.rng_ties
    );
    if !rep.rng_holds() {
        let _ = writeln!(r, "  missing: {}", edge_list(&rep.rng_missing, args.show));
    }
    let _ = writeln!(r, "reachability from entry: {}", status(rep.reachable(), rep.unreachable.len()));
    if !rep.reachable() {
        let ids: Vec<String> = rep.unreachable.iter().take(args.show).map(|u| u.to_string()).collect();
        let _ = writeln!(r, "  unreachable: {}", ids.join(" "));
    }
    let _ = writeln!(r, "result: {}", if rep.passed() { "PASS" } else { "FAIL" });
    write_report(out, &r)?;
    Ok(if rep.passed() { 0 } else { 1 })
}

pub fn cmd_lid_stats(args: &LidStatsArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<i32> {
    let base = read_vecs_auto(&args.base)?;
    let k = args.k_lid.min(base.len().saturating_sub(1));
    let cal = calibrate(&base, k)?;
    let p = &cal.profile;
    emit_csv(&p.to_csv(), args.out.as_deref(), out)?;
    if p.sigma() == 0.0 {
        log::warn!("sigma_LID is 0 (degenerate); a build on this data falls back to uniform alpha");
    }

    use std::fmt::Write as _;
    let mut s = String::new();
    let _ = writeln!(s, "nodes {}, k_lid {}, candidates {}", p.len(), p.k_lid(), cal.report.candidates);
    let _ = writeln!(s, "mu_LID (Mean)    {:.1}", p.mu());
    let _ = writeln!(s, "sigma_LID (Std)  {:.1}", p.sigma());
    if !cal.report.failed.is_empty() {
        let _ = writeln!(s, "{} nodes not estimable, filled with the mean", cal.report.failed.len());
    }
    let lo = p.lids().iter().copied().fold(f32::INFINITY, f32::min) as f64;
    let hi = p.lids().iter().copied().fold(f32::NEG_INFINITY, f32::max) as f64;
    let bins = args.bins.max(1);
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &l in p.lids() {
        let b = if width > 0.0 { (((l as f64 - lo) / width) as usize).min(bins - 1) } else { 0 };
        counts[b] += 1;
    }
    let _ = writeln!(s, "histogram:");
    for (i, c) in counts.iter().enumerate() {
        let _ = writeln!(s, "  [{:.2}, {:.2})  {c}", lo + width * i as f64, lo + width * (i + 1) as f64);
    }
    write_report(err, &s)?;
    Ok(0)
}

pub fn cmd_routing_difficulty(args: &RoutingArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<i32> {
    let ambient = args.dims.iter().copied().max().unwrap_or(0);
    let cfg = RoutingConfig {
        dims: args.dims.clone(),
        n: args.n,
        trials: args.trials,
        seed: args.seed,
        ambient_dim: ambient.max(RoutingConfig::default().ambient_dim),
        ..RoutingConfig::default()
    };
    let rows = routing_difficulty_experiment(&cfg)?;
    emit_csv(&routing_csv(&rows), args.out.as_deref(), out)?;
    let mut s = format!("routing: n {}, {} trials, seed {}\n", args.n, args.trials, args.seed);
    for r in &rows {
        s.push_str(&format!(
            "  d {:>3}  success {:.3}  mean evals {:.1}\n",
            r.intrinsic_dim, r.success_rate, r.mean_distance_evals
        ));
    }
    write_report(err, &s)?;
    Ok(0)
}
