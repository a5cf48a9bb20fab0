// SPDX-License-Identifier: MIT OR Apache-2.0

//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 internal invariant
//! violation. Every output file is written to a temporary sibling and renamed
//! into place, so a failed run leaves no partial output.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::detector::{detect, DetectorConfig, FixedTuning};
use crate::error::{Error, Result};
use crate::metrics::{log1p_error, ErrorSummary};
use crate::projections::{fpc1_projection, tvn_projection};
use crate::report::emit_report;
use crate::series::{load_csv, FunctionalSeries, ProjectedSeries};
use crate::simulation::{
    generate_series, replicate_seed, sample_scenario, Family, MaternParams, MeanFunction, Scenario,
    ScenarioSettings, SegmentSpec, Transform, DEFAULT_GRID_SIZE,
};
use crate::series::uniform_grid;
use crate::tuning::{evaluate_grid, select, BicEvaluation, TuningGrid};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

/// Environment variable capping worker threads.
pub const THREADS_ENV: &str = "FCPD_THREADS";

#[derive(Debug, Parser)]
#[command(name = "fcpd", version, about = "Multiple changepoint detection for functional time series")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Detect changepoints in a CSV of curves (rows = time, columns = grid).
    Detect(DetectArgs),
    /// Run a simulation study from a scenario file.
    Simulate(SimulateArgs),
    /// Report the BIC-selected (λ, c) of each projection.
    Tune(TuneArgs),
    /// Median detection runtime over a ladder of sample sizes.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Smallest multiplier of √n for λ and c.
    #[arg(long, default_value_t = 0.2)]
    pub grid_min: f64,
    /// Largest multiplier of √n for λ and c.
    #[arg(long, default_value_t = 5.0)]
    pub grid_max: f64,
    #[arg(long, default_value_t = 0.1)]
    pub grid_step: f64,
}

impl GridArgs {
    fn grid(&self) -> Result<TuningGrid<f64>> {
        TuningGrid::from_range(self.grid_min, self.grid_max, self.grid_step)
    }
}

#[derive(Debug, Clone, Args)]
pub struct DetectArgs {
    /// Input CSV.
    pub input: PathBuf,
    /// Output JSON report.
    #[arg(long)]
    pub out: PathBuf,
    /// The first CSV row holds grid locations (`s=<value>`).
    #[arg(long)]
    pub header: bool,
    #[arg(long, default_value_t = crate::detector::DEFAULT_ALPHA)]
    pub alpha: f64,
    /// Fixed fused-lasso penalty (requires --c); skips tuning.
    #[arg(long, requires = "c")]
    pub lambda: Option<f64>,
    /// Fixed linkage (requires --lambda).
    #[arg(long, requires = "lambda")]
    pub c: Option<usize>,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Scenario JSON file.
    #[arg(long)]
    pub scenario: PathBuf,
    /// Overrides the scenario's replicate count.
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Overrides the scenario's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = crate::detector::DEFAULT_ALPHA)]
    pub alpha: f64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TuneArgs {
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub header: bool,
    #[arg(long, default_value_t = crate::detector::DEFAULT_ALPHA)]
    pub alpha: f64,
    /// Also write the full BIC surface as CSV.
    #[arg(long)]
    pub surface: Option<PathBuf>,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Comma-separated sample sizes.
    #[arg(long, value_delimiter = ',', default_value = "1000,2000,3000,4000,5000,6000,7000")]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    pub replicates: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_GRID_SIZE)]
    pub grid_size: usize,
    #[arg(long, default_value_t = crate::detector::DEFAULT_ALPHA)]
    pub alpha: f64,
    /// Output CSV of `n,median_ms`.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub grid: GridArgs,
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::InvalidConfig(_) => EXIT_USAGE,
        Error::Invariant(_) => EXIT_INTERNAL,
        _ => EXIT_DATA,
    }
}

pub fn execute(command: &Command) -> Result<()> {
    match command {
        Command::Detect(args) => cmd_detect(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Tune(args) => cmd_tune(args),
        Command::Bench(args) => cmd_bench(args),
    }
}

/// Writes `contents` to a temporary sibling of `path`, then renames it over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidConfig(format!("output path {} has no file name", path.display())))?;
    let mut tmp_name = OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".{}.tmp", std::process::id()));
    let tmp = dir.join(tmp_name);
    fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var(THREADS_ENV) {
        let threads: usize = raw
            .trim()
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
        builder = builder.num_threads(threads.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

fn detector_config(alpha: f64, grid: &GridArgs, fixed: Option<FixedTuning<f64>>) -> Result<DetectorConfig<f64>> {
    let config = DetectorConfig {
        alpha,
        grid: grid.grid()?,
        fixed_tvn: fixed,
        fixed_fpc1: fixed,
    };
    config.validate()?;
    Ok(config)
}

pub fn cmd_detect(args: &DetectArgs) -> Result<()> {
    let fixed = match (args.lambda, args.c) {
        (Some(lambda), Some(c)) => Some(FixedTuning { lambda, c }),
        _ => None,
    };
    let config = detector_config(args.alpha, &args.grid, fixed)?;
    let series: FunctionalSeries<f64> = load_csv(&args.input, args.header)?;
    let report = detect(&series, &config)?;
    report.validate()?;
    write_atomic(&args.out, emit_report(&report).as_bytes())
}

/// Result of one simulation replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateOutcome {
    pub replicate: usize,
    pub truth: Vec<usize>,
    pub detected: Vec<usize>,
    pub errors: ErrorSummary,
    pub runtime_ms: f64,
}

/// Simulates and scores one replicate of a scenario file.
pub fn run_replicate(
    settings: &ScenarioSettings,
    base_seed: u64,
    replicate: usize,
    config: &DetectorConfig<f64>,
) -> Result<ReplicateOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(replicate_seed(base_seed, replicate as u64));
    let scenario = sample_scenario(settings, &mut rng);
    run_scenario(&scenario, replicate, config)
}

/// Generates, detects and scores a fixed scenario.
pub fn run_scenario(scenario: &Scenario, replicate: usize, config: &DetectorConfig<f64>) -> Result<ReplicateOutcome> {
    let (series, truth) = generate_series(scenario)?;
    let start = Instant::now();
    let report = detect(&series, config)?;
    let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    report.validate()?;
    let errors = ErrorSummary::between(&report.changepoints, &truth);
    Ok(ReplicateOutcome {
        replicate,
        truth,
        detected: report.changepoints,
        errors,
        runtime_ms,
    })
}

fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let mid = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    })
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Per-replicate rows (deterministic for a seed).
pub fn replicates_csv(outcomes: &[ReplicateOutcome]) -> String {
    let mut out = String::from(
        "replicate,annotation_error,energy_error,log1p_annotation_error,log1p_energy_error,n_true,n_detected\n",
    );
    for o in outcomes {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            o.replicate,
            o.errors.annotation,
            fmt_opt(o.errors.energy),
            log1p_error(o.errors.annotation as f64),
            fmt_opt(o.errors.energy.map(log1p_error)),
            o.truth.len(),
            o.detected.len()
        );
    }
    out
}

/// Medians and means over replicates; energy averages skip missing values.
pub fn summary_csv(outcomes: &[ReplicateOutcome]) -> String {
    let mut annotation: Vec<f64> = outcomes.iter().map(|o| o.errors.annotation as f64).collect();
    let mut energy: Vec<f64> = outcomes.iter().filter_map(|o| o.errors.energy).collect();
    let missing = outcomes.len() - energy.len();
    format!(
        "replicates,mean_annotation_error,median_annotation_error,mean_energy_error,median_energy_error,energy_missing\n{},{},{},{},{},{}\n",
        outcomes.len(),
        fmt_opt(mean(&annotation)),
        fmt_opt(median(&mut annotation)),
        fmt_opt(mean(&energy)),
        fmt_opt(median(&mut energy)),
        missing
    )
}

fn timings_csv(outcomes: &[ReplicateOutcome]) -> String {
    let mut out = String::from("replicate,runtime_ms\n");
    for o in outcomes {
        let _ = writeln!(out, "{},{:.3}", o.replicate, o.runtime_ms);
    }
    out
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let text = fs::read_to_string(&args.scenario).map_err(|e| Error::io(&args.scenario, e))?;
    let mut settings = ScenarioSettings::from_json(&text)?;
    if let Some(r) = args.replicates {
        settings.replicates = r;
    }
    if let Some(seed) = args.seed {
        settings.seed = seed;
    }
    settings.validate()?;
    let config = detector_config(args.alpha, &args.grid, None)?;

    let outcomes: Vec<ReplicateOutcome> = with_pool(|| {
        (0..settings.replicates)
            .into_par_iter()
            .map(|i| run_replicate(&settings, settings.seed, i, &config))
            .collect::<Result<Vec<_>>>()
    })??;

    fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    write_atomic(&args.out.join("replicates.csv"), replicates_csv(&outcomes).as_bytes())?;
    write_atomic(&args.out.join("summary.csv"), summary_csv(&outcomes).as_bytes())?;
    write_atomic(&args.out.join("timings.csv"), timings_csv(&outcomes).as_bytes())
}

#[derive(Debug, Serialize)]
struct TunedProjection {
    r: f64,
    k: f64,
    lambda: f64,
    c: usize,
    bic: f64,
    changepoints: Vec<usize>,
}

#[derive(Debug, Serialize)]
struct TuneOutput {
    alpha: f64,
    tvn: Option<TunedProjection>,
    fpc1: Option<TunedProjection>,
}

fn tune_one(projected: &ProjectedSeries<f64>, grid: &TuningGrid<f64>, alpha: f64) -> Result<(TunedProjection, Vec<BicEvaluation<f64>>)> {
    let surface = evaluate_grid(projected.values(), grid, alpha)?;
    let best = select(surface.clone()).ok_or_else(|| Error::InvalidConfig("tuning grid is empty".into()))?;
    Ok((
        TunedProjection {
            r: best.r,
            k: best.k,
            lambda: best.lambda,
            c: best.c,
            bic: best.bic,
            changepoints: best.changepoints,
        },
        surface,
    ))
}

pub fn cmd_tune(args: &TuneArgs) -> Result<()> {
    let config = detector_config(args.alpha, &args.grid, None)?;
    let series: FunctionalSeries<f64> = load_csv(&args.input, args.header)?;
    let (tvn, tvn_surface) = tune_one(&tvn_projection(&series), &config.grid, args.alpha)?;
    let fpc1 = match fpc1_projection(&series) {
        Ok(p) => Some(tune_one(&p, &config.grid, args.alpha)?),
        Err(Error::DegenerateCovariance) => None,
        Err(e) => return Err(e),
    };
    let (fpc1, fpc1_surface) = match fpc1 {
        Some((t, s)) => (Some(t), s),
        None => (None, Vec::new()),
    };
    let output = TuneOutput { alpha: args.alpha, tvn: Some(tvn), fpc1 };
    let mut text = serde_json::to_string_pretty(&output)?;
    text.push('\n');

    if let Some(path) = &args.surface {
        let mut csv = String::from("projection,r,k,lambda,c,n_changepoints,bic\n");
        for (name, surface) in [("tvn", &tvn_surface), ("fpc1", &fpc1_surface)] {
            for e in surface {
                let _ = writeln!(csv, "{name},{},{},{},{},{},{}", e.r, e.k, e.lambda, e.c, e.changepoints.len(), e.bic);
            }
        }
        write_atomic(path, csv.as_bytes())?;
    }
    write_atomic(&args.out, text.as_bytes())
}

/// Null Gaussian-process scenario used for timing: μ = 0, σ² = 1, r = 0.2, ν = 1.
pub fn null_gp_scenario(n: usize, grid_size: usize, seed: u64) -> Scenario {
    Scenario {
        segments: vec![SegmentSpec {
            mean: MeanFunction::Zero,
            matern: MaternParams { sigma2: 1.0, range: 0.2, smoothness: 1.0 },
            length: n,
            family: Family::Gaussian,
        }],
        transform: Transform::Identity,
        grid: uniform_grid(grid_size),
        seed,
    }
}

/// Median single-threaded `detect` wall time (ms) per sample size.
pub fn bench_sizes(
    sizes: &[usize],
    replicates: usize,
    seed: u64,
    grid_size: usize,
    config: &DetectorConfig<f64>,
) -> Result<Vec<(usize, f64)>> {
    let mut rows = Vec::with_capacity(sizes.len());
    for (si, &n) in sizes.iter().enumerate() {
        let mut times = Vec::with_capacity(replicates);
        for r in 0..replicates {
            let sc = null_gp_scenario(n, grid_size, replicate_seed(seed, (si * replicates + r) as u64));
            let (series, _) = generate_series(&sc)?;
            let start = Instant::now();
            let report = detect(&series, config)?;
            times.push(start.elapsed().as_secs_f64() * 1e3);
            std::hint::black_box(report);
        }
        rows.push((n, median(&mut times).unwrap_or(f64::NAN)));
    }
    Ok(rows)
}

pub fn cmd_bench(args: &BenchArgs) -> Result<()> {
    if args.sizes.is_empty() || args.sizes.iter().any(|n| *n < 100) {
        return Err(Error::InvalidConfig("bench sizes must be at least 100".into()));
    }
    if args.replicates == 0 {
        return Err(Error::InvalidConfig("replicates must be at least 1".into()));
    }
    let config = detector_config(args.alpha, &args.grid, None)?;
    let rows = bench_sizes(&args.sizes, args.replicates, args.seed, args.grid_size, &config)?;
    let mut csv = String::from("n,median_ms\n");
    for (n, ms) in rows {
        let _ = writeln!(csv, "{n},{ms:.3}");
    }
    write_atomic(&args.out, csv.as_bytes())
}
