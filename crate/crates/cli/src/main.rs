//! `bsquant`: generate data, fit quantizers, run benchmark grids and export
//! plot data. Every command prints a JSON report (or writes it to
//! `--report`) and exits non-zero on any failure.

mod grid;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use bsquant::bench::{render_repeats_csv, render_table, run_grid_with_progress, TableFormat};
use bsquant::data::{generate, load, save, Distribution, FileFormat, SyntheticSpec};
use bsquant::em::{bsq_em_fit, lloyd_fit, EmConfig};
use bsquant::export::build_plot_export;
use bsquant::trainer::{fit, InitMethod, Initialization, RSchedule, TrainConfig};
use bsquant::{Algorithm, PNorm, Points, Scalar, Variant};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(name = "bsquant", version, about = "k-Means and bounding-sphere quantization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded synthetic dataset.
    Gen(GenArgs),
    /// Fit a quantizer to a dataset.
    Fit(FitArgs),
    /// Time the fitters over a (k, n, d) grid.
    Bench(BenchArgs),
    /// Write points, assignments, centroids and cell boundaries as JSON.
    ExportPlot(ExportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum DistKind {
    Gaussian,
    Uniform,
    Mixture,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Bin,
}

impl From<Format> for FileFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => FileFormat::Csv,
            Format::Bin => FileFormat::Bin,
        }
    }
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Precision {
    F32,
    F64,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum InitKind {
    Random,
    #[value(name = "kmeans++")]
    #[serde(rename = "kmeans++")]
    KMeansPlusPlus,
}

impl From<InitKind> for InitMethod {
    fn from(k: InitKind) -> Self {
        match k {
            InitKind::Random => InitMethod::RandomPoints,
            InitKind::KMeansPlusPlus => InitMethod::KMeansPlusPlus,
        }
    }
}

#[derive(Args)]
struct ReportArg {
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    d: u64,
    #[arg(long, value_enum, default_value = "gaussian")]
    dist: DistKind,
    /// Mixture components.
    #[arg(long, default_value_t = 4)]
    components: usize,
    /// Per-component standard deviation of the mixture.
    #[arg(long, default_value_t = 1.0)]
    component_std: f64,
    /// Mixture centres are drawn from `[-spread, spread]^d`.
    #[arg(long, default_value_t = 20.0)]
    spread: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Defaults to the output file's extension (`.bin` for binary, else CSV).
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[command(flatten)]
    report: ReportArg,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long, value_parser = parse_algorithm)]
    algo: Algorithm,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    k: u64,
    /// Order of the Minkowski distance.
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// SGD epochs; also the iteration cap for the EM fitters.
    #[arg(long, default_value_t = 100)]
    epochs: usize,
    #[arg(long, default_value_t = 512)]
    batch_size: usize,
    #[arg(long, default_value_t = 0.1)]
    lr: f64,
    #[arg(long, default_value_t = 0.001)]
    lr_final: f64,
    /// `ramp`, `per-batch`, `per-epoch` or a fixed number of updates per epoch.
    #[arg(long, default_value = "ramp", value_parser = parse_r_schedule)]
    r_schedule: RSchedule,
    /// Allow SGD steps to overshoot their target.
    #[arg(long)]
    no_clamp: bool,
    /// Relative change in mean distance below which Lloyd stops.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "kmeans++")]
    init: InitKind,
    /// Start from these centroids instead of seeding.
    #[arg(long)]
    init_centroids: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "f64")]
    precision: Precision,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out_centroids: Option<PathBuf>,
    /// One quantum index per input row, CSV with a `quantum` header.
    #[arg(long)]
    out_assignments: Option<PathBuf>,
    #[command(flatten)]
    report: ReportArg,
}

#[derive(Args)]
struct BenchArgs {
    /// Grid file or inline spec such as `k=32,512;n=1000,10000;d=10,100`.
    #[arg(long)]
    grid: Option<String>,
    /// Comma-separated subset of sgd-kmeans, sgd-bsq, lloyd, bsq-em.
    #[arg(long, value_delimiter = ',', value_parser = parse_algorithm)]
    algos: Option<Vec<Algorithm>>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    repeats: Option<u64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Where to write the results table; printed to stderr otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "markdown")]
    format: TableFormatArg,
    /// Per-repeat timings and centroid fingerprints, as CSV.
    #[arg(long)]
    repeats_out: Option<PathBuf>,
    #[command(flatten)]
    report: ReportArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormatArg {
    Markdown,
    Csv,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    centroids: PathBuf,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// Grid steps per axis for tracing cell boundaries (2-D data only).
    #[arg(long, default_value_t = 200)]
    boundary_resolution: usize,
    #[arg(long)]
    no_boundary: bool,
    #[arg(long)]
    label: Option<String>,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    report: ReportArg,
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse::<Algorithm>().map_err(|e| e.to_string())
}

fn parse_r_schedule(s: &str) -> Result<RSchedule, String> {
    match s {
        "ramp" => Ok(RSchedule::LinearRamp),
        "per-batch" => Ok(RSchedule::PerBatch),
        "per-epoch" => Ok(RSchedule::PerEpoch),
        _ => match s.parse::<usize>() {
            Ok(r) if r >= 1 => Ok(RSchedule::Constant(r)),
            _ => Err(format!("expected ramp, per-batch, per-epoch or a positive integer, got {s:?}")),
        },
    }
}

#[derive(Serialize)]
struct Report<B> {
    schema_version: u32,
    command: &'static str,
    #[serde(flatten)]
    body: B,
}

fn emit<B: Serialize>(command: &'static str, body: B, target: &ReportArg) -> Result<()> {
    let report = Report {
        schema_version: REPORT_SCHEMA_VERSION,
        command,
        body,
    };
    match &target.report {
        Some(path) => {
            let mut out = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
            serde_json::to_writer_pretty(&mut out, &report)?;
            writeln!(out)?;
            out.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut out = stdout.lock();
            serde_json::to_writer_pretty(&mut out, &report)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

fn format_for(path: &Path, explicit: Option<Format>) -> FileFormat {
    explicit.map(Into::into).unwrap_or_else(|| FileFormat::from_path(path))
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    let distribution = match args.dist {
        DistKind::Gaussian => Distribution::standard_gaussian(),
        DistKind::Uniform => Distribution::UniformCube,
        DistKind::Mixture => Distribution::GaussianMixture {
            components: args.components,
            component_std: args.component_std,
            spread: args.spread,
        },
    };
    let spec = SyntheticSpec::new(args.n as usize, args.d as usize, distribution, args.seed);
    let data: Points<f64> = generate(&spec)?;
    let format = format_for(&args.out, args.format);
    save(&data, &args.out, format).with_context(|| format!("writing {}", args.out.display()))?;

    #[derive(Serialize)]
    struct Body<'a> {
        spec: SyntheticSpec,
        out: &'a Path,
        format: FileFormat,
        fingerprint: String,
    }
    emit(
        "gen",
        Body {
            spec,
            out: &args.out,
            format,
            fingerprint: data.fingerprint(),
        },
        &args.report,
    )
}

fn cmd_fit(args: FitArgs) -> Result<()> {
    match args.precision {
        Precision::F64 => fit_as::<f64>(args),
        Precision::F32 => fit_as::<f32>(args),
    }
}

fn fit_as<T: Scalar>(args: FitArgs) -> Result<()> {
    let data: Points<T> = load(&args.input).with_context(|| format!("loading {}", args.input.display()))?;
    let norm = PNorm::new(args.p)?;
    let k = args.k as usize;
    let init = match &args.init_centroids {
        Some(path) => {
            let given: Points<T> = load(path).with_context(|| format!("loading {}", path.display()))?;
            if given.len() != k {
                bail!("--init-centroids has {} rows but --k is {k}", given.len());
            }
            Initialization::Given(given)
        }
        None => Initialization::Method(args.init.into()),
    };

    let report = match args.algo {
        Algorithm::SgdKMeans | Algorithm::SgdBsq => {
            let variant = if args.algo == Algorithm::SgdKMeans { Variant::KMeans } else { Variant::Bsq };
            let mut cfg = TrainConfig::new(k, variant);
            cfg.norm = norm;
            cfg.epochs = args.epochs;
            cfg.batch_size = args.batch_size;
            cfg.lr_initial = args.lr;
            cfg.lr_final = args.lr_final;
            cfg.r_schedule = args.r_schedule;
            cfg.clamp_step = !args.no_clamp;
            cfg.seed = args.seed;
            cfg.init = init;
            fit(&data, &cfg)?
        }
        Algorithm::Lloyd | Algorithm::BsqEm => {
            let mut cfg = EmConfig::new(k);
            cfg.norm = norm;
            cfg.max_iterations = args.epochs;
            cfg.tol = args.tol;
            cfg.seed = args.seed;
            cfg.init = init;
            if args.algo == Algorithm::Lloyd {
                lloyd_fit(&data, &cfg)?
            } else {
                bsq_em_fit(&data, &cfg)?
            }
        }
    };

    if let Some(path) = &args.out_centroids {
        save(&report.centroids, path, FileFormat::from_path(path)).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &args.out_assignments {
        let eval = bsquant::evaluate(&data, &report.centroids, norm)?;
        write_assignments(path, &eval.assignments)?;
    }

    #[derive(Serialize)]
    #[serde(bound = "T: Scalar")]
    struct Body<'a, T> {
        input: &'a Path,
        n: usize,
        d: usize,
        k: usize,
        p: f64,
        precision: Precision,
        seed: u64,
        centroid_fingerprint: String,
        result: bsquant::report::FitReport<T>,
    }
    emit(
        "fit",
        Body {
            input: &args.input,
            n: data.len(),
            d: data.dim(),
            k,
            p: norm.p(),
            precision: args.precision,
            seed: args.seed,
            centroid_fingerprint: report.centroids.fingerprint(),
            result: report,
        },
        &args.report,
    )
}

fn write_assignments(path: &Path, assignments: &[usize]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    writeln!(out, "quantum")?;
    for a in assignments {
        writeln!(out, "{a}")?;
    }
    out.flush()?;
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let mut grid = match &args.grid {
        Some(spec) => grid::parse_grid(spec)?,
        None => Default::default(),
    };
    if let Some(algos) = args.algos {
        grid.algorithms = algos;
    }
    if let Some(r) = args.repeats {
        grid.repeats = r as usize;
    }
    if let Some(e) = args.epochs {
        grid.epochs = e;
    }
    if let Some(b) = args.batch_size {
        grid.batch_size = b;
    }
    if let Some(s) = args.seed {
        grid.seed = s;
    }
    let result = run_grid_with_progress(&grid, |cell| match cell.median() {
        Some(m) => eprintln!("{} k={} n={} d={}: {m:.3} s", cell.algorithm, cell.k, cell.n, cell.d),
        None => eprintln!("{} k={} n={} d={}: skipped", cell.algorithm, cell.k, cell.n, cell.d),
    })?;
    let format = match args.format {
        TableFormatArg::Markdown => TableFormat::Markdown,
        TableFormatArg::Csv => TableFormat::Csv,
    };
    let table = render_table(&result, format);
    match &args.out {
        Some(path) => std::fs::write(path, &table).with_context(|| format!("writing {}", path.display()))?,
        None => eprint!("{table}"),
    }
    if let Some(path) = &args.repeats_out {
        std::fs::write(path, render_repeats_csv(&result)).with_context(|| format!("writing {}", path.display()))?;
    }

    #[derive(Serialize)]
    struct Body<'a> {
        grid: &'a bsquant::bench::BenchGrid,
        result: &'a bsquant::bench::BenchResult,
    }
    emit("bench", Body { grid: &grid, result: &result }, &args.report)
}

fn cmd_export(args: ExportArgs) -> Result<()> {
    let data: Points<f64> = load(&args.input).with_context(|| format!("loading {}", args.input.display()))?;
    let centroids: Points<f64> = load(&args.centroids).with_context(|| format!("loading {}", args.centroids.display()))?;
    let resolution = (!args.no_boundary).then_some(args.boundary_resolution);
    let export = build_plot_export(&data, &centroids, PNorm::new(args.p)?, resolution, args.label)?;
    for w in &export.warnings {
        eprintln!("warning: {w}");
    }
    let mut out = BufWriter::new(File::create(&args.out).with_context(|| format!("creating {}", args.out.display()))?);
    serde_json::to_writer(&mut out, &export)?;
    out.flush()?;

    #[derive(Serialize)]
    struct Body<'a> {
        out: &'a Path,
        n: usize,
        k: usize,
        max_radius: f64,
        boundary_samples: Option<usize>,
        warnings: &'a [String],
    }
    emit(
        "export-plot",
        Body {
            out: &args.out,
            n: export.points.len(),
            k: export.centroids.len(),
            max_radius: export.radii.iter().copied().fold(0.0, f64::max),
            boundary_samples: export.boundary.as_ref().map(Vec::len),
            warnings: &export.warnings,
        },
        &args.report,
    )
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Bench(a) => cmd_bench(a),
        Command::ExportPlot(a) => cmd_export(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
