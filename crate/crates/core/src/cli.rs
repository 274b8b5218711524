//! The `iqa` command line.
//!
//! Exit codes: 0 success, 2 I/O or malformed input, 3 image shape, 4 bad
//! parameters, 5 statistics or internal failure.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{IqaError, Result};
use crate::haarpsi::haarpsi_score;
use crate::harness::{
    benchmark, compare_measures, evaluate, grid::round4, grid_search, load_manifest,
    score_dataset, GridAxis, GridDataset, GridOptions, Preprocess, ScoreOptions, ScoreTable,
    Selection,
};
use crate::imgio::{
    self, save_gray, save_rgb, BitDepth, CropRect, DynamicRange, GrayImage, Raster,
};
use crate::measure::Measure;
use crate::stats::{DependentTest, RatingMatrix};
use crate::wavelet::{Padding, ResponseMap};

/// Environment variable consulted when `--threads` is absent.
pub const THREADS_ENV: &str = "IQA_THREADS";

#[derive(Debug, Parser)]
#[command(name = "iqa", version, about = "HaarPSI image quality assessment toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Score one reference/distorted pair.
    Score(ScoreCmd),
    /// Score every entry of a manifest into a CSV table.
    Batch(BatchCmd),
    /// Correlate a score table with ratings.
    Evaluate(EvaluateCmd),
    /// Grid-search HaarPSI's C and alpha over one or more datasets.
    Optimize(OptimizeCmd),
    /// Time decoding and scoring of a manifest.
    Bench(BenchCmd),
    /// Run the preprocessing pipeline on one image and write the result.
    Convert(ConvertCmd),
}

#[derive(Debug, Args)]
struct MeasureArgs {
    /// haarpsi, haarpsi-<preset>, psnr or ssim
    #[arg(long, default_value = "haarpsi")]
    measure: String,
    /// default, med, cxr or pa
    #[arg(long)]
    preset: Option<String>,
    #[arg(long = "C", value_name = "C")]
    c: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Skip the 2x2 mean subsampling step.
    #[arg(long)]
    no_subsample: bool,
    /// symmetric or zero
    #[arg(long)]
    padding: Option<Padding>,
}

impl MeasureArgs {
    fn resolve(&self) -> Result<Measure> {
        let measure = Measure::resolve(&self.measure, self.preset.as_deref(), self.c, self.alpha)?;
        match measure {
            Measure::HaarPsi(p) => Ok(Measure::HaarPsi(
                p.with_subsample(!self.no_subsample)
                    .with_padding(self.padding.unwrap_or(p.padding)),
            )),
            _ if self.no_subsample || self.padding.is_some() => Err(IqaError::param(
                "--no-subsample and --padding only apply to haarpsi",
            )),
            other => Ok(other),
        }
    }
}

#[derive(Debug, Args)]
struct PipelineArgs {
    /// Convert color input to grayscale.
    #[arg(long)]
    gray: bool,
    /// Min-max normalize before scaling.
    #[arg(long)]
    normalize: bool,
    /// Crop rectangle applied last.
    #[arg(long, value_name = "X,Y,W,H")]
    crop: Option<CropRect>,
}

#[derive(Debug, Args)]
struct ScoreCmd {
    reference: PathBuf,
    distorted: PathBuf,
    #[command(flatten)]
    measure: MeasureArgs,
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Write HS and W maps as 16-bit PNGs into this directory.
    #[arg(long, value_name = "DIR")]
    maps: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BatchCmd {
    manifest: PathBuf,
    #[command(flatten)]
    measure: MeasureArgs,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Leave out failing entries instead of aborting.
    #[arg(long)]
    skip_errors: bool,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
struct EvaluateCmd {
    scores: PathBuf,
    ratings: PathBuf,
    /// Score table of a competing measure for the significance test.
    #[arg(long, value_name = "FILE")]
    against: Vec<PathBuf>,
    /// steiger or williams
    #[arg(long, default_value = "steiger")]
    test: DependentTest,
}

#[derive(Debug, Args)]
struct OptimizeCmd {
    #[arg(required = true)]
    manifests: Vec<PathBuf>,
    #[arg(long, default_value = "5:100:1")]
    c_grid: GridAxis,
    #[arg(long, default_value = "2:8:0.1")]
    alpha_grid: GridAxis,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    /// Pick the optimum on mean SRCC rounded to 4 decimals.
    #[arg(long)]
    select_rounded: bool,
    #[arg(long)]
    no_subsample: bool,
    #[arg(long, default_value_t = Padding::Symmetric)]
    padding: Padding,
}

#[derive(Debug, Args)]
struct BenchCmd {
    manifest: PathBuf,
    #[command(flatten)]
    measure: MeasureArgs,
    #[arg(long, default_value_t = 1)]
    reps: usize,
    #[arg(long)]
    threads: Option<usize>,
    /// Also print every repetition.
    #[arg(long)]
    verbose: bool,
}

#[derive(Debug, Args)]
struct ConvertCmd {
    input: PathBuf,
    output: PathBuf,
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Scale to the [0, 255] working range.
    #[arg(long)]
    byte: bool,
    /// Output sample width, 8 or 16; defaults to the input's.
    #[arg(long)]
    depth: Option<BitDepth>,
}

fn fmt6(v: f64) -> String {
    crate::harness::fmt6(v)
}

fn threads(flag: Option<usize>) -> Result<usize> {
    let n = match flag {
        Some(n) => n,
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => v.trim().parse().map_err(|_| {
                IqaError::param(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))
            })?,
            Err(_) => 1,
        },
    };
    if n == 0 {
        return Err(IqaError::param("thread count must be at least 1"));
    }
    Ok(n)
}

fn init_logging() {
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .try_init();
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    init_logging();
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 4 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Score(c) => cmd_score(c),
        Command::Batch(c) => cmd_batch(c),
        Command::Evaluate(c) => cmd_evaluate(c),
        Command::Optimize(c) => cmd_optimize(c),
        Command::Bench(c) => cmd_bench(c),
        Command::Convert(c) => cmd_convert(c),
    }
}

fn load_working(path: &Path, pre: &Preprocess) -> Result<GrayImage> {
    log::info!("{}: scaling decoded samples to the byte range", path.display());
    pre.load(path)
}

fn cmd_score(c: ScoreCmd) -> Result<()> {
    let measure = c.measure.resolve()?;
    let pre = Preprocess {
        grayscale: c.pipeline.gray,
        normalize: c.pipeline.normalize,
        crop: c.pipeline.crop,
    };
    let reference = load_working(&c.reference, &pre)?;
    let distorted = load_working(&c.distorted, &pre)?;
    let score = match (&measure, &c.maps) {
        (Measure::HaarPsi(params), Some(dir)) => {
            let result = haarpsi_score(&reference, &distorted, params)?;
            std::fs::create_dir_all(dir).map_err(|e| IqaError::io(dir, e))?;
            for (i, map) in result.hs_maps.iter().enumerate() {
                write_map(map, &dir.join(format!("hs_{}.png", i + 1)))?;
            }
            for (i, map) in result.weight_maps.iter().enumerate() {
                write_map(map, &dir.join(format!("w_{}.png", i + 1)))?;
            }
            result.score
        }
        (_, Some(_)) => return Err(IqaError::param("--maps needs a haarpsi measure")),
        (m, None) => m.evaluate(&reference, &distorted)?,
    };
    println!("{} {}", measure.name(), fmt6(score));
    Ok(())
}

/// Min-max scales a map to the full 16-bit range.
fn write_map(map: &ResponseMap, path: &Path) -> Result<()> {
    let (lo, hi) = map
        .data()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
    let span = hi - lo;
    let data = map
        .data()
        .iter()
        .map(|v| if span > 0.0 { (v - lo) / span } else { 0.0 })
        .collect();
    let img = GrayImage::new(map.width(), map.height(), data, DynamicRange::Unit)?;
    save_gray(&img, path, BitDepth::Sixteen)
}

fn cmd_batch(c: BatchCmd) -> Result<()> {
    let measure = c.measure.resolve()?;
    let manifest = load_manifest(&c.manifest)?;
    let options = ScoreOptions {
        threads: threads(c.threads)?,
        skip_errors: c.skip_errors,
    };
    let table = score_dataset(&manifest, &measure, &options)?;
    table.write_csv(&c.out)?;
    Ok(())
}

fn cmd_evaluate(c: EvaluateCmd) -> Result<()> {
    let scores = ScoreTable::read_csv(&c.scores)?;
    let ratings = RatingMatrix::load_csv(&c.ratings)?;
    let report = evaluate(&scores, &ratings)?;
    let mut line = format!(
        "SRCC={} KRCC={} n={}",
        fmt6(report.abs_srcc()),
        fmt6(report.abs_krcc()),
        report.n
    );
    if report.srcc < 0.0 || report.krcc < 0.0 {
        line.push_str(" sign=negative");
    }
    println!("{line}");
    let mut caveat = None;
    for path in &c.against {
        let other = ScoreTable::read_csv(path)?;
        for entry in compare_measures(&scores, &other, &ratings, c.test)? {
            println!(
                "{} {} vs {}: statistic={} p={} flag={}",
                entry.statistic,
                entry.test.name(),
                entry.against,
                fmt6(entry.outcome.statistic),
                fmt6(entry.outcome.p),
                entry.verdict
            );
            caveat = caveat.or(entry.caveat);
        }
    }
    if !c.against.is_empty() {
        println!("note: normal-theory p-values are approximate for rank correlations");
    }
    if let Some(note) = caveat {
        println!("caveat: {note}");
    }
    Ok(())
}

fn cmd_optimize(c: OptimizeCmd) -> Result<()> {
    let threads = threads(c.threads)?;
    let mut datasets = Vec::with_capacity(c.manifests.len());
    for path in &c.manifests {
        let manifest = load_manifest(path)?;
        datasets.push(GridDataset::from_manifest(
            &manifest,
            !c.no_subsample,
            c.padding,
            threads,
        )?);
    }
    let options = GridOptions {
        threads,
        selection: if c.select_rounded {
            Selection::Rounded4
        } else {
            Selection::FullPrecision
        },
    };
    let surface = grid_search(&datasets, &c.c_grid, &c.alpha_grid, &options)?;
    if let Some(out) = &c.out {
        surface.export(out)?;
    }
    // Reported correlations are rounded to 4 decimals.
    for (name, v) in surface.best_per_dataset() {
        println!("dataset={name} srcc={}", fmt6(round4(v)));
    }
    println!(
        "argmax C={} alpha={} mean_srcc={}",
        surface.best_c(),
        surface.best_alpha(),
        fmt6(round4(surface.best_mean()))
    );
    Ok(())
}

fn cmd_bench(c: BenchCmd) -> Result<()> {
    let measure = c.measure.resolve()?;
    let manifest = load_manifest(&c.manifest)?;
    let report = benchmark(&manifest, &measure, c.reps, threads(c.threads)?)?;
    if c.verbose {
        for (i, run) in report.runs.iter().enumerate() {
            println!(
                "run={} decode_s={} score_s={} total_s={}",
                i + 1,
                fmt6(run.decode_seconds),
                fmt6(run.score_seconds),
                fmt6(run.total_seconds())
            );
        }
    }
    println!(
        "measure={} images={} decode_s={} score_s={} total_s={} threads={} reps={}",
        report.measure,
        report.images,
        fmt6(report.best.decode_seconds),
        fmt6(report.best.score_seconds),
        fmt6(report.best.total_seconds()),
        report.threads,
        report.repetitions
    );
    Ok(())
}

fn cmd_convert(c: ConvertCmd) -> Result<()> {
    let loaded = imgio::load_image(&c.input)?;
    let depth = c.depth.unwrap_or(loaded.bit_depth);
    let p = &c.pipeline;
    let gray = match loaded.raster {
        Raster::Rgb(rgb) if p.gray => imgio::rgb_to_gray(&rgb),
        Raster::Gray(g) => g,
        Raster::Rgb(rgb) => {
            if p.normalize || c.byte || p.crop.is_some() {
                return Err(IqaError::param(
                    "--normalize, --byte and --crop need --gray for color input",
                ));
            }
            return save_rgb(&rgb, &c.output, depth);
        }
    };
    let gray = if p.normalize {
        imgio::mat2gray_normalize(&gray)
    } else {
        gray
    };
    let gray = if c.byte {
        imgio::to_byte_range(&gray)?
    } else {
        gray
    };
    let gray = match &p.crop {
        Some(rect) => imgio::crop(&gray, rect)?,
        None => gray,
    };
    save_gray(&gray, &c.output, depth)
}
