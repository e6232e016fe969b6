//! `marlow`: degrade, complete, evaluate and benchmark image-completion runs.

mod bench;
mod config;
mod manifest;
mod report;

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;
use marlow_core::degrade::{grid_mask, random_mask, text_mask, DegradeSpec};
use marlow_core::quality::evaluate;
use marlow_core::{apply_mask, complete, load_image, load_mask, save_image, save_mask, Mode, SolverConfig};

use crate::manifest::{absolute, BenchRun, CompleteRun, DegradeRun, RunManifest, TOOL_VERSION};
use crate::report::{MetricsJson, RunMetricsJson};

#[derive(Parser)]
#[command(name = "marlow", version, about = "Image completion from sparse samples")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Remove pixels from an image and write the degraded image, mask and manifest.
    Degrade(DegradeArgs),
    /// Restore the missing pixels of a degraded image.
    Complete(CompleteArgs),
    /// Report PSNR/SSIM of restored images against references.
    Evaluate(EvaluateArgs),
    /// Degrade and complete every image in a directory and tabulate the results.
    Bench(BenchArgs),
    /// Repeat a run recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Args)]
#[command(group(clap::ArgGroup::new("how").required(true).args(["rate", "text_mask", "grid"])))]
struct DegradeArgs {
    input: PathBuf,
    /// Fraction of pixels to remove at random.
    #[arg(long)]
    rate: Option<f64>,
    /// Seed for random removal.
    #[arg(long, default_value_t = 0, requires = "rate")]
    seed: u64,
    /// Grayscale overlay whose bright strokes are removed.
    #[arg(long)]
    text_mask: Option<PathBuf>,
    /// Keep only pixels whose row and column are multiples of this factor.
    #[arg(long)]
    grid: Option<usize>,
    /// Value written at missing pixels of the degraded image.
    #[arg(long, default_value_t = 0.0)]
    fill: f64,
    #[arg(short, long)]
    out_dir: PathBuf,
}

#[derive(Args, Default)]
struct SolverFlags {
    #[arg(long, value_parser = parse_mode)]
    mode: Option<Mode>,
    /// Patch side in pixels.
    #[arg(short = 'n', long)]
    patch_size: Option<usize>,
    /// Patches per group.
    #[arg(short = 'N', long)]
    group_size: Option<usize>,
    #[arg(long)]
    stride: Option<usize>,
    /// Block-matching search radius.
    #[arg(long)]
    radius: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    /// Singular-value threshold override.
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    iters: Option<usize>,
    /// Worker threads (0 = all cores).
    #[arg(long, env = "MARLOW_THREADS")]
    threads: Option<usize>,
    /// Planar AR offsets, e.g. `0,1`.
    #[arg(long, value_parser = config::parse_planar, allow_hyphen_values = true)]
    planar: Option<Vec<isize>>,
    /// Spatial AR offsets as `p:q` pairs, e.g. `-1:0,0:-1,0:1,1:0`.
    #[arg(long, value_parser = config::parse_spatial, allow_hyphen_values = true)]
    spatial: Option<Vec<(isize, isize)>>,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse().map_err(|e: marlow_core::Error| e.to_string())
}

impl SolverFlags {
    fn into_overrides(self) -> config::Overrides {
        config::Overrides {
            mode: self.mode,
            patch_size: self.patch_size,
            group_size: self.group_size,
            stride: self.stride,
            radius: self.radius,
            alpha: self.alpha,
            mu: self.mu,
            tau: self.tau,
            iters: self.iters,
            threads: self.threads,
            planar: self.planar,
            spatial: self.spatial,
        }
    }
}

#[derive(Args)]
struct CompleteArgs {
    degraded: PathBuf,
    mask: PathBuf,
    /// Restored image path.
    #[arg(short, long)]
    output: PathBuf,
    /// Ground truth; enables the metrics file.
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Flat key = value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Metrics JSON path (default: next to the output).
    #[arg(long)]
    metrics: Option<PathBuf>,
    /// Manifest path (default: next to the output).
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverFlags,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Restored image, or a directory of them.
    restored: PathBuf,
    /// Reference image, or a directory with files of the same names.
    reference: PathBuf,
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    dir: PathBuf,
    #[arg(long, default_value_t = 0.8)]
    rate: f64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long, env = "MARLOW_THREADS", default_value_t = 0)]
    threads: usize,
    #[arg(short, long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct ReplayArgs {
    manifest: PathBuf,
    /// Write outputs here instead of the recorded locations (a directory for
    /// degrade runs, an image path for complete runs).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn sibling(output: &Path, suffix: &str) -> PathBuf {
    let stem = output.file_stem().and_then(|s| s.to_str()).unwrap_or("output");
    output.with_file_name(format!("{stem}.{suffix}.json"))
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    Ok(())
}

// =============================================================================
// degrade
// =============================================================================

fn cmd_degrade(args: DegradeArgs) -> Result<()> {
    let spec = if let Some(rate) = args.rate {
        DegradeSpec::Random { missing_rate: rate, seed: args.seed }
    } else if let Some(p) = &args.text_mask {
        DegradeSpec::Text { text_mask_path: absolute(p).display().to_string() }
    } else if let Some(f) = args.grid {
        DegradeSpec::Grid { factor: f }
    } else {
        bail!("one of --rate, --text-mask or --grid is required");
    };
    run_degrade(&absolute(&args.input), &spec, args.fill, &args.out_dir)
}

fn run_degrade(input: &Path, spec: &DegradeSpec, fill: f64, out_dir: &Path) -> Result<()> {
    let img = load_image(input)?;
    let mask = match spec {
        DegradeSpec::Random { missing_rate, seed } => random_mask(img.width(), img.height(), *missing_rate, *seed)?,
        DegradeSpec::Text { text_mask_path } => {
            let overlay = load_image(text_mask_path)?;
            ensure!(
                overlay.width() == img.width() && overlay.height() == img.height(),
                "text mask is {}x{}, image is {}x{}",
                overlay.width(),
                overlay.height(),
                img.width(),
                img.height()
            );
            text_mask(&overlay)?
        }
        DegradeSpec::Grid { factor } => grid_mask(img.width(), img.height(), *factor)?,
    };
    let degraded = apply_mask(&img, &mask, fill)?;

    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let degraded_path = absolute(&out_dir.join("degraded.png"));
    let mask_path = absolute(&out_dir.join("mask.png"));
    save_image(&degraded, &degraded_path)?;
    save_mask(&mask, &mask_path)?;
    RunManifest::Degrade(DegradeRun {
        tool_version: TOOL_VERSION.into(),
        input: input.to_path_buf(),
        spec: spec.clone(),
        fill,
        degraded: degraded_path,
        mask: mask_path,
        missing_pixels: mask.missing_count(),
    })
    .write(&out_dir.join("manifest.json"))?;
    info!(
        "removed {} of {} pixels; wrote {}",
        mask.missing_count(),
        mask.width() * mask.height(),
        out_dir.display()
    );
    Ok(())
}

// =============================================================================
// complete
// =============================================================================

fn cmd_complete(args: CompleteArgs) -> Result<()> {
    let degraded = load_image(&args.degraded)?;
    let file = match &args.config {
        Some(p) => config::load(p)?,
        None => config::Overrides::default(),
    };
    let cfg = args.solver.into_overrides().over(file).apply(SolverConfig::for_channels(degraded.channels()));
    let metrics_path = args.reference.as_ref().map(|_| args.metrics.clone().unwrap_or_else(|| sibling(&args.output, "metrics")));
    let manifest_path = args.manifest.clone().unwrap_or_else(|| sibling(&args.output, "manifest"));
    run_complete(
        &absolute(&args.degraded),
        &absolute(&args.mask),
        args.reference.as_deref().map(absolute).as_deref(),
        cfg,
        &absolute(&args.output),
        metrics_path.as_deref().map(absolute).as_deref(),
        &manifest_path,
    )
}

fn run_complete(
    degraded_path: &Path,
    mask_path: &Path,
    reference_path: Option<&Path>,
    cfg: SolverConfig,
    output: &Path,
    metrics_path: Option<&Path>,
    manifest_path: &Path,
) -> Result<()> {
    let degraded = load_image(degraded_path)?;
    let mask = load_mask(mask_path)?;
    let reference = reference_path.map(load_image).transpose()?;
    cfg.validate()?;

    info!(
        "completing {} ({}x{}x{}, {} missing) in {} mode, {} iterations",
        degraded_path.display(),
        degraded.width(),
        degraded.height(),
        degraded.channels(),
        mask.missing_count(),
        cfg.mode.name(),
        cfg.max_iter
    );
    let started = Instant::now();
    let (restored, trace) = complete(&degraded, &mask, &cfg, reference.as_ref())?;
    for rec in &trace.iterations {
        match rec.psnr_db {
            Some(p) => info!("iteration {}: {} dB, {:.2}s", rec.iteration, report::psnr_text(p), rec.seconds),
            None => info!("iteration {}: {:.2}s", rec.iteration, rec.seconds),
        }
    }
    info!("done in {:.2}s", started.elapsed().as_secs_f64());

    ensure_parent(output)?;
    save_image(&restored, output)?;

    let metrics = match (&reference, metrics_path) {
        (Some(r), Some(path)) => {
            let q = evaluate(&restored, r)?;
            ensure_parent(path)?;
            let text = serde_json::to_string_pretty(&RunMetricsJson::new(&q, &trace))?;
            std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
            info!("PSNR {} dB, SSIM {}", report::psnr_text(q.psnr_db), report::ssim_text(q.ssim));
            Some(q)
        }
        _ => None,
    };

    ensure_parent(manifest_path)?;
    RunManifest::Complete(CompleteRun {
        tool_version: TOOL_VERSION.into(),
        degraded: degraded_path.to_path_buf(),
        mask: mask_path.to_path_buf(),
        reference: reference_path.map(Path::to_path_buf),
        config: cfg,
        output: output.to_path_buf(),
        metrics_path: metrics_path.map(Path::to_path_buf),
        metrics,
        trace,
    })
    .write(manifest_path)
}

// =============================================================================
// evaluate
// =============================================================================

fn cmd_evaluate(args: EvaluateArgs) -> Result<()> {
    if args.restored.is_dir() {
        ensure!(args.reference.is_dir(), "{} is a directory but {} is not", args.restored.display(), args.reference.display());
        let mut rows = Vec::new();
        for path in bench::list_images(&args.restored)? {
            let name = path.file_name().expect("listed file").to_owned();
            let reference = args.reference.join(&name);
            if !reference.is_file() {
                info!("skipping {}: no reference", path.display());
                continue;
            }
            let q = evaluate(&load_image(&path)?, &load_image(&reference)?)
                .with_context(|| format!("evaluating {}", path.display()))?;
            rows.push((name.to_string_lossy().into_owned(), q));
        }
        let mut buf = Vec::new();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(["image", "psnr_db", "ssim"])?;
            for (name, q) in &rows {
                w.write_record([name.clone(), report::psnr_text(q.psnr_db), report::ssim_text(q.ssim)])?;
            }
            w.flush()?;
        }
        match &args.csv {
            Some(p) => std::fs::write(p, &buf).with_context(|| format!("writing {}", p.display()))?,
            None => print!("{}", String::from_utf8(buf)?),
        }
        return Ok(());
    }

    let restored = load_image(&args.restored)?;
    let reference = load_image(&args.reference)?;
    let q = evaluate(&restored, &reference)?;
    let text = serde_json::to_string(&MetricsJson::from(&q))?;
    println!("{text}");
    if let Some(p) = &args.json {
        std::fs::write(p, text.clone() + "\n").with_context(|| format!("writing {}", p.display()))?;
    }
    if let Some(p) = &args.csv {
        let mut w = csv::Writer::from_path(p)?;
        w.write_record(["image", "psnr_db", "ssim"])?;
        w.write_record([
            args.restored.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
            report::psnr_text(q.psnr_db),
            report::ssim_text(q.ssim),
        ])?;
        w.flush()?;
    }
    Ok(())
}

// =============================================================================
// bench
// =============================================================================

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let images = bench::list_images(&args.dir)?;
    ensure!(!images.is_empty(), "no PNG/PGM/PPM images in {}", args.dir.display());
    std::fs::create_dir_all(&args.out_dir)?;
    let opts = bench::BenchOptions {
        missing_rate: args.rate,
        seed: args.seed,
        max_iter: args.iters,
        threads: args.threads,
        out_dir: args.out_dir.clone(),
    };
    let mut rows = Vec::new();
    for path in &images {
        info!("bench: {}", path.display());
        rows.push(bench::run_one(path, &opts).with_context(|| format!("benchmarking {}", path.display()))?);
    }
    let table = args.out_dir.join("table.csv");
    bench::write_table(&rows, std::fs::File::create(&table)?)?;
    bench::write_table(&rows, std::io::stdout().lock())?;
    RunManifest::Bench(BenchRun {
        tool_version: TOOL_VERSION.into(),
        input_dir: absolute(&args.dir),
        missing_rate: args.rate,
        seed: args.seed,
        max_iter: args.iters,
        threads: args.threads,
        table: absolute(&table),
        rows,
    })
    .write(&args.out_dir.join("manifest.json"))
}

// =============================================================================
// replay
// =============================================================================

fn cmd_replay(args: ReplayArgs) -> Result<()> {
    match RunManifest::read(&args.manifest)? {
        RunManifest::Degrade(run) => {
            let dir = match &args.output {
                Some(d) => d.clone(),
                None => run.degraded.parent().map(Path::to_path_buf).unwrap_or_default(),
            };
            run_degrade(&run.input, &run.spec, run.fill, &dir)
        }
        RunManifest::Complete(run) => {
            let output = args.output.as_deref().map(absolute).unwrap_or(run.output.clone());
            let metrics = run.reference.as_ref().map(|_| sibling(&output, "metrics"));
            let manifest = sibling(&output, "manifest");
            run_complete(&run.degraded, &run.mask, run.reference.as_deref(), run.config, &output, metrics.as_deref(), &manifest)
        }
        RunManifest::Bench(run) => cmd_bench(BenchArgs {
            dir: run.input_dir,
            rate: run.missing_rate,
            seed: run.seed,
            iters: run.max_iter,
            threads: run.threads,
            out_dir: args
                .output
                .or_else(|| run.table.parent().map(Path::to_path_buf))
                .context("manifest has no output directory")?,
        }),
    }
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match cli.command {
        Command::Degrade(a) => cmd_degrade(a),
        Command::Complete(a) => cmd_complete(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Replay(a) => cmd_replay(a),
    }
}
