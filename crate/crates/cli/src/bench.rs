//! Directory benchmark: degrade every image at a fixed missing rate,
//! complete it with the default configuration and tabulate the metrics.
//!
//! Images whose file stem names a published test image are compared with the
//! published PSNR for that image and rate. The comparison is informational;
//! a +-2 dB band is reported but nothing fails on it.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use marlow_core::degrade::random_mask;
use marlow_core::quality::evaluate;
use marlow_core::{apply_mask, complete, load_image, save_image, SolverConfig};
use serde::{Deserialize, Serialize};

pub const CONTEXT_BAND_DB: f64 = 2.0;

/// Published PSNR (dB) by lower-case image name and missing rate in percent.
const PUBLISHED: &[(&str, u32, f64)] = &[
    ("house", 80, 34.70),
    ("lena", 80, 32.84),
    ("cameraman", 80, 25.49),
    ("pepper", 80, 32.59),
    ("peppers", 80, 32.59),
    ("castle", 80, 30.36),
    ("castle", 90, 26.55),
    ("woman", 80, 34.38),
    ("woman", 90, 30.12),
    ("soldier", 80, 30.78),
    ("soldier", 90, 26.34),
];

pub fn published_psnr(name: &str, missing_rate: f64) -> Option<f64> {
    let stem = name.to_ascii_lowercase();
    let pct = (missing_rate * 100.0).round() as u32;
    PUBLISHED.iter().find(|(n, r, _)| *n == stem && *r == pct).map(|&(_, _, v)| v)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchRow {
    pub image: String,
    pub channels: usize,
    pub missing_rate: f64,
    pub initial_psnr_db: f64,
    pub psnr_db: f64,
    pub ssim: f64,
    pub seconds: f64,
    pub published_psnr_db: Option<f64>,
}

impl BenchRow {
    pub fn delta_db(&self) -> Option<f64> {
        self.published_psnr_db.map(|p| self.psnr_db - p)
    }

    pub fn within_band(&self) -> Option<bool> {
        self.delta_db().map(|d| d.abs() <= CONTEXT_BAND_DB)
    }
}

pub fn list_images(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .and_then(|e| e.to_str())
                    .is_some_and(|e| matches!(e.to_ascii_lowercase().as_str(), "png" | "pgm" | "ppm"))
        })
        .collect();
    out.sort();
    Ok(out)
}

pub struct BenchOptions {
    pub missing_rate: f64,
    pub seed: u64,
    pub max_iter: Option<usize>,
    pub threads: usize,
    pub out_dir: PathBuf,
}

pub fn run_one(path: &Path, opts: &BenchOptions) -> Result<BenchRow> {
    let reference = load_image(path)?;
    let mask = random_mask(reference.width(), reference.height(), opts.missing_rate, opts.seed)?;
    let degraded = apply_mask(&reference, &mask, 0.0)?;
    let mut cfg = SolverConfig::for_channels(reference.channels());
    cfg.threads = opts.threads;
    if let Some(it) = opts.max_iter {
        cfg.max_iter = it;
    }
    let started = Instant::now();
    let (restored, trace) = complete(&degraded, &mask, &cfg, Some(&reference))?;
    let seconds = started.elapsed().as_secs_f64();
    let q = evaluate(&restored, &reference)?;

    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("image").to_string();
    save_image(&restored, opts.out_dir.join(format!("{stem}_restored.png")))?;
    Ok(BenchRow {
        published_psnr_db: published_psnr(&stem, opts.missing_rate),
        image: stem,
        channels: reference.channels(),
        missing_rate: opts.missing_rate,
        initial_psnr_db: trace.initial_psnr_db.unwrap_or(f64::NAN),
        psnr_db: q.psnr_db,
        ssim: q.ssim,
        seconds,
    })
}

pub fn write_table<W: std::io::Write>(rows: &[BenchRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "image",
        "channels",
        "missing_rate",
        "initial_psnr_db",
        "psnr_db",
        "ssim",
        "seconds",
        "published_psnr_db",
        "delta_db",
        "within_2db",
    ])?;
    for r in rows {
        w.write_record([
            r.image.clone(),
            r.channels.to_string(),
            format!("{:.2}", r.missing_rate),
            crate::report::psnr_text(r.initial_psnr_db),
            crate::report::psnr_text(r.psnr_db),
            crate::report::ssim_text(r.ssim),
            format!("{:.1}", r.seconds),
            r.published_psnr_db.map(|p| format!("{p:.2}")).unwrap_or_default(),
            r.delta_db().map(|d| format!("{d:+.2}")).unwrap_or_default(),
            r.within_band().map(|b| b.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
