//! Alternating-minimization driver.
//!
//! Each outer iteration regroups patches on the current estimate, fits the
//! multiplanar AR model per group, fuses its prediction with the group
//! itself through the nuclear-norm prox, averages the overlapping patch
//! estimates back onto the canvas and finally restores the observed pixels.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgcore::{reinsert_known, Image, Mask};
use crate::lowrank::joint_update_with;
use crate::mar::{build_support, predict, solve_ar, AROffsets};
use crate::patchwork::{enumerate_refs, extract_group, match_patches, Accumulator, PatchGeometry, PatchGroup, Position};
use crate::quality::evaluate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// AR prediction fused with the low-rank prox. Color input is processed
    /// with channel-stacked groups, as in [`Mode::ColorSimultaneous`].
    Marlow,
    /// Prox of the group alone, no AR term.
    LowrankOnly,
    /// Gray pipeline run independently on each color channel.
    ColorSeparate,
    /// Matching on `n x n x 3` patches, per-channel AR, prox on the stacked
    /// `3n^2 x N` matrix.
    ColorSimultaneous,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Marlow => "marlow",
            Mode::LowrankOnly => "lowrank-only",
            Mode::ColorSeparate => "separate",
            Mode::ColorSimultaneous => "simultaneous",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "marlow" => Ok(Mode::Marlow),
            "lowrank-only" | "lowrank_only" => Ok(Mode::LowrankOnly),
            "separate" | "color_separate" => Ok(Mode::ColorSeparate),
            "simultaneous" | "color_simultaneous" => Ok(Mode::ColorSimultaneous),
            other => Err(Error::InvalidParameter(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub patch_size: usize,
    pub stride: usize,
    pub group_size: usize,
    pub search_radius: usize,
    /// Tikhonov weight; the ridge term is `alpha^2 ||phi||^2`.
    pub alpha: f64,
    pub mu: f64,
    /// Replaces the SVT threshold `mu / (2 (mu + 1))` when set.
    pub tau_override: Option<f64>,
    pub max_iter: usize,
    pub offsets: AROffsets,
    pub mode: Mode,
    /// Worker threads; 0 uses the ambient rayon pool.
    pub threads: usize,
}

impl SolverConfig {
    /// 8x8 patches, 4-pixel overlap, 64 patches per group.
    pub fn gray() -> Self {
        Self {
            patch_size: 8,
            stride: 4,
            group_size: 64,
            search_radius: 20,
            alpha: 10f64.sqrt(),
            mu: 10.0,
            tau_override: None,
            max_iter: 8,
            offsets: AROffsets::default(),
            mode: Mode::Marlow,
            threads: 0,
        }
    }

    /// 5x5x3 patches, 1-pixel overlap, 75 patches per group.
    pub fn color() -> Self {
        Self { patch_size: 5, stride: 4, group_size: 75, mode: Mode::ColorSimultaneous, ..Self::gray() }
    }

    pub fn for_channels(channels: usize) -> Self {
        if channels == 3 {
            Self::color()
        } else {
            Self::gray()
        }
    }

    pub fn geometry(&self, channels: usize) -> PatchGeometry {
        PatchGeometry {
            n: self.patch_size,
            h: channels,
            stride: self.stride,
            search_radius: self.search_radius,
            group_size: self.group_size,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry(1).validate()?;
        self.offsets.validate()?;
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be >= 1".into()));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha must be finite and >= 0, got {}", self.alpha)));
        }
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::InvalidParameter(format!("mu must be finite and > 0, got {}", self.mu)));
        }
        if let Some(t) = self.tau_override {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::InvalidParameter(format!("tau must be finite and >= 0, got {t}")));
            }
        }
        Ok(())
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self::gray()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Against the reference, on the clamped estimate.
    pub psnr_db: Option<f64>,
    pub ssim: Option<f64>,
    /// Mean over groups of the RMS change `M - Y2` made by the group update.
    pub mean_group_residual: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub initial_psnr_db: Option<f64>,
    pub iterations: Vec<IterationRecord>,
}

impl IterationTrace {
    pub fn final_psnr_db(&self) -> Option<f64> {
        self.iterations.last().and_then(|r| r.psnr_db)
    }
}

// =============================================================================
// Initialization
// =============================================================================

#[derive(Clone, Copy)]
struct Nearest {
    before: Option<usize>,
    after: Option<usize>,
}

fn scan_line(known: impl Iterator<Item = bool>, len: usize) -> Vec<Nearest> {
    let flags: Vec<bool> = known.collect();
    let mut out = vec![Nearest { before: None, after: None }; len];
    let mut last = None;
    for i in 0..len {
        out[i].before = last;
        if flags[i] {
            last = Some(i);
        }
    }
    last = None;
    for i in (0..len).rev() {
        out[i].after = last;
        if flags[i] {
            last = Some(i);
        }
    }
    out
}

/// Fills missing pixels by inverse-distance weighting of the nearest known
/// pixel in each axis direction (weight `1 / distance`, absent directions
/// skipped). Pixels with no known pixel along their row or column are filled
/// in a later pass that treats the previous pass's output as known.
pub fn initialize(degraded: &Image, mask: &Mask) -> Result<Image> {
    mask.check(degraded)?;
    if mask.known_count() == 0 {
        return Err(Error::NoKnownPixels);
    }
    let (w, h, ch) = (degraded.width(), degraded.height(), degraded.channels());
    let mut out = degraded.clone();
    let mut known = mask.as_slice().to_vec();

    while known.iter().any(|&k| !k) {
        let rows: Vec<Vec<Nearest>> =
            (0..h).map(|r| scan_line((0..w).map(|c| known[r * w + c]), w)).collect();
        let cols: Vec<Vec<Nearest>> =
            (0..w).map(|c| scan_line((0..h).map(|r| known[r * w + c]), h)).collect();

        let prev = out.clone();
        let mut next_known = known.clone();
        let mut acc = vec![0.0; ch];
        for r in 0..h {
            for c in 0..w {
                if known[r * w + c] {
                    continue;
                }
                let mut support: [(Option<(usize, usize)>, usize); 4] = [(None, 0); 4];
                let row = rows[r][c];
                let col = cols[c][r];
                support[0] = (row.before.map(|cc| (r, cc)), row.before.map_or(0, |cc| c - cc));
                support[1] = (row.after.map(|cc| (r, cc)), row.after.map_or(0, |cc| cc - c));
                support[2] = (col.before.map(|rr| (rr, c)), col.before.map_or(0, |rr| r - rr));
                support[3] = (col.after.map(|rr| (rr, c)), col.after.map_or(0, |rr| rr - r));

                acc.fill(0.0);
                let mut weight = 0.0;
                for (pos, dist) in support {
                    if let Some((sr, sc)) = pos {
                        let wgt = 1.0 / dist as f64;
                        weight += wgt;
                        for (z, a) in acc.iter_mut().enumerate() {
                            *a += wgt * prev.get(sr, sc, z);
                        }
                    }
                }
                if weight > 0.0 {
                    for (z, a) in acc.iter().enumerate() {
                        out.set(r, c, z, a / weight);
                    }
                    next_known[r * w + c] = true;
                }
            }
        }
        known = next_known;
    }
    Ok(out)
}

// =============================================================================
// Iteration
// =============================================================================

struct GroupEstimate {
    group: PatchGroup,
    estimate: DMatrix<f64>,
    rms_change: f64,
}

fn estimate_group(img: &Image, reference: Position, cfg: &SolverConfig, use_ar: bool) -> Result<GroupEstimate> {
    let geom = cfg.geometry(img.channels());
    let group = match_patches(img, reference, &geom)?;
    let y2 = extract_group(img, &group)?;

    let estimate = if use_ar {
        let nn = group.n * group.n;
        let cols = group.len();
        let mut y1 = DMatrix::zeros(y2.nrows(), cols);
        for ch in 0..group.h {
            let block = y2.rows(ch * nn, nn);
            let target = DVector::from_iterator(nn * cols, block.column_iter().flat_map(|c| c.into_iter().copied()));
            let support = build_support(img, &group, &cfg.offsets, ch)?;
            let fit = solve_ar(&support, &target, cfg.alpha)?;
            let pred = predict(&support, &fit.phi)?;
            y1.rows_mut(ch * nn, nn).copy_from_slice(pred.as_slice());
        }
        joint_update_with(&y1, &y2, cfg.mu, cfg.tau_override)?
    } else {
        joint_update_with(&y2, &y2, cfg.mu, cfg.tau_override)?
    };
    let rms_change = ((&estimate - &y2).norm_squared() / y2.len() as f64).sqrt();
    Ok(GroupEstimate { group, estimate, rms_change })
}

/// One outer iteration on `current`; returns the aggregated, reinserted
/// estimate and the mean group residual.
fn iterate(current: &Image, observed: &Image, mask: &Mask, cfg: &SolverConfig, use_ar: bool) -> Result<(Image, f64)> {
    let geom = cfg.geometry(current.channels());
    let refs = enumerate_refs(current.width(), current.height(), &geom)?;
    let estimates: Vec<GroupEstimate> =
        refs.par_iter().map(|&r| estimate_group(current, r, cfg, use_ar)).collect::<Result<_>>()?;

    let mut acc = Accumulator::new(current.width(), current.height(), current.channels());
    let mut residual = 0.0;
    for est in &estimates {
        acc.scatter(&est.group, &est.estimate)?;
        residual += est.rms_change;
    }
    let mut next = acc.finish()?;
    reinsert_known(&mut next, observed, mask);
    Ok((next, residual / estimates.len() as f64))
}

fn check_inputs(degraded: &Image, mask: &Mask, reference: Option<&Image>) -> Result<()> {
    mask.check(degraded)?;
    if let Some(r) = reference {
        if !r.same_shape(degraded) {
            return Err(Error::DimensionMismatch("reference differs in shape from the degraded image".into()));
        }
    }
    Ok(())
}

fn run<F>(cfg: &SolverConfig, body: F) -> Result<(Image, IterationTrace)>
where
    F: FnOnce() -> Result<(Image, IterationTrace)> + Send,
{
    if cfg.threads == 0 {
        return body();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start {} worker threads: {e}", cfg.threads)))?;
    pool.install(body)
}

/// Restores `degraded` at the pixels `mask` marks missing.
///
/// Gray images accept [`Mode::Marlow`] and [`Mode::LowrankOnly`]; color
/// images accept every mode. The output is clamped to `[0, 1]` and equals
/// `degraded` at every known pixel.
pub fn complete(
    degraded: &Image,
    mask: &Mask,
    cfg: &SolverConfig,
    reference: Option<&Image>,
) -> Result<(Image, IterationTrace)> {
    cfg.validate()?;
    check_inputs(degraded, mask, reference)?;
    match (cfg.mode, degraded.channels()) {
        (Mode::ColorSeparate | Mode::ColorSimultaneous, c) if c != 3 => {
            return Err(Error::InvalidParameter(format!(
                "mode {} needs a 3-channel image, got {c}",
                cfg.mode.name()
            )))
        }
        _ => {}
    }
    run(cfg, || match cfg.mode {
        Mode::ColorSeparate => complete_separate(degraded, mask, cfg, reference),
        Mode::LowrankOnly => complete_joint(degraded, mask, cfg, reference, false),
        Mode::Marlow | Mode::ColorSimultaneous => complete_joint(degraded, mask, cfg, reference, true),
    })
}

/// [`complete`] restricted to 3-channel input.
pub fn complete_color(
    degraded: &Image,
    mask: &Mask,
    cfg: &SolverConfig,
    reference: Option<&Image>,
) -> Result<(Image, IterationTrace)> {
    if degraded.channels() != 3 {
        return Err(Error::InvalidParameter(format!(
            "color completion needs 3 channels, got {}",
            degraded.channels()
        )));
    }
    complete(degraded, mask, cfg, reference)
}

/// PSNR and, when the image is large enough for the window, SSIM.
fn trace_metrics(estimate: &Image, reference: Option<&Image>) -> Result<(Option<f64>, Option<f64>)> {
    let Some(reference) = reference else { return Ok((None, None)) };
    let clamped = estimate.clamped();
    match evaluate(&clamped, reference) {
        Ok(report) => Ok((Some(report.psnr_db), Some(report.ssim))),
        Err(Error::TooSmall { .. }) => Ok((Some(crate::quality::psnr(&clamped, reference)?), None)),
        Err(e) => Err(e),
    }
}

fn complete_joint(
    degraded: &Image,
    mask: &Mask,
    cfg: &SolverConfig,
    reference: Option<&Image>,
    use_ar: bool,
) -> Result<(Image, IterationTrace)> {
    let mut current = initialize(degraded, mask)?;
    let mut trace = IterationTrace { initial_psnr_db: trace_metrics(&current, reference)?.0, iterations: Vec::new() };
    for iteration in 1..=cfg.max_iter {
        let started = Instant::now();
        let (next, residual) = iterate(&current, degraded, mask, cfg, use_ar)?;
        current = next;
        let (psnr_db, ssim) = trace_metrics(&current, reference)?;
        trace.iterations.push(IterationRecord {
            iteration,
            psnr_db,
            ssim,
            mean_group_residual: residual,
            seconds: started.elapsed().as_secs_f64(),
        });
    }
    Ok((current.clamped(), trace))
}

fn complete_separate(
    degraded: &Image,
    mask: &Mask,
    cfg: &SolverConfig,
    reference: Option<&Image>,
) -> Result<(Image, IterationTrace)> {
    let planes: Vec<Image> = (0..degraded.channels()).map(|c| degraded.channel(c)).collect();
    let mut current: Vec<Image> = planes.iter().map(|p| initialize(p, mask)).collect::<Result<_>>()?;
    let mut trace = IterationTrace {
        initial_psnr_db: trace_metrics(&Image::merge_channels(&current)?, reference)?.0,
        iterations: Vec::new(),
    };
    for iteration in 1..=cfg.max_iter {
        let started = Instant::now();
        let mut residual = 0.0;
        for (plane, observed) in current.iter_mut().zip(&planes) {
            let (next, r) = iterate(plane, observed, mask, cfg, true)?;
            *plane = next;
            residual += r;
        }
        let (psnr_db, ssim) = trace_metrics(&Image::merge_channels(&current)?, reference)?;
        trace.iterations.push(IterationRecord {
            iteration,
            psnr_db,
            ssim,
            mean_group_residual: residual / planes.len() as f64,
            seconds: started.elapsed().as_secs_f64(),
        });
    }
    Ok((Image::merge_channels(&current)?.clamped(), trace))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initialize_identity_when_nothing_missing() {
        let img = Image::from_fn(5, 4, 3, |r, c, z| (r + c + z) as f64 / 12.0).unwrap();
        assert_eq!(initialize(&img, &Mask::all_known(5, 4)).unwrap(), img);
    }

    #[test]
    fn initialize_single_hole() {
        let img = Image::filled(3, 3, 1, 0.6).unwrap();
        let mask = Mask::from_fn(3, 3, |r, c| (r, c) != (1, 1));
        let mut deg = img.clone();
        deg.set(1, 1, 0, 0.0);
        assert!((initialize(&deg, &mask).unwrap().get(1, 1, 0) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn initialize_row_idw() {
        let img = Image::from_vec(4, 1, 1, vec![1.0, 0.0, 0.0, 4.0]).unwrap();
        let mask = Mask::from_vec(4, 1, vec![true, false, false, true]).unwrap();
        let out = initialize(&img, &mask).unwrap();
        assert!((out.get(0, 1, 0) - 2.0).abs() < 1e-14);
        assert!((out.get(0, 2, 0) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn initialize_grid_is_bilinear_for_factor_two() {
        let img = Image::from_fn(9, 9, 1, |r, c, _| 0.1 + 0.05 * r as f64 + 0.03 * c as f64).unwrap();
        let mask = crate::degrade::grid_mask(9, 9, 2).unwrap();
        let out = initialize(&img, &mask).unwrap();
        for (a, b) in out.data().iter().zip(img.data()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn initialize_rejects_empty_mask() {
        let img = Image::filled(3, 3, 1, 0.0).unwrap();
        let mask = Mask::from_fn(3, 3, |_, _| false);
        assert!(matches!(initialize(&img, &mask), Err(Error::NoKnownPixels)));
    }

    #[test]
    fn config_defaults() {
        let g = SolverConfig::gray();
        assert_eq!((g.patch_size, g.stride, g.group_size), (8, 4, 64));
        assert_eq!(g.alpha, 10f64.sqrt());
        assert_eq!(g.mu, 10.0);
        let c = SolverConfig::color();
        assert_eq!((c.patch_size, c.stride, c.group_size), (5, 4, 75));
        let mut bad = g.clone();
        bad.max_iter = 0;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn mode_parsing() {
        for m in [Mode::Marlow, Mode::LowrankOnly, Mode::ColorSeparate, Mode::ColorSimultaneous] {
            assert_eq!(m.name().parse::<Mode>().unwrap(), m);
        }
        assert!("nope".parse::<Mode>().is_err());
    }

    #[test]
    fn color_modes_need_color_input() {
        let img = Image::filled(16, 16, 1, 0.5).unwrap();
        let mask = Mask::all_known(16, 16);
        let cfg = SolverConfig { mode: Mode::ColorSeparate, ..SolverConfig::gray() };
        assert!(complete(&img, &mask, &cfg, None).is_err());
        assert!(complete_color(&img, &mask, &SolverConfig::color(), None).is_err());
    }
}
