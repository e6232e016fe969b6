//! PSNR and SSIM.
//!
//! PSNR uses the joint MSE over all samples on the 0-255 scale, without
//! quantizing. SSIM uses an 11x11 Gaussian window (sigma 1.5) over valid
//! positions only, K1 = 0.01, K2 = 0.03 and a dynamic range of 1; color
//! SSIM is the mean of the per-channel values.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgcore::Image;

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    /// `f64::INFINITY` for identical images.
    pub psnr_db: f64,
    pub ssim: f64,
    pub per_channel: Option<Vec<ChannelQuality>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelQuality {
    pub psnr_db: f64,
    pub ssim: f64,
}

fn check_pair(a: &Image, b: &Image) -> Result<()> {
    if a.same_shape(b) {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!(
            "{}x{}x{} vs {}x{}x{}",
            a.width(),
            a.height(),
            a.channels(),
            b.width(),
            b.height(),
            b.channels()
        )))
    }
}

fn psnr_from_sse(sse: f64, count: usize) -> f64 {
    let mse = sse / count as f64;
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (255.0 * 255.0 / mse).log10()
    }
}

pub fn psnr(a: &Image, b: &Image) -> Result<f64> {
    check_pair(a, b)?;
    let sse: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| {
            let d = (x - y) * 255.0;
            d * d
        })
        .sum();
    Ok(psnr_from_sse(sse, a.data().len()))
}

/// Normalized 1-D Gaussian taps; the 2-D window is their outer product.
pub fn gaussian_taps() -> [f64; SSIM_WINDOW] {
    let mut taps = [0.0; SSIM_WINDOW];
    let half = (SSIM_WINDOW / 2) as f64;
    for (i, t) in taps.iter_mut().enumerate() {
        let x = i as f64 - half;
        *t = (-x * x / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= sum);
    taps
}

/// Valid-mode separable filtering of a `w x h` plane.
fn filter_valid(plane: &[f64], w: usize, h: usize, taps: &[f64]) -> Vec<f64> {
    let k = taps.len();
    let (ow, oh) = (w - k + 1, h - k + 1);
    let mut rows = vec![0.0; ow * h];
    for r in 0..h {
        let src = &plane[r * w..(r + 1) * w];
        for c in 0..ow {
            rows[r * ow + c] = taps.iter().zip(&src[c..c + k]).map(|(t, v)| t * v).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for r in 0..oh {
        for c in 0..ow {
            out[r * ow + c] = taps.iter().enumerate().map(|(i, t)| t * rows[(r + i) * ow + c]).sum();
        }
    }
    out
}

fn ssim_plane(x: &[f64], y: &[f64], w: usize, h: usize) -> f64 {
    let taps = gaussian_taps();
    let c1 = (SSIM_K1 * 1.0) * (SSIM_K1 * 1.0);
    let c2 = (SSIM_K2 * 1.0) * (SSIM_K2 * 1.0);
    let sq = |v: &[f64]| v.iter().map(|a| a * a).collect::<Vec<_>>();
    let xy: Vec<f64> = x.iter().zip(y).map(|(a, b)| a * b).collect();

    let mu_x = filter_valid(x, w, h, &taps);
    let mu_y = filter_valid(y, w, h, &taps);
    let e_xx = filter_valid(&sq(x), w, h, &taps);
    let e_yy = filter_valid(&sq(y), w, h, &taps);
    let e_xy = filter_valid(&xy, w, h, &taps);

    let total: f64 = (0..mu_x.len())
        .map(|i| {
            let (mx, my) = (mu_x[i], mu_y[i]);
            let vx = e_xx[i] - mx * mx;
            let vy = e_yy[i] - my * my;
            let cov = e_xy[i] - mx * my;
            ((2.0 * mx * my + c1) * (2.0 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2))
        })
        .sum();
    total / mu_x.len() as f64
}

pub fn ssim(a: &Image, b: &Image) -> Result<f64> {
    Ok(evaluate(a, b)?.ssim)
}

/// PSNR and SSIM, with a per-channel breakdown for color images.
pub fn evaluate(a: &Image, b: &Image) -> Result<QualityReport> {
    check_pair(a, b)?;
    let (w, h) = (a.width(), a.height());
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(Error::TooSmall { width: w, height: h, min: SSIM_WINDOW });
    }
    let channels: Vec<ChannelQuality> = (0..a.channels())
        .map(|ch| {
            let (x, y) = (a.channel(ch), b.channel(ch));
            ChannelQuality {
                psnr_db: psnr(&x, &y).expect("shapes checked"),
                ssim: ssim_plane(x.data(), y.data(), w, h),
            }
        })
        .collect();
    let ssim = channels.iter().map(|c| c.ssim).sum::<f64>() / channels.len() as f64;
    Ok(QualityReport {
        psnr_db: psnr(a, b)?,
        ssim,
        per_channel: (channels.len() > 1).then_some(channels),
    })
}
