//! Seeded degradation masks: random sampling, text overlays, and the fixed
//! lattice used for interpolation experiments.
//!
//! Masks drop whole pixels, so a missing pixel is missing in every channel.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgcore::{Image, Mask};
use crate::rng::SplitMix64;

/// Which degradation to produce. Only the fields of the chosen variant are read.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum DegradeSpec {
    Random { missing_rate: f64, seed: u64 },
    Text { text_mask_path: String },
    Grid { factor: usize },
}

/// Marks exactly `round(missing_rate * width * height)` pixels missing.
///
/// The missing set is the prefix of a partial Fisher-Yates shuffle of the
/// raster indices driven by [`SplitMix64`] seeded with `seed`.
pub fn random_mask(width: usize, height: usize, missing_rate: f64, seed: u64) -> Result<Mask> {
    if !(0.0..=1.0).contains(&missing_rate) {
        return Err(Error::InvalidParameter(format!(
            "missing rate must lie in [0, 1], got {missing_rate}"
        )));
    }
    let total = width * height;
    let missing = ((missing_rate * total as f64).round() as usize).min(total);

    let mut rng = SplitMix64::new(seed);
    let mut order: Vec<usize> = (0..total).collect();
    let mut known = vec![true; total];
    for i in 0..missing {
        let j = i + rng.below((total - i) as u64) as usize;
        order.swap(i, j);
        known[order[i]] = false;
    }
    Mask::from_vec(width, height, known)
}

/// Text strokes (samples above 0.5) become the missing region.
pub fn text_mask(mask_img: &Image) -> Result<Mask> {
    if mask_img.channels() != 1 {
        return Err(Error::InvalidParameter(format!(
            "text mask must be grayscale, got {} channels",
            mask_img.channels()
        )));
    }
    let known = mask_img.data().iter().map(|&s| s <= 0.5).collect();
    Mask::from_vec(mask_img.width(), mask_img.height(), known)
}

/// Pixel `(r, c)` is known iff both coordinates are multiples of `factor`.
pub fn grid_mask(width: usize, height: usize, factor: usize) -> Result<Mask> {
    if factor < 2 {
        return Err(Error::InvalidParameter(format!("grid factor must be >= 2, got {factor}")));
    }
    Ok(Mask::from_fn(width, height, |r, c| r % factor == 0 && c % factor == 0))
}
