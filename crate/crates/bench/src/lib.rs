//! Shared inputs for the criterion benchmarks.

use marlow_core::degrade::random_mask;
use marlow_core::fixtures::periodic_texture;
use marlow_core::{apply_mask, Image, Mask};

/// A 64x64 texture with 80% of its pixels removed.
pub fn degraded_texture() -> (Image, Mask, Image) {
    let truth = periodic_texture(64);
    let mask = random_mask(64, 64, 0.8, 7).expect("valid rate");
    let degraded = apply_mask(&truth, &mask, 0.0).expect("same shape");
    (degraded, mask, truth)
}
