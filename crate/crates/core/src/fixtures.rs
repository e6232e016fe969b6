//! Deterministic synthetic scenes used by the test suites and benches.
//!
//! The committed PNGs under `fixtures/` are these scenes quantized to 8 bits.

use std::f64::consts::PI;

use crate::imgcore::Image;

/// Tiling of an 8x8 tile made of two diagonal waves; exactly periodic.
pub fn periodic_texture(size: usize) -> Image {
    Image::from_fn(size, size, 1, |r, c, _| {
        let (r, c) = ((r % 8) as f64, (c % 8) as f64);
        0.5 + 0.2 * (2.0 * PI * (r + c) / 8.0).sin() + 0.15 * (2.0 * PI * (r - c) / 8.0).cos()
    })
    .expect("square gray raster")
}

/// Thin bright lines of slope 1/2 over a horizontal ramp.
pub fn line_scene(size: usize) -> Image {
    let s = size as f64;
    Image::from_fn(size, size, 1, |r, c, _| {
        let (r, c) = (r as f64, c as f64);
        let on_line = (0..5).any(|k| {
            let d = (0.5 * c - r + 0.1875 * s * k as f64 - 0.15625 * s).abs() / 1.25f64.sqrt();
            d < 1.0
        });
        if on_line {
            0.85
        } else {
            0.3 + 0.2 * c / s
        }
    })
    .expect("square gray raster")
}

fn tile(r: usize, c: usize) -> f64 {
    let (r, c) = (r as f64, c as f64);
    0.5 + 0.22 * (2.0 * PI * (r + 2.0 * c) / 8.0).sin() + 0.14 * (2.0 * PI * (3.0 * r - c) / 8.0).cos()
        + if (r as usize + c as usize) % 8 < 2 { 0.1 } else { 0.0 }
}

fn edge_value(r: f64, c: f64, s: f64) -> f64 {
    let mut v = 0.25 + 0.1 * (r + c) / (2.0 * s);
    if 0.6 * c - r + 0.15 * s > 0.0 {
        v += 0.35;
    }
    let (dr, dc) = (r - 0.62 * s, c - 0.35 * s);
    if dr * dr + dc * dc < (0.18 * s) * (0.18 * s) {
        v = 0.85;
    }
    if c > 0.6 * s && ((r + 0.5 * c) as usize / 3).is_multiple_of(2) {
        v = 0.1 + 0.5 * v;
    }
    v.clamp(0.0, 1.0)
}

/// Color scene: a periodic texture under slanted edges, with channels that
/// share structure but differ in level and contrast.
pub fn color_scene(size: usize) -> Image {
    Image::from_fn(size, size, 3, |r, c, ch| {
        let t = tile(r % 8, c % 8);
        let e = edge_value(r as f64, c as f64, size as f64);
        let v = match ch {
            0 => 0.55 * t + 0.4 * e,
            1 => 0.35 * t + 0.55 * e + 0.05,
            _ => 0.7 * (1.0 - t) * 0.6 + 0.3 * e + 0.1,
        };
        v.clamp(0.0, 1.0)
    })
    .expect("square color raster")
}
