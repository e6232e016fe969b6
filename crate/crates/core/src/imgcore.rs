//! Image and mask rasters plus 8-bit file I/O.
//!
//! Samples are stored as `f64` in `[0, 1]`, row-major with channels
//! interleaved. Files are decoded through the `image` crate; only 8-bit
//! grayscale and 8-bit RGB rasters are accepted.

use std::path::Path;

use image::{DynamicImage, GrayImage, RgbImage};

use crate::error::{Error, Result};

/// A dense raster with 1 (gray) or 3 (RGB) channels.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
}

impl Image {
    /// Builds an image from interleaved samples.
    ///
    /// Samples outside `[0, 1]` are accepted here because solver intermediates
    /// are unclamped; use [`Image::clamped`] before handing images to callers
    /// that require the range.
    pub fn from_vec(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidParameter(format!(
                "channels must be 1 or 3, got {channels}"
            )));
        }
        if data.len() != width * height * channels {
            return Err(Error::DimensionMismatch(format!(
                "{width}x{height}x{channels} image needs {} samples, got {}",
                width * height * channels,
                data.len()
            )));
        }
        Ok(Self { width, height, channels, data })
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: f64) -> Result<Self> {
        Self::from_vec(width, height, channels, vec![value; width * height * channels])
    }

    /// Builds an image by evaluating `f(row, col, channel)` at every sample.
    pub fn from_fn<F>(width: usize, height: usize, channels: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize, usize) -> f64,
    {
        let mut data = Vec::with_capacity(width * height * channels);
        for r in 0..height {
            for c in 0..width {
                for ch in 0..channels {
                    data.push(f(r, c, ch));
                }
            }
        }
        Self::from_vec(width, height, channels, data)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.channels
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn index(&self, row: usize, col: usize, ch: usize) -> usize {
        (row * self.width + col) * self.channels + ch
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize, ch: usize) -> f64 {
        self.data[self.index(row, col, ch)]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, ch: usize, value: f64) {
        let i = self.index(row, col, ch);
        self.data[i] = value;
    }

    pub fn same_shape(&self, other: &Image) -> bool {
        self.width == other.width && self.height == other.height && self.channels == other.channels
    }

    /// Copy of one channel as a single-channel image.
    pub fn channel(&self, ch: usize) -> Image {
        assert!(ch < self.channels, "channel {ch} out of range");
        let data = self.data.iter().skip(ch).step_by(self.channels).copied().collect();
        Image { width: self.width, height: self.height, channels: 1, data }
    }

    /// Interleaves single-channel planes into one image.
    pub fn merge_channels(planes: &[Image]) -> Result<Image> {
        let first = planes
            .first()
            .ok_or_else(|| Error::InvalidParameter("no channel planes given".into()))?;
        if planes.iter().any(|p| p.channels != 1 || p.width != first.width || p.height != first.height) {
            return Err(Error::DimensionMismatch("channel planes differ in shape".into()));
        }
        let (w, h, k) = (first.width, first.height, planes.len());
        let mut data = vec![0.0; w * h * k];
        for (ch, plane) in planes.iter().enumerate() {
            for (px, &v) in plane.data.iter().enumerate() {
                data[px * k + ch] = v;
            }
        }
        Image::from_vec(w, h, k, data)
    }

    /// Copy with every sample clamped into `[0, 1]`.
    pub fn clamped(&self) -> Image {
        let data = self.data.iter().map(|v| v.clamp(0.0, 1.0)).collect();
        Image { data, ..*self }
    }

    /// Samples quantized with round-half-up and clamped to `0..=255`.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.data.iter().map(|&s| quantize(s)).collect()
    }
}

/// `round(s * 255)` with halves rounded up, clamped into a byte.
#[inline]
pub fn quantize(sample: f64) -> u8 {
    let v = (sample * 255.0 + 0.5).floor();
    if v.is_nan() {
        0
    } else {
        v.clamp(0.0, 255.0) as u8
    }
}

/// Boolean raster of observed pixels; `true` means known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    width: usize,
    height: usize,
    known: Vec<bool>,
}

impl Mask {
    pub fn from_vec(width: usize, height: usize, known: Vec<bool>) -> Result<Self> {
        if known.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{width}x{height} mask needs {} entries, got {}",
                width * height,
                known.len()
            )));
        }
        Ok(Self { width, height, known })
    }

    pub fn all_known(width: usize, height: usize) -> Self {
        Self { width, height, known: vec![true; width * height] }
    }

    pub fn from_fn<F: FnMut(usize, usize) -> bool>(width: usize, height: usize, mut f: F) -> Self {
        let mut known = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                known.push(f(r, c));
            }
        }
        Self { width, height, known }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn is_known(&self, row: usize, col: usize) -> bool {
        self.known[row * self.width + col]
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.known
    }

    pub fn known_count(&self) -> usize {
        self.known.iter().filter(|&&k| k).count()
    }

    pub fn missing_count(&self) -> usize {
        self.known.len() - self.known_count()
    }

    pub fn matches(&self, img: &Image) -> bool {
        self.width == img.width() && self.height == img.height()
    }

    pub(crate) fn check(&self, img: &Image) -> Result<()> {
        if self.matches(img) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "mask is {}x{}, image is {}x{}",
                self.width,
                self.height,
                img.width(),
                img.height()
            )))
        }
    }

    /// 8-bit mask encoding: 255 known, 0 missing.
    pub fn to_image(&self) -> Image {
        let data = self.known.iter().map(|&k| if k { 1.0 } else { 0.0 }).collect();
        Image { width: self.width, height: self.height, channels: 1, data }
    }
}

/// Returns `img` at known pixels and `fill` at missing ones, in every channel.
pub fn apply_mask(img: &Image, mask: &Mask, fill: f64) -> Result<Image> {
    mask.check(img)?;
    let ch = img.channels();
    let mut out = img.clone();
    for (px, &known) in mask.as_slice().iter().enumerate() {
        if !known {
            out.data[px * ch..(px + 1) * ch].fill(fill);
        }
    }
    Ok(out)
}

/// Overwrites the known pixels of `dst` with those of `src`.
pub(crate) fn reinsert_known(dst: &mut Image, src: &Image, mask: &Mask) {
    debug_assert!(dst.same_shape(src));
    let ch = dst.channels();
    for (px, &known) in mask.as_slice().iter().enumerate() {
        if known {
            let span = px * ch..(px + 1) * ch;
            dst.data[span.clone()].copy_from_slice(&src.data[span]);
        }
    }
}

// =============================================================================
// File I/O
// =============================================================================

/// Decodes an 8-bit grayscale or RGB raster (PNG, PGM, PPM).
pub fn load_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let decoded = image::ImageReader::open(path)
        .map_err(|e| Error::Read { path: path.into(), source: image::ImageError::IoError(e) })?
        .with_guessed_format()
        .map_err(|e| Error::Read { path: path.into(), source: image::ImageError::IoError(e) })?
        .decode()
        .map_err(|source| Error::Read { path: path.into(), source })?;

    let (w, h) = (decoded.width() as usize, decoded.height() as usize);
    let (channels, bytes) = match decoded {
        DynamicImage::ImageLuma8(buf) => (1, buf.into_raw()),
        DynamicImage::ImageRgb8(buf) => (3, buf.into_raw()),
        other => {
            return Err(Error::UnsupportedFormat {
                path: path.into(),
                detail: format!("{:?}; expected 8-bit grayscale or RGB", other.color()),
            })
        }
    };
    let data = bytes.into_iter().map(|b| f64::from(b) / 255.0).collect();
    Image::from_vec(w, h, channels, data)
}

/// Encodes with round-half-up quantization; the format follows the extension.
pub fn save_image(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let (w, h) = (img.width() as u32, img.height() as u32);
    let bytes = img.to_bytes();
    let dynamic = match img.channels() {
        1 => DynamicImage::ImageLuma8(GrayImage::from_raw(w, h, bytes).expect("buffer sized by Image")),
        _ => DynamicImage::ImageRgb8(RgbImage::from_raw(w, h, bytes).expect("buffer sized by Image")),
    };
    dynamic.save(path).map_err(|source| Error::Write { path: path.into(), source })
}

/// Reads a mask file: byte 0 is missing, anything else is known.
pub fn load_mask(path: impl AsRef<Path>) -> Result<Mask> {
    let path = path.as_ref();
    let img = load_image(path)?;
    if img.channels() != 1 {
        return Err(Error::UnsupportedFormat {
            path: path.into(),
            detail: "mask files must be 8-bit grayscale".into(),
        });
    }
    let known = img.data().iter().map(|&s| s > 0.0).collect();
    Mask::from_vec(img.width(), img.height(), known)
}

pub fn save_mask(mask: &Mask, path: impl AsRef<Path>) -> Result<()> {
    save_image(&mask.to_image(), path)
}
