//! Patch lattice, block matching, and the group extraction / aggregation
//! operators.
//!
//! A group matrix has one column per patch. Inside a column the samples of
//! channel 0 come first in row-major pixel order, then channel 1, then
//! channel 2, so a gray group is `n^2 x N` and a color group `3n^2 x N`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgcore::Image;

/// Top-left corner of a patch, `(row, col)`.
pub type Position = (usize, usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatchGeometry {
    /// Patch side in pixels.
    pub n: usize,
    /// Channels per patch.
    pub h: usize,
    /// Distance between neighbouring reference patches.
    pub stride: usize,
    /// Chebyshev radius of the block-matching window.
    pub search_radius: usize,
    /// Patches per group.
    pub group_size: usize,
}

impl PatchGeometry {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("patch size must be positive".into()));
        }
        if self.stride == 0 || self.stride > self.n {
            return Err(Error::InvalidParameter(format!(
                "stride must lie in 1..={}, got {}",
                self.n, self.stride
            )));
        }
        if self.group_size == 0 {
            return Err(Error::InvalidParameter("group size must be positive".into()));
        }
        if self.h != 1 && self.h != 3 {
            return Err(Error::InvalidParameter(format!("channels must be 1 or 3, got {}", self.h)));
        }
        Ok(())
    }

    #[inline]
    pub fn patch_len(&self) -> usize {
        self.n * self.n * self.h
    }
}

/// Similar-patch group; `coords[0]` is the reference patch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatchGroup {
    pub coords: Vec<Position>,
    pub n: usize,
    pub h: usize,
}

impl PatchGroup {
    pub fn reference(&self) -> Position {
        self.coords[0]
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }
}

fn lattice(extent: usize, n: usize, stride: usize) -> Vec<usize> {
    let last = extent - n;
    let mut starts: Vec<usize> = (0..=last).step_by(stride).collect();
    if starts.last() != Some(&last) {
        starts.push(last);
    }
    starts
}

/// Reference positions on the stride lattice, with a final row and column
/// clamped to the borders. Raster order.
pub fn enumerate_refs(width: usize, height: usize, geom: &PatchGeometry) -> Result<Vec<Position>> {
    geom.validate()?;
    if width < geom.n || height < geom.n {
        return Err(Error::TooSmall { width, height, min: geom.n });
    }
    let rows = lattice(height, geom.n, geom.stride);
    let cols = lattice(width, geom.n, geom.stride);
    Ok(rows.iter().flat_map(|&r| cols.iter().map(move |&c| (r, c))).collect())
}

fn check_image(img: &Image, geom: &PatchGeometry) -> Result<()> {
    if img.channels() != geom.h {
        return Err(Error::DimensionMismatch(format!(
            "geometry expects {} channels, image has {}",
            geom.h,
            img.channels()
        )));
    }
    if img.width() < geom.n || img.height() < geom.n {
        return Err(Error::TooSmall { width: img.width(), height: img.height(), min: geom.n });
    }
    Ok(())
}

/// Sum of squared differences between two `n x n x h` patches.
fn patch_ssd(img: &Image, a: Position, b: Position, n: usize) -> f64 {
    let ch = img.channels();
    let data = img.data();
    let span = n * ch;
    let mut acc = 0.0;
    for dr in 0..n {
        let ia = img.index(a.0 + dr, a.1, 0);
        let ib = img.index(b.0 + dr, b.1, 0);
        for (x, y) in data[ia..ia + span].iter().zip(&data[ib..ib + span]) {
            let d = x - y;
            acc += d * d;
        }
    }
    acc
}

/// Groups the `group_size` patches most similar to `reference`.
///
/// Candidates are every in-bounds position within `search_radius`
/// (Chebyshev) of the reference; when the window holds fewer than
/// `group_size` candidates the whole image is searched instead. The
/// reference always comes first. The remaining members are ordered by SSD
/// cost, ties broken by raster order.
pub fn match_patches(img: &Image, reference: Position, geom: &PatchGeometry) -> Result<PatchGroup> {
    geom.validate()?;
    check_image(img, geom)?;
    let (max_r, max_c) = (img.height() - geom.n, img.width() - geom.n);
    if reference.0 > max_r || reference.1 > max_c {
        return Err(Error::InvalidParameter(format!("reference {reference:?} out of bounds")));
    }

    let rad = geom.search_radius;
    let window = |lo: usize, hi: usize| (lo.saturating_sub(rad), (lo + rad).min(hi));
    let (mut r0, mut r1) = window(reference.0, max_r);
    let (mut c0, mut c1) = window(reference.1, max_c);
    let available = (max_r + 1) * (max_c + 1);
    if geom.group_size > available {
        return Err(Error::InvalidParameter(format!(
            "group size {} exceeds the {available} patch positions in the image",
            geom.group_size
        )));
    }
    if (r1 - r0 + 1) * (c1 - c0 + 1) < geom.group_size {
        (r0, r1, c0, c1) = (0, max_r, 0, max_c);
    }

    let mut scored: Vec<(f64, Position)> = Vec::with_capacity((r1 - r0 + 1) * (c1 - c0 + 1));
    for r in r0..=r1 {
        for c in c0..=c1 {
            if (r, c) != reference {
                scored.push((patch_ssd(img, reference, (r, c), geom.n), (r, c)));
            }
        }
    }
    let keep = geom.group_size - 1;
    let by_cost = |a: &(f64, Position), b: &(f64, Position)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if keep < scored.len() {
        scored.select_nth_unstable_by(keep, by_cost);
        scored.truncate(keep);
    }
    scored.sort_unstable_by(by_cost);

    let mut coords = Vec::with_capacity(geom.group_size);
    coords.push(reference);
    coords.extend(scored.into_iter().map(|(_, p)| p));
    Ok(PatchGroup { coords, n: geom.n, h: geom.h })
}

fn check_group(img: &Image, group: &PatchGroup) -> Result<()> {
    if img.channels() != group.h {
        return Err(Error::DimensionMismatch(format!(
            "group has {} channels, image has {}",
            group.h,
            img.channels()
        )));
    }
    for &(r, c) in &group.coords {
        if r + group.n > img.height() || c + group.n > img.width() {
            return Err(Error::InvalidParameter(format!(
                "patch at ({r}, {c}) of size {} leaves the {}x{} image",
                group.n,
                img.width(),
                img.height()
            )));
        }
    }
    Ok(())
}

/// Stacks the group's patches as columns (channel blocks, row-major pixels).
pub fn extract_group(img: &Image, group: &PatchGroup) -> Result<DMatrix<f64>> {
    check_group(img, group)?;
    let n = group.n;
    let nn = n * n;
    let mut m = DMatrix::zeros(nn * group.h, group.len());
    for (j, &(r0, c0)) in group.coords.iter().enumerate() {
        let mut col = m.column_mut(j);
        for ch in 0..group.h {
            for dr in 0..n {
                for dc in 0..n {
                    col[ch * nn + dr * n + dc] = img.get(r0 + dr, c0 + dc, ch);
                }
            }
        }
    }
    Ok(m)
}

/// Running sums and hit counts for overlapping patch estimates.
#[derive(Debug, Clone)]
pub struct Accumulator {
    width: usize,
    height: usize,
    channels: usize,
    sums: Vec<f64>,
    hits: Vec<u32>,
}

impl Accumulator {
    pub fn new(width: usize, height: usize, channels: usize) -> Self {
        Self {
            width,
            height,
            channels,
            sums: vec![0.0; width * height * channels],
            hits: vec![0; width * height],
        }
    }

    /// Adds every column of `estimate` at its group position.
    pub fn scatter(&mut self, group: &PatchGroup, estimate: &DMatrix<f64>) -> Result<()> {
        let n = group.n;
        let nn = n * n;
        if group.h != self.channels || estimate.nrows() != nn * group.h || estimate.ncols() != group.len() {
            return Err(Error::DimensionMismatch(format!(
                "estimate is {}x{}, group expects {}x{}",
                estimate.nrows(),
                estimate.ncols(),
                nn * group.h,
                group.len()
            )));
        }
        for (j, &(r0, c0)) in group.coords.iter().enumerate() {
            if r0 + n > self.height || c0 + n > self.width {
                return Err(Error::InvalidParameter(format!("patch at ({r0}, {c0}) leaves the canvas")));
            }
            let col = estimate.column(j);
            for dr in 0..n {
                for dc in 0..n {
                    let px = (r0 + dr) * self.width + c0 + dc;
                    self.hits[px] += 1;
                    for ch in 0..self.channels {
                        self.sums[px * self.channels + ch] += col[ch * nn + dr * n + dc];
                    }
                }
            }
        }
        Ok(())
    }

    /// Unnormalized canvas (sums only).
    pub fn sums(&self) -> Image {
        Image::from_vec(self.width, self.height, self.channels, self.sums.clone())
            .expect("canvas sized at construction")
    }

    /// Divides each sum by its hit count; fails on an uncovered pixel.
    pub fn finish(self) -> Result<Image> {
        let ch = self.channels;
        let mut data = self.sums;
        for (px, &hits) in self.hits.iter().enumerate() {
            if hits == 0 {
                return Err(Error::Uncovered { row: px / self.width, col: px % self.width });
            }
            let inv = f64::from(hits);
            for v in &mut data[px * ch..(px + 1) * ch] {
                *v /= inv;
            }
        }
        Image::from_vec(self.width, self.height, ch, data)
    }
}

/// Uniformly averages overlapping patch estimates, accumulating in the
/// order given so the result does not depend on how estimates were computed.
pub fn aggregate(
    estimates: &[(PatchGroup, DMatrix<f64>)],
    width: usize,
    height: usize,
    channels: usize,
) -> Result<Image> {
    let mut acc = Accumulator::new(width, height, channels);
    for (group, est) in estimates {
        acc.scatter(group, est)?;
    }
    acc.finish()
}
