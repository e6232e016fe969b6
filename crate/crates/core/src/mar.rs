//! Multiplanar autoregressive model over a patch group.
//!
//! The group is viewed as a cube of `N` stacked `n x n` planes (one per
//! patch, in group order). Every cube pixel is predicted from supporting
//! pixels at a planar offset `m` (another plane of the cube) and a spatial
//! offset `(p, q)`, with one weight per offset shared across the cube. The
//! weights come from a Tikhonov-regularized least-squares fit.
//!
//! Row `l * n^2 + j * n + k` of the support matrix belongs to pixel `(j, k)`
//! of plane `l`, which is the column-major flattening of one channel block
//! of the group matrix from [`crate::patchwork::extract_group`].

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgcore::Image;
use crate::patchwork::PatchGroup;

/// Planar and spatial offset sets of the AR model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AROffsets {
    pub planar: Vec<isize>,
    pub spatial: Vec<(isize, isize)>,
}

impl Default for AROffsets {
    /// Same plane and next plane, 3x3 spatial neighbourhood: 17 weights.
    fn default() -> Self {
        let spatial = (-1..=1).flat_map(|p| (-1..=1).map(move |q| (p, q))).collect();
        Self { planar: vec![0, 1], spatial }
    }
}

impl AROffsets {
    /// Offset triples `(m, p, q)` in column order, without `(0, 0, 0)`.
    pub fn combos(&self) -> Vec<(isize, isize, isize)> {
        self.planar
            .iter()
            .flat_map(|&m| self.spatial.iter().map(move |&(p, q)| (m, p, q)))
            .filter(|&t| t != (0, 0, 0))
            .collect()
    }

    pub fn order(&self) -> usize {
        self.combos().len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.order() == 0 {
            return Err(Error::InvalidParameter("AR model needs at least one non-null offset".into()));
        }
        Ok(())
    }
}

/// Fitted AR weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ARSolution {
    pub phi: DVector<f64>,
    /// `||target - support * phi||_2`
    pub residual_norm: f64,
}

/// Support matrix of one channel: `n^2 N` rows, one column per offset.
///
/// Plane indices wrap cyclically over the group, spatial coordinates are
/// clamped to the image.
pub fn build_support(img: &Image, group: &PatchGroup, offsets: &AROffsets, channel: usize) -> Result<DMatrix<f64>> {
    if channel >= img.channels() {
        return Err(Error::InvalidParameter(format!(
            "channel {channel} out of range for a {}-channel image",
            img.channels()
        )));
    }
    offsets.validate()?;
    let n = group.n;
    let planes = group.len() as isize;
    let max_r = img.height() as isize - 1;
    let max_c = img.width() as isize - 1;
    let combos = offsets.combos();

    let mut support = DMatrix::zeros(n * n * group.len(), combos.len());
    for (col, &(m, p, q)) in combos.iter().enumerate() {
        let mut out = support.column_mut(col);
        let mut row = 0;
        for l in 0..planes {
            let (pr, pc) = group.coords[(l + m).rem_euclid(planes) as usize];
            for j in 0..n as isize {
                let r = (pr as isize + j + p).clamp(0, max_r) as usize;
                for k in 0..n as isize {
                    let c = (pc as isize + k + q).clamp(0, max_c) as usize;
                    out[row] = img.get(r, c, channel);
                    row += 1;
                }
            }
        }
    }
    Ok(support)
}

/// Solves `(S^T S + alpha^2 I) phi = S^T x` by Cholesky with one refinement
/// step.
pub fn solve_ar(support: &DMatrix<f64>, target: &DVector<f64>, alpha: f64) -> Result<ARSolution> {
    if target.len() != support.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "target has {} entries, support has {} rows",
            target.len(),
            support.nrows()
        )));
    }
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!("alpha must be finite and >= 0, got {alpha}")));
    }
    let mut gram = support.tr_mul(support);
    let rhs = support.tr_mul(target);
    let ridge = alpha * alpha;
    for i in 0..gram.nrows() {
        gram[(i, i)] += ridge;
    }

    let chol = gram.clone().cholesky().ok_or(Error::Singular)?;
    if ridge == 0.0 {
        let l = chol.l_dirty();
        let scale = gram.diagonal().max().max(f64::MIN_POSITIVE);
        if (0..l.nrows()).any(|i| l[(i, i)] * l[(i, i)] <= 1e-12 * scale) {
            return Err(Error::Singular);
        }
    }
    let mut phi = chol.solve(&rhs);
    let correction = chol.solve(&(&rhs - &gram * &phi));
    phi += correction;
    if phi.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("AR weights"));
    }

    let residual_norm = (target - support * &phi).norm();
    Ok(ARSolution { phi, residual_norm })
}

/// `support * phi`.
pub fn predict(support: &DMatrix<f64>, phi: &DVector<f64>) -> Result<DVector<f64>> {
    if support.ncols() != phi.len() {
        return Err(Error::DimensionMismatch(format!(
            "support has {} columns, phi has {} entries",
            support.ncols(),
            phi.len()
        )));
    }
    Ok(support * phi)
}
