//! Singular value soft-thresholding and the fused AR / fidelity update.
//!
//! The per-group subproblem
//!
//! ```text
//! min_M ||M - Y1||_F^2 + mu (||M - Y2||_F^2 + ||M||_*)
//! ```
//!
//! equals `(1 + mu) ||M - Y'||_F^2 + mu ||M||_*` up to a constant, with
//! `Y' = (1 - lambda) Y1 + lambda Y2` and `lambda = mu / (mu + 1)`. Its
//! minimizer is `S_{lambda/2}(Y')`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const SVD_EPS: f64 = 1e-15;
const SVD_MAX_ITER: usize = 0;

#[derive(Debug, Clone)]
pub struct ShrinkResult {
    pub matrix: DMatrix<f64>,
    /// Non-increasing.
    pub singular_values_before: DVector<f64>,
    /// `max(before - tau, 0)`, non-increasing.
    pub singular_values_after: DVector<f64>,
}

/// `U max(S - tau, 0) V^T` for the economy SVD `A = U S V^T`.
pub fn svt(a: &DMatrix<f64>, tau: f64) -> Result<ShrinkResult> {
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::InvalidParameter(format!("threshold must be finite and >= 0, got {tau}")));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("SVT input"));
    }
    let (rows, cols) = a.shape();
    if rows == 0 || cols == 0 {
        return Ok(ShrinkResult {
            matrix: a.clone(),
            singular_values_before: DVector::zeros(0),
            singular_values_after: DVector::zeros(0),
        });
    }
    let mut svd = nalgebra::linalg::SVD::try_new(a.clone(), true, true, SVD_EPS, SVD_MAX_ITER)
        .ok_or_else(|| Error::SvdFailed { rows, cols, max_abs: a.amax() })?;
    svd.sort_by_singular_values();

    let before = svd.singular_values.clone();
    let after = before.map(|s| (s - tau).max(0.0));
    let u = svd.u.as_ref().expect("U requested");
    let v_t = svd.v_t.as_ref().expect("V^T requested");

    let kept = after.iter().take_while(|&&s| s > 0.0).count();
    let matrix = if kept == 0 {
        DMatrix::zeros(rows, cols)
    } else {
        let mut scaled = u.columns(0, kept).into_owned();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= after[j];
        }
        scaled * v_t.rows(0, kept)
    };
    Ok(ShrinkResult { matrix, singular_values_before: before, singular_values_after: after })
}

/// Fusion weight `mu / (mu + 1)`.
#[inline]
pub fn fusion_weight(mu: f64) -> f64 {
    mu / (mu + 1.0)
}

/// Threshold that makes [`joint_update`] the exact minimizer: `lambda / 2`.
#[inline]
pub fn default_threshold(mu: f64) -> f64 {
    fusion_weight(mu) / 2.0
}

/// Minimizer of `||M - Y1||^2 + mu (||M - Y2||^2 + ||M||_*)`.
pub fn joint_update(y1: &DMatrix<f64>, y2: &DMatrix<f64>, mu: f64) -> Result<DMatrix<f64>> {
    joint_update_with(y1, y2, mu, None)
}

/// [`joint_update`] with an optional threshold override in place of `lambda / 2`.
pub fn joint_update_with(
    y1: &DMatrix<f64>,
    y2: &DMatrix<f64>,
    mu: f64,
    tau: Option<f64>,
) -> Result<DMatrix<f64>> {
    if y1.shape() != y2.shape() {
        return Err(Error::DimensionMismatch(format!(
            "Y1 is {:?}, Y2 is {:?}",
            y1.shape(),
            y2.shape()
        )));
    }
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::InvalidParameter(format!("mu must be finite and > 0, got {mu}")));
    }
    let lambda = fusion_weight(mu);
    let fused = y1 * (1.0 - lambda) + y2 * lambda;
    Ok(svt(&fused, tau.unwrap_or(lambda / 2.0))?.matrix)
}
