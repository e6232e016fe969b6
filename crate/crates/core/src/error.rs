use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("failed to read image {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("failed to write image {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("unsupported pixel format in {path}: {detail}")]
    UnsupportedFormat { path: PathBuf, detail: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("image {width}x{height} is smaller than the required {min}x{min} window")]
    TooSmall { width: usize, height: usize, min: usize },

    #[error("pixel ({row}, {col}) is not covered by any patch estimate")]
    Uncovered { row: usize, col: usize },

    #[error("mask has no known pixels")]
    NoKnownPixels,

    #[error("singular normal equations; a positive regularization weight is required")]
    Singular,

    #[error("SVD did not converge on a {rows}x{cols} matrix (max |a| = {max_abs:e})")]
    SvdFailed { rows: usize, cols: usize, max_abs: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
}
