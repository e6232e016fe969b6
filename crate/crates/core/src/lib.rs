//! Image completion from sparse pixel samples by alternating a multiplanar
//! autoregressive model over similar-patch groups with a nuclear-norm
//! proximal step.
//!
//! The pipeline: [`solver::initialize`] fills the holes by axis-wise
//! inverse-distance weighting, then each iteration of [`solver::complete`]
//! groups similar patches ([`patchwork`]), fits and applies the AR model
//! ([`mar`]), shrinks the fused group matrix ([`lowrank`]), aggregates and
//! restores the observed pixels.

pub mod degrade;
pub mod error;
pub mod fixtures;
pub mod imgcore;
pub mod lowrank;
pub mod mar;
pub mod patchwork;
pub mod quality;
pub mod rng;
pub mod solver;

pub use error::{Error, Result};
pub use imgcore::{apply_mask, load_image, load_mask, save_image, save_mask, Image, Mask};
pub use mar::AROffsets;
pub use patchwork::{PatchGeometry, PatchGroup, Position};
pub use quality::QualityReport;
pub use solver::{complete, complete_color, initialize, IterationRecord, IterationTrace, Mode, SolverConfig};
