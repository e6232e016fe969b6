//! Fixed-precision metric output: PSNR with 2 decimals, SSIM with 4,
//! infinite PSNR written as the string `"inf"`.

use marlow_core::{IterationTrace, QualityReport};
use serde::Serialize;
use serde_json::value::RawValue;

pub fn fixed(x: f64, places: usize) -> Box<RawValue> {
    let text = if x == f64::INFINITY {
        "\"inf\"".to_string()
    } else if x.is_finite() {
        format!("{x:.places$}")
    } else {
        "null".to_string()
    };
    RawValue::from_string(text).expect("number or string literal")
}

pub fn psnr_text(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else {
        format!("{x:.2}")
    }
}

pub fn ssim_text(x: f64) -> String {
    format!("{x:.4}")
}

#[derive(Debug, Serialize)]
pub struct MetricsJson {
    pub psnr_db: Box<RawValue>,
    pub ssim: Box<RawValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_channel: Option<Vec<ChannelJson>>,
}

#[derive(Debug, Serialize)]
pub struct ChannelJson {
    pub psnr_db: Box<RawValue>,
    pub ssim: Box<RawValue>,
}

impl From<&QualityReport> for MetricsJson {
    fn from(q: &QualityReport) -> Self {
        MetricsJson {
            psnr_db: fixed(q.psnr_db, 2),
            ssim: fixed(q.ssim, 4),
            per_channel: q.per_channel.as_ref().map(|chs| {
                chs.iter().map(|c| ChannelJson { psnr_db: fixed(c.psnr_db, 2), ssim: fixed(c.ssim, 4) }).collect()
            }),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct IterationJson {
    pub iteration: usize,
    pub psnr_db: Option<Box<RawValue>>,
    pub ssim: Option<Box<RawValue>>,
    pub mean_group_residual: f64,
    pub seconds: f64,
}

/// Final metrics plus the per-iteration trajectory.
#[derive(Debug, Serialize)]
pub struct RunMetricsJson {
    pub psnr_db: Box<RawValue>,
    pub ssim: Box<RawValue>,
    pub initial_psnr_db: Option<Box<RawValue>>,
    pub iterations: Vec<IterationJson>,
}

impl RunMetricsJson {
    pub fn new(final_quality: &QualityReport, trace: &IterationTrace) -> Self {
        RunMetricsJson {
            psnr_db: fixed(final_quality.psnr_db, 2),
            ssim: fixed(final_quality.ssim, 4),
            initial_psnr_db: trace.initial_psnr_db.map(|p| fixed(p, 2)),
            iterations: trace
                .iterations
                .iter()
                .map(|r| IterationJson {
                    iteration: r.iteration,
                    psnr_db: r.psnr_db.map(|p| fixed(p, 2)),
                    ssim: r.ssim.map(|s| fixed(s, 4)),
                    mean_group_residual: r.mean_group_residual,
                    seconds: r.seconds,
                })
                .collect(),
        }
    }
}
