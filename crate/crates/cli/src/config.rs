//! Flat `key = value` config files and flag overrides.
//!
//! ```text
//! # comments start with '#'
//! mode = marlow
//! patch_size = 8
//! group_size = 64
//! stride = 4
//! radius = 20
//! alpha = 3.1622776601683795
//! mu = 10
//! tau = 0.45          # optional threshold override
//! iters = 8
//! threads = 0
//! planar = 0,1
//! spatial = -1:-1,-1:0,-1:1,0:-1,0:0,0:1,1:-1,1:0,1:1
//! ```
//!
//! Precedence: command-line flags, then the config file, then the built-in
//! defaults for the image's channel count.

use std::path::Path;

use anyhow::{bail, Context, Result};
use marlow_core::{Mode, SolverConfig};

#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub mode: Option<Mode>,
    pub patch_size: Option<usize>,
    pub group_size: Option<usize>,
    pub stride: Option<usize>,
    pub radius: Option<usize>,
    pub alpha: Option<f64>,
    pub mu: Option<f64>,
    pub tau: Option<f64>,
    pub iters: Option<usize>,
    pub threads: Option<usize>,
    pub planar: Option<Vec<isize>>,
    pub spatial: Option<Vec<(isize, isize)>>,
}

impl Overrides {
    /// Fields set in `self` win over those in `lower`.
    pub fn over(self, lower: Overrides) -> Overrides {
        Overrides {
            mode: self.mode.or(lower.mode),
            patch_size: self.patch_size.or(lower.patch_size),
            group_size: self.group_size.or(lower.group_size),
            stride: self.stride.or(lower.stride),
            radius: self.radius.or(lower.radius),
            alpha: self.alpha.or(lower.alpha),
            mu: self.mu.or(lower.mu),
            tau: self.tau.or(lower.tau),
            iters: self.iters.or(lower.iters),
            threads: self.threads.or(lower.threads),
            planar: self.planar.or(lower.planar),
            spatial: self.spatial.or(lower.spatial),
        }
    }

    pub fn apply(self, mut cfg: SolverConfig) -> SolverConfig {
        if let Some(v) = self.mode {
            cfg.mode = v;
        }
        if let Some(v) = self.patch_size {
            cfg.patch_size = v;
        }
        if let Some(v) = self.group_size {
            cfg.group_size = v;
        }
        if let Some(v) = self.stride {
            cfg.stride = v;
        }
        if let Some(v) = self.radius {
            cfg.search_radius = v;
        }
        if let Some(v) = self.alpha {
            cfg.alpha = v;
        }
        if let Some(v) = self.mu {
            cfg.mu = v;
        }
        if self.tau.is_some() {
            cfg.tau_override = self.tau;
        }
        if let Some(v) = self.iters {
            cfg.max_iter = v;
        }
        if let Some(v) = self.threads {
            cfg.threads = v;
        }
        if let Some(v) = self.planar {
            cfg.offsets.planar = v;
        }
        if let Some(v) = self.spatial {
            cfg.offsets.spatial = v;
        }
        cfg
    }
}

fn parse_list<T: std::str::FromStr>(value: &str) -> Result<Vec<T>>
where
    T::Err: std::error::Error + Send + Sync + 'static,
{
    value.split(',').map(|s| s.trim().parse::<T>().with_context(|| format!("bad list item {s:?}"))).collect()
}

pub fn parse_spatial(value: &str) -> Result<Vec<(isize, isize)>> {
    value
        .split(',')
        .map(|pair| {
            let (p, q) = pair.trim().split_once(':').with_context(|| format!("spatial offset {pair:?} is not p:q"))?;
            Ok((p.trim().parse()?, q.trim().parse()?))
        })
        .collect()
}

pub fn parse_planar(value: &str) -> Result<Vec<isize>> {
    parse_list(value)
}

pub fn parse_str(text: &str) -> Result<Overrides> {
    let mut o = Overrides::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .with_context(|| format!("line {}: expected key = value", lineno + 1))?;
        let (key, value) = (key.trim(), value.trim());
        let ctx = || format!("line {}: bad value for {key}", lineno + 1);
        match key {
            "mode" => o.mode = Some(value.parse().with_context(ctx)?),
            "patch_size" | "n" => o.patch_size = Some(value.parse().with_context(ctx)?),
            "group_size" | "N" => o.group_size = Some(value.parse().with_context(ctx)?),
            "stride" => o.stride = Some(value.parse().with_context(ctx)?),
            "radius" | "search_radius" => o.radius = Some(value.parse().with_context(ctx)?),
            "alpha" => o.alpha = Some(value.parse().with_context(ctx)?),
            "mu" => o.mu = Some(value.parse().with_context(ctx)?),
            "tau" => o.tau = Some(value.parse().with_context(ctx)?),
            "iters" | "max_iter" => o.iters = Some(value.parse().with_context(ctx)?),
            "threads" => o.threads = Some(value.parse().with_context(ctx)?),
            "planar" => o.planar = Some(parse_planar(value).with_context(ctx)?),
            "spatial" => o.spatial = Some(parse_spatial(value).with_context(ctx)?),
            other => bail!("line {}: unknown key {other:?}", lineno + 1),
        }
    }
    Ok(o)
}

pub fn load(path: &Path) -> Result<Overrides> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    parse_str(&text).with_context(|| format!("in config {}", path.display()))
}
