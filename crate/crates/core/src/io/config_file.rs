//! JSON benchmark configuration.
//!
//! Every field is optional and falls back to the [`BenchConfig`] default:
//!
//! ```json
//! {
//!   "ranges_m": [25.6, 51.2, 76.8],
//!   "k": [0, 1, 2],
//!   "noise": [{"mu": 0.1, "sigma": 0.02}],
//!   "seed": 7,
//!   "classes": ["vehicles", "road"],
//!   "egos": [0],
//!   "gt_source": "derived",
//!   "mode": "first_valid"
//! }
//! ```
//!
//! `ranges` may be given instead of `ranges_m` to set each resolution
//! explicitly: `[{"range_m": 25.6, "resolution_m": 0.1}]`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::scene_file::{parse_json, LabelRef};
use crate::error::{Error, Result};
use crate::fusion::{ranges_from_extents, BenchConfig, FusionMode, GtSource};
use crate::scene::GridSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeFile {
    pub range_m: f64,
    pub resolution_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseFile {
    pub mu: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub ranges_m: Option<Vec<f64>>,
    pub ranges: Option<Vec<RangeFile>>,
    pub k: Option<Vec<usize>>,
    pub noise: Option<Vec<NoiseFile>>,
    pub seed: Option<u64>,
    pub classes: Option<Vec<LabelRef>>,
    pub egos: Option<Vec<u32>>,
    pub gt_source: Option<GtSource>,
    pub mode: Option<FusionMode>,
}

impl ConfigFile {
    pub fn build(&self) -> Result<BenchConfig> {
        let mut c = BenchConfig::default();
        match (&self.ranges_m, &self.ranges) {
            (Some(_), Some(_)) => return Err(Error::validation("ranges", "give ranges_m or ranges, not both")),
            (Some(r), None) => {
                c.ranges = ranges_from_extents(r).map_err(|e| Error::validation("ranges_m", e.to_string()))?
            }
            (None, Some(r)) => {
                c.ranges = r
                    .iter()
                    .enumerate()
                    .map(|(n, r)| {
                        GridSpec::benchmark(r.range_m, r.resolution_m)
                            .map_err(|e| Error::validation(format!("ranges[{n}]"), e.to_string()))
                    })
                    .collect::<Result<_>>()?
            }
            (None, None) => {}
        }
        if c.ranges.is_empty() {
            return Err(Error::validation("ranges", "at least one range is required"));
        }
        if let Some(k) = &self.k {
            c.k_values = k.clone();
        }
        if let Some(noise) = &self.noise {
            c.noise = noise.iter().map(|n| (n.mu, n.sigma)).collect();
        }
        c.noise_levels()
            .map_err(|e| Error::validation("noise", e.to_string()))?;
        if let Some(seed) = self.seed {
            c.seed = seed;
        }
        if let Some(classes) = &self.classes {
            c.classes = classes
                .iter()
                .enumerate()
                .map(|(n, l)| l.resolve(&format!("classes[{n}]")))
                .collect::<Result<_>>()?;
        }
        c.egos = self.egos.clone();
        if let Some(g) = self.gt_source {
            c.gt_source = g;
        }
        if let Some(m) = self.mode {
            c.mode = m;
        }
        Ok(c)
    }
}

pub fn parse_config(text: &str, origin: &Path) -> Result<BenchConfig> {
    let file: ConfigFile = parse_json(text, origin)?;
    file.build().map_err(|e| match e {
        Error::Validation { path, message } => Error::validation(format!("{}: {path}", origin.display()), message),
        other => other,
    })
}

pub fn load_config(path: impl AsRef<Path>) -> Result<BenchConfig> {
    let path = path.as_ref();
    parse_config(&fs::read_to_string(path)?, path)
}
