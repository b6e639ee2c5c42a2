//! Configuration documents of the subcommands.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use kdim_core::gevrey::{Domain, FamilyKind};
use kdim_core::kdim::EpsSchedule;
use kdim_core::smallpoly::Strategy;
use kdim_core::trace_space::PointCloud;
use serde::Deserialize;
use serde_json::Value;

/// Reads a JSON document, reporting syntax errors with line and column.
pub fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| {
        anyhow!("malformed JSON in {} at line {}, column {}: {e}", path.display(), e.line(), e.column())
    })
}

/// A point cloud given inline or as a path relative to the config file.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum CloudSource {
    Path(PathBuf),
    Inline(Value),
}

impl CloudSource {
    /// Loads the cloud and returns it with its parsed document.
    pub fn load(&self, base: &Path) -> Result<(PointCloud, Value)> {
        let doc = match self {
            CloudSource::Path(p) => read_json(&base.join(p))?,
            CloudSource::Inline(v) => v.clone(),
        };
        let cloud = PointCloud::from_json(&doc).context("invalid point cloud")?;
        Ok((cloud, doc))
    }
}

fn default_samples() -> usize {
    256
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntropyConfig {
    pub cloud: CloudSource,
    pub eps: Vec<f64>,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KdimConfig {
    pub cloud: CloudSource,
    pub schedule: ScheduleSpec,
}

/// Explicit scales, or a log-log spaced range.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum ScheduleSpec {
    Explicit {
        eps: Vec<f64>,
        #[serde(default = "default_samples")]
        samples: usize,
    },
    LogLog {
        eps_max: f64,
        eps_min: f64,
        count: usize,
        #[serde(default = "default_samples")]
        samples: usize,
    },
}

impl ScheduleSpec {
    pub fn build(&self, seed: u64) -> kdim_core::Result<EpsSchedule> {
        match self {
            ScheduleSpec::Explicit { eps, samples } => {
                let s = EpsSchedule { eps: eps.clone(), samples: *samples, seed };
                s.validate()?;
                Ok(s)
            }
            ScheduleSpec::LogLog { eps_max, eps_min, count, samples } => {
                EpsSchedule::log_log(*eps_max, *eps_min, *count, *samples, seed)
            }
        }
    }
}

fn default_strategy() -> Strategy {
    Strategy::LatticeReduce
}

fn default_one() -> u64 {
    1
}

fn default_max_candidates() -> u64 {
    10_000_000
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolydiskSpec {
    /// Interleaved real and imaginary parts.
    pub center: Vec<f64>,
    pub radius: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmallpolyConfig {
    pub cloud: CloudSource,
    pub degree: u32,
    pub h: f64,
    #[serde(default = "default_strategy")]
    pub strategy: Strategy,
    #[serde(default = "default_one")]
    pub coeff_bound: u64,
    #[serde(default = "default_max_candidates")]
    pub max_candidates: u64,
    #[serde(default)]
    pub time_budget_secs: Option<f64>,
    #[serde(default = "default_true")]
    pub maximize_decay: bool,
    /// Defaults to the enclosing polydisk of the cloud.
    #[serde(default)]
    pub reference: Option<PolydiskSpec>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessConfig {
    pub r: f64,
    pub degree: u32,
    #[serde(default = "default_n")]
    pub n: usize,
    /// Grid points per real axis; the smallest admissible grid by default.
    #[serde(default)]
    pub grid: Option<usize>,
    /// Torus samples per angle for `check`; `256 N` by default.
    #[serde(default)]
    pub torus_grid: Option<usize>,
}

fn default_n() -> usize {
    1
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GevreyConfig {
    pub s: f64,
    pub function: FamilyKind,
    pub domain: Domain,
    pub max_order: u32,
    /// Largest power checked by the power bound; skipped when absent.
    #[serde(default)]
    pub power_k: Option<u32>,
}

/// Parses a config document into `T`, or the `parameters` block of a
/// manifest written by a previous run of the same command.
pub fn parse_config<T: for<'de> Deserialize<'de>>(doc: &Value, command: &str) -> Result<(T, Option<ManifestInputs>)> {
    if let (Some(cmd), Some(params)) = (doc.get("command"), doc.get("parameters")) {
        if cmd.as_str() != Some(command) {
            bail!("manifest was written by {cmd}, not {command:?}");
        }
        let cfg = serde_json::from_value(params.clone()).context("invalid parameters in manifest")?;
        let inputs = ManifestInputs {
            seed: doc.get("seed").and_then(Value::as_u64),
            precision_bits: doc.get("precision_bits").and_then(Value::as_u64),
        };
        return Ok((cfg, Some(inputs)));
    }
    let cfg = serde_json::from_value(doc.clone()).context("invalid config")?;
    Ok((cfg, None))
}

/// Run settings recovered from a manifest.
#[derive(Clone, Copy, Debug)]
pub struct ManifestInputs {
    pub seed: Option<u64>,
    pub precision_bits: Option<u64>,
}
