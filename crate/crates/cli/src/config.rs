use anyhow::{anyhow, bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use std::path::{Path, PathBuf};

use gpscale::experiments::PriorFamily;
use gpscale::processes::{GaussianPrior, DEFAULT_GRID_SIZE};

pub fn default_grid_size() -> usize {
    DEFAULT_GRID_SIZE
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorSpec {
    pub family: PriorFamily,
    pub c: f64,
    #[serde(default)]
    pub k: u32,
    /// Variance of the polynomial part; omitted for pure integrated
    /// Brownian motion.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
}

impl PriorSpec {
    pub fn prior(&self) -> gpscale::Result<GaussianPrior> {
        match (self.family, self.a) {
            (PriorFamily::ModifiedIbm, None) => GaussianPrior::pure_ibm(self.k, self.c),
            (family, a) => family.prior(self.c, self.k, a.unwrap_or(1.0)),
        }
    }
}

/// Sidecar written next to every output set; loadable again as a config.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sidecar {
    pub command: String,
    pub resolved_config: Value,
    pub outputs: Vec<OutputRecord>,
    pub version: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputRecord {
    pub file: String,
    pub sha256: String,
}

pub struct Loaded<T> {
    pub config: T,
    pub output_dir: Option<PathBuf>,
}

/// Read a command config or a sidecar of the same command, strip the
/// global `output_dir`, apply the seed override and parse strictly.
pub fn load<T: DeserializeOwned>(path: &Path, command: &str, seed: Option<u64>) -> Result<Loaded<T>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let mut map = match value {
        Value::Object(m) => m,
        _ => bail!("config must be a JSON object"),
    };
    if map.contains_key("resolved_config") {
        let sidecar: Sidecar = serde_json::from_value(Value::Object(map)).context("parsing sidecar")?;
        if sidecar.command != command {
            bail!("sidecar belongs to command '{}', not '{command}'", sidecar.command);
        }
        map = match sidecar.resolved_config {
            Value::Object(m) => m,
            _ => bail!("resolved_config must be a JSON object"),
        };
    }
    let output_dir = take_output_dir(&mut map)?;
    if let Some(s) = seed {
        map.insert("seed".into(), Value::from(s));
    }
    let config = serde_json::from_value(Value::Object(map)).map_err(|e| anyhow!("invalid config: {e}"))?;
    Ok(Loaded { config, output_dir })
}

fn take_output_dir(map: &mut Map<String, Value>) -> Result<Option<PathBuf>> {
    match map.remove("output_dir") {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => Ok(Some(PathBuf::from(s))),
        Some(_) => bail!("output_dir must be a string"),
    }
}
