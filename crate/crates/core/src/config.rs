//! JSON run configuration, loading with field-path errors, and the
//! canonical configuration hash.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::analysis::NoiseProfile;
use crate::model::SpdeProblem;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: malformed JSON: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{file}: at `{field}`: {message}")]
    Field { file: PathBuf, field: String, message: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Inline problem.
    #[serde(default)]
    pub problem: Option<SpdeProblem>,
    /// Problem read from a separate JSON file, relative to the config file.
    #[serde(default)]
    pub problem_file: Option<PathBuf>,
    #[serde(default)]
    pub mesh: MeshConfig,
    #[serde(default = "default_penalties")]
    pub penalties: Vec<f64>,
    #[serde(default)]
    pub picard: PicardConfig,
    #[serde(default)]
    pub monte_carlo: MonteCarloConfig,
    #[serde(default)]
    pub degiorgi: Option<DeGiorgiConfig>,
    #[serde(default)]
    pub compare: Option<CompareConfig>,
    #[serde(default)]
    pub example1: Option<Example1Config>,
    #[serde(default)]
    pub hormander: Option<HormanderConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_penalties() -> Vec<f64> {
    vec![1e3]
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    pub dt: f64,
}

impl Default for MeshConfig {
    fn default() -> Self {
        Self { dt: 1e-3 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PicardConfig {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PicardConfig {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 30 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonteCarloConfig {
    pub paths: usize,
    pub base_seed: u64,
    pub workers: usize,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        Self { paths: 1, base_seed: 0, workers: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeGiorgiConfig {
    /// Truncation level for the energies `V^m`.
    pub lambda: f64,
    /// Grid of thresholds for the tail estimate.
    pub lambdas: Vec<f64>,
    #[serde(default = "default_levels")]
    pub levels: u32,
    /// Integrability exponent entering `α₀`.
    pub k: u32,
    pub p: f64,
    #[serde(default = "default_depth_cap")]
    pub depth_cap: usize,
    /// `sup ξ⁺`-based threshold by default.
    #[serde(default)]
    pub lambda0: Option<f64>,
}

fn default_levels() -> u32 {
    6
}

fn default_depth_cap() -> usize {
    4
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    /// The problem expected to lie above the main one.
    #[serde(default)]
    pub upper: Option<SpdeProblem>,
    #[serde(default)]
    pub upper_file: Option<PathBuf>,
    #[serde(default = "default_compare_tol")]
    pub tol: f64,
}

fn default_compare_tol() -> f64 {
    1e-10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Example1Config {
    pub modes: Vec<usize>,
    pub profile: NoiseProfile,
    pub horizon: f64,
    pub dt: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HormanderConfig {
    pub dim: usize,
    pub fields: Vec<String>,
    #[serde(default = "default_depth_cap")]
    pub depth_cap: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    /// Keep every `stride`-th time in trajectory CSVs; 0 keeps the endpoints.
    pub stride: Option<usize>,
}

/// A parsed configuration with its hash and the directory it came from.
#[derive(Clone, Debug)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub hash: String,
    pub base_dir: PathBuf,
}

/// SHA-256 of the compact JSON form with object keys sorted, so the hash
/// ignores field order and whitespace.
pub fn config_hash(value: &serde_json::Value) -> String {
    // serde_json's default map is ordered by key
    let canonical = serde_json::to_string(value).expect("JSON values serialize");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

fn read_json(path: &Path) -> Result<serde_json::Value, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
    serde_json::from_str(&text).map_err(|source| ConfigError::Json { path: path.into(), source })
}

fn typed<T: serde::de::DeserializeOwned>(value: serde_json::Value, file: &Path) -> Result<T, ConfigError> {
    serde_path_to_error::deserialize(value).map_err(|e| ConfigError::Field {
        file: file.into(),
        field: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

pub fn parse_config(value: serde_json::Value, file: &Path) -> Result<RunConfig, ConfigError> {
    typed(value, file)
}

pub fn load_config(path: &Path) -> Result<LoadedConfig, ConfigError> {
    let value = read_json(path)?;
    let hash = config_hash(&value);
    let config = parse_config(value, path)?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(LoadedConfig { config, hash, base_dir })
}

fn resolve_problem(
    inline: &Option<SpdeProblem>,
    file: &Option<PathBuf>,
    base_dir: &Path,
    what: &str,
) -> Result<Option<SpdeProblem>, ConfigError> {
    match (inline, file) {
        (Some(_), Some(_)) => Err(ConfigError::Invalid(format!("give either `{what}` or `{what}_file`, not both"))),
        (Some(p), None) => Ok(Some(p.clone())),
        (None, Some(f)) => {
            let path = base_dir.join(f);
            typed(read_json(&path)?, &path).map(Some)
        }
        (None, None) => Ok(None),
    }
}

impl LoadedConfig {
    pub fn problem(&self) -> Result<SpdeProblem, ConfigError> {
        resolve_problem(&self.config.problem, &self.config.problem_file, &self.base_dir, "problem")?
            .ok_or_else(|| ConfigError::Invalid("this command needs `problem` or `problem_file`".into()))
    }

    pub fn compare_upper(&self) -> Result<(SpdeProblem, f64), ConfigError> {
        let c = self.config.compare.as_ref().ok_or_else(|| ConfigError::Invalid("missing `compare` section".into()))?;
        let upper = resolve_problem(&c.upper, &c.upper_file, &self.base_dir, "upper")?
            .ok_or_else(|| ConfigError::Invalid("`compare` needs `upper` or `upper_file`".into()))?;
        Ok((upper, c.tol))
    }
}
