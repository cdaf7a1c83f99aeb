//! Experiment configuration: a TOML file validated up front, hashed for
//! output provenance, and echoed into run metadata.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use gsa_core::{
    BasisFamily, BasisSpec, FitMethod, Metamodel, TestFunction, TruncationSet,
};

use crate::CliError;

/// How replicate seeds derive from the master seed; recorded in every CSV.
pub const SEED_DERIVATION: &str = "splitmix64(master|stream)";

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Master seed; every replicate stream derives from it.
    pub seed: u64,
    /// Default output directory (the --out flag overrides it).
    pub output: Option<PathBuf>,
    pub function: FunctionConfig,
    pub model: ModelConfig,
    pub fit: Option<FitSection>,
    pub quality: Option<QualitySection>,
    pub risk: Option<RiskSection>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionConfig {
    /// "gfunction", "ishigami" or "span_element".
    pub kind: String,
    /// g-function coefficients (also fixes the dimension).
    pub c: Option<Vec<f64>>,
    /// Ishigami parameters.
    pub a: Option<f64>,
    pub b: Option<f64>,
    /// Path to a serialized metamodel for span_element.
    pub metamodel: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// Basis family applied on every dimension.
    pub basis: String,
    pub truncation: TruncationConfig,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationConfig {
    /// "max_degree" or "hyperbolic".
    pub scheme: String,
    pub alpha_max: Option<u32>,
    pub q: Option<f64>,
    pub t: Option<u32>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    /// "absolute", or "relative" to scale by sup |f|.
    pub kind: String,
    pub value: f64,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    pub method: String,
    pub n: usize,
    pub noise: Option<NoiseConfig>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct QualitySection {
    pub method: String,
    pub sample_sizes: Vec<usize>,
    pub noise: Option<NoiseConfig>,
    pub holdout_fraction: Option<f64>,
    pub bootstrap_resamples: Option<usize>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RiskSection {
    pub methods: Vec<String>,
    pub sample_sizes: Vec<usize>,
    pub n_runs: usize,
    /// Optional sweeps; when absent the [model] section fixes one cell axis.
    pub bases: Option<Vec<String>>,
    pub alpha_max_values: Option<Vec<u32>>,
    pub noise_levels: Option<Vec<NoiseConfig>>,
    /// Sample size for the best-approximation-error estimate (default 1e6).
    pub best_error_sample: Option<usize>,
}

/// A parsed config together with the hash of the file it came from.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub hash: String,
    pub raw: String,
}

pub fn load_config(path: &Path) -> Result<LoadedConfig, CliError> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let config: ExperimentConfig = toml::from_str(&raw)
        .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))?;
    let hash = format!("{:016x}", fnv1a64(raw.as_bytes()));
    Ok(LoadedConfig { config, hash, raw })
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

impl ExperimentConfig {
    pub fn build_function(&self) -> Result<TestFunction, CliError> {
        let f = &self.function;
        match f.kind.as_str() {
            "gfunction" => {
                let c = f.c.clone().ok_or_else(|| {
                    CliError::Config("gfunction requires the `c` coefficient list".into())
                })?;
                TestFunction::gfunction(c).map_err(|e| CliError::Config(e.to_string()))
            }
            "ishigami" => {
                let a = f
                    .a
                    .ok_or_else(|| CliError::Config("ishigami requires `a`".into()))?;
                let b = f
                    .b
                    .ok_or_else(|| CliError::Config("ishigami requires `b`".into()))?;
                Ok(TestFunction::ishigami(a, b))
            }
            "span_element" => {
                let path = f.metamodel.as_ref().ok_or_else(|| {
                    CliError::Config("span_element requires a `metamodel` path".into())
                })?;
                let text = std::fs::read_to_string(path).map_err(|e| {
                    CliError::Config(format!("cannot read metamodel {}: {e}", path.display()))
                })?;
                let model = Metamodel::parse(&text)
                    .map_err(|e| CliError::Config(format!("bad metamodel record: {e}")))?;
                Ok(TestFunction::span_element(model))
            }
            other => Err(CliError::Config(format!(
                "unknown function kind `{other}` (expected gfunction, ishigami or span_element)"
            ))),
        }
    }

    pub fn parse_family(name: &str) -> Result<BasisFamily, CliError> {
        BasisFamily::parse(name).ok_or_else(|| {
            CliError::Config(format!(
                "unknown basis family `{name}` (expected legendre, chebyshev or trigonometric)"
            ))
        })
    }

    pub fn build_basis(&self, family: &str, dim: usize) -> Result<BasisSpec, CliError> {
        Ok(BasisSpec::homogeneous(Self::parse_family(family)?, dim))
    }

    pub fn build_truncation(&self, tc: &TruncationConfig, dim: usize) -> Result<TruncationSet, CliError> {
        match tc.scheme.as_str() {
            "max_degree" => {
                let alpha_max = tc.alpha_max.ok_or_else(|| {
                    CliError::Config("max_degree truncation requires `alpha_max`".into())
                })?;
                TruncationSet::max_degree(dim, alpha_max)
                    .map_err(|e| CliError::Config(e.to_string()))
            }
            "hyperbolic" => {
                let q = tc
                    .q
                    .ok_or_else(|| CliError::Config("hyperbolic truncation requires `q`".into()))?;
                let t = tc
                    .t
                    .ok_or_else(|| CliError::Config("hyperbolic truncation requires `t`".into()))?;
                TruncationSet::hyperbolic(dim, q, t).map_err(|e| CliError::Config(e.to_string()))
            }
            other => Err(CliError::Config(format!(
                "unknown truncation scheme `{other}` (expected max_degree or hyperbolic)"
            ))),
        }
    }

    pub fn parse_method(name: &str) -> Result<FitMethod, CliError> {
        FitMethod::parse(name).ok_or_else(|| {
            CliError::Config(format!(
                "unknown fit method `{name}` (expected projection or ols)"
            ))
        })
    }

    /// Resolve a noise setting into an absolute standard deviation.
    pub fn resolve_noise(
        noise: &Option<NoiseConfig>,
        f: &TestFunction,
    ) -> Result<f64, CliError> {
        let Some(noise) = noise else { return Ok(0.0) };
        if noise.value < 0.0 {
            return Err(CliError::Config("noise value must be nonnegative".into()));
        }
        match noise.kind.as_str() {
            "absolute" => Ok(noise.value),
            "relative" => Ok(noise.value * f.sup_abs()),
            other => Err(CliError::Config(format!(
                "unknown noise kind `{other}` (expected absolute or relative)"
            ))),
        }
    }
}
