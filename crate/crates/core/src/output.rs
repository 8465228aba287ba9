//! CSV results and their metadata sidecar.
//!
//! Data rows are `algorithm,variant,run,seed,t,pseudo_regret`; after them
//! come one aggregate row per checkpoint,
//! `algorithm,variant,AGG,seed0,t,mean,std`. Numbers use the shortest
//! decimal form that round-trips.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::arm_space::ArmTuple;
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::simulator::ExperimentResult;

pub const CSV_HEADER: &str = "algorithm,variant,run,seed,t,pseudo_regret";

/// Renders the CSV body of an experiment.
pub fn render_csv<F: Scalar>(result: &ExperimentResult<F>) -> Result<String> {
    if result.runs.is_empty() || result.grid.is_empty() {
        return Err(Error::InvalidInput("cannot emit an empty result".into()));
    }
    let alg = result.config.algorithm.as_str();
    let var = result.config.variant.as_str();
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for (run, (ledger, seed)) in result.runs.iter().zip(&result.seeds).enumerate() {
        for c in ledger.checkpoints() {
            writeln!(out, "{alg},{var},{run},{seed},{},{}", c.t, c.pseudo_regret).unwrap();
        }
    }
    let seed0 = result.seeds[0];
    for ((t, m), s) in result.grid.iter().zip(&result.mean).zip(&result.std) {
        writeln!(out, "{alg},{var},AGG,{seed0},{t},{m},{s}").unwrap();
    }
    Ok(out)
}

/// Path of the metadata file written next to `csv_path`.
pub fn metadata_path(csv_path: &Path) -> PathBuf {
    let mut name = csv_path.as_os_str().to_owned();
    name.push(".meta.toml");
    PathBuf::from(name)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArtifactInfo {
    pub name: String,
    pub version: String,
    /// Which regret the CSV reports.
    pub regret: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TupleSummary {
    pub tuple: ArmTuple,
    pub mean: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentSummary {
    pub mu_star: f64,
    pub min_gap: f64,
    pub tuples: Vec<TupleSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metadata {
    pub artifact: ArtifactInfo,
    pub config: ExperimentConfig,
    pub environment: EnvironmentSummary,
}

impl Metadata {
    pub fn from_result<F: Scalar>(result: &ExperimentResult<F>) -> Self {
        let space = result.space();
        let means: Vec<f64> = result.means.iter().map(|m| m.to_f64_lossy()).collect();
        let gaps: Vec<f64> = result.gaps.iter().map(|g| g.to_f64_lossy()).collect();
        let tuples = space
            .tuples()
            .zip(means.iter().zip(&gaps))
            .map(|(tuple, (&mean, &gap))| TupleSummary { tuple, mean, gap })
            .collect();
        Metadata {
            artifact: ArtifactInfo {
                name: env!("CARGO_PKG_NAME").into(),
                version: env!("CARGO_PKG_VERSION").into(),
                regret: "pseudo".into(),
            },
            config: result.config.clone(),
            environment: EnvironmentSummary {
                mu_star: means.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                min_gap: gaps.iter().copied().fold(f64::INFINITY, f64::min),
                tuples,
            },
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("metadata serializes")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let meta: Metadata = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        meta.config.validate()?;
        Ok(meta)
    }
}

/// Writes the CSV to `path` and the metadata sidecar next to it.
pub fn emit_csv<F: Scalar>(result: &ExperimentResult<F>, path: &Path) -> std::io::Result<()> {
    let csv = render_csv(result)
        .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidInput, e.to_string()))?;
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, csv)?;
    fs::write(metadata_path(path), Metadata::from_result(result).to_toml())?;
    Ok(())
}
