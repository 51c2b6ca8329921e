//! Run manifests written next to every CSV.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use chrono::{SecondsFormat, Utc};
use cran_cs::channel::FadingModel;
use cran_cs::harness::{ExperimentConfig, SweepAxis};
use serde::{Deserialize, Serialize};

/// Everything needed to repeat a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum RunSpec {
    Simulate {
        config: ExperimentConfig,
        sweep: Option<(SweepAxis, Vec<f64>)>,
    },
    Fig1 {
        config: ExperimentConfig,
        alphas: Vec<f64>,
        s_values: Vec<usize>,
    },
    Fig2 {
        density: f64,
        fading: FadingModel,
        n_pilots: Vec<usize>,
        noise_vars: Vec<f64>,
        alphas: Vec<f64>,
    },
    Fig3 {
        config: ExperimentConfig,
        alphas: Vec<f64>,
        n_pilots: Vec<usize>,
    },
    ValidateAppendix {
        config: ExperimentConfig,
        s_values: Vec<usize>,
        samples: usize,
    },
}

impl RunSpec {
    pub fn master_seed(&self) -> Option<u64> {
        match self {
            RunSpec::Simulate { config, .. }
            | RunSpec::Fig1 { config, .. }
            | RunSpec::Fig3 { config, .. }
            | RunSpec::ValidateAppendix { config, .. } => Some(config.master_seed),
            RunSpec::Fig2 { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub master_seed: Option<u64>,
    pub started_at: String,
    pub finished_at: String,
    pub outputs: Vec<PathBuf>,
    pub run: RunSpec,
}

pub fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

impl RunManifest {
    pub fn new(run: RunSpec, started_at: String, outputs: Vec<PathBuf>) -> Self {
        RunManifest {
            tool: env!("CARGO_BIN_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            master_seed: run.master_seed(),
            started_at,
            finished_at: now(),
            outputs,
            run,
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let value = crate::config::read_json(path)?;
        serde_path_to_error::deserialize(value).map_err(|e| {
            crate::config::SchemaError(format!("manifest field `{}`: {}", e.path(), e.inner()))
                .into()
        })
    }
}

/// `out.csv` -> `out.manifest.json`.
pub fn manifest_path(csv: &Path) -> PathBuf {
    csv.with_extension("manifest.json")
}
