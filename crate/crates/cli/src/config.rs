//! Experiment configuration: recipe defaults, then a JSON file, then flags.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use cran_cs::harness::ExperimentConfig;
use serde_json::{json, Map, Value};

use crate::FadingArgs;

/// A configuration error that should exit with the usage status.
#[derive(Debug)]
pub struct SchemaError(pub String);

impl std::fmt::Display for SchemaError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for SchemaError {}

#[derive(Debug, Args, Default)]
pub struct ExperimentArgs {
    /// JSON experiment configuration; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of RRHs [reference setup: 500].
    #[arg(long)]
    pub n_rrh: Option<usize>,
    /// RRH density per unit area [reference setup: 1].
    #[arg(long)]
    pub density: Option<f64>,
    /// Path-loss exponent.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[command(flatten)]
    pub fading: FadingArgs,
    /// Noise variance [reference setup: 0].
    #[arg(long)]
    pub noise: Option<f64>,
    /// Pilot length N_p [reference setup: 81].
    #[arg(long = "np")]
    pub n_pilots: Option<usize>,
    /// Number of estimated channels, or "optimal".
    #[arg(long)]
    pub s: Option<String>,
    /// Metric minimized when s is "optimal": average or total.
    #[arg(long)]
    pub metric: Option<String>,
    /// oracle, basis-pursuit or omp.
    #[arg(long)]
    pub estimator: Option<String>,
    /// Monte Carlo trials per point.
    #[arg(long)]
    pub trials: Option<usize>,
    /// uniform-finite or hppp.
    #[arg(long)]
    pub window_mode: Option<String>,
    /// Window side in hppp mode.
    #[arg(long)]
    pub hppp_side: Option<f64>,
    /// Distances below this radius are clamped to it.
    #[arg(long)]
    pub exclusion_radius: Option<f64>,
    /// gaussian or orthogonal.
    #[arg(long)]
    pub pilots: Option<String>,
    /// Basis Pursuit iteration cap.
    #[arg(long)]
    pub max_iters: Option<usize>,
}

impl ExperimentArgs {
    fn overrides(&self, seed: Option<u64>) -> Map<String, Value> {
        let mut m = Map::new();
        let mut put = |k: &str, v: Option<Value>| {
            if let Some(v) = v {
                m.insert(k.to_string(), v);
            }
        };
        put("n_rrh", self.n_rrh.map(Value::from));
        put("density", self.density.map(Value::from));
        put("alpha", self.alpha.map(Value::from));
        put(
            "fading",
            self.fading
                .model()
                .map(|f| serde_json::to_value(f).expect("fading serializes")),
        );
        put("noise_var", self.noise.map(Value::from));
        put("n_pilots", self.n_pilots.map(Value::from));
        put(
            "s",
            self.s.as_ref().map(|s| {
                s.parse::<u64>()
                    .map(Value::from)
                    .unwrap_or_else(|_| Value::from(s.as_str()))
            }),
        );
        put("optimize_for", self.metric.clone().map(Value::from));
        put("estimator", self.estimator.clone().map(Value::from));
        put("trials", self.trials.map(Value::from));
        put("window_mode", self.window_mode.clone().map(Value::from));
        put("hppp_side", self.hppp_side.map(Value::from));
        put("exclusion_radius", self.exclusion_radius.map(Value::from));
        put("pilots", self.pilots.clone().map(Value::from));
        put("master_seed", seed.map(Value::from));
        if let Some(n) = self.max_iters {
            m.insert("solver".into(), json!({ "max_iters": n }));
        }
        m
    }

    /// Builds the configuration from `defaults`, the `--config` file and the
    /// flags, in increasing precedence.
    pub fn resolve(&self, defaults: Value, seed: Option<u64>) -> Result<ExperimentConfig> {
        let mut value = defaults;
        if let Some(path) = &self.config {
            merge(&mut value, read_json(path)?);
        }
        merge(&mut value, Value::Object(self.overrides(seed)));
        let cfg = parse_config(value)?;
        cfg.validate().map_err(|e| SchemaError(e.to_string()))?;
        Ok(cfg)
    }
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| SchemaError(format!("{}: {e}", path.display())).into())
}

/// Deserializes a configuration, naming the offending field on failure.
pub fn parse_config(value: Value) -> Result<ExperimentConfig> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        SchemaError(format!("config field `{path}`: {}", e.inner())).into()
    })
}

/// Recursive object merge; `top` wins.
fn merge(base: &mut Value, top: Value) {
    match (base, top) {
        (Value::Object(b), Value::Object(t)) => {
            for (k, v) in t {
                match b.get_mut(&k) {
                    Some(existing) if existing.is_object() && v.is_object() => merge(existing, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, t) => *b = t,
    }
}
