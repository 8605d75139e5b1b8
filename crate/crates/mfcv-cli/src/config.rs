//! Structured experiment configuration: a TOML file with flag overrides,
//! resolved into fully-defaulted experiment descriptions. The resolved form
//! can be echoed back to TOML and re-parsed to the identical configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use mfcv::benchmarks::Benchmark;
use mfcv::cost::CostParams;
use mfcv::error::{MfcvError, Result};
use mfcv::harness::{
    AcquisitionSettings, ExperimentConfig, Strategy, TrainSettings,
};

fn default_strategies() -> Vec<String> {
    vec!["mfcv".to_string()]
}

fn default_iterations() -> usize {
    50
}

fn default_batch_size() -> usize {
    1
}

fn default_repetitions() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CostSection {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Default for CostSection {
    fn default() -> Self {
        Self {
            c0: 500.0,
            c1: 10.0,
            c2: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    pub restarts: usize,
    pub max_evals_per_restart: usize,
}

impl Default for TrainSection {
    fn default() -> Self {
        Self {
            restarts: 10,
            max_evals_per_restart: 250,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AcquisitionSection {
    pub fantasy_samples: usize,
    pub inner_opt_restarts: usize,
    pub candidate_grid_size: usize,
}

impl Default for AcquisitionSection {
    fn default() -> Self {
        Self {
            fantasy_samples: 64,
            inner_opt_restarts: 2,
            candidate_grid_size: 128,
        }
    }
}

/// The on-disk configuration. Every field except `benchmark`, `seed` and
/// the optional sections has a documented default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub benchmark: String,
    pub seed: u64,
    #[serde(default)]
    pub levels: Option<Vec<f64>>,
    #[serde(default = "default_strategies")]
    pub strategies: Vec<String>,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub n_seed: Option<usize>,
    #[serde(default)]
    pub n_test: Option<usize>,
    #[serde(default)]
    pub cost_cap: Option<f64>,
    #[serde(default)]
    pub cost: CostSection,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub acquisition: AcquisitionSection,
    #[serde(default)]
    pub out: Option<String>,
}

/// Command-line overrides; flags win over file values.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub benchmark: Option<String>,
    pub strategy: Option<String>,
    pub seed: Option<u64>,
    pub iterations: Option<usize>,
    pub batch_size: Option<usize>,
    pub repetitions: Option<usize>,
    pub out: Option<String>,
}

/// A fully-validated configuration: the defaulted file form plus one
/// executable experiment per strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedConfig {
    pub file: FileConfig,
    pub experiments: Vec<ExperimentConfig>,
    pub out_dir: PathBuf,
}

impl ResolvedConfig {
    /// The resolved configuration as TOML; parsing it back yields the same
    /// resolved configuration.
    pub fn echo_toml(&self) -> String {
        toml::to_string_pretty(&self.file).expect("serializable config")
    }
}

fn invalid(field: &'static str, reason: String) -> MfcvError {
    MfcvError::InvalidConfig(format!("{field}: {reason}"))
}

/// Parse a config file (optional) plus overrides into a resolved config.
pub fn parse_config(path: Option<&Path>, overrides: &Overrides) -> Result<ResolvedConfig> {
    let mut file: FileConfig = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            toml::from_str(&text)
                .map_err(|e| MfcvError::InvalidConfig(format!("{}: {e}", p.display())))?
        }
        None => {
            let benchmark = overrides
                .benchmark
                .clone()
                .ok_or_else(|| invalid("benchmark", "required (flag or config file)".into()))?;
            let seed = overrides
                .seed
                .ok_or_else(|| invalid("seed", "required (flag or config file)".into()))?;
            FileConfig {
                benchmark,
                seed,
                levels: None,
                strategies: default_strategies(),
                iterations: default_iterations(),
                batch_size: default_batch_size(),
                repetitions: default_repetitions(),
                n_seed: None,
                n_test: None,
                cost_cap: None,
                cost: CostSection::default(),
                train: TrainSection::default(),
                acquisition: AcquisitionSection::default(),
                out: None,
            }
        }
    };

    if let Some(b) = &overrides.benchmark {
        file.benchmark = b.clone();
    }
    if let Some(s) = &overrides.strategy {
        file.strategies = vec![s.clone()];
    }
    if let Some(seed) = overrides.seed {
        file.seed = seed;
    }
    if let Some(b) = overrides.iterations {
        file.iterations = b;
    }
    if let Some(q) = overrides.batch_size {
        file.batch_size = q;
    }
    if let Some(r) = overrides.repetitions {
        file.repetitions = r;
    }
    if let Some(o) = &overrides.out {
        file.out = Some(o.clone());
    }

    resolve(file)
}

/// Validate a defaulted file config and expand per-strategy experiments.
pub fn resolve(file: FileConfig) -> Result<ResolvedConfig> {
    let mut benchmark = Benchmark::by_name(&file.benchmark)
        .map_err(|e| invalid("benchmark", e.to_string()))?;
    if let Some(levels) = &file.levels {
        benchmark = benchmark
            .discretize_fidelity(levels.clone())
            .map_err(|e| invalid("levels", e.to_string()))?;
    }
    if file.strategies.is_empty() {
        return Err(invalid("strategies", "must not be empty".into()));
    }
    if file.batch_size < 1 {
        return Err(invalid("batch_size", "must be at least 1".into()));
    }
    if file.iterations < 1 {
        return Err(invalid("iterations", "must be at least 1".into()));
    }
    if file.repetitions < 1 {
        return Err(invalid("repetitions", "must be at least 1".into()));
    }
    let cost = CostParams::new(file.cost.c0, file.cost.c1, file.cost.c2)
        .map_err(|e| invalid("cost", e.to_string()))?;

    let mut experiments = Vec::with_capacity(file.strategies.len());
    for name in &file.strategies {
        let strategy = Strategy::parse(name).map_err(|e| invalid("strategies", e.to_string()))?;
        let mut cfg = ExperimentConfig::new(benchmark.clone(), strategy, file.seed);
        cfg.batch_size = file.batch_size;
        cfg.iterations = file.iterations;
        cfg.repetitions = file.repetitions;
        cfg.cost = cost.clone();
        cfg.train = TrainSettings {
            restarts: file.train.restarts,
            max_evals_per_restart: file.train.max_evals_per_restart,
        };
        cfg.acquisition = AcquisitionSettings {
            fantasy_samples: file.acquisition.fantasy_samples,
            inner_opt_restarts: file.acquisition.inner_opt_restarts,
            candidate_grid_size: file.acquisition.candidate_grid_size,
        };
        cfg.n_seed = file.n_seed;
        cfg.n_test = file.n_test;
        cfg.cost_cap = file.cost_cap;
        cfg.validate()
            .map_err(|e| invalid("experiment", e.to_string()))?;
        experiments.push(cfg);
    }

    let out_dir = PathBuf::from(file.out.clone().unwrap_or_else(|| "mfcv-out".to_string()));
    Ok(ResolvedConfig {
        file,
        experiments,
        out_dir,
    })
}
