//! Experiment loop: seed, then iterate (fit outer GP, LOO-CV, inner GP,
//! acquire, observe, append, retrain) while tracking RMSE at the target
//! fidelity against cumulative query cost.
//!
//! Three strategies share the loop: the cost-aware lookahead acquisition,
//! its single-fidelity restriction (all acquisitions at s = 1), and a
//! quasi-random baseline that takes points from a joint low-discrepancy
//! stream. For a fixed repetition index all strategies receive identical
//! seed observations and test points.
//!
//! Per iteration, the recorded RMSE is measured after retraining on the
//! data that includes that iteration's acquisitions; the seed-only GP's
//! RMSE is kept separately as the iteration-0 value.

use std::time::Instant;

use rayon::prelude::*;

use crate::acquisition::{cost_aware_argmax, fit_inner_gp, AcquisitionConfig};
use crate::benchmarks::Benchmark;
use crate::cost::{cost, CostParams};
use crate::domain::{DomainBox, FidelitySpace};
use crate::error::{MfcvError, Result};
use crate::gp::{train_and_fit, Dataset, Hyperparameters, PosteriorGP, TrainConfig};
use crate::loocv::{cv_records, log_cv_observations};
use crate::sampling::{
    mix_seed, random_fidelity, snap_fidelity, sobol_points, stream_rng, SeedPlan,
};

/// Point-selection strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Mfcv,
    Hf,
    Sobol,
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Mfcv => "mfcv",
            Strategy::Hf => "hf",
            Strategy::Sobol => "sobol",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "mfcv" => Ok(Strategy::Mfcv),
            "hf" => Ok(Strategy::Hf),
            "sobol" => Ok(Strategy::Sobol),
            other => Err(MfcvError::InvalidConfig(format!(
                "unknown strategy '{other}' (expected mfcv, hf or sobol)"
            ))),
        }
    }
}

/// Hyperparameter training settings used for both the outer and inner GP.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainSettings {
    pub restarts: usize,
    pub max_evals_per_restart: usize,
}

impl Default for TrainSettings {
    fn default() -> Self {
        Self {
            restarts: 10,
            max_evals_per_restart: 250,
        }
    }
}

/// Acquisition knobs carried by the experiment config.
#[derive(Debug, Clone, PartialEq)]
pub struct AcquisitionSettings {
    pub fantasy_samples: usize,
    pub inner_opt_restarts: usize,
    pub candidate_grid_size: usize,
}

impl Default for AcquisitionSettings {
    fn default() -> Self {
        Self {
            fantasy_samples: 64,
            inner_opt_restarts: 2,
            candidate_grid_size: 128,
        }
    }
}

/// Full description of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub benchmark: Benchmark,
    pub strategy: Strategy,
    pub batch_size: usize,
    pub iterations: usize,
    pub repetitions: usize,
    pub seed: u64,
    pub cost: CostParams,
    pub train: TrainSettings,
    pub acquisition: AcquisitionSettings,
    /// Seed observations; defaults to 10 * d.
    pub n_seed: Option<usize>,
    /// Test points at s = 1; defaults to 30 * d.
    pub n_test: Option<usize>,
    /// Optional secondary stopping rule on cumulative cost.
    pub cost_cap: Option<f64>,
}

impl ExperimentConfig {
    pub fn new(benchmark: Benchmark, strategy: Strategy, seed: u64) -> Self {
        Self {
            benchmark,
            strategy,
            batch_size: 1,
            iterations: 50,
            repetitions: 10,
            seed,
            cost: CostParams::default(),
            train: TrainSettings::default(),
            acquisition: AcquisitionSettings::default(),
            n_seed: None,
            n_test: None,
            cost_cap: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations < 1 {
            return Err(MfcvError::InvalidConfig("iterations must be >= 1".into()));
        }
        if self.repetitions < 1 {
            return Err(MfcvError::InvalidConfig("repetitions must be >= 1".into()));
        }
        if self.batch_size < 1 {
            return Err(MfcvError::InvalidConfig("batch_size must be >= 1".into()));
        }
        if self.strategy == Strategy::Hf && !self.benchmark.fidelity_space().contains(1.0) {
            return Err(MfcvError::InvalidConfig(
                "hf strategy requires fidelity 1.0 in the fidelity space".into(),
            ));
        }
        self.acquisition_config().validate()
    }

    fn acquisition_config(&self) -> AcquisitionConfig {
        let fidelity_space = match self.strategy {
            // The single-fidelity baseline searches X x {1} only.
            Strategy::Hf => FidelitySpace::Discrete(vec![1.0]),
            _ => self.benchmark.fidelity_space().clone(),
        };
        AcquisitionConfig {
            fantasy_samples: self.acquisition.fantasy_samples,
            inner_opt_restarts: self.acquisition.inner_opt_restarts,
            candidate_grid_size: self.acquisition.candidate_grid_size,
            batch_size: self.batch_size,
            fidelity_space,
        }
    }

    fn train_config(&self, seed: u64, warm_start: Option<Hyperparameters>) -> TrainConfig {
        TrainConfig {
            restarts: self.train.restarts,
            max_evals_per_restart: self.train.max_evals_per_restart,
            warm_start,
            ..TrainConfig::new(seed)
        }
    }

    pub fn n_seed_resolved(&self) -> usize {
        self.n_seed.unwrap_or(10 * self.benchmark.input_dim())
    }

    pub fn n_test_resolved(&self) -> usize {
        self.n_test.unwrap_or(30 * self.benchmark.input_dim())
    }
}

/// One acquisition inside a run. `rmse` is the error of the GP retrained on
/// all data up to and including this iteration's batch.
#[derive(Debug, Clone, PartialEq)]
pub struct AcquisitionRow {
    pub iteration: usize,
    pub batch_index: usize,
    pub x: Vec<f64>,
    pub s: f64,
    pub y: f64,
    pub query_cost: f64,
    pub cumulative_cost: f64,
    pub rmse: f64,
    pub fallback: bool,
}

/// Trace of one repetition.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub strategy: Strategy,
    pub repetition: usize,
    /// RMSE of the seed-only GP (iteration 0).
    pub initial_rmse: f64,
    pub rows: Vec<AcquisitionRow>,
    pub final_hyper: Hyperparameters,
    pub iteration_seconds: Vec<f64>,
    pub fallback_count: usize,
}

impl RunRecord {
    pub fn final_rmse(&self) -> f64 {
        self.rows.last().map_or(self.initial_rmse, |r| r.rmse)
    }

    pub fn final_cost(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.cumulative_cost)
    }

    /// Step interpolation of the RMSE history onto an arbitrary cost value:
    /// the RMSE of the last iteration whose cumulative cost does not exceed
    /// `c`, or the seed-only RMSE before the first acquisition.
    pub fn rmse_at_cost(&self, c: f64) -> f64 {
        let mut value = self.initial_rmse;
        for row in &self.rows {
            if row.cumulative_cost <= c {
                value = row.rmse;
            } else {
                break;
            }
        }
        value
    }
}

/// Root mean squared error of the posterior mean at s = 1 against the truth
/// on the test points.
pub fn rmse(gp: &PosteriorGP, test_points: &[Vec<f64>], truth: &Benchmark) -> Result<f64> {
    let values: Result<Vec<f64>> = test_points.iter().map(|x| truth.evaluate(x, 1.0)).collect();
    rmse_against(gp, test_points, &values?)
}

fn rmse_against(gp: &PosteriorGP, test_points: &[Vec<f64>], truth: &[f64]) -> Result<f64> {
    if test_points.is_empty() {
        return Err(MfcvError::NotEnoughData { needed: 1, got: 0 });
    }
    let mut sum = 0.0;
    for (x, t) in test_points.iter().zip(truth) {
        let (m, _) = gp.predict(x, 1.0)?;
        sum += (m - t) * (m - t);
    }
    Ok((sum / test_points.len() as f64).sqrt())
}

fn seed_plan(config: &ExperimentConfig, rep_seed: u64) -> SeedPlan {
    SeedPlan {
        seed: rep_seed,
        n_seed: config.n_seed_resolved(),
        n_test: config.n_test_resolved(),
        domain: config.benchmark.domain(),
        fidelity_space: config.benchmark.fidelity_space().clone(),
    }
}

fn joint_box(domain: &DomainBox) -> DomainBox {
    let mut lows = domain.lows().to_vec();
    let mut highs = domain.highs().to_vec();
    lows.push(0.0);
    highs.push(1.0);
    DomainBox::new(lows, highs).expect("augmented domain")
}

/// The quasi-random acquisition stream of the Sobol baseline: the first
/// `iterations * q` points of the scrambled sequence over the joint (x, s)
/// box, with the fidelity coordinate snapped to discrete levels by
/// equal-mass binning.
pub fn sobol_baseline_stream(
    config: &ExperimentConfig,
    rep_seed: u64,
) -> Result<Vec<(Vec<f64>, f64)>> {
    let domain = config.benchmark.domain();
    let space = config.benchmark.fidelity_space();
    let d = domain.dim();
    let count = config.iterations * config.batch_size;
    let pts = sobol_points(count, &joint_box(&domain), mix_seed(rep_seed, "sobol-baseline", 0))?;
    Ok(pts
        .into_iter()
        .map(|p| {
            let x = p[..d].to_vec();
            let s = snap_fidelity(p[d], space);
            (x, s)
        })
        .collect())
}

/// Run a single repetition of the config's strategy.
pub fn run_single(config: &ExperimentConfig, repetition: usize) -> Result<RunRecord> {
    config.validate()?;
    let benchmark = &config.benchmark;
    let domain = benchmark.domain();
    let rep_seed = mix_seed(config.seed, "rep", repetition as u64);
    let plan = seed_plan(config, rep_seed);

    let seed_points = plan.seed_points()?;
    let test_points = plan.test_points()?;
    let truth: Result<Vec<f64>> = test_points
        .iter()
        .map(|x| benchmark.evaluate(x, 1.0))
        .collect();
    let truth = truth?;

    let mut xs = Vec::with_capacity(seed_points.len());
    let mut ss = Vec::with_capacity(seed_points.len());
    let mut ys = Vec::with_capacity(seed_points.len());
    for (x, s) in seed_points {
        ys.push(benchmark.evaluate(&x, s)?);
        xs.push(x);
        ss.push(s);
    }
    let mut dataset = Dataset::new(domain.clone(), xs, ss, ys)?;

    let mut gp = train_and_fit(
        &dataset,
        &config.train_config(mix_seed(rep_seed, "outer-train", 0), None),
    )?;
    let initial_rmse = rmse_against(&gp, &test_points, &truth)?;
    let mut warm = Some(gp.hyper().clone());

    let sobol_stream = if config.strategy == Strategy::Sobol {
        sobol_baseline_stream(config, rep_seed)?
    } else {
        Vec::new()
    };

    let acq_cfg = config.acquisition_config();
    let q = config.batch_size;
    let mut rows: Vec<AcquisitionRow> = Vec::with_capacity(config.iterations * q);
    let mut iteration_seconds = Vec::with_capacity(config.iterations);
    let mut cumulative = 0.0;
    let mut fallback_count = 0usize;

    for t in 1..=config.iterations {
        if let Some(cap) = config.cost_cap {
            if cumulative >= cap {
                break;
            }
        }
        let started = Instant::now();

        let (picks, fallback): (Vec<(Vec<f64>, f64)>, bool) = match config.strategy {
            Strategy::Sobol => {
                let base = (t - 1) * q;
                (sobol_stream[base..base + q].to_vec(), false)
            }
            Strategy::Mfcv | Strategy::Hf => {
                let selected = cv_records(&gp)
                    .and_then(|records| {
                        let obs = log_cv_observations(&gp, &records);
                        fit_inner_gp(
                            &obs,
                            &domain,
                            &config.train_config(mix_seed(rep_seed, "inner-train", t as u64), None),
                        )
                    })
                    .and_then(|inner| {
                        cost_aware_argmax(
                            &inner,
                            &config.cost,
                            &acq_cfg,
                            mix_seed(rep_seed, "argmax", t as u64),
                        )
                    });
                match selected {
                    Ok(cands) => (cands.into_iter().map(|c| (c.x, c.s)).collect(), false),
                    Err(_) => {
                        // Acquisition failure: fall back to a uniform random
                        // batch at random fidelities, and flag the rows.
                        fallback_count += 1;
                        let mut rng = stream_rng(rep_seed, "fallback", t as u64);
                        let xs = crate::sampling::uniform_points(q, &domain, &mut rng)?;
                        let space = match config.strategy {
                            Strategy::Hf => FidelitySpace::Discrete(vec![1.0]),
                            _ => benchmark.fidelity_space().clone(),
                        };
                        (
                            xs.into_iter()
                                .map(|x| {
                                    let s = random_fidelity(&space, &mut rng);
                                    (x, s)
                                })
                                .collect(),
                            true,
                        )
                    }
                }
            }
        };

        let mut batch_rows = Vec::with_capacity(q);
        for (bi, (x, s)) in picks.iter().enumerate() {
            let y = benchmark.evaluate(x, *s)?;
            let query_cost = cost(*s, &config.cost)?;
            cumulative += query_cost;
            dataset.push(x, *s, y)?;
            batch_rows.push(AcquisitionRow {
                iteration: t,
                batch_index: bi,
                x: x.clone(),
                s: *s,
                y,
                query_cost,
                cumulative_cost: cumulative,
                rmse: f64::NAN,
                fallback,
            });
        }

        // Retrain on the grown dataset and record the post-update RMSE.
        gp = train_and_fit(
            &dataset,
            &config.train_config(mix_seed(rep_seed, "outer-train", t as u64), warm.take()),
        )?;
        warm = Some(gp.hyper().clone());
        let r = rmse_against(&gp, &test_points, &truth)?;
        for row in &mut batch_rows {
            row.rmse = r;
        }
        rows.extend(batch_rows);
        iteration_seconds.push(started.elapsed().as_secs_f64());
    }

    Ok(RunRecord {
        strategy: config.strategy,
        repetition,
        initial_rmse,
        rows,
        final_hyper: gp.hyper().clone(),
        iteration_seconds,
        fallback_count,
    })
}

/// Run one repetition of the lookahead strategy.
pub fn run_mfcv(config: &ExperimentConfig, repetition: usize) -> Result<RunRecord> {
    let mut cfg = config.clone();
    cfg.strategy = Strategy::Mfcv;
    run_single(&cfg, repetition)
}

/// Run one repetition of the single-fidelity baseline.
pub fn run_hf(config: &ExperimentConfig, repetition: usize) -> Result<RunRecord> {
    let mut cfg = config.clone();
    cfg.strategy = Strategy::Hf;
    run_single(&cfg, repetition)
}

/// Run one repetition of the quasi-random baseline.
pub fn run_sobol(config: &ExperimentConfig, repetition: usize) -> Result<RunRecord> {
    let mut cfg = config.clone();
    cfg.strategy = Strategy::Sobol;
    run_single(&cfg, repetition)
}

/// Mean/std RMSE of one strategy at one cumulative-cost grid value.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub strategy: Strategy,
    pub cost: f64,
    pub mean_rmse: f64,
    pub std_rmse: f64,
}

/// Fidelity-selection histogram entry. For discrete spaces `lo == hi` is
/// the level; for continuous spaces the bin is [lo, hi).
#[derive(Debug, Clone, PartialEq)]
pub struct FidelityHistRow {
    pub strategy: Strategy,
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub fraction: f64,
}

/// Aggregate over strategies and repetitions.
#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub runs: Vec<RunRecord>,
    pub summary: Vec<SummaryRow>,
    pub fidelity_hist: Vec<FidelityHistRow>,
    pub failures: Vec<String>,
}

fn summarize_strategy(strategy: Strategy, runs: &[&RunRecord]) -> Vec<SummaryRow> {
    let mut grid: Vec<f64> = vec![0.0];
    for run in runs {
        grid.extend(run.rows.iter().map(|r| r.cumulative_cost));
    }
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();
    grid.into_iter()
        .map(|c| {
            let values: Vec<f64> = runs.iter().map(|r| r.rmse_at_cost(c)).collect();
            let n = values.len() as f64;
            let mean = values.iter().sum::<f64>() / n;
            let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            SummaryRow {
                strategy,
                cost: c,
                mean_rmse: mean,
                std_rmse: var.sqrt(),
            }
        })
        .collect()
}

fn fidelity_histogram(
    strategy: Strategy,
    runs: &[&RunRecord],
    space: &FidelitySpace,
) -> Vec<FidelityHistRow> {
    let selections: Vec<f64> = runs
        .iter()
        .flat_map(|r| r.rows.iter().map(|row| row.s))
        .collect();
    let total = selections.len().max(1);
    match space {
        FidelitySpace::Discrete(levels) => levels
            .iter()
            .map(|&l| {
                let count = selections.iter().filter(|&&s| s == l).count();
                FidelityHistRow {
                    strategy,
                    lo: l,
                    hi: l,
                    count,
                    fraction: count as f64 / total as f64,
                }
            })
            .collect(),
        FidelitySpace::Continuous => (0..10)
            .map(|b| {
                let lo = b as f64 / 10.0;
                let hi = lo + 0.1;
                let count = selections
                    .iter()
                    .filter(|&&s| s >= lo && (s < hi || (b == 9 && s <= 1.0)))
                    .count();
                FidelityHistRow {
                    strategy,
                    lo,
                    hi,
                    count,
                    fraction: count as f64 / total as f64,
                }
            })
            .collect(),
    }
}

/// Run every config for its number of repetitions (in parallel; each
/// repetition is independently seeded so scheduling cannot change results)
/// and aggregate. Failed repetitions are reported, not fatal, unless no
/// repetition succeeds.
pub fn run_suite(configs: &[ExperimentConfig]) -> Result<SuiteReport> {
    let tasks: Vec<(usize, usize)> = configs
        .iter()
        .enumerate()
        .flat_map(|(ci, c)| (0..c.repetitions).map(move |r| (ci, r)))
        .collect();
    let outcomes: Vec<(usize, usize, Result<RunRecord>)> = tasks
        .par_iter()
        .map(|&(ci, rep)| (ci, rep, run_single(&configs[ci], rep)))
        .collect();

    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for (ci, rep, outcome) in outcomes {
        match outcome {
            Ok(run) => runs.push(run),
            Err(e) => failures.push(format!(
                "{} repetition {rep}: {e}",
                configs[ci].strategy.name()
            )),
        }
    }
    if runs.is_empty() {
        return Err(MfcvError::TrainingFailed(format!(
            "all repetitions failed: {}",
            failures.join("; ")
        )));
    }

    let mut summary = Vec::new();
    let mut fidelity_hist = Vec::new();
    for config in configs {
        let strategy_runs: Vec<&RunRecord> = runs
            .iter()
            .filter(|r| r.strategy == config.strategy)
            .collect();
        if strategy_runs.is_empty() {
            continue;
        }
        summary.extend(summarize_strategy(config.strategy, &strategy_runs));
        fidelity_hist.extend(fidelity_histogram(
            config.strategy,
            &strategy_runs,
            config.benchmark.fidelity_space(),
        ));
    }

    Ok(SuiteReport {
        runs,
        summary,
        fidelity_hist,
        failures,
    })
}
