//! Multifidelity Gaussian-process posterior over the joint (x, s) space.
//!
//! Inputs are normalized to the unit hypercube and responses are
//! standardized to zero mean and unit variance before any kernel or
//! likelihood evaluation; predictions are mapped back on output. The
//! covariance factorization is a dense Cholesky with an escalating jitter
//! policy. Hyperparameters are estimated by multi-start maximization of the
//! log marginal likelihood in log space.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::domain::DomainBox;
use crate::error::{MfcvError, Result};
use crate::kernels::{
    kernel_cross, kernel_matrix, FidelityKernelParams, InputKernelParams,
};
use crate::optimize::nelder_mead_max;
use crate::sampling::mix_seed;
use crate::sobol::SobolSequence;

const LOG_2PI: f64 = 1.837_877_066_409_345_3;

/// Observation record: inputs, fidelities and responses.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    domain: DomainBox,
    x: DMatrix<f64>,
    s: DVector<f64>,
    y: DVector<f64>,
}

impl Dataset {
    pub fn new(domain: DomainBox, x: Vec<Vec<f64>>, s: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != s.len() || x.len() != y.len() {
            return Err(MfcvError::DimensionMismatch {
                expected: x.len(),
                got: s.len().min(y.len()),
                context: "dataset lengths",
            });
        }
        if x.is_empty() {
            return Err(MfcvError::NotEnoughData { needed: 1, got: 0 });
        }
        let d = domain.dim();
        let mut m = DMatrix::zeros(x.len(), d);
        for (i, row) in x.iter().enumerate() {
            if !domain.contains(row) {
                return Err(MfcvError::OutOfDomain(format!(
                    "input row {i} outside the declared domain"
                )));
            }
            for (j, v) in row.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        for (i, v) in s.iter().enumerate() {
            if !(0.0..=1.0).contains(v) {
                return Err(MfcvError::OutOfDomain(format!("fidelity {v} at row {i}")));
            }
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(MfcvError::InvalidParameter {
                name: "y",
                reason: "responses must be finite".into(),
            });
        }
        Ok(Self {
            domain,
            x: m,
            s: DVector::from_vec(s),
            y: DVector::from_vec(y),
        })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    pub fn domain(&self) -> &DomainBox {
        &self.domain
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn s(&self) -> &DVector<f64> {
        &self.s
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn input_row(&self, i: usize) -> Vec<f64> {
        self.x.row(i).iter().copied().collect()
    }

    /// Append one observation.
    pub fn push(&mut self, x: &[f64], s: f64, y: f64) -> Result<()> {
        if !self.domain.contains(x) {
            return Err(MfcvError::OutOfDomain("appended input outside domain".into()));
        }
        if !(0.0..=1.0).contains(&s) {
            return Err(MfcvError::OutOfDomain(format!("appended fidelity {s}")));
        }
        if !y.is_finite() {
            return Err(MfcvError::InvalidParameter {
                name: "y",
                reason: "appended response must be finite".into(),
            });
        }
        let n = self.n();
        let d = self.dim();
        let mut m = DMatrix::zeros(n + 1, d);
        m.view_mut((0, 0), (n, d)).copy_from(&self.x);
        for (j, v) in x.iter().enumerate() {
            m[(n, j)] = *v;
        }
        self.x = m;
        self.s = DVector::from_iterator(n + 1, self.s.iter().copied().chain([s]));
        self.y = DVector::from_iterator(n + 1, self.y.iter().copied().chain([y]));
        Ok(())
    }

    /// Rows of `x` mapped to the unit hypercube.
    pub fn normalized_inputs(&self) -> DMatrix<f64> {
        let mut m = self.x.clone();
        for j in 0..self.dim() {
            let lo = self.domain.lows()[j];
            let w = self.domain.width(j);
            for i in 0..self.n() {
                m[(i, j)] = (m[(i, j)] - lo) / w;
            }
        }
        m
    }
}

/// Kernel and noise parameters of the joint GP.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperparameters {
    pub input: InputKernelParams,
    pub fidelity: FidelityKernelParams,
    pub noise_variance: f64,
}

impl Hyperparameters {
    pub fn new(
        input: InputKernelParams,
        fidelity: FidelityKernelParams,
        noise_variance: f64,
    ) -> Result<Self> {
        if !noise_variance.is_finite() || noise_variance < 0.0 {
            return Err(MfcvError::InvalidParameter {
                name: "noise_variance",
                reason: "must be non-negative and finite".into(),
            });
        }
        Ok(Self {
            input,
            fidelity,
            noise_variance,
        })
    }
}

/// Affine response scaling used internally by `fit` and `train`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseScaling {
    pub mean: f64,
    pub std: f64,
}

impl ResponseScaling {
    pub fn of(y: &DVector<f64>) -> Self {
        let n = y.len() as f64;
        let mean = y.sum() / n;
        let var = y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let std = var.sqrt();
        let std = if std > 1e-12 * mean.abs().max(1.0) { std } else { 1.0 };
        Self { mean, std }
    }

    pub fn standardize(&self, v: f64) -> f64 {
        (v - self.mean) / self.std
    }

    pub fn destandardize_mean(&self, v: f64) -> f64 {
        v * self.std + self.mean
    }

    pub fn destandardize_variance(&self, v: f64) -> f64 {
        v * self.std * self.std
    }
}

/// The dataset with standardized responses, plus the scaling that undoes it.
pub fn standardize_responses(dataset: &Dataset) -> (Dataset, ResponseScaling) {
    let scaling = ResponseScaling::of(dataset.y());
    let mut std = dataset.clone();
    std.y = dataset.y.map(|v| scaling.standardize(v));
    (std, scaling)
}

/// Scale-only variant for responses modeled with a zero-mean prior: no
/// centering, root-mean-square normalization.
pub fn scale_responses_zero_mean(dataset: &Dataset) -> (Dataset, ResponseScaling) {
    let y = dataset.y();
    let rms = (y.iter().map(|v| v * v).sum::<f64>() / y.len() as f64).sqrt();
    let scaling = ResponseScaling {
        mean: 0.0,
        std: if rms > 1e-12 { rms } else { 1.0 },
    };
    let mut scaled = dataset.clone();
    scaled.y = dataset.y.map(|v| scaling.standardize(v));
    (scaled, scaling)
}

/// Cholesky of `k` plus noise and jitter. Jitter starts at 1e-8 times the
/// signal variance and escalates tenfold up to 1e-4 before giving up.
pub(crate) fn factorize_with_jitter(
    k: &DMatrix<f64>,
    noise_variance: f64,
    signal_variance: f64,
) -> Result<(Cholesky<f64, Dyn>, f64)> {
    let n = k.nrows();
    let mut jitter = 1e-8 * signal_variance;
    let max_jitter = 1e-4 * signal_variance;
    loop {
        let mut m = k.clone();
        for i in 0..n {
            m[(i, i)] += noise_variance + jitter;
        }
        if let Some(chol) = m.cholesky() {
            return Ok((chol, jitter));
        }
        jitter *= 10.0;
        if jitter > max_jitter * 1.000_001 {
            return Err(MfcvError::SingularModel);
        }
    }
}

/// Trained multifidelity GP posterior.
#[derive(Debug, Clone)]
pub struct PosteriorGP {
    dataset: Dataset,
    hyper: Hyperparameters,
    scaling: ResponseScaling,
    x_norm: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
    alpha: DVector<f64>,
    jitter: f64,
}

impl PosteriorGP {
    /// Condition the GP on the dataset under fixed hyperparameters, with
    /// responses centered and scaled internally.
    pub fn fit(dataset: Dataset, hyper: Hyperparameters) -> Result<Self> {
        Self::fit_scaled(dataset, hyper, false)
    }

    /// Like `fit`, but with a zero-mean prior on the responses: they are
    /// only rescaled, never centered, so the posterior reverts to zero away
    /// from the data.
    pub fn fit_zero_mean(dataset: Dataset, hyper: Hyperparameters) -> Result<Self> {
        Self::fit_scaled(dataset, hyper, true)
    }

    fn fit_scaled(dataset: Dataset, hyper: Hyperparameters, zero_mean: bool) -> Result<Self> {
        if hyper.input.dim() != dataset.dim() {
            return Err(MfcvError::DimensionMismatch {
                expected: dataset.dim(),
                got: hyper.input.dim(),
                context: "fit lengthscales",
            });
        }
        let (std_data, scaling) = if zero_mean {
            scale_responses_zero_mean(&dataset)
        } else {
            standardize_responses(&dataset)
        };
        let x_norm = dataset.normalized_inputs();
        let k = kernel_matrix(&x_norm, dataset.s(), &hyper.input, &hyper.fidelity)?;
        let (chol, jitter) = factorize_with_jitter(&k, hyper.noise_variance, hyper.input.signal_variance)?;
        let alpha = chol.solve(std_data.y());
        Ok(Self {
            dataset,
            hyper,
            scaling,
            x_norm,
            chol,
            alpha,
            jitter,
        })
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    pub fn hyper(&self) -> &Hyperparameters {
        &self.hyper
    }

    pub fn scaling(&self) -> ResponseScaling {
        self.scaling
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn n(&self) -> usize {
        self.dataset.n()
    }

    /// Precomputed (K + sigma^2 I)^-1 y_std.
    pub fn alpha(&self) -> &DVector<f64> {
        &self.alpha
    }

    /// Responses in standardized units.
    pub fn standardized_y(&self) -> DVector<f64> {
        self.dataset.y().map(|v| self.scaling.standardize(v))
    }

    /// Solve (K + sigma^2 I) v = b against the stored factor.
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(b)
    }

    /// Column-wise solve for matrices.
    pub fn solve_matrix(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        self.chol.solve(b)
    }

    /// Covariance vector between a raw-coordinate query and the training sites.
    pub fn cross_covariance(&self, x: &[f64], s: f64) -> Result<DVector<f64>> {
        let u = self.dataset.domain().normalize(x)?;
        kernel_cross(&u, s, &self.x_norm, self.dataset.s(), &self.hyper.input, &self.hyper.fidelity)
    }

    /// Posterior mean and variance in standardized response units.
    pub fn predict_standardized(&self, x: &[f64], s: f64) -> Result<(f64, f64)> {
        if !(0.0..=1.0).contains(&s) {
            return Err(MfcvError::OutOfDomain(format!("fidelity {s} outside [0, 1]")));
        }
        let k = self.cross_covariance(x, s)?;
        let mean = k.dot(&self.alpha);
        let v = self.chol.solve(&k);
        let sv = self.hyper.input.signal_variance;
        let variance = (sv - k.dot(&v)).clamp(0.0, sv);
        Ok((mean, variance))
    }

    /// Posterior mean and variance in original response units.
    pub fn predict(&self, x: &[f64], s: f64) -> Result<(f64, f64)> {
        let (m, v) = self.predict_standardized(x, s)?;
        Ok((
            self.scaling.destandardize_mean(m),
            self.scaling.destandardize_variance(v),
        ))
    }
}

/// Log marginal likelihood of the dataset under the given hyperparameters,
/// computed on the responses as given (no standardization) with inputs
/// normalized to the unit hypercube. Returns negative infinity when the
/// covariance cannot be factorized even with maximal jitter.
pub fn log_marginal_likelihood(dataset: &Dataset, hyper: &Hyperparameters) -> Result<f64> {
    if hyper.input.dim() != dataset.dim() {
        return Err(MfcvError::DimensionMismatch {
            expected: dataset.dim(),
            got: hyper.input.dim(),
            context: "log_marginal_likelihood",
        });
    }
    let x_norm = dataset.normalized_inputs();
    Ok(lml_normalized(&x_norm, dataset.s(), dataset.y(), hyper))
}

fn lml_normalized(
    x_norm: &DMatrix<f64>,
    s: &DVector<f64>,
    y: &DVector<f64>,
    hyper: &Hyperparameters,
) -> f64 {
    let k = match kernel_matrix(x_norm, s, &hyper.input, &hyper.fidelity) {
        Ok(k) => k,
        Err(_) => return f64::NEG_INFINITY,
    };
    let (chol, _) = match factorize_with_jitter(&k, hyper.noise_variance, hyper.input.signal_variance) {
        Ok(c) => c,
        Err(_) => return f64::NEG_INFINITY,
    };
    let alpha = chol.solve(y);
    let n = y.len() as f64;
    let log_det_half: f64 = chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum();
    -0.5 * y.dot(&alpha) - log_det_half - 0.5 * n * LOG_2PI
}

/// Bounds for the hyperparameter search, in the units of the standardized
/// problem: lengthscales per normalized input dimension, variances relative
/// to the (unit) response variance.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperBounds {
    pub lengthscale: (f64, f64),
    pub signal_variance: (f64, f64),
    pub noise_variance: (f64, f64),
}

impl Default for HyperBounds {
    fn default() -> Self {
        Self {
            lengthscale: (1e-2, 1e2),
            signal_variance: (1e-3, 1e3),
            noise_variance: (1e-8, 1.0),
        }
    }
}

/// Settings for multi-start marginal-likelihood training.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub bounds: HyperBounds,
    pub restarts: usize,
    pub seed: u64,
    pub max_evals_per_restart: usize,
    pub warm_start: Option<Hyperparameters>,
    /// Train against uncentered (zero-mean prior) responses.
    pub zero_mean: bool,
}

impl TrainConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            bounds: HyperBounds::default(),
            restarts: 10,
            seed,
            max_evals_per_restart: 250,
            warm_start: None,
            zero_mean: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainResult {
    pub hyper: Hyperparameters,
    pub log_marginal: f64,
    pub restart_index: usize,
}

fn theta_to_hyper(theta: &[f64], d: usize) -> Hyperparameters {
    let lengthscales: Vec<f64> = theta[..d].iter().map(|t| t.exp()).collect();
    Hyperparameters {
        input: InputKernelParams {
            lengthscales,
            signal_variance: theta[d].exp(),
        },
        fidelity: FidelityKernelParams {
            lengthscale: theta[d + 1].exp(),
        },
        noise_variance: theta[d + 2].exp(),
    }
}

/// Maximize the log marginal likelihood of the standardized dataset over
/// kernel lengthscales, signal variance and noise variance, all in log
/// space, from `restarts` low-discrepancy starting points (plus an optional
/// warm start). Deterministic given the seed; ties resolve to the lowest
/// restart index.
pub fn train_detailed(dataset: &Dataset, cfg: &TrainConfig) -> Result<TrainResult> {
    if cfg.restarts < 1 {
        return Err(MfcvError::InvalidConfig("restarts must be at least 1".into()));
    }
    let d = dataset.dim();
    let dim = d + 3;
    let (std_data, _) = if cfg.zero_mean {
        scale_responses_zero_mean(dataset)
    } else {
        standardize_responses(dataset)
    };
    let x_norm = std_data.normalized_inputs();
    let s = std_data.s().clone();
    let y = std_data.y().clone();

    let mut lows = vec![cfg.bounds.lengthscale.0.ln(); d];
    let mut highs = vec![cfg.bounds.lengthscale.1.ln(); d];
    lows.push(cfg.bounds.signal_variance.0.ln());
    highs.push(cfg.bounds.signal_variance.1.ln());
    lows.push(cfg.bounds.lengthscale.0.ln());
    highs.push(cfg.bounds.lengthscale.1.ln());
    lows.push(cfg.bounds.noise_variance.0.ln());
    highs.push(cfg.bounds.noise_variance.1.ln());

    let objective = |theta: &[f64]| {
        let hyper = theta_to_hyper(theta, d);
        lml_normalized(&x_norm, &s, &y, &hyper)
    };

    let mut starts: Vec<Vec<f64>> = Vec::with_capacity(cfg.restarts + 1);
    if let Some(w) = &cfg.warm_start {
        let mut theta: Vec<f64> = w.input.lengthscales.iter().map(|l| l.ln()).collect();
        theta.push(w.input.signal_variance.ln());
        theta.push(w.fidelity.lengthscale.ln());
        theta.push(w.noise_variance.max(cfg.bounds.noise_variance.0).ln());
        for i in 0..dim {
            theta[i] = theta[i].clamp(lows[i], highs[i]);
        }
        starts.push(theta);
    }
    let mut seq = SobolSequence::scrambled(dim, mix_seed(cfg.seed, "train-starts", 0))?;
    for _ in 0..cfg.restarts {
        let u = seq.next_point();
        starts.push(
            (0..dim)
                .map(|i| lows[i] + u[i] * (highs[i] - lows[i]))
                .collect(),
        );
    }

    let mut best: Option<(usize, Vec<f64>, f64)> = None;
    for (idx, start) in starts.iter().enumerate() {
        let (theta, value) = nelder_mead_max(
            &objective,
            start,
            &lows,
            &highs,
            cfg.max_evals_per_restart,
        );
        let replace = match &best {
            None => value > f64::NEG_INFINITY,
            Some((_, _, bv)) => value > *bv,
        };
        if replace {
            best = Some((idx, theta, value));
        }
    }

    match best {
        Some((restart_index, theta, log_marginal)) if log_marginal.is_finite() => Ok(TrainResult {
            hyper: theta_to_hyper(&theta, d),
            log_marginal,
            restart_index,
        }),
        _ => Err(MfcvError::TrainingFailed(
            "all restarts failed to factorize the covariance".into(),
        )),
    }
}

/// `train_detailed` without the diagnostics.
pub fn train(dataset: &Dataset, cfg: &TrainConfig) -> Result<Hyperparameters> {
    train_detailed(dataset, cfg).map(|r| r.hyper)
}

/// Convenience: train then fit on the same dataset, under the same
/// response-scaling policy.
pub fn train_and_fit(dataset: &Dataset, cfg: &TrainConfig) -> Result<PosteriorGP> {
    let hyper = train(dataset, cfg)?;
    PosteriorGP::fit_scaled(dataset.clone(), hyper, cfg.zero_mean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_hyper(d: usize) -> Hyperparameters {
        Hyperparameters::new(
            InputKernelParams::new(vec![1.0; d], 1.0).unwrap(),
            FidelityKernelParams::new(1.0).unwrap(),
            0.0,
        )
        .unwrap()
    }

    fn toy_dataset(n: usize, d: usize, seed: u64) -> Dataset {
        let domain = DomainBox::unit(d);
        let mut rng = crate::sampling::stream_rng(seed, "gp-test", 0);
        let x = crate::sampling::uniform_points(n, &domain, &mut rng).unwrap();
        let s: Vec<f64> = crate::sampling::uniform_points(n, &DomainBox::unit(1), &mut rng)
            .unwrap()
            .into_iter()
            .map(|p| p[0])
            .collect();
        let y: Vec<f64> = x
            .iter()
            .zip(&s)
            .map(|(p, si)| (3.0 * p[0]).sin() + 0.5 * si + p.iter().sum::<f64>())
            .collect();
        Dataset::new(domain, x, s, y).unwrap()
    }

    #[test]
    fn dataset_validation() {
        let domain = DomainBox::unit(2);
        assert!(Dataset::new(domain.clone(), vec![], vec![], vec![]).is_err());
        assert!(Dataset::new(
            domain.clone(),
            vec![vec![0.5, 0.5]],
            vec![1.5],
            vec![0.0]
        )
        .is_err());
        assert!(Dataset::new(
            domain.clone(),
            vec![vec![2.0, 0.5]],
            vec![1.0],
            vec![0.0]
        )
        .is_err());
        assert!(Dataset::new(domain, vec![vec![0.5, 0.5]], vec![1.0], vec![f64::NAN]).is_err());
    }

    #[test]
    fn single_point_interpolates_exactly() {
        let domain = DomainBox::unit(1);
        let data = Dataset::new(domain, vec![vec![0.4]], vec![1.0], vec![2.5]).unwrap();
        let gp = PosteriorGP::fit(data, unit_hyper(1)).unwrap();
        let (m, v) = gp.predict(&[0.4], 1.0).unwrap();
        assert_relative_eq!(m, 2.5, max_relative = 1e-6);
        assert!(v < 1e-6);
    }

    #[test]
    fn duplicate_inputs_with_noise_do_not_crash() {
        let domain = DomainBox::unit(1);
        let data = Dataset::new(
            domain,
            vec![vec![0.4], vec![0.4]],
            vec![1.0, 1.0],
            vec![1.0, 3.0],
        )
        .unwrap();
        let mut hyper = unit_hyper(1);
        hyper.noise_variance = 0.5;
        let gp = PosteriorGP::fit(data, hyper).unwrap();
        let (m, v) = gp.predict(&[0.4], 1.0).unwrap();
        // Shrunk toward the mean of the duplicate observations.
        assert!((m - 2.0).abs() < 0.5, "mean {m}");
        assert!(v > 0.0);
    }

    #[test]
    fn far_query_reverts_to_prior() {
        let domain = DomainBox::unit(1);
        let data = Dataset::new(
            domain,
            vec![vec![0.0], vec![0.01], vec![0.02], vec![0.03]],
            vec![1.0; 4],
            vec![1.0, -1.0, 2.0, -2.0],
        )
        .unwrap();
        let mut hyper = unit_hyper(1);
        hyper.input.lengthscales = vec![1e-3];
        let gp = PosteriorGP::fit(data, hyper).unwrap();
        let (m, v) = gp.predict(&[1.0], 1.0).unwrap();
        // Standardized prior mean is zero; responses average zero here.
        assert!(m.abs() < 1e-6, "mean {m}");
        let prior_var = gp.scaling().destandardize_variance(1.0);
        assert_relative_eq!(v, prior_var, max_relative = 1e-6);
    }

    #[test]
    fn training_point_prediction_interpolates_without_noise() {
        let data = toy_dataset(12, 2, 9);
        let gp = PosteriorGP::fit(data.clone(), unit_hyper(2)).unwrap();
        for i in 0..data.n() {
            let (m, v) = gp.predict(&data.input_row(i), data.s()[i]).unwrap();
            assert_relative_eq!(m, data.y()[i], max_relative = 1e-6);
            let sv = gp.scaling().destandardize_variance(1.0);
            assert!(v <= 1e-6 * sv, "variance {v}");
        }
    }

    #[test]
    fn lml_single_point_reference_values() {
        let domain = DomainBox::unit(1);
        let hyper = unit_hyper(1);
        let d0 = Dataset::new(domain.clone(), vec![vec![0.3]], vec![1.0], vec![0.0]).unwrap();
        let v0 = log_marginal_likelihood(&d0, &hyper).unwrap();
        assert_relative_eq!(v0, -0.5 * LOG_2PI, epsilon = 1e-6);
        let d1 = Dataset::new(domain, vec![vec![0.3]], vec![1.0], vec![1.0]).unwrap();
        let v1 = log_marginal_likelihood(&d1, &hyper).unwrap();
        assert_relative_eq!(v1, -0.5 - 0.5 * LOG_2PI, epsilon = 1e-6);
    }

    #[test]
    fn solve_contract() {
        let data = toy_dataset(10, 2, 3);
        let mut hyper = unit_hyper(2);
        hyper.noise_variance = 0.01;
        let gp = PosteriorGP::fit(data.clone(), hyper.clone()).unwrap();
        let x_norm = data.normalized_inputs();
        let mut k = kernel_matrix(&x_norm, data.s(), &hyper.input, &hyper.fidelity).unwrap();
        for i in 0..data.n() {
            k[(i, i)] += hyper.noise_variance + gp.jitter();
        }
        // b = 0 -> v = 0
        assert_eq!(gp.solve(&DVector::zeros(data.n())).norm(), 0.0);
        // b = column i of the system matrix -> unit vector
        let b = DVector::from_column_slice(k.column(2).as_slice());
        let v = gp.solve(&b);
        for i in 0..data.n() {
            let expected = if i == 2 { 1.0 } else { 0.0 };
            assert!((v[i] - expected).abs() < 1e-8, "v[{i}] = {}", v[i]);
        }
        // random b: residual must be tiny
        let b2 = DVector::from_fn(data.n(), |i, _| (i as f64 * 0.7).sin());
        let v2 = gp.solve(&b2);
        let resid = (&k * &v2 - &b2).norm() / b2.norm();
        assert!(resid <= 1e-8, "residual {resid}");
    }

    #[test]
    fn variance_never_increases_with_data() {
        let mut data = toy_dataset(8, 2, 5);
        let mut hyper = unit_hyper(2);
        hyper.noise_variance = 1e-4;
        hyper.input.lengthscales = vec![0.5, 0.5];
        let gp_before = PosteriorGP::fit(data.clone(), hyper.clone()).unwrap();
        data.push(&[0.5, 0.5], 0.7, 1.0).unwrap();
        let gp_after = PosteriorGP::fit(data, hyper).unwrap();
        let mut rng = crate::sampling::stream_rng(17, "queries", 0);
        let queries =
            crate::sampling::uniform_points(20, &DomainBox::unit(2), &mut rng).unwrap();
        for q in queries {
            let (_, v0) = gp_before.predict_standardized(&q, 1.0).unwrap();
            let (_, v1) = gp_after.predict_standardized(&q, 1.0).unwrap();
            assert!(
                v1 <= v0 + 1e-8,
                "variance increased at {q:?}: {v0} -> {v1}"
            );
        }
    }

    #[test]
    fn posterior_slice_at_target_fidelity_is_smooth() {
        let data = toy_dataset(15, 1, 21);
        let gp = train_and_fit(&data, &TrainConfig::new(4)).unwrap();
        for i in 0..100 {
            let x = i as f64 / 99.0;
            let (m, v) = gp.predict(&[x], 1.0).unwrap();
            assert!(m.is_finite() && v.is_finite());
        }
    }

    #[test]
    fn train_is_deterministic_and_ascends() {
        let data = toy_dataset(12, 1, 7);
        let cfg = TrainConfig {
            restarts: 3,
            max_evals_per_restart: 120,
            ..TrainConfig::new(99)
        };
        let r1 = train_detailed(&data, &cfg).unwrap();
        let r2 = train_detailed(&data, &cfg).unwrap();
        assert_eq!(r1.hyper, r2.hyper);

        // Restarting from a previous optimum cannot decrease the likelihood.
        let warm_cfg = TrainConfig {
            restarts: 1,
            warm_start: Some(r1.hyper.clone()),
            ..cfg
        };
        let r3 = train_detailed(&data, &warm_cfg).unwrap();
        assert!(r3.log_marginal >= r1.log_marginal - 1e-9);

        let (std_data, _) = standardize_responses(&data);
        let check = log_marginal_likelihood(&std_data, &r1.hyper).unwrap();
        assert_relative_eq!(check, r1.log_marginal, max_relative = 1e-9);
    }

    #[test]
    fn train_handles_constant_responses() {
        let domain = DomainBox::unit(1);
        let data = Dataset::new(
            domain,
            vec![vec![0.1], vec![0.5], vec![0.9]],
            vec![1.0, 1.0, 1.0],
            vec![4.2, 4.2, 4.2],
        )
        .unwrap();
        let cfg = TrainConfig {
            restarts: 2,
            max_evals_per_restart: 80,
            ..TrainConfig::new(3)
        };
        let gp = train_and_fit(&data, &cfg).unwrap();
        let (m, _) = gp.predict(&[0.3], 1.0).unwrap();
        assert_relative_eq!(m, 4.2, max_relative = 1e-3);
    }

    #[test]
    fn noise_recovery_within_order_of_magnitude() {
        // Sample from a known GP prior plus known observation noise.
        let domain = DomainBox::unit(1);
        let n = 60;
        let mut rng = crate::sampling::stream_rng(31, "gen", 0);
        let x = crate::sampling::uniform_points(n, &domain, &mut rng).unwrap();
        let s = vec![1.0; n];
        let hyper = Hyperparameters::new(
            InputKernelParams::new(vec![0.3], 1.0).unwrap(),
            FidelityKernelParams::new(1.0).unwrap(),
            0.0,
        )
        .unwrap();
        let mut xm = DMatrix::zeros(n, 1);
        for (i, p) in x.iter().enumerate() {
            xm[(i, 0)] = p[0];
        }
        let k = kernel_matrix(
            &xm,
            &DVector::from_vec(s.clone()),
            &hyper.input,
            &hyper.fidelity,
        )
        .unwrap();
        let (chol, _) = factorize_with_jitter(&k, 0.0, 1.0).unwrap();
        use rand::Rng;
        let z = DVector::from_fn(n, |_, _| {
            // Box-Muller from two uniform draws.
            let u1: f64 = rng.random_range(1e-12..1.0);
            let u2: f64 = rng.random_range(0.0..1.0);
            (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
        });
        let latent = chol.l() * z;
        let true_noise: f64 = 0.01;
        let y: Vec<f64> = (0..n)
            .map(|i| {
                let u1: f64 = rng.random_range(1e-12..1.0);
                let u2: f64 = rng.random_range(0.0..1.0);
                let eps = (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
                latent[i] + true_noise.sqrt() * eps
            })
            .collect();
        let data = Dataset::new(domain, x, s, y).unwrap();
        let cfg = TrainConfig {
            restarts: 6,
            max_evals_per_restart: 250,
            ..TrainConfig::new(12)
        };
        let fitted = train(&data, &cfg).unwrap();
        let ratio = fitted.noise_variance / true_noise;
        assert!(
            (0.1..=10.0).contains(&ratio),
            "recovered noise {} vs true {true_noise}",
            fitted.noise_variance
        );
    }
}
