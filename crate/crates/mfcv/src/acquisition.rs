//! Cost-aware two-step-lookahead acquisition on the log CV-error field.
//!
//! A second ("inner") GP is fit to the log expected LOO-CV error at the
//! current observation sites. The utility of a candidate batch of
//! input-fidelity pairs is the expected maximum, over the input space at the
//! target fidelity s = 1, of the inner posterior mean after conditioning on
//! fantasy observations drawn at the batch. The expectation runs over
//! quasi-random standard normal draws; conditioning is a rank-q update
//! against the inner GP's stored factor (inner hyperparameters are not
//! re-trained inside the lookahead). Candidates are ranked by acquisition
//! value divided by the normalized query cost and maximized by multi-start
//! local search, with discrete fidelity levels enumerated exactly.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::cost::{normalized_cost, CostParams};
use crate::domain::{DomainBox, FidelitySpace};
use crate::error::{MfcvError, Result};
use crate::gp::{factorize_with_jitter, train_and_fit, Dataset, PosteriorGP, TrainConfig};
use crate::kernels::joint_kernel;
use crate::loocv::LogCvObservation;
use crate::optimize::compass_search_max;
use crate::sampling::{mix_seed, sobol_points};
use crate::sobol::SobolSequence;

/// GP over (x, s) fitted to the log expected CV error.
#[derive(Debug, Clone)]
pub struct InnerGp {
    pub gp: PosteriorGP,
}

/// Fit the inner GP to the current log-CV observations, re-estimating its
/// hyperparameters from scratch. The log-error field carries a zero-mean
/// prior (zero log error away from the data), so responses are scaled but
/// never centered.
pub fn fit_inner_gp(
    observations: &[LogCvObservation],
    domain: &DomainBox,
    cfg: &TrainConfig,
) -> Result<InnerGp> {
    if observations.len() < 2 {
        return Err(MfcvError::NotEnoughData {
            needed: 2,
            got: observations.len(),
        });
    }
    let x: Vec<Vec<f64>> = observations.iter().map(|o| o.x.clone()).collect();
    let s: Vec<f64> = observations.iter().map(|o| o.s).collect();
    let y: Vec<f64> = observations.iter().map(|o| o.log_ecv).collect();
    let dataset = Dataset::new(domain.clone(), x, s, y)?;
    // The log-CV observations are chi-squared means, rough from sample to
    // sample; the deferred heteroscedastic treatment would absorb that
    // variability, so as a stand-in the inner fit is kept from chasing it:
    // lengthscales are floored at a twentieth of the (normalized) domain
    // and the noise floor sits well above interpolation level.
    let mut bounds = cfg.bounds.clone();
    bounds.lengthscale.0 = bounds.lengthscale.0.max(0.05);
    bounds.noise_variance.0 = bounds.noise_variance.0.max(1e-4);
    let cfg = TrainConfig {
        zero_mean: true,
        bounds,
        ..cfg.clone()
    };
    Ok(InnerGp {
        gp: train_and_fit(&dataset, &cfg)?,
    })
}

/// Acquisition settings.
#[derive(Debug, Clone, PartialEq)]
pub struct AcquisitionConfig {
    /// Fantasy draws per candidate evaluation (K).
    pub fantasy_samples: usize,
    /// Local-search restarts, both for the inner maximization and for the
    /// score maximization (R).
    pub inner_opt_restarts: usize,
    /// Size of the low-discrepancy candidate grid (G).
    pub candidate_grid_size: usize,
    /// Batch size q.
    pub batch_size: usize,
    /// Search space for the fidelity coordinate.
    pub fidelity_space: FidelitySpace,
}

impl AcquisitionConfig {
    pub fn new(fidelity_space: FidelitySpace) -> Self {
        Self {
            fantasy_samples: 64,
            inner_opt_restarts: 2,
            candidate_grid_size: 128,
            batch_size: 1,
            fidelity_space,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.fantasy_samples < 1 {
            return Err(MfcvError::InvalidConfig("fantasy_samples must be >= 1".into()));
        }
        if self.inner_opt_restarts < 1 {
            return Err(MfcvError::InvalidConfig(
                "inner_opt_restarts must be >= 1".into(),
            ));
        }
        if self.candidate_grid_size < 1 {
            return Err(MfcvError::InvalidConfig(
                "candidate_grid_size must be >= 1".into(),
            ));
        }
        if self.batch_size < 1 {
            return Err(MfcvError::InvalidConfig("batch_size must be >= 1".into()));
        }
        if let Some(levels) = self.fidelity_space.levels() {
            if !levels.contains(&1.0) {
                return Err(MfcvError::InvalidConfig(
                    "finite fidelity set must contain 1.0".into(),
                ));
            }
        }
        Ok(())
    }
}

/// A scored input-fidelity pair. `cost` is the normalized query cost
/// c(s)/c0; for a batch, `acquisition_value` and `score` belong to the
/// joint batch and are repeated on every member.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub x: Vec<f64>,
    pub s: f64,
    pub acquisition_value: f64,
    pub cost: f64,
    pub score: f64,
}

/// K x q standard normal fantasy draws from a scrambled low-discrepancy
/// stream. Non-finite draws are rejected and redrawn, a bounded number of
/// times.
pub fn standard_normal_fantasies(k: usize, q: usize, seed: u64) -> Result<DMatrix<f64>> {
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut seq = SobolSequence::scrambled(q, seed)?;
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut attempts = 0usize;
    while rows.len() < k {
        attempts += 1;
        if attempts > 4 * k + 16 {
            return Err(MfcvError::AcquisitionFailed(
                "could not draw finite fantasy values".into(),
            ));
        }
        let u = seq.next_point();
        let row: Vec<f64> = u
            .iter()
            .map(|v| normal.inverse_cdf(v.clamp(1e-9, 1.0 - 1e-9)))
            .collect();
        if row.iter().all(|v| v.is_finite()) {
            rows.push(row);
        }
    }
    Ok(DMatrix::from_fn(k, q, |i, j| rows[i][j]))
}

/// Rank-q fantasy conditioning of the inner GP on a candidate batch.
///
/// With A = K_n + sigma^2 I (already factored in the inner GP), B the cross
/// covariance between training sites and batch, and C the batch covariance,
/// the posterior mean conditioned on fantasy values l at the batch is
///
///   mu+(z) = mu(z) + ctilde(z)^T S^-1 (l - mu_batch)
///
/// with ctilde(z) = k(batch, z) - B^T A^-1 k(Z_n, z) and
/// S = (C - B^T A^-1 B) + sigma^2 I_q. Fantasies are drawn from the
/// noise-free posterior at the batch: l = mu_batch + L_Sigma eta.
pub struct FantasyConditioner<'a> {
    inner: &'a InnerGp,
    batch_norm: Vec<(Vec<f64>, f64)>,
    b_tilde: DMatrix<f64>,
    mu_batch: DVector<f64>,
    l_sigma: DMatrix<f64>,
    chol_s: Cholesky<f64, Dyn>,
    q: usize,
}

impl<'a> FantasyConditioner<'a> {
    pub fn new(inner: &'a InnerGp, batch: &[(Vec<f64>, f64)]) -> Result<Self> {
        if batch.is_empty() {
            return Err(MfcvError::InvalidConfig("empty candidate batch".into()));
        }
        let gp = &inner.gp;
        let domain = gp.dataset().domain();
        let n = gp.n();
        let q = batch.len();
        let hyper = gp.hyper();
        let sv = hyper.input.signal_variance;

        let mut batch_norm = Vec::with_capacity(q);
        for (x, s) in batch {
            if !(0.0..=1.0).contains(s) {
                return Err(MfcvError::OutOfDomain(format!("candidate fidelity {s}")));
            }
            batch_norm.push((domain.normalize(x)?, *s));
        }

        let mut b = DMatrix::zeros(n, q);
        for (j, (x, s)) in batch.iter().enumerate() {
            b.set_column(j, &gp.cross_covariance(x, *s)?);
        }
        let b_tilde = gp.solve_matrix(&b);
        let mut c = DMatrix::zeros(q, q);
        for j in 0..q {
            c[(j, j)] = sv;
            for l in 0..j {
                let v = joint_kernel(
                    &batch_norm[j].0,
                    batch_norm[j].1,
                    &batch_norm[l].0,
                    batch_norm[l].1,
                    &hyper.input,
                    &hyper.fidelity,
                )?;
                c[(j, l)] = v;
                c[(l, j)] = v;
            }
        }
        let mut sigma_post = &c - b.transpose() * &b_tilde;
        for j in 0..q {
            for l in 0..j {
                let v = 0.5 * (sigma_post[(j, l)] + sigma_post[(l, j)]);
                sigma_post[(j, l)] = v;
                sigma_post[(l, j)] = v;
            }
        }
        let (l_sigma_chol, _) = factorize_with_jitter(&sigma_post, 0.0, sv)?;
        let l_sigma = l_sigma_chol.l();
        let (chol_s, _) = factorize_with_jitter(&sigma_post, hyper.noise_variance, sv)?;
        let mu_batch = b.transpose() * gp.alpha();
        Ok(Self {
            inner,
            batch_norm,
            b_tilde,
            mu_batch,
            l_sigma,
            chol_s,
            q,
        })
    }

    pub fn batch_size(&self) -> usize {
        self.q
    }

    /// Fantasy values at the batch for a standard-normal draw, original units.
    pub fn fantasy_values(&self, eta: &[f64]) -> Result<Vec<f64>> {
        if eta.len() != self.q {
            return Err(MfcvError::DimensionMismatch {
                expected: self.q,
                got: eta.len(),
                context: "fantasy draw",
            });
        }
        let l = &self.mu_batch + &self.l_sigma * DVector::from_column_slice(eta);
        let scaling = self.inner.gp.scaling();
        Ok(l.iter().map(|v| scaling.destandardize_mean(*v)).collect())
    }

    /// Update weights u = S^-1 L_Sigma eta for one standard-normal draw.
    pub fn fantasy_weights(&self, eta: &[f64]) -> Result<DVector<f64>> {
        if eta.len() != self.q {
            return Err(MfcvError::DimensionMismatch {
                expected: self.q,
                got: eta.len(),
                context: "fantasy draw",
            });
        }
        let r = &self.l_sigma * DVector::from_column_slice(eta);
        Ok(self.chol_s.solve(&r))
    }

    /// Conditioned posterior mean at (x, s) in standardized units, given
    /// the training cross-covariance k_z of the query.
    fn conditioned_mean_std_with_cross(
        &self,
        x_norm: &[f64],
        s: f64,
        k_z: &DVector<f64>,
        u: &DVector<f64>,
    ) -> Result<f64> {
        let gp = &self.inner.gp;
        let hyper = gp.hyper();
        let mut value = k_z.dot(gp.alpha());
        for j in 0..self.q {
            let k_bz = joint_kernel(
                x_norm,
                s,
                &self.batch_norm[j].0,
                self.batch_norm[j].1,
                &hyper.input,
                &hyper.fidelity,
            )?;
            let c_tilde = k_bz - self.b_tilde.column(j).dot(k_z);
            value += c_tilde * u[j];
        }
        Ok(value)
    }

    fn conditioned_mean_std(&self, x: &[f64], s: f64, u: &DVector<f64>) -> Result<f64> {
        let gp = &self.inner.gp;
        let x_norm = gp.dataset().domain().normalize(x)?;
        let k_z = gp.cross_covariance(x, s)?;
        self.conditioned_mean_std_with_cross(&x_norm, s, &k_z, u)
    }

    /// Conditioned posterior mean of the inner field at (x, s) in original
    /// units, for update weights `u` from `fantasy_weights`.
    pub fn conditioned_mean(&self, x: &[f64], s: f64, u: &DVector<f64>) -> Result<f64> {
        Ok(self
            .inner
            .gp
            .scaling()
            .destandardize_mean(self.conditioned_mean_std(x, s, u)?))
    }

    /// ctilde for every grid point of the context, as a q x G matrix.
    fn grid_correlations(&self, ctx: &InnerMaxContext) -> Result<DMatrix<f64>> {
        let gp = &self.inner.gp;
        let hyper = gp.hyper();
        let g = ctx.grid_norm.len();
        let mut out = DMatrix::zeros(self.q, g);
        for (gi, z_norm) in ctx.grid_norm.iter().enumerate() {
            let k_z = ctx.k_grid.column(gi);
            for j in 0..self.q {
                let k_bz = joint_kernel(
                    z_norm,
                    1.0,
                    &self.batch_norm[j].0,
                    self.batch_norm[j].1,
                    &hyper.input,
                    &hyper.fidelity,
                )?;
                out[(j, gi)] = k_bz - self.b_tilde.column(j).dot(&k_z);
            }
        }
        Ok(out)
    }
}

/// Precomputed candidate grid at the target fidelity: raw and normalized
/// points, their cross-covariances to the training sites, the current
/// (unconditioned) posterior mean in standardized units, and the current
/// maximum of that mean as the lookahead baseline.
#[derive(Debug, Clone)]
pub struct InnerMaxContext {
    grid: Vec<Vec<f64>>,
    grid_norm: Vec<Vec<f64>>,
    k_grid: DMatrix<f64>,
    mu_grid: DVector<f64>,
    base_max: f64,
    /// Local-search restarts per fantasy; 0 disables refinement so the
    /// inner maximum is taken over the grid alone.
    pub refine_starts: usize,
    /// Evaluation budget per local search.
    pub refine_evals: usize,
}

impl InnerMaxContext {
    pub fn new(
        inner: &InnerGp,
        grid: Vec<Vec<f64>>,
        refine_starts: usize,
        refine_evals: usize,
    ) -> Result<Self> {
        if grid.is_empty() {
            return Err(MfcvError::InvalidConfig("empty candidate grid".into()));
        }
        let gp = &inner.gp;
        let domain = gp.dataset().domain();
        let n = gp.n();
        let mut k_grid = DMatrix::zeros(n, grid.len());
        let mut grid_norm = Vec::with_capacity(grid.len());
        for (gi, z) in grid.iter().enumerate() {
            k_grid.set_column(gi, &gp.cross_covariance(z, 1.0)?);
            grid_norm.push(domain.normalize(z)?);
        }
        let mu_grid = k_grid.transpose() * gp.alpha();
        let mut ctx = Self {
            grid,
            grid_norm,
            k_grid,
            mu_grid,
            base_max: f64::NEG_INFINITY,
            refine_starts,
            refine_evals,
        };
        // Baseline: the current maximum of the posterior mean at s = 1,
        // located with the same grid-plus-refinement procedure the fantasy
        // maxima use, so an uninformative fantasy scores exactly zero.
        let alpha = gp.alpha().clone();
        let base_mean = |z: &[f64]| -> f64 {
            gp.cross_covariance(z, 1.0)
                .map(|k| k.dot(&alpha))
                .unwrap_or(f64::NEG_INFINITY)
        };
        ctx.base_max = ctx.maximize(&ctx.mu_grid.clone(), domain.lows(), domain.highs(), base_mean);
        Ok(ctx)
    }

    /// Max over the grid values, refined from the top `refine_starts` grid
    /// points with a bounded local search on `objective`.
    fn maximize<F>(&self, grid_values: &DVector<f64>, lows: &[f64], highs: &[f64], objective: F) -> f64
    where
        F: Fn(&[f64]) -> f64,
    {
        let mut order: Vec<usize> = (0..grid_values.len()).collect();
        order.sort_by(|a, b| grid_values[*b].partial_cmp(&grid_values[*a]).unwrap());
        let mut best = grid_values[order[0]];
        for &start_idx in order.iter().take(self.refine_starts) {
            let (_, v) = compass_search_max(
                &objective,
                &self.grid[start_idx],
                lows,
                highs,
                self.refine_evals,
            );
            if v > best {
                best = v;
            }
        }
        best
    }

    /// Current maximum of the inner posterior mean at s = 1, in original
    /// units.
    pub fn current_max(&self, inner: &InnerGp) -> f64 {
        inner.gp.scaling().destandardize_mean(self.base_max)
    }

    /// Default grid for a config: G scrambled Sobol points over the domain.
    pub fn from_config(inner: &InnerGp, cfg: &AcquisitionConfig, seed: u64) -> Result<Self> {
        let domain = inner.gp.dataset().domain();
        let grid = sobol_points(cfg.candidate_grid_size, domain, mix_seed(seed, "inner-grid", 0))?;
        let d = domain.dim();
        Self::new(inner, grid, cfg.inner_opt_restarts, 8 + 12 * d)
    }
}

/// Joint batch acquisition value for externally supplied fantasy draws and
/// candidate grid: the expected increase, over fantasies at the batch, of
/// the maximum of the conditioned posterior mean at s = 1 relative to the
/// current maximum. This is the deterministic core of `qmfcv_acquisition`.
pub fn qmfcv_with_fantasies(
    inner: &InnerGp,
    batch: &[(Vec<f64>, f64)],
    etas: &DMatrix<f64>,
    ctx: &InnerMaxContext,
) -> Result<f64> {
    if etas.ncols() != batch.len() {
        return Err(MfcvError::DimensionMismatch {
            expected: batch.len(),
            got: etas.ncols(),
            context: "fantasy columns",
        });
    }
    let cond = FantasyConditioner::new(inner, batch)?;
    let c_grid = cond.grid_correlations(ctx)?;
    let gp = &inner.gp;
    let domain = gp.dataset().domain();
    let lows = domain.lows();
    let highs = domain.highs();

    let k_draws = etas.nrows();
    let mut total = 0.0;
    for kd in 0..k_draws {
        let eta: Vec<f64> = etas.row(kd).iter().copied().collect();
        let u = cond.fantasy_weights(&eta)?;
        let mu_plus = &ctx.mu_grid + c_grid.transpose() * &u;
        let best = ctx.maximize(&mu_plus, lows, highs, |z: &[f64]| {
            cond.conditioned_mean_std(z, 1.0, &u)
                .unwrap_or(f64::NEG_INFINITY)
        });
        total += best;
    }
    let mean_max = total / k_draws as f64;
    let scaling = gp.scaling();
    Ok(scaling.destandardize_mean(mean_max) - scaling.destandardize_mean(ctx.base_max))
}

/// Batch acquisition value: expected increase of the maximum inner
/// posterior mean at s = 1 after conditioning on fantasies at the batch.
/// Deterministic given the seed.
pub fn qmfcv_acquisition(
    inner: &InnerGp,
    batch: &[(Vec<f64>, f64)],
    cfg: &AcquisitionConfig,
    seed: u64,
) -> Result<f64> {
    cfg.validate()?;
    let etas = standard_normal_fantasies(cfg.fantasy_samples, batch.len(), mix_seed(seed, "fantasies", 0))?;
    let ctx = InnerMaxContext::from_config(inner, cfg, seed)?;
    qmfcv_with_fantasies(inner, batch, &etas, &ctx)
}

/// Single-point acquisition: the batch form with q = 1.
pub fn mfcv_acquisition(
    inner: &InnerGp,
    x: &[f64],
    s: f64,
    cfg: &AcquisitionConfig,
    seed: u64,
) -> Result<f64> {
    qmfcv_acquisition(inner, &[(x.to_vec(), s)], cfg, seed)
}

fn decode_batch(flat: &[f64], q: usize, d: usize, fixed_s: Option<&[f64]>) -> Vec<(Vec<f64>, f64)> {
    let vars_per_point = if fixed_s.is_some() { d } else { d + 1 };
    (0..q)
        .map(|j| {
            let base = j * vars_per_point;
            let x = flat[base..base + d].to_vec();
            let s = match fixed_s {
                Some(levels) => levels[j],
                None => flat[base + d],
            };
            (x, s)
        })
        .collect()
}

fn fidelity_combinations(levels: &[f64], q: usize) -> Result<Vec<Vec<f64>>> {
    let total = levels.len().checked_pow(q as u32).unwrap_or(usize::MAX);
    if total > 4096 {
        return Err(MfcvError::InvalidConfig(format!(
            "{} discrete fidelity combinations exceed the enumeration limit",
            total
        )));
    }
    let mut combos = vec![Vec::new()];
    for _ in 0..q {
        let mut next = Vec::with_capacity(combos.len() * levels.len());
        for c in &combos {
            for &l in levels {
                let mut c2 = c.clone();
                c2.push(l);
                next.push(c2);
            }
        }
        combos = next;
    }
    Ok(combos)
}

/// Maximize the cost-aware batch score over the joint input-fidelity space.
///
/// Continuous fidelity: multi-start local search over all q*(d+1)
/// coordinates, seeded from the best of a low-discrepancy scan. Discrete
/// fidelity: every combination of levels is enumerated and the inputs are
/// optimized per combination. Fantasy draws are shared across all candidate
/// evaluations so the search maximizes a deterministic function.
pub fn cost_aware_argmax(
    inner: &InnerGp,
    cost: &CostParams,
    cfg: &AcquisitionConfig,
    seed: u64,
) -> Result<Vec<Candidate>> {
    cfg.validate()?;
    let q = cfg.batch_size;
    let domain = inner.gp.dataset().domain().clone();
    let d = domain.dim();
    let etas = standard_normal_fantasies(cfg.fantasy_samples, q, mix_seed(seed, "fantasies", 0))?;
    let ctx = InnerMaxContext::from_config(inner, cfg, seed)?;

    let value_of = |batch: &[(Vec<f64>, f64)]| qmfcv_with_fantasies(inner, batch, &etas, &ctx);
    let score_of = |batch: &[(Vec<f64>, f64)]| -> f64 {
        let total_cost: f64 = batch
            .iter()
            .map(|(_, s)| normalized_cost(*s, cost).unwrap_or(f64::INFINITY))
            .sum();
        match value_of(batch) {
            Ok(v) => v / total_cost,
            Err(_) => f64::NEG_INFINITY,
        }
    };

    let mut best_batch: Option<(Vec<(Vec<f64>, f64)>, f64)> = None;
    let mut consider = |batch: Vec<(Vec<f64>, f64)>, score: f64| {
        if score.is_finite() {
            match &best_batch {
                Some((_, bs)) if *bs >= score => {}
                _ => best_batch = Some((batch, score)),
            }
        }
    };

    match &cfg.fidelity_space {
        FidelitySpace::Continuous => {
            let mut lows = Vec::with_capacity(q * (d + 1));
            let mut highs = Vec::with_capacity(q * (d + 1));
            for _ in 0..q {
                lows.extend_from_slice(domain.lows());
                lows.push(0.0);
                highs.extend_from_slice(domain.highs());
                highs.push(1.0);
            }
            let scan_box = DomainBox::new(lows.clone(), highs.clone())?;
            let scan = sobol_points(cfg.candidate_grid_size, &scan_box, mix_seed(seed, "argmax-scan", 0))?;
            let mut scored: Vec<(Vec<f64>, f64)> = scan
                .into_iter()
                .map(|flat| {
                    let sc = score_of(&decode_batch(&flat, q, d, None));
                    (flat, sc)
                })
                .collect();
            scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
            let budget = 25 * q * (d + 1);
            for (start, start_score) in scored.iter().take(cfg.inner_opt_restarts) {
                consider(decode_batch(start, q, d, None), *start_score);
                let (flat, sc) = compass_search_max(
                    |flat: &[f64]| score_of(&decode_batch(flat, q, d, None)),
                    start,
                    &lows,
                    &highs,
                    budget,
                );
                consider(decode_batch(&flat, q, d, None), sc);
            }
        }
        FidelitySpace::Discrete(levels) => {
            let combos = fidelity_combinations(levels, q)?;
            let scan_per_combo = (cfg.candidate_grid_size / combos.len()).max(8);
            let starts_per_combo = (cfg.inner_opt_restarts + combos.len() - 1) / combos.len();
            let mut lows = Vec::with_capacity(q * d);
            let mut highs = Vec::with_capacity(q * d);
            for _ in 0..q {
                lows.extend_from_slice(domain.lows());
                highs.extend_from_slice(domain.highs());
            }
            let scan_box = DomainBox::new(lows.clone(), highs.clone())?;
            let budget = 25 * q * d;
            for (ci, combo) in combos.iter().enumerate() {
                let scan = sobol_points(
                    scan_per_combo,
                    &scan_box,
                    mix_seed(seed, "argmax-scan-discrete", ci as u64),
                )?;
                let mut scored: Vec<(Vec<f64>, f64)> = scan
                    .into_iter()
                    .map(|flat| {
                        let sc = score_of(&decode_batch(&flat, q, d, Some(combo)));
                        (flat, sc)
                    })
                    .collect();
                scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
                for (start, start_score) in scored.iter().take(starts_per_combo.max(1)) {
                    consider(decode_batch(start, q, d, Some(combo)), *start_score);
                    let (flat, sc) = compass_search_max(
                        |flat: &[f64]| score_of(&decode_batch(flat, q, d, Some(combo))),
                        start,
                        &lows,
                        &highs,
                        budget,
                    );
                    consider(decode_batch(&flat, q, d, Some(combo)), sc);
                }
            }
        }
    }

    let (batch, score) = best_batch.ok_or_else(|| {
        MfcvError::AcquisitionFailed("no candidate produced a finite score".into())
    })?;
    let acquisition_value = value_of(&batch)?;
    batch
        .into_iter()
        .map(|(x, s)| {
            Ok(Candidate {
                x,
                s,
                acquisition_value,
                cost: normalized_cost(s, cost)?,
                score,
            })
        })
        .collect()
}
