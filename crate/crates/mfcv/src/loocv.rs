//! Closed-form leave-one-out cross-validation statistics.
//!
//! For a GP with system matrix K = K_n + sigma_eps^2 I, the held-out
//! predictive moments at site i are
//!
//!   mu_-i    = y_i - [K^-1 y]_i / [K^-1]_ii
//!   sigma_-i = 1 / [K^-1]_ii
//!
//! in standardized response units, where y_i is the observed (standardized)
//! response. The squared residual follows a noncentral chi-squared law with
//! one degree of freedom, whose first two moments are stored per record.
//! The diagonal of K^-1 is obtained with exactly n solves against the stored
//! Cholesky factor; nothing is refactorized.

use nalgebra::DVector;

use crate::error::{MfcvError, Result};
use crate::gp::PosteriorGP;

/// Held-out predictive moments for one observation site.
#[derive(Debug, Clone, PartialEq)]
pub struct LooStat {
    pub index: usize,
    pub mean: f64,
    pub variance: f64,
}

/// Per-site cross-validation record: held-out moments plus the moments of
/// the chi-squared CV error and its log.
#[derive(Debug, Clone, PartialEq)]
pub struct CvRecord {
    pub index: usize,
    pub loo_mean: f64,
    pub loo_variance: f64,
    pub ecv_mean: f64,
    pub ecv_variance: f64,
    pub log_ecv: f64,
}

/// One training site of the inner GP on the log CV error.
#[derive(Debug, Clone, PartialEq)]
pub struct LogCvObservation {
    pub x: Vec<f64>,
    pub s: f64,
    pub log_ecv: f64,
}

pub(crate) fn loo_statistics_counted(gp: &PosteriorGP) -> Result<(Vec<LooStat>, usize)> {
    let n = gp.n();
    if n < 2 {
        return Err(MfcvError::NotEnoughData { needed: 2, got: n });
    }
    let y = gp.standardized_y();
    let alpha = gp.alpha();
    let mut solves = 0usize;
    let mut stats = Vec::with_capacity(n);
    for i in 0..n {
        let mut e = DVector::zeros(n);
        e[i] = 1.0;
        let v = gp.solve(&e);
        solves += 1;
        let diag = v[i];
        if diag <= 0.0 || !diag.is_finite() {
            return Err(MfcvError::SingularModel);
        }
        stats.push(LooStat {
            index: i,
            mean: y[i] - alpha[i] / diag,
            variance: 1.0 / diag,
        });
    }
    Ok((stats, solves))
}

/// Held-out predictive moments for every training site, via the closed form.
pub fn loo_statistics(gp: &PosteriorGP) -> Result<Vec<LooStat>> {
    loo_statistics_counted(gp).map(|(stats, _)| stats)
}

/// Chi-squared CV-error moments per record. `y` must be the standardized
/// responses the LOO means refer to.
///
/// The CV error is the square of the held-out residual scaled by the
/// held-out predictive deviation, which is what makes it a noncentral
/// chi-squared variable with one degree of freedom; its mean is
/// 1 + r^2 and its variance 2(1 + 2 r^2) for the scaled residual r.
pub fn cv_error_moments(stats: &[LooStat], y: &[f64]) -> Vec<CvRecord> {
    stats
        .iter()
        .map(|st| {
            let r = (st.mean - y[st.index]) / st.variance.sqrt();
            let ecv_mean = 1.0 + r * r;
            let ecv_variance = 2.0 * (2.0 * ecv_mean - 1.0);
            CvRecord {
                index: st.index,
                loo_mean: st.mean,
                loo_variance: st.variance,
                ecv_mean,
                ecv_variance,
                log_ecv: ecv_mean.ln(),
            }
        })
        .collect()
}

/// Training set for the inner GP: observation sites paired with the log
/// expected CV error.
pub fn log_cv_observations(gp: &PosteriorGP, records: &[CvRecord]) -> Vec<LogCvObservation> {
    records
        .iter()
        .map(|r| LogCvObservation {
            x: gp.dataset().input_row(r.index),
            s: gp.dataset().s()[r.index],
            log_ecv: r.log_ecv,
        })
        .collect()
}

/// Full pipeline from a fitted GP to the inner-GP training set.
pub fn cv_records(gp: &PosteriorGP) -> Result<Vec<CvRecord>> {
    let stats = loo_statistics(gp)?;
    let y = gp.standardized_y();
    Ok(cv_error_moments(&stats, y.as_slice()))
}
