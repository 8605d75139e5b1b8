//! Covariance functions over inputs and fidelity.
//!
//! The joint kernel on (x, s) is the product of an anisotropic Matern-5/2
//! kernel on the inputs and a unit-variance Matern-5/2 kernel on the
//! fidelity. The signal variance is owned entirely by the input kernel so
//! the product stays identifiable. Callers are expected to pass inputs in
//! normalized (unit-hypercube) coordinates; lengthscales are interpreted in
//! those units.

use nalgebra::{DMatrix, DVector};

use crate::error::{MfcvError, Result};

const SQRT5: f64 = 2.236_067_977_499_79;

/// Parameters of the anisotropic input kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct InputKernelParams {
    pub lengthscales: Vec<f64>,
    pub signal_variance: f64,
}

impl InputKernelParams {
    pub fn new(lengthscales: Vec<f64>, signal_variance: f64) -> Result<Self> {
        if lengthscales.is_empty() {
            return Err(MfcvError::InvalidParameter {
                name: "lengthscales",
                reason: "must have at least one dimension".into(),
            });
        }
        if lengthscales.iter().any(|l| !l.is_finite() || *l <= 0.0) {
            return Err(MfcvError::InvalidParameter {
                name: "lengthscales",
                reason: "all lengthscales must be positive and finite".into(),
            });
        }
        if !signal_variance.is_finite() || signal_variance <= 0.0 {
            return Err(MfcvError::InvalidParameter {
                name: "signal_variance",
                reason: "must be positive and finite".into(),
            });
        }
        Ok(Self {
            lengthscales,
            signal_variance,
        })
    }

    pub fn dim(&self) -> usize {
        self.lengthscales.len()
    }
}

/// Parameters of the univariate fidelity kernel (unit signal variance).
#[derive(Debug, Clone, PartialEq)]
pub struct FidelityKernelParams {
    pub lengthscale: f64,
}

impl FidelityKernelParams {
    pub fn new(lengthscale: f64) -> Result<Self> {
        if !lengthscale.is_finite() || lengthscale <= 0.0 {
            return Err(MfcvError::InvalidParameter {
                name: "lengthscale",
                reason: "must be positive and finite".into(),
            });
        }
        Ok(Self { lengthscale })
    }
}

/// Matern-5/2 profile at scaled distance r.
#[inline]
fn matern52(r: f64) -> f64 {
    let sr = SQRT5 * r;
    (1.0 + sr + sr * sr / 3.0) * (-sr).exp()
}

/// Anisotropic Matern-5/2 kernel between two input points.
pub fn matern_input_kernel(x: &[f64], x2: &[f64], p: &InputKernelParams) -> Result<f64> {
    if x.len() != p.dim() || x2.len() != p.dim() {
        return Err(MfcvError::DimensionMismatch {
            expected: p.dim(),
            got: if x.len() != p.dim() { x.len() } else { x2.len() },
            context: "matern_input_kernel",
        });
    }
    if x.iter().chain(x2).any(|v| !v.is_finite()) {
        return Err(MfcvError::InvalidParameter {
            name: "x",
            reason: "inputs must be finite".into(),
        });
    }
    let r2: f64 = x
        .iter()
        .zip(x2)
        .zip(&p.lengthscales)
        .map(|((a, b), l)| {
            let d = (a - b) / l;
            d * d
        })
        .sum();
    Ok(p.signal_variance * matern52(r2.sqrt()))
}

/// Unit-variance Matern-5/2 kernel between two fidelities in [0, 1].
pub fn fidelity_kernel(s: f64, s2: f64, p: &FidelityKernelParams) -> Result<f64> {
    for v in [s, s2] {
        if !(0.0..=1.0).contains(&v) {
            return Err(MfcvError::OutOfDomain(format!("fidelity {v} outside [0, 1]")));
        }
    }
    Ok(matern52(((s - s2) / p.lengthscale).abs()))
}

/// Product kernel on the joint input-fidelity space.
pub fn joint_kernel(
    x: &[f64],
    s: f64,
    x2: &[f64],
    s2: f64,
    px: &InputKernelParams,
    ps: &FidelityKernelParams,
) -> Result<f64> {
    Ok(matern_input_kernel(x, x2, px)? * fidelity_kernel(s, s2, ps)?)
}

/// Dense covariance matrix over n observation sites. The diagonal equals the
/// signal variance; no jitter is added here (that is the factorization's
/// concern).
pub fn kernel_matrix(
    x: &DMatrix<f64>,
    s: &DVector<f64>,
    px: &InputKernelParams,
    ps: &FidelityKernelParams,
) -> Result<DMatrix<f64>> {
    let n = x.nrows();
    if n == 0 {
        return Err(MfcvError::NotEnoughData { needed: 1, got: 0 });
    }
    if x.ncols() != px.dim() {
        return Err(MfcvError::DimensionMismatch {
            expected: px.dim(),
            got: x.ncols(),
            context: "kernel_matrix",
        });
    }
    if s.len() != n {
        return Err(MfcvError::DimensionMismatch {
            expected: n,
            got: s.len(),
            context: "kernel_matrix fidelities",
        });
    }
    let rows: Vec<Vec<f64>> = (0..n).map(|i| x.row(i).iter().copied().collect()).collect();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        k[(i, i)] = px.signal_variance;
        for j in 0..i {
            let v = joint_kernel(&rows[i], s[i], &rows[j], s[j], px, ps)?;
            if !v.is_finite() {
                return Err(MfcvError::InvalidParameter {
                    name: "kernel_matrix",
                    reason: format!("non-finite covariance between rows {i} and {j}"),
                });
            }
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    Ok(k)
}

/// Covariance vector between one query site and n observation sites.
pub fn kernel_cross(
    x_query: &[f64],
    s_query: f64,
    x: &DMatrix<f64>,
    s: &DVector<f64>,
    px: &InputKernelParams,
    ps: &FidelityKernelParams,
) -> Result<DVector<f64>> {
    let n = x.nrows();
    let mut out = DVector::zeros(n);
    for i in 0..n {
        let xi: Vec<f64> = x.row(i).iter().copied().collect();
        out[i] = joint_kernel(x_query, s_query, &xi, s[i], px, ps)?;
    }
    Ok(out)
}
