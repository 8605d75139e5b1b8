//! Brute-force reference implementations used by the oracle tests. These
//! deliberately go through explicit matrix inverses rather than the library's
//! factorization path.

use mfcv::domain::DomainBox;
use mfcv::gp::{standardize_responses, Dataset, Hyperparameters, PosteriorGP};
use mfcv::kernels::{kernel_cross, kernel_matrix};
use nalgebra::{DMatrix, DVector};

/// System matrix K + (noise + jitter) I on normalized inputs.
pub fn system_matrix(dataset: &Dataset, hyper: &Hyperparameters, jitter: f64) -> DMatrix<f64> {
    let x_norm = dataset.normalized_inputs();
    let mut k = kernel_matrix(&x_norm, dataset.s(), &hyper.input, &hyper.fidelity).unwrap();
    for i in 0..dataset.n() {
        k[(i, i)] += hyper.noise_variance + jitter;
    }
    k
}

/// Posterior mean and variance at (x, s) through an explicit inverse,
/// replicating the library's response standardization and jitter.
pub fn explicit_predict(gp: &PosteriorGP, x: &[f64], s: f64) -> (f64, f64) {
    let dataset = gp.dataset();
    let hyper = gp.hyper();
    let k = system_matrix(dataset, hyper, gp.jitter());
    let k_inv = k.try_inverse().expect("invertible system");
    let (std_data, scaling) = standardize_responses(dataset);
    let x_norm = dataset.normalized_inputs();
    let u = dataset.domain().normalize(x).unwrap();
    let kx = kernel_cross(&u, s, &x_norm, dataset.s(), &hyper.input, &hyper.fidelity).unwrap();
    let mean = kx.dot(&(&k_inv * std_data.y()));
    let var = hyper.input.signal_variance - kx.dot(&(&k_inv * &kx));
    (
        scaling.destandardize_mean(mean),
        scaling.destandardize_variance(var.clamp(0.0, hyper.input.signal_variance)),
    )
}

/// Log marginal likelihood through an explicit determinant and inverse,
/// with the library's baseline jitter on the diagonal.
pub fn explicit_lml(dataset: &Dataset, hyper: &Hyperparameters) -> f64 {
    let jitter = 1e-8 * hyper.input.signal_variance;
    let k = system_matrix(dataset, hyper, jitter);
    let n = dataset.n() as f64;
    let k_inv = k.clone().try_inverse().expect("invertible system");
    let y = dataset.y();
    -0.5 * y.dot(&(&k_inv * y)) - 0.5 * k.determinant().ln() - 0.5 * n * (2.0 * std::f64::consts::PI).ln()
}

/// Leave-one-out moments by explicitly refitting on the remaining points:
/// predict the held-out noisy observation (standardized) and its variance.
pub fn refit_loo(gp: &PosteriorGP, i: usize) -> (f64, f64) {
    let dataset = gp.dataset();
    let hyper = gp.hyper();
    let n = dataset.n();
    let (std_data, _) = standardize_responses(dataset);
    let x_norm = dataset.normalized_inputs();
    let keep: Vec<usize> = (0..n).filter(|&j| j != i).collect();

    let mut x_sub = DMatrix::zeros(n - 1, dataset.dim());
    let mut s_sub = DVector::zeros(n - 1);
    let mut y_sub = DVector::zeros(n - 1);
    for (r, &j) in keep.iter().enumerate() {
        for c in 0..dataset.dim() {
            x_sub[(r, c)] = x_norm[(j, c)];
        }
        s_sub[r] = dataset.s()[j];
        y_sub[r] = std_data.y()[j];
    }
    let mut k_sub = kernel_matrix(&x_sub, &s_sub, &hyper.input, &hyper.fidelity).unwrap();
    let effective_noise = hyper.noise_variance + gp.jitter();
    for r in 0..n - 1 {
        k_sub[(r, r)] += effective_noise;
    }
    let k_inv = k_sub.try_inverse().expect("invertible subsystem");

    let xi: Vec<f64> = (0..dataset.dim()).map(|c| x_norm[(i, c)]).collect();
    let kx = kernel_cross(&xi, dataset.s()[i], &x_sub, &s_sub, &hyper.input, &hyper.fidelity)
        .unwrap();
    let mean = kx.dot(&(&k_inv * &y_sub));
    // Predictive variance of the noisy observation, matching the closed form
    // 1 / [K^-1]_ii with K = K_n + sigma^2 I.
    let var = hyper.input.signal_variance + effective_noise - kx.dot(&(&k_inv * &kx));
    (mean, var)
}

/// Random multifidelity dataset on the unit box with smooth responses.
pub fn random_dataset(d: usize, n: usize, seed: u64) -> Dataset {
    let domain = DomainBox::unit(d);
    let mut rng = mfcv::sampling::stream_rng(seed, "oracle-data", 0);
    let x = mfcv::sampling::uniform_points(n, &domain, &mut rng).unwrap();
    let s: Vec<f64> = mfcv::sampling::uniform_points(n, &DomainBox::unit(1), &mut rng)
        .unwrap()
        .into_iter()
        .map(|p| p[0])
        .collect();
    let y: Vec<f64> = x
        .iter()
        .zip(&s)
        .map(|(p, si)| {
            let radial: f64 = p.iter().map(|v| (3.0 * v).sin()).sum();
            radial + 0.7 * si + 0.2 * (10.0 * p[0]).cos()
        })
        .collect();
    Dataset::new(domain, x, s, y).unwrap()
}

pub fn random_hyper(d: usize, seed: u64, noise: f64) -> Hyperparameters {
    use rand::Rng;
    let mut rng = mfcv::sampling::stream_rng(seed, "oracle-hyper", 0);
    let lengthscales: Vec<f64> = (0..d).map(|_| rng.random_range(0.2..1.5)).collect();
    Hyperparameters::new(
        mfcv::kernels::InputKernelParams::new(lengthscales, rng.random_range(0.5..2.0)).unwrap(),
        mfcv::kernels::FidelityKernelParams::new(rng.random_range(0.3..1.5)).unwrap(),
        noise,
    )
    .unwrap()
}
