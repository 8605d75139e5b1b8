//! Python extension module exposing the main types and operations:
//! benchmarks, the cost model, Sobol sampling, GP training and prediction,
//! LOO-CV statistics, the lookahead acquisition and the experiment runner.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use mfcv::acquisition::{cost_aware_argmax, fit_inner_gp, AcquisitionConfig};
use mfcv::benchmarks::Benchmark as CoreBenchmark;
use mfcv::cost::CostParams;
use mfcv::domain::{DomainBox, FidelitySpace};
use mfcv::error::MfcvError;
use mfcv::gp::{train_and_fit, Dataset, PosteriorGP, TrainConfig};
use mfcv::loocv::{cv_records, log_cv_observations};

fn to_py_err(e: MfcvError) -> PyErr {
    match e {
        MfcvError::TrainingFailed(_) | MfcvError::AcquisitionFailed(_) | MfcvError::Io(_) => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// A multifidelity benchmark function.
#[pyclass(name = "Benchmark", skip_from_py_object)]
#[derive(Clone)]
struct PyBenchmark {
    inner: CoreBenchmark,
}

#[pymethods]
impl PyBenchmark {
    #[new]
    #[pyo3(signature = (name, levels=None))]
    fn new(name: &str, levels: Option<Vec<f64>>) -> PyResult<Self> {
        let mut inner = CoreBenchmark::by_name(name).map_err(to_py_err)?;
        if let Some(levels) = levels {
            inner = inner.discretize_fidelity(levels).map_err(to_py_err)?;
        }
        Ok(Self { inner })
    }

    #[getter]
    fn name(&self) -> &'static str {
        self.inner.name()
    }

    #[getter]
    fn input_dim(&self) -> usize {
        self.inner.input_dim()
    }

    /// Per-dimension (low, high) bounds.
    fn domain(&self) -> Vec<(f64, f64)> {
        let d = self.inner.domain();
        d.lows().iter().copied().zip(d.highs().iter().copied()).collect()
    }

    /// Discrete fidelity levels, or None for the continuous space.
    #[getter]
    fn levels(&self) -> Option<Vec<f64>> {
        self.inner.fidelity_space().levels().map(|l| l.to_vec())
    }

    fn evaluate(&self, x: Vec<f64>, s: f64) -> PyResult<f64> {
        self.inner.evaluate(&x, s).map_err(to_py_err)
    }
}

/// Query cost c0 * (c2 + exp(-c1 * (1 - s))).
#[pyfunction]
#[pyo3(signature = (s, c0=500.0, c1=10.0, c2=0.1))]
fn cost(s: f64, c0: f64, c1: f64, c2: f64) -> PyResult<f64> {
    let p = CostParams::new(c0, c1, c2).map_err(to_py_err)?;
    mfcv::cost::cost(s, &p).map_err(to_py_err)
}

/// First `count` points of a scrambled Sobol sequence mapped to the box.
#[pyfunction]
fn sobol_points(count: usize, lows: Vec<f64>, highs: Vec<f64>, seed: u64) -> PyResult<Vec<Vec<f64>>> {
    let domain = DomainBox::new(lows, highs).map_err(to_py_err)?;
    mfcv::sampling::sobol_points(count, &domain, seed).map_err(to_py_err)
}

/// A trained multifidelity GP posterior.
#[pyclass(name = "GaussianProcess")]
struct PyGaussianProcess {
    gp: PosteriorGP,
}

#[pymethods]
impl PyGaussianProcess {
    /// Train hyperparameters by multi-start marginal-likelihood maximization
    /// and condition on the data.
    #[staticmethod]
    #[pyo3(signature = (x, s, y, lows, highs, seed=0, restarts=10))]
    fn fit(
        x: Vec<Vec<f64>>,
        s: Vec<f64>,
        y: Vec<f64>,
        lows: Vec<f64>,
        highs: Vec<f64>,
        seed: u64,
        restarts: usize,
    ) -> PyResult<Self> {
        let domain = DomainBox::new(lows, highs).map_err(to_py_err)?;
        let dataset = Dataset::new(domain, x, s, y).map_err(to_py_err)?;
        let cfg = TrainConfig {
            restarts,
            ..TrainConfig::new(seed)
        };
        let gp = train_and_fit(&dataset, &cfg).map_err(to_py_err)?;
        Ok(Self { gp })
    }

    /// Posterior mean and variance at (x, s).
    fn predict(&self, x: Vec<f64>, s: f64) -> PyResult<(f64, f64)> {
        self.gp.predict(&x, s).map_err(to_py_err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.gp.n()
    }

    /// Fitted hyperparameters.
    fn hyperparameters<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let h = self.gp.hyper();
        let d = PyDict::new(py);
        d.set_item("lengthscales", h.input.lengthscales.clone())?;
        d.set_item("signal_variance", h.input.signal_variance)?;
        d.set_item("fidelity_lengthscale", h.fidelity.lengthscale)?;
        d.set_item("noise_variance", h.noise_variance)?;
        Ok(d)
    }

    /// Closed-form LOO-CV records, one dict per training site.
    fn loo_records<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyList>> {
        let records = cv_records(&self.gp).map_err(to_py_err)?;
        let out = PyList::empty(py);
        for r in records {
            let d = PyDict::new(py);
            d.set_item("index", r.index)?;
            d.set_item("loo_mean", r.loo_mean)?;
            d.set_item("loo_variance", r.loo_variance)?;
            d.set_item("ecv_mean", r.ecv_mean)?;
            d.set_item("ecv_variance", r.ecv_variance)?;
            d.set_item("log_ecv", r.log_ecv)?;
            out.append(d)?;
        }
        Ok(out)
    }

    /// Select the next cost-aware batch of input-fidelity pairs with the
    /// lookahead acquisition on the log-CV-error field.
    #[pyo3(signature = (seed, batch_size=1, levels=None, c0=500.0, c1=10.0, c2=0.1,
                        fantasy_samples=64, restarts=2, grid_size=128))]
    #[allow(clippy::too_many_arguments)]
    fn acquire<'py>(
        &self,
        py: Python<'py>,
        seed: u64,
        batch_size: usize,
        levels: Option<Vec<f64>>,
        c0: f64,
        c1: f64,
        c2: f64,
        fantasy_samples: usize,
        restarts: usize,
        grid_size: usize,
    ) -> PyResult<Bound<'py, PyList>> {
        let records = cv_records(&self.gp).map_err(to_py_err)?;
        let obs = log_cv_observations(&self.gp, &records);
        let domain = self.gp.dataset().domain().clone();
        let inner = fit_inner_gp(&obs, &domain, &TrainConfig::new(seed)).map_err(to_py_err)?;
        let fidelity_space = match levels {
            Some(l) => FidelitySpace::discrete(l).map_err(to_py_err)?,
            None => FidelitySpace::Continuous,
        };
        let cfg = AcquisitionConfig {
            fantasy_samples,
            inner_opt_restarts: restarts,
            candidate_grid_size: grid_size,
            batch_size,
            fidelity_space,
        };
        let cost = CostParams::new(c0, c1, c2).map_err(to_py_err)?;
        let cands = cost_aware_argmax(&inner, &cost, &cfg, seed).map_err(to_py_err)?;
        let out = PyList::empty(py);
        for c in cands {
            let d = PyDict::new(py);
            d.set_item("x", c.x)?;
            d.set_item("s", c.s)?;
            d.set_item("acquisition_value", c.acquisition_value)?;
            d.set_item("cost", c.cost)?;
            d.set_item("score", c.score)?;
            out.append(d)?;
        }
        Ok(out)
    }
}

/// Run an experiment suite from a TOML configuration string and write the
/// result bundle to `out_dir`. Returns a summary dict.
#[pyfunction]
fn run_experiment<'py>(py: Python<'py>, config_toml: &str, out_dir: &str) -> PyResult<Bound<'py, PyDict>> {
    let mut file: mfcv_cli::config::FileConfig =
        toml::from_str(config_toml).map_err(|e| PyValueError::new_err(e.to_string()))?;
    file.out = Some(out_dir.to_string());
    let resolved = mfcv_cli::config::resolve(file).map_err(to_py_err)?;
    let (report, bundle) = mfcv_cli::output::run_command(&resolved).map_err(to_py_err)?;

    let out = PyDict::new(py);
    out.set_item("out_dir", bundle.dir.display().to_string())?;
    out.set_item(
        "traces",
        bundle
            .trace_paths
            .iter()
            .map(|p| p.display().to_string())
            .collect::<Vec<_>>(),
    )?;
    out.set_item("summary", bundle.summary_path.display().to_string())?;
    let runs = PyList::empty(py);
    for run in &report.runs {
        let d = PyDict::new(py);
        d.set_item("strategy", run.strategy.name())?;
        d.set_item("repetition", run.repetition)?;
        d.set_item("initial_rmse", run.initial_rmse)?;
        d.set_item("final_rmse", run.final_rmse())?;
        d.set_item("final_cost", run.final_cost())?;
        d.set_item("fallbacks", run.fallback_count)?;
        runs.append(d)?;
    }
    out.set_item("runs", runs)?;
    out.set_item("failures", report.failures.clone())?;
    Ok(out)
}

#[pymodule]
fn mfcv_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBenchmark>()?;
    m.add_class::<PyGaussianProcess>()?;
    m.add_function(wrap_pyfunction!(cost, m)?)?;
    m.add_function(wrap_pyfunction!(sobol_points, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
