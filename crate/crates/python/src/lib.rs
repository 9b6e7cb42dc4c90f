//! Python bindings. Phase vectors travel as lists of floats.

use num_complex::Complex64;
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use qneuron::datasets::load_mnist_dir;
use qneuron::experiments::{self, ClassifyConfig, FixedWeightConfig, PooledConfig, WeightChoice};
use qneuron::learning::{Metrics, SpsaConfig, TrainResult};
use qneuron::neuron::{self, Evaluator};
use qneuron::noise::{self, NoiseConfig};
use qneuron::sim::{self, Gate};
use qneuron::{Error, PhaseVector};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(io) => PyIOError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn pv(v: Vec<f64>) -> PyResult<PhaseVector> {
    PhaseVector::new(v).map_err(py_err)
}

fn metrics_dict<'py>(py: Python<'py>, m: &Metrics) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("cost", m.cost)?;
    d.set_item("accuracy", m.accuracy)?;
    d.set_item("threshold", m.threshold)?;
    Ok(d)
}

fn train_dict<'py>(py: Python<'py>, r: &TrainResult) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("final_weights", r.final_weights.as_slice().to_vec())?;
    d.set_item("best_cost", r.best_cost)?;
    d.set_item("cost_trace", r.cost_trace.iter().map(|p| p.cost).collect::<Vec<_>>())?;
    d.set_item("train_metrics", r.train_metrics.as_ref().map(|m| metrics_dict(py, m)).transpose()?)?;
    d.set_item("test_metrics", r.test_metrics.as_ref().map(|m| metrics_dict(py, m)).transpose()?)?;
    Ok(d)
}

/// SPSA gains and budget.
#[pyclass(name = "SpsaConfig", get_all, set_all, from_py_object)]
#[derive(Clone)]
struct PySpsaConfig {
    iterations: usize,
    a0: f64,
    c0: f64,
    big_a: f64,
    alpha: f64,
    gamma: f64,
    seed: u64,
    batch_size: Option<usize>,
    restarts: usize,
}

impl From<SpsaConfig> for PySpsaConfig {
    fn from(c: SpsaConfig) -> Self {
        Self {
            iterations: c.iterations,
            a0: c.a0,
            c0: c.c0,
            big_a: c.big_a,
            alpha: c.alpha,
            gamma: c.gamma,
            seed: c.seed,
            batch_size: c.batch_size,
            restarts: c.restarts,
        }
    }
}

impl From<&PySpsaConfig> for SpsaConfig {
    fn from(c: &PySpsaConfig) -> Self {
        Self {
            iterations: c.iterations,
            a0: c.a0,
            c0: c.c0,
            big_a: c.big_a,
            alpha: c.alpha,
            gamma: c.gamma,
            seed: c.seed,
            batch_size: c.batch_size,
            restarts: c.restarts,
        }
    }
}

#[pymethods]
impl PySpsaConfig {
    #[new]
    fn new() -> Self {
        SpsaConfig::default().into()
    }

    /// Gains used by `learn_single` by default.
    #[staticmethod]
    fn single_target() -> Self {
        SpsaConfig::single_target().into()
    }

    fn __repr__(&self) -> String {
        format!(
            "SpsaConfig(iterations={}, a0={}, c0={}, big_a={}, alpha={}, gamma={}, seed={}, batch_size={:?}, restarts={})",
            self.iterations, self.a0, self.c0, self.big_a, self.alpha, self.gamma, self.seed, self.batch_size, self.restarts
        )
    }
}

/// Dense register with qubit `k` on bit `q - 1 - k` of the basis index.
#[pyclass(name = "StateVector")]
struct PyStateVector {
    inner: sim::StateVector,
}

fn controlled(mut g: Gate, controls: Vec<usize>, anti_controls: Vec<usize>) -> Gate {
    for q in controls {
        g = g.controlled_by(q);
    }
    for q in anti_controls {
        g = g.anti_controlled_by(q);
    }
    g
}

#[pymethods]
impl PyStateVector {
    #[new]
    fn new(num_qubits: usize) -> PyResult<Self> {
        Ok(Self {
            inner: sim::StateVector::zero(num_qubits).map_err(py_err)?,
        })
    }

    #[getter]
    fn num_qubits(&self) -> usize {
        self.inner.num_qubits()
    }

    fn amplitudes(&self) -> Vec<Complex64> {
        self.inner.amplitudes().to_vec()
    }

    #[pyo3(signature = (target, controls=vec![], anti_controls=vec![]))]
    fn h(&mut self, target: usize, controls: Vec<usize>, anti_controls: Vec<usize>) -> PyResult<()> {
        self.inner.apply_gate(&controlled(Gate::h(target), controls, anti_controls)).map_err(py_err)
    }

    #[pyo3(signature = (target, controls=vec![], anti_controls=vec![]))]
    fn x(&mut self, target: usize, controls: Vec<usize>, anti_controls: Vec<usize>) -> PyResult<()> {
        self.inner.apply_gate(&controlled(Gate::x(target), controls, anti_controls)).map_err(py_err)
    }

    #[pyo3(signature = (target, angle, controls=vec![], anti_controls=vec![]))]
    fn phase(&mut self, target: usize, angle: f64, controls: Vec<usize>, anti_controls: Vec<usize>) -> PyResult<()> {
        self.inner
            .apply_gate(&controlled(Gate::phase(target, angle), controls, anti_controls))
            .map_err(py_err)
    }

    fn qubit_one_probability(&self, qubit: usize) -> PyResult<f64> {
        self.inner.qubit_one_probability(qubit).map_err(py_err)
    }

    /// `(ones, zeros)` from `shots` measurements of `qubit`.
    fn sample(&self, qubit: usize, shots: u64, seed: u64) -> PyResult<(u64, u64)> {
        let c = self.inner.sample_counts(qubit, shots, seed).map_err(py_err)?;
        Ok((c.ones, c.zeros))
    }
}

/// Activation of input phases `theta` against weight phases `phi`.
#[pyfunction]
#[pyo3(signature = (theta, phi, method="closed-form", shots=8192, seed=0))]
fn activation(theta: Vec<f64>, phi: Vec<f64>, method: &str, shots: u64, seed: u64) -> PyResult<f64> {
    let ev = match method {
        "closed-form" => Evaluator::ClosedForm,
        "statevector" => Evaluator::Statevector,
        "sampled" => Evaluator::Sampled { shots, seed },
        other => return Err(PyValueError::new_err(format!("unknown method {other:?}"))),
    };
    Ok(ev.evaluate(&pv(theta)?, &pv(phi)?).map_err(py_err)?.value)
}

/// Normalized overlap `<psi_w|psi_i>`.
#[pyfunction]
fn inner_product(theta: Vec<f64>, phi: Vec<f64>) -> PyResult<Complex64> {
    neuron::inner_product(&pv(theta)?, &pv(phi)?).map_err(py_err)
}

#[pyfunction]
fn reduce_global_phase(theta: Vec<f64>) -> PyResult<Vec<f64>> {
    Ok(qneuron::encoding::reduce_global_phase(&pv(theta)?).into_vec())
}

/// Pixel values 0..=255 to phases in `[0, pi/2]`.
#[pyfunction]
fn normalize_grayscale(pixels: Vec<u8>) -> PyResult<Vec<f64>> {
    let n = pixels.len();
    let img = qneuron::GrayscaleImage::new(n, 1, pixels).map_err(py_err)?;
    Ok(qneuron::encoding::normalize_grayscale(&img).map_err(py_err)?.into_vec())
}

#[pyfunction]
fn damping_factor(a: f64) -> f64 {
    noise::damping_factor(a)
}

#[pyfunction]
fn mean_activation_identical(num_qubits: u32, a: f64) -> PyResult<f64> {
    noise::mean_activation_identical(num_qubits, a).map_err(py_err)
}

#[pyfunction]
fn mean_activation_small_a(num_qubits: u32, a: f64) -> f64 {
    noise::mean_activation_small_a(num_qubits, a)
}

#[pyfunction]
fn mean_activation_general(theta: Vec<f64>, phi: Vec<f64>, a: f64) -> PyResult<f64> {
    noise::mean_activation_general(&pv(theta)?, &pv(phi)?, a).map_err(py_err)
}

/// `(mean, std_error)` of the noisy activation.
#[pyfunction]
fn monte_carlo(py: Python<'_>, theta: Vec<f64>, phi: Vec<f64>, a: f64, trials: u64, seed: u64) -> PyResult<(f64, f64)> {
    let (theta, phi) = (pv(theta)?, pv(phi)?);
    let cfg = NoiseConfig { a, trials, seed };
    let est = py
        .detach(|| noise::monte_carlo_noisy_activation(&theta, &phi, &cfg))
        .map_err(py_err)?;
    Ok((est.mean, est.std_error))
}

type NoiseRow = (u32, f64, f64, f64, f64, f64);
type ImageRow = (Vec<u8>, f64, f64, f64, f64);

/// Rows of `(n, a, exact, approx_small_a, mc_mean, mc_stderr)`.
#[pyfunction]
fn noise_sweep(py: Python<'_>, n: Vec<u32>, a: Vec<f64>, trials: u64, seed: u64) -> PyResult<Vec<NoiseRow>> {
    let rows = py.detach(|| experiments::noise_sweep(&n, &a, trials, seed)).map_err(py_err)?;
    Ok(rows
        .into_iter()
        .map(|r| (r.n, r.a, r.exact, r.approx_small_a, r.mc_mean, r.mc_stderr))
        .collect())
}

/// Rows of `(pixels, analytic, sampled, sigma, correlation)` for random
/// 2x2 images against the checkerboard weight.
#[pyfunction]
#[pyo3(signature = (m=30, shots=8192, seed=0))]
fn random_images(m: usize, shots: u64, seed: u64) -> PyResult<Vec<ImageRow>> {
    let r = experiments::random_image_experiment(m, shots, seed).map_err(py_err)?;
    Ok(r.rows
        .into_iter()
        .map(|row| (row.pixels, row.analytic, row.sampled, row.sigma, row.correlation))
        .collect())
}

#[pyfunction]
#[pyo3(signature = (target, init=None, config=None))]
fn learn_single<'py>(
    py: Python<'py>,
    target: Vec<f64>,
    init: Option<Vec<f64>>,
    config: Option<PySpsaConfig>,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = config.as_ref().map_or_else(SpsaConfig::single_target, SpsaConfig::from);
    let target = pv(target)?;
    let init = init.map(pv).transpose()?;
    let r = experiments::learn_single_target(&target, init.as_ref(), &cfg).map_err(py_err)?;
    let d = train_dict(py, &r.result)?;
    d.set_item("final_activation", r.final_activation)?;
    Ok(d)
}

/// Trains on a generated `"2d"` or `"circles"` dataset.
#[pyfunction]
#[pyo3(signature = (dataset="2d", m=200, train_len=100, threshold=0.95, data_seed=0, config=None))]
fn classify<'py>(
    py: Python<'py>,
    dataset: &str,
    m: usize,
    train_len: usize,
    threshold: f64,
    data_seed: u64,
    config: Option<PySpsaConfig>,
) -> PyResult<Bound<'py, PyDict>> {
    let mut cfg = match dataset {
        "2d" => ClassifyConfig::default(),
        "circles" => ClassifyConfig::circles(),
        other => return Err(PyValueError::new_err(format!("unknown dataset {other:?}"))),
    };
    cfg.m = m;
    cfg.train_len = train_len;
    cfg.threshold = threshold;
    cfg.data_seed = data_seed;
    if let Some(c) = &config {
        cfg.spsa = c.into();
    }
    let report = py.detach(|| experiments::run_classify(&cfg)).map_err(py_err)?;
    train_dict(py, &report.result)
}

/// Zeros-vs-ones MNIST; `mode` is `"fixed-weight"` or `"pooled-learn"`.
#[pyfunction]
#[pyo3(signature = (data_dir, mode="fixed-weight", threshold=0.85, weight_index=None))]
fn mnist<'py>(
    py: Python<'py>,
    data_dir: std::path::PathBuf,
    mode: &str,
    threshold: f64,
    weight_index: Option<usize>,
) -> PyResult<Bound<'py, PyDict>> {
    let (train, test) = load_mnist_dir(&data_dir).map_err(py_err)?;
    match mode {
        "fixed-weight" => {
            let cfg = FixedWeightConfig {
                threshold,
                weight: weight_index.map_or(WeightChoice::Medoid, WeightChoice::Index),
                matrix_per_class: 0,
                ..Default::default()
            };
            let r = py.detach(|| experiments::mnist_fixed_weight(&train, &test, &cfg)).map_err(py_err)?;
            let d = metrics_dict(py, &r.metrics)?;
            d.set_item("weight_index", r.weight_index)?;
            d.set_item("test_len", r.test_len)?;
            Ok(d)
        }
        "pooled-learn" => {
            let cfg = PooledConfig {
                threshold,
                ..Default::default()
            };
            let r = py.detach(|| experiments::mnist_pooled_learn(&train, &test, &cfg)).map_err(py_err)?;
            train_dict(py, &r)
        }
        other => Err(PyValueError::new_err(format!("unknown mode {other:?}"))),
    }
}

#[pymodule(name = "qneuron")]
fn qneuron_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySpsaConfig>()?;
    m.add_class::<PyStateVector>()?;
    m.add_function(wrap_pyfunction!(activation, m)?)?;
    m.add_function(wrap_pyfunction!(inner_product, m)?)?;
    m.add_function(wrap_pyfunction!(reduce_global_phase, m)?)?;
    m.add_function(wrap_pyfunction!(normalize_grayscale, m)?)?;
    m.add_function(wrap_pyfunction!(damping_factor, m)?)?;
    m.add_function(wrap_pyfunction!(mean_activation_identical, m)?)?;
    m.add_function(wrap_pyfunction!(mean_activation_small_a, m)?)?;
    m.add_function(wrap_pyfunction!(mean_activation_general, m)?)?;
    m.add_function(wrap_pyfunction!(monte_carlo, m)?)?;
    m.add_function(wrap_pyfunction!(noise_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(random_images, m)?)?;
    m.add_function(wrap_pyfunction!(learn_single, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(mnist, m)?)?;
    Ok(())
}
