//! Activation of the phase-encoded perceptron, `f = |<psi_w|psi_i>|^2`.
//!
//! Three evaluation routes compute the same quantity: the pairwise-cosine
//! closed form, an exact statevector run of the full circuit (input
//! preparation, weight unitary, fully controlled NOT onto an ancilla), and
//! shot sampling of that ancilla.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::encoding::{
    build_input_circuit_with, build_weight_circuit_with, reduce_global_phase, EncodingOptions,
    PhaseVector,
};
use crate::error::{Error, Result};
use crate::sim::{sample_bernoulli, Gate, StateVector, DEFAULT_MAX_QUBITS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ClosedForm,
    Statevector,
    Sampled,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActivationResult {
    pub value: f64,
    pub method: Method,
    pub shots: Option<u64>,
    pub seed: Option<u64>,
}

/// How the overlap is read out of the simulated register.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Readout {
    /// Fully controlled NOT onto an ancilla (last qubit), then measure it.
    Ancilla,
    /// No ancilla and no final X layer; probability of `|0...0>`.
    GroundProjection,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitOptions {
    pub reduce_global_phase: bool,
    pub encoding: EncodingOptions,
    pub readout: Readout,
    pub max_qubits: usize,
}

impl Default for CircuitOptions {
    fn default() -> Self {
        Self {
            reduce_global_phase: true,
            encoding: EncodingOptions::default(),
            readout: Readout::Ancilla,
            max_qubits: DEFAULT_MAX_QUBITS,
        }
    }
}

fn check_lengths(theta: &PhaseVector, phi: &PhaseVector) -> Result<()> {
    if theta.len() != phi.len() {
        return Err(Error::LengthMismatch {
            left: theta.len(),
            right: phi.len(),
        });
    }
    Ok(())
}

/// `(1/N) sum_k e^{i(theta_k - phi_k)}`.
pub fn inner_product(theta: &PhaseVector, phi: &PhaseVector) -> Result<Complex64> {
    check_lengths(theta, phi)?;
    let sum: Complex64 = theta
        .as_slice()
        .iter()
        .zip(phi.as_slice())
        .map(|(t, p)| Complex64::from_polar(1.0, t - p))
        .sum();
    Ok(sum / theta.len() as f64)
}

/// `1/N + 2/N^2 sum_{i<j} cos(d_j - d_i)` with `d = theta - phi`.
pub fn activation_closed_form(theta: &PhaseVector, phi: &PhaseVector) -> Result<f64> {
    check_lengths(theta, phi)?;
    let mut diffs: Vec<f64> = theta
        .as_slice()
        .iter()
        .zip(phi.as_slice())
        .map(|(t, p)| t - p)
        .collect();
    Ok(activation_from_differences(&mut diffs))
}

/// Pairwise-cosine activation of the phase differences `diffs` (reordered
/// in place).
///
/// Equal differences are grouped: a run of `m` identical values contributes
/// `m(m-1)/2` unit cosines, and two runs contribute `m_a m_b cos(u_b - u_a)`.
/// Images with large uniform backgrounds reduce to a few hundred runs.
pub(crate) fn activation_from_differences(diffs: &mut [f64]) -> f64 {
    let n = diffs.len() as f64;
    diffs.sort_unstable_by(f64::total_cmp);
    let mut runs: Vec<(f64, f64)> = Vec::new();
    for &d in diffs.iter() {
        match runs.last_mut() {
            Some((value, count)) if *value == d => *count += 1.0,
            _ => runs.push((d, 1.0)),
        }
    }
    let mut pair_sum = 0.0;
    for (a, &(ua, ma)) in runs.iter().enumerate() {
        pair_sum += 0.5 * ma * (ma - 1.0);
        let mut cross = 0.0;
        for &(ub, mb) in &runs[a + 1..] {
            cross += mb * (ub - ua).cos();
        }
        pair_sum += ma * cross;
    }
    (1.0 / n + 2.0 * pair_sum / (n * n)).clamp(0.0, 1.0)
}

fn prepared_register(theta: &PhaseVector, phi: &PhaseVector, opts: &CircuitOptions) -> Result<StateVector> {
    check_lengths(theta, phi)?;
    let (theta, phi) = if opts.reduce_global_phase {
        (reduce_global_phase(theta), reduce_global_phase(phi))
    } else {
        (theta.clone(), phi.clone())
    };
    let n = theta.num_qubits();
    let ancilla = opts.readout == Readout::Ancilla;
    let mut state = StateVector::zero_with_limit(n + usize::from(ancilla), opts.max_qubits)?;
    state.apply_circuit(&build_input_circuit_with(&theta, opts.encoding))?;
    state.apply_circuit(&build_weight_circuit_with(&phi, opts.encoding, ancilla))?;
    if ancilla {
        state.apply_gate(&Gate::x(n).with_controls(0..n))?;
    }
    Ok(state)
}

fn firing_probability(state: &StateVector, readout: Readout) -> Result<f64> {
    match readout {
        Readout::Ancilla => state.qubit_one_probability(state.num_qubits() - 1),
        Readout::GroundProjection => state.basis_probability(0),
    }
}

pub fn activation_statevector(theta: &PhaseVector, phi: &PhaseVector) -> Result<ActivationResult> {
    activation_statevector_with(theta, phi, &CircuitOptions::default())
}

pub fn activation_statevector_with(
    theta: &PhaseVector,
    phi: &PhaseVector,
    opts: &CircuitOptions,
) -> Result<ActivationResult> {
    let state = prepared_register(theta, phi, opts)?;
    Ok(ActivationResult {
        value: firing_probability(&state, opts.readout)?,
        method: Method::Statevector,
        shots: None,
        seed: None,
    })
}

pub fn activation_sampled(theta: &PhaseVector, phi: &PhaseVector, shots: u64, seed: u64) -> Result<ActivationResult> {
    activation_sampled_with(theta, phi, shots, seed, &CircuitOptions::default())
}

pub fn activation_sampled_with(
    theta: &PhaseVector,
    phi: &PhaseVector,
    shots: u64,
    seed: u64,
    opts: &CircuitOptions,
) -> Result<ActivationResult> {
    let state = prepared_register(theta, phi, opts)?;
    let counts = match opts.readout {
        Readout::Ancilla => state.sample_counts(state.num_qubits() - 1, shots, seed)?,
        Readout::GroundProjection => sample_bernoulli(state.basis_probability(0)?, shots, seed)?,
    };
    Ok(ActivationResult {
        value: counts.one_fraction(),
        method: Method::Sampled,
        shots: Some(shots),
        seed: Some(seed),
    })
}

/// Selects one of the three evaluation routes.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum Evaluator {
    #[default]
    ClosedForm,
    Statevector,
    Sampled { shots: u64, seed: u64 },
}

impl Evaluator {
    pub fn evaluate(&self, theta: &PhaseVector, phi: &PhaseVector) -> Result<ActivationResult> {
        match *self {
            Self::ClosedForm => Ok(ActivationResult {
                value: activation_closed_form(theta, phi)?,
                method: Method::ClosedForm,
                shots: None,
                seed: None,
            }),
            Self::Statevector => activation_statevector(theta, phi),
            Self::Sampled { shots, seed } => activation_sampled(theta, phi, shots, seed),
        }
    }
}

/// `M[i][j] = f(samples[i], samples[j])`, symmetric by construction.
pub fn pairwise_activation_matrix(samples: &[PhaseVector]) -> Result<Vec<Vec<f64>>> {
    if let Some(first) = samples.first() {
        for s in samples {
            check_lengths(first, s)?;
        }
    }
    let m = samples.len();
    let upper: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|i| {
            (i..m)
                .map(|j| activation_closed_form(&samples[i], &samples[j]).expect("lengths checked"))
                .collect()
        })
        .collect();
    let mut out = vec![vec![0.0; m]; m];
    for (i, row) in upper.iter().enumerate() {
        for (off, &v) in row.iter().enumerate() {
            out[i][i + off] = v;
            out[i + off][i] = v;
        }
    }
    Ok(out)
}
