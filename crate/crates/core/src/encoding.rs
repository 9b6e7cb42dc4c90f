//! Phase encoding of classical data and the state-preparation circuits.
//!
//! A [`PhaseVector`] of length `N = 2^n` is loaded as the equal-weight state
//! `2^{-n/2} sum_k e^{i theta_k} |k>`. Each phase is imprinted by its own
//! diagonal fragment (X conjugation plus a multi-controlled phase shift), so
//! preparation costs O(N) gates.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{Circuit, Gate, GateKind};

/// Phases in radians, one per computational basis state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct PhaseVector(Vec<f64>);

impl PhaseVector {
    /// The length must be a power of two and at least 2.
    pub fn new(phases: Vec<f64>) -> Result<Self> {
        let len = phases.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::Shape(format!(
                "phase vector length {len} is not a power of two >= 2"
            )));
        }
        Ok(Self(phases))
    }

    pub fn zeros(num_qubits: usize) -> Result<Self> {
        Self::new(vec![0.0; 1usize.checked_shl(num_qubits as u32).unwrap_or(0)])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn num_qubits(&self) -> usize {
        self.0.len().trailing_zeros() as usize
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Adds `c` to every phase.
    pub fn shifted(&self, c: f64) -> Self {
        Self(self.0.iter().map(|p| p + c).collect())
    }
}

impl TryFrom<Vec<f64>> for PhaseVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<PhaseVector> for Vec<f64> {
    fn from(p: PhaseVector) -> Self {
        p.0
    }
}

impl AsRef<[f64]> for PhaseVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// 8-bit grayscale image, row-major from the top-left pixel.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrayscaleImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayscaleImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width * height != pixels.len() {
            return Err(Error::Shape(format!(
                "{width}x{height} image needs {} pixels, got {}",
                width * height,
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Self {
            width,
            height,
            pixels: vec![value; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.pixels[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: u8) {
        self.pixels[row * self.width + col] = value;
    }
}

/// Scale 255 to pi/2 radians, pixel by pixel.
pub fn normalize_grayscale(img: &GrayscaleImage) -> Result<PhaseVector> {
    PhaseVector::new(
        img.pixels()
            .iter()
            .map(|&v| f64::from(v) * (FRAC_PI_2 / 255.0))
            .collect(),
    )
}

/// Subtracts the first phase from all phases.
pub fn reduce_global_phase(v: &PhaseVector) -> PhaseVector {
    let first = v.0[0];
    let mut out: Vec<f64> = v.0.iter().map(|p| p - first).collect();
    out[0] = 0.0;
    PhaseVector(out)
}

/// Gates realizing `|k> -> e^{i phase} |k>` with every other basis state fixed.
pub fn basis_phase_subcircuit(basis_index: usize, phase: f64, num_qubits: usize) -> Result<Circuit> {
    if num_qubits == 0 || basis_index >= (1usize << num_qubits) {
        return Err(Error::BasisIndex {
            index: basis_index,
            num_qubits,
        });
    }
    let target = num_qubits - 1;
    let flips: Vec<usize> = (0..num_qubits)
        .filter(|&q| (basis_index >> (num_qubits - 1 - q)) & 1 == 0)
        .collect();
    let mut circ = Circuit::new(num_qubits);
    for &q in &flips {
        circ.push(Gate::x(q))?;
    }
    circ.push(Gate::phase(target, phase).with_controls(0..target))?;
    for &q in &flips {
        circ.push(Gate::x(q))?;
    }
    Ok(circ)
}

/// Controls how the diagonal phase layer is emitted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodingOptions {
    /// Omit fragments whose phase is exactly zero (they act as identity).
    pub skip_zero_phases: bool,
}

impl Default for EncodingOptions {
    fn default() -> Self {
        Self {
            skip_zero_phases: true,
        }
    }
}

fn push_diagonal(circ: &mut Circuit, phases: &[f64], sign: f64, opts: EncodingOptions) -> Result<()> {
    let n = circ.num_qubits();
    for (k, &p) in phases.iter().enumerate() {
        if opts.skip_zero_phases && p == 0.0 {
            continue;
        }
        circ.append(&basis_phase_subcircuit(k, sign * p, n)?)?;
    }
    Ok(())
}

/// `U(theta) H^n`, preparing the input state from `|0...0>`.
pub fn build_input_circuit(theta: &PhaseVector) -> Circuit {
    build_input_circuit_with(theta, EncodingOptions::default())
}

pub fn build_input_circuit_with(theta: &PhaseVector, opts: EncodingOptions) -> Circuit {
    let n = theta.num_qubits();
    let mut circ = Circuit::new(n);
    for q in 0..n {
        circ.push(Gate::h(q)).expect("qubit in range");
    }
    push_diagonal(&mut circ, theta.as_slice(), 1.0, opts).expect("fragments sized to register");
    circ
}

/// `X^n H^n U(phi)^dagger`. After the input circuit, the amplitude of
/// `|1...1>` is the overlap `<psi_w|psi_i>`.
pub fn build_weight_circuit(phi: &PhaseVector) -> Circuit {
    build_weight_circuit_with(phi, EncodingOptions::default(), true)
}

/// With `x_layer = false` the overlap sits on `|0...0>` instead.
pub fn build_weight_circuit_with(phi: &PhaseVector, opts: EncodingOptions, x_layer: bool) -> Circuit {
    let n = phi.num_qubits();
    let mut circ = Circuit::new(n);
    // diagonal fragments commute; ascending k keeps the gate list canonical
    push_diagonal(&mut circ, phi.as_slice(), -1.0, opts).expect("fragments sized to register");
    for q in 0..n {
        circ.push(Gate::h(q)).expect("qubit in range");
    }
    if x_layer {
        for q in 0..n {
            circ.push(Gate::x(q)).expect("qubit in range");
        }
    }
    circ
}

/// Number of multi-controlled phase-shift fragments in a circuit.
pub fn phase_fragment_count(circ: &Circuit) -> usize {
    circ.count(|g| matches!(g.kind, GateKind::PhaseShift(_)))
}

pub fn hadamard_count(circ: &Circuit) -> usize {
    circ.count(|g| matches!(g.kind, GateKind::Hadamard))
}
