//! Exact statevector simulation of qubit circuits.
//!
//! Basis ordering follows ket notation with qubit 0 leftmost: the amplitude of
//! `|b_0 b_1 ... b_{q-1}>` lives at index `sum_k b_k * 2^(q-1-k)`, so `|101>` on
//! three qubits is index 5.
//!
//! Multi-controlled gates are applied natively by testing control bitmasks on
//! basis indices. Shot sampling uses ChaCha8 (`rand_chacha::ChaCha8Rng`)
//! seeded through `SeedableRng::seed_from_u64`, drawing one `f64` in `[0, 1)`
//! per shot; counts are therefore reproducible across platforms.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default register size limit.
pub const DEFAULT_MAX_QUBITS: usize = 24;

/// Tolerance used for normalization checks on simulated states.
pub const EPS_STATE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum GateKind {
    Hadamard,
    PauliX,
    /// `diag(1, e^{i angle})` on the target.
    PhaseShift(f64),
}

/// Which value of the control qubit enables the gate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Polarity {
    One,
    Zero,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Control {
    pub qubit: usize,
    pub polarity: Polarity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub target: usize,
    pub controls: Vec<Control>,
}

impl Gate {
    pub fn new(kind: GateKind, target: usize) -> Self {
        Self {
            kind,
            target,
            controls: Vec::new(),
        }
    }

    pub fn h(target: usize) -> Self {
        Self::new(GateKind::Hadamard, target)
    }

    pub fn x(target: usize) -> Self {
        Self::new(GateKind::PauliX, target)
    }

    pub fn phase(target: usize, angle: f64) -> Self {
        Self::new(GateKind::PhaseShift(angle), target)
    }

    /// Adds a control that fires when `qubit` is 1.
    pub fn controlled_by(mut self, qubit: usize) -> Self {
        self.controls.push(Control {
            qubit,
            polarity: Polarity::One,
        });
        self
    }

    /// Adds a control that fires when `qubit` is 0.
    pub fn anti_controlled_by(mut self, qubit: usize) -> Self {
        self.controls.push(Control {
            qubit,
            polarity: Polarity::Zero,
        });
        self
    }

    pub fn with_controls(mut self, qubits: impl IntoIterator<Item = usize>) -> Self {
        for q in qubits {
            self = self.controlled_by(q);
        }
        self
    }

    pub fn validate(&self, num_qubits: usize) -> Result<()> {
        if self.target >= num_qubits {
            return Err(Error::QubitIndex {
                index: self.target,
                num_qubits,
            });
        }
        for c in &self.controls {
            if c.qubit >= num_qubits {
                return Err(Error::QubitIndex {
                    index: c.qubit,
                    num_qubits,
                });
            }
            if c.qubit == self.target {
                return Err(Error::TargetIsControl(self.target));
            }
        }
        Ok(())
    }

    /// Rewrites zero-polarity controls as X-conjugated one-polarity controls.
    pub fn with_positive_controls(&self) -> Vec<Gate> {
        let flips: Vec<usize> = self
            .controls
            .iter()
            .filter(|c| c.polarity == Polarity::Zero)
            .map(|c| c.qubit)
            .collect();
        let core = Gate {
            kind: self.kind,
            target: self.target,
            controls: self
                .controls
                .iter()
                .map(|c| Control {
                    qubit: c.qubit,
                    polarity: Polarity::One,
                })
                .collect(),
        };
        let mut out = Vec::with_capacity(2 * flips.len() + 1);
        out.extend(flips.iter().map(|&q| Gate::x(q)));
        out.push(core);
        out.extend(flips.iter().map(|&q| Gate::x(q)));
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    num_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            gates: Vec::new(),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.num_qubits)?;
        self.gates.push(gate);
        Ok(())
    }

    /// Appends every gate of `other`, which may act on a smaller register.
    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        for g in &other.gates {
            self.push(g.clone())?;
        }
        Ok(())
    }

    pub fn count(&self, pred: impl Fn(&Gate) -> bool) -> usize {
        self.gates.iter().filter(|g| pred(g)).count()
    }
}

/// Outcome tallies for a single measured qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub ones: u64,
    pub zeros: u64,
}

impl Counts {
    pub fn shots(&self) -> u64 {
        self.ones + self.zeros
    }

    pub fn one_fraction(&self) -> f64 {
        self.ones as f64 / self.shots() as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

#[inline]
fn bit_of(num_qubits: usize, qubit: usize) -> usize {
    1usize << (num_qubits - 1 - qubit)
}

impl StateVector {
    /// `|0...0>` on `num_qubits` qubits, limited to [`DEFAULT_MAX_QUBITS`].
    pub fn zero(num_qubits: usize) -> Result<Self> {
        Self::zero_with_limit(num_qubits, DEFAULT_MAX_QUBITS)
    }

    pub fn zero_with_limit(num_qubits: usize, limit: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits > limit {
            return Err(Error::Capacity {
                requested: num_qubits,
                limit,
            });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    /// Wraps raw amplitudes. The length must be a power of two; the vector
    /// must be normalized within [`EPS_STATE`].
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::Shape(format!(
                "amplitude count {len} is not a power of two >= 2"
            )));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > EPS_STATE {
            return Err(Error::InvalidParameter(format!(
                "state norm {norm} differs from 1"
            )));
        }
        Ok(Self {
            num_qubits: len.trailing_zeros() as usize,
            amplitudes,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.num_qubits {
            return Err(Error::QubitIndex {
                index: qubit,
                num_qubits: self.num_qubits,
            });
        }
        Ok(())
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.num_qubits)?;
        let q = self.num_qubits;
        let tbit = bit_of(q, gate.target);
        let (mut mask, mut want) = (0usize, 0usize);
        for c in &gate.controls {
            let b = bit_of(q, c.qubit);
            mask |= b;
            if c.polarity == Polarity::One {
                want |= b;
            }
        }
        let dim = self.amplitudes.len();
        let amps = &mut self.amplitudes;
        match gate.kind {
            GateKind::PhaseShift(angle) => {
                let rot = Complex64::from_polar(1.0, angle);
                for i in (0..dim).filter(|i| i & tbit != 0 && i & mask == want) {
                    amps[i] *= rot;
                }
            }
            GateKind::PauliX | GateKind::Hadamard => {
                let hadamard = matches!(gate.kind, GateKind::Hadamard);
                let s = std::f64::consts::FRAC_1_SQRT_2;
                for base in (0..dim).step_by(tbit << 1) {
                    for i in base..base + tbit {
                        if i & mask != want {
                            continue;
                        }
                        let j = i | tbit;
                        let (a, b) = (amps[i], amps[j]);
                        if hadamard {
                            amps[i] = (a + b) * s;
                            amps[j] = (a - b) * s;
                        } else {
                            amps[i] = b;
                            amps[j] = a;
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn apply_circuit(&mut self, circuit: &Circuit) -> Result<()> {
        if circuit.num_qubits() > self.num_qubits {
            return Err(Error::QubitIndex {
                index: circuit.num_qubits() - 1,
                num_qubits: self.num_qubits,
            });
        }
        circuit.gates().iter().try_for_each(|g| self.apply_gate(g))
    }

    /// Probability that measuring `qubit` yields 1.
    pub fn qubit_one_probability(&self, qubit: usize) -> Result<f64> {
        self.check_qubit(qubit)?;
        let b = bit_of(self.num_qubits, qubit);
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i & b != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    pub fn basis_probability(&self, index: usize) -> Result<f64> {
        self.amplitudes
            .get(index)
            .map(|a| a.norm_sqr())
            .ok_or(Error::BasisIndex {
                index,
                num_qubits: self.num_qubits,
            })
    }

    /// Repeated single-qubit measurement of `qubit` over `shots` preparations.
    pub fn sample_counts(&self, qubit: usize, shots: u64, seed: u64) -> Result<Counts> {
        let p = self.qubit_one_probability(qubit)?;
        sample_bernoulli(p, shots, seed)
    }
}

/// Draws `shots` Bernoulli(`p`) outcomes from a ChaCha8 stream seeded by `seed`.
pub fn sample_bernoulli(p: f64, shots: u64, seed: u64) -> Result<Counts> {
    if shots == 0 {
        return Err(Error::InvalidParameter("shots must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ones = (0..shots).filter(|_| rng.random::<f64>() < p).count() as u64;
    Ok(Counts {
        ones,
        zeros: shots - ones,
    })
}
