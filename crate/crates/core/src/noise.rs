//! Mean activation under uniform phase noise `Delta_k ~ U[-a/2, a/2]`.
//!
//! `1 - cos(a)` is evaluated as `2 sin^2(a/2)` so the formulas stay accurate
//! for tiny widths.
//!
//! Monte Carlo trials run in fixed-size shards. Shard `s` draws from
//! `ChaCha8Rng::seed_from_u64(seed)` with its stream set to `s`, and shard
//! sums are combined in shard order, so the result does not depend on thread
//! scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::encoding::PhaseVector;
use crate::error::{Error, Result};
use crate::neuron::activation_from_differences;

const SHARD_TRIALS: u64 = 1 << 14;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    /// Full width of the uniform noise interval, radians. Zero disables noise.
    pub a: f64,
    pub trials: u64,
    pub seed: u64,
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.a >= 0.0) {
            return Err(Error::InvalidParameter(format!("noise width a = {} must be >= 0", self.a)));
        }
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        Ok(())
    }
}

fn check_width(a: f64) -> Result<()> {
    if !(a.is_finite() && a >= 0.0) {
        return Err(Error::InvalidParameter(format!("noise width a = {a} must be >= 0")));
    }
    Ok(())
}

/// `<cos(Delta_j - Delta_i)> = 2(1 - cos a)/a^2`; 1 at `a = 0`.
pub fn damping_factor(a: f64) -> f64 {
    if a == 0.0 {
        return 1.0;
    }
    let s = (0.5 * a).sin();
    4.0 * s * s / (a * a)
}

/// Mean activation when the input equals the weight up to noise.
pub fn mean_activation_identical(num_qubits: u32, a: f64) -> Result<f64> {
    check_width(a)?;
    let n = 2f64.powi(num_qubits as i32);
    Ok(1.0 / n + (n - 1.0) / n * damping_factor(a))
}

/// Second-order expansion `1 - (N-1)/N * a^2/12`.
pub fn mean_activation_small_a(num_qubits: u32, a: f64) -> f64 {
    let n = 2f64.powi(num_qubits as i32);
    1.0 - (n - 1.0) / n * a * a / 12.0
}

/// Mean activation for arbitrary input and weight:
/// `1/N + D (2/N^2) sum_{i<j} cos(A_ij)` with `D` the damping factor.
pub fn mean_activation_general(theta: &PhaseVector, phi: &PhaseVector, a: f64) -> Result<f64> {
    check_width(a)?;
    let f = crate::neuron::activation_closed_form(theta, phi)?;
    let n = theta.len() as f64;
    // f = 1/N + P with P the pairwise term
    Ok(1.0 / n + damping_factor(a) * (f - 1.0 / n))
}

/// Like [`mean_activation_general`] but summing the pairwise cosines
/// explicitly, with `damping` in place of the noise factor.
pub fn pairwise_mean_activation(theta: &PhaseVector, phi: &PhaseVector, damping: f64) -> Result<f64> {
    if theta.len() != phi.len() {
        return Err(Error::LengthMismatch {
            left: theta.len(),
            right: phi.len(),
        });
    }
    let d: Vec<f64> = theta.as_slice().iter().zip(phi.as_slice()).map(|(t, p)| t - p).collect();
    let n = d.len() as f64;
    let mut sum = 0.0;
    for i in 0..d.len() {
        for j in i + 1..d.len() {
            sum += (d[j] - d[i]).cos();
        }
    }
    Ok(1.0 / n + damping * 2.0 * sum / (n * n))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(trials)`.
    pub std_error: f64,
    pub trials: u64,
}

/// Estimates `<f(theta + Delta, phi)>` by sampling `cfg.trials` noise vectors.
pub fn monte_carlo_noisy_activation(theta: &PhaseVector, phi: &PhaseVector, cfg: &NoiseConfig) -> Result<MonteCarloEstimate> {
    cfg.validate()?;
    if theta.len() != phi.len() {
        return Err(Error::LengthMismatch {
            left: theta.len(),
            right: phi.len(),
        });
    }
    let base: Vec<f64> = theta.as_slice().iter().zip(phi.as_slice()).map(|(t, p)| t - p).collect();
    let shards = cfg.trials.div_ceil(SHARD_TRIALS);
    let partials: Vec<(f64, f64)> = (0..shards)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(s);
            let count = SHARD_TRIALS.min(cfg.trials - s * SHARD_TRIALS);
            let mut buf = vec![0.0; base.len()];
            let (mut sum, mut sum_sq) = (0.0, 0.0);
            for _ in 0..count {
                for (b, d) in buf.iter_mut().zip(&base) {
                    let noise = if cfg.a == 0.0 { 0.0 } else { cfg.a * (rng.random::<f64>() - 0.5) };
                    *b = d + noise;
                }
                let f = activation_from_differences(&mut buf);
                sum += f;
                sum_sq += f * f;
            }
            (sum, sum_sq)
        })
        .collect();
    let (sum, sum_sq) = neumaier_sum2(&partials);
    let t = cfg.trials as f64;
    let mean = sum / t;
    let std_error = if cfg.trials > 1 {
        let var = ((sum_sq - t * mean * mean) / (t - 1.0)).max(0.0);
        (var / t).sqrt()
    } else {
        0.0
    };
    Ok(MonteCarloEstimate {
        mean,
        std_error,
        trials: cfg.trials,
    })
}

fn neumaier_sum2(parts: &[(f64, f64)]) -> (f64, f64) {
    let mut acc = [(0.0f64, 0.0f64); 2];
    for &(x, y) in parts {
        for (slot, v) in acc.iter_mut().zip([x, y]) {
            let t = slot.0 + v;
            if slot.0.abs() >= v.abs() {
                slot.1 += (slot.0 - t) + v;
            } else {
                slot.1 += (v - t) + slot.0;
            }
            slot.0 = t;
        }
    }
    (acc[0].0 + acc[0].1, acc[1].0 + acc[1].1)
}
