//! Continuously-valued quantum perceptron: phase encoding, a small
//! statevector simulator, activation evaluators, noise analysis and SPSA
//! training.

pub mod datasets;
pub mod encoding;
pub mod error;
pub mod experiments;
pub mod learning;
pub mod neuron;
pub mod noise;
pub mod sim;

pub use encoding::{GrayscaleImage, PhaseVector};
pub use error::{Error, Result};
pub use learning::{SpsaConfig, TrainResult};
pub use neuron::{activation_closed_form, activation_sampled, activation_statevector, Evaluator, Method};
pub use sim::{Circuit, Gate, StateVector};
