//! Weight learning with simultaneous perturbation stochastic approximation.
//!
//! Gains follow the usual schedule `a_k = a0 / (k + 1 + A)^alpha` and
//! `c_k = c0 / (k + 1)^gamma`; perturbations are Rademacher `+-1` vectors drawn
//! from `ChaCha8Rng::seed_from_u64(seed)`. The best iterate seen (by the
//! tracked cost) is returned rather than the last one.

use std::f64::consts::FRAC_PI_2;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::datasets::{Encoding, LabeledDataset};
use crate::encoding::PhaseVector;
use crate::error::{Error, Result};
use crate::neuron::activation_closed_form;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpsaConfig {
    pub iterations: usize,
    pub a0: f64,
    pub c0: f64,
    /// Stability constant `A`.
    pub big_a: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub seed: u64,
    /// Samples drawn (without replacement) per gradient probe.
    pub batch_size: Option<usize>,
    /// Independent random starts tried by [`train_classifier`]; the run with
    /// the lowest training cost wins.
    pub restarts: usize,
}

impl Default for SpsaConfig {
    fn default() -> Self {
        Self {
            iterations: 200,
            a0: 0.5,
            c0: 0.2,
            big_a: 10.0,
            alpha: 0.602,
            gamma: 0.101,
            seed: 0,
            batch_size: None,
            restarts: 1,
        }
    }
}

impl SpsaConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_owned()));
        if !(self.a0 > 0.0 && self.a0.is_finite()) || !(self.c0 > 0.0 && self.c0.is_finite()) {
            return bad("a0 and c0 must be positive");
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) || !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad("alpha and gamma must lie in (0, 1]");
        }
        if !(self.big_a >= 0.0 && self.big_a.is_finite()) {
            return bad("stability constant A must be >= 0");
        }
        if self.batch_size == Some(0) {
            return bad("batch_size must be at least 1");
        }
        if self.restarts == 0 {
            return bad("restarts must be at least 1");
        }
        Ok(())
    }

    pub fn step_gain(&self, k: usize) -> f64 {
        self.a0 / (k as f64 + 1.0 + self.big_a).powf(self.alpha)
    }

    pub fn perturbation_gain(&self, k: usize) -> f64 {
        self.c0 / (k as f64 + 1.0).powf(self.gamma)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iteration: usize,
    pub cost: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub cost: f64,
    pub accuracy: f64,
    pub threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainResult {
    pub final_weights: PhaseVector,
    pub best_cost: f64,
    pub cost_trace: Vec<TracePoint>,
    pub train_metrics: Option<Metrics>,
    pub test_metrics: Option<Metrics>,
}

impl TrainResult {
    /// `iteration,cost` rows with a header.
    pub fn write_trace_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["iteration", "cost"])?;
        for p in &self.cost_trace {
            w.write_record([p.iteration.to_string(), p.cost.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Cost seen by the optimizer.
pub trait Objective {
    /// Cost used by the two gradient probes of iteration `k`; may be stochastic.
    fn probe(&mut self, params: &[f64], k: usize) -> Result<f64>;

    /// Cost recorded in the trace and used to pick the best iterate.
    fn tracked(&mut self, params: &[f64]) -> Result<f64>;
}

/// Adapts a deterministic closure to [`Objective`].
pub struct FnObjective<F>(pub F);

impl<F: FnMut(&[f64]) -> Result<f64>> Objective for FnObjective<F> {
    fn probe(&mut self, params: &[f64], _k: usize) -> Result<f64> {
        (self.0)(params)
    }

    fn tracked(&mut self, params: &[f64]) -> Result<f64> {
        (self.0)(params)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpsaOutcome {
    pub best_params: Vec<f64>,
    pub best_cost: f64,
    pub trace: Vec<TracePoint>,
}

pub fn spsa_optimize(objective: &mut impl Objective, init: Vec<f64>, cfg: &SpsaConfig) -> Result<SpsaOutcome> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut x = init;
    let start = objective.tracked(&x)?;
    let mut trace = vec![TracePoint { iteration: 0, cost: start }];
    let (mut best_cost, mut best_params) = (start, x.clone());
    let mut delta = vec![0.0; x.len()];
    let mut probe = vec![0.0; x.len()];
    for k in 0..cfg.iterations {
        let (ak, ck) = (cfg.step_gain(k), cfg.perturbation_gain(k));
        for d in delta.iter_mut() {
            *d = if rng.random::<bool>() { 1.0 } else { -1.0 };
        }
        for ((p, xi), d) in probe.iter_mut().zip(&x).zip(&delta) {
            *p = xi + ck * d;
        }
        let plus = objective.probe(&probe, k)?;
        for ((p, xi), d) in probe.iter_mut().zip(&x).zip(&delta) {
            *p = xi - ck * d;
        }
        let minus = objective.probe(&probe, k)?;
        let slope = (plus - minus) / (2.0 * ck);
        // 1/delta_i == delta_i for Rademacher entries
        for (xi, d) in x.iter_mut().zip(&delta) {
            *xi -= ak * slope * d;
        }
        let cost = objective.tracked(&x)?;
        trace.push(TracePoint { iteration: k + 1, cost });
        if cost < best_cost {
            best_cost = cost;
            best_params.clone_from(&x);
        }
    }
    Ok(SpsaOutcome {
        best_params,
        best_cost,
        trace,
    })
}

/// Minimizes `cost` over full weight vectors starting from `init`.
pub fn spsa_minimize(
    mut cost: impl FnMut(&PhaseVector) -> Result<f64>,
    init: &PhaseVector,
    cfg: &SpsaConfig,
) -> Result<TrainResult> {
    let mut obj = FnObjective(|p: &[f64]| cost(&PhaseVector::new(p.to_vec())?));
    let out = spsa_optimize(&mut obj, init.as_slice().to_vec(), cfg)?;
    Ok(TrainResult {
        final_weights: PhaseVector::new(out.best_params)?,
        best_cost: out.best_cost,
        cost_trace: out.trace,
        train_metrics: None,
        test_metrics: None,
    })
}

/// Label assigned by the neuron: 1 iff `f > t`.
pub fn assign_label(activation: f64, threshold: f64) -> u8 {
    u8::from(activation > threshold)
}

/// `(1 - f(theta, phi))^2`.
pub fn cost_single_target(theta: &PhaseVector, phi: &PhaseVector) -> Result<f64> {
    let f = activation_closed_form(theta, phi)?;
    Ok((1.0 - f) * (1.0 - f))
}

fn check_threshold(t: f64) -> Result<()> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::InvalidParameter(format!("threshold {t} outside (0, 1)")));
    }
    Ok(())
}

fn squared_label_error(inputs: &[PhaseVector], labels: &[u8], phi: &PhaseVector, t: f64, subset: Option<&[usize]>) -> Result<f64> {
    let mut wrong = 0usize;
    let mut total = 0usize;
    let mut tally = |i: usize| -> Result<()> {
        let predicted = assign_label(activation_closed_form(&inputs[i], phi)?, t);
        let e = i32::from(labels[i]) - i32::from(predicted);
        wrong += (e * e) as usize;
        total += 1;
        Ok(())
    };
    match subset {
        Some(idx) => idx.iter().try_for_each(|&i| tally(i))?,
        None => (0..inputs.len()).try_for_each(&mut tally)?,
    }
    Ok(wrong as f64 / total as f64)
}

/// Mean squared difference between true and assigned labels.
pub fn cost_labels(data: &LabeledDataset, phi: &PhaseVector, threshold: f64) -> Result<f64> {
    check_threshold(threshold)?;
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    squared_label_error(&data.encoded(), data.labels(), phi, threshold, None)
}

pub fn evaluate(data: &LabeledDataset, phi: &PhaseVector, threshold: f64) -> Result<Metrics> {
    let cost = cost_labels(data, phi, threshold)?;
    Ok(Metrics {
        cost,
        accuracy: 1.0 - cost,
        threshold,
    })
}

/// Maps the optimizer's free parameters to a full weight vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WeightLayout {
    /// Every phase trainable.
    Free { len: usize },
    /// First phase pinned to 0, the rest trainable.
    PinnedFirst { len: usize },
}

impl WeightLayout {
    pub fn for_dataset(data: &LabeledDataset) -> Self {
        match data.encoding() {
            Encoding::Direct2d => Self::Free { len: 2 },
            Encoding::Bias4d => Self::PinnedFirst { len: 4 },
            Encoding::Image => Self::Free {
                len: data.samples().first().map_or(2, Vec::len),
            },
        }
    }

    pub fn len(&self) -> usize {
        match *self {
            Self::Free { len } | Self::PinnedFirst { len } => len,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn num_params(&self) -> usize {
        match *self {
            Self::Free { len } => len,
            Self::PinnedFirst { len } => len - 1,
        }
    }

    pub fn expand(&self, params: &[f64]) -> Result<PhaseVector> {
        match self {
            Self::Free { .. } => PhaseVector::new(params.to_vec()),
            Self::PinnedFirst { .. } => {
                let mut v = Vec::with_capacity(params.len() + 1);
                v.push(0.0);
                v.extend_from_slice(params);
                PhaseVector::new(v)
            }
        }
    }

    /// Uniform draws in `[0, pi/2]`.
    pub fn random_init(&self, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        (0..self.num_params()).map(|_| rng.random::<f64>() * FRAC_PI_2).collect()
    }
}

struct LabelObjective<'a> {
    inputs: &'a [PhaseVector],
    labels: &'a [u8],
    layout: WeightLayout,
    threshold: f64,
    batch: Option<(usize, ChaCha8Rng)>,
    current: Option<(usize, Vec<usize>)>,
}

impl Objective for LabelObjective<'_> {
    fn probe(&mut self, params: &[f64], k: usize) -> Result<f64> {
        let phi = self.layout.expand(params)?;
        let Some((size, rng)) = self.batch.as_mut() else {
            return squared_label_error(self.inputs, self.labels, &phi, self.threshold, None);
        };
        if self.current.as_ref().map(|c| c.0) != Some(k) {
            let amount = (*size).min(self.inputs.len());
            self.current = Some((k, index::sample(rng, self.inputs.len(), amount).into_vec()));
        }
        let idx = &self.current.as_ref().expect("batch drawn").1;
        squared_label_error(self.inputs, self.labels, &phi, self.threshold, Some(idx))
    }

    fn tracked(&mut self, params: &[f64]) -> Result<f64> {
        let phi = self.layout.expand(params)?;
        squared_label_error(self.inputs, self.labels, &phi, self.threshold, None)
    }
}

fn check_labels(data: &LabeledDataset) -> Result<()> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if let Some((index, &label)) = data.labels().iter().enumerate().find(|(_, &l)| l > 1) {
        return Err(Error::InvalidLabel { index, label });
    }
    Ok(())
}

/// Fits weights to `train` by minimizing the label cost.
///
/// Start `r` uses seed `cfg.seed + r` for both its random init and its
/// perturbations. Ties keep the earliest start.
pub fn train_classifier(
    train: &LabeledDataset,
    test: Option<&LabeledDataset>,
    cfg: &SpsaConfig,
    threshold: f64,
) -> Result<TrainResult> {
    cfg.validate()?;
    let layout = WeightLayout::for_dataset(train);
    let mut best: Option<TrainResult> = None;
    for r in 0..cfg.restarts as u64 {
        let run_cfg = SpsaConfig {
            seed: cfg.seed.wrapping_add(r),
            ..cfg.clone()
        };
        let init = layout.random_init(run_cfg.seed);
        let result = train_classifier_from(train, test, &run_cfg, threshold, layout, init)?;
        if best.as_ref().is_none_or(|b| result.best_cost < b.best_cost) {
            best = Some(result);
        }
        if best.as_ref().is_some_and(|b| b.best_cost == 0.0) {
            break;
        }
    }
    Ok(best.expect("at least one start"))
}

pub fn train_classifier_from(
    train: &LabeledDataset,
    test: Option<&LabeledDataset>,
    cfg: &SpsaConfig,
    threshold: f64,
    layout: WeightLayout,
    init: Vec<f64>,
) -> Result<TrainResult> {
    check_threshold(threshold)?;
    check_labels(train)?;
    if let Some(t) = test {
        check_labels(t)?;
    }
    if init.len() != layout.num_params() {
        return Err(Error::LengthMismatch {
            left: init.len(),
            right: layout.num_params(),
        });
    }
    let inputs = train.encoded();
    if inputs[0].len() != layout.len() {
        return Err(Error::LengthMismatch {
            left: inputs[0].len(),
            right: layout.len(),
        });
    }
    let batch = cfg.batch_size.map(|size| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(2);
        (size, rng)
    });
    let mut obj = LabelObjective {
        inputs: &inputs,
        labels: train.labels(),
        layout,
        threshold,
        batch,
        current: None,
    };
    let out = spsa_optimize(&mut obj, init, cfg)?;
    let weights = layout.expand(&out.best_params)?;
    Ok(TrainResult {
        train_metrics: Some(evaluate(train, &weights, threshold)?),
        test_metrics: test.map(|t| evaluate(t, &weights, threshold)).transpose()?,
        final_weights: weights,
        best_cost: out.best_cost,
        cost_trace: out.trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::generate_2d_dataset;
    use std::f64::consts::PI;

    fn pv(v: &[f64]) -> PhaseVector {
        PhaseVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn labels_use_strict_threshold() {
        assert_eq!(assign_label(0.96, 0.95), 1);
        assert_eq!(assign_label(0.95, 0.95), 0);
        assert_eq!(assign_label(0.84, 0.85), 0);
    }

    #[test]
    fn single_target_cost() {
        let theta = pv(&[PI / 5.0, 0.0, PI / 3.0, 0.1]);
        assert_eq!(cost_single_target(&theta, &theta).unwrap(), 0.0);
        let cb = pv(&[PI / 2.0, 0.0, 0.0, PI / 2.0]);
        let neg = pv(&[0.0, PI / 2.0, PI / 2.0, 0.0]);
        assert_eq!(cost_single_target(&cb, &neg).unwrap(), 1.0);
        let c = cost_single_target(&theta, &cb).unwrap();
        assert!((c - 0.417).abs() < 1e-3, "{c}");
    }

    #[test]
    fn label_cost_extremes() {
        let ds = LabeledDataset::new(vec![vec![0.2, 0.2], vec![0.0, 1.5]], vec![1, 0], Encoding::Direct2d).unwrap();
        let phi = pv(&[0.0, 0.0]);
        assert_eq!(cost_labels(&ds, &phi, 0.95).unwrap(), 0.0);
        let flipped = LabeledDataset::new(ds.samples().to_vec(), vec![0, 1], Encoding::Direct2d).unwrap();
        assert_eq!(cost_labels(&flipped, &phi, 0.95).unwrap(), 1.0);
        let empty = LabeledDataset::new(vec![], vec![], Encoding::Direct2d).unwrap();
        assert!(matches!(cost_labels(&empty, &phi, 0.5), Err(Error::EmptyDataset)));
        assert!(cost_labels(&ds, &phi, 1.0).is_err());
    }

    #[test]
    fn cost_is_one_minus_accuracy() {
        let ds = generate_2d_dataset(100, 3).unwrap();
        for shift in [0.0, 0.2, 0.5, 1.0] {
            let m = evaluate(&ds, &pv(&[0.0, shift]), 0.95).unwrap();
            let correct = (0..ds.len())
                .filter(|&i| {
                    assign_label(activation_closed_form(&ds.encode(i), &pv(&[0.0, shift])).unwrap(), 0.95)
                        == ds.labels()[i]
                })
                .count();
            assert!((m.accuracy - correct as f64 / 100.0).abs() < 1e-12);
            assert!((m.cost + m.accuracy - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn config_validation() {
        assert!(SpsaConfig::default().validate().is_ok());
        for bad in [
            SpsaConfig { a0: 0.0, ..Default::default() },
            SpsaConfig { c0: -1.0, ..Default::default() },
            SpsaConfig { alpha: 1.5, ..Default::default() },
            SpsaConfig { gamma: 0.0, ..Default::default() },
            SpsaConfig { batch_size: Some(0), ..Default::default() },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    #[test]
    fn zero_cost_start_stays_put() {
        let theta = pv(&[PI / 5.0, 0.0, PI / 3.0, 0.1]);
        let r = spsa_minimize(|phi| cost_single_target(&theta, phi), &theta, &SpsaConfig::default()).unwrap();
        assert_eq!(r.final_weights, theta);
        assert_eq!(r.best_cost, 0.0);
        assert!(r.cost_trace.iter().all(|p| p.cost < 1e-20));
    }

    #[test]
    fn best_iterate_is_reported() {
        let theta = pv(&[0.3, 1.2, 0.1, 0.9]);
        let init = pv(&[1.0, 0.0, 1.0, 0.2]);
        let cfg = SpsaConfig { iterations: 60, seed: 4, ..Default::default() };
        let r = spsa_minimize(|phi| cost_single_target(&theta, phi), &init, &cfg).unwrap();
        assert_eq!(r.cost_trace.len(), 61);
        let min = r.cost_trace.iter().map(|p| p.cost).fold(f64::INFINITY, f64::min);
        assert!(min <= r.cost_trace[0].cost);
        assert_eq!(r.best_cost, min);
        assert_eq!(cost_single_target(&theta, &r.final_weights).unwrap(), min);
        let again = spsa_minimize(|phi| cost_single_target(&theta, phi), &init, &cfg).unwrap();
        assert_eq!(r, again);
    }

    #[test]
    fn oracle_errors_propagate() {
        let init = pv(&[0.0, 0.0]);
        let r = spsa_minimize(|_| Err(Error::InvalidParameter("boom".into())), &init, &SpsaConfig::default());
        assert!(r.is_err());
    }

    #[test]
    fn invalid_labels_rejected() {
        let ds = LabeledDataset::new(vec![vec![0.1, 0.1]], vec![2], Encoding::Direct2d).unwrap();
        assert!(matches!(
            train_classifier(&ds, None, &SpsaConfig::default(), 0.9),
            Err(Error::InvalidLabel { index: 0, label: 2 })
        ));
    }

    #[test]
    fn one_sample_dataset_behaves_like_single_target() {
        let ds = LabeledDataset::new(vec![vec![0.4, 1.1]], vec![1], Encoding::Direct2d).unwrap();
        let cfg = SpsaConfig { iterations: 300, seed: 2, ..Default::default() };
        let r = train_classifier(&ds, None, &cfg, 0.95).unwrap();
        assert_eq!(r.train_metrics.unwrap().accuracy, 1.0);
        assert!(activation_closed_form(&ds.encode(0), &r.final_weights).unwrap() > 0.95);
    }

    #[test]
    fn layouts() {
        let pinned = WeightLayout::PinnedFirst { len: 4 };
        assert_eq!(pinned.num_params(), 3);
        assert_eq!(pinned.expand(&[0.1, 0.2, 0.25]).unwrap().as_slice(), &[0.0, 0.1, 0.2, 0.25]);
        let init = pinned.random_init(5);
        assert_eq!(init, pinned.random_init(5));
        assert!(init.iter().all(|v| (0.0..=FRAC_PI_2).contains(v)));
    }
}
