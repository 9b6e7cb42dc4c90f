//! End-to-end experiment pipelines shared by the CLI, the bindings and the
//! acceptance harness.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fs::File;
use std::io::Write;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datasets::{
    generate_2d_dataset_with, generate_circle_dataset_with, mnist_binary_dataset, BandParams, CircleParams, Encoding,
    LabeledDataset, MnistSet, Preprocess,
};
use crate::encoding::{normalize_grayscale, GrayscaleImage, PhaseVector};
use crate::error::{Error, Result};
use crate::learning::{evaluate, spsa_minimize, train_classifier, Metrics, SpsaConfig, TrainResult, WeightLayout};
use crate::neuron::{activation_closed_form, activation_sampled, pairwise_activation_matrix};
use crate::noise::{mean_activation_identical, mean_activation_small_a, monte_carlo_noisy_activation, NoiseConfig};

pub const FORMAT_VERSION: u32 = 1;

/// `(pi/2, 0, 0, pi/2)`.
pub fn checkerboard_weight() -> PhaseVector {
    PhaseVector::new(vec![FRAC_PI_2, 0.0, 0.0, FRAC_PI_2]).expect("length 4")
}

pub fn single_target() -> PhaseVector {
    PhaseVector::new(vec![PI / 5.0, 0.0, PI / 3.0, 0.1]).expect("length 4")
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let mut cov = 0.0;
    let (mut va, mut vb) = (0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    if va == 0.0 || vb == 0.0 {
        0.0
    } else {
        cov / (va * vb).sqrt()
    }
}

// ------------------------------------------------------------ random images

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomImageRow {
    pub index: usize,
    pub pixels: Vec<u8>,
    pub analytic: f64,
    pub sampled: f64,
    /// `sqrt(f (1 - f) / shots)`.
    pub sigma: f64,
    /// Pearson correlation of the pixel pattern with the weight pattern.
    pub correlation: f64,
}

impl RandomImageRow {
    pub fn within(&self, k: f64) -> bool {
        (self.sampled - self.analytic).abs() <= k * self.sigma
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomImageReport {
    pub shots: u64,
    pub seed: u64,
    pub weight: PhaseVector,
    /// In generation order.
    pub rows: Vec<RandomImageRow>,
}

impl RandomImageReport {
    /// Row indices sorted by decreasing analytic activation.
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.rows.len()).collect();
        idx.sort_by(|&a, &b| self.rows[b].analytic.total_cmp(&self.rows[a].analytic));
        idx
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let k = self.rows.first().map_or(0, |r| r.pixels.len());
        let mut header: Vec<String> = vec!["index".into()];
        header.extend((0..k).map(|i| format!("p{i}")));
        header.extend(["analytic", "sampled", "sigma", "within_3sigma", "correlation"].map(String::from));
        w.write_record(&header)?;
        for r in &self.rows {
            let mut rec = vec![r.index.to_string()];
            rec.extend(r.pixels.iter().map(u8::to_string));
            rec.extend([
                r.analytic.to_string(),
                r.sampled.to_string(),
                r.sigma.to_string(),
                r.within(3.0).to_string(),
                r.correlation.to_string(),
            ]);
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `m` random 2x2 grayscale images scored against the checkerboard weight,
/// both in closed form and from `shots` ancilla measurements.
pub fn random_image_experiment(m: usize, shots: u64, seed: u64) -> Result<RandomImageReport> {
    random_image_experiment_with(m, shots, seed, &checkerboard_weight())
}

pub fn random_image_experiment_with(m: usize, shots: u64, seed: u64, weight: &PhaseVector) -> Result<RandomImageReport> {
    if m == 0 || shots == 0 {
        return Err(Error::InvalidParameter("need at least one image and one shot".into()));
    }
    let side = 1usize << (weight.num_qubits() / 2);
    if side * side != weight.len() {
        return Err(Error::Shape(format!("weight of length {} is not a square image", weight.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut shot_seeds = ChaCha8Rng::seed_from_u64(seed);
    shot_seeds.set_stream(1);
    let mut rows = Vec::with_capacity(m);
    for index in 0..m {
        let pixels: Vec<u8> = (0..weight.len()).map(|_| rng.random()).collect();
        let theta = normalize_grayscale(&GrayscaleImage::new(side, side, pixels.clone())?)?;
        let analytic = activation_closed_form(&theta, weight)?;
        let sampled = activation_sampled(&theta, weight, shots, shot_seeds.random())?.value;
        rows.push(RandomImageRow {
            index,
            correlation: pearson(theta.as_slice(), weight.as_slice()),
            pixels,
            analytic,
            sampled,
            sigma: (analytic * (1.0 - analytic) / shots as f64).sqrt(),
        });
    }
    Ok(RandomImageReport {
        shots,
        seed,
        weight: weight.clone(),
        rows,
    })
}

// ------------------------------------------------------------ single target

impl SpsaConfig {
    /// Gains calibrated for the single-target task.
    pub fn single_target() -> Self {
        Self {
            a0: 4.0,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingleTargetReport {
    pub target: PhaseVector,
    pub init: PhaseVector,
    pub final_activation: f64,
    pub result: TrainResult,
}

/// Minimizes `(1 - f(target, phi))^2`; `init` defaults to a seeded uniform
/// draw in `[0, pi/2]`.
pub fn learn_single_target(target: &PhaseVector, init: Option<&PhaseVector>, cfg: &SpsaConfig) -> Result<SingleTargetReport> {
    let init = match init {
        Some(p) if p.len() != target.len() => {
            return Err(Error::LengthMismatch {
                left: p.len(),
                right: target.len(),
            })
        }
        Some(p) => p.clone(),
        None => PhaseVector::new(WeightLayout::Free { len: target.len() }.random_init(cfg.seed))?,
    };
    let result = spsa_minimize(|phi| crate::learning::cost_single_target(target, phi), &init, cfg)?;
    Ok(SingleTargetReport {
        target: target.clone(),
        init,
        final_activation: activation_closed_form(target, &result.final_weights)?,
        result,
    })
}

// ------------------------------------------------------------ classification

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DatasetSpec {
    Band2d {
        #[serde(default)]
        params: BandParams,
    },
    Circles {
        #[serde(default)]
        params: CircleParams,
    },
    /// `x1,x2,label` CSV; `m` and the data seed are ignored.
    File { path: PathBuf, encoding: Encoding },
}

impl DatasetSpec {
    pub fn load(&self, m: usize, seed: u64) -> Result<LabeledDataset> {
        match self {
            Self::Band2d { params } => generate_2d_dataset_with(m, params, seed),
            Self::Circles { params } => generate_circle_dataset_with(m, params, seed),
            Self::File { path, encoding } => LabeledDataset::read_csv(File::open(path)?, *encoding),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Band2d { .. } => "band-2d",
            Self::Circles { .. } => "circles",
            Self::File { .. } => "file",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub x1: f64,
    pub x2: f64,
    pub activation: f64,
    pub label: u8,
}

/// Activation on a `resolution x resolution` lattice spanning `[0, pi/2]^2`
/// (both ends included), row-major in `x1`.
pub fn decision_grid(encoding: Encoding, weights: &PhaseVector, threshold: f64, resolution: usize) -> Result<Vec<GridPoint>> {
    if resolution < 2 {
        return Err(Error::InvalidParameter("grid resolution must be at least 2".into()));
    }
    let encode: fn([f64; 2]) -> PhaseVector = match encoding {
        Encoding::Direct2d => crate::datasets::encode_2d,
        Encoding::Bias4d => crate::datasets::encode_2d_bias,
        Encoding::Image => return Err(Error::InvalidParameter("decision grids need a 2D encoding".into())),
    };
    let step = FRAC_PI_2 / (resolution - 1) as f64;
    (0..resolution * resolution)
        .into_par_iter()
        .map(|k| {
            let x = [(k / resolution) as f64 * step, (k % resolution) as f64 * step];
            let activation = activation_closed_form(&encode(x), weights)?;
            Ok(GridPoint {
                x1: x[0],
                x2: x[1],
                activation,
                label: crate::learning::assign_label(activation, threshold),
            })
        })
        .collect()
}

pub fn write_grid_csv<W: Write>(grid: &[GridPoint], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["x1", "x2", "activation", "label"])?;
    for p in grid {
        w.write_record([p.x1.to_string(), p.x2.to_string(), p.activation.to_string(), p.label.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyConfig {
    pub dataset: DatasetSpec,
    /// Total points; the first `train_len` train, the rest test.
    pub m: usize,
    pub train_len: usize,
    pub data_seed: u64,
    pub threshold: f64,
    pub resolution: usize,
    pub spsa: SpsaConfig,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self {
            dataset: DatasetSpec::Band2d {
                params: BandParams::default(),
            },
            m: 200,
            train_len: 100,
            data_seed: 0,
            threshold: 0.95,
            resolution: 50,
            spsa: SpsaConfig {
                iterations: 300,
                restarts: 8,
                ..SpsaConfig::default()
            },
        }
    }
}

impl ClassifyConfig {
    pub fn circles() -> Self {
        Self {
            dataset: DatasetSpec::Circles {
                params: CircleParams::default(),
            },
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifyReport {
    pub train_len: usize,
    pub test_len: usize,
    pub result: TrainResult,
    pub grid: Vec<GridPoint>,
}

/// Trains on `train`, scores `test`, and samples the decision boundary.
pub fn classify_dataset(
    train: &LabeledDataset,
    test: &LabeledDataset,
    spsa: &SpsaConfig,
    threshold: f64,
    resolution: usize,
) -> Result<ClassifyReport> {
    let result = train_classifier(train, Some(test), spsa, threshold)?;
    let grid = match train.encoding() {
        Encoding::Image => Vec::new(),
        enc => decision_grid(enc, &result.final_weights, threshold, resolution)?,
    };
    Ok(ClassifyReport {
        train_len: train.len(),
        test_len: test.len(),
        result,
        grid,
    })
}

pub fn run_classify(cfg: &ClassifyConfig) -> Result<ClassifyReport> {
    let data = cfg.dataset.load(cfg.m, cfg.data_seed)?;
    if cfg.train_len == 0 || cfg.train_len >= data.len() {
        return Err(Error::InvalidParameter(format!(
            "train_len {} must lie in [1, {})",
            cfg.train_len,
            data.len()
        )));
    }
    let (train, test) = data.split_at(cfg.train_len);
    classify_dataset(&train, &test, &cfg.spsa, cfg.threshold, cfg.resolution)
}

// ------------------------------------------------------------ MNIST

/// Which training "one" becomes the fixed weight.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "index", rename_all = "kebab-case")]
pub enum WeightChoice {
    /// First "one" in the training file.
    First,
    /// The "one" with the highest summed activation against the other
    /// training ones.
    #[default]
    Medoid,
    /// Position in the training file; must hold a "one".
    Index(usize),
}

fn encode_all(set: &MnistSet, indices: &[usize], pre: Preprocess) -> Result<Vec<PhaseVector>> {
    indices.par_iter().map(|&i| pre.apply(&set.images[i])).collect()
}

/// Resolves `choice` to an index into `train`.
pub fn choose_weight_index(train: &MnistSet, choice: WeightChoice, pre: Preprocess) -> Result<usize> {
    let ones = train.indices_of(&[1]);
    if ones.is_empty() {
        return Err(Error::EmptyDataset);
    }
    match choice {
        WeightChoice::First => Ok(ones[0]),
        WeightChoice::Index(i) => match train.labels.get(i) {
            Some(1) => Ok(i),
            Some(&label) => Err(Error::InvalidLabel { index: i, label }),
            None => Err(Error::InvalidParameter(format!("weight index {i} out of range"))),
        },
        WeightChoice::Medoid => {
            let encoded = encode_all(train, &ones, pre)?;
            let m = pairwise_activation_matrix(&encoded)?;
            let score = |r: &Vec<f64>| r.iter().sum::<f64>();
            let best = (0..ones.len())
                .reduce(|a, b| if score(&m[b]) > score(&m[a]) { b } else { a })
                .expect("nonempty");
            Ok(ones[best])
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FixedWeightConfig {
    pub weight: WeightChoice,
    pub threshold: f64,
    pub pad_value: u8,
    /// Test images used (zeros and ones); `None` keeps all.
    pub test_limit: Option<usize>,
    /// Zeros and ones each taken from the test set for the pairwise matrix.
    pub matrix_per_class: usize,
}

impl Default for FixedWeightConfig {
    fn default() -> Self {
        Self {
            weight: WeightChoice::Medoid,
            threshold: 0.85,
            pad_value: 0,
            test_limit: None,
            matrix_per_class: 50,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedWeightReport {
    pub weight_index: usize,
    pub test_len: usize,
    pub metrics: Metrics,
    /// Test-set positions of the matrix rows (zeros first, then ones).
    pub matrix_indices: Vec<usize>,
    pub matrix_labels: Vec<u8>,
    pub matrix: Vec<Vec<f64>>,
}

pub fn write_matrix_csv<W: Write>(labels: &[u8], matrix: &[Vec<f64>], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["label".to_owned()];
    header.extend((0..matrix.len()).map(|j| format!("c{j}")));
    w.write_record(&header)?;
    for (label, row) in labels.iter().zip(matrix) {
        let mut rec = vec![label.to_string()];
        rec.extend(row.iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Zeros-vs-ones with the weight fixed to a padded training "one".
pub fn mnist_fixed_weight(train: &MnistSet, test: &MnistSet, cfg: &FixedWeightConfig) -> Result<FixedWeightReport> {
    let pre = Preprocess::Pad32 {
        pad_value: cfg.pad_value,
    };
    let weight_index = choose_weight_index(train, cfg.weight, pre)?;
    let weight = pre.apply(&train.images[weight_index])?;
    let mut keep = test.indices_of(&[0, 1]);
    if let Some(limit) = cfg.test_limit {
        keep.truncate(limit);
    }
    let subset = test.subset(&keep);
    let data = mnist_binary_dataset(&subset, 1, pre)?;
    let metrics = evaluate(&data, &weight, cfg.threshold)?;

    let mut matrix_indices: Vec<usize> = Vec::new();
    for digit in [0, 1] {
        matrix_indices.extend(test.indices_of(&[digit]).into_iter().take(cfg.matrix_per_class));
    }
    let encoded = encode_all(test, &matrix_indices, pre)?;
    Ok(FixedWeightReport {
        weight_index,
        test_len: data.len(),
        metrics,
        matrix_labels: matrix_indices.iter().map(|&i| test.labels[i]).collect(),
        matrix_indices,
        matrix: pairwise_activation_matrix(&encoded)?,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PooledConfig {
    pub side: usize,
    pub threshold: f64,
    pub train_limit: Option<usize>,
    pub test_limit: Option<usize>,
    pub spsa: SpsaConfig,
}

impl Default for PooledConfig {
    fn default() -> Self {
        Self {
            side: 4,
            threshold: 0.85,
            train_limit: None,
            test_limit: None,
            spsa: SpsaConfig {
                iterations: 300,
                restarts: 8,
                ..SpsaConfig::default()
            },
        }
    }
}

fn zeros_and_ones(set: &MnistSet, limit: Option<usize>) -> MnistSet {
    let mut keep = set.indices_of(&[0, 1]);
    if let Some(limit) = limit {
        keep.truncate(limit);
    }
    set.subset(&keep)
}

/// Zeros-vs-ones on mean-pooled images with SPSA-trained weights.
pub fn mnist_pooled_learn(train: &MnistSet, test: &MnistSet, cfg: &PooledConfig) -> Result<TrainResult> {
    let pre = Preprocess::Pool { side: cfg.side };
    let tr = mnist_binary_dataset(&zeros_and_ones(train, cfg.train_limit), 1, pre)?;
    let te = mnist_binary_dataset(&zeros_and_ones(test, cfg.test_limit), 1, pre)?;
    train_classifier(&tr, Some(&te), &cfg.spsa, cfg.threshold)
}

// ------------------------------------------------------------ noise sweep

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSweepRow {
    pub n: u32,
    pub a: f64,
    pub exact: f64,
    pub approx_small_a: f64,
    pub mc_mean: f64,
    pub mc_stderr: f64,
}

/// Identical input and weight (all phases zero) under noise of width `a`.
/// Row `r` uses Monte Carlo seed `seed + r`.
pub fn noise_sweep(ns: &[u32], widths: &[f64], trials: u64, seed: u64) -> Result<Vec<NoiseSweepRow>> {
    let mut rows = Vec::with_capacity(ns.len() * widths.len());
    for &n in ns {
        let zero = PhaseVector::zeros(n as usize)?;
        for &a in widths {
            let cfg = NoiseConfig {
                a,
                trials,
                seed: seed.wrapping_add(rows.len() as u64),
            };
            let mc = monte_carlo_noisy_activation(&zero, &zero, &cfg)?;
            rows.push(NoiseSweepRow {
                n,
                a,
                exact: mean_activation_identical(n, a)?,
                approx_small_a: mean_activation_small_a(n, a),
                mc_mean: mc.mean,
                mc_stderr: mc.std_error,
            });
        }
    }
    Ok(rows)
}

pub fn write_noise_csv<W: Write>(rows: &[NoiseSweepRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
