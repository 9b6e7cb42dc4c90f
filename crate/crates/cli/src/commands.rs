use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use qneuron::datasets::{load_mnist_dir, BandParams, CircleParams, DatasetManifest, Encoding};
use qneuron::experiments::{
    self, checkerboard_weight, ClassifyConfig, DatasetSpec, FixedWeightConfig, PooledConfig, WeightChoice,
};
use qneuron::neuron::Evaluator;
use qneuron::{activation_closed_form, GrayscaleImage, Method, PhaseVector, SpsaConfig};

use crate::error::{CliError, CliResult};
use crate::output::{load_config, Checks, OutDir};
use crate::{
    ActivateArgs, ClassifyArgs, Cli, Command, DatasetArg, EncodingArg, LearnSingleArgs, MethodArg, MnistArgs, MnistMode,
    NoiseSweepArgs, SpsaArgs, WeightArg,
};

pub fn run(cli: &Cli) -> CliResult<()> {
    let out = OutDir::create(&cli.out_dir)?;
    let config = cli.config.as_deref();
    match &cli.command {
        Command::Activate(a) => activate(a, config, cli.check, &out),
        Command::LearnSingle(a) => learn_single(a, config, cli.check, &out),
        Command::Classify(a) => classify(a, config, cli.check, &out),
        Command::Mnist(a) => mnist(a, config, cli.check, &out),
        Command::NoiseSweep(a) => noise_sweep(a, config, cli.check, &out),
    }
}

fn set<T>(slot: &mut T, flag: &Option<T>)
where
    T: Clone,
{
    if let Some(v) = flag {
        slot.clone_from(v);
    }
}

impl SpsaArgs {
    fn apply(&self, cfg: &mut SpsaConfig) {
        set(&mut cfg.iterations, &self.iterations);
        set(&mut cfg.seed, &self.seed);
        set(&mut cfg.a0, &self.a0);
        set(&mut cfg.c0, &self.c0);
        set(&mut cfg.restarts, &self.restarts);
        if self.batch_size.is_some() {
            cfg.batch_size = self.batch_size;
        }
    }
}

fn finish(checks: Option<Checks>) -> CliResult<()> {
    checks.map_or(Ok(()), Checks::finish)
}

fn phases(v: &[f64]) -> CliResult<PhaseVector> {
    Ok(PhaseVector::new(v.to_vec())?)
}

fn load_image(path: &Path) -> CliResult<PhaseVector> {
    let img = image::open(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?
        .to_luma8();
    let (w, h) = img.dimensions();
    let gray = GrayscaleImage::new(w as usize, h as usize, img.into_raw())?;
    Ok(qneuron::encoding::normalize_grayscale(&gray)?)
}

// ------------------------------------------------------------ activate

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ActivateConfig {
    input: Option<Vec<f64>>,
    weight: Option<Vec<f64>>,
    input_image: Option<PathBuf>,
    weight_image: Option<PathBuf>,
    method: Method,
    shots: u64,
    seed: u64,
    random: Option<usize>,
}

impl Default for ActivateConfig {
    fn default() -> Self {
        Self {
            input: None,
            weight: None,
            input_image: None,
            weight_image: None,
            method: Method::ClosedForm,
            shots: 8192,
            seed: 0,
            random: None,
        }
    }
}

#[derive(Serialize)]
struct ActivateOutcome {
    value: f64,
    method: Method,
    closed_form: f64,
    shots: Option<u64>,
    seed: Option<u64>,
}

#[derive(Serialize)]
struct RandomOutcome {
    rows: usize,
    within_3sigma: usize,
    ranking: Vec<usize>,
    top_correlation: f64,
    bottom_correlation: f64,
}

fn resolve_phases(list: &Option<Vec<f64>>, image: &Option<PathBuf>, what: &str) -> CliResult<Option<PhaseVector>> {
    match (list, image) {
        (Some(_), Some(_)) => Err(CliError::Usage(format!("give either --{what} or --{what}-image"))),
        (Some(v), None) => phases(v).map(Some),
        (None, Some(p)) => load_image(p).map(Some),
        (None, None) => Ok(None),
    }
}

fn activate(args: &ActivateArgs, config: Option<&Path>, check: bool, out: &OutDir) -> CliResult<()> {
    let mut cfg: ActivateConfig = load_config(config)?;
    set(&mut cfg.input, &args.input.clone().map(Some));
    set(&mut cfg.weight, &args.weight.clone().map(Some));
    set(&mut cfg.input_image, &args.input_image.clone().map(Some));
    set(&mut cfg.weight_image, &args.weight_image.clone().map(Some));
    if let Some(m) = args.method {
        cfg.method = match m {
            MethodArg::ClosedForm => Method::ClosedForm,
            MethodArg::Statevector => Method::Statevector,
            MethodArg::Sampled => Method::Sampled,
        };
    }
    set(&mut cfg.shots, &args.shots);
    set(&mut cfg.seed, &args.seed);
    set(&mut cfg.random, &args.random.map(Some));

    let weight = resolve_phases(&cfg.weight, &cfg.weight_image, "weight")?;
    let input = resolve_phases(&cfg.input, &cfg.input_image, "input")?;

    if let Some(m) = cfg.random {
        let weight = weight.unwrap_or_else(checkerboard_weight);
        let report = experiments::random_image_experiment_with(m, cfg.shots, cfg.seed, &weight)?;
        let ranking = report.ranking();
        let outcome = RandomOutcome {
            rows: report.rows.len(),
            within_3sigma: report.rows.iter().filter(|r| r.within(3.0)).count(),
            top_correlation: report.rows[ranking[0]].correlation,
            bottom_correlation: report.rows[*ranking.last().expect("nonempty")].correlation,
            ranking,
        };
        let checks = check.then(|| {
            let mut c = Checks::default();
            c.require(
                "sampled-within-3-sigma",
                outcome.within_3sigma == outcome.rows,
                format!("{}/{} rows", outcome.within_3sigma, outcome.rows),
            );
            c.require(
                "top-image-matches-weight",
                outcome.top_correlation > 0.0,
                format!("correlation {:.3}", outcome.top_correlation),
            );
            c
        });
        out.write_with("random_images.csv", |w| report.write_csv(w))?;
        out.write_record("activate.json", "activate", &cfg, &outcome, checks.as_ref())?;
        println!(
            "{} images, {} within 3 sigma, top correlation {:.3}",
            outcome.rows, outcome.within_3sigma, outcome.top_correlation
        );
        return finish(checks);
    }

    let (Some(input), Some(weight)) = (input, weight) else {
        return Err(CliError::Usage("activate needs an input and a weight (or --random)".into()));
    };
    let evaluator = match cfg.method {
        Method::ClosedForm => Evaluator::ClosedForm,
        Method::Statevector => Evaluator::Statevector,
        Method::Sampled => Evaluator::Sampled {
            shots: cfg.shots,
            seed: cfg.seed,
        },
    };
    let res = evaluator.evaluate(&input, &weight)?;
    let closed = activation_closed_form(&input, &weight)?;
    let outcome = ActivateOutcome {
        value: res.value,
        method: res.method,
        closed_form: closed,
        shots: res.shots,
        seed: res.seed,
    };
    let checks = check.then(|| {
        let mut c = Checks::default();
        let (tol, what) = match cfg.method {
            Method::Sampled => (3.0 * (closed * (1.0 - closed) / cfg.shots as f64).sqrt(), "3 sigma"),
            _ => (1e-10, "1e-10"),
        };
        c.require(
            "agrees-with-closed-form",
            (res.value - closed).abs() <= tol,
            format!("|{} - {}| within {what}", res.value, closed),
        );
        c
    });
    out.write_record("activate.json", "activate", &cfg, &outcome, checks.as_ref())?;
    println!("{}", res.value);
    finish(checks)
}

// ------------------------------------------------------------ learn-single

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct LearnSingleConfig {
    target: Vec<f64>,
    init: Option<Vec<f64>>,
    spsa: SpsaConfig,
}

impl Default for LearnSingleConfig {
    fn default() -> Self {
        Self {
            target: experiments::single_target().into_vec(),
            init: None,
            spsa: SpsaConfig::single_target(),
        }
    }
}

fn learn_single(args: &LearnSingleArgs, config: Option<&Path>, check: bool, out: &OutDir) -> CliResult<()> {
    let mut cfg: LearnSingleConfig = load_config(config)?;
    set(&mut cfg.target, &args.target);
    set(&mut cfg.init, &args.init.clone().map(Some));
    args.spsa.apply(&mut cfg.spsa);
    let target = phases(&cfg.target)?;
    let init = cfg.init.as_deref().map(phases).transpose()?;
    let report = experiments::learn_single_target(&target, init.as_ref(), &cfg.spsa)?;
    let checks = check.then(|| {
        let mut c = Checks::default();
        c.require("final-cost", report.result.best_cost < 0.01, format!("{:e} < 0.01", report.result.best_cost));
        c.require(
            "final-activation",
            report.final_activation > 0.99,
            format!("{} > 0.99", report.final_activation),
        );
        c
    });
    out.write_with("cost_trace.csv", |w| report.result.write_trace_csv(w))?;
    out.write_record("learn_single.json", "learn-single", &cfg, &report, checks.as_ref())?;
    println!(
        "best cost {:e}, f = {:.6}, weights {:?}",
        report.result.best_cost,
        report.final_activation,
        report.result.final_weights.as_slice()
    );
    finish(checks)
}

// ------------------------------------------------------------ classify

#[derive(Serialize)]
struct ClassifyOutcome<'a> {
    train_len: usize,
    test_len: usize,
    grid_rows: usize,
    final_weights: &'a PhaseVector,
    best_cost: f64,
    train_metrics: Option<qneuron::learning::Metrics>,
    test_metrics: Option<qneuron::learning::Metrics>,
}

fn classify(args: &ClassifyArgs, config: Option<&Path>, check: bool, out: &OutDir) -> CliResult<()> {
    let mut cfg: ClassifyConfig = load_config(config)?;
    let encoding = args.encoding.map(|e| match e {
        EncodingArg::Direct2d => Encoding::Direct2d,
        EncodingArg::Bias4d => Encoding::Bias4d,
    });
    match args.dataset {
        Some(DatasetArg::Band2d) => {
            cfg.dataset = DatasetSpec::Band2d {
                params: BandParams::default(),
            }
        }
        Some(DatasetArg::Circles) => {
            cfg.dataset = DatasetSpec::Circles {
                params: CircleParams::default(),
            }
        }
        Some(DatasetArg::File) => {
            let path = args
                .data_file
                .clone()
                .ok_or_else(|| CliError::Usage("--dataset file needs --data-file".into()))?;
            cfg.dataset = DatasetSpec::File {
                path,
                encoding: encoding.unwrap_or(Encoding::Direct2d),
            };
        }
        None => {}
    }
    if let DatasetSpec::File { path, encoding: enc } = &mut cfg.dataset {
        set(path, &args.data_file);
        set(enc, &encoding);
    } else if args.data_file.is_some() || encoding.is_some() {
        return Err(CliError::Usage("--data-file and --encoding apply to --dataset file".into()));
    }
    set(&mut cfg.m, &args.m);
    set(&mut cfg.train_len, &args.train_len);
    set(&mut cfg.data_seed, &args.data_seed);
    set(&mut cfg.threshold, &args.threshold);
    set(&mut cfg.resolution, &args.resolution);
    args.spsa.apply(&mut cfg.spsa);

    if !matches!(cfg.dataset, DatasetSpec::File { .. }) {
        let data = cfg.dataset.load(cfg.m, cfg.data_seed)?;
        let params = match &cfg.dataset {
            DatasetSpec::Band2d { params } => serde_json::to_value(params),
            DatasetSpec::Circles { params } => serde_json::to_value(params),
            DatasetSpec::File { .. } => unreachable!(),
        }
        .map_err(|e| CliError::Data(e.to_string()))?;
        let manifest = DatasetManifest::new(cfg.dataset.name(), params, cfg.m, cfg.data_seed)?;
        out.write_with("dataset.csv", |w| data.write_csv(w))?;
        out.write_with("dataset_manifest.json", |w| {
            serde_json::to_writer_pretty(&mut *w, &manifest)?;
            Ok(())
        })?;
    }
    let report = experiments::run_classify(&cfg)?;
    let outcome = ClassifyOutcome {
        train_len: report.train_len,
        test_len: report.test_len,
        grid_rows: report.grid.len(),
        final_weights: &report.result.final_weights,
        best_cost: report.result.best_cost,
        train_metrics: report.result.train_metrics,
        test_metrics: report.result.test_metrics,
    };
    let test = report.result.test_metrics.expect("test set supplied");
    let checks = check.then(|| {
        let mut c = Checks::default();
        match cfg.dataset {
            DatasetSpec::Band2d { .. } => c.require("test-cost-zero", test.cost == 0.0, format!("test cost {}", test.cost)),
            DatasetSpec::Circles { .. } => c.require(
                "test-accuracy",
                test.accuracy >= 0.95,
                format!("{} >= 0.95", test.accuracy),
            ),
            DatasetSpec::File { .. } => {}
        }
        c.require(
            "grid-rows",
            report.grid.len() == cfg.resolution * cfg.resolution,
            format!("{} rows", report.grid.len()),
        );
        c
    });
    out.write_with("cost_trace.csv", |w| report.result.write_trace_csv(w))?;
    out.write_with("decision_grid.csv", |w| experiments::write_grid_csv(&report.grid, w))?;
    out.write_record("classify.json", "classify", &cfg, &outcome, checks.as_ref())?;
    println!(
        "train accuracy {:.4}, test accuracy {:.4}, test cost {}",
        report.result.train_metrics.map_or(f64::NAN, |m| m.accuracy),
        test.accuracy,
        test.cost
    );
    finish(checks)
}

// ------------------------------------------------------------ mnist

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct MnistConfig {
    mode: MnistMode,
    data_dir: PathBuf,
    fixed: FixedWeightConfig,
    pooled: PooledConfig,
}

impl Default for MnistConfig {
    fn default() -> Self {
        Self {
            mode: MnistMode::FixedWeight,
            data_dir: PathBuf::from("data/mnist01"),
            fixed: FixedWeightConfig::default(),
            pooled: PooledConfig::default(),
        }
    }
}

#[derive(Serialize)]
struct FixedOutcome<'a> {
    weight_index: usize,
    test_len: usize,
    metrics: qneuron::learning::Metrics,
    matrix_indices: &'a [usize],
    matrix_diagonal_ones: bool,
}

#[derive(Serialize)]
struct PooledOutcome<'a> {
    final_weights: &'a PhaseVector,
    best_cost: f64,
    train_metrics: Option<qneuron::learning::Metrics>,
    test_metrics: Option<qneuron::learning::Metrics>,
}

fn mnist(args: &MnistArgs, config: Option<&Path>, check: bool, out: &OutDir) -> CliResult<()> {
    let mut cfg: MnistConfig = load_config(config)?;
    set(&mut cfg.mode, &args.mode);
    set(&mut cfg.data_dir, &args.data_dir);
    set(&mut cfg.fixed.threshold, &args.threshold);
    set(&mut cfg.pooled.threshold, &args.threshold);
    match (args.weight, args.weight_index) {
        (Some(WeightArg::First), _) => cfg.fixed.weight = WeightChoice::First,
        (Some(WeightArg::Medoid), _) => cfg.fixed.weight = WeightChoice::Medoid,
        (None, Some(i)) => cfg.fixed.weight = WeightChoice::Index(i),
        (None, None) => {}
    }
    if args.test_limit.is_some() {
        cfg.fixed.test_limit = args.test_limit;
        cfg.pooled.test_limit = args.test_limit;
    }
    if args.train_limit.is_some() {
        cfg.pooled.train_limit = args.train_limit;
    }
    set(&mut cfg.fixed.matrix_per_class, &args.matrix_per_class);
    set(&mut cfg.pooled.side, &args.side);
    args.spsa.apply(&mut cfg.pooled.spsa);

    let (train, test) = load_mnist_dir(&cfg.data_dir)?;
    match cfg.mode {
        MnistMode::FixedWeight => {
            let report = experiments::mnist_fixed_weight(&train, &test, &cfg.fixed)?;
            let diag = report.matrix.iter().enumerate().all(|(i, row)| row[i] == 1.0);
            let outcome = FixedOutcome {
                weight_index: report.weight_index,
                test_len: report.test_len,
                metrics: report.metrics,
                matrix_indices: &report.matrix_indices,
                matrix_diagonal_ones: diag,
            };
            let checks = check.then(|| {
                let mut c = Checks::default();
                c.require(
                    "test-accuracy",
                    report.metrics.accuracy >= 0.95,
                    format!("{} >= 0.95", report.metrics.accuracy),
                );
                c.require("matrix-diagonal", diag, "all diagonal entries equal 1");
                c
            });
            out.write_with("pairwise_matrix.csv", |w| {
                experiments::write_matrix_csv(&report.matrix_labels, &report.matrix, w)
            })?;
            out.write_record("mnist_fixed.json", "mnist", &cfg, &outcome, checks.as_ref())?;
            println!(
                "weight index {}, {} test images, accuracy {:.4}, cost {:.4}",
                report.weight_index, report.test_len, report.metrics.accuracy, report.metrics.cost
            );
            finish(checks)
        }
        MnistMode::PooledLearn => {
            let result = experiments::mnist_pooled_learn(&train, &test, &cfg.pooled)?;
            let test_metrics = result.test_metrics.expect("test set supplied");
            let outcome = PooledOutcome {
                final_weights: &result.final_weights,
                best_cost: result.best_cost,
                train_metrics: result.train_metrics,
                test_metrics: result.test_metrics,
            };
            let checks = check.then(|| {
                let mut c = Checks::default();
                c.require(
                    "test-accuracy",
                    test_metrics.accuracy >= 0.75,
                    format!("{} >= 0.75", test_metrics.accuracy),
                );
                c
            });
            out.write_with("cost_trace.csv", |w| result.write_trace_csv(w))?;
            out.write_record("mnist_pooled.json", "mnist", &cfg, &outcome, checks.as_ref())?;
            println!("test accuracy {:.4}, cost {:.4}", test_metrics.accuracy, test_metrics.cost);
            finish(checks)
        }
    }
}

// ------------------------------------------------------------ noise-sweep

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct NoiseSweepConfig {
    n: Vec<u32>,
    a: Vec<f64>,
    trials: u64,
    seed: u64,
}

impl Default for NoiseSweepConfig {
    fn default() -> Self {
        Self {
            n: vec![1, 2, 3],
            a: vec![0.0, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, std::f64::consts::PI],
            trials: 100_000,
            seed: 0,
        }
    }
}

fn noise_sweep(args: &NoiseSweepArgs, config: Option<&Path>, check: bool, out: &OutDir) -> CliResult<()> {
    let mut cfg: NoiseSweepConfig = load_config(config)?;
    set(&mut cfg.n, &args.n);
    set(&mut cfg.a, &args.a);
    set(&mut cfg.trials, &args.trials);
    set(&mut cfg.seed, &args.seed);
    let rows = experiments::noise_sweep(&cfg.n, &cfg.a, cfg.trials, cfg.seed)?;
    let checks = check.then(|| {
        let mut c = Checks::default();
        for r in &rows {
            let tag = format!("n={} a={}", r.n, r.a);
            let tol = (3.0 * r.mc_stderr).max(1e-12);
            c.require(
                &format!("monte-carlo {tag}"),
                (r.mc_mean - r.exact).abs() <= tol,
                format!("|{} - {}| <= {tol:e}", r.mc_mean, r.exact),
            );
            if r.a <= 0.2 {
                c.require(
                    &format!("small-a {tag}"),
                    (r.approx_small_a - r.exact).abs() < 1e-4,
                    format!("|{} - {}| < 1e-4", r.approx_small_a, r.exact),
                );
            }
            if r.a == 0.0 {
                c.require(&format!("no-noise {tag}"), r.exact == 1.0, format!("{}", r.exact));
            }
        }
        c
    });
    out.write_with("noise_sweep.csv", |w| experiments::write_noise_csv(&rows, w))?;
    out.write_record("noise_sweep.json", "noise-sweep", &cfg, &rows, checks.as_ref())?;
    for r in &rows {
        println!(
            "n={} a={:.4} exact={:.6} approx={:.6} mc={:.6}+-{:.1e}",
            r.n, r.a, r.exact, r.approx_small_a, r.mc_mean, r.mc_stderr
        );
    }
    finish(checks)
}
