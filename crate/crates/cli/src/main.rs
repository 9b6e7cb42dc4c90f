mod commands;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "qneuron", version, about = "Phase-encoded quantum perceptron experiments")]
struct Cli {
    /// TOML file with the command's configuration; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Evaluate the command's built-in assertions; exit 4 if any fails.
    #[arg(long, global = true)]
    check: bool,
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Activation of one input/weight pair, or the random-image experiment.
    Activate(ActivateArgs),
    /// Learn weights recognizing a single target vector.
    LearnSingle(LearnSingleArgs),
    /// Train and test a 2D classifier.
    Classify(ClassifyArgs),
    /// Zeros-vs-ones MNIST experiments.
    Mnist(MnistArgs),
    /// Mean activation under uniform phase noise.
    NoiseSweep(NoiseSweepArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum MethodArg {
    ClosedForm,
    Statevector,
    Sampled,
}

#[derive(Args, Debug)]
struct ActivateArgs {
    /// Comma-separated input phases.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    input: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    weight: Option<Vec<f64>>,
    /// Grayscale PNG/PGM used as input.
    #[arg(long)]
    input_image: Option<PathBuf>,
    #[arg(long)]
    weight_image: Option<PathBuf>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Score this many random 2x2 images against the weight (checkerboard by default).
    #[arg(long)]
    random: Option<usize>,
}

#[derive(Args, Debug, Default)]
struct SpsaArgs {
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    a0: Option<f64>,
    #[arg(long)]
    c0: Option<f64>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
}

#[derive(Args, Debug)]
struct LearnSingleArgs {
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    target: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    init: Option<Vec<f64>>,
    #[command(flatten)]
    spsa: SpsaArgs,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum DatasetArg {
    #[value(name = "2d")]
    Band2d,
    Circles,
    File,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum EncodingArg {
    Direct2d,
    Bias4d,
}

#[derive(Args, Debug)]
struct ClassifyArgs {
    #[arg(long, value_enum)]
    dataset: Option<DatasetArg>,
    /// `x1,x2,label` CSV for `--dataset file`.
    #[arg(long)]
    data_file: Option<PathBuf>,
    #[arg(long, value_enum)]
    encoding: Option<EncodingArg>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    train_len: Option<usize>,
    #[arg(long)]
    data_seed: Option<u64>,
    #[arg(long)]
    threshold: Option<f64>,
    /// Decision-grid points per axis.
    #[arg(long)]
    resolution: Option<usize>,
    #[command(flatten)]
    spsa: SpsaArgs,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
enum MnistMode {
    FixedWeight,
    PooledLearn,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum WeightArg {
    First,
    Medoid,
}

#[derive(Args, Debug)]
struct MnistArgs {
    #[arg(long, value_enum)]
    mode: Option<MnistMode>,
    /// Directory holding the four standard IDX files.
    #[arg(long, env = "QNEURON_MNIST_DIR")]
    data_dir: Option<PathBuf>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long, value_enum, conflicts_with = "weight_index")]
    weight: Option<WeightArg>,
    /// Training-set position of the "one" used as weight.
    #[arg(long)]
    weight_index: Option<usize>,
    #[arg(long)]
    test_limit: Option<usize>,
    #[arg(long)]
    train_limit: Option<usize>,
    #[arg(long)]
    matrix_per_class: Option<usize>,
    /// Pooled image side.
    #[arg(long)]
    side: Option<usize>,
    #[command(flatten)]
    spsa: SpsaArgs,
}

#[derive(Args, Debug)]
struct NoiseSweepArgs {
    /// Qubit counts.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<u32>>,
    /// Noise widths in radians.
    #[arg(long, value_delimiter = ',')]
    a: Option<Vec<f64>>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
