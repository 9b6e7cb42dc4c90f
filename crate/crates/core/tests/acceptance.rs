use std::f64::consts::PI;
use std::path::Path;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qneuron::datasets::{generate_2d_dataset, generate_circle_dataset, load_mnist_dir};
use qneuron::encoding::{build_input_circuit, hadamard_count, phase_fragment_count, reduce_global_phase};
use qneuron::experiments::{
    self, learn_single_target, mnist_fixed_weight, mnist_pooled_learn, random_image_experiment, run_classify,
    single_target, ClassifyConfig, FixedWeightConfig, PooledConfig, WeightChoice,
};
use qneuron::learning::{train_classifier, SpsaConfig};
use qneuron::noise::{
    mean_activation_general, mean_activation_identical, mean_activation_small_a, monte_carlo_noisy_activation,
    NoiseConfig,
};
use qneuron::sim::sample_bernoulli;
use qneuron::{activation_closed_form, activation_sampled, activation_statevector, PhaseVector};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_phases(rng: &mut ChaCha8Rng, len: usize) -> PhaseVector {
    PhaseVector::new((0..len).map(|_| rng.random::<f64>() * 2.0 * PI).collect()).unwrap()
}

fn direct_activation(theta: &[f64], phi: &[f64]) -> f64 {
    let dot: Complex64 = theta
        .iter()
        .zip(phi)
        .map(|(t, p)| Complex64::from_polar(1.0, -p) * Complex64::from_polar(1.0, *t))
        .sum();
    dot.norm_sqr() / (theta.len() * theta.len()) as f64
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst_sv, mut worst_dot) = (0.0f64, 0.0f64);
    for n in 1..=4u32 {
        for _ in 0..50 {
            let len = 1 << n;
            let (theta, phi) = (random_phases(&mut rng, len), random_phases(&mut rng, len));
            let closed = activation_closed_form(&theta, &phi).map_err(|e| e.to_string())?;
            let sv = activation_statevector(&theta, &phi).map_err(|e| e.to_string())?.value;
            let direct = direct_activation(theta.as_slice(), phi.as_slice());
            worst_sv = worst_sv.max((sv - closed).abs());
            worst_dot = worst_dot.max((closed - direct).abs()).max((sv - direct).abs());
        }
    }
    ensure(worst_sv <= 1e-10, || format!("statevector vs closed form {worst_sv:e} > 1e-10"))?;
    ensure(worst_dot <= 1e-12, || format!("vs direct dot product {worst_dot:e} > 1e-12"))?;
    Ok(format!("200 pairs, n=1..4; max |sv - closed| = {worst_sv:.1e}, max |. - dot| = {worst_dot:.1e}"))
}

fn modulus_square_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for case in 0..100 {
        // lengths 2..=64; powers of two also go through the library path
        let len = if case % 2 == 0 { 1 << rng.random_range(1..=6) } else { rng.random_range(2..=64) };
        let alpha: Vec<f64> = (0..len).map(|_| rng.random::<f64>() * 2.0 * PI).collect();
        let direct: f64 = alpha.iter().map(|&a| Complex64::from_polar(1.0, a)).sum::<Complex64>().norm_sqr();
        let mut expansion = len as f64;
        for i in 0..len {
            for j in i + 1..len {
                expansion += 2.0 * (alpha[j] - alpha[i]).cos();
            }
        }
        let n2 = (len * len) as f64;
        worst = worst.max((expansion / n2 - direct / n2).abs());
        if len.is_power_of_two() {
            let theta = PhaseVector::new(alpha.clone()).unwrap();
            let lib = activation_closed_form(&theta, &PhaseVector::new(vec![0.0; len]).unwrap()).unwrap();
            worst = worst.max((lib - direct / n2).abs());
        }
    }
    ensure(worst <= 1e-12, || format!("max deviation {worst:e} > 1e-12"))?;
    Ok(format!("100 arrays, N <= 64; max deviation {worst:.1e}"))
}

fn color_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    // dyadic phases keep theta + c exact, so both evaluations see identical operands
    let dyadic = |rng: &mut ChaCha8Rng| f64::from(rng.random_range(0u32..=1608)) / 1024.0;
    for case in 0..100 {
        let len = 1 << rng.random_range(1..=6);
        let theta: Vec<f64> = (0..len).map(|_| dyadic(&mut rng)).collect();
        let phi = PhaseVector::new((0..len).map(|_| dyadic(&mut rng)).collect()).unwrap();
        let c = dyadic(&mut rng) - 0.75;
        let base = activation_closed_form(&PhaseVector::new(theta.clone()).unwrap(), &phi).unwrap();
        let shifted = PhaseVector::new(theta.iter().map(|t| t + c).collect()).unwrap();
        let moved = activation_closed_form(&shifted, &phi).unwrap();
        ensure(base.to_bits() == moved.to_bits(), || format!("case {case}: {base:e} vs {moved:e}"))?;
    }
    Ok("100 cases bitwise equal".into())
}

const NOISE_SEED: u64 = 0;

fn noise_formulas() -> Outcome {
    let start = Instant::now();
    let mut run = 0u64;
    let mut next_seed = || {
        run += 1;
        NOISE_SEED + run
    };
    let mut worst_sigma = 0.0f64;
    for n in 1..=3u32 {
        let zero = PhaseVector::zeros(n as usize).unwrap();
        for a in [0.1, 0.5, 1.0, 2.0] {
            let cfg = NoiseConfig { a, trials: 1_000_000, seed: next_seed() };
            let mc = monte_carlo_noisy_activation(&zero, &zero, &cfg).unwrap();
            let exact = mean_activation_identical(n, a).unwrap();
            let z = (mc.mean - exact).abs() / mc.std_error;
            worst_sigma = worst_sigma.max(z);
            ensure(z <= 3.0, || format!("n={n} a={a}: {:.6} vs {exact:.6} ({z:.2} sigma)", mc.mean))?;
        }
    }
    let mut worst_small = 0.0f64;
    for n in 1..=10u32 {
        for i in 0..=200 {
            let a = f64::from(i) * 0.001;
            worst_small = worst_small.max((mean_activation_small_a(n, a) - mean_activation_identical(n, a).unwrap()).abs());
        }
    }
    ensure(worst_small < 1e-4, || format!("small-a expansion off by {worst_small:e}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_general = 0.0f64;
    for case in 0..10u64 {
        let len = 1 << (1 + case % 3);
        let (theta, phi) = (random_phases(&mut rng, len), random_phases(&mut rng, len));
        let cfg = NoiseConfig { a: 0.4, trials: 1_000_000, seed: next_seed() };
        let mc = monte_carlo_noisy_activation(&theta, &phi, &cfg).unwrap();
        let exact = mean_activation_general(&theta, &phi, 0.4).unwrap();
        let z = (mc.mean - exact).abs() / mc.std_error;
        worst_general = worst_general.max(z);
        ensure(z <= 3.0, || format!("general case {case}: {:.6} vs {exact:.6} ({z:.2} sigma)", mc.mean))?;
    }
    Ok(format!(
        "identical worst {worst_sigma:.2} sigma, small-a max err {worst_small:.1e}, general worst {worst_general:.2} sigma, {:.1}s",
        start.elapsed().as_secs_f64()
    ))
}

fn shot_sampling() -> Outcome {
    let report = random_image_experiment(30, 8192, 7).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for r in &report.rows {
        let z = (r.sampled - r.analytic).abs() / r.sigma;
        worst = worst.max(z);
        ensure(r.within(3.0), || format!("image {}: {} vs {} ({z:.2} sigma)", r.index, r.sampled, r.analytic))?;
    }
    let ranking = report.ranking();
    let top = &report.rows[ranking[0]];
    let bottom = &report.rows[*ranking.last().unwrap()];
    ensure(top.correlation > 0.0, || format!("top image correlation {}", top.correlation))?;
    Ok(format!(
        "30 images at 8192 shots, worst {worst:.2} sigma; rank-1 f={:.3} correlation {:.3}, last f={:.3} correlation {:.3}",
        top.analytic, top.correlation, bottom.analytic, bottom.correlation
    ))
}

fn single_target_learning() -> Outcome {
    let target = single_target();
    let mut worst_cost = 0.0f64;
    let mut worst_f = 1.0f64;
    for seed in 0..5 {
        let cfg = SpsaConfig { seed, ..SpsaConfig::single_target() };
        let r = learn_single_target(&target, None, &cfg).map_err(|e| e.to_string())?;
        worst_cost = worst_cost.max(r.result.best_cost);
        worst_f = worst_f.min(r.final_activation);
        ensure(r.result.best_cost < 0.01, || format!("seed {seed}: cost {}", r.result.best_cost))?;
        ensure(r.final_activation > 0.99, || format!("seed {seed}: f {}", r.final_activation))?;
    }
    Ok(format!(
        "5 seeds x {} iterations; worst cost {worst_cost:.1e}, worst f {worst_f:.5}",
        SpsaConfig::single_target().iterations
    ))
}

fn classification_2d() -> Outcome {
    let band = run_classify(&ClassifyConfig::default()).map_err(|e| e.to_string())?;
    let band_test = band.result.test_metrics.unwrap();
    ensure(band_test.cost == 0.0, || format!("band test cost {}", band_test.cost))?;
    let circles = run_classify(&ClassifyConfig::circles()).map_err(|e| e.to_string())?;
    let circ_test = circles.result.test_metrics.unwrap();
    ensure(circ_test.accuracy >= 0.95, || format!("circles test accuracy {}", circ_test.accuracy))?;
    Ok(format!(
        "band t=0.95 test cost {} ({} test points); circles t=0.95 test accuracy {:.3}, bias {:.3}",
        band_test.cost,
        band.test_len,
        circ_test.accuracy,
        circles.result.final_weights.as_slice()[3]
    ))
}

fn mnist() -> Outcome {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist01");
    let (train, test) = load_mnist_dir(&dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    let start = Instant::now();
    let fixed = mnist_fixed_weight(&train, &test, &FixedWeightConfig::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed().as_secs_f64();
    ensure(fixed.test_len == 2060, || format!("{} test images", fixed.test_len))?;
    ensure(fixed.metrics.threshold == 0.85, || "threshold".into())?;
    ensure(fixed.metrics.accuracy >= 0.95, || format!("fixed-weight accuracy {}", fixed.metrics.accuracy))?;
    ensure(elapsed < 60.0, || format!("fixed-weight run took {elapsed:.1}s"))?;
    let diag = fixed.matrix.iter().enumerate().all(|(i, row)| row[i] == 1.0);
    ensure(diag, || "pairwise matrix diagonal is not 1".into())?;
    let first = mnist_fixed_weight(
        &train,
        &test,
        &FixedWeightConfig { weight: WeightChoice::First, matrix_per_class: 0, ..Default::default() },
    )
    .map_err(|e| e.to_string())?;
    let pooled = mnist_pooled_learn(&train, &test, &PooledConfig::default()).map_err(|e| e.to_string())?;
    let pooled_acc = pooled.test_metrics.unwrap().accuracy;
    ensure(pooled_acc >= 0.75, || format!("pooled accuracy {pooled_acc}"))?;
    Ok(format!(
        "fixed weight (train index {}) accuracy {:.4} cost {:.4} on 2060 images in {elapsed:.2}s (first one: {:.4}); pooled 4x4 accuracy {pooled_acc:.4}",
        fixed.weight_index, fixed.metrics.accuracy, fixed.metrics.cost, first.metrics.accuracy
    ))
}

fn gate_counts() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for n in 1..=8usize {
        for _ in 0..10 {
            let theta = PhaseVector::new((0..1 << n).map(|_| 0.01 + rng.random::<f64>() * 3.0).collect()).unwrap();
            let circ = build_input_circuit(&theta);
            ensure(hadamard_count(&circ) == n, || format!("n={n}: {} Hadamards", hadamard_count(&circ)))?;
            ensure(phase_fragment_count(&circ) == 1 << n, || {
                format!("n={n}: {} fragments", phase_fragment_count(&circ))
            })?;
            let reduced = build_input_circuit(&reduce_global_phase(&theta));
            ensure(phase_fragment_count(&reduced) < 1 << n, || {
                format!("n={n}: {} reduced fragments", phase_fragment_count(&reduced))
            })?;
        }
    }
    Ok("n=1..8: n Hadamards, 2^n fragments, at most 2^n - 1 after reduction".into())
}

fn determinism() -> Outcome {
    fn twice<T: serde::Serialize>(what: &str, f: impl Fn() -> T) -> Result<(), String> {
        let a = serde_json::to_vec(&f()).unwrap();
        let b = serde_json::to_vec(&f()).unwrap();
        ensure(a == b, || format!("{what} differs between runs"))
    }
    let theta = single_target();
    let phi = experiments::checkerboard_weight();
    twice("bernoulli sampling", || sample_bernoulli(0.3, 10_000, 5).unwrap())?;
    twice("sampled activation", || activation_sampled(&theta, &phi, 8192, 11).unwrap())?;
    twice("random images", || random_image_experiment(30, 8192, 7).unwrap())?;
    twice("single-target SPSA", || learn_single_target(&theta, None, &SpsaConfig::single_target()).unwrap())?;
    twice("classifier SPSA", || {
        let d = generate_2d_dataset(60, 1).unwrap();
        let (tr, te) = d.split_at(30);
        let cfg = SpsaConfig { iterations: 50, restarts: 2, batch_size: Some(10), ..SpsaConfig::default() };
        train_classifier(&tr, Some(&te), &cfg, 0.95).unwrap()
    })?;
    twice("generators", || {
        let mut buf = Vec::new();
        generate_2d_dataset(100, 3).unwrap().write_csv(&mut buf).unwrap();
        generate_circle_dataset(100, 3).unwrap().write_csv(&mut buf).unwrap();
        buf
    })?;
    twice("monte carlo", || {
        let cfg = NoiseConfig { a: 0.7, trials: 100_000, seed: 8 };
        monte_carlo_noisy_activation(&theta, &phi, &cfg).unwrap()
    })?;
    ensure(
        activation_sampled(&theta, &phi, 8192, 11).unwrap() != activation_sampled(&theta, &phi, 8192, 12).unwrap(),
        || "seed has no effect".into(),
    )?;
    Ok("sampling, SPSA, generators and Monte Carlo reproduce byte for byte".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("oracle equivalence", oracle_equivalence),
        ("modulus-square identity", modulus_square_identity),
        ("color invariance", color_invariance),
        ("noise formulas", noise_formulas),
        ("shot sampling", shot_sampling),
        ("single-target learning", single_target_learning),
        ("2D classification", classification_2d),
        ("MNIST", mnist),
        ("gate counts", gate_counts),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
