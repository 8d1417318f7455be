use noisy_euler::math::Mat2;
use noisy_euler::noise::{NoiseParams, SimulationPath};
use noisy_euler::rb::*;
use noisy_euler::rng::{stream_rng, Stream};
use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn chi_square_p(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    let expected = n as f64 / counts.len() as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    1.0 - ChiSquared::new((counts.len() - 1) as f64).unwrap().cdf(stat)
}

#[test]
fn rotation_axis_and_angle_are_uniform() {
    let mut rng = stream_rng(1, Stream::Circuit, 0);
    let bins = 20;
    let (mut z, mut angle) = (vec![0u64; bins], vec![0u64; bins]);
    for _ in 0..100_000 {
        let r = sample_random_rotation(&mut rng);
        let norm: f64 = r.axis.iter().map(|a| a * a).sum();
        assert!((norm - 1.0).abs() < 1e-12);
        z[(((r.axis[2] + 1.0) / 2.0 * bins as f64) as usize).min(bins - 1)] += 1;
        angle[((r.angle / std::f64::consts::TAU * bins as f64) as usize).min(bins - 1)] += 1;
    }
    assert!(chi_square_p(&z) > 1e-3, "z counts {z:?}");
    assert!(chi_square_p(&angle) > 1e-3, "angle counts {angle:?}");
}

#[test]
fn inverse_undoes_the_prefix() {
    let seq = RandomGateSequence::generate(5, 2, 50);
    let inv = build_inverse_gate(&seq.gates).unwrap();
    let total = seq.gates.iter().fold(Mat2::IDENTITY, |acc, g| g.unitary() * acc);
    assert!((inv.unitary() * total).distance_up_to_phase(&Mat2::IDENTITY) < 1e-10);
    assert!(build_inverse_gate(&[]).is_err());
}

#[test]
fn sequences_depend_only_on_seed_and_index() {
    let a = RandomGateSequence::generate(3, 1, 40);
    assert_eq!(a, RandomGateSequence::generate(3, 1, 40));
    assert_ne!(a.gates, RandomGateSequence::generate(3, 2, 40).gates);
    assert_eq!(a.gates[..10], RandomGateSequence::generate(3, 1, 10).gates[..]);
}

fn small_config(noise: NoiseParams) -> RbConfig {
    RbConfig { n_circuits: 4, n_gates: 60, depths: vec![1, 10, 20, 40, 60], rng_seed: 17, ..RbConfig::new(noise) }
}

#[test]
fn noiseless_survival_is_one() {
    let res = run_rb_experiment(&small_config(NoiseParams::noiseless())).unwrap();
    for r in &res.records {
        assert!((r.optimized - 1.0).abs() < 1e-10 && (r.unoptimized - 1.0).abs() < 1e-10, "{r:?}");
    }
    assert_eq!(res.fit_unoptimized.unwrap().diagnostic, Some(FitDiagnostic::NoDecay));
}

#[test]
fn runs_are_reproducible() {
    let cfg = RbConfig { shots: Shots::Finite(1000), ..small_config(NoiseParams::symmetric(0.01).unwrap()) };
    assert_eq!(run_rb_experiment(&cfg).unwrap(), run_rb_experiment(&cfg).unwrap());
}

#[test]
fn closed_form_path_gives_the_same_survival() {
    let cfg = small_config(NoiseParams::from_lambdas(0.01, 0.02).unwrap());
    let a = run_rb_experiment(&cfg).unwrap();
    let b = run_rb_experiment(&RbConfig { path: SimulationPath::ClosedForm, ..cfg }).unwrap();
    for (x, y) in a.records.iter().zip(&b.records) {
        assert!((x.optimized - y.optimized).abs() < 1e-10);
        assert!((x.unoptimized - y.unoptimized).abs() < 1e-10);
    }
}

#[test]
fn survival_decays_with_depth() {
    let cfg = RbConfig { n_gates: 120, depths: (1..=120).step_by(7).collect(), ..small_config(NoiseParams::symmetric(0.01).unwrap()) };
    let res = run_rb_experiment(&cfg).unwrap();
    let ys: Vec<f64> = res.depths.iter().map(|d| d.unoptimized_mean).collect();
    let rho = spearman(&ys);
    assert!(rho < -0.9, "Spearman correlation with depth {rho}");
}

/// Rank correlation of `ys` against their index (no ties expected).
fn spearman(ys: &[f64]) -> f64 {
    let n = ys.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| ys[a].total_cmp(&ys[b]));
    let mut rank = vec![0.0; n];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r as f64;
    }
    let d2: f64 = rank.iter().enumerate().map(|(i, r)| (i as f64 - r).powi(2)).sum();
    1.0 - 6.0 * d2 / (n as f64 * ((n * n) as f64 - 1.0))
}

#[test]
fn optimized_arm_wins_at_moderate_noise() {
    let res = run_rb_experiment(&small_config(NoiseParams::symmetric(0.01).unwrap())).unwrap();
    for d in &res.depths[1..] {
        assert!(d.optimized_mean > d.unoptimized_mean, "{d:?}");
    }
    assert!(res.error_rate_reduction().unwrap() > 0.0);
}

#[test]
fn shot_noise_is_unbiased() {
    let shots = 8192;
    let base = RbConfig { n_circuits: 100, n_gates: 10, depths: vec![10], rng_seed: 23, ..RbConfig::new(NoiseParams::symmetric(0.05).unwrap()) };
    let exact = run_rb_experiment(&base).unwrap();
    let sampled = run_rb_experiment(&RbConfig { shots: Shots::Finite(shots), ..base }).unwrap();
    let n = exact.records.len() as f64;
    let bias: f64 = exact.records.iter().zip(&sampled.records).map(|(e, s)| s.unoptimized - e.unoptimized).sum::<f64>() / n;
    let var: f64 = exact.records.iter().map(|e| e.unoptimized * (1.0 - e.unoptimized) / shots as f64).sum::<f64>() / (n * n);
    assert!(bias.abs() < 3.0 * var.sqrt(), "bias {bias:e}, σ {:e}", var.sqrt());
}

#[test]
fn readout_error_and_mitigation() {
    use noisy_euler::calib::ReadoutError;
    let readout = ReadoutError::new(0.03, 0.06).unwrap();
    let base = small_config(NoiseParams::symmetric(0.01).unwrap());
    let exact = run_rb_experiment(&base).unwrap();
    let corrupted = run_rb_experiment(&RbConfig { readout: Some(readout), ..base.clone() }).unwrap();
    let mitigated = run_rb_experiment(&RbConfig { readout: Some(readout), mitigate_readout: true, ..base.clone() }).unwrap();
    for ((e, c), m) in exact.records.iter().zip(&corrupted.records).zip(&mitigated.records) {
        assert!((c.unoptimized - readout.apply(e.unoptimized)).abs() < 1e-12);
        assert!((m.unoptimized - e.unoptimized).abs() < 1e-12);
    }
    assert!(RbConfig { mitigate_readout: true, ..base }.validate().is_err());
}

#[test]
fn noisy_tracking_runs_and_stays_close() {
    let cfg = small_config(NoiseParams::symmetric(0.01).unwrap());
    let a = run_rb_experiment(&cfg).unwrap();
    let b = run_rb_experiment(&RbConfig { tracking: Tracking::Noisy, ..cfg }).unwrap();
    for (x, y) in a.depths.iter().zip(&b.depths) {
        assert_eq!(x.unoptimized_mean, y.unoptimized_mean);
        assert!((x.optimized_mean - y.optimized_mean).abs() < 0.05);
    }
}

#[test]
fn drift_factor_one_is_the_plain_experiment() {
    let cfg = small_config(NoiseParams::from_times(50e-6, 70e-6, 35.6e-9).unwrap());
    let plain = run_rb_experiment(&cfg).unwrap();
    let sweep = run_drift_sweep(&cfg, &[1.0, 10.0]).unwrap();
    assert_eq!(sweep[0].result, plain);
    assert_eq!(sweep[1].k, 10.0);
    assert!(run_drift_sweep(&cfg, &[]).is_err());
    assert!(run_drift_sweep(&cfg, &[-1.0]).is_err());
}

#[test]
fn config_validation() {
    let noise = NoiseParams::symmetric(0.01).unwrap();
    let ok = small_config(noise);
    assert!(ok.validate().is_ok());
    assert!(RbConfig { depths: vec![], ..ok.clone() }.validate().is_err());
    assert!(RbConfig { depths: vec![5, 5], ..ok.clone() }.validate().is_err());
    assert!(RbConfig { depths: vec![61], ..ok.clone() }.validate().is_err());
    assert!(RbConfig { n_circuits: 0, ..ok.clone() }.validate().is_err());
    assert!(RbConfig { drift_factor: 0.0, ..ok }.validate().is_err());
    assert!("0".parse::<Shots>().is_err());
    assert_eq!(default_drift_grid().len(), 19);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn fit_recovers_decay_rate(a in 1e-4..0.05f64) {
        let xs: Vec<f64> = (1..=246).step_by(7).map(|d| d as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 0.5 * (1.0 + (-a * x).exp())).collect();
        let fit = fit_decay(&xs, &ys).unwrap();
        prop_assert!((fit.a - a).abs() < 1e-9 * a.max(1e-3));
        prop_assert!((fit.error_rate - 0.5 * (1.0 - (-a).exp())).abs() < 1e-9);
    }
}
