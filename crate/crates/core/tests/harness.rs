mod common;

use qecbench_core::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn params(p1: f64, p_prep: f64, p_meas: f64) -> QubitNoiseParams {
    QubitNoiseParams {
        p1,
        t1: 100e-6,
        t2: 100e-6,
        p_prep,
        p_meas,
    }
}

fn only(n: usize, p: QubitNoiseParams, enabled: ChannelToggles) -> NoiseModel {
    NoiseModel::with_options(vec![p; n], 100e-9, 0.0, enabled).unwrap()
}

fn depol_only(p1: f64) -> NoiseModel {
    let enabled = ChannelToggles {
        depolarization: true,
        ..ChannelToggles::NONE
    };
    only(5, params(p1, 0.0, 0.0), enabled)
}

fn three_qubit(noise: NoiseModel, samples: u64, max_iterations: u64) -> Experiment {
    let mut cfg = ExperimentConfig::new(CodeId::ThreeQubit, noise);
    cfg.n_samples = samples;
    cfg.max_iterations = max_iterations;
    cfg.master_seed = 17;
    cfg.bootstrap_resamples = 50;
    Experiment::new(cfg).unwrap()
}

fn synthetic(p: f64, shots: u64, max_iterations: u64, seed: u64) -> FailureHistogram {
    let geo = Geometric::new(p).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut h = FailureHistogram::new(max_iterations);
    for shot_index in 0..shots {
        let k = geo.sample(&mut rng);
        let censored = k >= max_iterations;
        h.record(&FailureSample {
            shot_index,
            iterations_survived: k.min(max_iterations),
            censored,
        });
    }
    h
}

fn gof_p_value(h: &FailureHistogram, p: f64) -> f64 {
    let g = geometric_goodness_of_fit(h, p).unwrap();
    1.0 - ChiSquared::new(g.degrees_of_freedom as f64)
        .unwrap()
        .cdf(g.statistic)
}

#[test]
fn noiseless_shots_are_censored() {
    let e = three_qubit(NoiseModel::noiseless(5), 100, 20);
    let h = e.sample_failure_distribution().unwrap();
    assert_eq!(h.n_censored, 100);
    assert_eq!(h.n_samples, 100);
    assert!(h.counts.is_empty());
    assert!(e.estimate(&h).is_none());
}

/// With every measurement flipped, the first syndrome reads (1,1) and
/// flips qubit 0; the readout of |100> is then flipped to 011, which the
/// majority decodes as 1. Every shot fails on its first readout.
#[test]
fn certain_measurement_flips_fail_first_cycle() {
    let spam = ChannelToggles {
        spam: true,
        ..ChannelToggles::NONE
    };
    let e = three_qubit(only(5, params(0.0, 0.0, 1.0), spam), 20, 10);
    let h = e.sample_failure_distribution().unwrap();
    assert_eq!(h.counts.get(&0), Some(&20));
    let est = e.estimate(&h).unwrap();
    assert_eq!(est.per_cycle_failure_prob, 1.0);
    assert!(est.t1_logical > 0.0 && est.t1_logical.is_finite());
}

#[test]
fn shots_are_reproducible_and_order_free() {
    let e = three_qubit(
        NoiseModel::uniform(5, params(0.02, 0.01, 0.01), 100e-9).unwrap(),
        60,
        50,
    );
    assert_eq!(
        e.run_until_failure(7).unwrap(),
        e.run_until_failure(7).unwrap()
    );
    let whole = e.sample_failure_distribution().unwrap();
    let mut parts = e.sample_range(40..60).unwrap();
    parts.merge(&e.sample_range(0..17).unwrap());
    parts.merge(&e.sample_range(17..40).unwrap());
    assert_eq!(whole, parts);
    assert_eq!(whole.n_failures() + whole.n_censored, whole.n_samples);
    assert!(whole.n_failures() > 0);
}

#[test]
fn cycle_time_base() {
    let g = ConnectivityGraph::all_to_all(5).unwrap();
    let d = cycle_duration_of(CodeId::ThreeQubit, &g, &depol_only(0.0)).unwrap();
    assert!((d - 400e-9).abs() < 1e-20);
    assert_eq!(
        cycle_duration_of(CodeId::ThreeQubit, &g, &NoiseModel::noiseless(5)).unwrap(),
        0.0
    );
}

#[test]
fn synthetic_geometric_recovers_t1() {
    let h = synthetic(0.1, 100_000, 1_000_000, 1);
    let est = estimate_logical_t1(&h, 1e-6).unwrap();
    let want = -1e-6 / 0.9f64.ln();
    assert!((want - 9.491e-6).abs() < 1e-9);
    assert!((est.t1_logical - want).abs() / want < 0.02);
    assert!(gof_p_value(&h, est.per_cycle_failure_prob) > 0.01);
}

/// Right-censoring at a short horizon leaves the estimate unbiased
/// enough; dropping censored shots would not.
#[test]
fn censored_mle_stays_on_target() {
    let h = synthetic(0.05, 20_000, 15, 2);
    assert!(h.n_censored > 5_000);
    let est = estimate_logical_t1(&h, 1.0).unwrap();
    assert!((est.per_cycle_failure_prob - 0.05).abs() < 0.003);
    let naive =
        h.n_failures() as f64 / h.counts.iter().map(|(&k, &c)| (k + 1) * c).sum::<u64>() as f64;
    assert!(naive > 0.1);
}

#[test]
fn chi_square_rejects_non_geometric_data() {
    let mut h = synthetic(0.1, 10_000, 1_000, 3);
    // pile extra failures onto iteration 4
    *h.counts.get_mut(&4).unwrap() += 400;
    h.n_samples += 400;
    let p = estimate_logical_t1(&h, 1.0).unwrap().per_cycle_failure_prob;
    assert!(gof_p_value(&h, p) < 0.01);
}

#[test]
fn bootstrap_spreads_around_estimate() {
    let h = synthetic(0.2, 2_000, 100, 4);
    let est = estimate_logical_t1(&h, 1.0).unwrap();
    let boot = bootstrap_t1(&h, 1.0, 400, &mut ChaCha8Rng::seed_from_u64(0));
    assert_eq!(boot.len(), 400);
    let mean = boot.iter().sum::<f64>() / boot.len() as f64;
    let sd = (boot.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / boot.len() as f64).sqrt();
    assert!((mean - est.t1_logical).abs() < 0.1 * sd.max(1e-3) + 0.02 * est.t1_logical);
    assert!(sd > 0.0);
}

/// Three-sigma agreement with the branch-enumeration oracle on the first
/// cycle, where every shot starts from the same encoded state.
#[test]
fn first_cycle_failure_matches_branch_enumeration() {
    let p1 = 0.1;
    let shots = 4_000;
    let exact = common::three_qubit_first_cycle_failure(p1);
    let e = three_qubit(depol_only(p1), shots, 1);
    let h = e.sample_failure_distribution().unwrap();
    let observed = h.n_failures() as f64 / shots as f64;
    let sigma = (exact * (1.0 - exact) / shots as f64).sqrt();
    assert!(
        (observed - exact).abs() <= 3.0 * sigma,
        "{observed} vs {exact} ± {sigma}"
    );
}

/// Restricted mean survival over 100 cycles does not rise with p1.
#[test]
fn survival_falls_with_depolarization() {
    let mut last = f64::INFINITY;
    for p1 in [0.001, 0.01, 0.05, 0.1] {
        let h = three_qubit(depol_only(p1), 1_000, 100)
            .sample_failure_distribution()
            .unwrap();
        let mean = h.total_trials() as f64 / h.n_samples as f64;
        assert!(mean <= last + 2.0, "p1 = {p1}: {mean} after {last}");
        last = mean;
    }
}
