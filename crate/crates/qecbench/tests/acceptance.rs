//! Acceptance criteria 1-9, one PASS/FAIL line each.
//!
//! `cargo test -p qecbench --test acceptance` runs all of them;
//! `cargo test -p qecbench --test acceptance -- 3 7` runs a subset.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use num_complex::Complex64;
use qecbench::config::RunConfig;
use qecbench::{output, parallel, run_and_emit};
use qecbench_core::noise::{
    dephasing_channel, depolarizing_channel, relaxation_channel, spam_channel,
};
use qecbench_core::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    };
}

fn within(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    let s = elapsed.as_secs_f64();
    if s < limit_s {
        Ok(())
    } else {
        Err(format!("took {s:.1} s, limit {limit_s} s"))
    }
}

fn representative(n: usize) -> NoiseModel {
    let p = QubitNoiseParams {
        p1: 1e-3,
        t1: 100e-6,
        t2: 100e-6,
        p_prep: 1e-2,
        p_meas: 1e-2,
    };
    NoiseModel::uniform(n, p, 100e-9).unwrap()
}

fn experiment(
    code: CodeId,
    noise: NoiseModel,
    samples: u64,
    max_iterations: u64,
    seed: u64,
) -> Experiment {
    let mut cfg = ExperimentConfig::new(code, noise);
    cfg.n_samples = samples;
    cfg.max_iterations = max_iterations;
    cfg.master_seed = seed;
    cfg.bootstrap_resamples = 200;
    Experiment::new(cfg).unwrap()
}

// 1

fn completeness(ch: &KrausChannel) -> f64 {
    let ks = local_ops(ch.operators());
    let d = ks[0].nrows();
    let sum = ks
        .iter()
        .fold(M::zeros(d, d), |acc, k| acc + k.adjoint() * k);
    max_entry_diff(&sum, &M::identity(d, d))
}

fn channel_algebra() -> Outcome {
    let start = Instant::now();
    let mut channels = Vec::new();
    for i in 0..=50 {
        let p = i as f64 / 50.0;
        channels.push(depolarizing_channel(p).unwrap());
        channels.push(spam_channel(p).unwrap());
    }
    for tg in [0.0, 1e-9, 100e-9, 1e-6, 1e-5] {
        for tau in [1e-7, 1e-6, 20e-6, 100e-6, 1e-3] {
            channels.push(relaxation_channel(tg, tau).unwrap());
            channels.push(dephasing_channel(tg, tau).unwrap());
        }
    }
    let worst = channels.iter().map(completeness).fold(0.0, f64::max);
    ensure!(worst <= 1e-12, "completeness error {worst:e}");

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut tr, mut herm) = (0.0f64, 0.0f64);
    for i in 0..1000 {
        let n = 1 + i % 3;
        let mut dm = from_matrix(&random_density(n, &mut rng));
        for ch in channels.iter().skip(i % 7).step_by(7) {
            dm.apply_channel(ch, &[i % n]).unwrap();
        }
        tr = tr.max((dm.trace() - c(1.0)).norm());
        herm = herm.max(dm.hermiticity_error());
    }
    ensure!(
        tr <= 1e-10 && herm <= 1e-10,
        "trace error {tr:e}, hermiticity error {herm:e}"
    );
    within(start.elapsed(), 10.0)?;
    Ok(format!("{} channels, completeness {worst:.1e}; 1000 states, trace {tr:.1e}, hermiticity {herm:.1e}", channels.len()))
}

// 2

fn steane_codeword() -> Outcome {
    let start = Instant::now();
    let code = CodeId::Steane;
    let n = code.layout().n_total;
    let noise = NoiseModel::noiseless(n);
    let protocol =
        Protocol::new(code, &ConnectivityGraph::all_to_all(n).unwrap(), 1.0, 0.0).unwrap();
    let mut reg = Register::prepared(&noise).unwrap();
    protocol
        .encode(&mut reg, &mut ChaCha8Rng::seed_from_u64(0), &mut NoObserver)
        .unwrap();

    let rho = reg.reduced_state(&[0, 1, 2, 3, 4, 5, 6]).unwrap();
    let fidelity = rho.fidelity_with_pure(&steane_zero_state()).unwrap();
    ensure!(fidelity >= 1.0 - 1e-9, "fidelity {fidelity}");
    let index = |w: &[bool; 7]| w.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
    let words = steane_zero_words();
    let mut amp_err = 0.0f64;
    for a in &words {
        for b in &words {
            amp_err = amp_err.max((rho.get(index(a), index(b)) - c(0.125)).norm());
        }
    }
    ensure!(amp_err <= 1e-9, "codeword amplitudes off by {amp_err:e}");
    let mut stab_err = 0.0f64;
    for k in code.stabilizers() {
        stab_err = stab_err.max((reg.expectation(&k.extended(n)).unwrap() - 1.0).abs());
    }
    ensure!(
        stab_err <= 1e-9,
        "stabilizer expectation off by {stab_err:e}"
    );
    within(start.elapsed(), 5.0)?;
    Ok(format!(
        "fidelity 1 - {:.1e}, amplitudes {amp_err:.1e}, six stabilizers {stab_err:.1e}",
        1.0 - fidelity
    ))
}

// 3

struct Corrector {
    code: CodeId,
    noise: NoiseModel,
    protocol: Protocol,
    ideal: Vec<Complex64>,
}

impl Corrector {
    fn new(code: CodeId) -> Self {
        let n = code.layout().n_total;
        let protocol =
            Protocol::new(code, &ConnectivityGraph::all_to_all(n).unwrap(), 1.0, 0.0).unwrap();
        let ideal = match code {
            CodeId::ThreeQubit => {
                let mut psi = vec![c(0.0); 8];
                psi[0] = c(1.0);
                psi
            }
            CodeId::Steane | CodeId::FtSteane => steane_zero_state(),
            CodeId::ShorNine => {
                let mut psi = vec![c(0.0); 512];
                for blocks in 0..8usize {
                    let idx = (0..3).fold(0, |acc, b| {
                        (acc << 3) | if (blocks >> (2 - b)) & 1 == 1 { 7 } else { 0 }
                    });
                    psi[idx] = c(1.0 / 8f64.sqrt());
                }
                psi
            }
        };
        Corrector {
            code,
            noise: NoiseModel::noiseless(n),
            protocol,
            ideal,
        }
    }

    fn fidelity_after(&self, errors: &[(usize, Pauli)]) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(errors.len() as u64);
        let mut reg = Register::prepared(&self.noise).unwrap();
        self.protocol
            .encode(&mut reg, &mut rng, &mut NoObserver)
            .unwrap();
        for &(q, p) in errors {
            reg.inject_pauli(q, p).unwrap();
        }
        self.protocol
            .cycle(&mut reg, &mut rng, &mut NoObserver)
            .unwrap();
        let data: Vec<usize> = self.code.layout().data_qubits().collect();
        reg.reduced_state(&data)
            .unwrap()
            .fidelity_with_pure(&self.ideal)
            .unwrap()
    }

    /// Number of error sets corrected to fidelity 1 - 1e-9.
    fn count(&self, sets: &[Vec<(usize, Pauli)>]) -> usize {
        sets.par_iter()
            .filter(|e| self.fidelity_after(e) >= 1.0 - 1e-9)
            .count()
    }
}

fn single_paulis(n: usize) -> Vec<Vec<(usize, Pauli)>> {
    (0..n)
        .flat_map(|q| [Pauli::X, Pauli::Y, Pauli::Z].map(|p| vec![(q, p)]))
        .collect()
}

fn exhaustive_correction() -> Outcome {
    let start = Instant::now();
    let mut tallies = Vec::new();
    let mut check = |label: &str, code: CodeId, sets: Vec<Vec<(usize, Pauli)>>| {
        let got = Corrector::new(code).count(&sets);
        tallies.push(format!("{label} {got}/{}", sets.len()));
        got == sets.len()
    };
    let flips = (0..3).map(|q| vec![(q, Pauli::X)]).collect();
    let mut ok = check("three_qubit X", CodeId::ThreeQubit, flips);
    ok &= check("steane", CodeId::Steane, single_paulis(7));
    ok &= check("ft_steane", CodeId::FtSteane, single_paulis(7));
    ok &= check("shor", CodeId::ShorNine, single_paulis(9));
    let per_block: Vec<Vec<(usize, Pauli)>> = (0..3)
        .flat_map(|i| {
            (3..6).flat_map(move |j| {
                (6..9).map(move |k| vec![(i, Pauli::X), (j, Pauli::X), (k, Pauli::X)])
            })
        })
        .collect();
    let with_phase = per_block
        .iter()
        .flat_map(|xs| (0..9).map(move |z| xs.iter().copied().chain([(z, Pauli::Z)]).collect()))
        .collect();
    ok &= check("shor X per block", CodeId::ShorNine, per_block);
    ok &= check("shor X per block + Z", CodeId::ShorNine, with_phase);
    let summary = tallies.join(", ");
    ensure!(ok, "{summary}");
    within(start.elapsed(), 600.0)?;
    Ok(summary)
}

// 4

fn routing_oracle() -> Outcome {
    let start = Instant::now();
    let mut graphs: Vec<ConnectivityGraph> = (2..=6)
        .map(|n| ConnectivityGraph::line(n).unwrap())
        .collect();
    for (r, cols) in [
        (1, 2),
        (1, 3),
        (1, 4),
        (2, 2),
        (1, 5),
        (1, 6),
        (2, 3),
        (3, 2),
    ] {
        graphs.push(ConnectivityGraph::square_lattice(r, cols).unwrap());
    }
    let (mut gates, mut worst) = (0, 0.0f64);
    for g in &graphs {
        let n = g.n_qubits();
        for a in 0..n {
            for b in (0..n).filter(|&b| b != a) {
                for ideal in [Gate::cnot(a, b), Gate::cz(a, b)] {
                    let routed = g.route(ideal).unwrap();
                    for h in routed.iter().filter(|h| h.kind().arity() == 2) {
                        let t = h.targets();
                        ensure!(
                            g.is_adjacent(t[0], t[1]).unwrap(),
                            "{} {ideal:?} uses {h:?}",
                            g.topology()
                        );
                    }
                    worst = worst.max(max_entry_diff(
                        &circuit_unitary(n, &routed),
                        &gate_unitary(n, &ideal),
                    ));
                    gates += 1;
                }
            }
        }
    }
    ensure!(worst <= 1e-10, "entrywise error {worst:e}");
    within(start.elapsed(), 60.0)?;
    Ok(format!(
        "{gates} routed gates on {} graphs, max entry error {worst:.1e}",
        graphs.len()
    ))
}

// 5

fn sampling_vs_exact() -> Outcome {
    let start = Instant::now();
    let shots = 10_000;
    let mut lines = Vec::new();
    let mut ok = true;
    for p1 in [0.01, 0.1] {
        let enabled = ChannelToggles {
            depolarization: true,
            ..ChannelToggles::NONE
        };
        let p = QubitNoiseParams {
            p1,
            t1: 100e-6,
            t2: 100e-6,
            p_prep: 0.0,
            p_meas: 0.0,
        };
        let noise = NoiseModel::with_options(vec![p; 5], 100e-9, 0.0, enabled).unwrap();
        let exact = three_qubit_first_cycle_failure(p1);
        let h = parallel::sample(
            &experiment(CodeId::ThreeQubit, noise, shots, 1, 5),
            parallel::thread_count(),
        )
        .map_err(|e| e.to_string())?;
        let observed = h.n_failures() as f64 / shots as f64;
        let sigma = (exact * (1.0 - exact) / shots as f64).sqrt();
        let z = (observed - exact) / sigma;
        ok &= z.abs() <= 3.0;
        lines.push(format!(
            "p1 {p1}: {observed:.4} vs {exact:.4} ({z:+.2} sigma)"
        ));
    }
    let summary = lines.join("; ");
    ensure!(ok, "{summary}");
    within(start.elapsed(), 120.0)?;
    Ok(summary)
}

// 6

fn geometric_recovery() -> Outcome {
    let (p, shots, cycle) = (0.1, 100_000u64, 1e-6);
    let max_iterations = 1_000_000;
    let geo = Geometric::new(p).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut h = FailureHistogram::new(max_iterations);
    for shot_index in 0..shots {
        let k = geo.sample(&mut rng);
        h.record(&FailureSample {
            shot_index,
            iterations_survived: k,
            censored: false,
        });
    }
    let want = -cycle / (1.0 - p).ln();
    let est = estimate_logical_t1(&h, cycle).ok_or("no failures")?;
    let rel = (est.t1_logical - want).abs() / want;
    ensure!(rel <= 0.02, "t1 {:.4e} vs {want:.4e}", est.t1_logical);
    let gof = geometric_goodness_of_fit(&h, est.per_cycle_failure_prob).ok_or("too few bins")?;
    let p_value = 1.0
        - ChiSquared::new(gof.degrees_of_freedom as f64)
            .unwrap()
            .cdf(gof.statistic);
    ensure!(p_value > 0.01, "chi-square p-value {p_value:.4}");
    Ok(format!(
        "t1 {:.3} us vs {:.3} us ({:.2}%), chi-square {:.1} on {} dof, p-value {p_value:.3}",
        est.t1_logical * 1e6,
        want * 1e6,
        rel * 100.0,
        gof.statistic,
        gof.degrees_of_freedom
    ))
}

// 7

fn three_qubit_fails_early() -> Outcome {
    let start = Instant::now();
    let max_iterations = 10_000;
    let e = experiment(
        CodeId::ThreeQubit,
        representative(5),
        10_000,
        max_iterations,
        7,
    );
    let h = parallel::sample(&e, parallel::thread_count()).map_err(|e| e.to_string())?;
    let median = h.median_failure_iteration();
    let est = e.estimate(&h);
    let summary = format!(
        "median failure iteration {median:?} of max {max_iterations}, {} censored, t1 {}",
        h.n_censored,
        est.map_or("n/a".into(), |t| format!(
            "{:.1} us (p {:.2e})",
            t.t1_logical * 1e6,
            t.per_cycle_failure_prob
        )),
    );
    ensure!(
        median.is_some_and(|m| m <= max_iterations / 10),
        "{summary}"
    );
    within(start.elapsed(), 300.0)?;
    Ok(summary)
}

// 8

fn determinism() -> Outcome {
    let n = parallel::thread_count().max(4);
    let e = experiment(CodeId::ThreeQubit, representative(5), 2_000, 200, 8);
    let serial = e.sample_failure_distribution().map_err(|e| e.to_string())?;
    for threads in [1, 2, n] {
        let h = parallel::sample(&e, threads).map_err(|e| e.to_string())?;
        ensure!(h == serial, "{threads} threads changed the histogram");
    }

    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut compared = 0;
    for (code, samples, max_iterations) in
        [(CodeId::ThreeQubit, 300, 100), (CodeId::Steane, 40, 10)]
    {
        let cfg = RunConfig {
            code,
            samples,
            max_iterations,
            seed: 8,
            ..RunConfig::default()
        };
        let one = tmp.path().join(format!("{code}-1"));
        let many = tmp.path().join(format!("{code}-{n}"));
        run_and_emit(&cfg, &one, 1).map_err(|e| e.to_string())?;
        run_and_emit(&cfg, &many, n).map_err(|e| e.to_string())?;
        for name in [
            output::CONFIG_FILE,
            output::HISTOGRAM_FILE,
            output::ESTIMATE_FILE,
        ] {
            let a = std::fs::read(one.join(name)).map_err(|e| e.to_string())?;
            let b = std::fs::read(many.join(name)).map_err(|e| e.to_string())?;
            ensure!(a == b, "{code} {name} differs between 1 and {n} threads");
            compared += 1;
        }
    }
    Ok(format!(
        "histograms equal for 1, 2, {n} threads; {compared} files byte-identical at 1 vs {n}"
    ))
}

// 9

fn performance() -> Outcome {
    let ft = experiment(CodeId::FtSteane, representative(11), 1, 1, 9);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut reg = Register::prepared(&ft.config().noise).unwrap();
    ft.protocol()
        .encode(&mut reg, &mut rng, &mut NoObserver)
        .unwrap();
    let mut slowest = Duration::ZERO;
    for _ in 0..3 {
        let t = Instant::now();
        let report = ft
            .protocol()
            .cycle(&mut reg, &mut rng, &mut NoObserver)
            .map_err(|e| e.to_string())?;
        slowest = slowest.max(t.elapsed());
        ensure!(
            report.ancilla_rounds >= 18,
            "{} ancilla rounds",
            report.ancilla_rounds
        );
    }
    within(slowest, 2.0).map_err(|e| format!("FT cycle {e}"))?;

    let three = experiment(CodeId::ThreeQubit, representative(5), 1_000, 100, 9);
    let t = Instant::now();
    parallel::sample(&three, parallel::thread_count()).map_err(|e| e.to_string())?;
    let shots = t.elapsed();
    within(shots, 60.0).map_err(|e| format!("three-qubit shots {e}"))?;
    Ok(format!(
        "FT cycle {:.2} s (slowest of 3); 1000 three-qubit shots {:.2} s on {} threads",
        slowest.as_secs_f64(),
        shots.as_secs_f64(),
        parallel::thread_count()
    ))
}

const CRITERIA: [Criterion; 9] = [
    ("channel algebra", channel_algebra),
    ("steane codeword", steane_codeword),
    ("exhaustive single-error correction", exhaustive_correction),
    ("routing oracle", routing_oracle),
    ("sampling vs exact", sampling_vs_exact),
    ("geometric consistency and t1 recovery", geometric_recovery),
    ("three-qubit code fails early", three_qubit_fails_early),
    ("determinism", determinism),
    ("performance", performance),
];

fn main() -> ExitCode {
    let wanted: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, run)) in CRITERIA.iter().enumerate() {
        let id = i + 1;
        if !wanted.is_empty() && !wanted.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {id} PASS  {name} [{secs:.1} s]: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {id} FAIL  {name} [{secs:.1} s]: {detail}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
