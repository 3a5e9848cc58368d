//! Run-until-failure sampling, failure histograms and logical-T1 estimation.
//!
//! Every shot draws from its own ChaCha8 stream: the generator is seeded
//! with the master seed and the shot index selects the stream, so results
//! do not depend on which worker runs which shot, or in what order.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::codes::{CodeId, NoObserver, Observer, Protocol, DEFAULT_MAX_CAT_RETRIES};
use crate::error::{Error, Result};
use crate::noise::NoiseModel;
use crate::register::Register;
use crate::topology::{ConnectivityGraph, Topology};

/// Stream reserved for bootstrap resampling; shot streams are the shot
/// indices, which never reach it.
const BOOTSTRAP_STREAM: u64 = u64::MAX;

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub code: CodeId,
    pub topology: Topology,
    /// Must cover every qubit of the code's layout.
    pub noise: NoiseModel,
    pub n_samples: u64,
    pub max_iterations: u64,
    pub master_seed: u64,
    pub bootstrap_resamples: usize,
    pub max_cat_retries: usize,
}

impl ExperimentConfig {
    /// Defaults for everything but the code and the noise: all-to-all
    /// connectivity, 1000 shots, 10^4 iterations, seed 0, 1000 bootstrap
    /// resamples.
    pub fn new(code: CodeId, noise: NoiseModel) -> Self {
        ExperimentConfig {
            code,
            topology: Topology::AllToAll,
            noise,
            n_samples: 1000,
            max_iterations: 10_000,
            master_seed: 0,
            bootstrap_resamples: 1000,
            max_cat_retries: DEFAULT_MAX_CAT_RETRIES,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.code.layout().n_total;
        if self.noise.n_qubits() != n {
            return Err(Error::NoiseModelSize {
                expected: n,
                got: self.noise.n_qubits(),
            });
        }
        if self.n_samples == 0 {
            return Err(Error::Config {
                field: "samples",
                reason: "must be at least 1".into(),
            });
        }
        if self.max_iterations == 0 {
            return Err(Error::Config {
                field: "max_iterations",
                reason: "must be at least 1".into(),
            });
        }
        ConnectivityGraph::new(self.topology, n)?;
        Ok(())
    }
}

/// Outcome of one shot.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FailureSample {
    pub shot_index: u64,
    /// Cycles whose readout passed before the failing one; equal to
    /// `max_iterations` for censored shots.
    pub iterations_survived: u64,
    pub censored: bool,
}

impl FailureSample {
    /// Bernoulli trials contributed to the geometric likelihood.
    fn trials(&self) -> u64 {
        if self.censored {
            self.iterations_survived
        } else {
            self.iterations_survived + 1
        }
    }
}

/// Generator for shot `shot_index` of a run seeded with `master_seed`.
pub fn shot_rng(master_seed: u64, shot_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(shot_index);
    rng
}

/// A validated configuration with its routed protocol.
#[derive(Clone, Debug)]
pub struct Experiment {
    config: ExperimentConfig,
    protocol: Protocol,
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let graph = ConnectivityGraph::new(config.topology, config.code.layout().n_total)?;
        let protocol = Protocol::new(
            config.code,
            &graph,
            config.noise.gate_duration(),
            config.noise.measure_duration(),
        )?
        .with_max_cat_retries(config.max_cat_retries);
        Ok(Experiment { config, protocol })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn protocol(&self) -> &Protocol {
        &self.protocol
    }

    pub fn cycle_duration(&self) -> f64 {
        self.protocol.cycle_duration()
    }

    /// Encode |0>_L once, then repeat cycle and readout until the readout
    /// decodes to 1 or `max_iterations` cycles pass. Readout samples a copy
    /// of the state; the next cycle continues from the state before it.
    pub fn run_until_failure(&self, shot_index: u64) -> Result<FailureSample> {
        self.run_until_failure_observed(shot_index, &mut NoObserver)
    }

    pub fn run_until_failure_observed<O: Observer>(
        &self,
        shot_index: u64,
        obs: &mut O,
    ) -> Result<FailureSample> {
        let mut rng = shot_rng(self.config.master_seed, shot_index);
        let mut reg = Register::prepared(&self.config.noise)?;
        self.protocol.encode(&mut reg, &mut rng, obs)?;
        let max = self.config.max_iterations;
        for k in 0..max {
            self.protocol.cycle(&mut reg, &mut rng, obs)?;
            if self.protocol.readout(&reg, &mut rng)? {
                return Ok(FailureSample {
                    shot_index,
                    iterations_survived: k,
                    censored: false,
                });
            }
        }
        Ok(FailureSample {
            shot_index,
            iterations_survived: max,
            censored: true,
        })
    }

    /// Histogram over shots `range`; merging the histograms of disjoint
    /// ranges gives the same result as one call over their union.
    pub fn sample_range(&self, range: core::ops::Range<u64>) -> Result<FailureHistogram> {
        let mut h = FailureHistogram::new(self.config.max_iterations);
        for shot in range {
            h.record(&self.run_until_failure(shot)?);
        }
        Ok(h)
    }

    pub fn sample_failure_distribution(&self) -> Result<FailureHistogram> {
        self.sample_range(0..self.config.n_samples)
    }

    /// Point estimate plus bootstrap distribution drawn from the
    /// configured number of resamples.
    pub fn estimate(&self, h: &FailureHistogram) -> Option<LogicalT1Estimate> {
        let mut est = estimate_logical_t1(h, self.cycle_duration())?;
        let mut rng = shot_rng(self.config.master_seed, BOOTSTRAP_STREAM);
        est.bootstrap_distribution = bootstrap_t1(
            h,
            self.cycle_duration(),
            self.config.bootstrap_resamples,
            &mut rng,
        );
        Some(est)
    }
}

/// Shots per iterations-survived value, plus the censored count.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FailureHistogram {
    /// iterations survived -> number of failing shots
    pub counts: BTreeMap<u64, u64>,
    pub n_samples: u64,
    pub n_censored: u64,
    pub max_iterations: u64,
}

impl FailureHistogram {
    pub fn new(max_iterations: u64) -> Self {
        FailureHistogram {
            max_iterations,
            ..Default::default()
        }
    }

    pub fn record(&mut self, s: &FailureSample) {
        self.n_samples += 1;
        if s.censored {
            self.n_censored += 1;
        } else {
            *self.counts.entry(s.iterations_survived).or_insert(0) += 1;
        }
    }

    /// Add another histogram over the same `max_iterations`.
    pub fn merge(&mut self, other: &FailureHistogram) {
        debug_assert_eq!(self.max_iterations, other.max_iterations);
        self.n_samples += other.n_samples;
        self.n_censored += other.n_censored;
        for (&k, &c) in &other.counts {
            *self.counts.entry(k).or_insert(0) += c;
        }
    }

    pub fn n_failures(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Bernoulli trials observed: `k + 1` per failing shot, `max_iterations`
    /// per censored one.
    pub fn total_trials(&self) -> u64 {
        self.counts.iter().map(|(&k, &c)| (k + 1) * c).sum::<u64>()
            + self.n_censored * self.max_iterations
    }

    /// Iterations survived by the middle failing shot, if any failed.
    pub fn median_failure_iteration(&self) -> Option<u64> {
        let n = self.n_failures();
        if n == 0 {
            return None;
        }
        let mut seen = 0;
        for (&k, &c) in &self.counts {
            seen += c;
            if 2 * seen >= n {
                return Some(k);
            }
        }
        None
    }

    pub fn mean_failure_iteration(&self) -> Option<f64> {
        let n = self.n_failures();
        (n > 0).then(|| {
            self.counts
                .iter()
                .map(|(&k, &c)| k as f64 * c as f64)
                .sum::<f64>()
                / n as f64
        })
    }

    /// Failing shots first, then censored, each sorted by iterations.
    fn shots(&self) -> Vec<FailureSample> {
        let mut out = Vec::with_capacity(self.n_samples as usize);
        for (&k, &c) in &self.counts {
            out.extend((0..c).map(|_| FailureSample {
                shot_index: 0,
                iterations_survived: k,
                censored: false,
            }));
        }
        out.extend((0..self.n_censored).map(|_| FailureSample {
            shot_index: 0,
            iterations_survived: self.max_iterations,
            censored: true,
        }));
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LogicalT1Estimate {
    /// Seconds.
    pub t1_logical: f64,
    pub per_cycle_failure_prob: f64,
    /// Seconds.
    pub cycle_duration: f64,
    /// Seconds; resamples without failures are left out.
    pub bootstrap_distribution: Vec<f64>,
}

/// `-T / ln(1 - p)`, with `1 - p` floored at machine epsilon so `p = 1`
/// gives a finite cycle-scale value.
pub fn t1_from_probability(p: f64, cycle_duration: f64) -> f64 {
    -cycle_duration / libm::log((1.0 - p).max(f64::EPSILON))
}

fn mle(failures: u64, trials: u64) -> Option<f64> {
    (failures > 0).then(|| failures as f64 / trials as f64)
}

/// Censored geometric MLE `p = failures / trials` and the matching T1.
/// `None` when no shot failed. The bootstrap distribution is empty; see
/// [`bootstrap_t1`].
pub fn estimate_logical_t1(h: &FailureHistogram, cycle_duration: f64) -> Option<LogicalT1Estimate> {
    let p = mle(h.n_failures(), h.total_trials())?;
    Some(LogicalT1Estimate {
        t1_logical: t1_from_probability(p, cycle_duration),
        per_cycle_failure_prob: p,
        cycle_duration,
        bootstrap_distribution: Vec::new(),
    })
}

/// T1 estimates from `resamples` resamplings of the shots with replacement.
pub fn bootstrap_t1<R: Rng + ?Sized>(
    h: &FailureHistogram,
    cycle_duration: f64,
    resamples: usize,
    rng: &mut R,
) -> Vec<f64> {
    let shots = h.shots();
    if shots.is_empty() {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let (mut failures, mut trials) = (0, 0);
        for _ in 0..shots.len() {
            let s = &shots[rng.random_range(0..shots.len())];
            failures += u64::from(!s.censored);
            trials += s.trials();
        }
        if let Some(p) = mle(failures, trials) {
            out.push(t1_from_probability(p, cycle_duration));
        }
    }
    out
}

/// Chi-square statistic of the failing shots against a geometric law
/// truncated at `max_iterations`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GoodnessOfFit {
    pub statistic: f64,
    /// Bins minus one, minus one more for the fitted parameter.
    pub degrees_of_freedom: usize,
}

/// Bins are merged from the low end until each expects at least 5 shots;
/// the last bin takes the tail. `None` with fewer than three bins.
pub fn geometric_goodness_of_fit(h: &FailureHistogram, p: f64) -> Option<GoodnessOfFit> {
    let n = h.n_failures() as f64;
    let q = 1.0 - p;
    let norm = 1.0 - libm::pow(q, h.max_iterations as f64);
    let prob = |k: u64| p * libm::pow(q, k as f64) / norm;
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp, mut used) = (0.0, 0.0, 0.0);
    for k in 0..h.max_iterations {
        obs += *h.counts.get(&k).unwrap_or(&0) as f64;
        let e = n * prob(k);
        exp += e;
        used += e;
        if exp >= 5.0 && n - used >= 5.0 {
            bins.push((obs, exp));
            obs = 0.0;
            exp = 0.0;
        } else if n - used < 5.0 {
            break;
        }
    }
    // the tail bin holds everything not yet binned
    let binned: f64 = bins.iter().map(|b| b.0).sum();
    bins.push((n - binned, n - bins.iter().map(|b| b.1).sum::<f64>()));
    if bins.len() < 3 {
        return None;
    }
    let statistic = bins.iter().map(|&(o, e)| (o - e) * (o - e) / e).sum();
    Some(GoodnessOfFit {
        statistic,
        degrees_of_freedom: bins.len() - 2,
    })
}

/// Duration of one syndrome-extraction cycle of `code` routed on `graph`.
pub fn cycle_duration_of(
    code: CodeId,
    graph: &ConnectivityGraph,
    noise: &NoiseModel,
) -> Result<f64> {
    Protocol::new(code, graph, noise.gate_duration(), noise.measure_duration())
        .map(|p| p.cycle_duration())
}
