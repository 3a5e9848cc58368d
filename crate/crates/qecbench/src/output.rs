//! Result files: histogram CSV, logical-T1 JSON and the run manifest.

use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use qecbench_core::{Experiment, FailureHistogram, LogicalT1Estimate};
use serde::Serialize;

use crate::config::{ConfigError, RunConfig};
use crate::parallel;

pub const HISTOGRAM_FILE: &str = "histogram.csv";
pub const ESTIMATE_FILE: &str = "t1_estimate.json";
pub const CONFIG_FILE: &str = "config.json";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("simulation failed: {0}")]
    Simulation(#[from] qecbench_core::Error),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// `iterations,count` rows in increasing order, then `censored,<n>`.
pub fn histogram_csv(h: &FailureHistogram) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["iterations", "count"])
        .expect("in-memory write");
    for (k, c) in &h.counts {
        w.write_record([k.to_string(), c.to_string()])
            .expect("in-memory write");
    }
    w.write_record(["censored".to_string(), h.n_censored.to_string()])
        .expect("in-memory write");
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

/// Logical-T1 record; seconds throughout. Estimate fields are `null` when
/// no shot failed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct T1Record {
    pub t1_logical_s: Option<f64>,
    pub p_fail_per_cycle: Option<f64>,
    pub cycle_duration_s: f64,
    pub censored_only: bool,
    pub n_samples: u64,
    pub n_failures: u64,
    pub n_censored: u64,
    pub max_iterations: u64,
    pub median_failure_iteration: Option<u64>,
    pub bootstrap: Vec<f64>,
}

impl T1Record {
    pub fn new(h: &FailureHistogram, cycle_duration: f64, est: Option<&LogicalT1Estimate>) -> Self {
        T1Record {
            t1_logical_s: est.map(|e| e.t1_logical),
            p_fail_per_cycle: est.map(|e| e.per_cycle_failure_prob),
            cycle_duration_s: cycle_duration,
            censored_only: est.is_none(),
            n_samples: h.n_samples,
            n_failures: h.n_failures(),
            n_censored: h.n_censored,
            max_iterations: h.max_iterations,
            median_failure_iteration: h.median_failure_iteration(),
            bootstrap: est
                .map(|e| e.bootstrap_distribution.clone())
                .unwrap_or_default(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("record serializes") + "\n"
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ManifestFile {
    pub role: &'static str,
    /// Relative to the manifest.
    pub path: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub master_seed: u64,
    pub threads: usize,
    pub started_at: String,
    pub finished_at: String,
    pub config: serde_json::Value,
    pub warnings: Vec<String>,
    pub files: Vec<ManifestFile>,
}

/// Everything a run produces, before it touches the disk.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub histogram: FailureHistogram,
    pub record: T1Record,
}

/// Sample and estimate with `threads` workers.
pub fn run(experiment: &Experiment, threads: usize) -> Result<RunOutput, RunError> {
    let histogram = parallel::sample(experiment, threads)?;
    let est = experiment.estimate(&histogram);
    let record = T1Record::new(&histogram, experiment.cycle_duration(), est.as_ref());
    Ok(RunOutput { histogram, record })
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, RunError> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|source| RunError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(path)
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

/// Run `cfg` and write the three result files plus `manifest.json` into
/// `out_dir`, creating it if needed.
pub fn run_and_emit(
    cfg: &RunConfig,
    out_dir: &Path,
    threads: usize,
) -> Result<RunManifest, RunError> {
    let started_at = now();
    let resolved = cfg.resolve()?;
    let experiment = Experiment::new(resolved.experiment)?;
    let out = run(&experiment, threads)?;
    std::fs::create_dir_all(out_dir).map_err(|source| RunError::Io {
        path: out_dir.display().to_string(),
        source,
    })?;
    let config_json = cfg.to_json() + "\n";
    let files = [
        ("config", CONFIG_FILE, config_json),
        ("histogram", HISTOGRAM_FILE, histogram_csv(&out.histogram)),
        ("t1_estimate", ESTIMATE_FILE, out.record.to_json()),
    ];
    let mut listed = Vec::new();
    for (role, name, contents) in &files {
        write(out_dir, name, contents)?;
        listed.push(ManifestFile {
            role,
            path: (*name).to_string(),
        });
    }
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        master_seed: cfg.seed,
        threads,
        started_at,
        finished_at: now(),
        config: serde_json::from_str(&files[0].2).expect("config echo is JSON"),
        warnings: resolved.warnings,
        files: listed,
    };
    write(
        out_dir,
        MANIFEST_FILE,
        &(serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n"),
    )?;
    Ok(manifest)
}
