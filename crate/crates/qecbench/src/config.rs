//! JSON run configuration.
//!
//! ```json
//! {
//!   "code": "three_qubit",
//!   "topology": { "type": "square_lattice", "rows": 1, "cols": 5 },
//!   "noise": {
//!     "p1": 0.001, "t1": 100e-6, "t2": 100e-6, "tg": 100e-9,
//!     "p_prep": 0.01, "p_meas": 0.01,
//!     "enabled": { "depolarization": true, "relaxation": true, "dephasing": true, "spam": true }
//!   },
//!   "samples": 1000, "max_iterations": 10000, "seed": 42, "bootstrap": 1000
//! }
//! ```
//!
//! Any noise parameter may be given per qubit as `<name>_per_qubit`. Noise
//! keys may also sit at the top level instead of under `noise`.

use std::path::Path;

use qecbench_core::{
    ChannelToggles, CodeId, ConnectivityGraph, ExperimentConfig, NoiseModel, QubitNoiseParams,
    Topology, DEFAULT_MAX_CAT_RETRIES,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: String, reason: String },
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.into(),
        reason: reason.into(),
    }
}

/// One value for every qubit, or one per qubit.
#[derive(Clone, Debug, PartialEq)]
pub enum PerQubit {
    Uniform(f64),
    Each(Vec<f64>),
}

impl PerQubit {
    fn resolve(&self, name: &str, n: usize) -> Result<Vec<f64>, ConfigError> {
        match self {
            PerQubit::Uniform(v) => Ok(vec![*v; n]),
            PerQubit::Each(v) if v.len() == n => Ok(v.clone()),
            PerQubit::Each(v) => Err(invalid(
                format!("{name}_per_qubit"),
                format!("has {} entries, the code uses {n} qubits", v.len()),
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Channels {
    pub depolarization: bool,
    pub relaxation: bool,
    pub dephasing: bool,
    pub spam: bool,
}

impl Default for Channels {
    fn default() -> Self {
        Channels {
            depolarization: true,
            relaxation: true,
            dephasing: true,
            spam: true,
        }
    }
}

impl From<Channels> for ChannelToggles {
    fn from(c: Channels) -> Self {
        ChannelToggles {
            depolarization: c.depolarization,
            relaxation: c.relaxation,
            dephasing: c.dephasing,
            spam: c.spam,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoiseConfig {
    pub p1: PerQubit,
    /// Seconds.
    pub t1: PerQubit,
    /// Seconds.
    pub t2: PerQubit,
    pub p_prep: PerQubit,
    pub p_meas: PerQubit,
    /// Gate duration, seconds.
    pub tg: f64,
    /// Measurement and reset duration, seconds.
    pub t_meas: f64,
    pub enabled: Channels,
}

impl Default for NoiseConfig {
    /// Representative transmon values.
    fn default() -> Self {
        NoiseConfig {
            p1: PerQubit::Uniform(1e-3),
            t1: PerQubit::Uniform(100e-6),
            t2: PerQubit::Uniform(100e-6),
            p_prep: PerQubit::Uniform(1e-2),
            p_meas: PerQubit::Uniform(1e-2),
            tg: 100e-9,
            t_meas: 0.0,
            enabled: Channels::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TopologyConfig {
    #[default]
    AllToAll,
    Line,
    /// Shape defaults to the most nearly square factorisation.
    SquareLattice {
        rows: Option<usize>,
        cols: Option<usize>,
    },
}

impl TopologyConfig {
    pub fn resolve(self, n: usize) -> Result<ConnectivityGraph, ConfigError> {
        let topo = match self {
            TopologyConfig::AllToAll => Topology::AllToAll,
            TopologyConfig::Line => Topology::Line,
            TopologyConfig::SquareLattice { rows, cols } => {
                let (r, c) = match (rows, cols) {
                    (Some(r), Some(c)) => (r, c),
                    (Some(r), None) if r > 0 => (r, n.div_ceil(r)),
                    (None, Some(c)) if c > 0 => (n.div_ceil(c), c),
                    (None, None) => qecbench_core::topology::near_square(n),
                    _ => return Err(invalid("topology", "rows and cols must be positive")),
                };
                Topology::SquareLattice { rows: r, cols: c }
            }
        };
        ConnectivityGraph::new(topo, n).map_err(|e| invalid("topology", e.to_string()))
    }
}

impl std::str::FromStr for TopologyConfig {
    type Err = ConfigError;

    /// `all_to_all`, `line`, `square` or `square:RxC` (dashes and
    /// underscores are interchangeable).
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        let s = s.trim().to_ascii_lowercase().replace('-', "_");
        let bad = || invalid("topology", format!("unknown topology `{s}`"));
        Ok(match s.as_str() {
            "all_to_all" | "all" => TopologyConfig::AllToAll,
            "line" => TopologyConfig::Line,
            "square" | "square_lattice" => TopologyConfig::SquareLattice {
                rows: None,
                cols: None,
            },
            _ => {
                let shape = s
                    .strip_prefix("square:")
                    .or_else(|| s.strip_prefix("square_lattice:"))
                    .ok_or_else(bad)?;
                let (r, c) = shape.split_once('x').ok_or_else(bad)?;
                TopologyConfig::SquareLattice {
                    rows: Some(r.parse().map_err(|_| bad())?),
                    cols: Some(c.parse().map_err(|_| bad())?),
                }
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub code: CodeId,
    pub topology: TopologyConfig,
    pub noise: NoiseConfig,
    pub samples: u64,
    pub max_iterations: u64,
    pub seed: u64,
    pub bootstrap: usize,
    pub max_cat_retries: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            code: CodeId::ThreeQubit,
            topology: TopologyConfig::AllToAll,
            noise: NoiseConfig::default(),
            samples: 1000,
            max_iterations: 10_000,
            seed: 0,
            bootstrap: 1000,
            max_cat_retries: DEFAULT_MAX_CAT_RETRIES,
        }
    }
}

/// A checked configuration ready to run.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub experiment: ExperimentConfig,
    pub graph: ConnectivityGraph,
    /// Human-readable physicality warnings.
    pub warnings: Vec<String>,
}

impl RunConfig {
    pub fn resolve(&self) -> Result<Resolved, ConfigError> {
        let n = self.code.layout().n_total;
        let graph = self.topology.resolve(n)?;
        if self.samples == 0 {
            return Err(invalid("samples", "must be at least 1"));
        }
        if self.max_iterations == 0 {
            return Err(invalid("max_iterations", "must be at least 1"));
        }
        let nz = &self.noise;
        let p1 = nz.p1.resolve("p1", n)?;
        let t1 = nz.t1.resolve("t1", n)?;
        let t2 = nz.t2.resolve("t2", n)?;
        let p_prep = nz.p_prep.resolve("p_prep", n)?;
        let p_meas = nz.p_meas.resolve("p_meas", n)?;
        let per_qubit: Vec<QubitNoiseParams> = (0..n)
            .map(|q| QubitNoiseParams {
                p1: p1[q],
                t1: t1[q],
                t2: t2[q],
                p_prep: p_prep[q],
                p_meas: p_meas[q],
            })
            .collect();
        let noise = NoiseModel::with_options(per_qubit, nz.tg, nz.t_meas, nz.enabled.into())
            .map_err(|e| match e {
                qecbench_core::Error::Probability { name, .. }
                | qecbench_core::Error::NonPositiveTime { name, .. } => {
                    invalid(name, e.to_string())
                }
                other => invalid("noise", other.to_string()),
            })?;
        let warnings = noise
            .unphysical_qubits()
            .into_iter()
            .map(|q| {
                format!(
                    "qubit {q}: t2 = {} s exceeds 2 * t1 = {} s",
                    t2[q],
                    2.0 * t1[q]
                )
            })
            .collect();
        let experiment = ExperimentConfig {
            code: self.code,
            topology: graph.topology(),
            noise,
            n_samples: self.samples,
            max_iterations: self.max_iterations,
            master_seed: self.seed,
            bootstrap_resamples: self.bootstrap,
            max_cat_retries: self.max_cat_retries,
        };
        experiment
            .validate()
            .map_err(|e| invalid("config", e.to_string()))?;
        Ok(Resolved {
            experiment,
            graph,
            warnings,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        raw.into_config()
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Canonical JSON: noise nested, every field present.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&RawConfig::from_config(self)).expect("config serializes")
    }
}

// Serde mirror of the file format.

#[derive(Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawNoise {
    #[serde(skip_serializing_if = "Option::is_none")]
    p1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p1_per_qubit: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    t1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    t1_per_qubit: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    t2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    t2_per_qubit: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p_prep: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p_prep_per_qubit: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p_meas: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p_meas_per_qubit: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    t_meas: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    enabled: Option<Channels>,
}

impl RawNoise {
    fn is_empty(&self) -> bool {
        serde_json::to_value(self)
            .map(|v| v.as_object().is_none_or(|o| o.is_empty()))
            .unwrap_or(false)
    }

    fn into_noise(self) -> Result<NoiseConfig, ConfigError> {
        let d = NoiseConfig::default();
        fn pick(
            name: &str,
            one: Option<f64>,
            each: Option<Vec<f64>>,
            default: PerQubit,
        ) -> Result<PerQubit, ConfigError> {
            match (one, each) {
                (Some(_), Some(_)) => Err(invalid(
                    name,
                    format!("give either `{name}` or `{name}_per_qubit`"),
                )),
                (Some(v), None) => Ok(PerQubit::Uniform(v)),
                (None, Some(v)) => Ok(PerQubit::Each(v)),
                (None, None) => Ok(default),
            }
        }
        // rates default to zero when absent from a file
        let zero = PerQubit::Uniform(0.0);
        Ok(NoiseConfig {
            p1: pick("p1", self.p1, self.p1_per_qubit, zero.clone())?,
            t1: pick("t1", self.t1, self.t1_per_qubit, d.t1)?,
            t2: pick("t2", self.t2, self.t2_per_qubit, d.t2)?,
            p_prep: pick("p_prep", self.p_prep, self.p_prep_per_qubit, zero.clone())?,
            p_meas: pick("p_meas", self.p_meas, self.p_meas_per_qubit, zero)?,
            tg: self.tg.unwrap_or(d.tg),
            t_meas: self.t_meas.unwrap_or(d.t_meas),
            enabled: self.enabled.unwrap_or_default(),
        })
    }

    fn from_noise(n: &NoiseConfig) -> Self {
        fn split(v: &PerQubit) -> (Option<f64>, Option<Vec<f64>>) {
            match v {
                PerQubit::Uniform(x) => (Some(*x), None),
                PerQubit::Each(xs) => (None, Some(xs.clone())),
            }
        }
        let (p1, p1_per_qubit) = split(&n.p1);
        let (t1, t1_per_qubit) = split(&n.t1);
        let (t2, t2_per_qubit) = split(&n.t2);
        let (p_prep, p_prep_per_qubit) = split(&n.p_prep);
        let (p_meas, p_meas_per_qubit) = split(&n.p_meas);
        RawNoise {
            p1,
            p1_per_qubit,
            t1,
            t1_per_qubit,
            t2,
            t2_per_qubit,
            p_prep,
            p_prep_per_qubit,
            p_meas,
            p_meas_per_qubit,
            tg: Some(n.tg),
            t_meas: Some(n.t_meas),
            enabled: Some(n.enabled),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTopology {
    #[serde(rename = "type")]
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    rows: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cols: Option<usize>,
}

#[derive(Serialize, Deserialize)]
struct RawConfig {
    code: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    topology: Option<RawTopology>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    noise: Option<RawNoise>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    samples: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max_iterations: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bootstrap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max_cat_retries: Option<usize>,
    #[serde(flatten)]
    flat: FlatNoise,
}

/// Noise keys allowed at the top level. `deny_unknown_fields` does not
/// combine with `flatten`, so unknown keys are caught here instead.
#[derive(Serialize, Deserialize, Default)]
struct FlatNoise {
    #[serde(flatten)]
    rest: serde_json::Map<String, serde_json::Value>,
}

impl RawConfig {
    fn into_config(self) -> Result<RunConfig, ConfigError> {
        let d = RunConfig::default();
        let code: CodeId = self
            .code
            .parse()
            .map_err(|_| invalid("code", format!("unknown code `{}`", self.code)))?;
        let topology = match self.topology {
            None => TopologyConfig::AllToAll,
            Some(t) => match t.kind.parse::<TopologyConfig>()? {
                TopologyConfig::SquareLattice { .. } => TopologyConfig::SquareLattice {
                    rows: t.rows,
                    cols: t.cols,
                },
                other if t.rows.is_none() && t.cols.is_none() => other,
                _ => {
                    return Err(invalid(
                        "topology",
                        "rows and cols only apply to square_lattice",
                    ))
                }
            },
        };
        let flat: RawNoise = if self.flat.rest.is_empty() {
            RawNoise::default()
        } else {
            serde_json::from_value(serde_json::Value::Object(self.flat.rest))
                .map_err(|e| invalid("config", e.to_string()))?
        };
        let noise = match (self.noise, flat.is_empty()) {
            (Some(_), false) => {
                return Err(invalid(
                    "noise",
                    "noise keys given both at top level and under `noise`",
                ))
            }
            (Some(n), true) => n.into_noise()?,
            (None, _) => flat.into_noise()?,
        };
        Ok(RunConfig {
            code,
            topology,
            noise,
            samples: self.samples.unwrap_or(d.samples),
            max_iterations: self.max_iterations.unwrap_or(d.max_iterations),
            seed: self.seed.unwrap_or(d.seed),
            bootstrap: self.bootstrap.unwrap_or(d.bootstrap),
            max_cat_retries: self.max_cat_retries.unwrap_or(d.max_cat_retries),
        })
    }

    fn from_config(c: &RunConfig) -> Self {
        let topology = match c.topology {
            TopologyConfig::AllToAll => RawTopology {
                kind: "all_to_all".into(),
                rows: None,
                cols: None,
            },
            TopologyConfig::Line => RawTopology {
                kind: "line".into(),
                rows: None,
                cols: None,
            },
            TopologyConfig::SquareLattice { rows, cols } => RawTopology {
                kind: "square_lattice".into(),
                rows,
                cols,
            },
        };
        RawConfig {
            code: c.code.name().into(),
            topology: Some(topology),
            noise: Some(RawNoise::from_noise(&c.noise)),
            samples: Some(c.samples),
            max_iterations: Some(c.max_iterations),
            seed: Some(c.seed),
            bootstrap: Some(c.bootstrap),
            max_cat_retries: Some(c.max_cat_retries),
            flat: FlatNoise::default(),
        }
    }
}
