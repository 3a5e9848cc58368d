//! Density-matrix simulation of small quantum error-correcting codes under
//! transmon noise.
//!
//! The crate is `no_std` (with `alloc`). File formats, configuration and
//! the command-line tool live in the `qecbench` crate.
//!
//! Basis convention: qubit 0 is the most-significant bit of a
//! computational-basis index.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod codes;
pub mod error;
pub mod gates;
pub mod harness;
pub mod noise;
pub mod pauli;
pub mod register;
pub mod state;
pub mod superop;
pub mod topology;

pub use codes::{
    CodeId, CodeLayout, CorrectionOp, CycleReport, Event, NoObserver, Observer, Protocol, Syndrome,
    DEFAULT_MAX_CAT_RETRIES,
};
pub use error::{Error, Result};
pub use gates::{circuit_duration, Circuit, Gate, GateKind};
pub use harness::{
    bootstrap_t1, cycle_duration_of, estimate_logical_t1, geometric_goodness_of_fit, shot_rng,
    t1_from_probability, Experiment, ExperimentConfig, FailureHistogram, FailureSample,
    GoodnessOfFit, LogicalT1Estimate,
};
pub use noise::{ChannelToggles, NoiseModel, QubitNoiseParams, SpamKind};
pub use pauli::{Pauli, PauliString};
pub use register::Register;
pub use state::{DensityMatrix, KrausChannel, LocalOperator};
pub use superop::SplitMap;
pub use topology::{ConnectivityGraph, Topology};
