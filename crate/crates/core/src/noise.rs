//! Transmon noise channels and the schedule on which they are applied.
//!
//! After every unitary gate: depolarization on the gate's qubit (the
//! target only for CNOT/CZ), then relaxation and dephasing for one gate
//! time on every qubit of the register. SPAM bit flips follow state
//! preparation and precede each measurement.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gates::Gate;
use crate::pauli::Pauli;
use crate::state::{DensityMatrix, KrausChannel, LocalOperator};
use crate::superop::SplitMap;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn scaled(p: Pauli, s: f64) -> LocalOperator {
    LocalOperator::single(p.matrix().map(|z| z * s))
}

fn check_probability(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::Probability { name, value })
    }
}

fn check_time(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveTime { name, value })
    }
}

fn check_duration(name: &'static str, value: f64) -> Result<()> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveTime { name, value })
    }
}

/// `1 - exp(-t / tau)`, accurate for small `t / tau`.
fn decay_probability(t: f64, tau: f64) -> f64 {
    -libm::expm1(-t / tau)
}

/// `{sqrt(1-p) I, sqrt(p/3) X, sqrt(p/3) Z, sqrt(p/3) Y}`.
pub fn depolarizing_channel(p1: f64) -> Result<KrausChannel> {
    check_probability("p1", p1)?;
    let s = libm::sqrt(p1 / 3.0);
    KrausChannel::new(vec![
        scaled(Pauli::I, libm::sqrt(1.0 - p1)),
        scaled(Pauli::X, s),
        scaled(Pauli::Z, s),
        scaled(Pauli::Y, s),
    ])
}

/// Amplitude damping over `t_g` with `p_reset = 1 - exp(-t_g / t1)`.
pub fn relaxation_channel(t_g: f64, t1: f64) -> Result<KrausChannel> {
    check_duration("tg", t_g)?;
    check_time("t1", t1)?;
    let p = decay_probability(t_g, t1);
    let z = c(0.0);
    KrausChannel::new(vec![
        LocalOperator::single([c(1.0), z, z, c(libm::sqrt(1.0 - p))]),
        LocalOperator::single([z, c(libm::sqrt(p)), z, z]),
    ])
}

/// `{sqrt(1-p) I, sqrt(p)|0><0|, sqrt(p)|1><1|}` with
/// `p = 1 - exp(-t_g / t2)`.
pub fn dephasing_channel(t_g: f64, t2: f64) -> Result<KrausChannel> {
    check_duration("tg", t_g)?;
    check_time("t2", t2)?;
    let p = decay_probability(t_g, t2);
    let z = c(0.0);
    let s = c(libm::sqrt(p));
    KrausChannel::new(vec![
        scaled(Pauli::I, libm::sqrt(1.0 - p)),
        LocalOperator::single([s, z, z, z]),
        LocalOperator::single([z, z, z, s]),
    ])
}

/// Bit flip with probability `p2`.
pub fn spam_channel(p2: f64) -> Result<KrausChannel> {
    check_probability("p_spam", p2)?;
    KrausChannel::new(vec![
        scaled(Pauli::I, libm::sqrt(1.0 - p2)),
        scaled(Pauli::X, libm::sqrt(p2)),
    ])
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitNoiseParams {
    pub p1: f64,
    pub t1: f64,
    pub t2: f64,
    pub p_prep: f64,
    pub p_meas: f64,
}

impl QubitNoiseParams {
    pub fn validate(&self) -> Result<()> {
        check_probability("p1", self.p1)?;
        check_time("t1", self.t1)?;
        check_time("t2", self.t2)?;
        check_probability("p_prep", self.p_prep)?;
        check_probability("p_meas", self.p_meas)
    }

    /// `T2 <= 2 T1` holds for physical qubits; violations are only warned
    /// about.
    pub fn is_physical(&self) -> bool {
        self.t2 <= 2.0 * self.t1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChannelToggles {
    pub depolarization: bool,
    pub relaxation: bool,
    pub dephasing: bool,
    pub spam: bool,
}

impl ChannelToggles {
    pub const ALL: ChannelToggles = ChannelToggles {
        depolarization: true,
        relaxation: true,
        dephasing: true,
        spam: true,
    };
    pub const NONE: ChannelToggles = ChannelToggles {
        depolarization: false,
        relaxation: false,
        dephasing: false,
        spam: false,
    };
}

impl Default for ChannelToggles {
    fn default() -> Self {
        Self::ALL
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpamKind {
    Prep,
    Meas,
}

/// Per-qubit maps precompiled from the Kraus channels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct QubitMaps {
    pub depol: SplitMap,
    /// Relaxation then dephasing for one gate time.
    pub gate_idle: SplitMap,
    /// Relaxation then dephasing for one measurement/reset duration.
    pub measure_idle: SplitMap,
    pub prep: SplitMap,
    pub meas: SplitMap,
}

fn split(ch: &KrausChannel) -> SplitMap {
    SplitMap::from_kraus(ch).expect("noise channels have split form")
}

/// Physical-qubit noise for a whole register. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseModel {
    per_qubit: Vec<QubitNoiseParams>,
    gate_duration: f64,
    measure_duration: f64,
    enabled: ChannelToggles,
    maps: Vec<QubitMaps>,
}

impl NoiseModel {
    pub fn new(per_qubit: Vec<QubitNoiseParams>, gate_duration: f64) -> Result<Self> {
        Self::with_options(per_qubit, gate_duration, 0.0, ChannelToggles::ALL)
    }

    pub fn uniform(n_qubits: usize, params: QubitNoiseParams, gate_duration: f64) -> Result<Self> {
        Self::new(vec![params; n_qubits], gate_duration)
    }

    /// All channels disabled.
    pub fn noiseless(n_qubits: usize) -> Self {
        let params = QubitNoiseParams {
            p1: 0.0,
            t1: 1.0,
            t2: 1.0,
            p_prep: 0.0,
            p_meas: 0.0,
        };
        Self::with_options(vec![params; n_qubits], 0.0, 0.0, ChannelToggles::NONE)
            .expect("noiseless model is valid")
    }

    pub fn with_options(
        per_qubit: Vec<QubitNoiseParams>,
        gate_duration: f64,
        measure_duration: f64,
        enabled: ChannelToggles,
    ) -> Result<Self> {
        check_duration("tg", gate_duration)?;
        check_duration("t_meas", measure_duration)?;
        let maps = per_qubit
            .iter()
            .map(|p| {
                p.validate()?;
                let idle = |t: f64| -> Result<SplitMap> {
                    let mut m = SplitMap::IDENTITY;
                    if enabled.relaxation {
                        m = m.then(&split(&relaxation_channel(t, p.t1)?));
                    }
                    if enabled.dephasing {
                        m = m.then(&split(&dephasing_channel(t, p.t2)?));
                    }
                    Ok(m)
                };
                let on = |flag: bool, ch: Result<KrausChannel>| -> Result<SplitMap> {
                    let ch = ch?;
                    Ok(if flag { split(&ch) } else { SplitMap::IDENTITY })
                };
                Ok(QubitMaps {
                    depol: on(enabled.depolarization, depolarizing_channel(p.p1))?,
                    gate_idle: idle(gate_duration)?,
                    measure_idle: idle(measure_duration)?,
                    prep: on(enabled.spam, spam_channel(p.p_prep))?,
                    meas: on(enabled.spam, spam_channel(p.p_meas))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(NoiseModel {
            per_qubit,
            gate_duration,
            measure_duration,
            enabled,
            maps,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.per_qubit.len()
    }

    pub fn params(&self) -> &[QubitNoiseParams] {
        &self.per_qubit
    }

    pub fn gate_duration(&self) -> f64 {
        self.gate_duration
    }

    pub fn measure_duration(&self) -> f64 {
        self.measure_duration
    }

    pub fn enabled(&self) -> ChannelToggles {
        self.enabled
    }

    /// Qubits whose parameters violate `T2 <= 2 T1`.
    pub fn unphysical_qubits(&self) -> Vec<usize> {
        self.per_qubit
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.is_physical())
            .map(|(q, _)| q)
            .collect()
    }

    pub(crate) fn maps(&self, q: usize) -> &QubitMaps {
        &self.maps[q]
    }

    fn check_size(&self, rho: &DensityMatrix) -> Result<()> {
        if self.n_qubits() == rho.n_qubits() {
            Ok(())
        } else {
            Err(Error::NoiseModelSize {
                expected: rho.n_qubits(),
                got: self.n_qubits(),
            })
        }
    }

    fn idle_channels(&self, rho: &mut DensityMatrix, duration: f64) -> Result<()> {
        for (q, p) in self.per_qubit.iter().enumerate() {
            if self.enabled.relaxation {
                rho.apply_channel(&relaxation_channel(duration, p.t1)?, &[q])?;
            }
            if self.enabled.dephasing {
                rho.apply_channel(&dephasing_channel(duration, p.t2)?, &[q])?;
            }
        }
        Ok(())
    }
}

/// Noise following a gate, applied channel by channel from Kraus
/// operators. MEASURE and RESET only idle for the measurement duration.
pub fn apply_post_gate_noise(
    rho: &mut DensityMatrix,
    gate: &Gate,
    model: &NoiseModel,
) -> Result<()> {
    model.check_size(rho)?;
    for &q in gate.targets() {
        rho.check_qubit(q)?;
    }
    if !gate.kind().is_unitary() {
        return model.idle_channels(rho, model.measure_duration);
    }
    if model.enabled.depolarization {
        let q = gate.noisy_target();
        rho.apply_channel(&depolarizing_channel(model.per_qubit[q].p1)?, &[q])?;
    }
    model.idle_channels(rho, model.gate_duration)
}

/// Bit-flip SPAM on each listed qubit.
pub fn apply_spam(
    rho: &mut DensityMatrix,
    which: SpamKind,
    qubits: &[usize],
    model: &NoiseModel,
) -> Result<()> {
    model.check_size(rho)?;
    if !model.enabled.spam {
        return qubits.iter().try_for_each(|&q| rho.check_qubit(q));
    }
    for &q in qubits {
        rho.check_qubit(q)?;
        let p = &model.per_qubit[q];
        let p2 = match which {
            SpamKind::Prep => p.p_prep,
            SpamKind::Meas => p.p_meas,
        };
        rho.apply_channel(&spam_channel(p2)?, &[q])?;
    }
    Ok(())
}
