//! Executing encoding, error-correction cycles and readout on a register.

use alloc::vec::Vec;

use rand::Rng;

use super::circuits::{self, CAT};
use super::{decode_readout, CodeId, CodeLayout, CorrectionOp, Round, Syndrome};
use crate::error::{Error, Result};
use crate::gates::{Circuit, Gate, GateKind};
use crate::register::Register;
use crate::topology::ConnectivityGraph;

pub const DEFAULT_MAX_CAT_RETRIES: usize = 10;

/// Points at which an [`Observer`] may inspect or modify the register.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[non_exhaustive]
pub enum Event {
    /// Before the gates of syndrome round `round` of a non-cat code.
    RoundStart { round: usize },
    /// After gate `gate` of a cat preparation attempt.
    CatPrepGate {
        stabilizer: usize,
        repetition: usize,
        attempt: usize,
        gate: usize,
    },
    /// Cat preparation finished, verification not yet run.
    CatPrepared {
        stabilizer: usize,
        repetition: usize,
        attempt: usize,
    },
    /// Verification rejected the cat state; all four qubits get reset.
    CatRejected {
        stabilizer: usize,
        repetition: usize,
        attempt: usize,
    },
    /// Verified cat state, before coupling to the data.
    CatVerified {
        stabilizer: usize,
        repetition: usize,
    },
}

pub trait Observer {
    fn on_event(&mut self, event: &Event, reg: &mut Register<'_>) -> Result<()>;
}

/// Observer that does nothing.
#[derive(Clone, Copy, Debug, Default)]
pub struct NoObserver;

impl Observer for NoObserver {
    fn on_event(&mut self, _: &Event, _: &mut Register<'_>) -> Result<()> {
        Ok(())
    }
}

impl<F> Observer for F
where
    F: FnMut(&Event, &mut Register<'_>) -> Result<()>,
{
    fn on_event(&mut self, event: &Event, reg: &mut Register<'_>) -> Result<()> {
        self(event, reg)
    }
}

/// What one cycle measured and did.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CycleReport {
    /// One entry per decoded round; for the cat code these are the
    /// majority-voted bits.
    pub syndromes: Vec<Syndrome>,
    /// Corrections applied, identity entries included.
    pub corrections: Vec<CorrectionOp>,
    /// Every syndrome-ancilla measurement, verification excluded.
    pub raw_bits: Vec<bool>,
    pub ancilla_rounds: usize,
    pub cat_retries: usize,
}

/// Routed gate list with precomputed detach points: a qubit whose next
/// operation is RESET is split from its factor right after its last use.
#[derive(Clone, Debug)]
struct Program {
    gates: Vec<Gate>,
    detach_after: Vec<Vec<usize>>,
}

impl Program {
    fn new(graph: &ConnectivityGraph, logical: &[Gate]) -> Result<Program> {
        let gates = circuits::route_all(graph, logical)?;
        let detach_after = gates
            .iter()
            .enumerate()
            .map(|(i, g)| {
                if !g.kind().is_unitary() {
                    return Vec::new();
                }
                g.targets()
                    .iter()
                    .copied()
                    .filter(|&q| {
                        gates[i + 1..]
                            .iter()
                            .find(|h| h.targets().contains(&q))
                            .is_some_and(|h| h.kind() == GateKind::Reset)
                    })
                    .collect()
            })
            .collect();
        Ok(Program {
            gates,
            detach_after,
        })
    }

    fn run<R: Rng + ?Sized>(
        &self,
        reg: &mut Register<'_>,
        rng: &mut R,
        mut after: impl FnMut(usize, &mut Register<'_>) -> Result<()>,
        out: &mut Vec<bool>,
    ) -> Result<()> {
        for (i, (g, detach)) in self.gates.iter().zip(&self.detach_after).enumerate() {
            if let Some(m) = reg.apply(g, rng)? {
                out.push(m);
            }
            for &q in detach {
                reg.detach(q)?;
            }
            after(i, reg)?;
        }
        Ok(())
    }

    fn run_plain<R: Rng + ?Sized>(&self, reg: &mut Register<'_>, rng: &mut R) -> Result<Vec<bool>> {
        let mut out = Vec::new();
        self.run(reg, rng, |_, _| Ok(()), &mut out)?;
        Ok(out)
    }
}

#[derive(Clone, Debug)]
struct RoundProgram {
    round: Round,
    extract: Program,
    reset: Program,
}

#[derive(Clone, Debug)]
struct CatPrograms {
    prep: Program,
    verify: Program,
    restore: Program,
    reset: Program,
    /// One per stabilizer.
    extract: Vec<Program>,
}

/// A code bound to a connectivity graph and timing, ready to run.
#[derive(Clone, Debug)]
pub struct Protocol {
    code: CodeId,
    encode: Program,
    rounds: Vec<RoundProgram>,
    cat: Option<CatPrograms>,
    extraction: Circuit,
    max_cat_retries: usize,
}

impl Protocol {
    pub fn new(
        code: CodeId,
        graph: &ConnectivityGraph,
        gate_duration: f64,
        measure_duration: f64,
    ) -> Result<Self> {
        let extraction =
            circuits::build_syndrome_extraction(code, graph, gate_duration, measure_duration)?;
        let encode = Program::new(graph, &circuits::encoding_gates(code))?;
        let rounds = code
            .rounds()
            .into_iter()
            .map(|round| {
                let ancillas = circuits::round_ancillas(code, &round);
                Ok(RoundProgram {
                    extract: Program::new(graph, &circuits::round_gates(code, &round))?,
                    reset: Program::new(graph, &circuits::reset_gates(&ancillas))?,
                    round,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let cat = match code {
            CodeId::FtSteane => Some(CatPrograms {
                prep: Program::new(graph, &circuits::cat_prep_gates())?,
                verify: Program::new(graph, &circuits::cat_verify_gates())?,
                restore: Program::new(graph, &circuits::cat_restore_gates())?,
                reset: Program::new(graph, &circuits::reset_gates(&CAT))?,
                extract: (0..6)
                    .map(|k| Program::new(graph, &circuits::cat_extract_gates(k)))
                    .collect::<Result<_>>()?,
            }),
            _ => None,
        };
        Ok(Protocol {
            code,
            encode,
            rounds,
            cat,
            extraction,
            max_cat_retries: DEFAULT_MAX_CAT_RETRIES,
        })
    }

    /// Verification failures tolerated per cat preparation before the
    /// cycle gives up.
    #[must_use]
    pub fn with_max_cat_retries(mut self, retries: usize) -> Self {
        self.max_cat_retries = retries;
        self
    }

    pub fn code(&self) -> CodeId {
        self.code
    }

    pub fn layout(&self) -> CodeLayout {
        self.code.layout()
    }

    pub fn max_cat_retries(&self) -> usize {
        self.max_cat_retries
    }

    /// Routed syndrome-extraction circuit of one cycle.
    pub fn extraction_circuit(&self) -> &Circuit {
        &self.extraction
    }

    /// Duration of one cycle's syndrome extraction.
    pub fn cycle_duration(&self) -> f64 {
        self.extraction.duration()
    }

    fn check(&self, reg: &Register<'_>) -> Result<()> {
        let n = self.layout().n_total;
        if reg.n_qubits() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: reg.n_qubits(),
            });
        }
        Ok(())
    }

    /// Encode the state on data qubit 0 (repetition and Shor codes) or
    /// project |0...0> onto the code space (Steane layouts).
    pub fn encode<R: Rng + ?Sized, O: Observer>(
        &self,
        reg: &mut Register<'_>,
        rng: &mut R,
        obs: &mut O,
    ) -> Result<CycleReport> {
        self.check(reg)?;
        match self.code {
            CodeId::Steane | CodeId::FtSteane => self.cycle(reg, rng, obs),
            _ => {
                self.encode.run_plain(reg, rng)?;
                Ok(CycleReport::default())
            }
        }
    }

    /// One round of syndrome extraction, decoding and correction.
    pub fn cycle<R: Rng + ?Sized, O: Observer>(
        &self,
        reg: &mut Register<'_>,
        rng: &mut R,
        obs: &mut O,
    ) -> Result<CycleReport> {
        self.check(reg)?;
        match &self.cat {
            Some(cat) => self.cat_cycle(cat, reg, rng, obs),
            None => self.plain_cycle(reg, rng, obs),
        }
    }

    fn plain_cycle<R: Rng + ?Sized, O: Observer>(
        &self,
        reg: &mut Register<'_>,
        rng: &mut R,
        obs: &mut O,
    ) -> Result<CycleReport> {
        let mut report = CycleReport::default();
        for (r, rp) in self.rounds.iter().enumerate() {
            obs.on_event(&Event::RoundStart { round: r }, reg)?;
            let bits = rp.extract.run_plain(reg, rng)?;
            report.ancilla_rounds += 1;
            let op = rp.round.decode(&bits)?;
            apply_correction(reg, op, rng)?;
            rp.reset.run_plain(reg, rng)?;
            report.raw_bits.extend_from_slice(&bits);
            report.syndromes.push(Syndrome { round: r, bits });
            report.corrections.push(op);
        }
        Ok(report)
    }

    fn cat_cycle<R: Rng + ?Sized, O: Observer>(
        &self,
        cat: &CatPrograms,
        reg: &mut Register<'_>,
        rng: &mut R,
        obs: &mut O,
    ) -> Result<CycleReport> {
        let mut report = CycleReport::default();
        let mut voted = [false; 6];
        for (k, extract) in cat.extract.iter().enumerate() {
            let mut votes = 0;
            for rep in 0..3 {
                self.prepare_cat(cat, k, rep, reg, rng, obs, &mut report)?;
                obs.on_event(
                    &Event::CatVerified {
                        stabilizer: k,
                        repetition: rep,
                    },
                    reg,
                )?;
                let mut bits = Vec::with_capacity(1);
                extract.run(reg, rng, |_, _| Ok(()), &mut bits)?;
                report.ancilla_rounds += 1;
                votes += usize::from(bits[0]);
                report.raw_bits.push(bits[0]);
            }
            voted[k] = votes >= 2;
        }
        // both rounds are decoded only after all six checks are in
        for (r, rp) in self.rounds.iter().enumerate() {
            let bits: Vec<bool> = rp.round.stabilizers().iter().map(|&k| voted[k]).collect();
            let op = rp.round.decode(&bits)?;
            report.syndromes.push(Syndrome { round: r, bits });
            report.corrections.push(op);
        }
        for op in report.corrections.clone() {
            apply_correction(reg, op, rng)?;
        }
        Ok(report)
    }

    #[allow(clippy::too_many_arguments)]
    fn prepare_cat<R: Rng + ?Sized, O: Observer>(
        &self,
        cat: &CatPrograms,
        stabilizer: usize,
        repetition: usize,
        reg: &mut Register<'_>,
        rng: &mut R,
        obs: &mut O,
        report: &mut CycleReport,
    ) -> Result<()> {
        let mut scratch = Vec::new();
        for attempt in 0..=self.max_cat_retries {
            cat.prep.run(
                reg,
                rng,
                |gate, reg| {
                    obs.on_event(
                        &Event::CatPrepGate {
                            stabilizer,
                            repetition,
                            attempt,
                            gate,
                        },
                        reg,
                    )
                },
                &mut scratch,
            )?;
            obs.on_event(
                &Event::CatPrepared {
                    stabilizer,
                    repetition,
                    attempt,
                },
                reg,
            )?;
            scratch.clear();
            cat.verify.run(reg, rng, |_, _| Ok(()), &mut scratch)?;
            if !scratch[0] {
                cat.restore.run_plain(reg, rng)?;
                return Ok(());
            }
            obs.on_event(
                &Event::CatRejected {
                    stabilizer,
                    repetition,
                    attempt,
                },
                reg,
            )?;
            cat.reset.run_plain(reg, rng)?;
            report.cat_retries += 1;
        }
        Err(Error::CatRetriesExhausted {
            retries: self.max_cat_retries,
        })
    }

    /// Logical Z value sampled from the data qubits with measurement SPAM.
    /// The register is left untouched.
    pub fn readout<R: Rng + ?Sized>(&self, reg: &Register<'_>, rng: &mut R) -> Result<bool> {
        self.check(reg)?;
        let data: Vec<usize> = self.layout().data_qubits().collect();
        let bits = match self.code {
            CodeId::ShorNine => reg.probe_x(&data, rng)?,
            _ => reg.probe(&data, rng)?,
        };
        decode_readout(self.code, &bits)
    }
}

fn apply_correction<R: Rng + ?Sized>(
    reg: &mut Register<'_>,
    op: CorrectionOp,
    rng: &mut R,
) -> Result<()> {
    let (Some(q), Some(kind)) = (op.target, GateKind::from_pauli(op.pauli)) else {
        return Ok(());
    };
    reg.apply(&Gate::single(kind, q), rng).map(|_| ())
}
