//! Noisy register used to execute code circuits.
//!
//! The state is kept as a tensor product of density-matrix factors. Qubits
//! only share a factor once a two-qubit gate has coupled them; measurement
//! and reset split a qubit back out exactly, since afterwards it is in a
//! known basis state. Idle noise (relaxation and dephasing after every
//! gate) is accumulated per qubit as a composed [`SplitMap`] and applied
//! in the same pass as the next gate touching that qubit, so one gate
//! costs one sweep over its factor regardless of register size.
//!
//! The result is identical to applying every channel eagerly to the full
//! density matrix, because channels on distinct qubits commute.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::gates::{Gate, GateKind};
use crate::noise::NoiseModel;
use crate::pauli::{Pauli, PauliString};
use crate::state::{map_on_pair_block, sample_outcome, Compiled, DensityMatrix};
use crate::superop::SplitMap;

#[derive(Clone, Debug)]
struct Factor {
    qubits: Vec<usize>,
    rho: DensityMatrix,
}

/// Operation counts since construction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpCounts {
    pub unitary: usize,
    pub measurements: usize,
    pub resets: usize,
}

#[derive(Clone, Debug)]
pub struct Register<'m> {
    noise: &'m NoiseModel,
    factors: Vec<Factor>,
    /// qubit -> (factor, position within factor)
    owner: Vec<(usize, usize)>,
    pending: Vec<SplitMap>,
    counts: OpCounts,
}

impl<'m> Register<'m> {
    /// All qubits in |0>, no preparation error.
    pub fn new(noise: &'m NoiseModel) -> Result<Self> {
        let n = noise.n_qubits();
        if n == 0 || n > crate::state::MAX_QUBITS {
            return Err(Error::QubitCount(n));
        }
        let zero = DensityMatrix::basis_index(1, 0)?;
        Ok(Register {
            noise,
            factors: (0..n)
                .map(|q| Factor {
                    qubits: vec![q],
                    rho: zero.clone(),
                })
                .collect(),
            owner: (0..n).map(|q| (q, 0)).collect(),
            pending: vec![SplitMap::IDENTITY; n],
            counts: OpCounts::default(),
        })
    }

    /// All qubits in |0> followed by preparation SPAM.
    pub fn prepared(noise: &'m NoiseModel) -> Result<Self> {
        let mut reg = Self::new(noise)?;
        for q in 0..reg.n_qubits() {
            reg.pending[q] = noise.maps(q).prep;
        }
        Ok(reg)
    }

    pub fn n_qubits(&self) -> usize {
        self.owner.len()
    }

    pub fn noise(&self) -> &'m NoiseModel {
        self.noise
    }

    pub fn counts(&self) -> OpCounts {
        self.counts
    }

    /// Sizes of the product factors, for diagnostics.
    pub fn factor_sizes(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.qubits.len()).collect()
    }

    fn check(&self, q: usize) -> Result<()> {
        if q < self.n_qubits() {
            Ok(())
        } else {
            Err(Error::QubitOutOfRange {
                qubit: q,
                n_qubits: self.n_qubits(),
            })
        }
    }

    fn flush(&mut self, q: usize) {
        let map = core::mem::take(&mut self.pending[q]);
        if !map.is_identity() {
            let (f, pos) = self.owner[q];
            self.factors[f]
                .rho
                .apply_map(&map, pos)
                .expect("owner table is consistent");
        }
    }

    pub fn flush_all(&mut self) {
        for q in 0..self.n_qubits() {
            self.flush(q);
        }
    }

    /// Bring `a` and `b` into one factor. Pending noise on `a` and `b` is
    /// applied first, while their factors are still small.
    fn merge(&mut self, a: usize, b: usize) {
        let (fa, _) = self.owner[a];
        let (fb, _) = self.owner[b];
        if fa == fb {
            return;
        }
        self.flush(a);
        self.flush(b);
        let (keep, gone) = (fa.min(fb), fa.max(fb));
        let other = self.factors.swap_remove(gone);
        if gone < self.factors.len() {
            // the factor previously last now sits at `gone`
            for &q in &self.factors[gone].qubits {
                self.owner[q].0 = gone;
            }
        }
        let host = &mut self.factors[keep];
        host.rho = host
            .rho
            .kron(&other.rho)
            .expect("merged register within size limit");
        let offset = host.qubits.len();
        for (i, &q) in other.qubits.iter().enumerate() {
            self.owner[q] = (keep, offset + i);
        }
        host.qubits.extend(other.qubits);
    }

    /// Remove `q` from its factor, replacing that factor with `reduced` and
    /// giving `q` its own factor `single`.
    fn split_off(&mut self, q: usize, reduced: Option<DensityMatrix>, single: DensityMatrix) {
        let (f, pos) = self.owner[q];
        if let Some(reduced) = reduced {
            let factor = &mut self.factors[f];
            factor.rho = reduced;
            factor.qubits.remove(pos);
            for (i, &p) in factor.qubits.iter().enumerate() {
                self.owner[p] = (f, i);
            }
            self.factors.push(Factor {
                qubits: vec![q],
                rho: single,
            });
            self.owner[q] = (self.factors.len() - 1, 0);
        } else {
            self.factors[f].rho = single;
        }
    }

    fn schedule_gate_noise(&mut self, gate: &Gate) {
        let noise = self.noise;
        let t = gate.noisy_target();
        self.pending[t] = self.pending[t].then(&noise.maps(t).depol);
        for (q, p) in self.pending.iter_mut().enumerate() {
            let idle = &noise.maps(q).gate_idle;
            if !idle.is_identity() {
                *p = p.then(idle);
            }
        }
    }

    fn schedule_measure_idle(&mut self) {
        let noise = self.noise;
        for (q, p) in self.pending.iter_mut().enumerate() {
            let idle = &noise.maps(q).measure_idle;
            if !idle.is_identity() {
                *p = p.then(idle);
            }
        }
    }

    /// Apply a unitary with no noise of its own; pending noise on its
    /// qubits is applied first in the same pass.
    fn apply_unitary_raw(&mut self, gate: &Gate) -> Result<()> {
        let op = gate
            .kind()
            .operator()
            .ok_or(Error::Unsupported("non-unitary gate"))?;
        for &q in gate.targets() {
            self.check(q)?;
        }
        match (op.compile(), gate.targets()) {
            (Compiled::One(k), &[q]) => {
                let pre = core::mem::take(&mut self.pending[q]);
                let (f, pos) = self.owner[q];
                let rho = &mut self.factors[f].rho;
                if pre.is_identity() {
                    rho.for_each_block1(pos, |b| k.conjugate(b));
                } else {
                    rho.for_each_block1(pos, |b| {
                        let [mut x0, mut x1, mut x2, mut x3] = *b;
                        pre.apply(&mut x0, &mut x1, &mut x2, &mut x3);
                        *b = [x0, x1, x2, x3];
                        k.conjugate(b);
                    });
                }
            }
            (Compiled::TwoMonomial(dest, phase), &[a, b]) => {
                self.merge(a, b);
                let pa = core::mem::take(&mut self.pending[a]);
                let pb = core::mem::take(&mut self.pending[b]);
                let (f, la) = self.owner[a];
                let (_, lb) = self.owner[b];
                self.factors[f]
                    .rho
                    .apply_monomial2_after(la, lb, [&pa, &pb], &dest, &phase);
            }
            (Compiled::Two(k), &[a, b]) => {
                self.merge(a, b);
                let pa = core::mem::take(&mut self.pending[a]);
                let pb = core::mem::take(&mut self.pending[b]);
                let (f, la) = self.owner[a];
                let (_, lb) = self.owner[b];
                let rho = &mut self.factors[f].rho;
                let (ia, ib) = (!pa.is_identity(), !pb.is_identity());
                rho.for_each_block2(la, lb, |blk| {
                    if ia {
                        map_on_pair_block(blk, &pa, 0);
                    }
                    if ib {
                        map_on_pair_block(blk, &pb, 1);
                    }
                    k.conjugate(blk);
                });
            }
            _ => unreachable!("gate arity matches operator"),
        }
        Ok(())
    }

    /// Unitary gate followed by its scheduled noise.
    pub fn apply_unitary(&mut self, gate: &Gate) -> Result<()> {
        self.apply_unitary_raw(gate)?;
        self.counts.unitary += 1;
        self.schedule_gate_noise(gate);
        Ok(())
    }

    /// Unitary gate with no noise at all (error injection, basis changes
    /// for readout).
    pub fn apply_noiseless(&mut self, gate: &Gate) -> Result<()> {
        self.apply_unitary_raw(gate)
    }

    pub fn inject_pauli(&mut self, q: usize, p: Pauli) -> Result<()> {
        match GateKind::from_pauli(p) {
            Some(kind) => self.apply_noiseless(&Gate::single(kind, q)),
            None => self.check(q),
        }
    }

    /// Apply any gate; MEASURE returns its outcome.
    pub fn apply<R: Rng + ?Sized>(&mut self, gate: &Gate, rng: &mut R) -> Result<Option<bool>> {
        match gate.kind() {
            GateKind::Measure => self.measure(gate.targets()[0], rng).map(Some),
            GateKind::Reset => self.reset(gate.targets()[0]).map(|_| None),
            _ => self.apply_unitary(gate).map(|_| None),
        }
    }

    /// Measurement preceded by measurement SPAM, without the idle step.
    fn sample_measurement<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Result<bool> {
        self.check(q)?;
        let map = core::mem::take(&mut self.pending[q]).then(&self.noise.maps(q).meas);
        let (f, pos) = self.owner[q];
        let rho = &self.factors[f].rho;
        let [t0, t1] = rho.outcome_probabilities(pos)?;
        let (p0, p1) = map.apply_populations(t0, t1);
        let m = sample_outcome([p0, p1], rng).ok_or(Error::DegenerateMeasurement { qubit: q })?;
        let p = if m { p1 } else { p0 };
        let single = DensityMatrix::basis_index(1, usize::from(m))?;
        let reduced = (rho.n_qubits() > 1).then(|| {
            let mut r = rho.contract_qubit(pos, map.pop[usize::from(m)]);
            r.scale(1.0 / p);
            r
        });
        self.split_off(q, reduced, single);
        Ok(m)
    }

    /// Projective Z measurement with SPAM; the qubit leaves its factor.
    pub fn measure<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Result<bool> {
        let m = self.sample_measurement(q, rng)?;
        self.counts.measurements += 1;
        self.schedule_measure_idle();
        Ok(m)
    }

    /// Trace out `q` and re-prepare it in |0> with preparation SPAM.
    pub fn reset(&mut self, q: usize) -> Result<()> {
        self.check(q)?;
        let (f, pos) = self.owner[q];
        let rho = &self.factors[f].rho;
        let reduced = (rho.n_qubits() > 1).then(|| rho.contract_qubit(pos, [1.0, 1.0]));
        self.split_off(q, reduced, DensityMatrix::basis_index(1, 0)?);
        self.pending[q] = self.noise.maps(q).prep;
        self.counts.resets += 1;
        self.schedule_measure_idle();
        Ok(())
    }

    /// Replace the correlations between `q` and the rest of the register
    /// by the product of their marginals.
    ///
    /// Only valid when `q` will be reset before interacting again: local
    /// channels on `q` never change the other qubits' reduced state, so no
    /// later observable differs.
    pub fn detach(&mut self, q: usize) -> Result<()> {
        self.check(q)?;
        let (f, pos) = self.owner[q];
        let rho = &self.factors[f].rho;
        if rho.n_qubits() == 1 {
            return Ok(());
        }
        let marginal = DensityMatrix::from_elements(1, rho.single_qubit_marginal(pos)?.to_vec())?;
        let reduced = rho.contract_qubit(pos, [1.0, 1.0]);
        self.split_off(q, Some(reduced), marginal);
        Ok(())
    }

    /// Sample all listed qubits in the Z basis at one instant, with
    /// measurement SPAM, leaving `self` untouched.
    pub fn probe<R: Rng + ?Sized>(&self, qubits: &[usize], rng: &mut R) -> Result<Vec<bool>> {
        let mut copy = self.clone();
        qubits
            .iter()
            .map(|&q| copy.sample_measurement(q, rng))
            .collect()
    }

    /// As [`Register::probe`] after an ideal Hadamard on each qubit.
    pub fn probe_x<R: Rng + ?Sized>(&self, qubits: &[usize], rng: &mut R) -> Result<Vec<bool>> {
        let mut copy = self.clone();
        for &q in qubits {
            copy.apply_unitary_raw(&Gate::h(q))?;
        }
        qubits
            .iter()
            .map(|&q| copy.sample_measurement(q, rng))
            .collect()
    }

    /// Full density matrix with all pending noise applied.
    pub fn to_density_matrix(&self) -> Result<DensityMatrix> {
        let all: Vec<usize> = (0..self.n_qubits()).collect();
        self.reduced_state(&all)
    }

    /// Reduced state of `qubits`, in the given order, with pending noise
    /// applied. Factors holding none of them are never expanded.
    pub fn reduced_state(&self, qubits: &[usize]) -> Result<DensityMatrix> {
        if qubits.is_empty() {
            return Err(Error::QubitCount(0));
        }
        let mut wanted = vec![false; self.n_qubits()];
        for &q in qubits {
            self.check(q)?;
            if core::mem::replace(&mut wanted[q], true) {
                return Err(Error::DuplicateTargets);
            }
        }
        let mut order = Vec::with_capacity(qubits.len());
        let mut acc: Option<DensityMatrix> = None;
        for f in &self.factors {
            if !f.qubits.iter().any(|&q| wanted[q]) {
                continue;
            }
            let mut rho = f.rho.clone();
            for (pos, &q) in f.qubits.iter().enumerate() {
                let map = &self.pending[q];
                if wanted[q] && !map.is_identity() {
                    rho.apply_map(map, pos)?;
                }
            }
            for (pos, &q) in f.qubits.iter().enumerate().rev() {
                if !wanted[q] {
                    rho = rho.trace_out(pos)?;
                }
            }
            order.extend(f.qubits.iter().copied().filter(|&q| wanted[q]));
            acc = Some(match acc {
                None => rho,
                Some(a) => a.kron(&rho)?,
            });
        }
        let reduced = acc.expect("at least one qubit requested");
        let position: Vec<usize> = qubits
            .iter()
            .map(|q| {
                order
                    .iter()
                    .position(|o| o == q)
                    .expect("requested qubit was collected")
            })
            .collect();
        reduced.permute_qubits(&position)
    }

    /// `<P>` for a Pauli string over the whole register.
    pub fn expectation(&self, pauli: &PauliString) -> Result<f64> {
        if pauli.len() != self.n_qubits() {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits(),
                got: pauli.len(),
            });
        }
        let mut copy = self.clone();
        copy.flush_all();
        let mut value = 1.0;
        for f in &copy.factors {
            let local = PauliString::new(f.qubits.iter().map(|&q| pauli.get(q)).collect());
            if local.weight() > 0 {
                value *= f.rho.expectation(&local)?;
            }
        }
        Ok(value)
    }
}
