//! Gate set and circuits.

use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::Pauli;
use crate::state::LocalOperator;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    X,
    Y,
    Z,
    H,
    Cnot,
    Cz,
    Measure,
    Reset,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::Cnot | GateKind::Cz => 2,
            _ => 1,
        }
    }

    pub fn is_unitary(self) -> bool {
        !matches!(self, GateKind::Measure | GateKind::Reset)
    }

    /// Matrix of a unitary kind; `None` for MEASURE and RESET.
    pub fn operator(self) -> Option<LocalOperator> {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let h = Complex64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
        Some(match self {
            GateKind::X => LocalOperator::single(Pauli::X.matrix()),
            GateKind::Y => LocalOperator::single(Pauli::Y.matrix()),
            GateKind::Z => LocalOperator::single(Pauli::Z.matrix()),
            GateKind::H => LocalOperator::single([h, h, h, -h]),
            GateKind::Cnot => LocalOperator::double([
                l, o, o, o, //
                o, l, o, o, //
                o, o, o, l, //
                o, o, l, o,
            ]),
            GateKind::Cz => LocalOperator::double([
                l, o, o, o, //
                o, l, o, o, //
                o, o, l, o, //
                o, o, o, -l,
            ]),
            GateKind::Measure | GateKind::Reset => return None,
        })
    }

    pub fn from_pauli(p: Pauli) -> Option<GateKind> {
        match p {
            Pauli::I => None,
            Pauli::X => Some(GateKind::X),
            Pauli::Y => Some(GateKind::Y),
            Pauli::Z => Some(GateKind::Z),
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GateKind::X => "X",
            GateKind::Y => "Y",
            GateKind::Z => "Z",
            GateKind::H => "H",
            GateKind::Cnot => "CNOT",
            GateKind::Cz => "CZ",
            GateKind::Measure => "MEASURE",
            GateKind::Reset => "RESET",
        })
    }
}

/// A gate with its targets; control first for CNOT and CZ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Gate {
    kind: GateKind,
    qubits: [usize; 2],
}

impl Gate {
    pub fn new(kind: GateKind, targets: &[usize]) -> Result<Gate> {
        if targets.len() != kind.arity() {
            return Err(Error::ArityMismatch {
                expected: kind.arity(),
                got: targets.len(),
            });
        }
        if kind.arity() == 2 && targets[0] == targets[1] {
            return Err(Error::DuplicateTargets);
        }
        let mut qubits = [targets[0]; 2];
        qubits[..targets.len()].copy_from_slice(targets);
        Ok(Gate { kind, qubits })
    }

    pub fn single(kind: GateKind, q: usize) -> Gate {
        assert_eq!(kind.arity(), 1, "{kind} takes two qubits");
        Gate {
            kind,
            qubits: [q, q],
        }
    }

    pub fn pair(kind: GateKind, control: usize, target: usize) -> Gate {
        assert_eq!(kind.arity(), 2, "{kind} takes one qubit");
        assert_ne!(control, target, "{kind} on a single qubit");
        Gate {
            kind,
            qubits: [control, target],
        }
    }

    pub fn x(q: usize) -> Gate {
        Gate::single(GateKind::X, q)
    }

    pub fn z(q: usize) -> Gate {
        Gate::single(GateKind::Z, q)
    }

    pub fn h(q: usize) -> Gate {
        Gate::single(GateKind::H, q)
    }

    pub fn cnot(control: usize, target: usize) -> Gate {
        Gate::pair(GateKind::Cnot, control, target)
    }

    pub fn cz(control: usize, target: usize) -> Gate {
        Gate::pair(GateKind::Cz, control, target)
    }

    pub fn measure(q: usize) -> Gate {
        Gate::single(GateKind::Measure, q)
    }

    pub fn reset(q: usize) -> Gate {
        Gate::single(GateKind::Reset, q)
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn targets(&self) -> &[usize] {
        &self.qubits[..self.kind.arity()]
    }

    /// The qubit that receives depolarization after the gate: the only
    /// qubit of a single-qubit gate, the target of CNOT/CZ.
    pub fn noisy_target(&self) -> usize {
        self.qubits[self.kind.arity() - 1]
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)?;
        for q in self.targets() {
            write!(f, " {q}")?;
        }
        Ok(())
    }
}

/// An ordered gate list over a fixed register.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    ops: Vec<Gate>,
    gate_duration: f64,
    measure_duration: f64,
}

impl Circuit {
    pub fn new(n_qubits: usize, gate_duration: f64) -> Circuit {
        Circuit {
            n_qubits,
            ops: Vec::new(),
            gate_duration,
            measure_duration: 0.0,
        }
    }

    #[must_use]
    pub fn with_measure_duration(mut self, t: f64) -> Circuit {
        self.measure_duration = t;
        self
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        for &q in gate.targets() {
            if q >= self.n_qubits {
                return Err(Error::QubitOutOfRange {
                    qubit: q,
                    n_qubits: self.n_qubits,
                });
            }
        }
        self.ops.push(gate);
        Ok(())
    }

    pub fn extend<I: IntoIterator<Item = Gate>>(&mut self, gates: I) -> Result<()> {
        gates.into_iter().try_for_each(|g| self.push(g))
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn ops(&self) -> &[Gate] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn gate_duration(&self) -> f64 {
        self.gate_duration
    }

    pub fn unitary_count(&self) -> usize {
        self.ops.iter().filter(|g| g.kind.is_unitary()).count()
    }

    pub fn two_qubit_count(&self) -> usize {
        self.ops.iter().filter(|g| g.kind.arity() == 2).count()
    }

    /// Unitary gates take `T_g` each; MEASURE and RESET take the measure
    /// duration (0 unless configured).
    pub fn duration(&self) -> f64 {
        let unitary = self.unitary_count();
        let other = self.ops.len() - unitary;
        unitary as f64 * self.gate_duration + other as f64 * self.measure_duration
    }
}

pub fn circuit_duration(c: &Circuit) -> f64 {
    c.duration()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gate_validation() {
        assert_eq!(
            Gate::new(GateKind::Cnot, &[1, 1]),
            Err(Error::DuplicateTargets)
        );
        assert_eq!(
            Gate::new(GateKind::H, &[0, 1]),
            Err(Error::ArityMismatch {
                expected: 1,
                got: 2
            })
        );
        let g = Gate::new(GateKind::Cz, &[2, 0]).unwrap();
        assert_eq!(g.targets(), &[2, 0]);
        assert_eq!(g.noisy_target(), 0);
        assert_eq!(Gate::x(3).noisy_target(), 3);
    }

    #[test]
    fn circuit_rejects_out_of_range() {
        let mut c = Circuit::new(2, 1e-7);
        assert!(matches!(
            c.push(Gate::cnot(0, 2)),
            Err(Error::QubitOutOfRange { .. })
        ));
    }

    #[test]
    fn durations() {
        let c = Circuit::new(3, 100e-9);
        assert_eq!(circuit_duration(&c), 0.0);
        let mut c = Circuit::new(3, 100e-9);
        c.extend([
            Gate::x(0),
            Gate::h(1),
            Gate::cnot(0, 1),
            Gate::cz(1, 2),
            Gate::z(2),
        ])
        .unwrap();
        assert!((c.duration() - 500e-9).abs() < 1e-20);
        c.extend([Gate::measure(2), Gate::reset(2)]).unwrap();
        assert!((c.duration() - 500e-9).abs() < 1e-20);
        let c = c.with_measure_duration(1e-6);
        assert!((c.duration() - 2.5e-6).abs() < 1e-18);
    }

    #[test]
    fn unitary_kinds_have_matrices() {
        for k in [
            GateKind::X,
            GateKind::Y,
            GateKind::Z,
            GateKind::H,
            GateKind::Cnot,
            GateKind::Cz,
        ] {
            let op = k.operator().unwrap();
            assert_eq!(op.arity(), k.arity());
            let prod = op.adjoint().mul(&op).unwrap();
            let d = 1 << op.arity();
            for r in 0..d {
                for c in 0..d {
                    let want = if r == c { 1.0 } else { 0.0 };
                    assert!(
                        (prod.elements()[r * d + c] - Complex64::new(want, 0.0)).norm() < 1e-15
                    );
                }
            }
        }
        assert!(GateKind::Measure.operator().is_none());
    }
}
