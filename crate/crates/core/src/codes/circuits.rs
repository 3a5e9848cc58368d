//! Logical gate sequences for each code, and their routed circuits.

use alloc::vec::Vec;

use super::{CodeId, Round};
use crate::error::{Error, Result};
use crate::gates::{Circuit, Gate, GateKind};
use crate::pauli::Pauli;
use crate::topology::ConnectivityGraph;

/// Cat-state ancillas of the fault-tolerant Steane layout.
pub(crate) const CAT: [usize; 4] = [7, 8, 9, 10];

pub(crate) fn encoding_gates(code: CodeId) -> Vec<Gate> {
    match code {
        CodeId::ThreeQubit => alloc::vec![Gate::cnot(0, 1), Gate::cnot(1, 2)],
        CodeId::ShorNine => {
            let mut g = alloc::vec![Gate::cnot(0, 3), Gate::cnot(0, 6)];
            g.extend([0, 3, 6].map(Gate::h));
            for b in [0, 3, 6] {
                g.extend([Gate::cnot(b, b + 1), Gate::cnot(b, b + 2)]);
            }
            g
        }
        // encoded by projecting |0...0> with a syndrome cycle
        CodeId::Steane | CodeId::FtSteane => Vec::new(),
    }
}

/// Ancilla measuring each stabilizer of `round`.
pub(crate) fn round_ancillas(code: CodeId, round: &Round) -> Vec<usize> {
    let first = code.layout().n_data;
    (0..round.stabilizers().len()).map(|i| first + i).collect()
}

/// Extraction gates for one round of a non-cat code, ending with the
/// ancilla measurements in stabilizer order.
pub(crate) fn round_gates(code: CodeId, round: &Round) -> Vec<Gate> {
    let stabilizers = code.stabilizers();
    let ancillas = round_ancillas(code, round);
    let mut g = Vec::new();
    // Z-type checks accumulate parity with CNOT(data -> ancilla); X-type
    // checks use an ancilla in |+> controlling X (or Z for Z-type in the
    // Steane layout) onto the support.
    let x_type = round.correction_pauli() == Pauli::Z;
    match code {
        CodeId::ThreeQubit | CodeId::ShorNine if !x_type => {
            for (&k, &a) in round.stabilizers().iter().zip(&ancillas) {
                g.extend(
                    stabilizers[k]
                        .support()
                        .into_iter()
                        .map(|q| Gate::cnot(q, a)),
                );
            }
        }
        CodeId::ShorNine => {
            let data = 0..code.layout().n_data;
            g.extend(data.clone().map(Gate::h));
            for (&k, &a) in round.stabilizers().iter().zip(&ancillas) {
                g.extend(
                    stabilizers[k]
                        .support()
                        .into_iter()
                        .map(|q| Gate::cnot(q, a)),
                );
            }
            g.extend(data.map(Gate::h));
        }
        _ => {
            let kind = if x_type { GateKind::Cnot } else { GateKind::Cz };
            g.extend(ancillas.iter().copied().map(Gate::h));
            for (&k, &a) in round.stabilizers().iter().zip(&ancillas) {
                g.extend(
                    stabilizers[k]
                        .support()
                        .into_iter()
                        .map(|q| Gate::pair(kind, a, q)),
                );
            }
            g.extend(ancillas.iter().copied().map(Gate::h));
        }
    }
    g.extend(ancillas.iter().copied().map(Gate::measure));
    g
}

pub(crate) fn reset_gates(qubits: &[usize]) -> Vec<Gate> {
    qubits.iter().copied().map(Gate::reset).collect()
}

pub(crate) fn cat_prep_gates() -> Vec<Gate> {
    let [a0, a1, a2, a3] = CAT;
    alloc::vec![
        Gate::h(a0),
        Gate::cnot(a0, a1),
        Gate::cnot(a1, a2),
        Gate::cnot(a2, a3)
    ]
}

/// Parity of the first and last cat qubits into the last one, then its
/// measurement. Zero for an unflipped cat state.
pub(crate) fn cat_verify_gates() -> Vec<Gate> {
    alloc::vec![Gate::cnot(CAT[0], CAT[3]), Gate::measure(CAT[3])]
}

/// Undoes the verification parity on the (now |0>) last cat qubit.
pub(crate) fn cat_restore_gates() -> Vec<Gate> {
    alloc::vec![Gate::cnot(CAT[0], CAT[3])]
}

/// Couple the verified cat state to stabilizer `k`, decode the cat and
/// measure its first qubit, then reset all four.
pub(crate) fn cat_extract_gates(k: usize) -> Vec<Gate> {
    let stabilizer = &CodeId::FtSteane.stabilizers()[k];
    let kind = if stabilizer
        .support()
        .iter()
        .any(|&q| stabilizer.get(q) == Pauli::X)
    {
        GateKind::Cnot
    } else {
        GateKind::Cz
    };
    let [a0, a1, a2, a3] = CAT;
    let mut g: Vec<Gate> = CAT
        .iter()
        .zip(stabilizer.support())
        .map(|(&a, q)| Gate::pair(kind, a, q))
        .collect();
    g.extend([
        Gate::cnot(a2, a3),
        Gate::cnot(a1, a2),
        Gate::cnot(a0, a1),
        Gate::h(a0),
        Gate::measure(a0),
    ]);
    g.extend(reset_gates(&CAT));
    g
}

pub(crate) fn route_all(graph: &ConnectivityGraph, gates: &[Gate]) -> Result<Vec<Gate>> {
    let mut out = Vec::with_capacity(gates.len());
    for &g in gates {
        out.extend(graph.route(g)?);
    }
    Ok(out)
}

fn check_graph(code: CodeId, graph: &ConnectivityGraph) -> Result<()> {
    let n = code.layout().n_total;
    if graph.n_qubits() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: graph.n_qubits(),
        });
    }
    Ok(())
}

fn circuit(
    code: CodeId,
    gates: Vec<Gate>,
    gate_duration: f64,
    measure_duration: f64,
) -> Result<Circuit> {
    let mut c =
        Circuit::new(code.layout().n_total, gate_duration).with_measure_duration(measure_duration);
    c.extend(gates)?;
    Ok(c)
}

/// Full noiseless-path syndrome-extraction pass: every round with its
/// ancilla resets, and for the cat code three repetitions per stabilizer
/// with one verification each. Data-dependent corrections are not part of
/// it.
pub(crate) fn extraction_gates(code: CodeId) -> Vec<Gate> {
    let mut g = Vec::new();
    match code {
        CodeId::FtSteane => {
            for k in 0..6 {
                for _ in 0..3 {
                    g.extend(cat_prep_gates());
                    g.extend(cat_verify_gates());
                    g.extend(cat_restore_gates());
                    g.extend(cat_extract_gates(k));
                }
            }
        }
        _ => {
            for round in code.rounds() {
                g.extend(round_gates(code, &round));
                g.extend(reset_gates(&round_ancillas(code, &round)));
            }
        }
    }
    g
}

/// Routed encoding circuit. The Steane layouts encode by running one
/// syndrome-extraction pass from |0...0>.
pub fn build_encoding(
    code: CodeId,
    graph: &ConnectivityGraph,
    gate_duration: f64,
    measure_duration: f64,
) -> Result<Circuit> {
    check_graph(code, graph)?;
    let gates = match code {
        CodeId::Steane | CodeId::FtSteane => extraction_gates(code),
        _ => encoding_gates(code),
    };
    circuit(
        code,
        route_all(graph, &gates)?,
        gate_duration,
        measure_duration,
    )
}

/// Routed syndrome-extraction circuit for one error-correction cycle.
pub fn build_syndrome_extraction(
    code: CodeId,
    graph: &ConnectivityGraph,
    gate_duration: f64,
    measure_duration: f64,
) -> Result<Circuit> {
    check_graph(code, graph)?;
    circuit(
        code,
        route_all(graph, &extraction_gates(code))?,
        gate_duration,
        measure_duration,
    )
}
