//! Qubit connectivity and routing of two-qubit gates onto adjacent pairs.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::gates::{Gate, GateKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Topology {
    AllToAll,
    Line,
    /// Row-major numbering: qubit `r * cols + c`.
    SquareLattice {
        rows: usize,
        cols: usize,
    },
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Topology::AllToAll => f.write_str("all-to-all"),
            Topology::Line => f.write_str("line"),
            Topology::SquareLattice { rows, cols } => write!(f, "square-lattice({rows}x{cols})"),
        }
    }
}

/// Factorisation `rows x cols = n` with `rows <= cols` closest to square.
pub fn near_square(n: usize) -> (usize, usize) {
    let mut rows = 1;
    let mut r = 1;
    while r * r <= n {
        if n % r == 0 {
            rows = r;
        }
        r += 1;
    }
    (rows, n / rows.max(1))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConnectivityGraph {
    topology: Topology,
    n_qubits: usize,
}

impl ConnectivityGraph {
    pub fn new(topology: Topology, n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::Topology(format!("{topology} with no qubits")));
        }
        if let Topology::SquareLattice { rows, cols } = topology {
            if rows * cols != n_qubits {
                return Err(Error::Topology(format!(
                    "{rows}x{cols} lattice cannot hold {n_qubits} qubits"
                )));
            }
        }
        Ok(ConnectivityGraph { topology, n_qubits })
    }

    pub fn all_to_all(n: usize) -> Result<Self> {
        Self::new(Topology::AllToAll, n)
    }

    pub fn line(n: usize) -> Result<Self> {
        Self::new(Topology::Line, n)
    }

    pub fn square_lattice(rows: usize, cols: usize) -> Result<Self> {
        Self::new(Topology::SquareLattice { rows, cols }, rows * cols)
    }

    /// Square lattice with the most nearly square shape holding `n` qubits.
    pub fn square_default(n: usize) -> Result<Self> {
        let (rows, cols) = near_square(n);
        Self::new(Topology::SquareLattice { rows, cols }, n)
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn check(&self, q: usize) -> Result<()> {
        if q < self.n_qubits {
            Ok(())
        } else {
            Err(Error::QubitOutOfRange {
                qubit: q,
                n_qubits: self.n_qubits,
            })
        }
    }

    fn adjacent(&self, a: usize, b: usize) -> bool {
        if a == b {
            return false;
        }
        match self.topology {
            Topology::AllToAll => true,
            Topology::Line => a.abs_diff(b) == 1,
            Topology::SquareLattice { cols, .. } => {
                let (ra, ca) = (a / cols, a % cols);
                let (rb, cb) = (b / cols, b % cols);
                ra.abs_diff(rb) + ca.abs_diff(cb) == 1
            }
        }
    }

    pub fn is_adjacent(&self, a: usize, b: usize) -> Result<bool> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.adjacent(a, b))
    }

    /// Neighbours in increasing order.
    pub fn neighbors(&self, q: usize) -> Vec<usize> {
        (0..self.n_qubits)
            .filter(|&b| self.adjacent(q, b))
            .collect()
    }

    /// Minimal path `a -> b`; ties go to the smallest neighbour at each step.
    pub fn shortest_path(&self, a: usize, b: usize) -> Result<Vec<usize>> {
        self.check(a)?;
        self.check(b)?;
        if a == b {
            return Err(Error::DuplicateTargets);
        }
        // distances to b, then walk greedily from a
        let mut dist = vec![usize::MAX; self.n_qubits];
        dist[b] = 0;
        let mut queue = VecDeque::from([b]);
        while let Some(q) = queue.pop_front() {
            for nb in self.neighbors(q) {
                if dist[nb] == usize::MAX {
                    dist[nb] = dist[q] + 1;
                    queue.push_back(nb);
                }
            }
        }
        if dist[a] == usize::MAX {
            return Err(Error::Topology(format!(
                "qubits {a} and {b} are disconnected"
            )));
        }
        let mut path = vec![a];
        let mut cur = a;
        while cur != b {
            cur = self
                .neighbors(cur)
                .into_iter()
                .find(|&nb| dist[nb] + 1 == dist[cur])
                .expect("bfs distances are consistent");
            path.push(cur);
        }
        Ok(path)
    }

    /// Adjacent-only gate sequence equal to `kind(control, target)`.
    ///
    /// Distance 2 uses `CNOT(a,b) G(b,c) CNOT(a,b) G(b,c)`. Longer
    /// distances swap the target along the path until it is two steps from
    /// the control, apply that identity, and swap back.
    pub fn route_two_qubit(
        &self,
        kind: GateKind,
        control: usize,
        target: usize,
    ) -> Result<Vec<Gate>> {
        if kind.arity() != 2 || !kind.is_unitary() {
            return Err(Error::ArityMismatch {
                expected: 2,
                got: kind.arity(),
            });
        }
        let path = self.shortest_path(control, target)?;
        let d = path.len() - 1;
        if d == 1 {
            return Ok(vec![Gate::pair(kind, control, target)]);
        }
        let mut swaps = Vec::new();
        for k in (3..=d).rev() {
            let (a, b) = (path[k - 1], path[k]);
            swaps.extend([Gate::cnot(a, b), Gate::cnot(b, a), Gate::cnot(a, b)]);
        }
        let (mid, end) = (path[1], path[2]);
        let mut out = swaps.clone();
        out.extend([
            Gate::cnot(control, mid),
            Gate::pair(kind, mid, end),
            Gate::cnot(control, mid),
            Gate::pair(kind, mid, end),
        ]);
        out.extend(swaps.into_iter().rev());
        Ok(out)
    }

    /// Route one gate; single-qubit gates pass through.
    pub fn route(&self, gate: Gate) -> Result<Vec<Gate>> {
        for &q in gate.targets() {
            self.check(q)?;
        }
        match gate.targets() {
            [c, t] => self.route_two_qubit(gate.kind(), *c, *t),
            _ => Ok(vec![gate]),
        }
    }
}
