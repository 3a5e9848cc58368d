//! Pauli operators and strings.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_complex::Complex64;

use crate::error::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> [Complex64; 4] {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            Pauli::I => [l, o, o, l],
            Pauli::X => [o, l, l, o],
            Pauli::Y => [o, -i, i, o],
            Pauli::Z => [l, o, o, -l],
        }
    }

    /// (has X component, has Z component)
    pub fn xz(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn from_xz(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn commutes_with(self, other: Pauli) -> bool {
        let (ax, az) = self.xz();
        let (bx, bz) = other.xz();
        (ax & bz) == (az & bx)
    }

    fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Tensor product of single-qubit Paulis; character `k` acts on qubit `k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString(Vec<Pauli>);

impl PauliString {
    pub fn new(paulis: Vec<Pauli>) -> Self {
        PauliString(paulis)
    }

    pub fn identity(n: usize) -> Self {
        PauliString(alloc::vec![Pauli::I; n])
    }

    /// `pauli` on `qubit`, identity elsewhere.
    pub fn single(n: usize, qubit: usize, pauli: Pauli) -> Self {
        let mut s = Self::identity(n);
        s.0[qubit] = pauli;
        s
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn paulis(&self) -> &[Pauli] {
        &self.0
    }

    pub fn get(&self, qubit: usize) -> Pauli {
        self.0[qubit]
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|p| **p != Pauli::I).count()
    }

    /// Qubits acted on non-trivially.
    pub fn support(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, p)| **p != Pauli::I)
            .map(|(q, _)| q)
            .collect()
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        assert_eq!(self.len(), other.len(), "length mismatch");
        let anti = self
            .0
            .iter()
            .zip(&other.0)
            .filter(|(a, b)| !a.commutes_with(**b))
            .count();
        anti % 2 == 0
    }

    /// Product up to phase.
    pub fn mul_ignoring_phase(&self, other: &PauliString) -> PauliString {
        assert_eq!(self.len(), other.len(), "length mismatch");
        PauliString(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| {
                    let (ax, az) = a.xz();
                    let (bx, bz) = b.xz();
                    Pauli::from_xz(ax ^ bx, az ^ bz)
                })
                .collect(),
        )
    }

    /// Pad with identities up to `n` qubits.
    pub fn extended(&self, n: usize) -> PauliString {
        let mut v = self.0.clone();
        v.resize(n.max(v.len()), Pauli::I);
        PauliString(v)
    }

    /// Basis-index masks `(x, z, number of Y)` with qubit 0 the most
    /// significant bit.
    pub fn masks(&self) -> (usize, usize, usize) {
        let n = self.len();
        let mut x = 0;
        let mut z = 0;
        let mut y = 0;
        for (q, p) in self.0.iter().enumerate() {
            let bit = 1 << (n - 1 - q);
            let (px, pz) = p.xz();
            if px {
                x |= bit;
            }
            if pz {
                z |= bit;
            }
            if px && pz {
                y += 1;
            }
        }
        (x, z, y)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.0.iter().map(|p| p.symbol()).collect();
        f.write_str(&s)
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        s.chars()
            .map(|c| match c {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                _ => Err(Error::Config {
                    field: "pauli",
                    reason: alloc::format!("unknown symbol {c:?} in {s:?}"),
                }),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(PauliString)
    }
}
