//! The four benchmark codes: layouts, stabilizers, decoding and execution.
//!
//! Data qubits are numbered `0..n_data`, ancillas follow. Qubit `k` of a
//! stabilizer or codeword label is data qubit `k`.
//!
//! | code          | data | ancillas                        |
//! |---------------|------|---------------------------------|
//! | `three_qubit` | 0-2  | 3 (q0 xor q1), 4 (q0 xor q2)    |
//! | `steane`      | 0-6  | 7, 8, 9 (K1/K4, K2/K5, K3/K6)   |
//! | `ft_steane`   | 0-6  | 7-10 (one four-qubit cat block) |
//! | `shor_nine`   | 0-8  | 9, 10                           |

mod circuits;
mod protocol;
mod readout;

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString};

pub use circuits::{build_encoding, build_syndrome_extraction};
pub use protocol::{CycleReport, Event, NoObserver, Observer, Protocol, DEFAULT_MAX_CAT_RETRIES};
pub use readout::decode_readout;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CodeId {
    ThreeQubit,
    Steane,
    FtSteane,
    ShorNine,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CodeLayout {
    pub n_data: usize,
    pub n_ancilla: usize,
    pub n_total: usize,
    /// `[[n, k, d]]` for the quantum codes; the bit-flip repetition code
    /// has no quantum distance beyond 1 and reports `None`.
    pub params: Option<[usize; 3]>,
}

impl CodeLayout {
    pub fn data_qubits(&self) -> core::ops::Range<usize> {
        0..self.n_data
    }

    pub fn ancilla_qubits(&self) -> core::ops::Range<usize> {
        self.n_data..self.n_total
    }
}

const STEANE_STABILIZERS: [&str; 6] = [
    "IIIXXXX", "XIXIXIX", "IXXIIXX", "IIIZZZZ", "ZIZIZIZ", "IZZIIZZ",
];

const SHOR_STABILIZERS: [&str; 8] = [
    "XXXXXXIII",
    "IIIXXXXXX",
    "ZZIIIIIII",
    "ZIZIIIIII",
    "IIIZZIIII",
    "IIIZIZIII",
    "IIIIIIZZI",
    "IIIIIIZIZ",
];

impl CodeId {
    pub const ALL: [CodeId; 4] = [
        CodeId::ThreeQubit,
        CodeId::Steane,
        CodeId::FtSteane,
        CodeId::ShorNine,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CodeId::ThreeQubit => "three_qubit",
            CodeId::Steane => "steane",
            CodeId::FtSteane => "ft_steane",
            CodeId::ShorNine => "shor_nine",
        }
    }

    pub fn layout(self) -> CodeLayout {
        let (n_data, n_ancilla, params) = match self {
            CodeId::ThreeQubit => (3, 2, None),
            CodeId::Steane => (7, 3, Some([7, 1, 3])),
            CodeId::FtSteane => (7, 4, Some([7, 1, 3])),
            CodeId::ShorNine => (9, 2, Some([9, 1, 3])),
        };
        CodeLayout {
            n_data,
            n_ancilla,
            n_total: n_data + n_ancilla,
            params,
        }
    }

    /// Generating set over the data qubits.
    pub fn stabilizers(self) -> Vec<PauliString> {
        let list: &[&str] = match self {
            CodeId::ThreeQubit => &["ZZI", "ZIZ"],
            CodeId::Steane | CodeId::FtSteane => &STEANE_STABILIZERS,
            CodeId::ShorNine => &SHOR_STABILIZERS,
        };
        list.iter()
            .map(|s| s.parse().expect("valid stabilizer literal"))
            .collect()
    }

    /// Syndrome rounds in execution order.
    pub fn rounds(self) -> Vec<Round> {
        let stabilizers = self.stabilizers();
        let terms: &[(&[usize], Pauli)] = match self {
            CodeId::ThreeQubit => &[(&[0, 1], Pauli::X)],
            CodeId::Steane | CodeId::FtSteane => &[(&[0, 1, 2], Pauli::Z), (&[3, 4, 5], Pauli::X)],
            CodeId::ShorNine => &[
                (&[0, 1], Pauli::Z),
                (&[2, 3], Pauli::X),
                (&[4, 5], Pauli::X),
                (&[6, 7], Pauli::X),
            ],
        };
        terms
            .iter()
            .map(|(idx, correction)| Round::new(&stabilizers, idx, *correction))
            .collect()
    }
}

impl fmt::Display for CodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CodeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .map(|c| {
                if c == '-' {
                    '_'
                } else {
                    c.to_ascii_lowercase()
                }
            })
            .collect();
        match key.as_str() {
            "three_qubit" | "three" | "3" => Ok(CodeId::ThreeQubit),
            "steane" => Ok(CodeId::Steane),
            "ft_steane" => Ok(CodeId::FtSteane),
            "shor_nine" | "shor" | "shor9" => Ok(CodeId::ShorNine),
            _ => Err(Error::Config {
                field: "code",
                reason: alloc::format!("unknown code {s:?}"),
            }),
        }
    }
}

/// One syndrome-extraction round: which stabilizers are measured and which
/// Pauli corrects the errors they detect.
#[derive(Clone, Debug, PartialEq)]
pub struct Round {
    stabilizers: Vec<usize>,
    correction: Pauli,
    /// syndrome (bit `i` of the index is stabilizer `i` of the round) ->
    /// data qubit to correct
    table: Vec<Option<usize>>,
}

impl Round {
    /// The decode table comes from enumerating single-qubit errors of the
    /// correcting type: each syndrome maps to the lowest-numbered qubit
    /// whose error produces it.
    fn new(all: &[PauliString], indices: &[usize], correction: Pauli) -> Round {
        let n_data = all[0].len();
        let mut table = vec![None; 1 << indices.len()];
        for q in 0..n_data {
            let err = PauliString::single(n_data, q, correction);
            let s = indices
                .iter()
                .enumerate()
                .filter(|(_, &k)| !all[k].commutes_with(&err))
                .fold(0, |acc, (i, _)| acc | (1 << i));
            if s != 0 && table[s].is_none() {
                table[s] = Some(q);
            }
        }
        Round {
            stabilizers: indices.to_vec(),
            correction,
            table,
        }
    }

    /// Indices into the code's stabilizer list.
    pub fn stabilizers(&self) -> &[usize] {
        &self.stabilizers
    }

    pub fn correction_pauli(&self) -> Pauli {
        self.correction
    }

    pub fn decode(&self, bits: &[bool]) -> Result<CorrectionOp> {
        if bits.len() != self.stabilizers.len() {
            return Err(Error::MalformedSyndrome {
                expected: self.stabilizers.len(),
                got: bits.len(),
            });
        }
        let s = bits
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &b)| acc | (usize::from(b) << i));
        Ok(match self.table[s] {
            Some(q) => CorrectionOp {
                pauli: self.correction,
                target: Some(q),
            },
            None => CorrectionOp::IDENTITY,
        })
    }
}

/// Measured syndrome bits of one round, in the round's stabilizer order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Syndrome {
    pub round: usize,
    pub bits: Vec<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CorrectionOp {
    pub pauli: Pauli,
    pub target: Option<usize>,
}

impl CorrectionOp {
    pub const IDENTITY: CorrectionOp = CorrectionOp {
        pauli: Pauli::I,
        target: None,
    };

    pub fn is_identity(&self) -> bool {
        self.target.is_none()
    }
}

pub fn stabilizer_operators(code: CodeId) -> Vec<PauliString> {
    code.stabilizers()
}

pub fn decode_syndrome(code: CodeId, syndrome: &Syndrome) -> Result<CorrectionOp> {
    let rounds = code.rounds();
    let round = rounds.get(syndrome.round).ok_or(Error::MalformedSyndrome {
        expected: rounds.len(),
        got: syndrome.round,
    })?;
    round.decode(&syndrome.bits)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(round: usize, bits: &[u8]) -> Syndrome {
        Syndrome {
            round,
            bits: bits.iter().map(|&b| b == 1).collect(),
        }
    }

    #[test]
    fn layouts() {
        let want = [(3, 2, 5), (7, 3, 10), (7, 4, 11), (9, 2, 11)];
        for (code, (d, a, t)) in CodeId::ALL.into_iter().zip(want) {
            let l = code.layout();
            assert_eq!((l.n_data, l.n_ancilla, l.n_total), (d, a, t), "{code}");
        }
    }

    #[test]
    fn steane_stabilizers_in_order() {
        let got: Vec<String> = CodeId::Steane
            .stabilizers()
            .iter()
            .map(|p| alloc::format!("{p}"))
            .collect();
        assert_eq!(got, STEANE_STABILIZERS);
    }

    #[test]
    fn three_qubit_table() {
        let code = CodeId::ThreeQubit;
        assert_eq!(
            decode_syndrome(code, &s(0, &[0, 0])).unwrap(),
            CorrectionOp::IDENTITY
        );
        let x = |q| CorrectionOp {
            pauli: Pauli::X,
            target: Some(q),
        };
        assert_eq!(decode_syndrome(code, &s(0, &[1, 1])).unwrap(), x(0));
        assert_eq!(decode_syndrome(code, &s(0, &[1, 0])).unwrap(), x(1));
        assert_eq!(decode_syndrome(code, &s(0, &[0, 1])).unwrap(), x(2));
        assert!(matches!(
            decode_syndrome(code, &s(0, &[1])),
            Err(Error::MalformedSyndrome { .. })
        ));
        assert!(matches!(
            decode_syndrome(code, &s(1, &[1, 1])),
            Err(Error::MalformedSyndrome { .. })
        ));
    }

    #[test]
    fn steane_table_matches_weighted_index() {
        // 1-based qubit i = M2 + 2 M3 + 4 M1 for (M1, M2, M3)
        for round in 0..2 {
            for m in 1..8u8 {
                let (m1, m2, m3) = (m >> 2 & 1, m & 1, m >> 1 & 1);
                let op = decode_syndrome(CodeId::Steane, &s(round, &[m1, m2, m3])).unwrap();
                let i = usize::from(m2 + 2 * m3 + 4 * m1);
                assert_eq!(op.target, Some(i - 1));
                assert_eq!(op.pauli, if round == 0 { Pauli::Z } else { Pauli::X });
            }
        }
        let op = decode_syndrome(CodeId::Steane, &s(1, &[1, 1, 1])).unwrap();
        assert_eq!(
            op,
            CorrectionOp {
                pauli: Pauli::X,
                target: Some(6)
            }
        );
    }

    #[test]
    fn shor_phase_table_picks_first_qubit_of_block() {
        let z = |q| CorrectionOp {
            pauli: Pauli::Z,
            target: Some(q),
        };
        assert_eq!(
            decode_syndrome(CodeId::ShorNine, &s(0, &[1, 0])).unwrap(),
            z(0)
        );
        assert_eq!(
            decode_syndrome(CodeId::ShorNine, &s(0, &[1, 1])).unwrap(),
            z(3)
        );
        assert_eq!(
            decode_syndrome(CodeId::ShorNine, &s(0, &[0, 1])).unwrap(),
            z(6)
        );
        let x = |q| CorrectionOp {
            pauli: Pauli::X,
            target: Some(q),
        };
        assert_eq!(
            decode_syndrome(CodeId::ShorNine, &s(2, &[1, 1])).unwrap(),
            x(3)
        );
        assert_eq!(
            decode_syndrome(CodeId::ShorNine, &s(3, &[0, 1])).unwrap(),
            x(8)
        );
    }

    #[test]
    fn stabilizers_commute() {
        for code in CodeId::ALL {
            let st = code.stabilizers();
            for a in &st {
                for b in &st {
                    assert!(a.commutes_with(b), "{code}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn parse_names() {
        for code in CodeId::ALL {
            assert_eq!(code.name().parse::<CodeId>().unwrap(), code);
        }
        assert_eq!("ft-steane".parse::<CodeId>().unwrap(), CodeId::FtSteane);
        assert!("surface".parse::<CodeId>().is_err());
    }
}
