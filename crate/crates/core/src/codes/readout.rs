//! Classical decoding of destructive logical readout.

use super::CodeId;
use crate::error::{Error, Result};

fn majority(bits: [bool; 3]) -> bool {
    bits.iter().filter(|&&b| b).count() >= 2
}

/// Logical value from single-shot data-qubit outcomes.
///
/// * `three_qubit`: majority of the three Z outcomes.
/// * `steane`, `ft_steane`: Hamming-correct the seven Z outcomes against
///   the Z-type checks, then take the overall parity.
/// * `shor_nine`: the logical Z is `X` on all nine qubits, so `bits` are
///   X-basis outcomes; each block's parity is a copy of the logical value
///   and the three copies are majority-voted.
pub fn decode_readout(code: CodeId, bits: &[bool]) -> Result<bool> {
    let n = code.layout().n_data;
    if bits.len() != n {
        return Err(Error::MalformedSyndrome {
            expected: n,
            got: bits.len(),
        });
    }
    Ok(match code {
        CodeId::ThreeQubit => majority([bits[0], bits[1], bits[2]]),
        CodeId::Steane | CodeId::FtSteane => {
            let rounds = code.rounds();
            let stabilizers = code.stabilizers();
            let checks: alloc::vec::Vec<bool> = rounds[1]
                .stabilizers()
                .iter()
                .map(|&k| {
                    stabilizers[k]
                        .support()
                        .into_iter()
                        .fold(false, |acc, q| acc ^ bits[q])
                })
                .collect();
            let flip = rounds[1].decode(&checks)?.target;
            let parity = bits.iter().fold(false, |acc, &b| acc ^ b);
            parity ^ flip.is_some()
        }
        CodeId::ShorNine => {
            let block = |b: usize| bits[b] ^ bits[b + 1] ^ bits[b + 2];
            majority([block(0), block(3), block(6)])
        }
    })
}
