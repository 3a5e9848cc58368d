//! Single-qubit maps that keep populations and coherences separate.
//!
//! Every noise process in the model (depolarization, relaxation, dephasing,
//! bit-flip SPAM) and reset has a superoperator of this form, with real
//! coefficients. Writing a qubit's 2x2 block as `[[a, b], [c, d]]`:
//!
//! ```text
//! a' = pop[0][0] a + pop[0][1] d      b' = coh[0][0] b + coh[0][1] c
//! d' = pop[1][0] a + pop[1][1] d      c' = coh[1][0] b + coh[1][1] c
//! ```
//!
//! The form is closed under composition, which lets the register fold many
//! idle steps into one pass over the density matrix.

use num_complex::Complex64;

use crate::state::KrausChannel;

/// Tolerance used when recognising the split structure of a Kraus channel.
const STRUCTURE_TOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitMap {
    pub pop: [[f64; 2]; 2],
    pub coh: [[f64; 2]; 2],
}

impl Default for SplitMap {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl SplitMap {
    pub const IDENTITY: SplitMap = SplitMap {
        pop: [[1.0, 0.0], [0.0, 1.0]],
        coh: [[1.0, 0.0], [0.0, 1.0]],
    };

    /// Trace out the qubit and re-prepare it in |0>.
    pub const RESET: SplitMap = SplitMap {
        pop: [[1.0, 1.0], [0.0, 0.0]],
        coh: [[0.0, 0.0], [0.0, 0.0]],
    };

    pub fn is_identity(&self) -> bool {
        *self == Self::IDENTITY
    }

    /// `other` applied after `self`.
    #[must_use]
    pub fn then(&self, other: &SplitMap) -> SplitMap {
        SplitMap {
            pop: mat_mul(&other.pop, &self.pop),
            coh: mat_mul(&other.coh, &self.coh),
        }
    }

    /// Block entries in `[rho00, rho01, rho10, rho11]` order.
    #[inline(always)]
    pub fn apply(
        &self,
        a: &mut Complex64,
        b: &mut Complex64,
        c: &mut Complex64,
        d: &mut Complex64,
    ) {
        let (a0, b0, c0, d0) = (*a, *b, *c, *d);
        *a = a0 * self.pop[0][0] + d0 * self.pop[0][1];
        *d = a0 * self.pop[1][0] + d0 * self.pop[1][1];
        *b = b0 * self.coh[0][0] + c0 * self.coh[0][1];
        *c = b0 * self.coh[1][0] + c0 * self.coh[1][1];
    }

    /// Action on a probability vector `[p0, p1]` (the diagonal of the block).
    #[inline]
    pub fn apply_populations(&self, p0: f64, p1: f64) -> (f64, f64) {
        (
            self.pop[0][0] * p0 + self.pop[0][1] * p1,
            self.pop[1][0] * p0 + self.pop[1][1] * p1,
        )
    }

    /// Recognise a single-qubit Kraus channel of split form.
    ///
    /// Returns `None` when the superoperator mixes populations with
    /// coherences or has complex coefficients.
    pub fn from_kraus(channel: &KrausChannel) -> Option<SplitMap> {
        if channel.arity() != 1 {
            return None;
        }
        // S[(r, c)][(k, l)] = sum_i K[r][k] conj(K[c][l]), block index r*2+c
        let mut s = [[Complex64::new(0.0, 0.0); 4]; 4];
        for op in channel.operators() {
            let m = op.elements();
            for (out, row) in s.iter_mut().enumerate() {
                let (r, c) = (out >> 1, out & 1);
                for (inp, entry) in row.iter_mut().enumerate() {
                    let (k, l) = (inp >> 1, inp & 1);
                    *entry += m[r * 2 + k] * m[c * 2 + l].conj();
                }
            }
        }
        let small = |z: Complex64| z.norm() <= STRUCTURE_TOL;
        let real = |z: Complex64| -> Option<f64> { (z.im.abs() <= STRUCTURE_TOL).then_some(z.re) };
        // populations (0, 3) must not couple to coherences (1, 2)
        for &p in &[0usize, 3] {
            for &q in &[1usize, 2] {
                if !small(s[p][q]) || !small(s[q][p]) {
                    return None;
                }
            }
        }
        Some(SplitMap {
            pop: [
                [real(s[0][0])?, real(s[0][3])?],
                [real(s[3][0])?, real(s[3][3])?],
            ],
            coh: [
                [real(s[1][1])?, real(s[1][2])?],
                [real(s[2][1])?, real(s[2][2])?],
            ],
        })
    }
}

fn mat_mul(a: &[[f64; 2]; 2], b: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}
