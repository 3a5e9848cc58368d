//! Dense density matrices and local operator application.
//!
//! Basis convention: qubit 0 is the most-significant bit of the
//! computational-basis index, so the label `"10"` on two qubits is index 2.
//!
//! Operators on one or two qubits are applied by walking the matrix in
//! 2x2 (or 4x4) blocks that share every bit except the target bits. Each
//! block is transformed in registers and written back, so no full-size
//! operator is ever formed and every application is a single pass.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::pauli::PauliString;
use crate::superop::SplitMap;

pub const MAX_QUBITS: usize = 12;

/// Completeness tolerance for Kraus channels.
pub const COMPLETENESS_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// A 1- or 2-qubit operator, row-major. Need not be unitary.
#[derive(Clone, Debug, PartialEq)]
pub enum LocalOperator {
    Single([Complex64; 4]),
    Double([Complex64; 16]),
}

impl LocalOperator {
    pub fn single(m: [Complex64; 4]) -> Self {
        LocalOperator::Single(m)
    }

    pub fn double(m: [Complex64; 16]) -> Self {
        LocalOperator::Double(m)
    }

    pub fn arity(&self) -> usize {
        match self {
            LocalOperator::Single(_) => 1,
            LocalOperator::Double(_) => 2,
        }
    }

    pub fn elements(&self) -> &[Complex64] {
        match self {
            LocalOperator::Single(m) => m,
            LocalOperator::Double(m) => m,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.elements()
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        match self {
            LocalOperator::Single(m) => LocalOperator::Single(adjoint::<2, 4>(m)),
            LocalOperator::Double(m) => LocalOperator::Double(adjoint::<4, 16>(m)),
        }
    }

    /// Operator product `self * rhs`.
    pub fn mul(&self, rhs: &LocalOperator) -> Option<Self> {
        match (self, rhs) {
            (LocalOperator::Single(a), LocalOperator::Single(b)) => {
                Some(LocalOperator::Single(matmul::<2, 4>(a, b)))
            }
            (LocalOperator::Double(a), LocalOperator::Double(b)) => {
                Some(LocalOperator::Double(matmul::<4, 16>(a, b)))
            }
            _ => None,
        }
    }

    /// Compile into the form used by the block kernels.
    pub(crate) fn compile(&self) -> Compiled {
        match self {
            LocalOperator::Single(m) => Compiled::One(Kernel::<2, 4>::new(m)),
            LocalOperator::Double(m) => match monomial_parts::<4, 16>(m) {
                Some((dest, phase)) => Compiled::TwoMonomial(dest, phase),
                None => Compiled::Two(Kernel::<4, 16>::new(m)),
            },
        }
    }
}

fn adjoint<const D: usize, const N: usize>(m: &[Complex64; N]) -> [Complex64; N] {
    let mut out = [ZERO; N];
    for r in 0..D {
        for c in 0..D {
            out[c * D + r] = m[r * D + c].conj();
        }
    }
    out
}

fn matmul<const D: usize, const N: usize>(
    a: &[Complex64; N],
    b: &[Complex64; N],
) -> [Complex64; N] {
    let mut out = [ZERO; N];
    for r in 0..D {
        for c in 0..D {
            let mut acc = ZERO;
            for k in 0..D {
                acc += a[r * D + k] * b[k * D + c];
            }
            out[r * D + c] = acc;
        }
    }
    out
}

/// Operator prepared for conjugating blocks: `B -> U B U^dagger`.
///
/// Monomial operators (one nonzero per column: Paulis, CNOT, CZ) whose
/// phases cancel to real signs in `U B U^dagger` reduce to a signed
/// permutation of block entries. Real dense operators (H) avoid complex
/// products.
#[derive(Clone, Copy, Debug)]
pub(crate) enum Kernel<const D: usize, const N: usize> {
    Permutation {
        src: [usize; N],
    },
    SignedPermutation {
        src: [usize; N],
        sign: [f64; N],
    },
    Real {
        m: [f64; N],
    },
    Dense {
        m: [Complex64; N],
        adj: [Complex64; N],
    },
}

impl<const D: usize, const N: usize> Kernel<D, N> {
    fn new(m: &[Complex64; N]) -> Self {
        if let Some(k) = Self::monomial(m) {
            return k;
        }
        if m.iter().all(|z| z.im == 0.0) {
            return Kernel::Real { m: m.map(|z| z.re) };
        }
        Kernel::Dense {
            m: *m,
            adj: adjoint::<D, N>(m),
        }
    }

    fn monomial(m: &[Complex64; N]) -> Option<Self> {
        let (dest, phase) = monomial_parts::<D, N>(m)?;
        // out[dest r][dest c] = phase_r conj(phase_c) in[r][c]
        let mut src = [0usize; N];
        let mut sign = [0.0; N];
        for r in 0..D {
            for c in 0..D {
                let p = phase[r] * phase[c].conj();
                if p.im != 0.0 || p.re.abs() != 1.0 {
                    return None;
                }
                src[dest[r] * D + dest[c]] = r * D + c;
                sign[dest[r] * D + dest[c]] = p.re;
            }
        }
        Some(if sign.iter().all(|&s| s == 1.0) {
            Kernel::Permutation { src }
        } else {
            Kernel::SignedPermutation { src, sign }
        })
    }

    #[inline(always)]
    pub(crate) fn conjugate(&self, blk: &mut [Complex64; N]) {
        match self {
            Kernel::Permutation { src } => {
                let s = *blk;
                for i in 0..N {
                    blk[i] = s[src[i]];
                }
            }
            Kernel::SignedPermutation { src, sign } => {
                let s = *blk;
                for i in 0..N {
                    blk[i] = s[src[i]] * sign[i];
                }
            }
            Kernel::Real { m } => {
                let mut tmp = [ZERO; N];
                for r in 0..D {
                    for c in 0..D {
                        let mut acc = ZERO;
                        for k in 0..D {
                            acc += blk[k * D + c] * m[r * D + k];
                        }
                        tmp[r * D + c] = acc;
                    }
                }
                for r in 0..D {
                    for c in 0..D {
                        let mut acc = ZERO;
                        for k in 0..D {
                            acc += tmp[r * D + k] * m[c * D + k];
                        }
                        blk[r * D + c] = acc;
                    }
                }
            }
            Kernel::Dense { m, adj } => {
                let mut tmp = [ZERO; N];
                for r in 0..D {
                    for c in 0..D {
                        let mut acc = ZERO;
                        for k in 0..D {
                            acc += m[r * D + k] * blk[k * D + c];
                        }
                        tmp[r * D + c] = acc;
                    }
                }
                for r in 0..D {
                    for c in 0..D {
                        let mut acc = ZERO;
                        for k in 0..D {
                            acc += tmp[r * D + k] * adj[k * D + c];
                        }
                        blk[r * D + c] = acc;
                    }
                }
            }
        }
    }
}

/// `(dest, phase)` with `M|x> = phase[x] |dest[x]>`, if `M` has exactly
/// one nonzero per column and row.
pub(crate) fn monomial_parts<const D: usize, const N: usize>(
    m: &[Complex64; N],
) -> Option<([usize; D], [Complex64; D])> {
    let mut dest = [0usize; D];
    let mut phase = [ZERO; D];
    let mut seen = [false; D];
    for k in 0..D {
        let mut nonzero = 0;
        for r in 0..D {
            let z = m[r * D + k];
            if z != ZERO {
                nonzero += 1;
                dest[k] = r;
                phase[k] = z;
            }
        }
        if nonzero != 1 || seen[dest[k]] {
            return None;
        }
        seen[dest[k]] = true;
    }
    Some((dest, phase))
}

// built once per gate on the stack; boxing would only add an allocation
#[allow(clippy::large_enum_variant)]
pub(crate) enum Compiled {
    One(Kernel<2, 4>),
    Two(Kernel<4, 16>),
    TwoMonomial([usize; 4], [Complex64; 4]),
}

/// Apply a split map to one local qubit of a 4x4 two-qubit block.
/// `local` 0 is the more significant qubit of the block.
#[inline(always)]
pub(crate) fn map_on_pair_block(blk: &mut [Complex64; 16], map: &SplitMap, local: usize) {
    let (stride, other) = if local == 0 { (2usize, 1usize) } else { (1, 2) };
    for ro in [0, other] {
        for co in [0, other] {
            let i00 = ro * 4 + co;
            let i01 = ro * 4 + co + stride;
            let i10 = (ro + stride) * 4 + co;
            let i11 = (ro + stride) * 4 + co + stride;
            let (mut a, mut b, mut c, mut d) = (blk[i00], blk[i01], blk[i10], blk[i11]);
            map.apply(&mut a, &mut b, &mut c, &mut d);
            blk[i00] = a;
            blk[i01] = b;
            blk[i10] = c;
            blk[i11] = d;
        }
    }
}

/// [`map_on_pair_block`] over `T` blocks stored lane-wise.
#[inline(always)]
#[allow(clippy::needless_range_loop)]
fn map_on_pair_lanes<const T: usize>(blk: &mut [[Complex64; T]; 16], map: &SplitMap, local: usize) {
    let (stride, other) = if local == 0 { (2usize, 1usize) } else { (1, 2) };
    let [[p00, p01], [p10, p11]] = map.pop;
    let [[c00, c01], [c10, c11]] = map.coh;
    for ro in [0, other] {
        for co in [0, other] {
            let i00 = ro * 4 + co;
            let (i01, i10) = (i00 + stride, i00 + 4 * stride);
            let i11 = i10 + stride;
            for t in 0..T {
                let (a, b, c, d) = (blk[i00][t], blk[i01][t], blk[i10][t], blk[i11][t]);
                blk[i00][t] = a * p00 + d * p01;
                blk[i11][t] = a * p10 + d * p11;
                blk[i01][t] = b * c00 + c * c01;
                blk[i10][t] = b * c10 + c * c11;
            }
        }
    }
}

/// A finite set of Kraus operators of equal arity satisfying completeness.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    operators: Vec<LocalOperator>,
}

impl KrausChannel {
    pub fn new(operators: Vec<LocalOperator>) -> Result<Self> {
        let first = operators.first().ok_or(Error::EmptyChannel)?;
        let arity = first.arity();
        if let Some(bad) = operators.iter().find(|k| k.arity() != arity) {
            return Err(Error::ArityMismatch {
                expected: arity,
                got: bad.arity(),
            });
        }
        let channel = KrausChannel { operators };
        let deviation = channel.completeness_error();
        if deviation.is_nan() || deviation > COMPLETENESS_TOL {
            return Err(Error::IncompleteChannel { deviation });
        }
        Ok(channel)
    }

    pub fn identity() -> Self {
        KrausChannel {
            operators: vec![LocalOperator::Single([ONE, ZERO, ZERO, ONE])],
        }
    }

    pub fn arity(&self) -> usize {
        self.operators[0].arity()
    }

    pub fn operators(&self) -> &[LocalOperator] {
        &self.operators
    }

    /// `max |sum_i K_i^dagger K_i - I|`.
    pub fn completeness_error(&self) -> f64 {
        let d = 1usize << self.arity();
        let mut sum = vec![ZERO; d * d];
        for k in &self.operators {
            let m = k.elements();
            for r in 0..d {
                for c in 0..d {
                    for i in 0..d {
                        sum[r * d + c] += m[i * d + r].conj() * m[i * d + c];
                    }
                }
            }
        }
        let mut worst: f64 = 0.0;
        for r in 0..d {
            for c in 0..d {
                let target = if r == c { ONE } else { ZERO };
                worst = worst.max((sum[r * d + c] - target).norm());
            }
        }
        if worst.is_nan() {
            f64::INFINITY
        } else {
            worst
        }
    }
}

/// Density matrix of `n` qubits, `2^n x 2^n`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    fn zeros(n: usize) -> Self {
        let dim = 1usize << n;
        DensityMatrix {
            n,
            data: vec![ZERO; dim * dim],
        }
    }

    fn check_n(n: usize) -> Result<()> {
        if (1..=MAX_QUBITS).contains(&n) {
            Ok(())
        } else {
            Err(Error::QubitCount(n))
        }
    }

    /// `|b><b|` for a label such as `"010"`; character `k` is qubit `k`.
    pub fn basis_state(n: usize, label: &str) -> Result<Self> {
        Self::check_n(n)?;
        let malformed = || Error::MalformedBitstring {
            label: label.to_string(),
            n_qubits: n,
        };
        if label.len() != n {
            return Err(malformed());
        }
        let mut index = 0usize;
        for ch in label.chars() {
            index = (index << 1)
                | match ch {
                    '0' => 0,
                    '1' => 1,
                    _ => return Err(malformed()),
                };
        }
        Self::basis_index(n, index)
    }

    pub fn basis_index(n: usize, index: usize) -> Result<Self> {
        Self::check_n(n)?;
        let mut rho = Self::zeros(n);
        let dim = rho.dim();
        if index >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: index,
            });
        }
        rho.data[index * dim + index] = ONE;
        Ok(rho)
    }

    /// `|psi><psi|` after normalising `psi`.
    pub fn from_pure(psi: &[Complex64]) -> Result<Self> {
        let n = psi.len().trailing_zeros() as usize;
        if !psi.len().is_power_of_two() {
            return Err(Error::DimensionMismatch {
                expected: 1 << n.max(1),
                got: psi.len(),
            });
        }
        Self::check_n(n)?;
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if norm.is_nan() || norm <= 0.0 {
            return Err(Error::DimensionMismatch {
                expected: psi.len(),
                got: 0,
            });
        }
        let dim = psi.len();
        let mut rho = Self::zeros(n);
        for r in 0..dim {
            for c in 0..dim {
                rho.data[r * dim + c] = psi[r] * psi[c].conj() / norm;
            }
        }
        Ok(rho)
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        Self::check_n(n)?;
        let mut rho = Self::zeros(n);
        let dim = rho.dim();
        let w = 1.0 / dim as f64;
        for i in 0..dim {
            rho.data[i * dim + i] = Complex64::new(w, 0.0);
        }
        Ok(rho)
    }

    /// Raw constructor; only the shape is checked.
    pub fn from_elements(n: usize, data: Vec<Complex64>) -> Result<Self> {
        Self::check_n(n)?;
        let expected = 1usize << (2 * n);
        if data.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: data.len(),
            });
        }
        Ok(DensityMatrix { n, data })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim() + col]
    }

    pub fn elements(&self) -> &[Complex64] {
        &self.data
    }

    pub fn trace(&self) -> Complex64 {
        let dim = self.dim();
        (0..dim).map(|i| self.data[i * dim + i]).sum()
    }

    pub fn purity(&self) -> f64 {
        // Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `max |rho - rho^dagger|` entrywise.
    pub fn hermiticity_error(&self) -> f64 {
        let dim = self.dim();
        let mut worst: f64 = 0.0;
        for r in 0..dim {
            for c in r..dim {
                worst = worst.max((self.data[r * dim + c] - self.data[c * dim + r].conj()).norm());
            }
        }
        worst
    }

    /// Largest entrywise distance to another matrix of the same size.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        assert_eq!(self.n, other.n, "size mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let dim = self.dim();
        (0..dim).map(|i| self.data[i * dim + i].re).collect()
    }

    #[inline]
    fn mask(&self, q: usize) -> usize {
        1 << (self.n - 1 - q)
    }

    pub(crate) fn check_qubit(&self, q: usize) -> Result<()> {
        if q < self.n {
            Ok(())
        } else {
            Err(Error::QubitOutOfRange {
                qubit: q,
                n_qubits: self.n,
            })
        }
    }

    fn check_targets(&self, targets: &[usize], arity: usize) -> Result<()> {
        if targets.len() != arity {
            return Err(Error::ArityMismatch {
                expected: arity,
                got: targets.len(),
            });
        }
        for &t in targets {
            self.check_qubit(t)?;
        }
        if arity == 2 && targets[0] == targets[1] {
            return Err(Error::DuplicateTargets);
        }
        Ok(())
    }

    /// Visit every 2x2 block `[rho00, rho01, rho10, rho11]` of qubit `q`.
    pub(crate) fn for_each_block1<F: FnMut(&mut [Complex64; 4])>(&mut self, q: usize, mut f: F) {
        let dim = self.dim();
        let m = self.mask(q);
        let data = &mut self.data[..];
        let mut stripe = 0;
        while stripe < dim {
            for r in stripe..stripe + m {
                let (lo, hi) = data.split_at_mut((r + m) * dim);
                let row0 = &mut lo[r * dim..(r + 1) * dim];
                let row1 = &mut hi[..dim];
                for (c0, c1) in row0
                    .chunks_exact_mut(2 * m)
                    .zip(row1.chunks_exact_mut(2 * m))
                {
                    let (a0, a1) = c0.split_at_mut(m);
                    let (b0, b1) = c1.split_at_mut(m);
                    for (((x00, x01), x10), x11) in a0
                        .iter_mut()
                        .zip(a1.iter_mut())
                        .zip(b0.iter_mut())
                        .zip(b1.iter_mut())
                    {
                        let mut blk = [*x00, *x01, *x10, *x11];
                        f(&mut blk);
                        *x00 = blk[0];
                        *x01 = blk[1];
                        *x10 = blk[2];
                        *x11 = blk[3];
                    }
                }
            }
            stripe += 2 * m;
        }
    }

    /// Visit every 4x4 block of the qubit pair `(qa, qb)`. Block-local
    /// index `2 * bit(qa) + bit(qb)`, row-major.
    pub(crate) fn for_each_block2<F: FnMut(&mut [Complex64; 16])>(
        &mut self,
        qa: usize,
        qb: usize,
        mut f: F,
    ) {
        debug_assert_ne!(qa, qb);
        let dim = self.dim();
        let (ma, mb) = (self.mask(qa), self.mask(qb));
        let (hi, lo) = if ma > mb { (ma, mb) } else { (mb, ma) };
        let off = [0, mb, ma, ma | mb];
        let data = &mut self.data[..];
        let mut outer = 0;
        while outer < dim {
            let mut mid = outer;
            while mid < outer + hi {
                for r in mid..mid + lo {
                    let rows = data
                        .get_disjoint_mut([
                            (r + off[0]) * dim..(r + off[0] + 1) * dim,
                            (r + off[1]) * dim..(r + off[1] + 1) * dim,
                            (r + off[2]) * dim..(r + off[2] + 1) * dim,
                            (r + off[3]) * dim..(r + off[3] + 1) * dim,
                        ])
                        .expect("block rows are disjoint");
                    let [r0, r1, r2, r3] = rows;
                    let mut jo = 0;
                    while jo < dim {
                        let mut jm = jo;
                        while jm < jo + hi {
                            for j in jm..jm + lo {
                                let mut blk = [ZERO; 16];
                                for (k, row) in [&*r0, &*r1, &*r2, &*r3].into_iter().enumerate() {
                                    blk[k * 4] = row[j + off[0]];
                                    blk[k * 4 + 1] = row[j + off[1]];
                                    blk[k * 4 + 2] = row[j + off[2]];
                                    blk[k * 4 + 3] = row[j + off[3]];
                                }
                                f(&mut blk);
                                for (k, row) in [&mut *r0, &mut *r1, &mut *r2, &mut *r3]
                                    .into_iter()
                                    .enumerate()
                                {
                                    row[j + off[0]] = blk[k * 4];
                                    row[j + off[1]] = blk[k * 4 + 1];
                                    row[j + off[2]] = blk[k * 4 + 2];
                                    row[j + off[3]] = blk[k * 4 + 3];
                                }
                            }
                            jm += 2 * lo;
                        }
                        jo += 2 * hi;
                    }
                }
                mid += 2 * lo;
            }
            outer += 2 * hi;
        }
    }

    /// `rho -> M rho M^dagger` for a two-qubit monomial `M|x> = phase[x] |dest[x]>`
    /// (local index `2 * bit(qa) + bit(qb)`), done as a phase pass followed
    /// by row and column swaps.
    pub(crate) fn apply_monomial2(
        &mut self,
        qa: usize,
        qb: usize,
        dest: &[usize; 4],
        phase: &[Complex64; 4],
    ) {
        let dim = self.dim();
        let (ma, mb) = (self.mask(qa), self.mask(qb));
        let both = ma | mb;
        let off = [0, mb, ma, both];
        let local = |i: usize| 2 * usize::from(i & ma != 0) + usize::from(i & mb != 0);
        if phase.iter().any(|p| *p != ONE) {
            let col: Vec<Complex64> = (0..dim).map(|c| phase[local(c)].conj()).collect();
            for (r, row) in self.data.chunks_exact_mut(dim).enumerate() {
                let pr = phase[local(r)];
                if pr == ONE {
                    for (z, pc) in row.iter_mut().zip(&col) {
                        if *pc != ONE {
                            *z *= pc;
                        }
                    }
                } else {
                    for (z, pc) in row.iter_mut().zip(&col) {
                        *z *= pr * pc;
                    }
                }
            }
        }
        // new[dest[x]] = old[x] as swaps (x0, x_k) along each cycle
        let mut swaps: Vec<(usize, usize)> = Vec::new();
        let mut done = [false; 4];
        for start in 0..4 {
            if done[start] {
                continue;
            }
            done[start] = true;
            let mut x = dest[start];
            while x != start {
                swaps.push((off[start], off[x]));
                done[x] = true;
                x = dest[x];
            }
        }
        if swaps.is_empty() {
            return;
        }
        let bases: Vec<usize> = (0..dim).filter(|i| i & both == 0).collect();
        for &(x, y) in &swaps {
            let (lo, hi) = (x.min(y), x.max(y));
            for &b in &bases {
                let (head, tail) = self.data.split_at_mut((b + hi) * dim);
                head[(b + lo) * dim..(b + lo + 1) * dim].swap_with_slice(&mut tail[..dim]);
            }
        }
        for row in self.data.chunks_exact_mut(dim) {
            for &(x, y) in &swaps {
                for &b in &bases {
                    row.swap(b + x, b + y);
                }
            }
        }
    }

    /// Split maps `pre[0]` on `qa` and `pre[1]` on `qb`, then the monomial
    /// `M|x> = phase[x] |dest[x]>`, in one pass. The permutation costs
    /// nothing beyond choosing where each block element is stored.
    pub(crate) fn apply_monomial2_after(
        &mut self,
        qa: usize,
        qb: usize,
        pre: [&SplitMap; 2],
        dest: &[usize; 4],
        phase: &[Complex64; 4],
    ) {
        let mut factor = [ONE; 16];
        for r in 0..4 {
            for c in 0..4 {
                factor[r * 4 + c] = phase[r] * phase[c].conj();
            }
        }
        if factor.iter().all(|f| *f == ONE) {
            self.monomial2_pass(qa, qb, pre, dest, |_, v| v);
        } else if factor.iter().all(|f| f.im == 0.0) {
            let sign = factor.map(|f| f.re);
            self.monomial2_pass(qa, qb, pre, dest, |i, v| v * sign[i]);
        } else {
            self.monomial2_pass(qa, qb, pre, dest, |i, v| v * factor[i]);
        }
    }

    #[inline(always)]
    fn monomial2_pass<F: Fn(usize, Complex64) -> Complex64>(
        &mut self,
        qa: usize,
        qb: usize,
        pre: [&SplitMap; 2],
        dest: &[usize; 4],
        scale: F,
    ) {
        // block columns come in runs of `min(ma, mb)` consecutive indices
        match self.mask(qa).min(self.mask(qb)) {
            1 => self.monomial2_lanes::<1, F>(qa, qb, pre, dest, scale),
            2 => self.monomial2_lanes::<2, F>(qa, qb, pre, dest, scale),
            4 => self.monomial2_lanes::<4, F>(qa, qb, pre, dest, scale),
            _ => self.monomial2_lanes::<8, F>(qa, qb, pre, dest, scale),
        }
    }

    /// Works on `T` adjacent 4x4 blocks at once so the arithmetic runs
    /// across contiguous columns.
    #[inline(always)]
    fn monomial2_lanes<const T: usize, F: Fn(usize, Complex64) -> Complex64>(
        &mut self,
        qa: usize,
        qb: usize,
        pre: [&SplitMap; 2],
        dest: &[usize; 4],
        scale: F,
    ) {
        let dim = self.dim();
        let (ma, mb) = (self.mask(qa), self.mask(qb));
        let both = ma | mb;
        let off = [0, mb, ma, both];
        let out_off = dest.map(|d| off[d]);
        let (apply_a, apply_b) = (!pre[0].is_identity(), !pre[1].is_identity());
        let starts: Vec<usize> = (0..dim).step_by(T).filter(|i| i & both == 0).collect();
        let data = &mut self.data[..];
        for r in (0..dim).filter(|i| i & both == 0) {
            // row k of the block is stored to row dest[k]
            let rows = data
                .get_disjoint_mut(off.map(|o| (r + o) * dim..(r + o + 1) * dim))
                .expect("block rows are disjoint");
            for &c in &starts {
                let mut blk = [[ZERO; T]; 16];
                for k in 0..4 {
                    for l in 0..4 {
                        blk[k * 4 + l].copy_from_slice(&rows[k][c + off[l]..c + off[l] + T]);
                    }
                }
                if apply_a {
                    map_on_pair_lanes(&mut blk, pre[0], 0);
                }
                if apply_b {
                    map_on_pair_lanes(&mut blk, pre[1], 1);
                }
                for k in 0..4 {
                    let row = &mut *rows[dest[k]];
                    for l in 0..4 {
                        let i = k * 4 + l;
                        let o = &mut row[c + out_off[l]..c + out_off[l] + T];
                        for (z, v) in o.iter_mut().zip(blk[i]) {
                            *z = scale(i, v);
                        }
                    }
                }
            }
        }
    }

    /// `rho -> U rho U^dagger` on the target qubits (control first for
    /// two-qubit operators).
    pub fn apply_local(&mut self, op: &LocalOperator, targets: &[usize]) -> Result<()> {
        self.check_targets(targets, op.arity())?;
        match op.compile() {
            Compiled::One(k) => self.for_each_block1(targets[0], |b| k.conjugate(b)),
            Compiled::Two(k) => self.for_each_block2(targets[0], targets[1], |b| k.conjugate(b)),
            Compiled::TwoMonomial(dest, phase) => {
                self.apply_monomial2(targets[0], targets[1], &dest, &phase)
            }
        }
        Ok(())
    }

    /// `rho -> sum_i K_i rho K_i^dagger` on the target qubits.
    pub fn apply_channel(&mut self, channel: &KrausChannel, targets: &[usize]) -> Result<()> {
        self.check_targets(targets, channel.arity())?;
        if let Some(map) = SplitMap::from_kraus(channel) {
            self.apply_map(&map, targets[0])?;
            return Ok(());
        }
        match channel.arity() {
            1 => {
                let compiled: Vec<Compiled> = channel
                    .operators()
                    .iter()
                    .map(LocalOperator::compile)
                    .collect();
                self.for_each_block1(targets[0], |b| {
                    let src = *b;
                    let mut acc = [ZERO; 4];
                    for k in &compiled {
                        let Compiled::One(k) = k else { unreachable!() };
                        let mut t = src;
                        k.conjugate(&mut t);
                        for (a, x) in acc.iter_mut().zip(t) {
                            *a += x;
                        }
                    }
                    *b = acc;
                })
            }
            _ => {
                let kernels: Vec<Kernel<4, 16>> = channel
                    .operators()
                    .iter()
                    .map(|op| match op {
                        LocalOperator::Double(m) => Kernel::<4, 16>::new(m),
                        LocalOperator::Single(_) => unreachable!("arity checked at construction"),
                    })
                    .collect();
                self.for_each_block2(targets[0], targets[1], |b| {
                    let src = *b;
                    let mut acc = [ZERO; 16];
                    for k in &kernels {
                        let mut t = src;
                        k.conjugate(&mut t);
                        for (a, x) in acc.iter_mut().zip(t) {
                            *a += x;
                        }
                    }
                    *b = acc;
                })
            }
        }
        Ok(())
    }

    /// Apply a split-form single-qubit map.
    pub fn apply_map(&mut self, map: &SplitMap, q: usize) -> Result<()> {
        self.check_qubit(q)?;
        if map.is_identity() {
            return Ok(());
        }
        self.for_each_block1(q, |b| {
            let [mut a, mut x, mut y, mut d] = *b;
            map.apply(&mut a, &mut x, &mut y, &mut d);
            *b = [a, x, y, d];
        });
        Ok(())
    }

    /// `[Tr(P0 rho), Tr(P1 rho)]` for qubit `q`.
    pub fn outcome_probabilities(&self, q: usize) -> Result<[f64; 2]> {
        self.check_qubit(q)?;
        let dim = self.dim();
        let m = self.mask(q);
        let mut p = [0.0; 2];
        for i in 0..dim {
            p[usize::from(i & m != 0)] += self.data[i * dim + i].re;
        }
        Ok(p)
    }

    /// Projective Z measurement of qubit `q`, collapsing in place.
    pub fn measure<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Result<bool> {
        let p = self.outcome_probabilities(q)?;
        let outcome = sample_outcome(p, rng).ok_or(Error::DegenerateMeasurement { qubit: q })?;
        let m = self.mask(q);
        let dim = self.dim();
        let keep = if outcome { m } else { 0 };
        let scale = 1.0 / p[usize::from(outcome)];
        for r in 0..dim {
            for c in 0..dim {
                let z = &mut self.data[r * dim + c];
                if r & m == keep && c & m == keep {
                    *z *= scale;
                } else {
                    *z = ZERO;
                }
            }
        }
        Ok(outcome)
    }

    /// Trace out qubit `q` and re-prepare it in |0>.
    pub fn reset(&mut self, q: usize) -> Result<()> {
        self.apply_map(&SplitMap::RESET, q)
    }

    /// `<psi|rho|psi>` clamped to `[0, 1]`.
    pub fn fidelity_with_pure(&self, psi: &[Complex64]) -> Result<f64> {
        let dim = self.dim();
        if psi.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: psi.len(),
            });
        }
        let mut acc = ZERO;
        for r in 0..dim {
            if psi[r] == ZERO {
                continue;
            }
            let row = &self.data[r * dim..(r + 1) * dim];
            let inner: Complex64 = row.iter().zip(psi).map(|(x, p)| x * p).sum();
            acc += psi[r].conj() * inner;
        }
        Ok(acc.re.clamp(0.0, 1.0))
    }

    /// `Tr(P rho)` for a Pauli string over all qubits of this matrix.
    pub fn expectation(&self, pauli: &PauliString) -> Result<f64> {
        if pauli.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: pauli.len(),
            });
        }
        let (x, z, n_y) = pauli.masks();
        let dim = self.dim();
        // P|j> = i^{n_y} (-1)^{|j & z|} |j ^ x|, so Tr(P rho) = sum_j phase(j) rho[j][j ^ x]
        let mut acc = ZERO;
        for j in 0..dim {
            let v = self.data[j * dim + (j ^ x)];
            if (j & z).count_ones() % 2 == 1 {
                acc -= v;
            } else {
                acc += v;
            }
        }
        let phase = match n_y % 4 {
            0 => ONE,
            1 => Complex64::new(0.0, 1.0),
            2 => -ONE,
            _ => Complex64::new(0.0, -1.0),
        };
        Ok((phase * acc).re)
    }

    /// `self (x) other`; the qubits of `self` come first.
    pub fn kron(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        let n = self.n + other.n;
        Self::check_n(n)?;
        let (da, db) = (self.dim(), other.dim());
        let dim = da * db;
        let mut out = Vec::with_capacity(dim * dim);
        for ra in 0..da {
            for rb in 0..db {
                let brow = &other.data[rb * db..(rb + 1) * db];
                for ca in 0..da {
                    let a = self.data[ra * da + ca];
                    out.extend(brow.iter().map(|b| a * b));
                }
            }
        }
        Ok(DensityMatrix { n, data: out })
    }

    /// Reduced state after tracing out qubit `q`, optionally after applying
    /// a population-weighting map. Returns the unnormalised block
    /// `w0 * B00 + w1 * B11` where `B_kk` is the sub-matrix with qubit `q`
    /// fixed to `k`.
    pub(crate) fn contract_qubit(&self, q: usize, w: [f64; 2]) -> DensityMatrix {
        debug_assert!(self.n >= 2);
        let dim = self.dim();
        let m = self.mask(q);
        let sub = dim / 2;
        let mut out = Vec::with_capacity(sub * sub);
        let expand = |i: usize| ((i & !(m - 1)) << 1) | (i & (m - 1));
        for r in 0..sub {
            let r0 = expand(r);
            let row0 = &self.data[r0 * dim..(r0 + 1) * dim];
            let row1 = &self.data[(r0 | m) * dim..((r0 | m) + 1) * dim];
            for (a, b) in row0.chunks_exact(2 * m).zip(row1.chunks_exact(2 * m)) {
                out.extend(a[..m].iter().zip(&b[m..]).map(|(x, y)| x * w[0] + y * w[1]));
            }
        }
        DensityMatrix {
            n: self.n - 1,
            data: out,
        }
    }

    /// Reduced 2x2 state of qubit `q`, `[rho00, rho01, rho10, rho11]`.
    pub fn single_qubit_marginal(&self, q: usize) -> Result<[Complex64; 4]> {
        self.check_qubit(q)?;
        let dim = self.dim();
        let m = self.mask(q);
        let mut out = [ZERO; 4];
        for r in 0..dim {
            let a = usize::from(r & m != 0);
            let base = r & !m;
            out[a * 2] += self.data[r * dim + base];
            out[a * 2 + 1] += self.data[r * dim + (base | m)];
        }
        Ok(out)
    }

    pub(crate) fn scale(&mut self, s: f64) {
        for z in &mut self.data {
            *z *= s;
        }
    }

    /// Partial trace over qubit `q`.
    pub fn trace_out(&self, q: usize) -> Result<DensityMatrix> {
        self.check_qubit(q)?;
        if self.n == 1 {
            return Err(Error::QubitCount(0));
        }
        Ok(self.contract_qubit(q, [1.0, 1.0]))
    }

    /// Reorder qubits: new qubit `k` is old qubit `order[k]`.
    pub fn permute_qubits(&self, order: &[usize]) -> Result<DensityMatrix> {
        if order.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: order.len(),
            });
        }
        let mut seen = vec![false; self.n];
        for &o in order {
            self.check_qubit(o)?;
            if core::mem::replace(&mut seen[o], true) {
                return Err(Error::DuplicateTargets);
            }
        }
        let dim = self.dim();
        let n = self.n;
        let map_index = |new: usize| {
            let mut old = 0;
            for (k, &o) in order.iter().enumerate() {
                if new & (1 << (n - 1 - k)) != 0 {
                    old |= 1 << (n - 1 - o);
                }
            }
            old
        };
        let idx: Vec<usize> = (0..dim).map(map_index).collect();
        let mut out = Self::zeros(n);
        for r in 0..dim {
            for c in 0..dim {
                out.data[r * dim + c] = self.data[idx[r] * dim + idx[c]];
            }
        }
        Ok(out)
    }
}

/// Sample outcome `true` (= 1) with probability `p[1] / (p[0] + p[1])`.
pub(crate) fn sample_outcome<R: Rng + ?Sized>(p: [f64; 2], rng: &mut R) -> Option<bool> {
    let p0 = p[0].max(0.0);
    let p1 = p[1].max(0.0);
    let total = p0 + p1;
    if total.is_nan() || total <= 0.0 {
        return None;
    }
    let u: f64 = rng.random();
    Some(u >= p0 / total)
}
