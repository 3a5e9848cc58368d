//! Reference implementations for integration and acceptance tests.
//!
//! Everything here works on full `2^n x 2^n` nalgebra matrices built from
//! textbook definitions and shares no kernel code with the crate under test.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use qecbench_core::{DensityMatrix, Gate, GateKind, LocalOperator};
use rand::Rng;

pub type M = DMatrix<Complex64>;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn ci(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn local_matrix(elems: &[Complex64]) -> M {
    let d = if elems.len() == 4 { 2 } else { 4 };
    M::from_row_slice(d, d, elems)
}

/// Textbook matrix of a unitary gate kind.
pub fn gate_matrix(kind: GateKind) -> M {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let v: Vec<Complex64> = match kind {
        GateKind::X => vec![c(0.), c(1.), c(1.), c(0.)],
        GateKind::Y => vec![c(0.), ci(0., -1.), ci(0., 1.), c(0.)],
        GateKind::Z => vec![c(1.), c(0.), c(0.), c(-1.)],
        GateKind::H => vec![c(s), c(s), c(s), c(-s)],
        GateKind::Cnot => {
            let mut m = vec![c(0.); 16];
            for (i, j) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
                m[i * 4 + j] = c(1.);
            }
            m
        }
        GateKind::Cz => {
            let mut m = vec![c(0.); 16];
            for i in 0..4 {
                m[i * 5] = c(if i == 3 { -1. } else { 1. });
            }
            m
        }
        GateKind::Measure | GateKind::Reset => panic!("not unitary"),
    };
    local_matrix(&v)
}

/// `op` acting on `targets` of an `n`-qubit register (qubit 0 is the
/// most significant bit, `targets[0]` the most significant local bit).
pub fn embed(n: usize, targets: &[usize], op: &M) -> M {
    let dim = 1 << n;
    let bit = |i: usize, q: usize| (i >> (n - 1 - q)) & 1;
    let local = |i: usize| targets.iter().fold(0, |acc, &q| (acc << 1) | bit(i, q));
    let mask: usize = targets.iter().map(|&q| 1 << (n - 1 - q)).sum();
    M::from_fn(dim, dim, |i, j| {
        if i & !mask == j & !mask {
            op[(local(i), local(j))]
        } else {
            c(0.)
        }
    })
}

pub fn gate_unitary(n: usize, g: &Gate) -> M {
    embed(n, g.targets(), &gate_matrix(g.kind()))
}

/// Product of a gate sequence, first gate rightmost.
pub fn circuit_unitary(n: usize, gates: &[Gate]) -> M {
    gates
        .iter()
        .fold(M::identity(1 << n, 1 << n), |u, g| gate_unitary(n, g) * u)
}

pub fn to_matrix(rho: &DensityMatrix) -> M {
    let d = rho.dim();
    M::from_row_slice(d, d, rho.elements())
}

pub fn from_matrix(m: &M) -> DensityMatrix {
    let n = m.nrows().trailing_zeros() as usize;
    let data: Vec<Complex64> = (0..m.nrows())
        .flat_map(|i| (0..m.ncols()).map(move |j| m[(i, j)]))
        .collect();
    DensityMatrix::from_elements(n, data).unwrap()
}

pub fn kraus_apply(rho: &M, ops: &[M]) -> M {
    ops.iter()
        .fold(M::zeros(rho.nrows(), rho.ncols()), |acc, k| {
            acc + k * rho * k.adjoint()
        })
}

pub fn local_ops(ops: &[LocalOperator]) -> Vec<M> {
    ops.iter().map(|k| local_matrix(k.elements())).collect()
}

pub fn max_entry_diff(a: &M, b: &M) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Haar-ish random mixed state: a random convex mixture of random pure
/// states with Gaussian amplitudes.
pub fn random_density<R: Rng>(n: usize, rng: &mut R) -> M {
    let d = 1 << n;
    let mut rho = M::zeros(d, d);
    let k = rng.random_range(1..=3);
    let mut weights: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    for w in weights {
        let psi: Vec<Complex64> = (0..d)
            .map(|_| {
                let g: f64 = rng.sample(rand_distr::StandardNormal);
                let h: f64 = rng.sample(rand_distr::StandardNormal);
                ci(g, h)
            })
            .collect();
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let v = nalgebra::DVector::from_iterator(d, psi.into_iter().map(|z| z / norm));
        rho += (&v * v.adjoint()) * c(w);
    }
    rho
}

pub fn projector(n: usize, q: usize, outcome: bool) -> M {
    let p = if outcome {
        local_matrix(&[c(0.), c(0.), c(0.), c(1.)])
    } else {
        local_matrix(&[c(1.), c(0.), c(0.), c(0.)])
    };
    embed(n, &[q], &p)
}

/// Depolarizing Kraus set from its definition.
pub fn depolarizing(p: f64) -> Vec<M> {
    let s = (p / 3.0).sqrt();
    vec![
        M::identity(2, 2) * c((1.0 - p).sqrt()),
        gate_matrix(GateKind::X) * c(s),
        gate_matrix(GateKind::Y) * c(s),
        gate_matrix(GateKind::Z) * c(s),
    ]
}

/// Exact probability that the first readout after one noisy cycle of the
/// three-qubit code decodes to 1, under depolarization only.
///
/// The syndrome measurements are not sampled: every one of the four
/// outcome branches is carried forward with its (unnormalized) weight,
/// corrected, and the failure probability is summed over branches.
pub fn three_qubit_first_cycle_failure(p1: f64) -> f64 {
    let n = 5;
    let dep = depolarizing(p1);
    let gate = |rho: &M, g: Gate| -> M {
        let u = gate_unitary(n, &g);
        let r = &u * rho * u.adjoint();
        // depolarization lands on the target of two-qubit gates
        let q = *g.targets().last().unwrap();
        let ks: Vec<M> = dep.iter().map(|k| embed(n, &[q], k)).collect();
        kraus_apply(&r, &ks)
    };
    let mut rho = M::zeros(32, 32);
    rho[(0, 0)] = c(1.0);
    for g in [Gate::cnot(0, 1), Gate::cnot(1, 2)] {
        rho = gate(&rho, g);
    }
    for g in [
        Gate::cnot(0, 3),
        Gate::cnot(1, 3),
        Gate::cnot(0, 4),
        Gate::cnot(2, 4),
    ] {
        rho = gate(&rho, g);
    }
    let mut fail = 0.0;
    for s0 in [false, true] {
        for s1 in [false, true] {
            let p = projector(n, 3, s0) * projector(n, 4, s1);
            let mut branch = &p * &rho * p.adjoint();
            // ZZI flags qubits 0 and 1, ZIZ flags 0 and 2
            let flip = match (s0, s1) {
                (false, false) => None,
                (true, true) => Some(0),
                (true, false) => Some(1),
                (false, true) => Some(2),
            };
            if let Some(q) = flip {
                branch = gate(&branch, Gate::x(q));
            }
            for i in 0..32usize {
                let ones = (0..3).filter(|&q| (i >> (4 - q)) & 1 == 1).count();
                if ones >= 2 {
                    fail += branch[(i, i)].re;
                }
            }
        }
    }
    fail
}

/// Bitstrings (qubit 0 first) of the seven-qubit logical zero: the span of
/// the three X-type generators applied to |0000000>.
pub fn steane_zero_words() -> Vec<[bool; 7]> {
    let gens = ["0001111", "1010101", "0110011"];
    (0..8)
        .map(|m: usize| {
            let mut w = [false; 7];
            for (g, s) in gens.iter().enumerate() {
                if (m >> g) & 1 == 1 {
                    for (i, ch) in s.chars().enumerate() {
                        w[i] ^= ch == '1';
                    }
                }
            }
            w
        })
        .collect()
}

pub fn steane_zero_state() -> Vec<Complex64> {
    let mut psi = vec![c(0.); 128];
    for w in steane_zero_words() {
        let idx = w.iter().fold(0usize, |acc, &b| (acc << 1) | usize::from(b));
        psi[idx] = c(1.0 / 8f64.sqrt());
    }
    psi
}
