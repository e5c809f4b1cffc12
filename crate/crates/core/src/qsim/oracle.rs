//! Brute-force reference: builds the full circuit unitary from Kronecker
//! products, sharing no code path with the gate kernels.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;

use super::circuit::Circuit;
use super::gate::{Control, GateKind, GateOp, Matrix2};
use super::state::StateVector;
use crate::error::{Error, Result};

pub const MAX_ORACLE_QUBITS: usize = 6;

/// Square row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![Complex64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_2x2(m: &Matrix2) -> Self {
        Self { dim: 2, data: vec![m[0][0], m[0][1], m[1][0], m[1][1]] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `self ⊗ rhs`
    pub fn kron(&self, rhs: &DenseMatrix) -> DenseMatrix {
        let dim = self.dim * rhs.dim;
        let mut out = Self::zeros(dim);
        for r1 in 0..self.dim {
            for c1 in 0..self.dim {
                let a = self[(r1, c1)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for r2 in 0..rhs.dim {
                    for c2 in 0..rhs.dim {
                        out[(r1 * rhs.dim + r2, c1 * rhs.dim + c2)] = a * rhs[(r2, c2)];
                    }
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.dim)
            .map(|r| (0..self.dim).map(|c| self[(r, c)] * v[c]).sum())
            .collect()
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = Complex64;
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.dim + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.dim + c]
    }
}

impl Mul for &DenseMatrix {
    type Output = DenseMatrix;
    fn mul(self, rhs: &DenseMatrix) -> DenseMatrix {
        let n = self.dim;
        let mut out = DenseMatrix::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self[(r, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..n {
                    out[(r, c)] += a * rhs[(k, c)];
                }
            }
        }
        out
    }
}

impl Add for &DenseMatrix {
    type Output = DenseMatrix;
    fn add(self, rhs: &DenseMatrix) -> DenseMatrix {
        DenseMatrix { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &DenseMatrix {
    type Output = DenseMatrix;
    fn sub(self, rhs: &DenseMatrix) -> DenseMatrix {
        DenseMatrix { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn pauli(k: usize) -> DenseMatrix {
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    DenseMatrix::from_2x2(&match k {
        0 => [[o, z], [z, o]],
        1 => [[z, o], [o, z]],
        2 => [[z, -i], [i, z]],
        _ => [[o, z], [z, -o]],
    })
}

fn projector(bit: bool) -> DenseMatrix {
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    DenseMatrix::from_2x2(&if bit { [[z, z], [z, o]] } else { [[o, z], [z, z]] })
}

/// `⊗_q factor(q)` with qubit `n-1` as the leftmost factor.
fn kron_over(n: usize, mut factor: impl FnMut(usize) -> DenseMatrix) -> DenseMatrix {
    (0..n).rev().fold(DenseMatrix::identity(1), |acc, q| acc.kron(&factor(q)))
}

/// Embeds `body` (acting as the identity off its own qubits) under controls:
/// `Π ⊗ body + (I − Π)`, where `Π` projects onto the triggering control values.
/// `body_factor(q)` returns the body's factor for qubit `q`, or `None` for identity.
fn controlled_embedding(
    n: usize,
    controls: &[Control],
    body_factor: impl Fn(usize) -> Option<DenseMatrix>,
) -> DenseMatrix {
    let control_of = |q: usize| controls.iter().find(|c| c.qubit == q);
    let pi_body = kron_over(n, |q| match control_of(q) {
        Some(ctl) => projector(ctl.polarity.trigger_bit()),
        None => body_factor(q).unwrap_or_else(|| DenseMatrix::identity(2)),
    });
    if controls.is_empty() {
        return pi_body;
    }
    let pi = kron_over(n, |q| match control_of(q) {
        Some(ctl) => projector(ctl.polarity.trigger_bit()),
        None => DenseMatrix::identity(2),
    });
    let id = DenseMatrix::identity(1 << n);
    &pi_body + &(&id - &pi)
}

/// `Π·body + (I − Π)` for a full-register `body` acting off the control qubits.
fn with_controls(n: usize, controls: &[Control], body: &DenseMatrix) -> DenseMatrix {
    if controls.is_empty() {
        return body.clone();
    }
    let pi = kron_over(n, |q| match controls.iter().find(|c| c.qubit == q) {
        Some(ctl) => projector(ctl.polarity.trigger_bit()),
        None => DenseMatrix::identity(2),
    });
    &(&pi * body) + &(&DenseMatrix::identity(1 << n) - &pi)
}

/// Discrete Fourier matrix `ω^{jk}/√N` (or its conjugate) on `qubits`,
/// embedded by index mapping; off-block bits must match.
fn fourier_block(n: usize, qubits: &[usize], inverse: bool) -> DenseMatrix {
    let dim = 1usize << n;
    let block = 1usize << qubits.len();
    let sign = if inverse { -1.0 } else { 1.0 };
    let block_mask: usize = qubits.iter().map(|&q| 1 << q).sum();
    let sub_index = |i: usize| -> usize {
        qubits.iter().enumerate().map(|(k, &q)| ((i >> q) & 1) << k).sum()
    };
    let mut m = DenseMatrix::zeros(dim);
    for r in 0..dim {
        for col in 0..dim {
            if r & !block_mask != col & !block_mask {
                continue;
            }
            let (j, k) = (sub_index(r), sub_index(col));
            let angle = sign * 2.0 * PI * ((j * k) % block) as f64 / block as f64;
            m[(r, col)] = Complex64::cis(angle) / (block as f64).sqrt();
        }
    }
    m
}

/// The 2^n × 2^n matrix one operation induces.
pub fn op_matrix(n: usize, op: &GateOp) -> Result<DenseMatrix> {
    match op.kind {
        GateKind::Measure | GateKind::Reset | GateKind::Barrier => Err(Error::NonUnitary(op.kind.name())),
        GateKind::Swap => {
            // SWAP = (I⊗I + X⊗X + Y⊗Y + Z⊗Z) / 2
            let (a, b) = (op.targets[0], op.targets[1]);
            let mut swap = DenseMatrix::zeros(1 << n);
            for k in 0..4 {
                let term = kron_over(n, |q| if q == a || q == b { pauli(k) } else { DenseMatrix::identity(2) });
                swap = &swap + &term;
            }
            swap.data.iter_mut().for_each(|x| *x *= 0.5);
            Ok(with_controls(n, &op.controls, &swap))
        }
        GateKind::Qft | GateKind::InverseQft => {
            let f = fourier_block(n, &op.targets, op.kind == GateKind::InverseQft);
            Ok(with_controls(n, &op.controls, &f))
        }
        kind => {
            let m = DenseMatrix::from_2x2(&kind.matrix().expect("single-qubit kind"));
            let t = op.targets[0];
            Ok(controlled_embedding(n, &op.controls, |q| (q == t).then(|| m.clone())))
        }
    }
}

/// Full unitary of a measurement-free circuit with at most
/// [`MAX_ORACLE_QUBITS`] qubits.
pub fn brute_force_unitary(circuit: &Circuit) -> Result<DenseMatrix> {
    let n = circuit.n_qubits();
    if n > MAX_ORACLE_QUBITS {
        return Err(Error::TooManyQubits { n, max: MAX_ORACLE_QUBITS });
    }
    let mut u = DenseMatrix::identity(1 << n);
    for op in circuit.ops() {
        if op.kind == GateKind::Barrier {
            return Err(Error::NonUnitary("barrier"));
        }
        u = &op_matrix(n, op)? * &u;
    }
    Ok(u)
}

/// `U·|0…0⟩` as a state.
pub fn oracle_final_state(circuit: &Circuit) -> Result<StateVector> {
    let u = brute_force_unitary(circuit)?;
    let mut zero = vec![Complex64::new(0.0, 0.0); u.dim()];
    zero[0] = Complex64::new(1.0, 0.0);
    StateVector::from_amplitudes(u.apply(&zero))
}

fn angle(rng: &mut impl Rng) -> f64 {
    rng.random_range(-2.0 * PI..2.0 * PI)
}

/// Random measurement-free circuit on `n_qubits` qubits with up to
/// `max_gates` operations: H, X, P, U3, SWAP and QFT blocks, each carrying
/// up to two controls of random polarity when qubits allow.
pub fn random_unitary_circuit(rng: &mut impl Rng, n_qubits: usize, max_gates: usize) -> Result<Circuit> {
    let mut c = Circuit::new(n_qubits, 0)?;
    let n_gates = rng.random_range(1..=max_gates.max(1));
    for _ in 0..n_gates {
        let mut qubits: Vec<usize> = (0..n_qubits).collect();
        qubits.shuffle(rng);
        let (op, used) = match rng.random_range(0..7) {
            0 => (GateOp::h(qubits[0]), 1),
            1 => (GateOp::x(qubits[0]), 1),
            2 => (GateOp::phase(angle(rng), qubits[0]), 1),
            3 | 4 => (GateOp::u3(angle(rng), angle(rng), angle(rng), qubits[0]), 1),
            5 if n_qubits >= 2 => (GateOp::swap(qubits[0], qubits[1]), 2),
            6 if n_qubits >= 2 => {
                let width = rng.random_range(1..=n_qubits.min(3));
                let block = qubits[..width].to_vec();
                if rng.random_bool(0.5) {
                    (GateOp::qft(block), width)
                } else {
                    (GateOp::inverse_qft(block), width)
                }
            }
            _ => (GateOp::h(qubits[0]), 1),
        };
        let n_controls = rng.random_range(0..=(n_qubits - used).min(2));
        let controls = qubits[used..used + n_controls]
            .iter()
            .map(|&q| Control { qubit: q, polarity: super::gate::Polarity::from_bit(rng.random_bool(0.5)) });
        c.push(op.with_controls(controls))?;
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hadamard_matrix() {
        let mut c = Circuit::new(1, 0).unwrap();
        c.push(GateOp::h(0)).unwrap();
        let u = brute_force_unitary(&c).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let want = DenseMatrix { dim: 2, data: vec![c_(h), c_(h), c_(h), c_(-h)] };
        assert!(u.max_abs_diff(&want) < 1e-15);
    }

    fn c_(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn swap_matrix_permutes() {
        let mut c = Circuit::new(2, 0).unwrap();
        c.push(GateOp::swap(0, 1)).unwrap();
        let u = brute_force_unitary(&c).unwrap();
        let perm = [0, 2, 1, 3];
        for (col, &row) in perm.iter().enumerate() {
            for r in 0..4 {
                let want = if r == row { 1.0 } else { 0.0 };
                assert!((u[(r, col)] - c_(want)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn controlled_swap_matrix() {
        let mut c = Circuit::new(3, 0).unwrap();
        c.push(GateOp::swap(0, 1).controlled_by(2)).unwrap();
        let u = brute_force_unitary(&c).unwrap();
        for col in 0..8usize {
            let row = if col & 0b100 != 0 {
                (col & 0b100) | ((col & 1) << 1) | ((col >> 1) & 1)
            } else {
                col
            };
            assert!((u[(row, col)] - c_(1.0)).norm() < 1e-15, "col {col}");
        }
    }

    #[test]
    fn rejects_measurement_and_large_registers() {
        let mut c = Circuit::new(1, 1).unwrap();
        c.push(GateOp::measure(0, 0)).unwrap();
        assert!(brute_force_unitary(&c).is_err());
        assert!(brute_force_unitary(&Circuit::new(7, 0).unwrap()).is_err());
    }
}
