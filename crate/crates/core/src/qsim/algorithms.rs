//! Fourier-basis building blocks: the QFT cascade and phase estimation.

use std::f64::consts::PI;

use super::circuit::Circuit;
use super::gate::{GateKind, GateOp};
use super::state::StateVector;
use crate::error::{Error, Result};

/// Elementary decomposition of the QFT on `qubits` (least significant first):
/// a Hadamard plus a cascade of controlled phases per qubit, then the
/// bit-reversal swaps. The inverse is the reversed sequence with negated
/// phases.
pub fn qft_ops(qubits: &[usize], inverse: bool) -> Vec<GateOp> {
    let n = qubits.len();
    let mut ops = Vec::with_capacity(n * (n + 1) / 2 + n / 2);
    for j in (0..n).rev() {
        ops.push(GateOp::h(qubits[j]));
        for k in (0..j).rev() {
            let angle = PI / f64::from(1u32 << (j - k));
            ops.push(GateOp::phase(angle, qubits[j]).controlled_by(qubits[k]));
        }
    }
    for i in 0..n / 2 {
        ops.push(GateOp::swap(qubits[i], qubits[n - 1 - i]));
    }
    if inverse {
        ops.reverse();
        for op in &mut ops {
            if let GateKind::Phase(angle) = op.kind {
                op.kind = GateKind::Phase(-angle);
            }
        }
    }
    ops
}

pub fn apply_qft(mut state: StateVector, qubits: &[usize], inverse: bool) -> Result<StateVector> {
    if qubits.is_empty() {
        return Err(Error::EmptyRange);
    }
    let op = if inverse { GateOp::inverse_qft(qubits) } else { GateOp::qft(qubits) };
    state.apply(&op)?;
    Ok(state)
}

/// Phase estimation of `P(phase_gate_angle)` with `n_counting` counting qubits.
///
/// Counting qubits are `0..n_counting` (qubit `k` drives `2^k` controlled
/// phases), the eigenstate |1⟩ lives on qubit `n_counting`, and counting
/// qubit `k` is measured into clbit `k`.
pub fn qpe_circuit(phase_gate_angle: f64, n_counting: usize) -> Result<Circuit> {
    if n_counting == 0 {
        return Err(Error::EmptyRange);
    }
    let aux = n_counting;
    let counting: Vec<usize> = (0..n_counting).collect();
    let mut c = Circuit::new(n_counting + 1, n_counting)?;
    c.push(GateOp::x(aux))?;
    for &q in &counting {
        c.push(GateOp::h(q))?;
    }
    for &q in &counting {
        for _ in 0..1u64 << q {
            c.push(GateOp::phase(phase_gate_angle, aux).controlled_by(q))?;
        }
    }
    c.push(GateOp::inverse_qft(counting.clone()))?;
    for &q in &counting {
        c.push(GateOp::measure(q, q))?;
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;

    use super::*;

    #[test]
    fn qft_single_qubit_basis_states() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let s0 = apply_qft(StateVector::new(1).unwrap(), &[0], false).unwrap();
        assert!((s0.amplitudes()[0] - Complex64::new(h, 0.0)).norm() < 1e-15);
        assert!((s0.amplitudes()[1] - Complex64::new(h, 0.0)).norm() < 1e-15);
        let s1 = apply_qft(StateVector::basis(1, 1).unwrap(), &[0], false).unwrap();
        assert!((s1.amplitudes()[0] - Complex64::new(h, 0.0)).norm() < 1e-15);
        assert!((s1.amplitudes()[1] - Complex64::new(-h, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn qft_matches_definition_on_basis_states() {
        let n = 3;
        let dim = 1usize << n;
        for x in 0..dim {
            let s = apply_qft(StateVector::basis(n, x).unwrap(), &[0, 1, 2], false).unwrap();
            for k in 0..dim {
                let want = Complex64::cis(2.0 * PI * (x * k) as f64 / dim as f64) / (dim as f64).sqrt();
                assert!((s.amplitudes()[k] - want).norm() < 1e-12, "x={x} k={k}");
            }
        }
    }

    #[test]
    fn empty_range_rejected() {
        assert!(matches!(apply_qft(StateVector::new(1).unwrap(), &[], true), Err(Error::EmptyRange)));
        assert!(qpe_circuit(1.0, 0).is_err());
    }

    #[test]
    fn qpe_layout() {
        let c = qpe_circuit(PI / 4.0, 3).unwrap();
        assert_eq!((c.n_qubits(), c.n_clbits()), (4, 3));
        let controlled_phases = c
            .ops()
            .iter()
            .filter(|op| matches!(op.kind, GateKind::Phase(_)) && op.controls.len() == 1)
            .count();
        assert_eq!(controlled_phases, 1 + 2 + 4);
    }
}
