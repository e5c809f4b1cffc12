//! Dense statevector circuit simulation.
//!
//! Qubit `i` is bit `i` of a basis-state index, and classical bitstrings are
//! rendered MSB-first (clbit `n-1` leftmost). Builders measure qubit `i` into
//! clbit `i` unless stated otherwise.

pub mod algorithms;
pub mod circuit;
pub mod gate;
pub mod oracle;
pub mod simulate;
pub mod state;

pub use algorithms::{apply_qft, qft_ops, qpe_circuit};
pub use circuit::{Circuit, MAX_CLBITS};
pub use gate::{controlled_gate_cost, Control, GateKind, GateOp, Polarity};
pub use oracle::{brute_force_unitary, oracle_final_state, random_unitary_circuit, DenseMatrix};
pub use simulate::{
    bitstring, exact_probabilities, exact_probabilities_with, parse_bitstring, run_shots,
    run_trajectories, NoiseConfig, OutcomeProbabilities, ShotHistogram, KEY_ORDER,
};
pub use state::{apply_gate, StateVector, MAX_QUBITS};

/// Final state of a measurement-free circuit started from |0…0⟩.
pub fn simulate_unitary(circuit: &Circuit) -> crate::Result<StateVector> {
    let mut s = StateVector::new(circuit.n_qubits())?;
    for op in circuit.ops() {
        if op.kind != GateKind::Barrier {
            s.apply(op)?;
        }
    }
    Ok(s)
}
