use num_complex::Complex64;

use super::algorithms::qft_ops;
use super::gate::{Control, GateKind, GateOp, Matrix2};
use crate::error::{Error, Result};

/// Largest register the dense simulator accepts (2^26 amplitudes ≈ 1 GiB).
pub const MAX_QUBITS: usize = 26;

/// Dense statevector. Qubit `i` is bit `i` of the basis-state index.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// |0…0⟩ on `n_qubits` qubits.
    pub fn new(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        if n_qubits > MAX_QUBITS {
            return Err(Error::TooManyQubits { n: n_qubits, max: MAX_QUBITS });
        }
        let len = 1usize << n_qubits;
        if index >= len {
            return Err(Error::MalformedOp(format!("basis index {index} >= {len}")));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); len];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// Wraps raw amplitudes. The length must be a power of two; the norm is not checked.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        if amps.is_empty() || !amps.len().is_power_of_two() {
            return Err(Error::MalformedOp(format!(
                "amplitude count {} is not a power of two",
                amps.len()
            )));
        }
        let n_qubits = amps.len().trailing_zeros() as usize;
        if n_qubits > MAX_QUBITS {
            return Err(Error::TooManyQubits { n: n_qubits, max: MAX_QUBITS });
        }
        Ok(Self { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// True when `|⟨self|other⟩| = 1` within `tol`, i.e. equal up to global phase.
    pub fn equals_up_to_phase(&self, other: &StateVector, tol: f64) -> bool {
        self.n_qubits == other.n_qubits && (self.inner(other).norm() - 1.0).abs() < tol
    }

    /// Applies a unitary operation in place.
    pub fn apply(&mut self, op: &GateOp) -> Result<()> {
        op.validate(self.n_qubits, usize::MAX)?;
        match op.kind {
            GateKind::Measure | GateKind::Reset | GateKind::Barrier => {
                Err(Error::NonUnitary(op.kind.name()))
            }
            GateKind::Swap => {
                self.apply_swap(op.targets[0], op.targets[1], &op.controls);
                Ok(())
            }
            GateKind::Qft | GateKind::InverseQft => {
                for sub in qft_ops(&op.targets, op.kind == GateKind::InverseQft) {
                    let sub = sub.with_controls(op.controls.iter().copied());
                    self.apply_elementary(&sub);
                }
                Ok(())
            }
            _ => {
                self.apply_elementary(op);
                Ok(())
            }
        }
    }

    /// Applies a pre-validated single-qubit or swap gate.
    pub(crate) fn apply_elementary(&mut self, op: &GateOp) {
        match op.kind {
            GateKind::Swap => self.apply_swap(op.targets[0], op.targets[1], &op.controls),
            kind => {
                let m = kind.matrix().expect("elementary gate has a 2x2 matrix");
                self.apply_matrix(&m, op.targets[0], &op.controls);
            }
        }
    }

    pub(crate) fn apply_matrix(&mut self, m: &Matrix2, target: usize, controls: &[Control]) {
        let (mask, value) = control_mask(controls);
        let tbit = 1usize << target;
        for i in 0..self.amps.len() {
            if i & tbit != 0 || i & mask != value {
                continue;
            }
            let j = i | tbit;
            let (a0, a1) = (self.amps[i], self.amps[j]);
            self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
            self.amps[j] = m[1][0] * a0 + m[1][1] * a1;
        }
    }

    fn apply_swap(&mut self, a: usize, b: usize, controls: &[Control]) {
        let (mask, value) = control_mask(controls);
        let (abit, bbit) = (1usize << a, 1usize << b);
        for i in 0..self.amps.len() {
            // visit each |..1_a..0_b..⟩ ↔ |..0_a..1_b..⟩ pair once
            if i & abit == 0 || i & bbit != 0 || i & mask != value {
                continue;
            }
            let j = (i & !abit) | bbit;
            self.amps.swap(i, j);
        }
    }

    pub fn prob_one(&self, qubit: usize) -> f64 {
        let bit = 1usize << qubit;
        self.amps.iter().enumerate().filter(|(i, _)| i & bit != 0).map(|(_, a)| a.norm_sqr()).sum()
    }

    /// Projects `qubit` onto `outcome` and renormalizes. Returns the Born
    /// probability of that outcome; the state is left untouched when it is 0.
    pub fn project(&mut self, qubit: usize, outcome: bool) -> f64 {
        let bit = 1usize << qubit;
        let p = if outcome { self.prob_one(qubit) } else { 1.0 - self.prob_one(qubit) };
        if p <= 0.0 {
            return 0.0;
        }
        let scale = 1.0 / p.sqrt();
        for (i, a) in self.amps.iter_mut().enumerate() {
            if (i & bit != 0) == outcome {
                *a *= scale;
            } else {
                *a = Complex64::new(0.0, 0.0);
            }
        }
        p
    }

    /// Flips a projected qubit back to |0⟩. Only meaningful right after
    /// `project(qubit, true)`.
    pub(crate) fn flip_to_zero(&mut self, qubit: usize) {
        let bit = 1usize << qubit;
        for i in 0..self.amps.len() {
            if i & bit != 0 {
                self.amps.swap(i, i & !bit);
            }
        }
    }
}

/// Functional form of [`StateVector::apply`].
pub fn apply_gate(mut state: StateVector, op: &GateOp) -> Result<StateVector> {
    state.apply(op)?;
    Ok(state)
}

fn control_mask(controls: &[Control]) -> (usize, usize) {
    controls.iter().fold((0, 0), |(mask, value), c| {
        let bit = 1usize << c.qubit;
        (mask | bit, if c.polarity.trigger_bit() { value | bit } else { value })
    })
}
