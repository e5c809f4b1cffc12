use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Matrix2 = [[Complex64; 2]; 2];

/// Which control value triggers the gate: `Open` fires on |0⟩, `Closed` on |1⟩.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Open,
    Closed,
}

impl Polarity {
    pub fn from_bit(bit: bool) -> Self {
        if bit {
            Polarity::Closed
        } else {
            Polarity::Open
        }
    }

    pub fn trigger_bit(self) -> bool {
        self == Polarity::Closed
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Control {
    pub qubit: usize,
    pub polarity: Polarity,
}

impl Control {
    pub fn closed(qubit: usize) -> Self {
        Self { qubit, polarity: Polarity::Closed }
    }

    pub fn open(qubit: usize) -> Self {
        Self { qubit, polarity: Polarity::Open }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GateKind {
    H,
    X,
    /// `diag(1, e^{iλ})`
    Phase(f64),
    U3 { theta: f64, phi: f64, lambda: f64 },
    Swap,
    Qft,
    InverseQft,
    Measure,
    Reset,
    Barrier,
}

impl GateKind {
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::H => "h",
            GateKind::X => "x",
            GateKind::Phase(_) => "p",
            GateKind::U3 { .. } => "u3",
            GateKind::Swap => "swap",
            GateKind::Qft => "qft",
            GateKind::InverseQft => "iqft",
            GateKind::Measure => "measure",
            GateKind::Reset => "reset",
            GateKind::Barrier => "barrier",
        }
    }

    pub fn is_unitary(&self) -> bool {
        !matches!(self, GateKind::Measure | GateKind::Reset | GateKind::Barrier)
    }

    fn angles(&self) -> Vec<f64> {
        match *self {
            GateKind::Phase(lambda) => vec![lambda],
            GateKind::U3 { theta, phi, lambda } => vec![theta, phi, lambda],
            _ => Vec::new(),
        }
    }

    /// The 2×2 matrix of single-qubit kinds, `None` for everything else.
    pub fn matrix(&self) -> Option<Matrix2> {
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        match *self {
            GateKind::H => {
                let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
                Some([[h, h], [h, -h]])
            }
            GateKind::X => Some([[zero, one], [one, zero]]),
            GateKind::Phase(lambda) => Some([[one, zero], [zero, Complex64::cis(lambda)]]),
            GateKind::U3 { theta, phi, lambda } => Some(u3_matrix(theta, phi, lambda)),
            _ => None,
        }
    }
}

pub fn u3_matrix(theta: f64, phi: f64, lambda: f64) -> Matrix2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        [Complex64::new(c, 0.0), -Complex64::cis(lambda) * s],
        [Complex64::cis(phi) * s, Complex64::cis(phi + lambda) * c],
    ]
}

/// One circuit instruction.
///
/// For `Qft`/`InverseQft` the targets list the block register from least to
/// most significant qubit. `Measure` pairs `targets[i]` with `clbits[i]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OpRecord", into = "OpRecord")]
pub struct GateOp {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    pub controls: Vec<Control>,
    pub clbits: Vec<usize>,
}

impl GateOp {
    fn new(kind: GateKind, targets: Vec<usize>) -> Self {
        Self { kind, targets, controls: Vec::new(), clbits: Vec::new() }
    }

    pub fn h(q: usize) -> Self {
        Self::new(GateKind::H, vec![q])
    }

    pub fn x(q: usize) -> Self {
        Self::new(GateKind::X, vec![q])
    }

    pub fn phase(lambda: f64, q: usize) -> Self {
        Self::new(GateKind::Phase(lambda), vec![q])
    }

    pub fn u3(theta: f64, phi: f64, lambda: f64, q: usize) -> Self {
        Self::new(GateKind::U3 { theta, phi, lambda }, vec![q])
    }

    pub fn swap(a: usize, b: usize) -> Self {
        Self::new(GateKind::Swap, vec![a, b])
    }

    pub fn qft(qubits: impl Into<Vec<usize>>) -> Self {
        Self::new(GateKind::Qft, qubits.into())
    }

    pub fn inverse_qft(qubits: impl Into<Vec<usize>>) -> Self {
        Self::new(GateKind::InverseQft, qubits.into())
    }

    pub fn measure(q: usize, c: usize) -> Self {
        Self { kind: GateKind::Measure, targets: vec![q], controls: Vec::new(), clbits: vec![c] }
    }

    pub fn reset(q: usize) -> Self {
        Self::new(GateKind::Reset, vec![q])
    }

    pub fn barrier(qubits: impl Into<Vec<usize>>) -> Self {
        Self::new(GateKind::Barrier, qubits.into())
    }

    pub fn controlled_by(mut self, q: usize) -> Self {
        self.controls.push(Control::closed(q));
        self
    }

    pub fn open_controlled_by(mut self, q: usize) -> Self {
        self.controls.push(Control::open(q));
        self
    }

    pub fn with_controls(mut self, controls: impl IntoIterator<Item = Control>) -> Self {
        self.controls.extend(controls);
        self
    }

    /// Every qubit the operation touches, controls included.
    pub fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        self.targets.iter().copied().chain(self.controls.iter().map(|c| c.qubit))
    }

    pub fn validate(&self, n_qubits: usize, n_clbits: usize) -> Result<()> {
        let arity_ok = match self.kind {
            GateKind::H | GateKind::X | GateKind::Phase(_) | GateKind::U3 { .. } => {
                self.targets.len() == 1
            }
            GateKind::Swap => self.targets.len() == 2,
            GateKind::Qft | GateKind::InverseQft => {
                if self.targets.is_empty() {
                    return Err(Error::EmptyRange);
                }
                true
            }
            GateKind::Measure => !self.targets.is_empty() && self.targets.len() == self.clbits.len(),
            GateKind::Reset => !self.targets.is_empty(),
            GateKind::Barrier => true,
        };
        if !arity_ok {
            return Err(Error::MalformedOp(format!(
                "`{}` with {} targets and {} clbits",
                self.kind.name(),
                self.targets.len(),
                self.clbits.len()
            )));
        }
        if !self.kind.is_unitary() && !self.controls.is_empty() {
            return Err(Error::MalformedOp(format!("`{}` cannot be controlled", self.kind.name())));
        }
        if self.kind != GateKind::Measure && !self.clbits.is_empty() {
            return Err(Error::MalformedOp(format!("`{}` does not write clbits", self.kind.name())));
        }
        if let Some(a) = self.kind.angles().iter().find(|a| !a.is_finite()) {
            return Err(Error::MalformedOp(format!("non-finite angle {a}")));
        }
        if let Some(q) = self.qubits().find(|&q| q >= n_qubits) {
            return Err(Error::QubitOutOfRange { index: q, n_qubits });
        }
        if let Some(q) = first_duplicate(self.qubits()) {
            return Err(Error::DuplicateQubit(q));
        }
        if let Some(&c) = self.clbits.iter().find(|&&c| c >= n_clbits) {
            return Err(Error::ClbitOutOfRange { index: c, n_clbits });
        }
        if let Some(c) = first_duplicate(self.clbits.iter().copied()) {
            return Err(Error::MalformedOp(format!("clbit {c} written twice by one measure")));
        }
        Ok(())
    }
}

fn first_duplicate(items: impl Iterator<Item = usize>) -> Option<usize> {
    let mut sorted: Vec<usize> = items.collect();
    sorted.sort_unstable();
    sorted.windows(2).find(|w| w[0] == w[1]).map(|w| w[0])
}

/// Elementary-gate cost of a gate with `n_controls` controls.
///
/// An uncontrolled single-qubit gate costs 1 and a singly-controlled gate 2
/// (one per qubit it touches). More controls decompose recursively as
/// `C^k(U) = C(V)·C^{k-1}(X)·C(V†)·C^{k-1}(X)·C^{k-1}(V)` with `V² = U`.
pub fn controlled_gate_cost(n_controls: usize) -> u64 {
    match n_controls {
        0 => 1,
        1 => 2,
        k => 3 * controlled_gate_cost(k - 1) + 4,
    }
}

#[derive(Serialize, Deserialize)]
struct OpRecord {
    kind: String,
    targets: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    controls: Vec<Control>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    angles: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    clbits: Vec<usize>,
}

impl From<GateOp> for OpRecord {
    fn from(op: GateOp) -> Self {
        OpRecord {
            kind: op.kind.name().to_string(),
            angles: op.kind.angles(),
            targets: op.targets,
            controls: op.controls,
            clbits: op.clbits,
        }
    }
}

impl TryFrom<OpRecord> for GateOp {
    type Error = Error;

    fn try_from(rec: OpRecord) -> Result<Self> {
        let want = |n: usize| -> Result<()> {
            if rec.angles.len() == n {
                Ok(())
            } else {
                Err(Error::MalformedOp(format!(
                    "`{}` expects {n} angles, got {}",
                    rec.kind,
                    rec.angles.len()
                )))
            }
        };
        let kind = match rec.kind.as_str() {
            "h" => GateKind::H,
            "x" => GateKind::X,
            "p" => {
                want(1)?;
                GateKind::Phase(rec.angles[0])
            }
            "u3" => {
                want(3)?;
                GateKind::U3 { theta: rec.angles[0], phi: rec.angles[1], lambda: rec.angles[2] }
            }
            "swap" => GateKind::Swap,
            "qft" => GateKind::Qft,
            "iqft" => GateKind::InverseQft,
            "measure" => GateKind::Measure,
            "reset" => GateKind::Reset,
            "barrier" => GateKind::Barrier,
            other => return Err(Error::MalformedOp(format!("unknown kind `{other}`"))),
        };
        if !matches!(kind, GateKind::Phase(_) | GateKind::U3 { .. }) {
            want(0)?;
        }
        Ok(GateOp { kind, targets: rec.targets, controls: rec.controls, clbits: rec.clbits })
    }
}
