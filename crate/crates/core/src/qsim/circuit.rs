use serde::{Deserialize, Serialize};

use super::algorithms::qft_ops;
use super::gate::{controlled_gate_cost, GateKind, GateOp};
use super::state::MAX_QUBITS;
use crate::error::{Error, Result};

/// Largest classical register handled by the dense outcome tables.
pub const MAX_CLBITS: usize = 24;

/// Ordered operation list over `n_qubits` qubits and `n_clbits` classical bits.
/// Later measurements into the same classical bit overwrite earlier ones.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Circuit {
    n_qubits: usize,
    n_clbits: usize,
    ops: Vec<GateOp>,
}

#[derive(Deserialize)]
struct CircuitRecord {
    n_qubits: usize,
    n_clbits: usize,
    ops: Vec<GateOp>,
}

impl<'de> Deserialize<'de> for Circuit {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rec = CircuitRecord::deserialize(d)?;
        let mut c = Circuit::new(rec.n_qubits, rec.n_clbits).map_err(serde::de::Error::custom)?;
        c.extend(rec.ops).map_err(serde::de::Error::custom)?;
        Ok(c)
    }
}

impl Circuit {
    pub fn new(n_qubits: usize, n_clbits: usize) -> Result<Self> {
        if n_qubits > MAX_QUBITS {
            return Err(Error::TooManyQubits { n: n_qubits, max: MAX_QUBITS });
        }
        if n_clbits > MAX_CLBITS {
            return Err(Error::TooManyClbits { n: n_clbits, max: MAX_CLBITS });
        }
        Ok(Self { n_qubits, n_clbits, ops: Vec::new() })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_clbits(&self) -> usize {
        self.n_clbits
    }

    pub fn ops(&self) -> &[GateOp] {
        &self.ops
    }

    pub fn push(&mut self, op: GateOp) -> Result<&mut Self> {
        op.validate(self.n_qubits, self.n_clbits)?;
        self.ops.push(op);
        Ok(self)
    }

    pub fn extend(&mut self, ops: impl IntoIterator<Item = GateOp>) -> Result<&mut Self> {
        for op in ops {
            self.push(op)?;
        }
        Ok(self)
    }

    pub fn is_unitary(&self) -> bool {
        self.ops.iter().all(|op| op.kind.is_unitary() || op.kind == GateKind::Barrier)
    }

    /// Ops with QFT blocks expanded into their elementary gates.
    pub fn elementary_ops(&self) -> Vec<GateOp> {
        let mut out = Vec::with_capacity(self.ops.len());
        for op in &self.ops {
            match op.kind {
                GateKind::Qft | GateKind::InverseQft => {
                    out.extend(
                        qft_ops(&op.targets, op.kind == GateKind::InverseQft)
                            .into_iter()
                            .map(|g| g.with_controls(op.controls.iter().copied())),
                    );
                }
                _ => out.push(op.clone()),
            }
        }
        out
    }

    /// Decomposition cost of the unitary part: see [`controlled_gate_cost`].
    /// A swap counts as three CNOTs.
    pub fn gate_cost(&self) -> u64 {
        self.elementary_ops()
            .iter()
            .map(|op| match op.kind {
                GateKind::Swap => 3 * controlled_gate_cost(op.controls.len() + 1),
                k if k.is_unitary() => controlled_gate_cost(op.controls.len()),
                _ => 0,
            })
            .sum()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn push_validates() {
        let mut c = Circuit::new(2, 1).unwrap();
        assert!(c.push(GateOp::h(2)).is_err());
        assert!(c.push(GateOp::measure(0, 1)).is_err());
        c.push(GateOp::h(0)).unwrap().push(GateOp::measure(0, 0)).unwrap();
        assert_eq!(c.ops().len(), 2);
        assert!(!c.is_unitary());
    }

    #[test]
    fn json_validates_on_load() {
        let mut c = Circuit::new(3, 3).unwrap();
        c.push(GateOp::u3(0.1, 0.2, 0.3, 0).controlled_by(1).open_controlled_by(2)).unwrap();
        c.push(GateOp::inverse_qft(vec![0, 1, 2])).unwrap();
        c.push(GateOp::measure(2, 0)).unwrap();
        let back = Circuit::from_json(&c.to_json().unwrap()).unwrap();
        assert_eq!(back, c);
        let bad = r#"{"n_qubits":1,"n_clbits":0,"ops":[{"kind":"h","targets":[4]}]}"#;
        assert!(Circuit::from_json(bad).is_err());
    }

    #[test]
    fn cost_counts_controls() {
        let mut c = Circuit::new(4, 0).unwrap();
        c.push(GateOp::u3(1.0, 0.0, 0.0, 0).controlled_by(1).controlled_by(2).controlled_by(3)).unwrap();
        assert_eq!(c.gate_cost(), 34);
        let mut d = Circuit::new(2, 0).unwrap();
        d.push(GateOp::qft(vec![0, 1])).unwrap();
        // H, CP, H, SWAP
        assert_eq!(d.gate_cost(), 1 + 2 + 1 + 6);
    }
}
