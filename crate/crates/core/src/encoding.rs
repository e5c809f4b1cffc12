//! Circuit builders: database sample circuits, the static and
//! phase-kickback-sequenced (PKBSE) encoders, and the equal-superposition
//! reference.
//!
//! Register layout for `B` bands and `2^k` subdivisions: timbre qubits
//! `0..B` (band `b` on qubit `b`, lowest band first) and spinal qubits
//! `B..B+k`, where qubit `B` is the most significant bit of the subdivision
//! index. Timbre qubit `b` is measured into clbit `b`; the spinal register is
//! measured so that its field of the key reads the subdivision MSB-first.

use serde::{Deserialize, Serialize};

use crate::audio::{EncodingMatrix, FeatureTriple};
use crate::error::{Error, Result};
use crate::qsim::{Circuit, Control, GateOp, Polarity};

pub const N_BANDS: usize = 3;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EncoderKind {
    #[default]
    Static,
    Pkbse,
}

impl std::str::FromStr for EncoderKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "static" => Ok(EncoderKind::Static),
            "pkbse" => Ok(EncoderKind::Pkbse),
            other => Err(Error::Config(format!("unknown encoder `{other}` (static|pkbse)"))),
        }
    }
}

impl std::fmt::Display for EncoderKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EncoderKind::Static => "static",
            EncoderKind::Pkbse => "pkbse",
        })
    }
}

/// Initial state preparation of both registers. `Ry` holds one angle per
/// qubit (timbre first), applied as `U3(α, 0, 0)`; `Ry(π/2)` on every qubit
/// has the same measurement statistics as `Hadamard`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InternalPulse {
    #[default]
    Hadamard,
    Ry(Vec<f64>),
}

impl InternalPulse {
    pub fn ops(&self, qubits: &[usize]) -> Result<Vec<GateOp>> {
        match self {
            InternalPulse::Hadamard => Ok(qubits.iter().map(|&q| GateOp::h(q)).collect()),
            InternalPulse::Ry(angles) => {
                if angles.len() != qubits.len() {
                    return Err(Error::Config(format!(
                        "internal pulse has {} angles for {} qubits",
                        angles.len(),
                        qubits.len()
                    )));
                }
                Ok(qubits.iter().zip(angles).map(|(&q, &a)| GateOp::u3(a, 0.0, 0.0, q)).collect())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegisterLayout {
    pub timbre: Vec<usize>,
    /// Most significant subdivision bit first.
    pub spinal: Vec<usize>,
}

impl RegisterLayout {
    pub fn new(n_bands: usize, n_subdivisions: usize) -> Result<Self> {
        if n_subdivisions < 2 || !n_subdivisions.is_power_of_two() {
            return Err(Error::Config(format!(
                "n_subdivisions = {n_subdivisions} must be a power of two >= 2"
            )));
        }
        let k = n_subdivisions.trailing_zeros() as usize;
        Ok(Self { timbre: (0..n_bands).collect(), spinal: (n_bands..n_bands + k).collect() })
    }

    pub fn n_qubits(&self) -> usize {
        self.timbre.len() + self.spinal.len()
    }

    pub fn all_qubits(&self) -> Vec<usize> {
        self.timbre.iter().chain(&self.spinal).copied().collect()
    }

    pub fn n_subdivisions(&self) -> usize {
        1 << self.spinal.len()
    }

    /// Spinal qubits least significant first, the order QFT blocks expect.
    pub fn spinal_lsb_first(&self) -> Vec<usize> {
        self.spinal.iter().rev().copied().collect()
    }

    /// Controls selecting subdivision `s`: closed where its bit is 1, open where 0.
    pub fn subdivision_controls(&self, s: usize) -> Vec<Control> {
        let k = self.spinal.len();
        self.spinal
            .iter()
            .enumerate()
            .map(|(i, &q)| Control { qubit: q, polarity: Polarity::from_bit((s >> (k - 1 - i)) & 1 == 1) })
            .collect()
    }

    /// Measures timbre into clbits `0..B` and the spinal register into the
    /// clbits above, spinal MSB into the highest clbit, starting at `offset`.
    pub fn readout_ops(&self, timbre_offset: usize, spinal_offset: usize) -> Vec<GateOp> {
        let k = self.spinal.len();
        let timbre = self.timbre.iter().enumerate().map(|(b, &q)| GateOp::measure(q, timbre_offset + b));
        let spinal =
            self.spinal.iter().enumerate().map(|(i, &q)| GateOp::measure(q, spinal_offset + k - 1 - i));
        timbre.chain(spinal).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuikoCircuitBundle {
    pub circuit: Circuit,
    pub layout: RegisterLayout,
    pub encoder_kind: EncoderKind,
}

impl QuikoCircuitBundle {
    pub fn timbre_qubits(&self) -> &[usize] {
        &self.layout.timbre
    }

    pub fn spinal_qubits(&self) -> &[usize] {
        &self.layout.spinal
    }
}

fn u3(t: FeatureTriple, q: usize) -> GateOp {
    GateOp::u3(t.theta, t.phi, t.lam, q)
}

/// One qubit per band (lowest band on qubit 0), each rotated by its triple
/// and measured into the clbit of the same index.
pub fn database_circuit(features: &[FeatureTriple]) -> Result<Circuit> {
    if features.len() != N_BANDS {
        return Err(Error::Config(format!("database circuit needs {N_BANDS} bands, got {}", features.len())));
    }
    let mut c = Circuit::new(N_BANDS, N_BANDS)?;
    for (q, &t) in features.iter().enumerate() {
        c.push(u3(t, q))?;
    }
    for q in 0..N_BANDS {
        c.push(GateOp::measure(q, q))?;
    }
    Ok(c)
}

fn check_matrix(matrix: &EncodingMatrix) -> Result<RegisterLayout> {
    matrix.validate()?;
    if matrix.n_bands != N_BANDS {
        return Err(Error::Config(format!("encoders need {N_BANDS} bands, got {}", matrix.n_bands)));
    }
    RegisterLayout::new(matrix.n_bands, matrix.n_subdivisions)
}

/// For every subdivision `s`, one U3 per band on its timbre qubit, controlled
/// by the whole spinal register matching `s`.
pub fn static_body_ops(matrix: &EncodingMatrix) -> Result<Vec<GateOp>> {
    let layout = check_matrix(matrix)?;
    let mut ops = Vec::with_capacity(N_BANDS * matrix.n_subdivisions);
    for s in 0..matrix.n_subdivisions {
        let controls = layout.subdivision_controls(s);
        for (b, &q) in layout.timbre.iter().enumerate() {
            ops.push(u3(matrix.get(b, s), q).with_controls(controls.iter().copied()));
        }
    }
    Ok(ops)
}

fn assemble(
    layout: RegisterLayout,
    kind: EncoderKind,
    pulse: &InternalPulse,
    body: Vec<GateOp>,
) -> Result<QuikoCircuitBundle> {
    let n = layout.n_qubits();
    let mut c = Circuit::new(n, n)?;
    c.extend(pulse.ops(&layout.all_qubits())?)?;
    c.extend(body)?;
    c.push(GateOp::inverse_qft(layout.spinal_lsb_first()))?;
    c.extend(layout.readout_ops(0, layout.timbre.len()))?;
    Ok(QuikoCircuitBundle { circuit: c, layout, encoder_kind: kind })
}

pub fn static_circuit(matrix: &EncodingMatrix) -> Result<QuikoCircuitBundle> {
    static_circuit_with(matrix, &InternalPulse::Hadamard)
}

pub fn static_circuit_with(matrix: &EncodingMatrix, pulse: &InternalPulse) -> Result<QuikoCircuitBundle> {
    let layout = check_matrix(matrix)?;
    let body = static_body_ops(matrix)?;
    assemble(layout, EncoderKind::Static, pulse, body)
}

/// Accumulated feature sequences, `entries[band][feature][half][j]` with
/// features ordered θ, φ, λ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PkbseMatrix {
    pub n_bands: usize,
    pub half_len: usize,
    pub entries: Vec<Vec<[Vec<f64>; 2]>>,
}

impl PkbseMatrix {
    /// The `(θ, φ, λ)` sequence entry of `band` at position `j` of `half`.
    pub fn triple(&self, band: usize, half: usize, j: usize) -> FeatureTriple {
        let f = &self.entries[band];
        FeatureTriple { theta: f[0][half][j], phi: f[1][half][j], lam: f[2][half][j] }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.entries.len() == self.n_bands
            && self.half_len > 0
            && self
                .entries
                .iter()
                .all(|feats| feats.len() == 3 && feats.iter().all(|h| h.iter().all(|v| v.len() == self.half_len)));
        if !ok {
            return Err(Error::Config(format!(
                "pkbse matrix is not {} bands x 3 features x 2 x {}",
                self.n_bands, self.half_len
            )));
        }
        if !self.entries.iter().flatten().flatten().flatten().all(|v| v.is_finite()) {
            return Err(Error::Config("pkbse matrix holds non-finite values".into()));
        }
        Ok(())
    }
}

/// Running sums of one half, every entry but the last negated.
pub fn accumulate_half(features: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let last = features.len().saturating_sub(1);
    features
        .iter()
        .enumerate()
        .map(|(j, f)| {
            acc += f;
            if j == last {
                acc
            } else {
                -acc
            }
        })
        .collect()
}

/// Splits the measure into the subdivisions whose index starts with 0 and
/// with 1, and accumulates every band's features within each half.
pub fn pkbse_matrix(matrix: &EncodingMatrix) -> Result<PkbseMatrix> {
    matrix.validate()?;
    let n = matrix.n_subdivisions;
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::Config(format!("pkbse needs an even subdivision count, got {n}")));
    }
    let half_len = n / 2;
    let entries = matrix
        .entries
        .iter()
        .map(|row| {
            let pick: [fn(&FeatureTriple) -> f64; 3] = [|t| t.theta, |t| t.phi, |t| t.lam];
            pick.iter()
                .map(|f| {
                    let values: Vec<f64> = row.iter().map(f).collect();
                    [accumulate_half(&values[..half_len]), accumulate_half(&values[half_len..])]
                })
                .collect()
        })
        .collect();
    Ok(PkbseMatrix { n_bands: matrix.n_bands, half_len, entries })
}

/// Singly-controlled U3 sequences: band `b` is driven by spinal qubit `b`
/// (MSB for the lowest band). The first half is bracketed by X on the spinal
/// register so it fires on |0⟩ controls.
pub fn pkbse_body_ops(pm: &PkbseMatrix, layout: &RegisterLayout) -> Result<Vec<GateOp>> {
    pm.validate()?;
    if pm.n_bands != N_BANDS || layout.timbre.len() != N_BANDS {
        return Err(Error::Config(format!("encoders need {N_BANDS} bands, got {}", pm.n_bands)));
    }
    if 2 * pm.half_len != layout.n_subdivisions() {
        return Err(Error::Config(format!(
            "pkbse matrix covers {} subdivisions, register holds {}",
            2 * pm.half_len,
            layout.n_subdivisions()
        )));
    }
    let k = layout.spinal.len();
    let flip: Vec<GateOp> = layout.spinal.iter().map(|&q| GateOp::x(q)).collect();
    let mut ops = Vec::new();
    for half in 0..2 {
        if half == 0 {
            ops.extend(flip.iter().cloned());
        }
        for j in 0..pm.half_len {
            for (b, &q) in layout.timbre.iter().enumerate() {
                ops.push(u3(pm.triple(b, half, j), q).controlled_by(layout.spinal[b % k]));
            }
        }
        if half == 0 {
            ops.extend(flip.iter().cloned());
        }
    }
    Ok(ops)
}

pub fn pkbse_circuit(pm: &PkbseMatrix) -> Result<QuikoCircuitBundle> {
    pkbse_circuit_with(pm, &InternalPulse::Hadamard)
}

pub fn pkbse_circuit_with(pm: &PkbseMatrix, pulse: &InternalPulse) -> Result<QuikoCircuitBundle> {
    pm.validate()?;
    let layout = RegisterLayout::new(pm.n_bands, 2 * pm.half_len)?;
    let body = pkbse_body_ops(pm, &layout)?;
    assemble(layout, EncoderKind::Pkbse, pulse, body)
}

/// Either encoder straight from an encoding matrix.
pub fn encoder_circuit(matrix: &EncodingMatrix, kind: EncoderKind) -> Result<QuikoCircuitBundle> {
    match kind {
        EncoderKind::Static => static_circuit(matrix),
        EncoderKind::Pkbse => pkbse_circuit(&pkbse_matrix(matrix)?),
    }
}

/// Encoder gates without pulse, inverse QFT or measurement.
pub fn encoder_body_ops(matrix: &EncodingMatrix, kind: EncoderKind) -> Result<Vec<GateOp>> {
    match kind {
        EncoderKind::Static => static_body_ops(matrix),
        EncoderKind::Pkbse => {
            let layout = check_matrix(matrix)?;
            pkbse_body_ops(&pkbse_matrix(matrix)?, &layout)
        }
    }
}

/// Hadamard on every qubit, qubit `i` measured into clbit `i`.
pub fn equal_superposition_circuit(n: usize) -> Result<Circuit> {
    if n == 0 {
        return Err(Error::EmptyRange);
    }
    let mut c = Circuit::new(n, n)?;
    for q in 0..n {
        c.push(GateOp::h(q))?;
    }
    for q in 0..n {
        c.push(GateOp::measure(q, q))?;
    }
    Ok(c)
}
