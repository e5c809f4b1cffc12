use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit index {index} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("classical bit index {index} out of range for {n_clbits} classical bits")]
    ClbitOutOfRange { index: usize, n_clbits: usize },

    #[error("qubit {0} used more than once in a single operation")]
    DuplicateQubit(usize),

    #[error("operation `{0}` is not unitary")]
    NonUnitary(&'static str),

    #[error("malformed operation: {0}")]
    MalformedOp(String),

    #[error("empty qubit range")]
    EmptyRange,

    #[error("register of {n} qubits exceeds the limit of {max}")]
    TooManyQubits { n: usize, max: usize },

    #[error("{n} classical bits exceed the dense-distribution limit of {max}")]
    TooManyClbits { n: usize, max: usize },

    #[error("exact mode is noiseless only; disable noise or use run_shots")]
    NoisyExact,

    #[error("branch enumeration exceeded {0} branches")]
    BranchLimit(usize),

    #[error("shot count must be at least 1")]
    ZeroShots,

    #[error("probability {name} = {value} is outside [0, 1]")]
    InvalidProbability { name: &'static str, value: f64 },

    #[error("distribution is not normalized (sum = {0})")]
    Unnormalized(f64),

    #[error("distribution sizes differ: {0} vs {1}")]
    SizeMismatch(usize, usize),

    #[error("histogram key `{key}` does not have width {width}")]
    MalformedKey { key: String, width: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("input too short: {samples} samples cannot fill {segments} segments of at least {window} samples; use a longer input or fewer subdivisions")]
    InputTooShort { samples: usize, segments: usize, window: usize },

    #[error("unsupported wav format: {0}")]
    UnsupportedWav(String),

    #[error("empty sample database")]
    EmptyDatabase,

    #[error("layer {layer} out of range ({n_layers} layers)")]
    LayerOutOfRange { layer: usize, n_layers: usize },

    #[error("{0}")]
    Wav(#[from] hound::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
