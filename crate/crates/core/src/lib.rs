//! Quantum beat generation: audio features are encoded onto simulated
//! circuits, and the measured statistics pick drum samples per subdivision.

pub mod analysis;
pub mod audio;
pub mod decode;
pub mod encoding;
pub mod error;
pub mod project;
pub mod qcompare;
pub mod qsim;
pub mod rng;

pub use error::{Error, Result};
