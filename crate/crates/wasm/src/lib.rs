//! WebAssembly bindings for the static demo page in `www/`.

use quiko::analysis::{kld, random_encoding_matrix, spinal_marginal};
use quiko::audio::EncodingMatrix;
use quiko::decode::fidelity;
use quiko::encoding::{encoder_circuit, EncoderKind, N_BANDS};
use quiko::qsim::{exact_probabilities, qpe_circuit};
use serde::Serialize;
use wasm_bindgen::prelude::*;

pub fn qpe_probs(angle: f64, n_counting: usize) -> quiko::Result<Vec<f64>> {
    Ok(exact_probabilities(&qpe_circuit(angle, n_counting)?)?.probs().to_vec())
}

#[derive(Serialize)]
pub struct EncoderView {
    pub encoder: EncoderKind,
    pub joint: Vec<f64>,
    pub spinal: Vec<f64>,
    pub gate_cost: u64,
    pub matrix: EncodingMatrix,
}

/// Exact output of one encoder on a random (or all-zero) feature matrix.
pub fn encoder_view(encoder: &str, seed: u64, zero: bool) -> quiko::Result<EncoderView> {
    let kind: EncoderKind = encoder.parse()?;
    let matrix = if zero {
        EncodingMatrix::zeros("zero", N_BANDS, 8)
    } else {
        random_encoding_matrix(&mut quiko::rng::seeded(seed), N_BANDS, 8, format!("seed-{seed}"))
    };
    let bundle = encoder_circuit(&matrix, kind)?;
    let joint = exact_probabilities(&bundle.circuit)?.probs().to_vec();
    Ok(EncoderView {
        encoder: kind,
        spinal: spinal_marginal(&joint, N_BANDS),
        gate_cost: bundle.circuit.gate_cost(),
        joint,
        matrix,
    })
}

#[derive(Serialize)]
pub struct Comparison {
    pub fidelity: f64,
    pub kld_pq: f64,
    pub kld_qp: f64,
}

/// Normalizes two weight vectors and compares them.
pub fn compare(p: &[f64], q: &[f64]) -> quiko::Result<Comparison> {
    let norm = |w: &[f64]| -> quiko::Result<Vec<f64>> {
        let total: f64 = w.iter().sum();
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) || total <= 0.0 {
            return Err(quiko::Error::Unnormalized(total));
        }
        Ok(w.iter().map(|x| x / total).collect())
    };
    let (p, q) = (norm(p)?, norm(q)?);
    Ok(Comparison { fidelity: fidelity(&p, &q)?, kld_pq: kld(&p, &q)?, kld_qp: kld(&q, &p)? })
}

fn js(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen(js_name = qpeDistribution)]
pub fn qpe_distribution(angle: f64, n_counting: usize) -> Result<Vec<f64>, JsError> {
    qpe_probs(angle, n_counting).map_err(js)
}

#[wasm_bindgen(js_name = encoderDistribution)]
pub fn encoder_distribution(encoder: &str, seed: u32, zero: bool) -> Result<String, JsError> {
    let view = encoder_view(encoder, u64::from(seed), zero).map_err(js)?;
    serde_json::to_string(&view).map_err(js)
}

#[wasm_bindgen(js_name = compareDistributions)]
pub fn compare_distributions(p: Vec<f64>, q: Vec<f64>) -> Result<String, JsError> {
    serde_json::to_string(&compare(&p, &q).map_err(js)?).map_err(js)
}
