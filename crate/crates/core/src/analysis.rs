//! Evaluation protocols: layer-occupancy expressibility over random inputs,
//! and the KLD of each encoder's averaged spinal distribution against equal
//! superposition.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::audio::{EncodingMatrix, FeatureTriple};
use crate::decode::{conditionals_from_weights, layer_table, SampleDistribution};
use crate::encoding::{database_circuit, encoder_circuit, equal_superposition_circuit, EncoderKind, N_BANDS};
use crate::error::{Error, Result};
use crate::qsim::{exact_probabilities_with, run_shots, Circuit, NoiseConfig};
use crate::rng::{self, component, derive_seed};

pub const KLD_FLOOR: f64 = 1e-12;

/// `Σ p ln(p/q)` in nats, with `q` floored at [`KLD_FLOOR`] and renormalized.
pub fn kld(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() || p.is_empty() {
        return Err(Error::SizeMismatch(p.len(), q.len()));
    }
    let floored: Vec<f64> = q.iter().map(|&x| x.max(KLD_FLOOR)).collect();
    let z: f64 = floored.iter().sum();
    let d: f64 = p
        .iter()
        .zip(&floored)
        .filter(|(&pk, _)| pk > 0.0)
        .map(|(&pk, &qk)| pk * (pk / (qk / z)).ln())
        .sum();
    Ok(d.max(0.0))
}

pub fn random_triple(rng: &mut impl Rng) -> FeatureTriple {
    FeatureTriple {
        theta: rng.random_range(0.0..=PI),
        phi: rng.random_range(0.0..TAU),
        lam: rng.random_range(0.0..TAU),
    }
}

/// Independent uniform triples in every cell.
pub fn random_encoding_matrix(
    rng: &mut impl Rng,
    n_bands: usize,
    n_subdivisions: usize,
    source_id: impl Into<String>,
) -> EncodingMatrix {
    let entries = (0..n_bands).map(|_| (0..n_subdivisions).map(|_| random_triple(rng)).collect()).collect();
    EncodingMatrix { source_id: source_id.into(), n_bands, n_subdivisions, entries }
}

/// How a circuit's outcome distribution is obtained.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Sampling {
    /// `None` for exact probabilities.
    pub shots: Option<u64>,
    #[serde(default)]
    pub noise: NoiseConfig,
}

impl Sampling {
    pub fn exact() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        self.noise.validate()?;
        match self.shots {
            Some(0) => Err(Error::ZeroShots),
            None if self.noise.is_active() => Err(Error::NoisyExact),
            _ => Ok(()),
        }
    }

    /// Outcome distribution indexed by classical register value.
    pub fn distribution(&self, circuit: &Circuit, seed: u64) -> Result<Vec<f64>> {
        match self.shots {
            None => Ok(exact_probabilities_with(circuit, &self.noise)?.probs().to_vec()),
            Some(n) => Ok(run_shots(circuit, n, &self.noise, seed)?.frequencies()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExpressibilityConfig {
    pub db_size: usize,
    pub trials: usize,
    pub n_subdivisions: usize,
    pub encoder: EncoderKind,
    pub seed: u64,
    pub sampling: Sampling,
    /// Every database sample shares one random triple set.
    pub clone_database: bool,
}

impl Default for ExpressibilityConfig {
    fn default() -> Self {
        Self {
            db_size: 8,
            trials: 50,
            n_subdivisions: 8,
            encoder: EncoderKind::Static,
            seed: 0,
            sampling: Sampling::exact(),
            clone_database: false,
        }
    }
}

impl ExpressibilityConfig {
    pub fn validate(&self) -> Result<()> {
        if self.db_size < 2 || self.trials == 0 {
            return Err(Error::Config(format!(
                "expressibility needs db_size >= 2 and trials >= 1 (got {}, {})",
                self.db_size, self.trials
            )));
        }
        crate::encoding::RegisterLayout::new(N_BANDS, self.n_subdivisions)?;
        self.sampling.validate()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpressibilityCurve {
    pub config: ExpressibilityConfig,
    pub rng: String,
    /// KLD in nats of each layer's occupant distribution against uniform.
    pub values: Vec<f64>,
}

impl ExpressibilityCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("layer,value\n");
        for (l, v) in self.values.iter().enumerate() {
            let _ = writeln!(out, "{l},{v}");
        }
        out
    }
}

fn sample_id(i: usize, width: usize) -> String {
    format!("s{i:0width$}")
}

/// Random three-band samples run through their database circuits.
pub fn random_database(
    size: usize,
    clone: bool,
    sampling: &Sampling,
    seed: u64,
) -> Result<Vec<SampleDistribution>> {
    let mut rng = rng::seeded(seed);
    let shared: Vec<FeatureTriple> = (0..N_BANDS).map(|_| random_triple(&mut rng)).collect();
    let width = size.to_string().len();
    (0..size)
        .map(|i| {
            let triples = if clone { shared.clone() } else { (0..N_BANDS).map(|_| random_triple(&mut rng)).collect() };
            let probs = sampling.distribution(&database_circuit(&triples)?, derive_seed(seed, i as u64))?;
            SampleDistribution::new(sample_id(i, width), probs)
        })
        .collect()
}

/// Occupancy of every layer, pooled over trials and subdivisions, compared
/// with the uniform distribution over database samples.
pub fn expressibility_curve(cfg: &ExpressibilityConfig) -> Result<ExpressibilityCurve> {
    cfg.validate()?;
    let db_seed = derive_seed(cfg.seed, component::DATABASE);
    let db = random_database(cfg.db_size, cfg.clone_database, &cfg.sampling, db_seed)?;
    let index_of = |id: &str| db.iter().position(|d| d.sample_id == id).expect("sample from database");
    let trial_seed = derive_seed(cfg.seed, component::TRIALS);

    let per_trial = (0..cfg.trials)
        .into_par_iter()
        .map(|m| {
            let mut rng = rng::stream(trial_seed, m as u64);
            let matrix = random_encoding_matrix(&mut rng, N_BANDS, cfg.n_subdivisions, format!("trial-{m}"));
            let bundle = encoder_circuit(&matrix, cfg.encoder)?;
            let shot_seed = derive_seed(trial_seed, (m as u64) << 1 | 1);
            let joint = cfg.sampling.distribution(&bundle.circuit, shot_seed)?;
            let table = layer_table(&conditionals_from_weights(&joint, N_BANDS)?, &db)?;
            let mut counts = vec![vec![0u64; cfg.db_size]; cfg.db_size];
            for col in &table.columns {
                for (layer, entry) in col.iter().enumerate() {
                    counts[layer][index_of(&entry.sample_id)] += 1;
                }
            }
            Ok(counts)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut pooled = vec![vec![0u64; cfg.db_size]; cfg.db_size];
    for counts in per_trial {
        for (acc, row) in pooled.iter_mut().zip(counts) {
            for (a, c) in acc.iter_mut().zip(row) {
                *a += c;
            }
        }
    }
    let uniform = vec![1.0 / cfg.db_size as f64; cfg.db_size];
    let values = pooled
        .iter()
        .map(|row| {
            let total: u64 = row.iter().sum();
            let p: Vec<f64> = row.iter().map(|&c| c as f64 / total as f64).collect();
            kld(&p, &uniform)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExpressibilityCurve { config: cfg.clone(), rng: rng::GENERATOR.into(), values })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KldConfig {
    pub trials: usize,
    pub n_subdivisions: usize,
    pub seed: u64,
    pub sampling: Sampling,
}

impl Default for KldConfig {
    fn default() -> Self {
        Self { trials: 50, n_subdivisions: 8, seed: 0, sampling: Sampling::exact() }
    }
}

impl KldConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("spinal KLD needs trials >= 1".into()));
        }
        crate::encoding::RegisterLayout::new(N_BANDS, self.n_subdivisions)?;
        self.sampling.validate()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KldReport {
    pub config: KldConfig,
    pub rng: String,
    pub reference: String,
    pub reference_distribution: Vec<f64>,
    pub d_static: f64,
    pub d_pkbse: f64,
    pub averaged_static: Vec<f64>,
    pub averaged_pkbse: Vec<f64>,
}

impl KldReport {
    pub fn to_csv(&self) -> String {
        format!("encoder,kld\nstatic,{}\npkbse,{}\n", self.d_static, self.d_pkbse)
    }
}

/// Sums a joint `spinal | timbre` distribution over the timbre field.
pub fn spinal_marginal(joint: &[f64], n_timbre: usize) -> Vec<f64> {
    joint.chunks(1 << n_timbre).map(|row| row.iter().sum()).collect()
}

/// Averaged spinal marginal of one encoder over the given input matrices.
pub fn averaged_spinal(
    matrices: &[EncodingMatrix],
    kind: EncoderKind,
    sampling: &Sampling,
    seed: u64,
) -> Result<Vec<f64>> {
    let marginals = matrices
        .par_iter()
        .enumerate()
        .map(|(m, matrix)| {
            let bundle = encoder_circuit(matrix, kind)?;
            let joint = sampling.distribution(&bundle.circuit, derive_seed(seed, m as u64))?;
            Ok(spinal_marginal(&joint, N_BANDS))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut avg = vec![0.0; marginals[0].len()];
    for m in &marginals {
        for (a, v) in avg.iter_mut().zip(m) {
            *a += v / marginals.len() as f64;
        }
    }
    Ok(avg)
}

/// Both encoders on the same inputs, each against the equal-superposition
/// spinal distribution.
pub fn spinal_kld_for(matrices: &[EncodingMatrix], cfg: &KldConfig) -> Result<KldReport> {
    cfg.validate()?;
    if matrices.is_empty() {
        return Err(Error::Config("spinal KLD needs at least one input matrix".into()));
    }
    let k = cfg.n_subdivisions.trailing_zeros() as usize;
    let shots_seed = derive_seed(cfg.seed, component::SHOTS);
    let reference = cfg.sampling.distribution(&equal_superposition_circuit(k)?, shots_seed)?;
    let averaged_static = averaged_spinal(matrices, EncoderKind::Static, &cfg.sampling, shots_seed ^ 1)?;
    let averaged_pkbse = averaged_spinal(matrices, EncoderKind::Pkbse, &cfg.sampling, shots_seed ^ 2)?;
    Ok(KldReport {
        config: cfg.clone(),
        rng: rng::GENERATOR.into(),
        reference: format!("equal-superposition-{k}"),
        d_static: kld(&averaged_static, &reference)?,
        d_pkbse: kld(&averaged_pkbse, &reference)?,
        reference_distribution: reference,
        averaged_static,
        averaged_pkbse,
    })
}

/// `trials` uniformly random input matrices.
pub fn spinal_kld_report(cfg: &KldConfig) -> Result<KldReport> {
    cfg.validate()?;
    let seed = derive_seed(cfg.seed, component::TRIALS);
    let matrices: Vec<EncodingMatrix> = (0..cfg.trials)
        .map(|m| random_encoding_matrix(&mut rng::stream(seed, m as u64), N_BANDS, cfg.n_subdivisions, format!("trial-{m}")))
        .collect();
    spinal_kld_for(&matrices, cfg)
}
