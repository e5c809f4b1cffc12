//! Command implementations behind the `quiko` binary: database preparation,
//! beat generation and the analysis runs, with JSON/CSV artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::analysis::{
    expressibility_curve, random_encoding_matrix, spinal_kld_report, ExpressibilityConfig, KldConfig,
};
use crate::audio::{extract_matrix, load_wav, AudioBuffer, EncodingMatrix, ExtractionConfig};
use crate::decode::{
    build_schedule, conditional_timbre, layer_table, BeatSchedule, LayerTable, SampleDistribution, ScheduleMeta,
};
use crate::encoding::{
    database_circuit, pkbse_circuit_with, pkbse_matrix, static_circuit_with, EncoderKind, InternalPulse,
    QuikoCircuitBundle, RegisterLayout, N_BANDS,
};
use crate::error::{Error, Result};
use crate::qcompare::{compare_tracks, quiko_block, CompareRun, ComparatorConfig, MatchReport, TrackSpec};
use crate::qsim::{run_shots, NoiseConfig, ShotHistogram};
use crate::rng::{self, component, derive_seed};

pub const DATABASE_VERSION: &str = "quiko-db/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProjectConfig {
    /// Required sample rate of every WAV; `None` accepts any rate.
    pub sample_rate: Option<u32>,
    pub extraction: ExtractionConfig,
    pub shots: u64,
    pub seed: u64,
    pub noise: NoiseConfig,
    pub encoder: EncoderKind,
    pub layer_index: usize,
    pub pulse: InternalPulse,
}

impl Default for ProjectConfig {
    fn default() -> Self {
        Self {
            sample_rate: None,
            extraction: ExtractionConfig::default(),
            shots: 1024,
            seed: 0,
            noise: NoiseConfig::default(),
            encoder: EncoderKind::Static,
            layer_index: 0,
            pulse: InternalPulse::Hadamard,
        }
    }
}

impl ProjectConfig {
    pub fn validate(&self) -> Result<()> {
        self.extraction.validate()?;
        if self.extraction.n_bands() != N_BANDS {
            return Err(Error::Config(format!(
                "{} cutoffs give {} bands; the encoders need {N_BANDS}",
                self.extraction.cutoffs.len(),
                self.extraction.n_bands()
            )));
        }
        let layout = RegisterLayout::new(N_BANDS, self.extraction.n_subdivisions)?;
        self.pulse.ops(&layout.all_qubits())?;
        if self.shots == 0 {
            return Err(Error::ZeroShots);
        }
        if self.sample_rate == Some(0) {
            return Err(Error::Config("sample_rate must be positive".into()));
        }
        self.noise.validate()
    }

    fn load(&self, path: &Path) -> Result<AudioBuffer> {
        let buf = load_wav(path)?;
        match self.sample_rate {
            Some(sr) if sr != buf.sample_rate => Err(Error::UnsupportedWav(format!(
                "{}: sample rate {} Hz, expected {sr} Hz",
                path.display(),
                buf.sample_rate
            ))),
            _ => Ok(buf),
        }
    }
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io { path: path.into(), source })?;
    Ok(serde_json::from_str(&text)?)
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.into(), source })?;
    }
    fs::write(path, text).map_err(|source| Error::Io { path: path.into(), source })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatabaseEntry {
    pub sample_id: String,
    /// File name relative to the prepared directory.
    pub source: String,
    pub matrix: EncodingMatrix,
    pub distribution: SampleDistribution,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkippedFile {
    pub source: String,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatabaseFile {
    pub version: String,
    pub rng: String,
    pub seed: u64,
    pub shots: u64,
    pub entries: Vec<DatabaseEntry>,
    pub skipped: Vec<SkippedFile>,
}

impl DatabaseFile {
    pub fn validate(&self) -> Result<()> {
        if self.version != DATABASE_VERSION {
            return Err(Error::Config(format!("unsupported database version `{}`", self.version)));
        }
        if self.entries.is_empty() {
            return Err(Error::EmptyDatabase);
        }
        let mut ids: Vec<&str> = self.entries.iter().map(|e| e.sample_id.as_str()).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Config(format!("duplicate sample id `{}`", w[0])));
        }
        for e in &self.entries {
            e.distribution.validate()?;
            if e.distribution.sample_id != e.sample_id {
                return Err(Error::Config(format!("entry `{}` holds another sample's distribution", e.sample_id)));
            }
        }
        Ok(())
    }

    pub fn distributions(&self) -> Vec<SampleDistribution> {
        self.entries.iter().map(|e| e.distribution.clone()).collect()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let db: Self = read_json(path)?;
        db.validate()?;
        Ok(db)
    }
}

/// WAV files of a directory in name order.
pub fn list_wavs(dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    let io = |source| Error::Io { path: dir.into(), source };
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(io)? {
        let path = entry.map_err(io)?.path();
        let is_wav = path.extension().and_then(|e| e.to_str()).is_some_and(|e| e.eq_ignore_ascii_case("wav"));
        if path.is_file() && is_wav {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Whole-sample features: one subdivision per band, zero-padded to a single
/// analysis window when shorter.
pub fn sample_features(buf: &AudioBuffer, cfg: &ProjectConfig, id: &str) -> Result<EncodingMatrix> {
    let extraction = ExtractionConfig { n_subdivisions: 1, ..cfg.extraction.clone() };
    let window = extraction.stft.window;
    if buf.len() < window {
        let mut samples = buf.samples.clone();
        samples.resize(window, 0.0);
        return extract_matrix(&buf.with_samples(samples), &extraction, id);
    }
    extract_matrix(buf, &extraction, id)
}

pub fn cmd_prepare_db(dir: impl AsRef<Path>, cfg: &ProjectConfig) -> Result<DatabaseFile> {
    cfg.validate()?;
    let files = list_wavs(&dir)?;
    let db_seed = derive_seed(cfg.seed, component::DATABASE);
    let mut entries = Vec::new();
    let mut skipped = Vec::new();
    for (i, path) in files.iter().enumerate() {
        let source = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let sample_id = path.file_stem().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let prepared = cfg.load(path).and_then(|buf| {
            let matrix = sample_features(&buf, cfg, &sample_id)?;
            let circuit = database_circuit(&matrix.column(0))?;
            let hist = run_shots(&circuit, cfg.shots, &cfg.noise, derive_seed(db_seed, i as u64))?;
            let distribution = SampleDistribution::new(sample_id.clone(), hist.frequencies())?;
            Ok(DatabaseEntry { sample_id: sample_id.clone(), source: source.clone(), matrix, distribution })
        });
        match prepared {
            Ok(entry) => entries.push(entry),
            Err(e) => skipped.push(SkippedFile { source, error: e.to_string() }),
        }
    }
    if entries.is_empty() {
        return Err(match skipped.first() {
            Some(s) => Error::Config(format!("no usable WAV in {}: {}: {}", dir.as_ref().display(), s.source, s.error)),
            None => Error::Config(format!("no WAV files in {}", dir.as_ref().display())),
        });
    }
    let db = DatabaseFile {
        version: DATABASE_VERSION.into(),
        rng: rng::GENERATOR.into(),
        seed: cfg.seed,
        shots: cfg.shots,
        entries,
        skipped,
    };
    db.validate()?;
    Ok(db)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GenerateOutput {
    pub matrix: EncodingMatrix,
    pub histogram: ShotHistogram,
    pub table: LayerTable,
    pub schedule: BeatSchedule,
}

pub fn encode(matrix: &EncodingMatrix, cfg: &ProjectConfig) -> Result<QuikoCircuitBundle> {
    match cfg.encoder {
        EncoderKind::Static => static_circuit_with(matrix, &cfg.pulse),
        EncoderKind::Pkbse => pkbse_circuit_with(&pkbse_matrix(matrix)?, &cfg.pulse),
    }
}

/// Encodes an input buffer and ranks the database against it.
pub fn generate_from_buffer(
    buf: &AudioBuffer,
    source_id: &str,
    db: &DatabaseFile,
    cfg: &ProjectConfig,
) -> Result<GenerateOutput> {
    cfg.validate()?;
    db.validate()?;
    let matrix = extract_matrix(buf, &cfg.extraction, source_id)?;
    let bundle = encode(&matrix, cfg)?;
    let histogram = run_shots(&bundle.circuit, cfg.shots, &cfg.noise, derive_seed(cfg.seed, component::SHOTS))?;
    let conditionals = conditional_timbre(&histogram, bundle.layout.timbre.len())?;
    let table = layer_table(&conditionals, &db.distributions())?;
    let meta = ScheduleMeta {
        encoder_kind: cfg.encoder,
        layer_index: cfg.layer_index,
        seed: cfg.seed,
        shots: Some(cfg.shots),
        noise: cfg.noise.is_active(),
        rng: rng::GENERATOR.into(),
    };
    let schedule = build_schedule(&table, meta)?;
    Ok(GenerateOutput { matrix, histogram, table, schedule })
}

pub fn cmd_generate(input: impl AsRef<Path>, db: &DatabaseFile, cfg: &ProjectConfig) -> Result<GenerateOutput> {
    let input = input.as_ref();
    let buf = cfg.load(input)?;
    let id = input.file_stem().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    generate_from_buffer(&buf, &id, db, cfg)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnalysisKind {
    Expressibility,
    SpinalKld,
    Compare,
}

impl AnalysisKind {
    pub fn name(self) -> &'static str {
        match self {
            AnalysisKind::Expressibility => "expressibility",
            AnalysisKind::SpinalKld => "spinal-kld",
            AnalysisKind::Compare => "compare",
        }
    }
}

impl std::str::FromStr for AnalysisKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "expressibility" => Ok(AnalysisKind::Expressibility),
            "spinal-kld" => Ok(AnalysisKind::SpinalKld),
            "compare" => Ok(AnalysisKind::Compare),
            other => Err(Error::Config(format!("unknown analysis `{other}` (expressibility|spinal-kld|compare)"))),
        }
    }
}

/// Input of the comparator analysis. Tracks come from `tracks`, or from the
/// database at `database` when that list is empty; the input is the WAV at
/// `input`, or a random matrix drawn from `seed` when absent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CompareConfig {
    pub input: Option<PathBuf>,
    pub database: Option<PathBuf>,
    pub tracks: Vec<TrackSpec>,
    pub encoder: EncoderKind,
    pub comparator: ComparatorConfig,
    pub shots: u64,
    pub seed: u64,
    pub noise: NoiseConfig,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self {
            input: None,
            database: None,
            tracks: Vec::new(),
            encoder: EncoderKind::Static,
            comparator: ComparatorConfig::default(),
            shots: 1024,
            seed: 0,
            noise: NoiseConfig::default(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalyzeConfig {
    pub project: ProjectConfig,
    pub expressibility: ExpressibilityConfig,
    pub spinal_kld: KldConfig,
    pub compare: CompareConfig,
}

impl AnalyzeConfig {
    /// Relative paths inside the config resolve against `base`.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut cfg: Self = read_json(path)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.compare.input, &mut cfg.compare.database].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Artifacts {
    pub json: String,
    pub csv: String,
}

pub fn run_compare(cfg: &AnalyzeConfig) -> Result<MatchReport> {
    let cc = &cfg.compare;
    if cc.shots == 0 {
        return Err(Error::ZeroShots);
    }
    cc.noise.validate()?;
    let tracks = if cc.tracks.is_empty() {
        let path = cc.database.as_ref().ok_or_else(|| Error::Config("compare needs `tracks` or `database`".into()))?;
        DatabaseFile::load(path)?
            .entries
            .iter()
            .map(|e| TrackSpec::new(e.sample_id.clone(), e.matrix.column(0)))
            .collect::<Result<Vec<_>>>()?
    } else {
        cc.tracks.clone()
    };
    let matrix = match &cc.input {
        Some(path) => {
            let buf = cfg.project.load(path)?;
            extract_matrix(&buf, &cfg.project.extraction, "input")?
        }
        None => {
            let mut rng = rng::seeded(derive_seed(cc.seed, component::INPUT));
            random_encoding_matrix(&mut rng, N_BANDS, cfg.project.extraction.n_subdivisions, "random-input")
        }
    };
    let layout = RegisterLayout::new(matrix.n_bands, matrix.n_subdivisions)?;
    let prep = quiko_block(&matrix, cc.encoder, &cfg.project.pulse)?;
    let run = CompareRun { shots: cc.shots, noise: cc.noise, seed: derive_seed(cc.seed, component::TRACKS) };
    compare_tracks(&prep, &layout, &tracks, &cc.comparator, &run)
}

pub fn cmd_analyze(kind: AnalysisKind, cfg: &AnalyzeConfig) -> Result<Artifacts> {
    match kind {
        AnalysisKind::Expressibility => {
            let curve = expressibility_curve(&cfg.expressibility)?;
            Ok(Artifacts { json: to_json(&curve)?, csv: curve.to_csv() })
        }
        AnalysisKind::SpinalKld => {
            let report = spinal_kld_report(&cfg.spinal_kld)?;
            Ok(Artifacts { json: to_json(&report)?, csv: report.to_csv() })
        }
        AnalysisKind::Compare => {
            cfg.project.validate()?;
            let report = run_compare(cfg)?;
            Ok(Artifacts { json: to_json(&report)?, csv: report.to_csv() })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::{synth, write_wav};

    const FS: u32 = 22_050;

    fn small_db(dir: &Path) {
        write_wav(dir.join("kick.wav"), &synth::kick(FS)).unwrap();
        write_wav(dir.join("hat.wav"), &synth::hihat(FS, 2)).unwrap();
    }

    #[test]
    fn silent_sample_gives_point_mass() {
        let dir = tempfile::tempdir().unwrap();
        write_wav(dir.path().join("quiet.wav"), &synth::silence(0.2, FS)).unwrap();
        let db = cmd_prepare_db(dir.path(), &ProjectConfig::default()).unwrap();
        assert_eq!(db.entries.len(), 1);
        assert_eq!(db.entries[0].distribution.probs[0], 1.0);
    }

    #[test]
    fn unreadable_files_are_listed() {
        let dir = tempfile::tempdir().unwrap();
        small_db(dir.path());
        fs::write(dir.path().join("broken.wav"), b"not a wav").unwrap();
        let db = cmd_prepare_db(dir.path(), &ProjectConfig::default()).unwrap();
        assert_eq!(db.entries.len(), 2);
        assert_eq!(db.skipped.len(), 1);
        assert_eq!(db.skipped[0].source, "broken.wav");

        let only_broken = tempfile::tempdir().unwrap();
        fs::write(only_broken.path().join("x.wav"), b"junk").unwrap();
        assert!(cmd_prepare_db(only_broken.path(), &ProjectConfig::default()).is_err());
        assert!(cmd_prepare_db(tempfile::tempdir().unwrap().path(), &ProjectConfig::default()).is_err());
    }

    #[test]
    fn prepare_is_reproducible() {
        let dir = tempfile::tempdir().unwrap();
        small_db(dir.path());
        let cfg = ProjectConfig { seed: 11, ..Default::default() };
        let a = to_json(&cmd_prepare_db(dir.path(), &cfg).unwrap()).unwrap();
        let b = to_json(&cmd_prepare_db(dir.path(), &cfg).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn silent_input_schedule() {
        let dir = tempfile::tempdir().unwrap();
        small_db(dir.path());
        let cfg = ProjectConfig::default();
        let db = cmd_prepare_db(dir.path(), &cfg).unwrap();
        let out = generate_from_buffer(&synth::silence(2.0, FS), "silence", &db, &cfg).unwrap();
        assert_eq!(out.schedule.slots.len(), 8);
        assert!(!out.table.low_confidence[0]);
        assert!(out.table.low_confidence[1..].iter().all(|&f| f));
        out.schedule.validate().unwrap();
    }

    #[test]
    fn config_validation() {
        let two_bands = ProjectConfig {
            extraction: ExtractionConfig { cutoffs: vec![500.0], ..Default::default() },
            ..Default::default()
        };
        assert!(two_bands.validate().is_err());
        assert!(ProjectConfig { shots: 0, ..Default::default() }.validate().is_err());
        let pulse = ProjectConfig { pulse: InternalPulse::Ry(vec![0.0; 2]), ..Default::default() };
        assert!(pulse.validate().is_err());
        assert!("histogram".parse::<AnalysisKind>().is_err());
        let cfg: AnalyzeConfig = serde_json::from_str(r#"{"expressibility":{"trials":3}}"#).unwrap();
        assert_eq!((cfg.expressibility.trials, cfg.expressibility.db_size), (3, 8));
    }
}
