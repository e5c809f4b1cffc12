use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use quiko::encoding::EncoderKind;
use quiko::project::{
    cmd_analyze, cmd_generate, cmd_prepare_db, read_json, to_json, write_text, AnalysisKind, AnalyzeConfig,
    DatabaseFile, ProjectConfig,
};

#[derive(Parser)]
#[command(name = "quiko", version, about = "Quantum-encoded beat generation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Encoder {
    Static,
    Pkbse,
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum Analysis {
    Expressibility,
    SpinalKld,
    Compare,
}

#[derive(Subcommand)]
enum Command {
    /// Extract features from every WAV in a directory and store their distributions.
    PrepareDb {
        dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Project config JSON; defaults apply to missing fields.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        shots: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        noise: Option<Switch>,
    },
    /// Encode an input WAV and write the beat schedule and layer table.
    Generate {
        wav: PathBuf,
        #[arg(long)]
        db: PathBuf,
        #[arg(long, value_enum)]
        encoder: Option<Encoder>,
        #[arg(long)]
        layer: Option<usize>,
        #[arg(long)]
        shots: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        noise: Option<Switch>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Directory receiving schedule.json and layers.json.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Run an analysis and write `<kind>.json` and `<kind>.csv`.
    Analyze {
        #[arg(value_enum)]
        kind: Analysis,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

fn project_config(path: Option<&Path>) -> Result<ProjectConfig> {
    match path {
        Some(p) => read_json(p).with_context(|| format!("reading config {}", p.display())),
        None => Ok(ProjectConfig::default()),
    }
}

fn apply_overrides(cfg: &mut ProjectConfig, shots: Option<u64>, seed: Option<u64>, noise: Option<Switch>) {
    if let Some(s) = shots {
        cfg.shots = s;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(n) = noise {
        cfg.noise.enabled = matches!(n, Switch::On);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::PrepareDb { dir, out, config, shots, seed, noise } => {
            let mut cfg = project_config(config.as_deref())?;
            apply_overrides(&mut cfg, shots, seed, noise);
            let db = cmd_prepare_db(&dir, &cfg)?;
            for s in &db.skipped {
                eprintln!("skipped {}: {}", s.source, s.error);
            }
            write_text(&out, &to_json(&db)?)?;
            println!("wrote {} entries to {}", db.entries.len(), out.display());
        }
        Command::Generate { wav, db, encoder, layer, shots, seed, noise, config, out_dir } => {
            let mut cfg = project_config(config.as_deref())?;
            apply_overrides(&mut cfg, shots, seed, noise);
            if let Some(e) = encoder {
                cfg.encoder = match e {
                    Encoder::Static => EncoderKind::Static,
                    Encoder::Pkbse => EncoderKind::Pkbse,
                };
            }
            if let Some(l) = layer {
                cfg.layer_index = l;
            }
            let db = DatabaseFile::load(&db).with_context(|| format!("loading database {}", db.display()))?;
            let out = cmd_generate(&wav, &db, &cfg)?;
            let schedule = out_dir.join("schedule.json");
            write_text(&schedule, &to_json(&out.schedule)?)?;
            write_text(out_dir.join("layers.json"), &to_json(&out.table)?)?;
            println!("wrote {}", schedule.display());
        }
        Command::Analyze { kind, config, out_dir } => {
            let cfg = match &config {
                Some(p) => AnalyzeConfig::load(p).with_context(|| format!("reading config {}", p.display()))?,
                None => AnalyzeConfig::default(),
            };
            let kind = match kind {
                Analysis::Expressibility => AnalysisKind::Expressibility,
                Analysis::SpinalKld => AnalysisKind::SpinalKld,
                Analysis::Compare => AnalysisKind::Compare,
            };
            let artifacts = cmd_analyze(kind, &cfg)?;
            let json = out_dir.join(format!("{}.json", kind.name()));
            write_text(&json, &artifacts.json)?;
            write_text(out_dir.join(format!("{}.csv", kind.name())), &artifacts.csv)?;
            println!("wrote {}", json.display());
        }
    }
    Ok(())
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
