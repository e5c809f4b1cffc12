//! Writes the synthetic WAV fixtures used by the CLI acceptance tests.
//!
//! `cargo run -p quiko-core --example make_fixtures -- <out-dir>`

use std::path::PathBuf;

use quiko::audio::{synth, write_wav};

const FS: u32 = 22_050;

fn main() -> quiko::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "crates/cli/tests/fixtures".into()));
    let db = out.join("db");
    std::fs::create_dir_all(&db).map_err(|source| quiko::Error::Io { path: db.clone(), source })?;
    write_wav(out.join("groove.wav"), &synth::groove(2.0, FS, 1))?;
    write_wav(db.join("kick.wav"), &synth::kick(FS))?;
    write_wav(db.join("snare.wav"), &synth::snare(FS, 2))?;
    write_wav(db.join("hihat.wav"), &synth::hihat(FS, 3))?;
    write_wav(db.join("pad.wav"), &synth::pad(220.0, 0.5, FS))?;
    println!("fixtures written to {}", out.display());
    Ok(())
}
