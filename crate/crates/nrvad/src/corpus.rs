//! Writes a synthetic corpus to disk: clip WAVs, mixture stems and a manifest.
//!
//! Layout under the output directory:
//!
//! ```text
//! manifest.tsv
//! clips/00000_clean_speech.wav
//! stems/00100_clean.wav   # noisy-speech components, scaled as mixed
//! stems/00100_noise.wav
//! ```

use std::path::{Path, PathBuf};

use nrvad_core::synth::{synthesize_clip, CorpusConfig, SynthClip};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::manifest::{Manifest, ManifestEntry};
use crate::wav::write_wav;

pub const MANIFEST_NAME: &str = "manifest.tsv";

pub fn clip_path(out: &Path, clip: &SynthClip) -> PathBuf {
    out.join("clips").join(format!("{:05}_{}.wav", clip.index, clip.class.name()))
}

pub fn stem_paths(out: &Path, index: usize) -> (PathBuf, PathBuf) {
    let dir = out.join("stems");
    (dir.join(format!("{index:05}_clean.wav")), dir.join(format!("{index:05}_noise.wav")))
}

/// Generates every clip of `cfg` on `pool`, writes it under `out` and returns the
/// manifest (also written to `out/manifest.tsv`). Output bytes depend only on `cfg`.
pub fn generate_corpus(cfg: &CorpusConfig, out: &Path, pool: &rayon::ThreadPool) -> Result<Manifest> {
    cfg.validate().map_err(|e| Error::Usage(e.to_string()))?;
    for dir in [out.to_path_buf(), out.join("clips"), out.join("stems")] {
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    }
    let entries = pool.install(|| {
        (0..cfg.total())
            .into_par_iter()
            .map(|i| write_clip(cfg, i, out))
            .collect::<Result<Vec<_>>>()
    })?;
    let manifest = Manifest { entries };
    manifest.write(out.join(MANIFEST_NAME))?;
    Ok(manifest)
}

fn write_clip(cfg: &CorpusConfig, index: usize, out: &Path) -> Result<ManifestEntry> {
    let clip = synthesize_clip(cfg, index)?;
    let path = clip_path(out, &clip);
    write_wav(&clip.audio, &path)?;
    if let Some((clean, noise)) = &clip.stems {
        let (c, n) = stem_paths(out, index);
        write_wav(clean, c)?;
        write_wav(noise, n)?;
    }
    Ok(ManifestEntry { path, label: clip.class, snr_db: clip.snr_db, duration_s: clip.audio.duration_s() })
}
