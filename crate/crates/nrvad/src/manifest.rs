//! Tab-separated clip manifests: `path<TAB>label<TAB>snr_db-or-NA<TAB>duration_s`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nrvad_core::synth::ClipClass;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub label: ClipClass,
    pub snr_db: Option<f64>,
    pub duration_s: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Parses manifest text. Relative paths are joined onto `base`; blank
    /// lines and lines starting with `#` are skipped.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fmt = |m: String| Error::Format(format!("manifest line {}: {m}", i + 1));
            let fields: Vec<&str> = line.split('\t').collect();
            let [path, label, snr, duration] = fields[..] else {
                return Err(fmt(format!("{} fields, expected 4", fields.len())));
            };
            let label = ClipClass::from_name(label).ok_or_else(|| fmt(format!("unknown label {label:?}")))?;
            let snr_db = match snr {
                "NA" => None,
                s => Some(s.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| fmt(format!("invalid snr {s:?}")))?),
            };
            let duration_s = duration
                .parse::<f64>()
                .ok()
                .filter(|d| d.is_finite() && *d >= 0.0)
                .ok_or_else(|| fmt(format!("invalid duration {duration:?}")))?;
            if path.is_empty() {
                return Err(fmt("empty path".into()));
            }
            entries.push(ManifestEntry { path: base.join(path), label, snr_db, duration_s });
        }
        Ok(Manifest { entries })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new("")))
    }

    /// Renders entries with paths relative to `base` where possible.
    pub fn render(&self, base: &Path) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let path = e.path.strip_prefix(base).unwrap_or(&e.path);
            let snr = e.snr_db.map_or_else(|| "NA".to_string(), |v| v.to_string());
            let _ = writeln!(out, "{}\t{}\t{snr}\t{:.3}", path.display(), e.label.name(), e.duration_s);
        }
        out
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let base = path.parent().unwrap_or(Path::new(""));
        std::fs::write(path, self.render(base)).map_err(|e| Error::io(path, e))
    }
}
