//! Key-value settings shared by config files and command-line flags.
//!
//! A config file holds one `key = value` pair per line; blank lines and lines
//! starting with `#` are ignored. Every key is also accepted as a `--key` flag,
//! and [`Settings::render`] emits a file that parses back to the same settings.

use std::fmt::Write as _;
use std::path::Path;

use nrvad_core::pipeline::{Mode, PipelineConfig, ScorerBackend};
use nrvad_core::postprocess::{default_quorum, VoteConfig};
use nrvad_core::preprocess::{GateThreshold, NoiseScope, PreprocessConfig, Stage};
use nrvad_core::scorer::ReferenceScorer;

use crate::error::{Error, Result};

/// Every recognised key with a one-line description.
pub const KEYS: &[(&str, &str)] = &[
    ("mode", "baseline | vad1 | vad2"),
    ("segment-ms", "segment length in milliseconds"),
    ("window", "segments per voting window (W)"),
    ("quorum", "positive segments a window needs (default: min(ceil(W/2)+1, W))"),
    ("thresh", "segment score threshold"),
    ("alpha", "over-subtraction factor, >= 1"),
    ("beta", "spectral floor, in [0, 1]"),
    ("theta-rel", "gate threshold as a fraction of the segment's mean frame energy"),
    ("theta-abs", "gate threshold in squared-amplitude units per frame"),
    ("target-rms", "RMS normalization target"),
    ("noise-frames", "leading STFT frames averaged into the noise estimate"),
    ("noise-scope", "clip | segment: where the noise estimate is taken"),
    ("stages", "comma-separated pre-processing order (spectral-subtract, energy-gate, rms-normalize)"),
    ("fft-len", "STFT length for spectral subtraction (power of two)"),
    ("stft-hop", "STFT hop in samples"),
    ("gate-frame-ms", "energy gate frame length"),
    ("gate-hop-ms", "energy gate hop"),
    ("scorer-bands", "reference scorer mel bands"),
    ("scorer-frame-ms", "reference scorer frame length"),
    ("scorer-hop-ms", "reference scorer hop"),
    ("backend", "reference | score-file"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub mode: Option<Mode>,
    pub segment_ms: f64,
    pub window: usize,
    /// `None` derives the quorum from the window.
    pub quorum: Option<usize>,
    pub thresh: f64,
    pub preprocess: PreprocessConfig,
    pub scorer: ReferenceScorer,
    pub backend: ScorerBackend,
}

impl Default for Settings {
    fn default() -> Self {
        let p = PipelineConfig::default();
        Self {
            mode: None,
            segment_ms: p.segment_ms,
            window: p.vote.window(),
            quorum: None,
            thresh: p.thresh,
            preprocess: p.preprocess,
            scorer: p.scorer,
            backend: p.backend,
        }
    }
}

impl Settings {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let mut s = Self::default();
        s.apply_file(path)?;
        Ok(s)
    }

    pub fn apply_file(&mut self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.apply_text(&text)
            .map_err(|e| Error::Usage(format!("{}: {}", path.display(), strip_usage(e))))
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Usage(format!("line {}: expected `key = value`", i + 1)));
            };
            self.set(key.trim(), value.trim())
                .map_err(|e| Error::Usage(format!("line {}: {}", i + 1, strip_usage(e))))?;
        }
        Ok(())
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = || Error::Usage(format!("{key}: invalid value {value:?}"));
        let real = || value.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(bad);
        let count = || value.parse::<usize>().map_err(|_| bad());
        let pre = &mut self.preprocess;
        match key {
            "mode" => self.mode = Some(Mode::from_name(value).ok_or_else(bad)?),
            "segment-ms" => self.segment_ms = real()?,
            "window" => self.window = count()?,
            "quorum" => self.quorum = Some(count()?),
            "thresh" => self.thresh = real()?,
            "alpha" => pre.alpha = real()?,
            "beta" => pre.beta = real()?,
            "theta-rel" => pre.theta = GateThreshold::Relative(real()?),
            "theta-abs" => pre.theta = GateThreshold::Absolute(real()?),
            "target-rms" => pre.target_rms = real()?,
            "noise-frames" => pre.noise_estimation_frames = count()?,
            "noise-scope" => pre.noise_scope = NoiseScope::from_name(value).ok_or_else(bad)?,
            "stages" => {
                pre.stage_order = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| Stage::from_name(s).ok_or_else(bad))
                    .collect::<Result<_>>()?
            }
            "fft-len" => pre.fft_len = count()?,
            "stft-hop" => pre.stft_hop = count()?,
            "gate-frame-ms" => pre.gate_frame_ms = real()?,
            "gate-hop-ms" => pre.gate_hop_ms = real()?,
            "scorer-bands" => self.scorer.bands = count()?,
            "scorer-frame-ms" => self.scorer.frame_ms = real()?,
            "scorer-hop-ms" => self.scorer.hop_ms = real()?,
            "backend" => self.backend = ScorerBackend::from_name(value).ok_or_else(bad)?,
            _ => return Err(Error::Usage(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn effective_quorum(&self) -> usize {
        self.quorum.unwrap_or_else(|| default_quorum(self.window))
    }

    /// Validated pipeline configuration for `mode`.
    pub fn pipeline(&self, mode: Mode) -> Result<PipelineConfig> {
        let usage = |e: nrvad_core::Error| Error::Usage(e.to_string());
        let cfg = PipelineConfig {
            mode,
            segment_ms: self.segment_ms,
            preprocess: self.preprocess.clone(),
            vote: VoteConfig::new(self.window, self.effective_quorum()).map_err(usage)?,
            thresh: self.thresh,
            scorer: self.scorer.clone(),
            backend: self.backend,
        };
        cfg.validate().map_err(usage)?;
        if mode.preprocess_enabled() && self.backend == ScorerBackend::ScoreFile {
            return Err(Error::Usage("vad2 needs audio; it cannot run on the score-file backend".into()));
        }
        Ok(cfg)
    }

    /// Config-file text covering every key, resolved to its current value.
    pub fn render(&self) -> String {
        let pre = &self.preprocess;
        let stages: Vec<&str> = pre.stage_order.iter().map(|s| s.name()).collect();
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        if let Some(mode) = self.mode {
            put("mode", mode.name().into());
        }
        put("segment-ms", self.segment_ms.to_string());
        put("window", self.window.to_string());
        put("quorum", self.effective_quorum().to_string());
        put("thresh", self.thresh.to_string());
        put("alpha", pre.alpha.to_string());
        put("beta", pre.beta.to_string());
        match pre.theta {
            GateThreshold::Relative(v) => put("theta-rel", v.to_string()),
            GateThreshold::Absolute(v) => put("theta-abs", v.to_string()),
        }
        put("target-rms", pre.target_rms.to_string());
        put("noise-frames", pre.noise_estimation_frames.to_string());
        put("noise-scope", pre.noise_scope.name().into());
        put("stages", stages.join(","));
        put("fft-len", pre.fft_len.to_string());
        put("stft-hop", pre.stft_hop.to_string());
        put("gate-frame-ms", pre.gate_frame_ms.to_string());
        put("gate-hop-ms", pre.gate_hop_ms.to_string());
        put("scorer-bands", self.scorer.bands.to_string());
        put("scorer-frame-ms", self.scorer.frame_ms.to_string());
        put("scorer-hop-ms", self.scorer.hop_ms.to_string());
        put("backend", self.backend.name().into());
        out
    }
}

fn strip_usage(e: Error) -> String {
    match e {
        Error::Usage(m) => m,
        other => other.to_string(),
    }
}
