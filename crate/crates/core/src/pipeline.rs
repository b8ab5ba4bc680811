//! End-to-end detector: segment, pre-process, score, decide per segment,
//! vote over sliding windows, decide for the clip.

use alloc::vec;
use alloc::vec::Vec;

use crate::aggregate::{decide_segment, SegmentScore};
use crate::buffer::{ms_to_samples, AudioBuffer};
use crate::error::{bail, Result};
use crate::postprocess::{self, VadDecision, VoteConfig};
use crate::preprocess::{estimate_noise_for, preprocess_segment_with_noise, NoiseScope, PreprocessConfig, Stage};
use crate::scorer::{FrameScoreMatrix, FrameScorer, ReferenceScorer};
use crate::PIPELINE_RATE_HZ;

/// Decision threshold used when none is configured: the baseline-optimal
/// threshold of the reference scorer on the synthetic corpus (24.3-24.5
/// across seeds).
pub const DEFAULT_THRESH: f64 = 24.4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mode {
    /// One decision over the whole clip, no pre-processing, no voting.
    Baseline,
    /// Per-segment decisions with majority voting.
    Vad1,
    /// Pre-processing, per-segment decisions and majority voting.
    Vad2,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Baseline, Mode::Vad1, Mode::Vad2];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Baseline => "baseline",
            Mode::Vad1 => "vad1",
            Mode::Vad2 => "vad2",
        }
    }

    pub fn from_name(name: &str) -> Option<Mode> {
        Mode::ALL.into_iter().find(|m| m.name() == name)
    }

    pub fn preprocess_enabled(self) -> bool {
        self == Mode::Vad2
    }

    pub fn vote_enabled(self) -> bool {
        self != Mode::Baseline
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScorerBackend {
    Reference,
    /// Scores computed elsewhere and read from score files.
    ScoreFile,
}

impl ScorerBackend {
    pub fn name(self) -> &'static str {
        match self {
            ScorerBackend::Reference => "reference",
            ScorerBackend::ScoreFile => "score-file",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [ScorerBackend::Reference, ScorerBackend::ScoreFile].into_iter().find(|b| b.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub mode: Mode,
    pub segment_ms: f64,
    pub preprocess: PreprocessConfig,
    pub vote: VoteConfig,
    pub thresh: f64,
    pub scorer: ReferenceScorer,
    pub backend: ScorerBackend,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self::for_mode(Mode::Vad2)
    }
}

impl PipelineConfig {
    pub fn for_mode(mode: Mode) -> Self {
        Self {
            mode,
            segment_ms: 200.0,
            preprocess: PreprocessConfig::default(),
            vote: VoteConfig::default(),
            thresh: DEFAULT_THRESH,
            scorer: ReferenceScorer::default(),
            backend: ScorerBackend::Reference,
        }
    }

    pub fn with_mode(&self, mode: Mode) -> Self {
        Self { mode, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.segment_ms > 0.0 && self.segment_ms.is_finite()) {
            bail!(Argument, "segment length must be positive");
        }
        if !self.thresh.is_finite() {
            bail!(Argument, "threshold must be finite");
        }
        ReferenceScorer::new(self.scorer.bands, self.scorer.frame_ms, self.scorer.hop_ms)?;
        self.preprocess.validate()
    }
}

/// Non-overlapping segments of `segment_ms`; the last one is zero-padded.
pub fn segment(buf: &AudioBuffer, segment_ms: f64) -> Result<Vec<AudioBuffer>> {
    if buf.is_empty() {
        bail!(Argument, "cannot segment an empty buffer");
    }
    let seg_len = ms_to_samples(segment_ms, buf.sample_rate_hz());
    if seg_len == 0 {
        bail!(Argument, "segment of {segment_ms} ms is shorter than one sample");
    }
    buf.samples()
        .chunks(seg_len)
        .map(|chunk| {
            let mut s = chunk.to_vec();
            s.resize(seg_len, 0.0);
            AudioBuffer::new(s, buf.sample_rate_hz())
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub mode: Mode,
    /// One entry per segment; a single whole-clip entry in baseline mode.
    pub segments: Vec<SegmentScore>,
    pub decision: VadDecision,
    /// Continuous clip statistic for threshold sweeps: the whole-clip score in
    /// baseline mode, otherwise the largest windowed mean of segment scores.
    pub clip_score: f64,
}

impl PipelineOutput {
    pub fn segment_values(&self) -> Vec<f64> {
        self.segments.iter().map(|s| s.value).collect()
    }
}

/// Runs the configured detector on a 16 kHz clip.
pub fn run_pipeline<S: FrameScorer + ?Sized>(
    buf: &AudioBuffer,
    cfg: &PipelineConfig,
    scorer: &S,
) -> Result<PipelineOutput> {
    cfg.validate()?;
    if buf.sample_rate_hz() != PIPELINE_RATE_HZ {
        bail!(Argument, "pipeline expects {PIPELINE_RATE_HZ} Hz input, got {}", buf.sample_rate_hz());
    }
    if buf.is_empty() {
        bail!(Argument, "empty clip");
    }
    if !cfg.mode.vote_enabled() {
        let whole = decide_segment(&scorer.score(buf)?, cfg.thresh);
        return finish(cfg, vec![whole]);
    }
    let pre = &cfg.preprocess;
    let clip_noise = if cfg.mode.preprocess_enabled()
        && pre.noise_scope == NoiseScope::Clip
        && pre.stage_order.contains(&Stage::SpectralSubtract)
    {
        Some(estimate_noise_for(buf, pre)?)
    } else {
        None
    };
    let segments = segment(buf, cfg.segment_ms)?
        .iter()
        .map(|seg| {
            let input = if cfg.mode.preprocess_enabled() {
                preprocess_segment_with_noise(seg, pre, clip_noise.as_ref())?
            } else {
                seg.clone()
            };
            Ok(decide_segment(&scorer.score(&input)?, cfg.thresh))
        })
        .collect::<Result<Vec<_>>>()?;
    finish(cfg, segments)
}

/// Runs the decision stages on precomputed frame scores covering a whole clip.
/// Pre-processing acts on audio, so `vad2` is rejected here.
pub fn run_pipeline_on_scores(m: &FrameScoreMatrix, cfg: &PipelineConfig) -> Result<PipelineOutput> {
    cfg.validate()?;
    if cfg.mode.preprocess_enabled() {
        bail!(Argument, "mode {} needs audio input; score files bypass pre-processing", cfg.mode.name());
    }
    if !cfg.mode.vote_enabled() {
        return finish(cfg, vec![decide_segment(m, cfg.thresh)]);
    }
    let rows = (libm::round(cfg.segment_ms / m.frame_duration_ms()) as usize).max(1);
    let segments = (0..m.frames())
        .step_by(rows)
        .map(|start| Ok(decide_segment(&m.slice_rows(start, (start + rows).min(m.frames()))?, cfg.thresh)))
        .collect::<Result<Vec<_>>>()?;
    finish(cfg, segments)
}

fn finish(cfg: &PipelineConfig, segments: Vec<SegmentScore>) -> Result<PipelineOutput> {
    let values: Vec<f64> = segments.iter().map(|s| s.value).collect();
    let decision = redecide(&values, cfg.mode, &cfg.vote, cfg.thresh)?;
    let clip_score = clip_statistic(&values, cfg.mode, &cfg.vote);
    Ok(PipelineOutput { mode: cfg.mode, segments, decision, clip_score })
}

/// Re-derives the decision from cached segment scores at another threshold.
pub fn redecide(values: &[f64], mode: Mode, vote: &VoteConfig, thresh: f64) -> Result<VadDecision> {
    let labels: Vec<bool> = values.iter().map(|&v| v >= thresh).collect();
    if mode.vote_enabled() {
        postprocess::decide(&labels, vote)
    } else {
        if labels.len() != 1 {
            bail!(Argument, "baseline expects one whole-clip score, got {}", labels.len());
        }
        Ok(VadDecision { per_segment: labels.clone(), per_window: labels.clone(), final_label: labels[0] })
    }
}

/// Whole-clip score for baseline; otherwise the maximum over length-`W`
/// windows of the mean segment score (the mean of all segments when fewer than `W`).
pub fn clip_statistic(values: &[f64], mode: Mode, vote: &VoteConfig) -> f64 {
    if !mode.vote_enabled() || values.is_empty() {
        return values.first().copied().unwrap_or(0.0);
    }
    let w = vote.window().min(values.len());
    values
        .windows(w)
        .map(|win| win.iter().sum::<f64>() / w as f64)
        .fold(f64::NEG_INFINITY, f64::max)
}
