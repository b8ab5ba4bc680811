//! Noise-removal chain applied to each segment before scoring: spectral
//! subtraction, energy gating and RMS normalization.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::buffer::{ms_to_samples, AudioBuffer};
use crate::dsp::{self, frame_signal, overlap_add_weighted, Stft};
use crate::error::{bail, Result};

/// Below this RMS a buffer counts as silent and is not normalized.
pub const SILENCE_RMS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    SpectralSubtract,
    EnergyGate,
    RmsNormalize,
}

impl Stage {
    pub const ALL: [Stage; 3] = [Stage::SpectralSubtract, Stage::EnergyGate, Stage::RmsNormalize];

    pub fn name(self) -> &'static str {
        match self {
            Stage::SpectralSubtract => "spectral-subtract",
            Stage::EnergyGate => "energy-gate",
            Stage::RmsNormalize => "rms-normalize",
        }
    }

    pub fn from_name(name: &str) -> Option<Stage> {
        Stage::ALL.into_iter().find(|s| s.name() == name)
    }
}

/// Where the spectral-subtraction noise estimate comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseScope {
    /// Leading frames of the whole clip, shared by all of its segments.
    Clip,
    /// Leading frames of each segment.
    Segment,
}

impl NoiseScope {
    pub fn name(self) -> &'static str {
        match self {
            NoiseScope::Clip => "clip",
            NoiseScope::Segment => "segment",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [NoiseScope::Clip, NoiseScope::Segment].into_iter().find(|s| s.name() == name)
    }
}

/// Energy gate threshold `theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateThreshold {
    /// Fraction of the buffer's mean frame energy.
    Relative(f64),
    /// Squared-amplitude units per frame.
    Absolute(f64),
}

impl GateThreshold {
    fn resolve(self, frame_energies: &[f64]) -> f64 {
        match self {
            GateThreshold::Absolute(theta) => theta,
            GateThreshold::Relative(frac) => {
                let mean = frame_energies.iter().sum::<f64>() / frame_energies.len() as f64;
                frac * mean
            }
        }
    }

    fn value(self) -> f64 {
        match self {
            GateThreshold::Relative(v) | GateThreshold::Absolute(v) => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessConfig {
    /// Over-subtraction factor, at least 1.
    pub alpha: f64,
    /// Spectral floor as a fraction of the noise magnitude, in `[0, 1]`.
    pub beta: f64,
    pub theta: GateThreshold,
    /// Target RMS amplitude `A`.
    pub target_rms: f64,
    /// Leading STFT frames averaged into the noise estimate.
    pub noise_estimation_frames: usize,
    pub noise_scope: NoiseScope,
    pub stage_order: Vec<Stage>,
    pub fft_len: usize,
    pub stft_hop: usize,
    pub gate_frame_ms: f64,
    pub gate_hop_ms: f64,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            alpha: 1.5,
            beta: 0.02,
            theta: GateThreshold::Relative(0.01),
            target_rms: 0.1,
            noise_estimation_frames: 6,
            noise_scope: NoiseScope::Clip,
            stage_order: Stage::ALL.to_vec(),
            fft_len: dsp::DEFAULT_FFT_LEN,
            stft_hop: dsp::DEFAULT_STFT_HOP,
            gate_frame_ms: 25.0,
            gate_hop_ms: 10.0,
        }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 1.0 && self.alpha.is_finite()) {
            bail!(Argument, "alpha must be >= 1, got {}", self.alpha);
        }
        if !(0.0..=1.0).contains(&self.beta) {
            bail!(Argument, "beta must lie in [0, 1], got {}", self.beta);
        }
        let theta = self.theta.value();
        if !(theta >= 0.0 && theta.is_finite()) {
            bail!(Argument, "theta must be >= 0, got {theta}");
        }
        if !(self.target_rms > 0.0 && self.target_rms <= 1.0) {
            bail!(Argument, "target RMS must lie in (0, 1], got {}", self.target_rms);
        }
        if self.noise_estimation_frames == 0 {
            bail!(Argument, "noise estimation needs at least one frame");
        }
        if !self.fft_len.is_power_of_two() || self.stft_hop == 0 || !self.fft_len.is_multiple_of(self.stft_hop) {
            bail!(Argument, "STFT length {} / hop {} invalid", self.fft_len, self.stft_hop);
        }
        if !(self.gate_hop_ms > 0.0 && self.gate_hop_ms <= self.gate_frame_ms) {
            bail!(Argument, "gate hop must lie in (0, frame length]");
        }
        let mut seen = [false; 3];
        for s in &self.stage_order {
            let i = *s as usize;
            if seen[i] {
                bail!(Argument, "stage {} listed twice", s.name());
            }
            seen[i] = true;
        }
        Ok(())
    }
}

/// Noise magnitude spectrum `|N(f)|`, one entry per STFT bin.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseProfile {
    magnitude: Vec<f64>,
}

impl NoiseProfile {
    pub fn new(magnitude: Vec<f64>) -> Result<Self> {
        if magnitude.iter().any(|m| m.is_nan() || *m < 0.0) {
            bail!(Domain, "noise magnitudes must be nonnegative");
        }
        Ok(Self { magnitude })
    }

    pub fn zeros(bins: usize) -> Self {
        Self { magnitude: vec![0.0; bins] }
    }

    pub fn magnitude(&self) -> &[f64] {
        &self.magnitude
    }
}

/// Per-bin mean magnitude over the `k` leading frames.
///
/// Frames that reach into the STFT's lead padding are skipped when at least
/// `k` interior frames remain, so the estimate is not biased low by zeros.
pub fn estimate_noise(spec: &Stft, k: usize) -> Result<NoiseProfile> {
    if k == 0 {
        bail!(Argument, "noise estimation needs at least one frame");
    }
    if k > spec.num_frames() {
        bail!(Argument, "{k} noise frames requested, spectrum has {}", spec.num_frames());
    }
    let first = spec.first_interior_frame();
    let start = if spec.num_frames() - first.min(spec.num_frames()) >= k { first } else { 0 };
    let mut mag = vec![0.0; spec.num_bins()];
    for row in &spec.frames()[start..start + k] {
        for (m, c) in mag.iter_mut().zip(row) {
            *m += c.norm();
        }
    }
    for m in mag.iter_mut() {
        *m /= k as f64;
    }
    Ok(NoiseProfile { magnitude: mag })
}

/// `max(|X| - alpha |N|, beta |N|)` for one bin.
pub fn subtract_magnitude(noisy: f64, noise: f64, alpha: f64, beta: f64) -> f64 {
    (noisy - alpha * noise).max(beta * noise)
}

/// Spectral subtraction with the noise estimated from the buffer's leading frames.
pub fn spectral_subtract(buf: &AudioBuffer, cfg: &PreprocessConfig) -> Result<AudioBuffer> {
    if buf.len() < cfg.fft_len {
        bail!(Argument, "buffer of {} samples shorter than one STFT frame ({})", buf.len(), cfg.fft_len);
    }
    let spec = dsp::stft(buf, cfg.fft_len, cfg.stft_hop)?;
    let noise = estimate_noise(&spec, cfg.noise_estimation_frames)?;
    subtract_with_profile(spec, &noise, cfg.alpha, cfg.beta, buf.len())
}

/// Spectral subtraction against a given noise profile; the noisy phase is kept.
pub fn spectral_subtract_with_profile(
    buf: &AudioBuffer,
    noise: &NoiseProfile,
    cfg: &PreprocessConfig,
) -> Result<AudioBuffer> {
    let spec = dsp::stft(buf, cfg.fft_len, cfg.stft_hop)?;
    if noise.magnitude.len() != spec.num_bins() {
        bail!(Format, "noise profile has {} bins, spectrum {}", noise.magnitude.len(), spec.num_bins());
    }
    subtract_with_profile(spec, noise, cfg.alpha, cfg.beta, buf.len())
}

fn subtract_with_profile(
    mut spec: Stft,
    noise: &NoiseProfile,
    alpha: f64,
    beta: f64,
    out_len: usize,
) -> Result<AudioBuffer> {
    for row in spec.frames_mut() {
        for (bin, &n) in row.iter_mut().zip(&noise.magnitude) {
            let (mag, phase) = bin.to_polar();
            *bin = Complex64::from_polar(subtract_magnitude(mag, n, alpha, beta), phase);
        }
    }
    dsp::istft(&spec, out_len)
}

/// Energy gate: frames with `E_m < theta` are dropped and the surviving frames
/// are overlap-added, each output sample normalized by the weights of the
/// frames that survive at that sample.
pub fn energy_gate(
    buf: &AudioBuffer,
    theta: GateThreshold,
    frame_len: usize,
    hop: usize,
) -> Result<AudioBuffer> {
    let grid = frame_signal(buf, frame_len, hop)?;
    let energies: Vec<f64> = (0..grid.num_frames()).map(|m| grid.energy(m)).collect();
    let threshold = theta.resolve(&energies);
    let gains: Vec<f64> = energies
        .iter()
        .map(|&e| if e >= threshold { 1.0 } else { 0.0 })
        .collect();
    overlap_add_weighted(&grid, &gains, buf.len())
}

/// Scales to RMS `target`, then clamps to `[-1, 1]`. Silent input is returned unchanged.
pub fn rms_normalize(buf: &AudioBuffer, target: f64) -> Result<AudioBuffer> {
    if !(target > 0.0 && target.is_finite()) {
        bail!(Argument, "target RMS must be positive");
    }
    let rms = buf.rms();
    if rms <= SILENCE_RMS {
        return Ok(buf.clone());
    }
    let gain = target / rms;
    AudioBuffer::from_clamped(buf.samples().iter().map(|s| s * gain).collect(), buf.sample_rate_hz())
}

/// Noise profile from the leading frames of `buf`, with the STFT settings of `cfg`.
pub fn estimate_noise_for(buf: &AudioBuffer, cfg: &PreprocessConfig) -> Result<NoiseProfile> {
    estimate_noise(&dsp::stft(buf, cfg.fft_len, cfg.stft_hop)?, cfg.noise_estimation_frames)
}

/// Runs the enabled stages in `cfg.stage_order`, estimating noise from the segment itself.
pub fn preprocess_segment(seg: &AudioBuffer, cfg: &PreprocessConfig) -> Result<AudioBuffer> {
    preprocess_segment_with_noise(seg, cfg, None)
}

/// Like [`preprocess_segment`], but spectral subtraction uses `noise` when given.
pub fn preprocess_segment_with_noise(
    seg: &AudioBuffer,
    cfg: &PreprocessConfig,
    noise: Option<&NoiseProfile>,
) -> Result<AudioBuffer> {
    if seg.is_empty() {
        bail!(Argument, "empty segment");
    }
    let mut out = seg.clone();
    for stage in &cfg.stage_order {
        out = match stage {
            Stage::SpectralSubtract => match noise {
                Some(profile) => spectral_subtract_with_profile(&out, profile, cfg)?,
                None => spectral_subtract(&out, cfg)?,
            },
            Stage::EnergyGate => {
                let frame_len = ms_to_samples(cfg.gate_frame_ms, out.sample_rate_hz()).max(1);
                let hop = ms_to_samples(cfg.gate_hop_ms, out.sample_rate_hz()).clamp(1, frame_len);
                energy_gate(&out, cfg.theta, frame_len, hop)?
            }
            Stage::RmsNormalize => rms_normalize(&out, cfg.target_rms)?,
        };
    }
    Ok(out)
}
