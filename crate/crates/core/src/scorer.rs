//! Frame-level scores `z[d][c]` and the built-in reference scorer.
//!
//! Any source of nonnegative per-frame, per-channel activations can drive the
//! detector through [`FrameScorer`]. The reference scorer measures how far each
//! mel band's log energy rises above that band's own low-percentile floor
//! within the analysed buffer.

use alloc::vec::Vec;

use crate::buffer::{ms_to_samples, AudioBuffer};
use crate::dsp::{frame_signal, periodic_hann};
use crate::error::{bail, Result};
use crate::fft::FftPlan;
use crate::math::percentile;

/// D frames by C channels of nonnegative scores, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameScoreMatrix {
    scores: Vec<f64>,
    frames: usize,
    channels: usize,
    frame_duration_ms: f64,
}

impl FrameScoreMatrix {
    pub fn new(rows: Vec<Vec<f64>>, frame_duration_ms: f64) -> Result<Self> {
        let Some(first) = rows.first() else {
            bail!(Format, "score matrix has no frames");
        };
        let channels = first.len();
        if channels == 0 {
            bail!(Format, "score matrix has no channels");
        }
        if let Some(d) = rows.iter().position(|r| r.len() != channels) {
            bail!(Format, "row {} has {} scores, expected {channels}", d + 1, rows[d].len());
        }
        let frames = rows.len();
        Self::from_flat(rows.into_iter().flatten().collect(), frames, channels, frame_duration_ms)
    }

    pub fn from_flat(scores: Vec<f64>, frames: usize, channels: usize, frame_duration_ms: f64) -> Result<Self> {
        if frames == 0 || channels == 0 {
            bail!(Format, "score matrix must be at least 1x1");
        }
        if scores.len() != frames * channels {
            bail!(Format, "{} scores for a {frames}x{channels} matrix", scores.len());
        }
        if let Some(i) = scores.iter().position(|s| !(*s >= 0.0 && s.is_finite())) {
            bail!(Domain, "score {} at frame {} is not a finite nonnegative value", scores[i], i / channels + 1);
        }
        if !(frame_duration_ms > 0.0 && frame_duration_ms.is_finite()) {
            bail!(Argument, "frame duration must be positive");
        }
        Ok(Self { scores, frames, channels, frame_duration_ms })
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn frame_duration_ms(&self) -> f64 {
        self.frame_duration_ms
    }

    pub fn get(&self, frame: usize, channel: usize) -> f64 {
        self.scores[frame * self.channels + channel]
    }

    pub fn row(&self, frame: usize) -> &[f64] {
        &self.scores[frame * self.channels..(frame + 1) * self.channels]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.scores.chunks_exact(self.channels)
    }

    /// Rows `start..end` as their own matrix.
    pub fn slice_rows(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.frames {
            bail!(Argument, "row range {start}..{end} invalid for {} frames", self.frames);
        }
        Ok(Self {
            scores: self.scores[start * self.channels..end * self.channels].to_vec(),
            frames: end - start,
            channels: self.channels,
            frame_duration_ms: self.frame_duration_ms,
        })
    }
}

/// A per-frame, per-channel score source.
pub trait FrameScorer {
    fn score(&self, seg: &AudioBuffer) -> Result<FrameScoreMatrix>;
}

/// Offset added to band energies before the logarithm.
pub const LOG_ENERGY_EPS: f64 = 1e-6;
/// Percentile of each band's log energies taken as its noise floor.
pub const FLOOR_PERCENTILE: f64 = 0.10;

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceScorer {
    pub bands: usize,
    pub frame_ms: f64,
    pub hop_ms: f64,
}

impl Default for ReferenceScorer {
    fn default() -> Self {
        Self { bands: 32, frame_ms: 25.0, hop_ms: 10.0 }
    }
}

impl ReferenceScorer {
    pub fn new(bands: usize, frame_ms: f64, hop_ms: f64) -> Result<Self> {
        if bands == 0 {
            bail!(Argument, "need at least one band");
        }
        if !(frame_ms > 0.0 && hop_ms > 0.0 && hop_ms <= frame_ms) {
            bail!(Argument, "frame {frame_ms} ms / hop {hop_ms} ms invalid");
        }
        Ok(Self { bands, frame_ms, hop_ms })
    }

    /// Natural-log mel band energies per frame.
    pub fn log_band_energies(&self, seg: &AudioBuffer) -> Result<Vec<Vec<f64>>> {
        let rate = seg.sample_rate_hz();
        let frame_len = ms_to_samples(self.frame_ms, rate).max(1);
        let hop = ms_to_samples(self.hop_ms, rate).clamp(1, frame_len);
        let fft_len = frame_len.next_power_of_two();
        let plan = FftPlan::new(fft_len)?;
        let window = periodic_hann(frame_len);
        let bank = MelFilterbank::new(self.bands, fft_len, rate);
        let grid = frame_signal(seg, frame_len, hop)?;

        let mut windowed = alloc::vec![0.0; frame_len];
        Ok(grid
            .frames()
            .iter()
            .map(|frame| {
                for ((dst, &s), &w) in windowed.iter_mut().zip(frame).zip(&window) {
                    *dst = s * w;
                }
                let power: Vec<f64> = plan.forward_real(&windowed).iter().map(|c| c.norm_sqr()).collect();
                bank.apply(&power)
                    .into_iter()
                    .map(|e| libm::log(e + LOG_ENERGY_EPS))
                    .collect()
            })
            .collect())
    }
}

impl FrameScorer for ReferenceScorer {
    fn score(&self, seg: &AudioBuffer) -> Result<FrameScoreMatrix> {
        let logs = self.log_band_energies(seg)?;
        let frames = logs.len();
        let floors: Vec<f64> = (0..self.bands)
            .map(|c| {
                let column: Vec<f64> = logs.iter().map(|row| row[c]).collect();
                percentile(&column, FLOOR_PERCENTILE)
            })
            .collect();
        let scores = logs
            .iter()
            .flat_map(|row| row.iter().zip(&floors).map(|(&e, &f)| (e - f).max(0.0)))
            .collect();
        FrameScoreMatrix::from_flat(scores, frames, self.bands, self.hop_ms)
    }
}

/// Reference scores for `seg` with `bands` mel channels and `frame_ms` frames (hop 10 ms).
pub fn score_reference(seg: &AudioBuffer, bands: usize, frame_ms: f64) -> Result<FrameScoreMatrix> {
    ReferenceScorer::new(bands, frame_ms, 10.0f64.min(frame_ms))?.score(seg)
}

pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * libm::log10(1.0 + hz / 700.0)
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (libm::pow(10.0, mel / 2595.0) - 1.0)
}

/// Triangular HTK-mel filters spanning 0 Hz to Nyquist.
#[derive(Debug, Clone)]
pub struct MelFilterbank {
    /// Per band: first bin and weights.
    filters: Vec<(usize, Vec<f64>)>,
}

impl MelFilterbank {
    pub fn new(bands: usize, fft_len: usize, sample_rate_hz: u32) -> Self {
        let nyquist = sample_rate_hz as f64 / 2.0;
        let bins = fft_len / 2 + 1;
        let bin_hz = sample_rate_hz as f64 / fft_len as f64;
        let mel_max = hz_to_mel(nyquist);
        let edges: Vec<f64> = (0..bands + 2)
            .map(|i| mel_to_hz(mel_max * i as f64 / (bands + 1) as f64))
            .collect();
        let filters = (0..bands)
            .map(|b| {
                let (lo, mid, hi) = (edges[b], edges[b + 1], edges[b + 2]);
                let weights: Vec<(usize, f64)> = (0..bins)
                    .filter_map(|k| {
                        let f = k as f64 * bin_hz;
                        let w = if f > lo && f <= mid {
                            (f - lo) / (mid - lo)
                        } else if f > mid && f < hi {
                            (hi - f) / (hi - mid)
                        } else {
                            0.0
                        };
                        (w > 0.0).then_some((k, w))
                    })
                    .collect();
                if weights.is_empty() {
                    // Band narrower than a bin: take the bin nearest its centre.
                    let k = libm::round(mid / bin_hz) as usize;
                    (k.min(bins - 1), alloc::vec![1.0])
                } else {
                    let start = weights[0].0;
                    (start, weights.into_iter().map(|(_, w)| w).collect())
                }
            })
            .collect();
        Self { filters }
    }

    pub fn bands(&self) -> usize {
        self.filters.len()
    }

    pub fn apply(&self, power: &[f64]) -> Vec<f64> {
        self.filters
            .iter()
            .map(|(start, w)| w.iter().zip(&power[*start..]).map(|(a, b)| a * b).sum())
            .collect()
    }
}
