//! Framing, STFT/ISTFT and overlap-add synthesis.
//!
//! The STFT pads `fft_len - hop` zeros in front of the signal so that every
//! sample is covered by the same number of frames; reconstruction divides by
//! the per-sample sum of squared windows, which makes `istft(stft(x)) == x` up
//! to rounding for any hop dividing `fft_len`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::buffer::AudioBuffer;
use crate::error::{bail, Result};
use crate::fft::FftPlan;

/// Default STFT length at 16 kHz (32 ms).
pub const DEFAULT_FFT_LEN: usize = 512;
/// Default STFT hop, a quarter of [`DEFAULT_FFT_LEN`].
pub const DEFAULT_STFT_HOP: usize = 128;

/// Window-sum values at or below this are treated as uncovered.
const COVERAGE_EPS: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    /// Periodic Hann, `0.5 - 0.5 cos(2 pi n / N)`.
    Hann,
    Rectangular,
}

impl Window {
    pub fn coefficients(self, len: usize) -> Vec<f64> {
        match self {
            Window::Hann => periodic_hann(len),
            Window::Rectangular => vec![1.0; len],
        }
    }
}

pub fn periodic_hann(len: usize) -> Vec<f64> {
    (0..len)
        .map(|n| 0.5 - 0.5 * libm::cos(2.0 * PI * n as f64 / len as f64))
        .collect()
}

/// Triangle that stays positive at both ends, so every framed sample has weight.
pub fn triangular(len: usize) -> Vec<f64> {
    (0..len)
        .map(|n| 1.0 - libm::fabs(2.0 * (n as f64 + 0.5) / len as f64 - 1.0))
        .collect()
}

/// Number of frames produced by [`frame_signal`] for a signal of `len` samples.
pub fn frame_count(len: usize, frame_len: usize, hop: usize) -> usize {
    if len <= frame_len {
        1
    } else {
        (len - frame_len).div_ceil(hop) + 1
    }
}

/// Frames `x_m[n]`, frame `m` covering samples `[m * hop, m * hop + frame_len)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameGrid {
    frames: Vec<Vec<f64>>,
    frame_len: usize,
    hop: usize,
    signal_len: usize,
    sample_rate_hz: u32,
}

impl FrameGrid {
    /// Builds a grid from explicit frames, e.g. after per-frame processing.
    pub fn from_frames(
        frames: Vec<Vec<f64>>,
        hop: usize,
        signal_len: usize,
        sample_rate_hz: u32,
    ) -> Result<Self> {
        let Some(first) = frames.first() else {
            bail!(Format, "frame grid has no frames");
        };
        let frame_len = first.len();
        if frames.iter().any(|f| f.len() != frame_len) {
            bail!(Format, "frames differ in length");
        }
        check_hop(frame_len, hop)?;
        Ok(Self { frames, frame_len, hop, signal_len, sample_rate_hz })
    }

    pub fn frames(&self) -> &[Vec<f64>] {
        &self.frames
    }

    pub fn frame(&self, m: usize) -> &[f64] {
        &self.frames[m]
    }

    pub fn num_frames(&self) -> usize {
        self.frames.len()
    }

    pub fn frame_len(&self) -> usize {
        self.frame_len
    }

    pub fn hop(&self) -> usize {
        self.hop
    }

    pub fn signal_len(&self) -> usize {
        self.signal_len
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    /// Sum of squares of frame `m`.
    pub fn energy(&self, m: usize) -> f64 {
        self.frames[m].iter().map(|s| s * s).sum()
    }
}

fn check_hop(frame_len: usize, hop: usize) -> Result<()> {
    if frame_len == 0 {
        bail!(Argument, "frame length must be positive");
    }
    if hop == 0 || hop > frame_len {
        bail!(Argument, "hop {hop} must be in 1..={frame_len}");
    }
    Ok(())
}

/// Splits `buf` into overlapping frames; the last partial frame is zero-padded.
pub fn frame_signal(buf: &AudioBuffer, frame_len: usize, hop: usize) -> Result<FrameGrid> {
    if buf.is_empty() {
        bail!(Argument, "cannot frame an empty buffer");
    }
    check_hop(frame_len, hop)?;
    let x = buf.samples();
    let frames = (0..frame_count(x.len(), frame_len, hop))
        .map(|m| {
            let start = m * hop;
            let end = (start + frame_len).min(x.len());
            let mut f = x[start..end].to_vec();
            f.resize(frame_len, 0.0);
            f
        })
        .collect();
    Ok(FrameGrid {
        frames,
        frame_len,
        hop,
        signal_len: x.len(),
        sample_rate_hz: buf.sample_rate_hz(),
    })
}

/// Weighted overlap-add of the grid with a triangular synthesis window,
/// normalized per sample so that unmodified frames reconstruct the input.
pub fn overlap_add(grid: &FrameGrid, out_len: usize) -> Result<AudioBuffer> {
    overlap_add_weighted(grid, &vec![1.0; grid.num_frames()], out_len)
}

/// Overlap-add where frame `m` contributes with weight `gains[m]` to both the
/// numerator and the normalizer. A sample covered only by zero-gain frames is 0.
pub fn overlap_add_weighted(grid: &FrameGrid, gains: &[f64], out_len: usize) -> Result<AudioBuffer> {
    if gains.len() != grid.num_frames() {
        bail!(Format, "{} gains for {} frames", gains.len(), grid.num_frames());
    }
    let window = triangular(grid.frame_len);
    let contributing = || {
        grid.frames.iter().zip(gains).enumerate().filter(|(_, (_, &g))| g != 0.0).map(|(m, (f, &g))| (m * grid.hop, f, g))
    };
    let mut norm = vec![0.0; out_len];
    for (start, _, g) in contributing() {
        for (n, &w) in window.iter().enumerate().take(out_len.saturating_sub(start)) {
            norm[start + n] += g * w;
        }
    }
    // Weights are normalized before touching the samples so a lone frame is copied exactly.
    let mut out = vec![0.0; out_len];
    for (start, frame, g) in contributing() {
        for (n, (&s, &w)) in frame.iter().zip(&window).enumerate().take(out_len.saturating_sub(start)) {
            let d = norm[start + n];
            if d > COVERAGE_EPS {
                out[start + n] += (g * w / d) * s;
            }
        }
    }
    AudioBuffer::from_clamped(out, grid.sample_rate_hz)
}

/// Short-time spectrum `X(f)`: one row of `fft_len / 2 + 1` bins per frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Stft {
    frames: Vec<Vec<Complex64>>,
    fft_len: usize,
    hop: usize,
    window: Window,
    /// Zeros prepended before the first frame.
    lead_pad: usize,
    signal_len: usize,
    sample_rate_hz: u32,
}

impl Stft {
    /// Builds a spectrum from explicit rows, e.g. for constructed fixtures.
    /// Rows are taken to start at sample 0 (no lead padding).
    pub fn from_frames(
        frames: Vec<Vec<Complex64>>,
        fft_len: usize,
        hop: usize,
        window: Window,
        sample_rate_hz: u32,
    ) -> Result<Self> {
        check_stft_params(fft_len, hop)?;
        if frames.is_empty() {
            bail!(Format, "spectrum has no frames");
        }
        let bins = fft_len / 2 + 1;
        if let Some(bad) = frames.iter().position(|f| f.len() != bins) {
            bail!(Format, "frame {bad} has {} bins, expected {bins}", frames[bad].len());
        }
        let signal_len = (frames.len() - 1) * hop + fft_len;
        Ok(Self { frames, fft_len, hop, window, lead_pad: 0, signal_len, sample_rate_hz })
    }

    pub fn frames(&self) -> &[Vec<Complex64>] {
        &self.frames
    }

    pub fn frames_mut(&mut self) -> &mut [Vec<Complex64>] {
        &mut self.frames
    }

    pub fn num_frames(&self) -> usize {
        self.frames.len()
    }

    pub fn num_bins(&self) -> usize {
        self.fft_len / 2 + 1
    }

    pub fn fft_len(&self) -> usize {
        self.fft_len
    }

    pub fn hop(&self) -> usize {
        self.hop
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn signal_len(&self) -> usize {
        self.signal_len
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    /// Index of the first frame lying entirely inside the signal.
    pub fn first_interior_frame(&self) -> usize {
        self.lead_pad.div_ceil(self.hop)
    }

    /// Signal index of the first sample of frame `m` (negative inside the lead padding).
    pub fn frame_start(&self, m: usize) -> isize {
        (m * self.hop) as isize - self.lead_pad as isize
    }
}

fn check_stft_params(fft_len: usize, hop: usize) -> Result<()> {
    if fft_len == 0 || !fft_len.is_power_of_two() {
        bail!(Argument, "FFT length {fft_len} is not a power of two");
    }
    if hop == 0 || !fft_len.is_multiple_of(hop) {
        bail!(Argument, "hop {hop} must divide FFT length {fft_len}");
    }
    Ok(())
}

/// Periodic-Hann STFT.
pub fn stft(buf: &AudioBuffer, fft_len: usize, hop: usize) -> Result<Stft> {
    stft_with_window(buf, fft_len, hop, Window::Hann)
}

pub fn stft_with_window(buf: &AudioBuffer, fft_len: usize, hop: usize, window: Window) -> Result<Stft> {
    check_stft_params(fft_len, hop)?;
    let plan = FftPlan::new(fft_len)?;
    let w = window.coefficients(fft_len);
    let x = buf.samples();
    let lead_pad = fft_len - hop;
    let num_frames = if x.is_empty() { 1 } else { (x.len() - 1 + lead_pad) / hop + 1 };

    let mut frame = vec![0.0; fft_len];
    let frames = (0..num_frames)
        .map(|m| {
            let start = (m * hop) as isize - lead_pad as isize;
            for (n, (dst, &wn)) in frame.iter_mut().zip(&w).enumerate() {
                let idx = start + n as isize;
                *dst = if idx >= 0 && (idx as usize) < x.len() { x[idx as usize] * wn } else { 0.0 };
            }
            plan.forward_real(&frame)
        })
        .collect();
    Ok(Stft {
        frames,
        fft_len,
        hop,
        window,
        lead_pad,
        signal_len: x.len(),
        sample_rate_hz: buf.sample_rate_hz(),
    })
}

/// Weighted overlap-add inverse of [`stft`], normalized by the squared-window sum.
pub fn istft(spec: &Stft, out_len: usize) -> Result<AudioBuffer> {
    check_stft_params(spec.fft_len, spec.hop)?;
    let bins = spec.num_bins();
    if let Some(bad) = spec.frames.iter().position(|f| f.len() != bins) {
        bail!(Format, "frame {bad} has {} bins, expected {bins}", spec.frames[bad].len());
    }
    let plan = FftPlan::new(spec.fft_len)?;
    let w = spec.window.coefficients(spec.fft_len);
    let mut acc = vec![0.0; out_len];
    let mut norm = vec![0.0; out_len];
    for (m, row) in spec.frames.iter().enumerate() {
        let time = plan.inverse_real(row);
        let start = spec.frame_start(m);
        for (n, (&s, &wn)) in time.iter().zip(&w).enumerate() {
            let idx = start + n as isize;
            if idx < 0 {
                continue;
            }
            let idx = idx as usize;
            if idx >= out_len {
                break;
            }
            acc[idx] += wn * s;
            norm[idx] += wn * wn;
        }
    }
    let out = acc
        .into_iter()
        .zip(norm)
        .map(|(a, d)| if d > COVERAGE_EPS { a / d } else { 0.0 })
        .collect();
    AudioBuffer::from_clamped(out, spec.sample_rate_hz)
}
