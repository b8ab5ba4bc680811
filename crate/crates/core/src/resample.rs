//! Rational-ratio polyphase resampler with a Kaiser-windowed sinc kernel.
//!
//! Every phase has [`TAPS_PER_PHASE`] taps and is normalized to unit DC gain.
//! Samples past either end repeat the edge value, so constants map to constants
//! and silence maps to silence exactly.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::buffer::AudioBuffer;
use crate::error::{bail, Result};
use crate::math::gcd;

pub const TAPS_PER_PHASE: usize = 64;
const KAISER_BETA: f64 = 8.6;
/// Cutoff as a fraction of the lower Nyquist frequency.
const ROLLOFF: f64 = 0.92;
/// Above this many phases, taps are computed per output sample instead of tabulated.
const MAX_TABLE_PHASES: u64 = 4096;

pub fn resample(buf: &AudioBuffer, target_hz: u32) -> Result<AudioBuffer> {
    if target_hz == 0 {
        bail!(Argument, "target sample rate must be positive");
    }
    if buf.is_empty() {
        bail!(Argument, "cannot resample an empty buffer");
    }
    let source_hz = buf.sample_rate_hz();
    if source_hz == target_hz {
        return Ok(buf.clone());
    }
    let g = gcd(source_hz as u64, target_hz as u64);
    let up = target_hz as u64 / g;
    let down = source_hz as u64 / g;
    let kernel = Kernel::new(source_hz, target_hz);

    let x = buf.samples();
    let out_len = ((x.len() as u64 * up).div_ceil(down)) as usize;
    let table = (up <= MAX_TABLE_PHASES).then(|| {
        (0..up)
            .map(|p| kernel.phase_taps(p as f64 / up as f64))
            .collect::<Vec<_>>()
    });

    let half = (TAPS_PER_PHASE / 2) as i64;
    let last = x.len() as i64 - 1;
    let mut out = Vec::with_capacity(out_len);
    let mut scratch;
    for j in 0..out_len as u64 {
        let pos = j * down;
        let base = (pos / up) as i64;
        let phase = pos % up;
        let taps: &[f64] = match &table {
            Some(t) => &t[phase as usize],
            None => {
                scratch = kernel.phase_taps(phase as f64 / up as f64);
                &scratch
            }
        };
        let mut acc = 0.0;
        for (i, &h) in taps.iter().enumerate() {
            let k = (base - half + 1 + i as i64).clamp(0, last);
            acc += h * x[k as usize];
        }
        out.push(acc);
    }
    AudioBuffer::from_clamped(out, target_hz)
}

struct Kernel {
    cutoff: f64,
    i0_beta: f64,
}

impl Kernel {
    fn new(source_hz: u32, target_hz: u32) -> Self {
        let ratio = (target_hz as f64 / source_hz as f64).min(1.0);
        Self { cutoff: ratio * ROLLOFF, i0_beta: bessel_i0(KAISER_BETA) }
    }

    /// Taps for an output instant `frac` input samples past the base index.
    /// Tap `i` multiplies input `base - 31 + i`.
    fn phase_taps(&self, frac: f64) -> Vec<f64> {
        let half = (TAPS_PER_PHASE / 2) as f64;
        let mut taps: Vec<f64> = (0..TAPS_PER_PHASE)
            .map(|i| {
                let tau = frac + half - 1.0 - i as f64;
                self.sinc(tau) * self.window(tau / half)
            })
            .collect();
        let sum: f64 = taps.iter().sum();
        for t in taps.iter_mut() {
            *t /= sum;
        }
        taps
    }

    fn sinc(&self, tau: f64) -> f64 {
        let x = PI * self.cutoff * tau;
        if x.abs() < 1e-12 {
            self.cutoff
        } else {
            self.cutoff * libm::sin(x) / x
        }
    }

    fn window(&self, r: f64) -> f64 {
        if r.abs() >= 1.0 {
            return 0.0;
        }
        bessel_i0(KAISER_BETA * libm::sqrt(1.0 - r * r)) / self.i0_beta
    }
}

/// Zeroth-order modified Bessel function of the first kind (power series).
fn bessel_i0(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    while term > 1e-17 * sum {
        term *= q / (k * k);
        sum += term;
        k += 1.0;
    }
    sum
}
