use alloc::vec;
use alloc::vec::Vec;

use crate::error::{bail, Result};
use crate::math;

/// Mono audio with amplitudes in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    samples: Vec<f64>,
    sample_rate_hz: u32,
}

impl AudioBuffer {
    /// Wraps `samples`, rejecting non-finite or out-of-range amplitudes.
    pub fn new(samples: Vec<f64>, sample_rate_hz: u32) -> Result<Self> {
        if sample_rate_hz == 0 {
            bail!(Argument, "sample rate must be positive");
        }
        if let Some((i, s)) = samples
            .iter()
            .enumerate()
            .find(|(_, s)| !(-1.0..=1.0).contains(*s))
        {
            bail!(Argument, "sample {i} = {s} outside [-1, 1]");
        }
        Ok(Self { samples, sample_rate_hz })
    }

    /// Wraps `samples`, clamping finite values into `[-1, 1]`.
    pub fn from_clamped(mut samples: Vec<f64>, sample_rate_hz: u32) -> Result<Self> {
        if sample_rate_hz == 0 {
            bail!(Argument, "sample rate must be positive");
        }
        for s in samples.iter_mut() {
            if !s.is_finite() {
                bail!(Argument, "non-finite sample");
            }
            *s = s.clamp(-1.0, 1.0);
        }
        Ok(Self { samples, sample_rate_hz })
    }

    pub fn silence(len: usize, sample_rate_hz: u32) -> Result<Self> {
        Self::new(vec![0.0; len], sample_rate_hz)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz as f64
    }

    /// Mean of squared samples.
    pub fn power(&self) -> f64 {
        math::mean_square(&self.samples)
    }

    pub fn rms(&self) -> f64 {
        libm::sqrt(self.power())
    }

    /// Number of samples spanning `ms` milliseconds at this rate, rounded.
    pub fn samples_for_ms(&self, ms: f64) -> usize {
        ms_to_samples(ms, self.sample_rate_hz)
    }
}

pub(crate) fn ms_to_samples(ms: f64, sample_rate_hz: u32) -> usize {
    libm::round(ms * sample_rate_hz as f64 / 1000.0) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range() {
        assert!(AudioBuffer::new(vec![0.0, 1.5], 16_000).is_err());
        assert!(AudioBuffer::new(vec![0.0], 0).is_err());
        assert!(AudioBuffer::new(vec![-1.0, 1.0], 16_000).is_ok());
    }

    #[test]
    fn clamping_constructor() {
        let b = AudioBuffer::from_clamped(vec![2.0, -3.0, 0.5], 8000).unwrap();
        assert_eq!(b.samples(), &[1.0, -1.0, 0.5]);
        assert!(AudioBuffer::from_clamped(vec![f64::NAN], 8000).is_err());
    }

    #[test]
    fn rms_of_constant() {
        let b = AudioBuffer::new(vec![0.5; 100], 16_000).unwrap();
        assert!((b.rms() - 0.5).abs() < 1e-15);
    }
}
