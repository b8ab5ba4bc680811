//! Iterative radix-2 FFT for power-of-two lengths, plus real-input helpers.
//!
//! Plans are immutable after construction and can be shared between threads.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{bail, Result};

#[derive(Debug, Clone)]
pub struct FftPlan {
    len: usize,
    twiddles: Vec<Complex64>,
    bit_reverse: Vec<usize>,
}

impl FftPlan {
    pub fn new(len: usize) -> Result<Self> {
        if len == 0 || !len.is_power_of_two() {
            bail!(Argument, "FFT length {len} is not a power of two");
        }
        let twiddles = (0..len / 2)
            .map(|k| {
                let phi = -2.0 * PI * k as f64 / len as f64;
                Complex64::new(libm::cos(phi), libm::sin(phi))
            })
            .collect();
        let bits = len.trailing_zeros();
        let bit_reverse = (0..len)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
            .collect();
        Ok(Self { len, twiddles, bit_reverse })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// In-place forward transform, `X[k] = sum x[n] e^{-2 pi i k n / N}`.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, false);
    }

    /// In-place inverse transform including the `1/N` factor.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, true);
        let scale = 1.0 / self.len as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        assert_eq!(data.len(), self.len, "buffer length does not match plan");
        let n = self.len;
        for i in 0..n {
            let j = self.bit_reverse[i];
            if i < j {
                data.swap(i, j);
            }
        }
        let mut size = 2;
        while size <= n {
            let half = size / 2;
            let stride = n / size;
            for start in (0..n).step_by(size) {
                for k in 0..half {
                    let mut w = self.twiddles[k * stride];
                    if inverse {
                        w = w.conj();
                    }
                    let a = data[start + k];
                    let b = data[start + k + half] * w;
                    data[start + k] = a + b;
                    data[start + k + half] = a - b;
                }
            }
            size *= 2;
        }
    }

    /// Spectrum of a real frame (zero-padded to the plan length): `len/2 + 1` bins.
    pub fn forward_real(&self, input: &[f64]) -> Vec<Complex64> {
        assert!(input.len() <= self.len, "frame longer than FFT");
        let mut buf = vec![Complex64::new(0.0, 0.0); self.len];
        for (dst, &x) in buf.iter_mut().zip(input) {
            dst.re = x;
        }
        self.forward(&mut buf);
        buf.truncate(self.len / 2 + 1);
        buf
    }

    /// Real signal from a half spectrum by Hermitian extension.
    pub fn inverse_real(&self, half: &[Complex64]) -> Vec<f64> {
        let n = self.len;
        assert_eq!(half.len(), n / 2 + 1, "half spectrum has wrong bin count");
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        buf[..half.len()].copy_from_slice(half);
        for k in 1..n.div_ceil(2) {
            buf[n - k] = half[k].conj();
        }
        // DC and Nyquist of a real signal are real.
        buf[0].im = 0.0;
        if n > 1 {
            buf[n / 2].im = 0.0;
        }
        self.inverse(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }
}
