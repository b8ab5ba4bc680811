//! Noise-robust voice activity detection, `no_std` core.
//!
//! The crate holds every numeric stage of the detector and needs only `alloc`:
//!
//! * [`dsp`]: framing, STFT/ISTFT and overlap-add,
//! * [`preprocess`]: spectral subtraction, energy gating and RMS normalization,
//! * [`scorer`]: per-frame, per-channel scores (`FrameScoreMatrix`) and the
//!   built-in mel-band reference scorer,
//! * [`aggregate`] and [`postprocess`]: the segment decision rule, sliding-window
//!   majority voting and the any-window final decision,
//! * [`pipeline`]: segmentation and the three detector configurations,
//! * [`synth`] and [`eval`]: SNR-exact corpus synthesis and ROC/AUC/accuracy metrics.
//!
//! File formats, WAV IO and the command line live in the `nrvad` crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod aggregate;
pub mod buffer;
pub mod dsp;
pub mod error;
pub mod eval;
pub mod fft;
pub mod pipeline;
pub mod postprocess;
pub mod preprocess;
pub mod resample;
pub mod scorer;
pub mod synth;

mod math;

pub use buffer::AudioBuffer;
pub use error::{Error, Result};
pub use pipeline::{Mode, PipelineConfig, PipelineOutput};

/// Sample rate every pipeline-side buffer is brought to.
pub const PIPELINE_RATE_HZ: u32 = 16_000;
