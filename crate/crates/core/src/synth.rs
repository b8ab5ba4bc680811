//! Desk-scale noisy-speech corpus synthesis.
//!
//! Speech is stood in for by a harmonic stack (F0 120-220 Hz, 5 harmonics)
//! under a 4 Hz syllabic envelope with muted syllables as pauses. Noise comes in
//! white, pink and babble (8 detuned surrogates) flavours. Every clip draws
//! from its own ChaCha stream keyed by `(seed, clip index)`, so clips can be
//! generated in any order or in parallel with identical results.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::buffer::AudioBuffer;
use crate::error::{bail, Result};
use crate::math::mean_square;

/// SNR grid used for the noisy-speech class by default.
pub const DEFAULT_SNRS_DB: [f64; 5] = [0.0, 5.0, 10.0, 15.0, 20.0];
const SYLLABLE_RATE_HZ: f64 = 4.0;
const HARMONICS: usize = 5;
const BABBLE_TALKERS: usize = 8;
const BABBLE_DETUNE: f64 = 0.03;
const BABBLE_PITCH_JITTER: f64 = 0.0;
const BABBLE_MODULATION_DEPTH: f64 = 0.5;
const F0_RANGE_HZ: core::ops::Range<f64> = 120.0..220.0;
const GAP_PROBABILITY: f64 = 0.25;
const PITCH_JITTER: f64 = 0.1;
/// Joint rescale target when a mixture would clip.
const PEAK_LIMIT: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClipClass {
    CleanSpeech,
    NoisySpeech,
    NonSpeech,
}

impl ClipClass {
    pub const ALL: [ClipClass; 3] = [ClipClass::CleanSpeech, ClipClass::NoisySpeech, ClipClass::NonSpeech];

    pub fn name(self) -> &'static str {
        match self {
            ClipClass::CleanSpeech => "clean_speech",
            ClipClass::NoisySpeech => "noisy_speech",
            ClipClass::NonSpeech => "non_speech",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        ClipClass::ALL.into_iter().find(|c| c.name() == name)
    }

    pub fn is_speech(self) -> bool {
        self != ClipClass::NonSpeech
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NoiseKind {
    White,
    Pink,
    Babble,
}

impl NoiseKind {
    pub const ALL: [NoiseKind; 3] = [NoiseKind::White, NoiseKind::Pink, NoiseKind::Babble];

    pub fn name(self) -> &'static str {
        match self {
            NoiseKind::White => "white",
            NoiseKind::Pink => "pink",
            NoiseKind::Babble => "babble",
        }
    }
}

fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller; 1 - u keeps the logarithm finite.
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * PI * u2)
}

/// Scales toward RMS `rms`, lowering the gain if the peak would pass `PEAK_LIMIT`.
fn scale_to_rms(x: &mut [f64], rms: f64) {
    let current = libm::sqrt(mean_square(x));
    let peak = x.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    if current > 0.0 {
        let g = (rms / current).min(PEAK_LIMIT / peak);
        x.iter_mut().for_each(|s| *s *= g);
    }
}

pub fn white_noise<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    (0..len).map(|_| gaussian(rng)).collect()
}

/// Pink (1/f) noise via Paul Kellett's refined filter over Gaussian white noise.
pub fn pink_noise<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    let mut b = [0.0f64; 7];
    (0..len)
        .map(|_| {
            let w = gaussian(rng);
            b[0] = 0.99886 * b[0] + w * 0.0555179;
            b[1] = 0.99332 * b[1] + w * 0.0750759;
            b[2] = 0.96900 * b[2] + w * 0.1538520;
            b[3] = 0.86650 * b[3] + w * 0.3104856;
            b[4] = 0.55000 * b[4] + w * 0.5329522;
            b[5] = -0.7616 * b[5] - w * 0.0168980;
            let out = b.iter().sum::<f64>() + w * 0.5362;
            b[6] = w * 0.115926;
            out
        })
        .collect()
}

/// Harmonic speech surrogate with a 4 Hz syllabic envelope.
///
/// Each 250 ms syllable gets its own pitch offset; roughly one in four is
/// muted. The result is normalized to unit peak (all-zero if every syllable was muted).
pub fn speech_surrogate<R: Rng>(rng: &mut R, len: usize, sample_rate_hz: u32) -> Vec<f64> {
    let base_f0 = rng.random_range(F0_RANGE_HZ);
    let voice = Voice { base_f0, gap_probability: GAP_PROBABILITY, pitch_jitter: PITCH_JITTER, modulation_depth: 1.0, syllable_offset: 0 };
    peak_normalized(voice.render(rng, len, sample_rate_hz))
}

/// Sum of [`BABBLE_TALKERS`] continuously voiced surrogates, detuned around a
/// shared F0 and with independent syllable timing.
pub fn babble_noise<R: Rng>(rng: &mut R, len: usize, sample_rate_hz: u32) -> Vec<f64> {
    let center = rng.random_range(F0_RANGE_HZ);
    let syllable_len = syllable_len(sample_rate_hz);
    let mut out = vec![0.0; len];
    for _ in 0..BABBLE_TALKERS {
        let voice = Voice {
            base_f0: center * rng.random_range(1.0 - BABBLE_DETUNE..1.0 + BABBLE_DETUNE),
            gap_probability: 0.0,
            pitch_jitter: BABBLE_PITCH_JITTER,
            modulation_depth: BABBLE_MODULATION_DEPTH,
            syllable_offset: rng.random_range(0..syllable_len),
        };
        let talker = voice.render(rng, len, sample_rate_hz);
        out.iter_mut().zip(talker).for_each(|(o, t)| *o += t);
    }
    peak_normalized(out)
}

struct Voice {
    base_f0: f64,
    gap_probability: f64,
    pitch_jitter: f64,
    /// 1 for a full raised-cosine envelope, 0 for a constant one.
    modulation_depth: f64,
    syllable_offset: usize,
}

impl Voice {
    fn render<R: Rng>(&self, rng: &mut R, len: usize, sample_rate_hz: u32) -> Vec<f64> {
        let fs = sample_rate_hz as f64;
        let syllable_len = syllable_len(sample_rate_hz);
        let harmonic_gain: [f64; HARMONICS] = core::array::from_fn(|k| 1.0 / (k + 1) as f64);
        let mut phase = 0.0f64;
        let mut f0 = self.base_f0;
        let mut voiced = true;
        let mut out = Vec::with_capacity(len);
        for n in 0..len {
            let pos = (n + self.syllable_offset) % syllable_len;
            if pos == 0 || n == 0 {
                // The first syllable always sounds so no utterance is entirely silent.
                voiced = n == 0 || rng.random::<f64>() >= self.gap_probability;
                f0 = self.base_f0 * rng.random_range(1.0 - self.pitch_jitter..=1.0 + self.pitch_jitter);
            }
            phase += 2.0 * PI * f0 / fs;
            if phase > 2.0 * PI {
                phase -= 2.0 * PI;
            }
            let env = if voiced {
                1.0 - self.modulation_depth * (0.5 + 0.5 * libm::cos(2.0 * PI * pos as f64 / syllable_len as f64))
            } else {
                0.0
            };
            let s: f64 = harmonic_gain
                .iter()
                .enumerate()
                .map(|(k, g)| g * libm::sin((k + 1) as f64 * phase))
                .sum();
            out.push(env * s);
        }
        out
    }
}

fn syllable_len(sample_rate_hz: u32) -> usize {
    ((sample_rate_hz as f64 / SYLLABLE_RATE_HZ) as usize).max(1)
}

fn peak_normalized(mut v: Vec<f64>) -> Vec<f64> {
    let peak = v.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    if peak > 0.0 {
        v.iter_mut().for_each(|s| *s /= peak);
    }
    v
}

pub fn noise<R: Rng>(rng: &mut R, kind: NoiseKind, len: usize, sample_rate_hz: u32) -> Vec<f64> {
    match kind {
        NoiseKind::White => white_noise(rng, len),
        NoiseKind::Pink => pink_noise(rng, len),
        NoiseKind::Babble => babble_noise(rng, len, sample_rate_hz),
    }
}

/// A mixture and the exact components that were summed into it.
#[derive(Debug, Clone, PartialEq)]
pub struct Mixture {
    pub mixed: AudioBuffer,
    pub clean: AudioBuffer,
    /// Noise after gain, looping/trimming and peak protection.
    pub noise: AudioBuffer,
    /// Noise gain before peak protection.
    pub gain: f64,
    /// Joint factor applied to both components to avoid clipping (1 when unused).
    pub rescale: f64,
}

/// Mixes `noise` into `clean` at `snr_db`, with powers measured on the actual
/// sample arrays. Noise is looped or trimmed to the clean length.
pub fn mix_at_snr(clean: &AudioBuffer, noise: &AudioBuffer, snr_db: f64) -> Result<Mixture> {
    if !snr_db.is_finite() {
        bail!(Argument, "SNR must be finite");
    }
    if clean.sample_rate_hz() != noise.sample_rate_hz() {
        bail!(Argument, "sample rates differ: {} vs {}", clean.sample_rate_hz(), noise.sample_rate_hz());
    }
    if clean.is_empty() || noise.is_empty() {
        bail!(Argument, "empty input");
    }
    let fitted: Vec<f64> = noise.samples().iter().copied().cycle().take(clean.len()).collect();
    let p_clean = clean.power();
    let p_noise = mean_square(&fitted);
    if p_clean == 0.0 || p_noise == 0.0 {
        bail!(Argument, "clean and noise must both be non-silent");
    }
    let gain = libm::sqrt(p_clean / (p_noise * libm::pow(10.0, snr_db / 10.0)));
    let mut noise_part: Vec<f64> = fitted.iter().map(|n| n * gain).collect();
    let mut clean_part = clean.samples().to_vec();
    let peak = clean_part
        .iter()
        .zip(&noise_part)
        .fold(0.0f64, |m, (c, n)| m.max((c + n).abs()));
    let rescale = if peak > 1.0 { PEAK_LIMIT / peak } else { 1.0 };
    if rescale != 1.0 {
        clean_part.iter_mut().for_each(|s| *s *= rescale);
        noise_part.iter_mut().for_each(|s| *s *= rescale);
    }
    let mixed = clean_part.iter().zip(&noise_part).map(|(c, n)| c + n).collect();
    let rate = clean.sample_rate_hz();
    Ok(Mixture {
        mixed: AudioBuffer::from_clamped(mixed, rate)?,
        clean: AudioBuffer::from_clamped(clean_part, rate)?,
        noise: AudioBuffer::from_clamped(noise_part, rate)?,
        gain,
        rescale,
    })
}

/// `10 log10(P_signal / P_noise)` over the given arrays.
pub fn measure_snr_db(signal: &[f64], noise: &[f64]) -> f64 {
    10.0 * libm::log10(mean_square(signal) / mean_square(noise))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusConfig {
    /// Clips per class, ordered clean speech, noisy speech, non-speech.
    pub counts: [usize; 3],
    pub snrs_db: Vec<f64>,
    pub seed: u64,
    pub clip_seconds: f64,
    /// Shortest and longest utterance placed in a speech clip.
    pub utterance_seconds: (f64, f64),
    pub sample_rate_hz: u32,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        Self {
            counts: [10, 10, 10],
            snrs_db: DEFAULT_SNRS_DB.to_vec(),
            seed: 0,
            clip_seconds: 3.0,
            utterance_seconds: (0.8, 1.6),
            sample_rate_hz: crate::PIPELINE_RATE_HZ,
        }
    }
}

impl CorpusConfig {
    /// Splits `total` clips as evenly as possible over the three classes.
    pub fn with_total(total: usize) -> Self {
        let base = total / 3;
        let extra = total % 3;
        let counts = core::array::from_fn(|i| base + usize::from(i < extra));
        Self { counts, ..Self::default() }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.total() == 0 {
            bail!(Argument, "corpus needs at least one clip");
        }
        if self.counts[1] > 0 && self.snrs_db.is_empty() {
            bail!(Argument, "noisy speech requested without SNR levels");
        }
        if let Some(s) = self.snrs_db.iter().find(|s| !s.is_finite()) {
            bail!(Argument, "SNR {s} is not finite");
        }
        let (lo, hi) = self.utterance_seconds;
        if !(self.clip_seconds > 0.0 && lo > 0.0 && lo <= hi && hi <= self.clip_seconds) {
            bail!(Argument, "clip/utterance durations inconsistent");
        }
        if self.sample_rate_hz == 0 {
            bail!(Argument, "sample rate must be positive");
        }
        Ok(())
    }

    /// Class of clip `index` (clean clips first, then noisy, then non-speech).
    pub fn class_of(&self, index: usize) -> Option<ClipClass> {
        let mut start = 0;
        for (class, &n) in ClipClass::ALL.iter().zip(&self.counts) {
            if index < start + n {
                return Some(*class);
            }
            start += n;
        }
        None
    }

    pub fn clip_len(&self) -> usize {
        libm::round(self.clip_seconds * self.sample_rate_hz as f64) as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthClip {
    pub index: usize,
    pub class: ClipClass,
    pub noise_kind: Option<NoiseKind>,
    pub snr_db: Option<f64>,
    pub audio: AudioBuffer,
    /// Clean and scaled-noise components of a noisy-speech mixture.
    pub stems: Option<(AudioBuffer, AudioBuffer)>,
}

/// Generates clip `index` of the corpus described by `cfg`.
pub fn synthesize_clip(cfg: &CorpusConfig, index: usize) -> Result<SynthClip> {
    cfg.validate()?;
    let Some(class) = cfg.class_of(index) else {
        bail!(Argument, "clip {index} outside corpus of {}", cfg.total());
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64);
    let rate = cfg.sample_rate_hz;
    let len = cfg.clip_len();

    let clip = match class {
        ClipClass::CleanSpeech => {
            let mut x = utterance(&mut rng, cfg);
            let rms = rng.random_range(0.03..0.12);
            scale_to_rms(&mut x, rms);
            SynthClip {
                index,
                class,
                noise_kind: None,
                snr_db: None,
                audio: AudioBuffer::from_clamped(x, rate)?,
                stems: None,
            }
        }
        ClipClass::NoisySpeech => {
            let mut x = utterance(&mut rng, cfg);
            let rms = rng.random_range(0.03..0.12);
            scale_to_rms(&mut x, rms);
            let kind = NoiseKind::ALL[rng.random_range(0..NoiseKind::ALL.len())];
            let n = noise(&mut rng, kind, len, rate);
            let noisy_index = index - cfg.counts[0];
            let snr = cfg.snrs_db[noisy_index % cfg.snrs_db.len()];
            let peak = n.iter().fold(0.0f64, |m, s| m.max(s.abs()));
            let n: Vec<f64> = n.iter().map(|s| s / peak).collect();
            let mix = mix_at_snr(&AudioBuffer::new(x, rate)?, &AudioBuffer::new(n, rate)?, snr)?;
            SynthClip {
                index,
                class,
                noise_kind: Some(kind),
                snr_db: Some(snr),
                audio: mix.mixed,
                stems: Some((mix.clean, mix.noise)),
            }
        }
        ClipClass::NonSpeech => {
            let kind = NoiseKind::ALL[rng.random_range(0..NoiseKind::ALL.len())];
            let mut n = noise(&mut rng, kind, len, rate);
            let rms = rng.random_range(0.01..0.1);
            scale_to_rms(&mut n, rms);
            SynthClip {
                index,
                class,
                noise_kind: Some(kind),
                snr_db: None,
                audio: AudioBuffer::from_clamped(n, rate)?,
                stems: None,
            }
        }
    };
    Ok(clip)
}

/// Silence with one surrogate utterance of random length at a random offset.
fn utterance(rng: &mut ChaCha8Rng, cfg: &CorpusConfig) -> Vec<f64> {
    let len = cfg.clip_len();
    let rate = cfg.sample_rate_hz as f64;
    let (lo, hi) = cfg.utterance_seconds;
    let dur = if lo < hi { rng.random_range(lo..hi) } else { lo };
    let speech_len = ((dur * rate) as usize).min(len);
    let offset = rng.random_range(0..=len - speech_len);
    let mut x = vec![0.0; len];
    loop {
        let s = speech_surrogate(rng, speech_len, cfg.sample_rate_hz);
        if s.iter().any(|&v| v != 0.0) {
            x[offset..offset + speech_len].copy_from_slice(&s);
            return x;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn buf(x: Vec<f64>) -> AudioBuffer {
        AudioBuffer::new(x, 16_000).unwrap()
    }

    #[test]
    fn unit_gain_and_tenth_gain() {
        let c = buf(vec![0.1, -0.1, 0.1, -0.1]);
        let n = buf(vec![-0.1, -0.1, 0.1, 0.1]);
        assert!((mix_at_snr(&c, &n, 0.0).unwrap().gain - 1.0).abs() < 1e-12);
        assert!((mix_at_snr(&c, &n, 20.0).unwrap().gain - 0.1).abs() < 1e-12);
    }

    #[test]
    fn silent_inputs_rejected() {
        let c = buf(vec![0.1; 8]);
        let z = buf(vec![0.0; 8]);
        assert!(mix_at_snr(&c, &z, 5.0).is_err());
        assert!(mix_at_snr(&z, &c, 5.0).is_err());
    }

    #[test]
    fn noise_is_looped_to_clean_length() {
        let c = buf(vec![0.2; 10]);
        let n = buf(vec![0.1, -0.1, 0.3]);
        let m = mix_at_snr(&c, &n, 3.0).unwrap();
        assert_eq!(m.mixed.len(), 10);
        let snr = measure_snr_db(m.clean.samples(), m.noise.samples());
        assert!((snr - 3.0).abs() < 1e-9);
    }

    #[test]
    fn peak_protection_preserves_snr() {
        let c = buf(vec![0.9, -0.9, 0.9, -0.9]);
        let n = buf(vec![0.9, -0.9, 0.9, -0.9]);
        let m = mix_at_snr(&c, &n, 0.0).unwrap();
        assert!(m.rescale < 1.0);
        assert!(m.mixed.samples().iter().all(|s| s.abs() <= 1.0));
        assert!((measure_snr_db(m.clean.samples(), m.noise.samples())).abs() < 1e-9);
    }

    #[test]
    fn clip_classes_and_determinism() {
        let cfg = CorpusConfig { counts: [2, 3, 1], seed: 11, ..CorpusConfig::default() };
        let classes: Vec<_> = (0..6).map(|i| cfg.class_of(i).unwrap()).collect();
        assert_eq!(classes[..2], [ClipClass::CleanSpeech; 2]);
        assert_eq!(classes[2..5], [ClipClass::NoisySpeech; 3]);
        assert_eq!(classes[5], ClipClass::NonSpeech);
        assert!(cfg.class_of(6).is_none());
        for i in 0..6 {
            assert_eq!(synthesize_clip(&cfg, i).unwrap(), synthesize_clip(&cfg, i).unwrap());
        }
        let other = CorpusConfig { seed: 12, ..cfg.clone() };
        assert_ne!(synthesize_clip(&cfg, 0).unwrap().audio, synthesize_clip(&other, 0).unwrap().audio);
    }

    #[test]
    fn with_total_splits_evenly() {
        assert_eq!(CorpusConfig::with_total(30).counts, [10, 10, 10]);
        assert_eq!(CorpusConfig::with_total(31).counts, [11, 10, 10]);
        assert!(CorpusConfig::with_total(0).validate().is_err());
    }

    #[test]
    fn surrogate_has_pauses_and_is_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = speech_surrogate(&mut rng, 16_000, 16_000);
        assert!(s.iter().all(|v| v.abs() <= 1.0));
        // Envelope zeros at every syllable boundary.
        assert_eq!(s[0], 0.0);
        assert_eq!(s[4000], 0.0);
    }
}
