//! RIFF/WAVE ingestion (PCM16 or float32, mono or stereo) and PCM16 mono emission.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Seek, Write};
use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};
use nrvad_core::resample::resample;
use nrvad_core::{AudioBuffer, PIPELINE_RATE_HZ};

use crate::error::{Error, Result};

const PCM16_SCALE: f64 = 32768.0;

pub fn read_wav(path: impl AsRef<Path>) -> Result<AudioBuffer> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    decode_wav(BufReader::new(file)).map_err(|e| match e {
        Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
        Error::UnsupportedCodec(m) => Error::UnsupportedCodec(format!("{}: {m}", path.display())),
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

/// Decodes a WAV stream, downmixing stereo by the channel mean.
pub fn decode_wav<R: Read>(reader: R) -> Result<AudioBuffer> {
    let reader = WavReader::new(reader).map_err(hound_error)?;
    let spec = reader.spec();
    let channels = usize::from(spec.channels);
    if !(1..=2).contains(&channels) {
        return Err(Error::UnsupportedCodec(format!("{channels} channels (1 or 2 supported)")));
    }
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) => reader
            .into_samples::<i16>()
            .map(|s| s.map(|v| f64::from(v) / PCM16_SCALE))
            .collect::<std::result::Result<_, _>>()
            .map_err(hound_error)?,
        (SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>()
            .map_err(hound_error)?,
        (format, bits) => {
            return Err(Error::UnsupportedCodec(format!("{bits}-bit {format:?} samples")));
        }
    };
    if !interleaved.len().is_multiple_of(channels) {
        return Err(Error::Format("truncated final frame".into()));
    }
    let mono: Vec<f64> = interleaved
        .chunks_exact(channels)
        .map(|frame| frame.iter().sum::<f64>() / channels as f64)
        .collect();
    if mono.iter().any(|s| !s.is_finite()) {
        return Err(Error::Format("non-finite float sample".into()));
    }
    // Float files may legitimately exceed full scale; clamp into the buffer's range.
    Ok(AudioBuffer::from_clamped(mono, spec.sample_rate)?)
}

/// Reads a WAV file and resamples it to the pipeline rate when needed.
pub fn read_for_pipeline(path: impl AsRef<Path>) -> Result<AudioBuffer> {
    let buf = read_wav(path)?;
    if buf.sample_rate_hz() == PIPELINE_RATE_HZ {
        Ok(buf)
    } else {
        Ok(resample(&buf, PIPELINE_RATE_HZ)?)
    }
}

pub fn write_wav(buf: &AudioBuffer, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    encode_wav(buf, BufWriter::new(file)).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

/// Encodes `buf` as 16-bit PCM mono.
pub fn encode_wav<W: Write + Seek>(buf: &AudioBuffer, writer: W) -> Result<()> {
    let spec = WavSpec {
        channels: 1,
        sample_rate: buf.sample_rate_hz(),
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let mut w = WavWriter::new(writer, spec).map_err(hound_error)?;
    for &s in buf.samples() {
        w.write_sample(quantize(s)).map_err(hound_error)?;
    }
    w.finalize().map_err(hound_error)
}

/// Amplitude to PCM16: round, then clamp to the representable range.
pub fn quantize(sample: f64) -> i16 {
    (sample * PCM16_SCALE).round().clamp(-32768.0, 32767.0) as i16
}

fn hound_error(e: hound::Error) -> Error {
    match e {
        hound::Error::IoError(source) => Error::Io { path: Default::default(), source },
        hound::Error::FormatError(m) => Error::Format(m.to_string()),
        hound::Error::Unsupported => Error::UnsupportedCodec("encoding not supported".into()),
        other => Error::Format(other.to_string()),
    }
}
