use std::io::Cursor;

use hound::{SampleFormat, WavSpec, WavWriter};
use nrvad::wav::{decode_wav, encode_wav, quantize, read_wav, write_wav};
use nrvad::Error;
use nrvad_core::AudioBuffer;
use proptest::prelude::*;

fn wav_bytes<S: hound::Sample + Copy>(spec: WavSpec, samples: &[S]) -> Vec<u8> {
    let mut cur = Cursor::new(Vec::new());
    let mut w = WavWriter::new(&mut cur, spec).unwrap();
    for &s in samples {
        w.write_sample(s).unwrap();
    }
    w.finalize().unwrap();
    cur.into_inner()
}

fn pcm16(channels: u16) -> WavSpec {
    WavSpec { channels, sample_rate: 16_000, bits_per_sample: 16, sample_format: SampleFormat::Int }
}

#[test]
fn pcm16_scaling() {
    let buf = decode_wav(Cursor::new(wav_bytes(pcm16(1), &[32767i16, 0, -32768]))).unwrap();
    assert_eq!(buf.samples(), &[32767.0 / 32768.0, 0.0, -1.0]);
    assert_eq!(buf.sample_rate_hz(), 16_000);
}

#[test]
fn stereo_downmix_is_channel_mean() {
    let spec = WavSpec { channels: 2, sample_rate: 8_000, bits_per_sample: 32, sample_format: SampleFormat::Float };
    let buf = decode_wav(Cursor::new(wav_bytes(spec, &[0.5f32, -0.5, 0.25, 0.75]))).unwrap();
    assert_eq!(buf.samples(), &[0.0, 0.5]);
    assert_eq!(buf.sample_rate_hz(), 8_000);
}

#[test]
fn float_samples_beyond_full_scale_are_clamped() {
    let spec = WavSpec { channels: 1, sample_rate: 16_000, bits_per_sample: 32, sample_format: SampleFormat::Float };
    let buf = decode_wav(Cursor::new(wav_bytes(spec, &[1.5f32, -2.0]))).unwrap();
    assert_eq!(buf.samples(), &[1.0, -1.0]);
}

#[test]
fn unsupported_encodings() {
    let pcm24 = WavSpec { channels: 1, sample_rate: 16_000, bits_per_sample: 24, sample_format: SampleFormat::Int };
    let e = decode_wav(Cursor::new(wav_bytes(pcm24, &[1i32, 2]))).unwrap_err();
    assert!(matches!(e, Error::UnsupportedCodec(_)), "{e}");

    let e = decode_wav(Cursor::new(wav_bytes(pcm16(3), &[1i16, 2, 3]))).unwrap_err();
    assert!(matches!(e, Error::UnsupportedCodec(_)), "{e}");
}

#[test]
fn malformed_header_is_format_error() {
    let e = decode_wav(Cursor::new(b"RIFX\0\0\0\0WAVEjunk".to_vec())).unwrap_err();
    assert!(matches!(e, Error::Format(_)), "{e}");

    let mut bytes = wav_bytes(pcm16(1), &[1i16, 2, 3]);
    bytes[8..12].copy_from_slice(b"AVI ");
    assert!(matches!(decode_wav(Cursor::new(bytes)).unwrap_err(), Error::Format(_)));
}

#[test]
fn zero_buffer_writes_zero_data() {
    let mut cur = Cursor::new(Vec::new());
    encode_wav(&AudioBuffer::new(vec![0.0, 0.0], 16_000).unwrap(), &mut cur).unwrap();
    let bytes = cur.into_inner();
    let n = bytes.len();
    assert_eq!(&bytes[n - 12..n - 8], b"data");
    assert_eq!(u32::from_le_bytes(bytes[n - 8..n - 4].try_into().unwrap()), 4);
    assert_eq!(&bytes[n - 4..], &[0, 0, 0, 0]);
    let r = hound::WavReader::new(Cursor::new(bytes)).unwrap();
    assert_eq!(r.spec(), pcm16(1));
}

#[test]
fn full_scale_clamps_without_wraparound() {
    assert_eq!(quantize(1.0), 32767);
    assert_eq!(quantize(-1.0), -32768);
    assert_eq!(quantize(0.5 / 32768.0), 1);
    assert_eq!(quantize(0.0), 0);
}

#[test]
fn file_round_trip_and_missing_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.wav");
    let buf = AudioBuffer::new(vec![0.25, -0.5, 1.0, -1.0], 22_050).unwrap();
    write_wav(&buf, &path).unwrap();
    let back = read_wav(&path).unwrap();
    assert_eq!(back.sample_rate_hz(), 22_050);
    assert_eq!(back.samples(), &[0.25, -0.5, 32767.0 / 32768.0, -1.0]);

    let e = read_wav(dir.path().join("absent.wav")).unwrap_err();
    assert!(matches!(e, Error::Io { .. }), "{e}");
}

proptest! {
    #[test]
    fn round_trip_within_one_step(samples in prop::collection::vec(-1.0f64..=1.0, 1..2000)) {
        let buf = AudioBuffer::new(samples, 16_000).unwrap();
        let mut cur = Cursor::new(Vec::new());
        encode_wav(&buf, &mut cur).unwrap();
        cur.set_position(0);
        let back = decode_wav(cur).unwrap();
        prop_assert_eq!(back.len(), buf.len());
        for (a, b) in buf.samples().iter().zip(back.samples()) {
            prop_assert!((a - b).abs() <= 1.0 / 32768.0);
        }
    }
}
