use nrvad::scorefile::{format_scores, load_scores, parse_scores, DEFAULT_FRAME_MS};
use nrvad::Error;
use nrvad_core::scorer::FrameScoreMatrix;
use proptest::prelude::*;

#[test]
fn headerless_example() {
    let m = parse_scores("1 0.0 0.0\n2 1.5 0.2").unwrap();
    assert_eq!((m.frames(), m.channels()), (2, 2));
    assert_eq!(m.row(0), &[0.0, 0.0]);
    assert_eq!(m.row(1), &[1.5, 0.2]);
    assert_eq!(m.frame_duration_ms(), DEFAULT_FRAME_MS);
}

#[test]
fn header_sets_channels_and_frame_length() {
    let m = parse_scores("#channels=3 frame_ms=20\n1 1 2 3\n\n2 4 5 6\n").unwrap();
    assert_eq!((m.frames(), m.channels()), (2, 3));
    assert_eq!(m.frame_duration_ms(), 20.0);
}

#[test]
fn rejections() {
    let format = |text: &str| matches!(parse_scores(text), Err(Error::Format(_)));
    assert!(format(""));
    assert!(format("#channels=2 frame_ms=10\n"));
    assert!(format("1 0.5 0.5\n2 0.5\n"), "ragged row");
    assert!(format("#channels=2 frame_ms=10\n1 0.5\n"), "row disagrees with header");
    assert!(format("2 0.5\n"), "index must start at 1");
    assert!(format("1 0.5\n3 0.5\n"), "index gap");
    assert!(format("1 x\n"));
    assert!(format("#channels=0 frame_ms=10\n1\n"));
    assert!(format("#channels=1\n1 0.5\n"), "frame_ms missing");
    assert!(format("#chans=1 frame_ms=10\n1 0.5\n"));

    let e = parse_scores("1 0.5 -1\n").unwrap_err();
    assert!(matches!(e, Error::Core(nrvad_core::Error::Domain(_))), "{e}");
}

#[test]
fn missing_and_non_utf8_files() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(load_scores(dir.path().join("none.txt")), Err(Error::Io { .. })));
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, [0xffu8, 0xfe, b'1']).unwrap();
    assert!(matches!(load_scores(&bad), Err(Error::Format(_))));
}

proptest! {
    #[test]
    fn format_parse_round_trip(
        (frames, channels) in (1usize..20, 1usize..6),
        seed in prop::collection::vec(0.0f64..100.0, 120),
        frame_ms in 1.0f64..50.0,
    ) {
        let scores: Vec<f64> = (0..frames * channels).map(|i| seed[i % seed.len()] * (i + 1) as f64).collect();
        let m = FrameScoreMatrix::from_flat(scores, frames, channels, frame_ms).unwrap();
        let back = parse_scores(&format_scores(&m)).unwrap();
        prop_assert_eq!(back, m);
    }
}
