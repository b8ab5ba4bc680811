use nrvad::config::{Settings, KEYS};
use nrvad::Error;
use nrvad_core::pipeline::{Mode, PipelineConfig, ScorerBackend};
use nrvad_core::preprocess::{GateThreshold, NoiseScope, Stage};
use proptest::prelude::*;

#[test]
fn defaults_match_pipeline_defaults() {
    let s = Settings::default();
    let p = s.pipeline(Mode::Vad2).unwrap();
    assert_eq!(p, PipelineConfig::for_mode(Mode::Vad2));
    assert_eq!((p.vote.window(), p.vote.quorum()), (4, 3));
    assert_eq!(p.segment_ms, 200.0);
    assert_eq!((p.preprocess.alpha, p.preprocess.beta), (1.5, 0.02));
    assert_eq!(p.preprocess.theta, GateThreshold::Relative(0.01));
    assert_eq!(p.preprocess.target_rms, 0.1);
    assert_eq!(p.preprocess.noise_estimation_frames, 6);
}

#[test]
fn every_key_is_rendered_and_settable() {
    let rendered = Settings { mode: Some(Mode::Vad1), ..Settings::default() }.render();
    let rendered_keys: Vec<&str> = rendered.lines().map(|l| l.split(" = ").next().unwrap()).collect();
    for (key, _) in KEYS {
        // Only one of the two gate-threshold spellings is active at a time.
        if *key == "theta-abs" {
            continue;
        }
        assert!(rendered_keys.contains(key), "{key} missing from render");
    }
    let mut s = Settings::default();
    s.set("theta-abs", "0.5").unwrap();
    assert!(s.render().contains("theta-abs = 0.5\n"));
    assert!(!s.render().contains("theta-rel"));
}

#[test]
fn text_parsing() {
    let mut s = Settings::default();
    s.apply_text("# comment\n\nmode = vad1\nwindow=6\nstages = energy-gate , rms-normalize\nnoise-scope = segment\nbackend = score-file\n")
        .unwrap();
    assert_eq!(s.mode, Some(Mode::Vad1));
    assert_eq!(s.window, 6);
    assert_eq!(s.effective_quorum(), 4);
    assert_eq!(s.preprocess.stage_order, vec![Stage::EnergyGate, Stage::RmsNormalize]);
    assert_eq!(s.preprocess.noise_scope, NoiseScope::Segment);
    assert_eq!(s.backend, ScorerBackend::ScoreFile);

    let mut s = Settings::default();
    s.apply_text("stages =\n").unwrap();
    assert!(s.preprocess.stage_order.is_empty());
}

#[test]
fn bad_input_is_a_usage_error() {
    let usage = |text: &str| {
        let mut s = Settings::default();
        matches!(s.apply_text(text), Err(Error::Usage(_)))
    };
    assert!(usage("alpha 2\n"));
    assert!(usage("colour = blue\n"));
    assert!(usage("alpha = two\n"));
    assert!(usage("alpha = NaN\n"));
    assert!(usage("mode = vad3\n"));
    assert!(usage("window = -1\n"));
    assert!(usage("stages = spectral-subtract,denoise\n"));

    let invalid = |key: &str, value: &str| {
        let mut s = Settings::default();
        s.set(key, value).unwrap();
        matches!(s.pipeline(Mode::Vad2), Err(Error::Usage(_)))
    };
    assert!(invalid("alpha", "0.5"));
    assert!(invalid("beta", "1.5"));
    assert!(invalid("quorum", "5"));
    assert!(invalid("window", "0"));
    assert!(invalid("fft-len", "500"));
    assert!(invalid("segment-ms", "0"));
    assert!(invalid("backend", "score-file"), "vad2 needs audio");
}

fn arb_settings() -> impl Strategy<Value = Settings> {
    (
        prop::option::of(prop::sample::select(Mode::ALL.to_vec())),
        (10.0f64..1000.0, 1usize..8, prop::option::of(1usize..8), -50.0f64..50.0),
        (1.0f64..5.0, 0.0f64..=1.0, prop::bool::ANY, 0.0f64..2.0, 0.001f64..1.0, 1usize..20),
        (prop::bool::ANY, prop::sample::subsequence(Stage::ALL.to_vec(), 0..=3), 1usize..64),
    )
        .prop_map(|(mode, (seg, w, q, thresh), (alpha, beta, rel, theta, rms, k), (clip, stages, bands))| {
            let mut s = Settings { mode, segment_ms: seg, window: w, quorum: q.map(|q| q.min(w)), thresh, ..Settings::default() };
            s.preprocess.alpha = alpha;
            s.preprocess.beta = beta;
            s.preprocess.theta = if rel { GateThreshold::Relative(theta) } else { GateThreshold::Absolute(theta) };
            s.preprocess.target_rms = rms;
            s.preprocess.noise_estimation_frames = k;
            s.preprocess.noise_scope = if clip { NoiseScope::Clip } else { NoiseScope::Segment };
            s.preprocess.stage_order = stages;
            s.scorer.bands = bands;
            s
        })
}

proptest! {
    #[test]
    fn render_is_reingestable(s in arb_settings()) {
        let mut back = Settings::default();
        back.apply_text(&s.render()).unwrap();
        // Rendering resolves the quorum, so compare the resolved form.
        let resolved = Settings { quorum: Some(s.effective_quorum()), ..s.clone() };
        prop_assert_eq!(&back, &resolved);
        prop_assert_eq!(back.render(), s.render());
    }
}
