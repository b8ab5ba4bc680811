use nrvad_core::eval::{balanced_accuracy, class_accuracy, fpr_at_tpr, roc_sweep, RocCurve, RocPoint};
use nrvad_core::synth::ClipClass;
use nrvad_core::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Probability that a random positive outscores a random negative, ties counting half.
fn mann_whitney(scores: &[(f64, bool)]) -> f64 {
    let pos: Vec<f64> = scores.iter().filter(|s| s.1).map(|s| s.0).collect();
    let neg: Vec<f64> = scores.iter().filter(|s| !s.1).map(|s| s.0).collect();
    let mut wins = 0.0;
    for p in &pos {
        for n in &neg {
            wins += if p > n { 1.0 } else if p == n { 0.5 } else { 0.0 };
        }
    }
    wins / (pos.len() * neg.len()) as f64
}

#[test]
fn auc_equals_mann_whitney() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for case in 0..100 {
        let n = rng.random_range(2..=200);
        // Coarse quantization on half the cases forces ties.
        let levels = if case % 2 == 0 { 5.0 } else { 1e6 };
        let mut scores: Vec<(f64, bool)> = (0..n)
            .map(|_| {
                let speech = rng.random_bool(0.5);
                let s: f64 = rng.random_range(0.0..1.0) + if speech { 0.3 } else { 0.0 };
                ((s * levels).round() / levels, speech)
            })
            .collect();
        scores[0].1 = true;
        scores[1].1 = false;
        let curve = roc_sweep(&scores, None).unwrap();
        assert!((curve.auc - mann_whitney(&scores)).abs() < 1e-9, "case {case}");
    }
}

#[test]
fn curve_shape() {
    let scores = [(0.9, true), (0.8, false), (0.7, true), (0.7, false), (0.1, false)];
    let c = roc_sweep(&scores, None).unwrap();
    let pts: Vec<(f64, f64, f64)> = c.points.iter().map(|p| (p.threshold, p.tpr, p.fpr)).collect();
    let third = 1.0 / 3.0;
    assert_eq!(
        pts,
        [
            (f64::INFINITY, 0.0, 0.0),
            (0.9, 0.5, 0.0),
            (0.8, 0.5, third),
            (0.7, 1.0, 2.0 * third),
            (0.1, 1.0, 1.0),
            (f64::NEG_INFINITY, 1.0, 1.0),
        ]
    );
    let thinned = roc_sweep(&scores, Some(3)).unwrap();
    assert_eq!(thinned.points.len(), 3);
    assert_eq!(thinned.auc, c.auc);
    assert_eq!(thinned.points.first(), c.points.first());
    assert_eq!(thinned.points.last(), c.points.last());
}

#[test]
fn roc_rejects_degenerate_input() {
    assert!(matches!(roc_sweep(&[(1.0, true)], None), Err(Error::Domain(_))));
    assert!(matches!(roc_sweep(&[(1.0, false), (0.0, false)], None), Err(Error::Domain(_))));
    assert!(roc_sweep(&[(f64::NAN, true), (0.0, false)], None).is_err());
}

fn curve(points: &[(f64, f64)]) -> RocCurve {
    RocCurve {
        points: points.iter().map(|&(tpr, fpr)| RocPoint { threshold: 0.0, tpr, fpr }).collect(),
        auc: 0.0,
    }
}

#[test]
fn fpr_at_target_interpolates() {
    let c = curve(&[(0.0, 0.0), (0.5, 0.1), (0.98, 0.2), (1.0, 0.6), (1.0, 1.0)]);
    assert!((fpr_at_tpr(&c, 0.99).unwrap() - 0.4).abs() < 1e-12);
    assert_eq!(fpr_at_tpr(&c, 0.5).unwrap(), 0.1);
    assert_eq!(fpr_at_tpr(&c, 1.0).unwrap(), 0.6);
    assert_eq!(fpr_at_tpr(&c, 0.0).unwrap(), 0.0);
    assert!(fpr_at_tpr(&c, 1.5).is_err());
    assert!(fpr_at_tpr(&curve(&[(0.0, 0.0), (0.5, 1.0)]), 0.9).is_err());
}

#[test]
fn fpr_at_target_on_perfect_and_reversed_scores() {
    let good: Vec<(f64, bool)> = (0..100).map(|i| (i as f64, i >= 50)).collect();
    let c = roc_sweep(&good, None).unwrap();
    assert_eq!(c.auc, 1.0);
    assert_eq!(fpr_at_tpr(&c, 0.99).unwrap(), 0.0);
    let bad: Vec<(f64, bool)> = (0..100).map(|i| (i as f64, i < 50)).collect();
    let c = roc_sweep(&bad, None).unwrap();
    assert_eq!(c.auc, 0.0);
    assert!(fpr_at_tpr(&c, 0.99).unwrap() > 0.99);
}

#[test]
fn accuracy_by_class() {
    use ClipClass::*;
    let d = [
        (true, CleanSpeech),
        (true, CleanSpeech),
        (false, CleanSpeech),
        (false, NoisySpeech),
        (false, NonSpeech),
        (true, NonSpeech),
        (false, NonSpeech),
        (false, NonSpeech),
    ];
    let acc = class_accuracy(&d);
    assert!((acc[&CleanSpeech] - 2.0 / 3.0).abs() < 1e-12);
    assert_eq!(acc[&NoisySpeech], 0.0);
    assert_eq!(acc[&NonSpeech], 0.75);
    // Speech recall 2/4, non-speech specificity 3/4.
    assert!((balanced_accuracy(&d) - 0.625).abs() < 1e-12);
    assert!(!class_accuracy(&[(true, NonSpeech)]).contains_key(&CleanSpeech));
}

proptest! {
    #[test]
    fn roc_is_monotone_and_auc_bounded(scores in prop::collection::vec((0u8..20, any::<bool>()), 2..80)) {
        let mut scores: Vec<(f64, bool)> = scores.into_iter().map(|(s, b)| (f64::from(s), b)).collect();
        scores[0].1 = true;
        scores[1].1 = false;
        let c = roc_sweep(&scores, None).unwrap();
        prop_assert!((0.0..=1.0).contains(&c.auc));
        for w in c.points.windows(2) {
            prop_assert!(w[1].tpr >= w[0].tpr && w[1].fpr >= w[0].fpr && w[1].threshold < w[0].threshold);
        }
        let f = fpr_at_tpr(&c, 0.99).unwrap();
        prop_assert!((0.0..=1.0).contains(&f));
    }
}

#[test]
fn tuned_threshold_maximizes_balanced_accuracy() {
    use nrvad_core::eval::tune_threshold;
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..50 {
        let n = rng.random_range(3..60);
        let clips: Vec<(f64, ClipClass)> = (0..n)
            .map(|_| {
                let class = ClipClass::ALL[rng.random_range(0..3)];
                let shift = if class.is_speech() { 1.0 } else { 0.0 };
                ((rng.random_range(0.0..2.0f64) + shift).round(), class)
            })
            .collect();
        let (t, acc) = tune_threshold(&clips).unwrap();
        let at = |t: f64| balanced_accuracy(&clips.iter().map(|&(s, c)| (s >= t, c)).collect::<Vec<_>>());
        assert_eq!(at(t), acc);
        // Brute force over a fine grid can do no better.
        let grid_best = (-20..=80).map(|i| at(i as f64 * 0.05)).fold(0.0, f64::max);
        assert!(acc >= grid_best);
    }
    assert!(tune_threshold(&[]).is_err());
    assert!(tune_threshold(&[(f64::NAN, ClipClass::NonSpeech)]).is_err());
    let (t, acc) = tune_threshold(&[(1.0, ClipClass::NonSpeech), (3.0, ClipClass::CleanSpeech)]).unwrap();
    assert_eq!((t, acc), (2.0, 1.0));
}
