//! Per-class accuracy, ROC threshold sweeps, AUC and FPR at a fixed TPR.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::{bail, Result};
use crate::synth::ClipClass;

/// Fraction of clips per class whose final label matches the class:
/// speech classes are correct on 1, non-speech on 0. Absent classes are omitted.
pub fn class_accuracy(decisions: &[(bool, ClipClass)]) -> BTreeMap<ClipClass, f64> {
    let mut tally: BTreeMap<ClipClass, (usize, usize)> = BTreeMap::new();
    for &(label, class) in decisions {
        let entry = tally.entry(class).or_default();
        entry.1 += 1;
        if label == class.is_speech() {
            entry.0 += 1;
        }
    }
    tally
        .into_iter()
        .map(|(class, (correct, total))| (class, correct as f64 / total as f64))
        .collect()
}

/// Mean of speech recall and non-speech specificity.
pub fn balanced_accuracy(decisions: &[(bool, ClipClass)]) -> f64 {
    let (mut tp, mut pos, mut tn, mut neg) = (0usize, 0usize, 0usize, 0usize);
    for &(label, class) in decisions {
        if class.is_speech() {
            pos += 1;
            tp += usize::from(label);
        } else {
            neg += 1;
            tn += usize::from(!label);
        }
    }
    let rate = |hit: usize, n: usize| if n == 0 { 0.0 } else { hit as f64 / n as f64 };
    0.5 * (rate(tp, pos) + rate(tn, neg))
}

/// Threshold maximizing [`balanced_accuracy`] when clips with score `>=` it are
/// labelled speech. Candidates are the midpoints between adjacent distinct
/// scores plus one value below and one above the range; the lowest of tied
/// candidates wins. Returns the threshold and the accuracy it achieves.
pub fn tune_threshold(clip_scores: &[(f64, ClipClass)]) -> Result<(f64, f64)> {
    if clip_scores.iter().any(|(s, _)| !s.is_finite()) {
        bail!(Domain, "non-finite score");
    }
    let mut distinct: Vec<f64> = clip_scores.iter().map(|(s, _)| *s).collect();
    if distinct.is_empty() {
        bail!(Argument, "no scores to tune on");
    }
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let mut candidates = Vec::with_capacity(distinct.len() + 1);
    candidates.push(distinct[0] - 1.0);
    candidates.extend(distinct.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    candidates.push(distinct[distinct.len() - 1] + 1.0);

    let mut best = (candidates[0], f64::NEG_INFINITY);
    let mut decisions = Vec::with_capacity(clip_scores.len());
    for t in candidates {
        decisions.clear();
        decisions.extend(clip_scores.iter().map(|&(s, class)| (s >= t, class)));
        let acc = balanced_accuracy(&decisions);
        if acc > best.1 {
            best = (t, acc);
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub threshold: f64,
    pub tpr: f64,
    pub fpr: f64,
}

/// ROC points by descending threshold, from `(0, 0)` at `+inf` to `(1, 1)` at `-inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

/// Sweeps every distinct score as a threshold; a clip is predicted speech when
/// its score is `>=` the threshold. The AUC is the trapezoid area over all
/// points. `max_points`, when set, thins the returned points (the anchors are
/// kept) without changing the AUC.
pub fn roc_sweep(clip_scores: &[(f64, bool)], max_points: Option<usize>) -> Result<RocCurve> {
    if clip_scores.iter().any(|(s, _)| s.is_nan()) {
        bail!(Domain, "NaN score");
    }
    let positives = clip_scores.iter().filter(|(_, t)| *t).count();
    let negatives = clip_scores.len() - positives;
    if positives == 0 || negatives == 0 {
        bail!(Domain, "ROC needs both speech and non-speech clips ({positives} / {negatives})");
    }
    let mut sorted = clip_scores.to_vec();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut points = Vec::with_capacity(sorted.len() + 2);
    points.push(RocPoint { threshold: f64::INFINITY, tpr: 0.0, fpr: 0.0 });
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < sorted.len() {
        let threshold = sorted[i].0;
        while i < sorted.len() && sorted[i].0 == threshold {
            if sorted[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint {
            threshold,
            tpr: tp as f64 / positives as f64,
            fpr: fp as f64 / negatives as f64,
        });
    }
    points.push(RocPoint { threshold: f64::NEG_INFINITY, tpr: 1.0, fpr: 1.0 });

    let auc = points
        .windows(2)
        .map(|w| (w[1].fpr - w[0].fpr) * (w[1].tpr + w[0].tpr) / 2.0)
        .sum();

    if let Some(limit) = max_points {
        points = thin(points, limit.max(2));
    }
    Ok(RocCurve { points, auc })
}

fn thin(points: Vec<RocPoint>, limit: usize) -> Vec<RocPoint> {
    if points.len() <= limit {
        return points;
    }
    let last = points.len() - 1;
    (0..limit)
        .map(|i| points[(i * last + (limit - 1) / 2) / (limit - 1)])
        .collect()
}

/// Smallest FPR at which the curve reaches `target_tpr`, interpolating
/// linearly between the two points that bracket the target.
pub fn fpr_at_tpr(curve: &RocCurve, target_tpr: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&target_tpr) {
        bail!(Argument, "target TPR {target_tpr} outside [0, 1]");
    }
    let Some(i) = curve.points.iter().position(|p| p.tpr >= target_tpr) else {
        bail!(Format, "curve never reaches TPR {target_tpr}");
    };
    if i == 0 {
        return Ok(curve.points[0].fpr);
    }
    let (a, b) = (curve.points[i - 1], curve.points[i]);
    if b.tpr == a.tpr {
        return Ok(b.fpr);
    }
    Ok(a.fpr + (target_tpr - a.tpr) / (b.tpr - a.tpr) * (b.fpr - a.fpr))
}
