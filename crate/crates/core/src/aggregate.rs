//! Segment-level score and label from a frame score matrix.

use crate::math::compensated_sum;
use crate::scorer::FrameScoreMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentScore {
    pub value: f64,
    pub label: bool,
    pub threshold_used: f64,
}

impl SegmentScore {
    pub fn new(value: f64, threshold: f64) -> Self {
        Self { value, label: value >= threshold, threshold_used: threshold }
    }
}

/// `(1/D) * sum_d sum_c z[d][c]`: the mean over frames of each frame's channel sum.
pub fn aggregate_score(m: &FrameScoreMatrix) -> f64 {
    compensated_sum(m.rows().map(|row| compensated_sum(row.iter().copied()))) / m.frames() as f64
}

/// Labels the segment speech when its aggregate score reaches `thresh` (inclusive).
pub fn decide_segment(m: &FrameScoreMatrix, thresh: f64) -> SegmentScore {
    SegmentScore::new(aggregate_score(m), thresh)
}
