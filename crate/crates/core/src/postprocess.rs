//! Sliding-window majority voting over per-segment labels and the
//! any-window final decision.
//!
//! A window of `W` consecutive labels is speech when at least `quorum` of them
//! are speech. The default quorum, `ceil(W/2) + 1` capped at `W`, is the
//! strict inequality `sum > ceil(W/2)`; for `W = 4` that is 3 of 4.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{bail, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VoteConfig {
    window_w: usize,
    quorum: usize,
}

impl Default for VoteConfig {
    fn default() -> Self {
        Self { window_w: 4, quorum: 3 }
    }
}

impl VoteConfig {
    pub fn new(window_w: usize, quorum: usize) -> Result<Self> {
        if window_w == 0 {
            bail!(Argument, "voting window must hold at least one segment");
        }
        if quorum == 0 || quorum > window_w {
            bail!(Argument, "quorum {quorum} must lie in 1..={window_w}");
        }
        Ok(Self { window_w, quorum })
    }

    pub fn with_default_quorum(window_w: usize) -> Result<Self> {
        Self::new(window_w, default_quorum(window_w))
    }

    pub fn window(&self) -> usize {
        self.window_w
    }

    pub fn quorum(&self) -> usize {
        self.quorum
    }

    /// Quorum applied when fewer than `W` labels exist: `ceil(quorum * T / W)`, at least 1.
    pub fn short_quorum(&self, len: usize) -> usize {
        (self.quorum * len).div_ceil(self.window_w).max(1)
    }
}

/// Votes needed for `sum > ceil(W/2)`, capped at `W` so that `W = 1` is the identity.
pub fn default_quorum(window_w: usize) -> usize {
    (window_w.div_ceil(2) + 1).min(window_w)
}

/// `M_t` for every full window, `t = 0..=T-W`.
pub fn vote_windows(labels: &[bool], cfg: &VoteConfig) -> Result<Vec<bool>> {
    let w = cfg.window_w;
    if labels.len() < w {
        return Err(Error::ShortInput { len: labels.len(), window: w });
    }
    let mut count = labels[..w].iter().filter(|&&l| l).count();
    let mut out = Vec::with_capacity(labels.len() - w + 1);
    out.push(count >= cfg.quorum);
    for t in 1..=labels.len() - w {
        count += labels[t + w - 1] as usize;
        count -= labels[t - 1] as usize;
        out.push(count >= cfg.quorum);
    }
    Ok(out)
}

/// Speech when any window is speech.
pub fn final_decision(window_labels: &[bool]) -> Result<bool> {
    if window_labels.is_empty() {
        bail!(Argument, "no windows to decide over");
    }
    Ok(window_labels.iter().any(|&m| m))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VadDecision {
    pub per_segment: Vec<bool>,
    /// One entry per full window, or a single entry from the short-input fallback.
    pub per_window: Vec<bool>,
    pub final_label: bool,
}

/// Votes over `labels`; with fewer than `W` labels a single window spans them
/// all with the quorum scaled by [`VoteConfig::short_quorum`].
pub fn decide(labels: &[bool], cfg: &VoteConfig) -> Result<VadDecision> {
    if labels.is_empty() {
        bail!(Argument, "no segment labels");
    }
    let per_window = match vote_windows(labels, cfg) {
        Ok(w) => w,
        Err(Error::ShortInput { len, .. }) => {
            let votes = labels.iter().filter(|&&l| l).count();
            vec![votes >= cfg.short_quorum(len)]
        }
        Err(e) => return Err(e),
    };
    let final_label = final_decision(&per_window)?;
    Ok(VadDecision { per_segment: labels.to_vec(), per_window, final_label })
}
