//! Text score files carrying externally computed frame scores.
//!
//! ```text
//! #channels=2 frame_ms=10
//! 1 0.0 0.0
//! 2 1.5 0.2
//! ```
//!
//! Rows are `frame_index score_1 … score_C`, indices ascending from 1. A file
//! without the header line is accepted; the channel count then comes from the
//! first row and the frame duration defaults to [`DEFAULT_FRAME_MS`].

use std::fmt::Write as _;
use std::path::Path;

use nrvad_core::scorer::FrameScoreMatrix;

use crate::error::{Error, Result};

pub const DEFAULT_FRAME_MS: f64 = 10.0;

pub fn load_scores(path: impl AsRef<Path>) -> Result<FrameScoreMatrix> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = String::from_utf8(bytes)
        .map_err(|_| Error::Format(format!("{}: not UTF-8", path.display())))?;
    parse_scores(&text).map_err(|e| match e {
        Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn parse_scores(text: &str) -> Result<FrameScoreMatrix> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
        .peekable();

    let mut channels = None;
    let mut frame_ms = DEFAULT_FRAME_MS;
    if let Some((n, header)) = lines.next_if(|(_, l)| l.starts_with('#')) {
        let (c, ms) = parse_header(header).map_err(|m| Error::Format(format!("line {n}: {m}")))?;
        channels = Some(c);
        frame_ms = ms;
    }

    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (n, line) in lines {
        let fmt = |m: String| Error::Format(format!("line {n}: {m}"));
        let mut fields = line.split_ascii_whitespace();
        let index: usize = fields
            .next()
            .and_then(|f| f.parse().ok())
            .ok_or_else(|| fmt("missing or invalid frame index".into()))?;
        if index != rows.len() + 1 {
            return Err(fmt(format!("frame index {index}, expected {}", rows.len() + 1)));
        }
        let row = fields
            .map(|f| f.parse::<f64>().map_err(|_| fmt(format!("invalid score {f:?}"))))
            .collect::<Result<Vec<_>>>()?;
        let expected = *channels.get_or_insert(row.len());
        if row.len() != expected {
            return Err(fmt(format!("{} scores, expected {expected}", row.len())));
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Format("no score rows".into()));
    }
    Ok(FrameScoreMatrix::new(rows, frame_ms)?)
}

fn parse_header(line: &str) -> std::result::Result<(usize, f64), String> {
    let mut channels = None;
    let mut frame_ms = None;
    for token in line.trim_start_matches('#').split_ascii_whitespace() {
        match token.split_once('=') {
            Some(("channels", v)) => channels = v.parse::<usize>().ok().filter(|&c| c > 0),
            Some(("frame_ms", v)) => frame_ms = v.parse::<f64>().ok().filter(|m| *m > 0.0 && m.is_finite()),
            _ => return Err(format!("unexpected header token {token:?}")),
        }
    }
    match (channels, frame_ms) {
        (Some(c), Some(ms)) => Ok((c, ms)),
        _ => Err("header must be `#channels=C frame_ms=M` with positive values".into()),
    }
}

pub fn format_scores(m: &FrameScoreMatrix) -> String {
    let mut out = format!("#channels={} frame_ms={}\n", m.channels(), m.frame_duration_ms());
    for (i, row) in m.rows().enumerate() {
        let _ = write!(out, "{}", i + 1);
        for v in row {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    out
}

pub fn write_scores(m: &FrameScoreMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_scores(m)).map_err(|e| Error::io(path, e))
}
