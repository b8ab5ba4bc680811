//! Manifest-driven detection and evaluation.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nrvad_core::eval::{class_accuracy, fpr_at_tpr, roc_sweep, RocCurve};
use nrvad_core::pipeline::{run_pipeline, run_pipeline_on_scores, Mode, PipelineConfig, PipelineOutput, ScorerBackend};
use nrvad_core::synth::ClipClass;
use rayon::prelude::*;
use serde_json::json;

use crate::error::{Error, Result};
use crate::manifest::{Manifest, ManifestEntry};
use crate::scorefile::load_scores;
use crate::wav::read_for_pipeline;

/// Row order of accuracy tables.
pub const TABLE_ROWS: [(ClipClass, &str); 3] = [
    (ClipClass::NonSpeech, "Non-Speech"),
    (ClipClass::CleanSpeech, "Clean Speech"),
    (ClipClass::NoisySpeech, "Noisy Speech"),
];

/// Runs every config on one input, decoding it once. All configs must share a backend.
pub fn detect_file(path: &Path, configs: &[PipelineConfig]) -> Result<Vec<PipelineOutput>> {
    let Some(first) = configs.first() else {
        return Ok(Vec::new());
    };
    match first.backend {
        ScorerBackend::Reference => {
            let audio = read_for_pipeline(path)?;
            configs.iter().map(|c| Ok(run_pipeline(&audio, c, &c.scorer)?)).collect()
        }
        ScorerBackend::ScoreFile => {
            let scores = load_scores(path)?;
            configs.iter().map(|c| Ok(run_pipeline_on_scores(&scores, c)?)).collect()
        }
    }
}

/// Outcome for one manifest entry: one output per config, or the error that stopped it.
#[derive(Debug)]
pub struct ClipOutcome {
    pub entry: ManifestEntry,
    pub outputs: std::result::Result<Vec<PipelineOutput>, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub mode: Mode,
    pub thresh: f64,
    /// Clips that were scored successfully.
    pub clips: usize,
    pub per_class_accuracy: BTreeMap<ClipClass, f64>,
    /// `None` when the scored clips do not contain both speech and non-speech.
    pub roc: Option<RocCurve>,
    /// `(target TPR, FPR)` pairs, in request order.
    pub fpr_at_tpr: Vec<(f64, f64)>,
}

#[derive(Debug)]
pub struct EvalRun {
    pub reports: Vec<EvalReport>,
    pub clips: Vec<ClipOutcome>,
}

impl EvalRun {
    pub fn failures(&self) -> impl Iterator<Item = (&Path, &str)> {
        self.clips.iter().filter_map(|c| c.outputs.as_ref().err().map(|e| (c.entry.path.as_path(), e.as_str())))
    }

    pub fn has_failures(&self) -> bool {
        self.failures().next().is_some()
    }
}

/// Scores every manifest entry under every config on `pool`, then assembles one
/// report per config. Unreadable entries are recorded and skipped.
pub fn run_eval(
    manifest: &Manifest,
    configs: &[PipelineConfig],
    target_tprs: &[f64],
    pool: &rayon::ThreadPool,
) -> Result<EvalRun> {
    if manifest.is_empty() {
        return Err(Error::Usage("manifest has no entries".into()));
    }
    if configs.is_empty() {
        return Err(Error::Usage("no modes requested".into()));
    }
    if configs.iter().any(|c| c.backend != configs[0].backend) {
        return Err(Error::Usage("all modes must use the same scorer backend".into()));
    }
    if let Some(t) = target_tprs.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        return Err(Error::Usage(format!("target TPR {t} outside [0, 1]")));
    }
    let clips: Vec<ClipOutcome> = pool.install(|| {
        manifest
            .entries
            .par_iter()
            .map(|entry| ClipOutcome {
                entry: entry.clone(),
                outputs: detect_file(&entry.path, configs).map_err(|e| e.to_string()),
            })
            .collect()
    });

    let reports = configs
        .iter()
        .enumerate()
        .map(|(k, cfg)| {
            let scored: Vec<(&ManifestEntry, &PipelineOutput)> = clips
                .iter()
                .filter_map(|c| c.outputs.as_ref().ok().map(|o| (&c.entry, &o[k])))
                .collect();
            let decisions: Vec<(bool, ClipClass)> =
                scored.iter().map(|(e, o)| (o.decision.final_label, e.label)).collect();
            let points: Vec<(f64, bool)> = scored.iter().map(|(e, o)| (o.clip_score, e.label.is_speech())).collect();
            let roc = roc_sweep(&points, None).ok();
            let fpr_at_tpr = match &roc {
                Some(curve) => target_tprs
                    .iter()
                    .map(|&t| Ok((t, fpr_at_tpr(curve, t)?)))
                    .collect::<Result<Vec<_>>>()?,
                None => Vec::new(),
            };
            Ok(EvalReport {
                mode: cfg.mode,
                thresh: cfg.thresh,
                clips: scored.len(),
                per_class_accuracy: class_accuracy(&decisions),
                roc,
                fpr_at_tpr,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalRun { reports, clips })
}

/// Markdown accuracy table: one row per class, one column per report.
pub fn accuracy_table(dataset: &str, reports: &[EvalReport]) -> String {
    let mut out = String::from("| Dataset | Type |");
    for r in reports {
        let _ = write!(out, " {} |", r.mode.name());
    }
    out.push_str("\n|---|---|");
    out.push_str(&"---:|".repeat(reports.len()));
    out.push('\n');
    for (class, title) in TABLE_ROWS {
        let _ = write!(out, "| {dataset} | {title} |");
        for r in reports {
            match r.per_class_accuracy.get(&class) {
                Some(a) => {
                    let _ = write!(out, " {:.1}% |", 100.0 * a);
                }
                None => out.push_str(" n/a |"),
            }
        }
        out.push('\n');
    }
    out
}

pub fn roc_csv(curve: &RocCurve) -> String {
    let mut out = String::from("threshold,tpr,fpr\n");
    for p in &curve.points {
        let _ = writeln!(out, "{},{},{}", p.threshold, p.tpr, p.fpr);
    }
    out
}

/// Machine-readable summary of a run (per-clip outputs included).
pub fn report_json(run: &EvalRun, base: &Path) -> String {
    let rel = |p: &Path| p.strip_prefix(base).unwrap_or(p).display().to_string();
    let reports: Vec<_> = run
        .reports
        .iter()
        .map(|r| {
            let acc: BTreeMap<&str, f64> = r.per_class_accuracy.iter().map(|(c, a)| (c.name(), *a)).collect();
            let fpr: Vec<_> = r.fpr_at_tpr.iter().map(|(t, f)| json!({"target_tpr": t, "fpr": f})).collect();
            json!({
                "mode": r.mode.name(),
                "thresh": r.thresh,
                "clips": r.clips,
                "accuracy": acc,
                "auc": r.roc.as_ref().map(|c| c.auc),
                "fpr_at_tpr": fpr,
            })
        })
        .collect();
    let clips: Vec<_> = run
        .clips
        .iter()
        .map(|c| match &c.outputs {
            Ok(outs) => json!({
                "path": rel(&c.entry.path),
                "label": c.entry.label.name(),
                "results": outs.iter().map(|o| json!({
                    "mode": o.mode.name(),
                    "final": o.decision.final_label as u8,
                    "clip_score": o.clip_score,
                })).collect::<Vec<_>>(),
            }),
            Err(e) => json!({"path": rel(&c.entry.path), "label": c.entry.label.name(), "error": e}),
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&json!({"reports": reports, "clips": clips})).expect("JSON values serialize");
    s.push('\n');
    s
}

/// Writes `accuracy.md`, `accuracy_<mode>.md`, `roc_<mode>.csv` and `report.json` into `out`.
pub fn write_reports(run: &EvalRun, dataset: &str, out: &Path, base: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut files: Vec<(PathBuf, String)> = vec![(out.join("accuracy.md"), accuracy_table(dataset, &run.reports))];
    for r in &run.reports {
        let name = r.mode.name();
        files.push((out.join(format!("accuracy_{name}.md")), accuracy_table(dataset, std::slice::from_ref(r))));
        if let Some(curve) = &r.roc {
            files.push((out.join(format!("roc_{name}.csv")), roc_csv(curve)));
        }
    }
    files.push((out.join("report.json"), report_json(run, base)));
    for (path, text) in &files {
        std::fs::write(path, text).map_err(|e| Error::io(path, e))?;
    }
    Ok(files.into_iter().map(|(p, _)| p).collect())
}
