use std::collections::BTreeMap;

use nrvad::manifest::{Manifest, ManifestEntry};
use nrvad::runner::{accuracy_table, report_json, roc_csv, run_eval, EvalReport, EvalRun};
use nrvad::scorefile::write_scores;
use nrvad_core::eval::{class_accuracy, roc_sweep};
use nrvad_core::pipeline::ScorerBackend;
use nrvad_core::scorer::FrameScoreMatrix;
use nrvad_core::synth::ClipClass;
use nrvad_core::{Mode, PipelineConfig};

fn pool() -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(2).build().unwrap()
}

/// `correct` of 1000 clips of `class` decided correctly.
fn scripted(class: ClipClass, correct: usize) -> Vec<(bool, ClipClass)> {
    (0..1000).map(|i| ((i < correct) == class.is_speech(), class)).collect()
}

#[test]
fn table_echoes_scripted_msnsd_rows() {
    // Per-mode correct counts for (non-speech, clean, noisy) out of 1000 each.
    let rows = [(Mode::Baseline, [991, 587, 159]), (Mode::Vad1, [979, 974, 664]), (Mode::Vad2, [877, 987, 899])];
    let reports: Vec<EvalReport> = rows
        .iter()
        .map(|&(mode, [non, clean, noisy])| {
            let mut d = scripted(ClipClass::NonSpeech, non);
            d.extend(scripted(ClipClass::CleanSpeech, clean));
            d.extend(scripted(ClipClass::NoisySpeech, noisy));
            EvalReport {
                mode,
                thresh: 0.0,
                clips: d.len(),
                per_class_accuracy: class_accuracy(&d),
                roc: None,
                fpr_at_tpr: vec![],
            }
        })
        .collect();
    assert_eq!(
        accuracy_table("MS-SNSD", &reports),
        "| Dataset | Type | baseline | vad1 | vad2 |\n\
         |---|---|---:|---:|---:|\n\
         | MS-SNSD | Non-Speech | 99.1% | 97.9% | 87.7% |\n\
         | MS-SNSD | Clean Speech | 58.7% | 97.4% | 98.7% |\n\
         | MS-SNSD | Noisy Speech | 15.9% | 66.4% | 89.9% |\n"
    );
}

#[test]
fn missing_classes_render_as_na() {
    let report = EvalReport {
        mode: Mode::Vad1,
        thresh: 1.0,
        clips: 2,
        per_class_accuracy: BTreeMap::from([(ClipClass::NonSpeech, 0.5)]),
        roc: None,
        fpr_at_tpr: vec![],
    };
    let table = accuracy_table("X", &[report]);
    assert!(table.contains("| X | Non-Speech | 50.0% |\n"));
    assert!(table.contains("| X | Clean Speech | n/a |\n"));
}

#[test]
fn roc_csv_lists_every_point() {
    let curve = roc_sweep(&[(2.0, true), (1.0, false)], None).unwrap();
    assert_eq!(roc_csv(&curve), "threshold,tpr,fpr\ninf,0,0\n2,1,0\n1,1,1\n-inf,1,1\n");
}

/// Score files with `level` in the middle 60% of frames, one per clip.
fn score_corpus(dir: &std::path::Path, clips: &[(f64, ClipClass)]) -> Manifest {
    let entries = clips
        .iter()
        .enumerate()
        .map(|(i, &(level, label))| {
            let rows = (0..100).map(|d| vec![if (20..80).contains(&d) { level } else { 0.0 }]).collect();
            let path = dir.join(format!("{i}.txt"));
            write_scores(&FrameScoreMatrix::new(rows, 10.0).unwrap(), &path).unwrap();
            ManifestEntry { path, label, snr_db: None, duration_s: 1.0 }
        })
        .collect();
    Manifest { entries }
}

#[test]
fn eval_over_score_files() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = score_corpus(
        dir.path(),
        &[(5.0, ClipClass::CleanSpeech), (3.0, ClipClass::NoisySpeech), (1.0, ClipClass::NonSpeech), (4.0, ClipClass::NonSpeech)],
    );
    let configs: Vec<PipelineConfig> = [Mode::Baseline, Mode::Vad1]
        .map(|m| PipelineConfig { thresh: 2.5, backend: ScorerBackend::ScoreFile, ..PipelineConfig::for_mode(m) })
        .to_vec();
    let run = run_eval(&manifest, &configs, &[0.5, 1.0], &pool()).unwrap();
    assert!(!run.has_failures());

    // Baseline sees 60% of the level; vad1 sees the full level in the middle segments.
    let base = &run.reports[0];
    assert_eq!(base.per_class_accuracy[&ClipClass::CleanSpeech], 1.0);
    assert_eq!(base.per_class_accuracy[&ClipClass::NoisySpeech], 0.0);
    assert_eq!(base.per_class_accuracy[&ClipClass::NonSpeech], 1.0);
    let vad1 = &run.reports[1];
    assert_eq!(vad1.per_class_accuracy[&ClipClass::NoisySpeech], 1.0);
    assert_eq!(vad1.per_class_accuracy[&ClipClass::NonSpeech], 0.5);

    // Both statistics rank the clips identically: speech 5, 3 against non-speech 1, 4.
    for r in &run.reports {
        assert_eq!(r.roc.as_ref().unwrap().auc, 0.75);
        assert_eq!(r.fpr_at_tpr, vec![(0.5, 0.0), (1.0, 0.5)]);
    }

    let json: serde_json::Value = serde_json::from_str(&report_json(&run, dir.path())).unwrap();
    assert_eq!(json["clips"][0]["path"], "0.txt");
    assert_eq!(json["clips"][1]["results"][1]["final"], 1);
    assert_eq!(json["reports"][1]["accuracy"]["non_speech"], 0.5);
}

#[test]
fn eval_records_unreadable_entries() {
    let dir = tempfile::tempdir().unwrap();
    let mut manifest = score_corpus(dir.path(), &[(5.0, ClipClass::CleanSpeech), (1.0, ClipClass::NonSpeech)]);
    manifest.entries.push(ManifestEntry {
        path: dir.path().join("gone.txt"),
        label: ClipClass::NonSpeech,
        snr_db: None,
        duration_s: 1.0,
    });
    let cfg = PipelineConfig { backend: ScorerBackend::ScoreFile, ..PipelineConfig::for_mode(Mode::Vad1) };
    let run: EvalRun = run_eval(&manifest, &[cfg], &[], &pool()).unwrap();
    assert_eq!(run.reports[0].clips, 2);
    let failures: Vec<_> = run.failures().collect();
    assert_eq!(failures.len(), 1);
    assert!(failures[0].0.ends_with("gone.txt"));
}

#[test]
fn eval_rejects_mixed_backends_and_bad_targets() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = score_corpus(dir.path(), &[(5.0, ClipClass::CleanSpeech)]);
    let files = PipelineConfig { backend: ScorerBackend::ScoreFile, ..PipelineConfig::for_mode(Mode::Vad1) };
    let audio = PipelineConfig::for_mode(Mode::Vad1);
    assert!(matches!(run_eval(&manifest, &[files.clone(), audio], &[], &pool()), Err(nrvad::Error::Usage(_))));
    assert!(matches!(run_eval(&manifest, std::slice::from_ref(&files), &[1.5], &pool()), Err(nrvad::Error::Usage(_))));
    assert!(matches!(run_eval(&manifest, &[], &[], &pool()), Err(nrvad::Error::Usage(_))));
    assert!(matches!(run_eval(&Manifest::default(), &[files], &[], &pool()), Err(nrvad::Error::Usage(_))));
}
