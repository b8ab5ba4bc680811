//! Command-line front end: `synth`, `detect`, `eval`, `roc`.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Arg, ArgMatches, Args, Command, FromArgMatches, Parser, Subcommand};
use nrvad_core::pipeline::{Mode, PipelineOutput};
use nrvad_core::synth::{CorpusConfig, DEFAULT_SNRS_DB};
use serde_json::json;

use crate::config::{Settings, KEYS};
use crate::corpus::generate_corpus;
use crate::error::{Error, Result};
use crate::manifest::Manifest;
use crate::runner::{detect_file, run_eval, write_reports, EvalRun};

#[derive(Debug, Parser)]
#[command(name = "nrvad", version, about = "Noise-robust voice activity detection")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Generate a labelled synthetic corpus with a manifest.
    Synth(SynthArgs),
    /// Label audio files (or score files) as speech / non-speech.
    Detect(DetectArgs),
    /// Evaluate modes on a manifest: accuracy tables, ROC CSVs, JSON report.
    Eval(EvalArgs),
    /// Print the FPR at a target TPR for each mode.
    Roc(RocArgs),
}

#[derive(Debug, clap::Args)]
pub struct SynthArgs {
    /// Total clips, split evenly over clean speech, noisy speech and non-speech.
    #[arg(long)]
    pub clips: usize,
    /// Comma-separated SNRs (dB) cycled over noisy-speech clips.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub snr: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub clip_seconds: Option<f64>,
    #[command(flatten)]
    pub jobs: Jobs,
}

#[derive(Debug, clap::Args)]
pub struct DetectArgs {
    /// WAV files (or score files with `--backend score-file`).
    pub inputs: Vec<PathBuf>,
    /// Also process every entry of this manifest.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Print per-segment scores and per-window votes.
    #[arg(long)]
    pub verbose: bool,
    /// One JSON object per input instead of tab-separated text.
    #[arg(long)]
    pub json_lines: bool,
    #[command(flatten)]
    pub settings: SettingsFlags,
    #[command(flatten)]
    pub jobs: Jobs,
}

#[derive(Debug, clap::Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "baseline,vad1,vad2")]
    pub modes: Vec<String>,
    /// Directory for reports.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "0.99")]
    pub target_tpr: Vec<f64>,
    #[command(flatten)]
    pub settings: SettingsFlags,
    #[command(flatten)]
    pub jobs: Jobs,
}

#[derive(Debug, clap::Args)]
pub struct RocArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "baseline,vad1,vad2")]
    pub modes: Vec<String>,
    #[arg(long, default_value_t = 0.99)]
    pub target_tpr: f64,
    /// Also write `roc_<mode>.csv` files here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub settings: SettingsFlags,
    #[command(flatten)]
    pub jobs: Jobs,
}

#[derive(Debug, clap::Args)]
pub struct Jobs {
    /// Worker threads (default: available processors). Output does not depend on it.
    #[arg(long)]
    pub jobs: Option<usize>,
}

impl Jobs {
    fn pool(&self) -> Result<rayon::ThreadPool> {
        if self.jobs == Some(0) {
            return Err(Error::Usage("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs.unwrap_or(0))
            .build()
            .map_err(|e| Error::Usage(format!("thread pool: {e}")))
    }
}

/// `--config`, `--print-config` and one `--<key>` flag per config key.
#[derive(Debug, Clone, Default)]
pub struct SettingsFlags {
    pub config: Option<PathBuf>,
    pub print_config: bool,
    pub overrides: Vec<(&'static str, String)>,
}

impl SettingsFlags {
    /// Defaults, then the config file, then flag overrides.
    pub fn resolve(&self) -> Result<Settings> {
        let mut s = Settings::default();
        if let Some(path) = &self.config {
            s.apply_file(path)?;
        }
        for (key, value) in &self.overrides {
            s.set(key, value).map_err(|e| match e {
                Error::Usage(m) => Error::Usage(format!("--{m}")),
                other => other,
            })?;
        }
        Ok(s)
    }
}

impl FromArgMatches for SettingsFlags {
    fn from_arg_matches(m: &ArgMatches) -> std::result::Result<Self, clap::Error> {
        let mut flags = SettingsFlags {
            config: m.get_one::<PathBuf>("config").cloned(),
            print_config: m.get_flag("print-config"),
            overrides: Vec::new(),
        };
        for (key, _) in KEYS {
            if let Some(v) = m.get_one::<String>(key) {
                flags.overrides.push((key, v.clone()));
            }
        }
        Ok(flags)
    }

    fn update_from_arg_matches(&mut self, m: &ArgMatches) -> std::result::Result<(), clap::Error> {
        *self = Self::from_arg_matches(m)?;
        Ok(())
    }
}

impl Args for SettingsFlags {
    fn augment_args(cmd: Command) -> Command {
        let cmd = cmd
            .arg(
                Arg::new("config")
                    .long("config")
                    .value_name("FILE")
                    .value_parser(clap::value_parser!(PathBuf))
                    .help("Read settings from a key = value file (flags take precedence)"),
            )
            .arg(
                Arg::new("print-config")
                    .long("print-config")
                    .action(clap::ArgAction::SetTrue)
                    .help("Print the effective settings as a config file and exit"),
            );
        KEYS.iter().fold(cmd, |cmd, (key, help)| {
            cmd.arg(Arg::new(*key).long(*key).value_name("VALUE").allow_hyphen_values(true).help(*help))
        })
    }

    fn augment_args_for_update(cmd: Command) -> Command {
        Self::augment_args(cmd)
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("nrvad: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Cmd::Synth(a) => cmd_synth(a),
        Cmd::Detect(a) => cmd_detect(a),
        Cmd::Eval(a) => cmd_eval(a),
        Cmd::Roc(a) => cmd_roc(a),
    }
}

fn print_config(settings: &Settings) -> ExitCode {
    print!("{}", settings.render());
    ExitCode::SUCCESS
}

fn status(failed: bool) -> ExitCode {
    if failed {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

pub fn cmd_synth(a: SynthArgs) -> Result<ExitCode> {
    if a.clips == 0 {
        return Err(Error::Usage("--clips must be at least 1".into()));
    }
    let mut cfg = CorpusConfig::with_total(a.clips);
    cfg.seed = a.seed;
    cfg.snrs_db = a.snr.unwrap_or_else(|| DEFAULT_SNRS_DB.to_vec());
    if let Some(s) = a.clip_seconds {
        cfg.clip_seconds = s;
    }
    let manifest = generate_corpus(&cfg, &a.out, &a.jobs.pool()?)?;
    println!("wrote {} clips and {}", manifest.len(), a.out.join(crate::corpus::MANIFEST_NAME).display());
    Ok(ExitCode::SUCCESS)
}

pub fn cmd_detect(a: DetectArgs) -> Result<ExitCode> {
    let settings = a.settings.resolve()?;
    if a.settings.print_config {
        return Ok(print_config(&settings));
    }
    let mode = settings.mode.ok_or_else(|| Error::Usage("--mode baseline|vad1|vad2 is required".into()))?;
    let cfg = settings.pipeline(mode)?;
    let mut inputs = a.inputs.clone();
    if let Some(m) = &a.manifest {
        inputs.extend(Manifest::load(m)?.entries.into_iter().map(|e| e.path));
    }
    if inputs.is_empty() {
        return Err(Error::Usage("no inputs given".into()));
    }
    let pool = a.jobs.pool()?;
    let results: Vec<Result<PipelineOutput>> = pool.install(|| {
        use rayon::prelude::*;
        inputs
            .par_iter()
            .map(|p| detect_file(p, std::slice::from_ref(&cfg)).map(|mut o| o.remove(0)))
            .collect()
    });

    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let mut failed = false;
    for (path, res) in inputs.iter().zip(results) {
        let line = match res {
            Ok(o) if a.json_lines => json_line(path, &o, a.verbose),
            Ok(o) => text_lines(path, &o, a.verbose),
            Err(e) => {
                failed = true;
                eprintln!("nrvad: {e}");
                if a.json_lines {
                    format!("{}\n", json!({"path": path.display().to_string(), "error": e.to_string()}))
                } else {
                    continue;
                }
            }
        };
        out.write_all(line.as_bytes()).map_err(|e| Error::io("<stdout>", e))?;
    }
    Ok(status(failed))
}

fn text_lines(path: &Path, o: &PipelineOutput, verbose: bool) -> String {
    let mut s = format!("{}\t{}\t{}\n", path.display(), o.mode.name(), u8::from(o.decision.final_label));
    if verbose {
        let join = |v: Vec<String>| v.join(" ");
        s += &format!("  clip_score\t{}\n", o.clip_score);
        s += &format!("  segment_scores\t{}\n", join(o.segments.iter().map(|g| g.value.to_string()).collect()));
        s += &format!("  segment_labels\t{}\n", join(o.decision.per_segment.iter().map(|&b| u8::from(b).to_string()).collect()));
        s += &format!("  window_votes\t{}\n", join(o.decision.per_window.iter().map(|&b| u8::from(b).to_string()).collect()));
    }
    s
}

fn json_line(path: &Path, o: &PipelineOutput, verbose: bool) -> String {
    let mut v = json!({
        "path": path.display().to_string(),
        "mode": o.mode.name(),
        "label": u8::from(o.decision.final_label),
        "clip_score": o.clip_score,
    });
    if verbose {
        v["segment_scores"] = json!(o.segments.iter().map(|g| g.value).collect::<Vec<_>>());
        v["segment_labels"] = json!(o.decision.per_segment.iter().map(|&b| u8::from(b)).collect::<Vec<_>>());
        v["window_votes"] = json!(o.decision.per_window.iter().map(|&b| u8::from(b)).collect::<Vec<_>>());
    }
    format!("{v}\n")
}

fn parse_modes(names: &[String]) -> Result<Vec<Mode>> {
    let modes = names
        .iter()
        .map(|n| Mode::from_name(n.trim()).ok_or_else(|| Error::Usage(format!("unknown mode {n:?}"))))
        .collect::<Result<Vec<_>>>()?;
    if modes.is_empty() {
        return Err(Error::Usage("no modes given".into()));
    }
    Ok(modes)
}

fn evaluate(manifest_path: &Path, modes: &[String], settings: &Settings, tprs: &[f64], jobs: &Jobs) -> Result<(Manifest, EvalRun)> {
    let configs = parse_modes(modes)?
        .into_iter()
        .map(|m| settings.pipeline(m))
        .collect::<Result<Vec<_>>>()?;
    let manifest = Manifest::load(manifest_path)?;
    let run = run_eval(&manifest, &configs, tprs, &jobs.pool()?)?;
    for (path, e) in run.failures() {
        eprintln!("nrvad: {}: {e}", path.display());
    }
    Ok((manifest, run))
}

fn dataset_name(manifest: &Path) -> String {
    let dir = manifest.parent().and_then(|p| p.file_name());
    dir.or(manifest.file_stem()).map_or_else(|| "corpus".into(), |s| s.to_string_lossy().into_owned())
}

pub fn cmd_eval(a: EvalArgs) -> Result<ExitCode> {
    let settings = a.settings.resolve()?;
    if a.settings.print_config {
        return Ok(print_config(&settings));
    }
    let (_, run) = evaluate(&a.manifest, &a.modes, &settings, &a.target_tpr, &a.jobs)?;
    let base = a.manifest.parent().unwrap_or(Path::new(""));
    let written = write_reports(&run, &dataset_name(&a.manifest), &a.out, base)?;
    print!("{}", crate::runner::accuracy_table(&dataset_name(&a.manifest), &run.reports));
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(status(run.has_failures()))
}

pub fn cmd_roc(a: RocArgs) -> Result<ExitCode> {
    let settings = a.settings.resolve()?;
    if a.settings.print_config {
        return Ok(print_config(&settings));
    }
    if !(0.0..=1.0).contains(&a.target_tpr) {
        return Err(Error::Usage(format!("--target-tpr {} outside [0, 1]", a.target_tpr)));
    }
    let (_, run) = evaluate(&a.manifest, &a.modes, &settings, &[a.target_tpr], &a.jobs)?;
    println!("mode\tauc\tfpr_at_tpr_{}", a.target_tpr);
    for r in &run.reports {
        match (&r.roc, r.fpr_at_tpr.first()) {
            (Some(c), Some((_, f))) => println!("{}\t{:.4}\t{:.4}", r.mode.name(), c.auc, f),
            _ => println!("{}\tn/a\tn/a", r.mode.name()),
        }
    }
    if let Some(out) = &a.out {
        std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
        for r in &run.reports {
            if let Some(c) = &r.roc {
                let path = out.join(format!("roc_{}.csv", r.mode.name()));
                std::fs::write(&path, crate::runner::roc_csv(c)).map_err(|e| Error::io(&path, e))?;
            }
        }
    }
    Ok(status(run.has_failures()))
}
