//! Command-line front end. [`run`] returns the process exit code:
//! 0 ok, 1 other failure, 2 config error, 3 empty or invalid inputs,
//! 4 provider hard failure in live mode.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use walkdir::WalkDir;

use crate::benchmark::{video_outputs, BenchmarkError, BenchmarkRunner, DurationClass, RunManifest, RunRecord};
use crate::config::{ConfigError, HarnessConfig};
use crate::knowledge_graph::{LayoutParams, KEYFRAMES};
use crate::media::{Container, MediaAsset, MediaTool};
use crate::parsing::{KeyframeParser, ParsedVideoOutput};
use crate::providers::{Mode, ProviderError};
use crate::report::{write_graphs, OutputsFile, ReportBundle, ReportError};
use crate::scoring::{aggregate, completeness, load_annotations, ScoringError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_PROVIDER: i32 = 4;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Dataset(_) => Self::new(EXIT_INPUT, e.to_string()),
            _ => Self::new(EXIT_CONFIG, e.to_string()),
        }
    }
}

impl From<ReportError> for CliError {
    fn from(e: ReportError) -> Self {
        match e {
            ReportError::Io { .. } => Self::new(EXIT_OTHER, e.to_string()),
            _ => Self::new(EXIT_INPUT, e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "vidbench", version, about = "Long-video VLM evaluation harness")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Probe media files and write an inventory.
    Ingest(IngestArgs),
    /// Fill the transcripts directory through the configured ASR provider.
    Transcribe(RunArgs),
    /// Run the benchmark, then write tables and graphs.
    Evaluate(RunArgs),
    /// Build comparison graphs from a model outputs file.
    Graph(GraphArgs),
    /// Score an existing manifest.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Files or directories to scan.
    #[arg(required = true)]
    pub paths: Vec<PathBuf>,
    /// Inventory file to write.
    #[arg(long, default_value = "inventory.json")]
    pub out: PathBuf,
    /// Take probe commands from this config.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ModeFlags {
    #[arg(long, conflicts_with = "live")]
    pub replay: bool,
    #[arg(long)]
    pub live: bool,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[command(flatten)]
    pub mode: ModeFlags,
    /// Comma-separated condition labels or indices.
    #[arg(long, value_delimiter = ',')]
    pub conditions: Vec<String>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub tolerance_s: Option<u32>,
    /// Layout seed for graph exports.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    /// `{"videos": [{"video_id", "outputs": [{"model", "raw_text"}]}]}`
    pub outputs: PathBuf,
    /// Layout parameters and centre node come from here when given.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    pub manifest: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub annotations: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub tolerance_s: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

pub fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Ingest(a) => ingest(&a),
        Command::Transcribe(a) => transcribe(&a),
        Command::Evaluate(a) => evaluate(&a),
        Command::Graph(a) => graph(&a),
        Command::Report(a) => report(&a),
    }
}

/// `mode: None` loads without validation.
fn load_config(path: &Path, mode: Option<&ModeFlags>) -> Result<HarnessConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::new(EXIT_CONFIG, format!("cannot read {}: {e}", path.display())))?;
    // The mode flag changes what has to exist (replay needs cassettes), so
    // it is applied before validation.
    let mut value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::new(EXIT_CONFIG, format!("{}: {e}", path.display())))?;
    if let (Some(flags), Some(obj)) = (mode, value.as_object_mut()) {
        if flags.live {
            obj.insert("mode".into(), "live".into());
        } else if flags.replay {
            obj.insert("mode".into(), "replay".into());
        }
    }
    let base = path.parent().unwrap_or(Path::new("."));
    let text = value.to_string();
    let parsed = match mode {
        Some(_) => HarnessConfig::from_json(&text, base),
        None => HarnessConfig::from_json_unchecked(&text, base),
    };
    parsed.map_err(|e| match e {
        ConfigError::Parse { detail, .. } => CliError::new(EXIT_CONFIG, format!("{}: {detail}", path.display())),
        other => other.into(),
    })
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)
            .map_err(|e| CliError::new(EXIT_OTHER, format!("cannot create {}: {e}", parent.display())))?;
    }
    let mut body = serde_json::to_string_pretty(value).expect("value serializes");
    body.push('\n');
    std::fs::write(path, body).map_err(|e| CliError::new(EXIT_OTHER, format!("cannot write {}: {e}", path.display())))
}

/// Duration bucket of an asset, on the benchmark's short/medium/long split
/// (up to 2 min, up to 15 min, longer).
pub fn duration_bucket(duration_s: f64) -> DurationClass {
    if duration_s <= 120.0 {
        DurationClass::Short
    } else if duration_s <= 900.0 {
        DurationClass::Medium
    } else {
        DurationClass::Long
    }
}

/// Walks `paths` and probes every file with a supported extension.
/// Returns the assets and the number of files that failed to probe.
pub fn scan(paths: &[PathBuf], tool: &MediaTool) -> (Vec<MediaAsset>, usize) {
    let mut assets = Vec::new();
    let mut failed = 0;
    for root in paths {
        let mut files: Vec<PathBuf> = WalkDir::new(root)
            .into_iter()
            .filter_map(|e| match e {
                Ok(e) => Some(e),
                Err(err) => {
                    warn!("{err}");
                    None
                }
            })
            .filter(|e| e.file_type().is_file())
            .map(|e| e.into_path())
            .filter(|p| Container::from_path(p).is_some())
            .collect();
        files.sort();
        for f in files {
            match tool.probe(&f) {
                Ok(a) => assets.push(a),
                Err(e) => {
                    warn!("{e}");
                    failed += 1;
                }
            }
        }
    }
    (assets, failed)
}

fn relative_to(base: &Path, p: &Path) -> PathBuf {
    let (Ok(b), Ok(c)) = (base.canonicalize(), p.canonicalize()) else {
        return p.to_path_buf();
    };
    c.strip_prefix(&b).map(Path::to_path_buf).unwrap_or(c)
}

fn ingest(a: &IngestArgs) -> Result<(), CliError> {
    let tool = match &a.config {
        Some(c) => load_config(c, None)?.media_tool().unwrap_or_else(MediaTool::ffmpeg),
        None => MediaTool::ffmpeg(),
    };
    let (mut assets, failed) = scan(&a.paths, &tool);
    if assets.is_empty() {
        return Err(CliError::new(
            EXIT_INPUT,
            format!("0 usable assets ({failed} failed to probe)"),
        ));
    }
    let mut by_format: BTreeMap<String, usize> = BTreeMap::new();
    let mut by_duration: BTreeMap<DurationClass, usize> = BTreeMap::new();
    for asset in &assets {
        *by_format.entry(asset.container.to_string()).or_default() += 1;
        *by_duration.entry(duration_bucket(asset.duration_s)).or_default() += 1;
    }
    let base = a
        .out
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    std::fs::create_dir_all(base)
        .map_err(|e| CliError::new(EXIT_OTHER, format!("cannot create {}: {e}", base.display())))?;
    for asset in &mut assets {
        asset.path = relative_to(base, &asset.path);
    }
    write_json(&a.out, &assets)?;
    println!(
        "{} usable assets ({failed} failed to probe) -> {}",
        assets.len(),
        a.out.display()
    );
    println!("{:<12} {:>6}", "format", "count");
    for (k, v) in &by_format {
        println!("{k:<12} {v:>6}");
    }
    println!("{:<12} {:>6}", "duration", "count");
    for (k, v) in &by_duration {
        println!("{k:<12} {v:>6}");
    }
    Ok(())
}

fn transcribe(a: &RunArgs) -> Result<(), CliError> {
    let cfg = load_config(&a.config, Some(&a.mode))?;
    let asr = cfg
        .asr_provider
        .clone()
        .ok_or_else(|| CliError::new(EXIT_CONFIG, "asr_provider is not configured"))?;
    let dir = cfg
        .transcripts_dir
        .clone()
        .ok_or_else(|| CliError::new(EXIT_CONFIG, "transcripts_dir is not configured"))?;
    let providers = cfg.providers()?;
    let assets = cfg.assets()?;
    if assets.is_empty() {
        return Err(CliError::new(EXIT_INPUT, "inventory is empty"));
    }
    let (mut written, mut skipped) = (0, 0);
    for asset in assets.iter().filter(|a| a.has_audio()) {
        match providers.transcribe(asset, &asr) {
            Ok(t) => {
                write_json(&dir.join(format!("{}.json", asset.key())), &t)?;
                written += 1;
            }
            Err(e @ ProviderError::ProviderUnavailable { .. }) if cfg.mode == Mode::Live => {
                return Err(CliError::new(EXIT_PROVIDER, e.to_string()));
            }
            Err(e) => {
                warn!("{}: {e}", asset.path.display());
                skipped += 1;
            }
        }
    }
    println!("{written} transcripts written, {skipped} skipped -> {}", dir.display());
    Ok(())
}

fn layout_params(cfg: Option<&HarnessConfig>, seed: Option<u64>) -> LayoutParams {
    let mut p = cfg.map(|c| c.layout.clone()).unwrap_or_default();
    if let Some(s) = seed {
        p.seed = s;
    }
    p
}

fn graph_inputs(records: &[RunRecord]) -> indexmap::IndexMap<String, Vec<(String, ParsedVideoOutput)>> {
    video_outputs(records)
        .into_iter()
        .map(|(video, outs)| (video, outs.into_iter().collect()))
        .collect()
}

/// Scores records and writes every artifact into `out_dir`.
fn emit_report(
    records: &[RunRecord],
    annotations: Option<&crate::scoring::Annotations>,
    tolerance_s: u32,
    layout: &LayoutParams,
    center: &str,
    manifest: &str,
    out_dir: &Path,
) -> Result<ReportBundle, CliError> {
    let rows = completeness(records);
    if rows.is_empty() {
        return Err(CliError::new(EXIT_INPUT, "manifest holds no multiple-choice records"));
    }
    let score = match aggregate(records, annotations, tolerance_s) {
        Ok(r) => Some(r),
        Err(ScoringError::MissingCondition(m)) => {
            warn!("with/without tables skipped: {m}");
            None
        }
        Err(e) => return Err(CliError::new(EXIT_INPUT, e.to_string())),
    };
    let mut bundle = ReportBundle::new(score, rows);
    bundle.manifests.push(manifest.to_string());
    bundle.write_tables(out_dir)?;
    let videos = graph_inputs(records);
    if !videos.is_empty() {
        let (metrics, files) = write_graphs(&videos, layout, center, out_dir)?;
        bundle.graphs = metrics;
        bundle.files.extend(files);
    }
    bundle.write_json(out_dir)?;
    Ok(bundle)
}

fn evaluate(a: &RunArgs) -> Result<(), CliError> {
    let mut cfg = load_config(&a.config, Some(&a.mode))?;
    cfg.select_conditions(&a.conditions)?;
    if let Some(d) = &a.out_dir {
        cfg.out_dir = d.clone();
    }
    let tolerance_s = a.tolerance_s.unwrap_or(cfg.tolerance_s);
    let items = cfg.items()?;
    if items.is_empty() {
        return Err(CliError::new(EXIT_INPUT, "dataset is empty"));
    }
    let assets = cfg.assets()?;
    let annotations = cfg.annotations()?;
    let providers = cfg.providers()?;
    let tool = cfg.media_tool();
    let mut runner = BenchmarkRunner::new(&providers, &items, assets, cfg.run_settings());
    if let Some(t) = &tool {
        runner = runner.with_media_tool(t);
    }
    let manifest_path = cfg.out_dir.join("manifest.jsonl");
    std::fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| CliError::new(EXIT_OTHER, format!("cannot create {}: {e}", cfg.out_dir.display())))?;
    let summary = runner.run(&manifest_path).map_err(|e| match e {
        BenchmarkError::ManifestMismatch(_) | BenchmarkError::NoConditions => CliError::new(EXIT_CONFIG, e.to_string()),
        BenchmarkError::Dataset(_) => CliError::new(EXIT_INPUT, e.to_string()),
        _ => CliError::new(EXIT_OTHER, e.to_string()),
    })?;
    info!(
        "{} records ({} resumed, {} executed)",
        summary.manifest.records().len(),
        summary.resumed,
        summary.executed
    );
    if cfg.mode == Mode::Live && summary.hard_failures > 0 {
        return Err(CliError::new(
            EXIT_PROVIDER,
            format!("{} requests hit unavailable providers", summary.hard_failures),
        ));
    }
    let bundle = emit_report(
        summary.manifest.records(),
        annotations.as_ref(),
        tolerance_s,
        &layout_params(Some(&cfg), a.seed),
        &cfg.graph_center,
        "manifest.jsonl",
        &cfg.out_dir,
    )?;
    println!("{} files written to {}", bundle.files.len(), cfg.out_dir.display());
    Ok(())
}

fn graph(a: &GraphArgs) -> Result<(), CliError> {
    let cfg = a.config.as_deref().map(|c| load_config(c, None)).transpose()?;
    let text = std::fs::read_to_string(&a.outputs)
        .map_err(|e| CliError::new(EXIT_INPUT, format!("cannot read {}: {e}", a.outputs.display())))?;
    let videos = OutputsFile::parse(&text)?.parsed(&KeyframeParser::default());
    let center = cfg.as_ref().map_or(KEYFRAMES.to_string(), |c| c.graph_center.clone());
    let (metrics, files) = write_graphs(&videos, &layout_params(cfg.as_ref(), a.seed), &center, &a.out_dir)?;
    for (video, m) in &metrics {
        println!("{video}: {} nodes, {} edges", m.node_count, m.edge_count);
    }
    println!("{} files written to {}", files.len(), a.out_dir.display());
    Ok(())
}

fn report(a: &ReportArgs) -> Result<(), CliError> {
    let cfg = a.config.as_deref().map(|c| load_config(c, None)).transpose()?;
    let manifest = RunManifest::load(&a.manifest).map_err(|e| CliError::new(EXIT_INPUT, e.to_string()))?;
    let annotations = match (&a.annotations, &cfg) {
        (Some(p), _) => Some(load_annotations(p).map_err(|e| CliError::new(EXIT_INPUT, e.to_string()))?),
        (None, Some(c)) => c.annotations()?,
        (None, None) => None,
    };
    let tolerance_s = a.tolerance_s.or(cfg.as_ref().map(|c| c.tolerance_s)).unwrap_or(2);
    let center = cfg.as_ref().map_or(KEYFRAMES.to_string(), |c| c.graph_center.clone());
    let name = a
        .manifest
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let bundle = emit_report(
        manifest.records(),
        annotations.as_ref(),
        tolerance_s,
        &layout_params(cfg.as_ref(), a.seed),
        &center,
        &name,
        &a.out_dir,
    )?;
    println!("{} files written to {}", bundle.files.len(), a.out_dir.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn buckets() {
        assert_eq!(duration_bucket(90.0), DurationClass::Short);
        assert_eq!(duration_bucket(600.0), DurationClass::Medium);
        assert_eq!(duration_bucket(2400.0), DurationClass::Long);
    }

    #[test]
    fn usage_errors_are_config_errors() {
        assert_eq!(run(["vidbench", "evaluate"]), EXIT_CONFIG);
        assert_eq!(
            run(["vidbench", "evaluate", "--config", "/nonexistent/cfg.json"]),
            EXIT_CONFIG
        );
        assert_eq!(run(["vidbench", "--help"]), EXIT_OK);
    }

    #[test]
    fn empty_ingest() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("notes.pdf"), "x").unwrap();
        let out = dir.path().join("inv.json");
        let code = run([
            "vidbench".into(),
            "ingest".into(),
            dir.path().as_os_str().to_owned(),
            "--out".into(),
            out.as_os_str().to_owned(),
        ]);
        assert_eq!(code, EXIT_INPUT);
        assert!(!out.exists());
    }
}
