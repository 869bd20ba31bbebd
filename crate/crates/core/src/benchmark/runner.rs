use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use indexmap::IndexMap;
use rayon::prelude::*;
use serde::Serialize;

use super::dataset::{build_question_prompt, BenchmarkItem, DurationClass};
use super::record::{
    classify, condition_key, Journal, ManifestError, ManifestHeader, Parsed, RecordError, RecordErrorKind, RecordKey,
    RequestKind, RunManifest, RunRecord,
};
use super::BenchmarkError;
use crate::media::{self, MediaAsset, MediaTool};
use crate::parsing::KeyframeParser;
use crate::providers::{ConditionTag, Mode, ModelResponse, ProviderError, Providers, ResponseStatus, Transcript};
use crate::templates::{self, PromptTemplates};

#[derive(Debug, Clone)]
pub struct RunSettings {
    /// Dataset path as written into the manifest header.
    pub dataset_path: String,
    pub conditions: Vec<ConditionTag>,
    pub templates: PromptTemplates,
    pub frames_dir: PathBuf,
    pub frame_ext: String,
    /// Pre-computed transcripts, one `<media key>.json` per asset.
    pub transcripts_dir: Option<PathBuf>,
    pub asr_provider: Option<String>,
    pub refine_provider: Option<String>,
    /// Also request a summary + keyframes output per (video, condition).
    pub summaries: bool,
    pub workers: usize,
    pub parser: KeyframeParser,
}

impl RunSettings {
    pub fn new(dataset_path: impl Into<String>, conditions: Vec<ConditionTag>, frames_dir: impl Into<PathBuf>) -> Self {
        Self {
            dataset_path: dataset_path.into(),
            conditions,
            templates: PromptTemplates::default(),
            frames_dir: frames_dir.into(),
            frame_ext: "jpg".into(),
            transcripts_dir: None,
            asr_provider: None,
            refine_provider: None,
            summaries: false,
            workers: 4,
            parser: KeyframeParser::default(),
        }
    }
}

#[derive(Debug)]
pub struct RunSummary {
    pub manifest: RunManifest,
    /// Records recovered from an interrupted run's journal.
    pub resumed: usize,
    pub executed: usize,
    /// Records whose provider could not be reached at all.
    pub hard_failures: usize,
}

#[derive(Serialize)]
struct TimingLine<'a> {
    condition: String,
    request_kind: RequestKind,
    item_ref: &'a str,
    wall_ms: u64,
}

enum Task<'a> {
    Mcq(&'a BenchmarkItem),
    Summary {
        video_key: &'a str,
        duration_class: DurationClass,
    },
}

impl Task<'_> {
    fn key(&self, condition: &ConditionTag) -> RecordKey {
        match self {
            Task::Mcq(item) => RecordKey::new(condition, RequestKind::Mcq, &item.question_id),
            Task::Summary { video_key, .. } => RecordKey::new(condition, RequestKind::SummaryKeyframes, video_key),
        }
    }
}

fn record_error(kind: RecordErrorKind, message: impl Into<String>) -> RecordError {
    RecordError {
        kind,
        message: message.into(),
    }
}

fn provider_error(e: ProviderError) -> RecordError {
    let kind = match &e {
        ProviderError::ProviderUnavailable { .. } => RecordErrorKind::ProviderUnavailable,
        ProviderError::ReplayMiss { .. } => RecordErrorKind::ReplayMiss,
        ProviderError::MalformedProviderOutput { .. } | ProviderError::Store(_) => RecordErrorKind::Malformed,
        ProviderError::InvalidRequest(_) | ProviderError::Template(_) => RecordErrorKind::Request,
        ProviderError::NoAudio(_) | ProviderError::TranscriptionFailed { .. } => RecordErrorKind::Transcript,
        ProviderError::Io { .. } => RecordErrorKind::Media,
    };
    record_error(kind, e.to_string())
}

/// Runs every (item x condition) pair through the providers and persists
/// the resulting records.
pub struct BenchmarkRunner<'a> {
    providers: &'a Providers,
    media: Option<&'a MediaTool>,
    items: &'a [BenchmarkItem],
    inventory: IndexMap<String, MediaAsset>,
    settings: RunSettings,
    transcripts: Mutex<HashMap<String, Result<Transcript, RecordError>>>,
}

impl<'a> BenchmarkRunner<'a> {
    pub fn new(
        providers: &'a Providers,
        items: &'a [BenchmarkItem],
        inventory: Vec<MediaAsset>,
        settings: RunSettings,
    ) -> Self {
        Self {
            providers,
            media: None,
            items,
            inventory: inventory.into_iter().map(|a| (a.key(), a)).collect(),
            settings,
            transcripts: Mutex::new(HashMap::new()),
        }
    }

    /// Frames missing from `frames_dir` are extracted with this tool.
    pub fn with_media_tool(mut self, tool: &'a MediaTool) -> Self {
        self.media = Some(tool);
        self
    }

    pub fn header(&self) -> ManifestHeader {
        let mut providers: Vec<String> = self.settings.conditions.iter().map(|c| c.model_name.clone()).collect();
        providers.extend(self.settings.asr_provider.clone());
        providers.extend(self.settings.refine_provider.clone());
        providers.sort();
        providers.dedup();
        ManifestHeader {
            dataset_path: self.settings.dataset_path.clone(),
            conditions: self.settings.conditions.clone(),
            providers,
            started_at: match self.providers.mode() {
                Mode::Live => SystemTime::now().duration_since(UNIX_EPOCH).ok().map(|d| d.as_secs()),
                Mode::Replay => None,
            },
            completed: false,
        }
    }

    fn tasks(&self) -> Vec<Task<'_>> {
        let mut tasks: Vec<Task<'_>> = self.items.iter().map(Task::Mcq).collect();
        if self.settings.summaries {
            let mut seen = std::collections::HashSet::new();
            for item in self.items {
                if seen.insert(item.video_key.as_str()) {
                    tasks.push(Task::Summary {
                        video_key: &item.video_key,
                        duration_class: item.duration_class,
                    });
                }
            }
        }
        tasks
    }

    /// Runs to completion, resuming from `<manifest>.partial` if an earlier
    /// run was interrupted. A completed manifest is returned unchanged.
    pub fn run(&self, manifest_path: &Path) -> Result<RunSummary, BenchmarkError> {
        if self.settings.conditions.is_empty() {
            return Err(BenchmarkError::NoConditions);
        }
        if manifest_path.exists() {
            let manifest = RunManifest::load(manifest_path)?;
            if manifest.is_completed() {
                let want: Vec<String> = self.settings.conditions.iter().map(condition_key).collect();
                let have: Vec<String> = manifest.header.conditions.iter().map(condition_key).collect();
                if want != have {
                    return Err(BenchmarkError::ManifestMismatch(manifest_path.to_path_buf()));
                }
                return Ok(RunSummary {
                    manifest,
                    resumed: 0,
                    executed: 0,
                    hard_failures: 0,
                });
            }
        }

        let journal_path = sidecar(manifest_path, "partial");
        let mut header = self.header();
        let mut done: Vec<RunRecord> = Vec::new();
        if journal_path.exists() {
            let previous = load_journal(&journal_path)?;
            header = previous.header.clone();
            done = previous.records().to_vec();
        }
        if let Some(parent) = manifest_path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).map_err(|e| BenchmarkError::Io(parent.to_path_buf(), e))?;
        }
        let resumed = done.len();
        let journal = Mutex::new(Journal::open(&journal_path, &header)?);
        let timings_path = sidecar(manifest_path, "timings");
        let timings = Mutex::new(
            fs::OpenOptions::new()
                .create(true)
                .append(true)
                .open(&timings_path)
                .map_err(|e| BenchmarkError::Io(timings_path.clone(), e))?,
        );
        let done_keys: std::collections::HashSet<RecordKey> = done.iter().map(RunRecord::key).collect();

        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.settings.workers.max(1))
            .build()
            .map_err(|e| BenchmarkError::Pool(e.to_string()))?;
        let tasks = self.tasks();
        let fresh = Mutex::new(Vec::new());
        let failure: Mutex<Option<ManifestError>> = Mutex::new(None);
        for condition in &self.settings.conditions {
            let pending: Vec<&Task<'_>> = tasks
                .iter()
                .filter(|t| !done_keys.contains(&t.key(condition)))
                .collect();
            pool.install(|| {
                pending.par_iter().for_each(|task| {
                    let started = Instant::now();
                    let record = self.run_task(task, condition);
                    let wall_ms = started.elapsed().as_millis() as u64;
                    if let Err(e) = journal.lock().expect("journal lock poisoned").append(&record) {
                        failure.lock().expect("failure lock poisoned").get_or_insert(e);
                    }
                    let line = TimingLine {
                        condition: condition.label(),
                        request_kind: record.request_kind,
                        item_ref: &record.item_ref,
                        wall_ms,
                    };
                    if let Ok(mut s) = serde_json::to_string(&line) {
                        s.push('\n');
                        let _ = timings.lock().expect("timings lock poisoned").write_all(s.as_bytes());
                    }
                    fresh.lock().expect("record lock poisoned").push(record);
                });
            });
            if let Some(e) = failure.lock().expect("failure lock poisoned").take() {
                return Err(e.into());
            }
        }

        let fresh = fresh.into_inner().expect("record lock poisoned");
        let executed = fresh.len();
        let hard_failures = fresh
            .iter()
            .filter(|r| {
                r.error
                    .as_ref()
                    .is_some_and(|e| e.kind == RecordErrorKind::ProviderUnavailable)
            })
            .count();
        let mut manifest = RunManifest::new(header);
        for r in done.into_iter().chain(fresh) {
            manifest.push(r)?;
        }
        manifest.complete();
        manifest.save(manifest_path)?;
        let _ = fs::remove_file(&journal_path);
        Ok(RunSummary {
            manifest,
            resumed,
            executed,
            hard_failures,
        })
    }

    fn run_task(&self, task: &Task<'_>, condition: &ConditionTag) -> RunRecord {
        match task {
            Task::Mcq(item) => {
                let mut record = RunRecord {
                    item_ref: item.question_id.clone(),
                    video_id: item.video_key.clone(),
                    condition: condition.clone(),
                    request_kind: RequestKind::Mcq,
                    task_type: Some(item.task_type.clone()),
                    duration_class: Some(item.duration_class),
                    answer_key: Some(item.answer),
                    response: ModelResponse::failed(ResponseStatus::Invalid, 0, ""),
                    parsed: None,
                    outcome: super::Outcome::InvalidOutput,
                    error: None,
                };
                self.finish(&mut record, self.mcq_response(item, condition));
                record
            }
            Task::Summary {
                video_key,
                duration_class,
            } => {
                let mut record = RunRecord {
                    item_ref: video_key.to_string(),
                    video_id: video_key.to_string(),
                    condition: condition.clone(),
                    request_kind: RequestKind::SummaryKeyframes,
                    task_type: None,
                    duration_class: Some(*duration_class),
                    answer_key: None,
                    response: ModelResponse::failed(ResponseStatus::Invalid, 0, ""),
                    parsed: None,
                    outcome: super::Outcome::InvalidOutput,
                    error: None,
                };
                self.finish(&mut record, self.summary_response(video_key, condition));
                record
            }
        }
    }

    fn finish(&self, record: &mut RunRecord, response: Result<ModelResponse, RecordError>) {
        match response {
            Ok(response) => {
                let (parsed, outcome) =
                    classify(record.request_kind, &response, record.answer_key, &self.settings.parser);
                record.response = response;
                record.parsed = parsed;
                record.outcome = outcome;
            }
            Err(e) => {
                record.response = ModelResponse::failed(ResponseStatus::Invalid, 0, e.message.clone());
                record.error = Some(e);
            }
        }
    }

    fn asset(&self, key: &str) -> Result<&MediaAsset, RecordError> {
        self.inventory
            .get(key)
            .ok_or_else(|| record_error(RecordErrorKind::Media, format!("no media asset for video {key:?}")))
    }

    fn frames(&self, asset: &MediaAsset, fps: f64) -> Result<Vec<PathBuf>, RecordError> {
        let media_err = |e: media::MediaError| record_error(RecordErrorKind::Media, e.to_string());
        let plan = media::plan_frames(asset, fps).map_err(media_err)?;
        let dir = self.settings.frames_dir.join(asset.key());
        let paths: Vec<PathBuf> = plan
            .timestamps_s
            .iter()
            .map(|&t| dir.join(media::frame_file_name(t, &self.settings.frame_ext)))
            .collect();
        if let Some(missing) = paths.iter().find(|p| !p.is_file()) {
            return match self.media {
                Some(tool) => tool
                    .extract_frames_with_ext(asset, &plan, &dir, &self.settings.frame_ext)
                    .map_err(media_err),
                None => Err(record_error(
                    RecordErrorKind::Media,
                    format!("frame {} has not been extracted", missing.display()),
                )),
            };
        }
        Ok(paths)
    }

    fn transcript(&self, asset: &MediaAsset) -> Result<Transcript, RecordError> {
        let key = asset.key();
        if let Some(cached) = self.transcripts.lock().expect("transcript cache poisoned").get(&key) {
            return cached.clone();
        }
        let result = self.load_transcript(asset, &key);
        self.transcripts
            .lock()
            .expect("transcript cache poisoned")
            .insert(key, result.clone());
        result
    }

    fn load_transcript(&self, asset: &MediaAsset, key: &str) -> Result<Transcript, RecordError> {
        if !asset.has_audio() {
            return Ok(Transcript::empty());
        }
        if let Some(dir) = &self.settings.transcripts_dir {
            let path = dir.join(format!("{key}.json"));
            if path.is_file() {
                let text = fs::read_to_string(&path)
                    .map_err(|e| record_error(RecordErrorKind::Transcript, format!("{}: {e}", path.display())))?;
                return serde_json::from_str(&text)
                    .map_err(|e| record_error(RecordErrorKind::Transcript, format!("{}: {e}", path.display())));
            }
        }
        match &self.settings.asr_provider {
            Some(asr) => self.providers.transcribe(asset, asr).map_err(provider_error),
            None => Err(record_error(
                RecordErrorKind::Transcript,
                format!("no transcript for {key:?} and no ASR provider configured"),
            )),
        }
    }

    fn mcq_response(&self, item: &BenchmarkItem, condition: &ConditionTag) -> Result<ModelResponse, RecordError> {
        let asset = self.asset(&item.video_key)?;
        let frames = self.frames(asset, condition.fps)?;
        let transcript = if condition.with_transcript {
            Some(self.transcript(asset)?)
        } else {
            None
        };
        let prompt = build_question_prompt(item, transcript.as_ref(), &self.settings.templates.mcq)
            .map_err(|e| record_error(RecordErrorKind::Request, e.to_string()))?;
        self.providers
            .describe_video(&frames, &prompt, &condition.model_name, condition)
            .map_err(provider_error)
    }

    fn summary_response(&self, video_key: &str, condition: &ConditionTag) -> Result<ModelResponse, RecordError> {
        let asset = self.asset(video_key)?;
        let frames = self.frames(asset, condition.fps)?;
        let transcript = if condition.with_transcript {
            self.transcript(asset)?
        } else {
            Transcript::empty()
        };
        let text = transcript.full_text.as_str();
        let prompt = templates::render(
            &self.settings.templates.summary,
            &[("transcript", text)],
            &[("transcript", !text.is_empty())],
        )
        .map_err(|e| record_error(RecordErrorKind::Request, e.to_string()))?;
        let response = self
            .providers
            .describe_video(&frames, &prompt, &condition.model_name, condition)
            .map_err(provider_error)?;
        match &self.settings.refine_provider {
            Some(refiner) if response.status == ResponseStatus::Ok => {
                let mut refined = self
                    .providers
                    .refine_summary(
                        &response.raw_text,
                        &transcript,
                        &self.settings.templates.refine,
                        refiner,
                    )
                    .map_err(provider_error)?;
                refined.latency_ms += response.latency_ms;
                Ok(refined)
            }
            _ => Ok(response),
        }
    }
}

fn sidecar(manifest_path: &Path, suffix: &str) -> PathBuf {
    let mut name = manifest_path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(format!(".{suffix}"));
    manifest_path.with_file_name(name)
}

/// Reads a journal, dropping a torn final line left by an interrupted write.
fn load_journal(path: &Path) -> Result<RunManifest, BenchmarkError> {
    let text = fs::read_to_string(path).map_err(|e| BenchmarkError::Io(path.to_path_buf(), e))?;
    let complete = match text.rfind('\n') {
        Some(i) => &text[..=i],
        None => "",
    };
    if complete.len() != text.len() {
        let f = fs::OpenOptions::new()
            .write(true)
            .open(path)
            .map_err(|e| BenchmarkError::Io(path.to_path_buf(), e))?;
        f.set_len(complete.len() as u64)
            .map_err(|e| BenchmarkError::Io(path.to_path_buf(), e))?;
    }
    Ok(RunManifest::from_jsonl(complete, path)?)
}

/// The parsed video outputs of valid summary records, keyed by media key
/// then condition label.
pub fn video_outputs(records: &[RunRecord]) -> IndexMap<String, IndexMap<String, crate::parsing::ParsedVideoOutput>> {
    let mut out: IndexMap<String, IndexMap<String, _>> = IndexMap::new();
    for r in records {
        if let (RequestKind::SummaryKeyframes, Some(Parsed::Video(v))) = (r.request_kind, &r.parsed) {
            if v.valid {
                let label = r.condition.label();
                out.entry(r.video_id.clone()).or_default().insert(label, v.clone());
            }
        }
    }
    out
}
