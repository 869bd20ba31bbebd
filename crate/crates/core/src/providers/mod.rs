//! Uniform request/response layer over ASR, VLM and text-refinement backends.
//!
//! [`Providers`] runs in one of two modes:
//!
//! * **live**: the request goes to a [`Backend`]; the response is written to
//!   the [`CassetteStore`] before it is returned, so every live run can be
//!   replayed afterwards.
//! * **replay**: the response comes from the cassette store verbatim. No
//!   backend is needed, and a missing cassette is a [`ProviderError::ReplayMiss`].
//!
//! Out-of-memory and timeouts are outcomes, not errors: they come back as a
//! [`ModelResponse`] with a non-ok [`ResponseStatus`].

mod cassette;
mod http;
mod scripted;
mod transcript;

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;
use std::sync::{Arc, Condvar, Mutex};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::media::MediaAsset;
use crate::templates::{self, TemplateError};

pub use cassette::{CassetteRecord, CassetteStore};
pub use http::{HttpBackend, HttpProviderConfig, ProviderFile};
pub use scripted::ScriptedBackend;
pub use transcript::{normalize_whitespace, parse_asr_output, Transcript, TranscriptSegment};

#[derive(Debug, Error)]
pub enum ProviderError {
    #[error("provider {provider_id} unavailable: {reason}")]
    ProviderUnavailable { provider_id: String, reason: String },
    #[error("no cassette for {provider_id} request {key}")]
    ReplayMiss { provider_id: String, key: String },
    #[error("malformed output from {provider_id}: {reason}")]
    MalformedProviderOutput { provider_id: String, reason: String },
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("{0} has no audio stream")]
    NoAudio(PathBuf),
    #[error("transcription by {provider_id} ended with status {status}")]
    TranscriptionFailed {
        provider_id: String,
        status: ResponseStatus,
    },
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error("cassette store: {0}")]
    Store(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, ProviderError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Asr,
    Vlm,
    Llm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttentionKind {
    Sdpa,
    FlashAttention,
    Other,
}

impl fmt::Display for AttentionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AttentionKind::Sdpa => "SDPA",
            AttentionKind::FlashAttention => "FlashAttention",
            AttentionKind::Other => "Other",
        })
    }
}

/// One cell of the experiment matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionTag {
    pub fps: f64,
    pub with_transcript: bool,
    pub attention: AttentionKind,
    #[serde(default)]
    pub gpu: String,
    pub model_name: String,
}

impl ConditionTag {
    /// `qwen2-vl-7b SDPA (0.1 FPS) +ALM`
    pub fn label(&self) -> String {
        let alm = if self.with_transcript { " +ALM" } else { "" };
        format!("{} {} ({} FPS){alm}", self.model_name, self.attention, self.fps)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRequest {
    pub provider_id: String,
    pub modality: Modality,
    pub prompt: String,
    #[serde(default)]
    pub frame_refs: Vec<PathBuf>,
    #[serde(default)]
    pub audio_ref: Option<PathBuf>,
    #[serde(default)]
    pub condition: Option<ConditionTag>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResponseStatus {
    Ok,
    Oom,
    Timeout,
    Invalid,
}

impl fmt::Display for ResponseStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ResponseStatus::Ok => "ok",
            ResponseStatus::Oom => "oom",
            ResponseStatus::Timeout => "timeout",
            ResponseStatus::Invalid => "invalid",
        })
    }
}

/// Invariant: `status == Ok` exactly when `raw_text` is non-empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelResponse {
    pub raw_text: String,
    pub latency_ms: u64,
    pub status: ResponseStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl ModelResponse {
    pub fn ok(raw_text: impl Into<String>, latency_ms: u64) -> Self {
        Self::new(raw_text.into(), latency_ms, ResponseStatus::Ok)
    }

    pub fn failed(status: ResponseStatus, latency_ms: u64, detail: impl Into<String>) -> Self {
        let mut r = Self::new(String::new(), latency_ms, status);
        let detail = detail.into();
        if !detail.is_empty() {
            r.detail = Some(detail);
        }
        r
    }

    /// Builds a response and enforces the status/text invariant: ok with
    /// empty text becomes `Invalid`; any non-ok status drops its text.
    pub fn new(raw_text: String, latency_ms: u64, status: ResponseStatus) -> Self {
        match status {
            ResponseStatus::Ok if raw_text.is_empty() => Self {
                raw_text,
                latency_ms,
                status: ResponseStatus::Invalid,
                detail: Some("empty response".into()),
            },
            ResponseStatus::Ok => Self {
                raw_text,
                latency_ms,
                status,
                detail: None,
            },
            _ => Self {
                raw_text: String::new(),
                latency_ms,
                status,
                detail: None,
            },
        }
    }

    pub fn is_consistent(&self) -> bool {
        (self.status == ResponseStatus::Ok) == !self.raw_text.is_empty()
    }
}

/// Media bytes accompanying a request.
#[derive(Debug, Clone, Default)]
pub struct Payload {
    pub frames: Vec<Vec<u8>>,
    pub audio: Option<Vec<u8>>,
}

impl Payload {
    fn load(request: &ModelRequest) -> Result<Self> {
        let read = |p: &PathBuf| {
            std::fs::read(p).map_err(|source| ProviderError::Io {
                path: p.clone(),
                source,
            })
        };
        let frames = request.frame_refs.iter().map(read).collect::<Result<Vec<_>>>()?;
        let audio = request.audio_ref.as_ref().map(read).transpose()?;
        Ok(Self { frames, audio })
    }
}

/// A live model endpoint.
pub trait Backend: Send + Sync {
    /// `Err` only for hard failures after the backend's own retries;
    /// OOM and timeouts are returned in-band.
    fn call(&self, request: &ModelRequest, payload: &Payload) -> Result<ModelResponse>;
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Serialize)]
struct KeyMaterial<'a> {
    provider_id: &'a str,
    modality: Modality,
    prompt: &'a str,
    frames: Vec<String>,
    audio: Option<String>,
    condition: Option<&'a ConditionTag>,
}

/// Cassette key: SHA-256 over provider, modality, prompt, ordered frame
/// content hashes, audio content hash and condition. File paths do not
/// participate.
pub fn cassette_key(request: &ModelRequest, payload: &Payload) -> String {
    let material = KeyMaterial {
        provider_id: &request.provider_id,
        modality: request.modality,
        prompt: &request.prompt,
        frames: payload.frames.iter().map(|f| sha256_hex(f)).collect(),
        audio: payload.audio.as_deref().map(sha256_hex),
        condition: request.condition.as_ref(),
    };
    sha256_hex(&serde_json::to_vec(&material).expect("key material serializes"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Live,
    Replay,
}

/// Counting semaphore bounding concurrent live calls.
#[derive(Debug)]
struct InFlight {
    limit: usize,
    used: Mutex<usize>,
    freed: Condvar,
}

impl InFlight {
    fn new(limit: usize) -> Self {
        Self {
            limit: limit.max(1),
            used: Mutex::new(0),
            freed: Condvar::new(),
        }
    }

    fn acquire(&self) -> InFlightGuard<'_> {
        let mut used = self.used.lock().expect("in-flight counter poisoned");
        while *used >= self.limit {
            used = self.freed.wait(used).expect("in-flight counter poisoned");
        }
        *used += 1;
        InFlightGuard(self)
    }
}

struct InFlightGuard<'a>(&'a InFlight);

impl Drop for InFlightGuard<'_> {
    fn drop(&mut self) {
        let mut used = self.0.used.lock().expect("in-flight counter poisoned");
        *used -= 1;
        self.0.freed.notify_one();
    }
}

/// Provider hub shared by all benchmark workers.
pub struct Providers {
    mode: Mode,
    store: CassetteStore,
    backends: HashMap<String, Arc<dyn Backend>>,
    in_flight: InFlight,
}

impl Providers {
    pub fn replay(store: CassetteStore) -> Self {
        Self {
            mode: Mode::Replay,
            store,
            backends: HashMap::new(),
            in_flight: InFlight::new(1),
        }
    }

    pub fn live(store: CassetteStore, max_in_flight: usize) -> Self {
        Self {
            mode: Mode::Live,
            store,
            backends: HashMap::new(),
            in_flight: InFlight::new(max_in_flight),
        }
    }

    pub fn with_backend(mut self, provider_id: impl Into<String>, backend: Arc<dyn Backend>) -> Self {
        self.backends.insert(provider_id.into(), backend);
        self
    }

    pub fn register(&mut self, provider_id: impl Into<String>, backend: Arc<dyn Backend>) {
        self.backends.insert(provider_id.into(), backend);
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn store(&self) -> &CassetteStore {
        &self.store
    }

    /// Resolves one request through the cassette store or the live backend.
    pub fn execute(&self, request: &ModelRequest) -> Result<ModelResponse> {
        let payload = Payload::load(request)?;
        let key = cassette_key(request, &payload);
        match self.mode {
            Mode::Replay => {
                let record = self.store.get(&key)?.ok_or_else(|| ProviderError::ReplayMiss {
                    provider_id: request.provider_id.clone(),
                    key: key.clone(),
                })?;
                let response = record.response;
                if !response.is_consistent() {
                    return Err(ProviderError::MalformedProviderOutput {
                        provider_id: request.provider_id.clone(),
                        reason: format!("cassette {key} violates the status/text invariant"),
                    });
                }
                Ok(response)
            }
            Mode::Live => {
                let backend =
                    self.backends
                        .get(&request.provider_id)
                        .ok_or_else(|| ProviderError::ProviderUnavailable {
                            provider_id: request.provider_id.clone(),
                            reason: "no backend registered".into(),
                        })?;
                let response = {
                    let _slot = self.in_flight.acquire();
                    backend.call(request, &payload)?
                };
                let response = ModelResponse {
                    detail: response.detail.clone(),
                    ..ModelResponse::new(response.raw_text, response.latency_ms, response.status)
                };
                self.store.append(CassetteRecord::new(key, request, response.clone()))?;
                Ok(response)
            }
        }
    }

    /// Speech-to-text over the asset's audio.
    pub fn transcribe(&self, asset: &MediaAsset, provider_id: &str) -> Result<Transcript> {
        if !asset.has_audio() {
            return Err(ProviderError::NoAudio(asset.path.clone()));
        }
        let request = ModelRequest {
            provider_id: provider_id.to_string(),
            modality: Modality::Asr,
            prompt: String::new(),
            frame_refs: Vec::new(),
            audio_ref: Some(asset.path.clone()),
            condition: None,
        };
        let response = self.execute(&request)?;
        if response.status != ResponseStatus::Ok {
            return Err(ProviderError::TranscriptionFailed {
                provider_id: provider_id.to_string(),
                status: response.status,
            });
        }
        parse_asr_output(&response.raw_text).map_err(|reason| ProviderError::MalformedProviderOutput {
            provider_id: provider_id.to_string(),
            reason,
        })
    }

    /// VLM call over sampled frames.
    pub fn describe_video(
        &self,
        frames: &[PathBuf],
        prompt: &str,
        provider_id: &str,
        condition: &ConditionTag,
    ) -> Result<ModelResponse> {
        if frames.is_empty() {
            return Err(ProviderError::InvalidRequest("at least one frame is required".into()));
        }
        if prompt.trim().is_empty() {
            return Err(ProviderError::InvalidRequest("prompt is empty".into()));
        }
        self.execute(&ModelRequest {
            provider_id: provider_id.to_string(),
            modality: Modality::Vlm,
            prompt: prompt.to_string(),
            frame_refs: frames.to_vec(),
            audio_ref: None,
            condition: Some(condition.clone()),
        })
    }

    /// Text-only refinement of a VLM summary, optionally grounded in the
    /// transcript. An empty transcript drops the `{#transcript}` section.
    pub fn refine_summary(
        &self,
        vlm_text: &str,
        transcript: &Transcript,
        prompt_template: &str,
        provider_id: &str,
    ) -> Result<ModelResponse> {
        if vlm_text.trim().is_empty() {
            return Err(ProviderError::InvalidRequest("VLM text is empty".into()));
        }
        let prompt = refine_prompt(vlm_text, transcript, prompt_template)?;
        self.execute(&ModelRequest {
            provider_id: provider_id.to_string(),
            modality: Modality::Llm,
            prompt,
            frame_refs: Vec::new(),
            audio_ref: None,
            condition: None,
        })
    }
}

pub fn refine_prompt(vlm_text: &str, transcript: &Transcript, template: &str) -> Result<String> {
    templates::require(template, &["summary"])?;
    let has_transcript = !transcript.full_text.is_empty();
    Ok(templates::render(
        template,
        &[("summary", vlm_text), ("transcript", &transcript.full_text)],
        &[("transcript", has_transcript)],
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::media::{Container, MediaKind};
    use std::path::Path;
    use std::sync::atomic::{AtomicUsize, Ordering};

    fn condition() -> ConditionTag {
        ConditionTag {
            fps: 0.1,
            with_transcript: false,
            attention: AttentionKind::Sdpa,
            gpu: "A10G".into(),
            model_name: "qwen2-vl-7b".into(),
        }
    }

    fn write_frames(dir: &Path, n: usize) -> Vec<PathBuf> {
        (0..n)
            .map(|i| {
                let p = dir.join(format!("f{i}.ppm"));
                std::fs::write(&p, format!("frame {i}")).unwrap();
                p
            })
            .collect()
    }

    struct Counting {
        calls: AtomicUsize,
        reply: ModelResponse,
    }

    impl Backend for Counting {
        fn call(&self, _r: &ModelRequest, _p: &Payload) -> Result<ModelResponse> {
            self.calls.fetch_add(1, Ordering::SeqCst);
            Ok(self.reply.clone())
        }
    }

    #[test]
    fn response_invariant_is_enforced() {
        assert_eq!(ModelResponse::ok("", 3).status, ResponseStatus::Invalid);
        let oom = ModelResponse::new("partial".into(), 3, ResponseStatus::Oom);
        assert!(oom.raw_text.is_empty());
        assert!(oom.is_consistent());
        assert!(ModelResponse::ok("A", 1).is_consistent());
    }

    #[test]
    fn key_depends_on_frame_content_not_path() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.ppm");
        let b = dir.path().join("b.ppm");
        std::fs::write(&a, "same").unwrap();
        std::fs::write(&b, "same").unwrap();
        let req = |p: &PathBuf| ModelRequest {
            provider_id: "p".into(),
            modality: Modality::Vlm,
            prompt: "x".into(),
            frame_refs: vec![p.clone()],
            audio_ref: None,
            condition: Some(condition()),
        };
        let ka = cassette_key(&req(&a), &Payload::load(&req(&a)).unwrap());
        let kb = cassette_key(&req(&b), &Payload::load(&req(&b)).unwrap());
        assert_eq!(ka, kb);
        std::fs::write(&b, "different").unwrap();
        let kb2 = cassette_key(&req(&b), &Payload::load(&req(&b)).unwrap());
        assert_ne!(ka, kb2);
    }

    #[test]
    fn live_records_then_replay_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let frames = write_frames(dir.path(), 6);
        let store_dir = dir.path().join("cassettes");
        let backend = Arc::new(Counting {
            calls: AtomicUsize::new(0),
            reply: ModelResponse::ok("A stage performance of Snow White.", 812),
        });
        let live = Providers::live(CassetteStore::open(&store_dir).unwrap(), 2).with_backend("gemini", backend.clone());
        let first = live
            .describe_video(&frames, "summarize", "gemini", &condition())
            .unwrap();
        assert_eq!(backend.calls.load(Ordering::SeqCst), 1);

        let replay = Providers::replay(CassetteStore::open(&store_dir).unwrap());
        let a = replay
            .describe_video(&frames, "summarize", "gemini", &condition())
            .unwrap();
        let b = replay
            .describe_video(&frames, "summarize", "gemini", &condition())
            .unwrap();
        assert_eq!(a, first);
        assert_eq!(serde_json::to_vec(&a).unwrap(), serde_json::to_vec(&b).unwrap());

        let miss = replay.describe_video(&frames, "another prompt", "gemini", &condition());
        assert!(matches!(miss, Err(ProviderError::ReplayMiss { .. })));
    }

    #[test]
    fn oom_passes_through_in_band() {
        let dir = tempfile::tempdir().unwrap();
        let frames = write_frames(dir.path(), 1);
        let backend = Arc::new(Counting {
            calls: AtomicUsize::new(0),
            reply: ModelResponse::failed(ResponseStatus::Oom, 10, "CUDA out of memory"),
        });
        let live = Providers::live(CassetteStore::open(dir.path().join("c")).unwrap(), 1).with_backend("q", backend);
        let r = live.describe_video(&frames, "p", "q", &condition()).unwrap();
        assert_eq!(r.status, ResponseStatus::Oom);
        assert_eq!(r.raw_text, "");
    }

    #[test]
    fn describe_video_preconditions() {
        let dir = tempfile::tempdir().unwrap();
        let p = Providers::replay(CassetteStore::open(dir.path()).unwrap());
        assert!(matches!(
            p.describe_video(&[], "p", "q", &condition()),
            Err(ProviderError::InvalidRequest(_))
        ));
        let frames = write_frames(dir.path(), 1);
        assert!(matches!(
            p.describe_video(&frames, "  ", "q", &condition()),
            Err(ProviderError::InvalidRequest(_))
        ));
    }

    #[test]
    fn unregistered_backend_is_unavailable() {
        let dir = tempfile::tempdir().unwrap();
        let frames = write_frames(dir.path(), 1);
        let live = Providers::live(CassetteStore::open(dir.path().join("c")).unwrap(), 1);
        assert!(matches!(
            live.describe_video(&frames, "p", "nobody", &condition()),
            Err(ProviderError::ProviderUnavailable { .. })
        ));
    }

    fn audio_asset(dir: &Path, bytes: &[u8]) -> MediaAsset {
        let path = dir.join("talk.flac");
        std::fs::write(&path, bytes).unwrap();
        MediaAsset {
            path,
            kind: MediaKind::Audio,
            container: Container::Flac,
            duration_s: 30.0,
            has_audio_stream: true,
            width_px: None,
            height_px: None,
        }
    }

    const PCR_ASR: &str = r#"{"text":" PCR of course refers to pathological complete response where once the patient has surgery the pathologist does not find any cancer at all","segments":[{"id":0,"start":7.72,"end":13.6,"text":" PCR of course refers to pathological complete response where once the patient has surgery"},{"id":1,"start":13.6,"end":17.0,"text":" the pathologist does not find any cancer at all"}],"language":"en"}"#;

    #[test]
    fn transcribe_replays_whisper_segments() {
        let dir = tempfile::tempdir().unwrap();
        let asset = audio_asset(dir.path(), b"pcr lecture audio");
        let store = dir.path().join("c");
        let live = Providers::live(CassetteStore::open(&store).unwrap(), 1).with_backend(
            "whisper-turbo",
            Arc::new(ScriptedBackend::new(|_, _| ModelResponse::ok(PCR_ASR, 5000))),
        );
        let recorded = live.transcribe(&asset, "whisper-turbo").unwrap();

        let replay = Providers::replay(CassetteStore::open(&store).unwrap());
        let t = replay.transcribe(&asset, "whisper-turbo").unwrap();
        assert_eq!(t, recorded);
        let first = &t.segments[0];
        assert_eq!((first.id, first.start_s, first.end_s), (0, 7.72, 13.6));
        assert_eq!(
            first.text,
            " PCR of course refers to pathological complete response where once the patient has surgery"
        );
        // concatenation oracle
        let concat: String = t.segments.iter().map(|s| s.text.as_str()).collect();
        assert_eq!(t.full_text, normalize_whitespace(&concat));
        assert_eq!(t.language.as_deref(), Some("en"));
    }

    #[test]
    fn transcribe_silent_clip() {
        let dir = tempfile::tempdir().unwrap();
        let asset = audio_asset(dir.path(), b"silence");
        let live = Providers::live(CassetteStore::open(dir.path().join("c")).unwrap(), 1).with_backend(
            "asr",
            Arc::new(ScriptedBackend::new(|_, _| {
                ModelResponse::ok(r#"{"text":"","segments":[]}"#, 1)
            })),
        );
        let t = live.transcribe(&asset, "asr").unwrap();
        assert!(t.segments.is_empty());
        assert_eq!(t.full_text, "");
    }

    #[test]
    fn transcribe_requires_audio() {
        let dir = tempfile::tempdir().unwrap();
        let mut asset = audio_asset(dir.path(), b"x");
        asset.kind = MediaKind::Video;
        asset.has_audio_stream = false;
        let p = Providers::replay(CassetteStore::open(dir.path()).unwrap());
        assert!(matches!(p.transcribe(&asset, "asr"), Err(ProviderError::NoAudio(_))));
    }

    #[test]
    fn refine_with_and_without_transcript() {
        let dir = tempfile::tempdir().unwrap();
        let echo = Arc::new(ScriptedBackend::new(|req, _| ModelResponse::ok(req.prompt.clone(), 1)));
        let live = Providers::live(CassetteStore::open(dir.path()).unwrap(), 1).with_backend("llm", echo);
        let transcript = parse_asr_output(PCR_ASR).unwrap();
        let vlm = "The video shows a 3D model of a human body.";
        let template = crate::templates::DEFAULT_REFINE_TEMPLATE;

        let grounded = live.refine_summary(vlm, &transcript, template, "llm").unwrap();
        assert!(grounded.raw_text.contains("pathological complete response"));
        assert!(grounded.raw_text.contains(vlm));

        let bare = live.refine_summary(vlm, &Transcript::empty(), template, "llm").unwrap();
        assert!(!bare.raw_text.contains("Transcription"));
        assert!(bare.raw_text.ends_with(vlm));

        assert!(matches!(
            live.refine_summary("", &transcript, template, "llm"),
            Err(ProviderError::InvalidRequest(_))
        ));
    }

    #[test]
    fn in_flight_limit_bounds_concurrency() {
        use std::sync::atomic::AtomicUsize;
        struct Slow {
            now: AtomicUsize,
            peak: AtomicUsize,
        }
        impl Backend for Slow {
            fn call(&self, _r: &ModelRequest, _p: &Payload) -> Result<ModelResponse> {
                let n = self.now.fetch_add(1, Ordering::SeqCst) + 1;
                self.peak.fetch_max(n, Ordering::SeqCst);
                std::thread::sleep(std::time::Duration::from_millis(20));
                self.now.fetch_sub(1, Ordering::SeqCst);
                Ok(ModelResponse::ok("B", 1))
            }
        }
        let dir = tempfile::tempdir().unwrap();
        let frames = write_frames(dir.path(), 8);
        let slow = Arc::new(Slow {
            now: AtomicUsize::new(0),
            peak: AtomicUsize::new(0),
        });
        let live =
            Providers::live(CassetteStore::open(dir.path().join("c")).unwrap(), 2).with_backend("s", slow.clone());
        std::thread::scope(|s| {
            for f in &frames {
                let live = &live;
                s.spawn(move || {
                    live.describe_video(std::slice::from_ref(f), "p", "s", &condition())
                        .unwrap()
                });
            }
        });
        assert!(slow.peak.load(Ordering::SeqCst) <= 2);
        assert_eq!(live.store().len().unwrap(), 8);
    }
}
