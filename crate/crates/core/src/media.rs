//! Media probing, container classification, and frame / segment planning.
//!
//! Decoding never happens in-process. Probing and frame extraction shell out
//! to an ffprobe/ffmpeg-compatible tool through [`CommandTemplate`]s; this
//! module only decides *which* instants and segments downstream calls need.

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MediaError {
    #[error("unsupported media format for {path}: {detail}")]
    UnsupportedFormat { path: PathBuf, detail: String },
    #[error("probe failed for {path}: {reason}")]
    ProbeFailure { path: PathBuf, reason: String },
    #[error("{0} is not a video asset")]
    NotAVideo(PathBuf),
    #[error("fps must be a positive finite number, got {0}")]
    InvalidFps(f64),
    #[error("segment length must be positive, got {0}")]
    InvalidSegmentLength(f64),
    #[error("overlap {overlap_s} must be >= 0 and smaller than segment length {segment_length_s}")]
    InvalidOverlap { segment_length_s: f64, overlap_s: f64 },
    #[error("frame extraction failed for {path} at {timestamp_s}s: {reason}")]
    Extraction {
        path: PathBuf,
        timestamp_s: f64,
        reason: String,
    },
}

pub type Result<T> = std::result::Result<T, MediaError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MediaKind {
    Video,
    Audio,
}

/// The twelve supported containers: eight video, four audio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Container {
    #[serde(rename = "mp4")]
    Mp4,
    #[serde(rename = "m4v")]
    M4v,
    #[serde(rename = "quicktime")]
    QuickTime,
    #[serde(rename = "wmv")]
    Wmv,
    #[serde(rename = "webm")]
    WebM,
    #[serde(rename = "msvideo")]
    MsVideo,
    #[serde(rename = "mpg")]
    Mpg,
    #[serde(rename = "3gpp")]
    ThreeGpp,
    #[serde(rename = "mp3")]
    Mp3,
    #[serde(rename = "wav")]
    Wav,
    #[serde(rename = "m4a")]
    M4a,
    #[serde(rename = "flac")]
    Flac,
}

impl Container {
    pub const VIDEO: [Container; 8] = [
        Container::Mp4,
        Container::M4v,
        Container::QuickTime,
        Container::Wmv,
        Container::WebM,
        Container::MsVideo,
        Container::Mpg,
        Container::ThreeGpp,
    ];
    pub const AUDIO: [Container; 4] = [Container::Mp3, Container::Wav, Container::M4a, Container::Flac];

    pub fn kind(self) -> MediaKind {
        if Self::AUDIO.contains(&self) {
            MediaKind::Audio
        } else {
            MediaKind::Video
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Container::Mp4 => "mp4",
            Container::M4v => "m4v",
            Container::QuickTime => "quicktime",
            Container::Wmv => "wmv",
            Container::WebM => "webm",
            Container::MsVideo => "msvideo",
            Container::Mpg => "mpg",
            Container::ThreeGpp => "3gpp",
            Container::Mp3 => "mp3",
            Container::Wav => "wav",
            Container::M4a => "m4a",
            Container::Flac => "flac",
        }
    }

    /// Classifies a file extension (case-insensitive, without the dot).
    pub fn from_extension(ext: &str) -> Option<Container> {
        let c = match ext.to_ascii_lowercase().as_str() {
            "mp4" => Container::Mp4,
            "m4v" => Container::M4v,
            "mov" | "qt" => Container::QuickTime,
            "wmv" => Container::Wmv,
            "webm" => Container::WebM,
            "avi" => Container::MsVideo,
            "mpg" | "mpeg" => Container::Mpg,
            "3gp" | "3gpp" => Container::ThreeGpp,
            "mp3" => Container::Mp3,
            "wav" => Container::Wav,
            "m4a" => Container::M4a,
            "flac" => Container::Flac,
            _ => return None,
        };
        Some(c)
    }

    pub fn from_path(path: &Path) -> Option<Container> {
        path.extension()
            .and_then(|e| e.to_str())
            .and_then(Container::from_extension)
    }

    /// Classifies from ffprobe's `format_name` plus the ISO-BMFF `major_brand`
    /// tag. Returns `None` when the metadata is ambiguous (e.g. a bare
    /// `mov,mp4,...` demuxer name with no brand, or `matroska,webm`).
    pub fn from_probe(format_name: &str, major_brand: Option<&str>) -> Option<Container> {
        let names: Vec<&str> = format_name.split(',').map(str::trim).collect();
        let has = |n: &str| names.contains(&n);
        if has("mov") || has("mp4") {
            let brand = major_brand?.trim().to_ascii_lowercase();
            return match brand.as_str() {
                "m4v" | "m4vh" | "m4vp" => Some(Container::M4v),
                "qt" => Some(Container::QuickTime),
                "m4a" => Some(Container::M4a),
                b if b.starts_with("3gp") || b.starts_with("3g2") => Some(Container::ThreeGpp),
                "isom" | "iso2" | "iso4" | "iso5" | "iso6" | "mp41" | "mp42" | "avc1" | "dash" | "mmp4" => {
                    Some(Container::Mp4)
                }
                _ => None,
            };
        }
        if has("asf") {
            return Some(Container::Wmv);
        }
        if has("avi") {
            return Some(Container::MsVideo);
        }
        if has("mpeg") || has("mpegvideo") || has("mpegts") {
            return Some(Container::Mpg);
        }
        if has("mp3") {
            return Some(Container::Mp3);
        }
        if has("wav") {
            return Some(Container::Wav);
        }
        if has("flac") {
            return Some(Container::Flac);
        }
        None
    }
}

impl fmt::Display for Container {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MediaAsset {
    pub path: PathBuf,
    pub kind: MediaKind,
    pub container: Container,
    pub duration_s: f64,
    pub has_audio_stream: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width_px: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height_px: Option<u32>,
}

impl MediaAsset {
    /// Lookup key used to join assets with dataset items: the file stem.
    pub fn key(&self) -> String {
        self.path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    }

    pub fn has_audio(&self) -> bool {
        self.kind == MediaKind::Audio || self.has_audio_stream
    }
}

/// Sampling instants for one VLM call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FramePlan {
    pub fps: f64,
    pub timestamps_s: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub segment_length_s: f64,
    pub overlap_s: f64,
    pub segments: Vec<(f64, f64)>,
}

// Grid instants are rounded to the microsecond so that 3 / 0.1 lands on 30.
fn snap_us(t: f64) -> f64 {
    (t * 1e6).round() / 1e6
}

/// Plans frame timestamps `{0, 1/fps, 2/fps, ...} ∩ [0, duration)`.
///
/// When `fps · duration < 1` the grid would carry at most the opening frame,
/// so a single midpoint frame is planned instead.
pub fn plan_frames(asset: &MediaAsset, fps: f64) -> Result<FramePlan> {
    if asset.kind != MediaKind::Video {
        return Err(MediaError::NotAVideo(asset.path.clone()));
    }
    if !(fps.is_finite() && fps > 0.0) {
        return Err(MediaError::InvalidFps(fps));
    }
    let duration = asset.duration_s;
    if duration <= 0.0 {
        return Ok(FramePlan {
            fps,
            timestamps_s: Vec::new(),
        });
    }
    if fps * duration < 1.0 {
        return Ok(FramePlan {
            fps,
            timestamps_s: vec![duration / 2.0],
        });
    }
    let mut timestamps_s = Vec::new();
    for i in 0u64.. {
        let t = snap_us(i as f64 / fps);
        if t >= duration {
            break;
        }
        timestamps_s.push(t);
    }
    Ok(FramePlan { fps, timestamps_s })
}

/// Plans contiguous covering segments of at most `segment_length_s`, each
/// overlapping its predecessor by `overlap_s`.
pub fn plan_split(asset: &MediaAsset, segment_length_s: f64, overlap_s: f64) -> Result<SplitPlan> {
    if !(segment_length_s.is_finite() && segment_length_s > 0.0) {
        return Err(MediaError::InvalidSegmentLength(segment_length_s));
    }
    if !(overlap_s.is_finite() && overlap_s >= 0.0 && overlap_s < segment_length_s) {
        return Err(MediaError::InvalidOverlap {
            segment_length_s,
            overlap_s,
        });
    }
    let duration = asset.duration_s.max(0.0);
    if duration <= segment_length_s {
        return Ok(SplitPlan {
            segment_length_s,
            overlap_s,
            segments: vec![(0.0, duration)],
        });
    }
    let stride = segment_length_s - overlap_s;
    let count = ((duration - overlap_s) / stride - 1e-9).ceil() as usize;
    let segments = (0..count)
        .map(|i| {
            let start = snap_us(i as f64 * stride);
            let end = if i + 1 == count {
                duration
            } else {
                snap_us(start + segment_length_s).min(duration)
            };
            (start, end)
        })
        .collect();
    Ok(SplitPlan {
        segment_length_s,
        overlap_s,
        segments,
    })
}

/// A subprocess invocation with `{placeholder}` substitution in its arguments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct CommandTemplate {
    pub program: String,
    pub args: Vec<String>,
}

impl CommandTemplate {
    pub fn new(program: impl Into<String>, args: &[&str]) -> Self {
        Self {
            program: program.into(),
            args: args.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn ffprobe() -> Self {
        Self::new(
            "ffprobe",
            &[
                "-v",
                "error",
                "-print_format",
                "json",
                "-show_format",
                "-show_streams",
                "{input}",
            ],
        )
    }

    pub fn ffmpeg_frame() -> Self {
        Self::new(
            "ffmpeg",
            &[
                "-v",
                "error",
                "-y",
                "-ss",
                "{timestamp}",
                "-i",
                "{input}",
                "-frames:v",
                "1",
                "{output}",
            ],
        )
    }

    pub fn render(&self, vars: &[(&str, &str)]) -> Command {
        let mut cmd = Command::new(substitute(&self.program, vars));
        for arg in &self.args {
            cmd.arg(substitute(arg, vars));
        }
        cmd
    }
}

fn substitute(s: &str, vars: &[(&str, &str)]) -> String {
    let mut out = s.to_string();
    for (name, value) in vars {
        out = out.replace(&format!("{{{name}}}"), value);
    }
    out
}

impl From<Vec<String>> for CommandTemplate {
    fn from(mut v: Vec<String>) -> Self {
        if v.is_empty() {
            return Self {
                program: String::new(),
                args: Vec::new(),
            };
        }
        let program = v.remove(0);
        Self { program, args: v }
    }
}

impl From<CommandTemplate> for Vec<String> {
    fn from(t: CommandTemplate) -> Self {
        std::iter::once(t.program).chain(t.args).collect()
    }
}

#[derive(Debug, Deserialize)]
struct ProbeOutput {
    #[serde(default)]
    streams: Vec<ProbeStream>,
    format: Option<ProbeFormat>,
}

#[derive(Debug, Deserialize)]
struct ProbeStream {
    codec_type: Option<String>,
    width: Option<u32>,
    height: Option<u32>,
    #[serde(default)]
    disposition: HashMap<String, i64>,
}

#[derive(Debug, Deserialize)]
struct ProbeFormat {
    format_name: Option<String>,
    duration: Option<String>,
    #[serde(default)]
    tags: HashMap<String, String>,
}

/// Parses ffprobe `-print_format json` output into an asset for `path`.
pub fn asset_from_probe_json(path: &Path, json: &str) -> Result<MediaAsset> {
    let fail = |reason: String| MediaError::ProbeFailure {
        path: path.to_path_buf(),
        reason,
    };
    let probe: ProbeOutput = serde_json::from_str(json).map_err(|e| fail(format!("unreadable probe output: {e}")))?;
    let format = probe
        .format
        .ok_or_else(|| fail("probe output has no format section".into()))?;

    let from_meta = format.format_name.as_deref().and_then(|name| {
        let brand = format
            .tags
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case("major_brand"))
            .map(|(_, v)| v.as_str());
        Container::from_probe(name, brand)
    });
    let container = from_meta
        .or_else(|| Container::from_path(path))
        .ok_or_else(|| MediaError::UnsupportedFormat {
            path: path.to_path_buf(),
            detail: format!(
                "container {:?} is outside the supported lists",
                format.format_name.as_deref().unwrap_or("?")
            ),
        })?;

    let duration_s: f64 = format
        .duration
        .as_deref()
        .ok_or_else(|| fail("probe output has no duration".into()))?
        .trim()
        .parse()
        .map_err(|e| fail(format!("bad duration: {e}")))?;
    if !(duration_s.is_finite() && duration_s >= 0.0) {
        return Err(fail(format!("bad duration {duration_s}")));
    }

    let is_type = |s: &ProbeStream, t: &str| s.codec_type.as_deref() == Some(t);
    let has_audio_stream = probe.streams.iter().any(|s| is_type(s, "audio"));
    let video = probe
        .streams
        .iter()
        .find(|s| is_type(s, "video") && s.disposition.get("attached_pic").copied().unwrap_or(0) == 0);

    match container.kind() {
        MediaKind::Video => {
            let stream = video.ok_or_else(|| fail("no video stream".into()))?;
            let (w, h) = match (stream.width, stream.height) {
                (Some(w), Some(h)) if w > 0 && h > 0 => (w, h),
                _ => return Err(fail("video stream lacks dimensions".into())),
            };
            Ok(MediaAsset {
                path: path.to_path_buf(),
                kind: MediaKind::Video,
                container,
                duration_s,
                has_audio_stream,
                width_px: Some(w),
                height_px: Some(h),
            })
        }
        MediaKind::Audio => {
            if !has_audio_stream {
                return Err(fail("no audio stream".into()));
            }
            Ok(MediaAsset {
                path: path.to_path_buf(),
                kind: MediaKind::Audio,
                container,
                duration_s,
                has_audio_stream,
                width_px: None,
                height_px: None,
            })
        }
    }
}

/// Runs the external probe / frame-extraction tool.
///
/// Calls touching the same file are serialized; distinct files proceed
/// concurrently.
#[derive(Debug, Default)]
pub struct MediaTool {
    pub probe: Option<CommandTemplate>,
    pub extract: Option<CommandTemplate>,
    locks: Mutex<HashMap<PathBuf, Arc<Mutex<()>>>>,
}

impl MediaTool {
    pub fn new(probe: CommandTemplate, extract: CommandTemplate) -> Self {
        Self {
            probe: Some(probe),
            extract: Some(extract),
            locks: Mutex::new(HashMap::new()),
        }
    }

    pub fn ffmpeg() -> Self {
        Self::new(CommandTemplate::ffprobe(), CommandTemplate::ffmpeg_frame())
    }

    fn lock_for(&self, path: &Path) -> Arc<Mutex<()>> {
        let mut locks = self.locks.lock().expect("media lock table poisoned");
        locks.entry(path.to_path_buf()).or_default().clone()
    }

    pub fn probe(&self, path: &Path) -> Result<MediaAsset> {
        let unsupported_ext = Container::from_path(path).is_none();
        let unsupported = || MediaError::UnsupportedFormat {
            path: path.to_path_buf(),
            detail: format!(
                "extension {:?} is outside the supported lists",
                path.extension()
                    .map(|e| e.to_string_lossy().into_owned())
                    .unwrap_or_default()
            ),
        };
        let fail = |reason: String| MediaError::ProbeFailure {
            path: path.to_path_buf(),
            reason,
        };
        if !path.is_file() {
            if unsupported_ext {
                return Err(unsupported());
            }
            return Err(fail("file does not exist or is not readable".into()));
        }
        let template = self
            .probe
            .as_ref()
            .ok_or_else(|| fail("no probe tool configured".into()))?;
        let lock = self.lock_for(path);
        let _guard = lock.lock().expect("media file lock poisoned");
        let input = path.to_string_lossy();
        let output = template.render(&[("input", &input)]).output();
        let output = match output {
            Ok(o) if o.status.success() => o,
            Ok(_) if unsupported_ext => return Err(unsupported()),
            Ok(o) => {
                return Err(fail(format!(
                    "tool exited with {}: {}",
                    o.status,
                    String::from_utf8_lossy(&o.stderr).trim()
                )))
            }
            Err(_) if unsupported_ext => return Err(unsupported()),
            Err(e) => return Err(fail(format!("cannot run {}: {e}", template.program))),
        };
        let text = String::from_utf8_lossy(&output.stdout);
        match asset_from_probe_json(path, &text) {
            Err(MediaError::ProbeFailure { .. }) if unsupported_ext => Err(unsupported()),
            other => other,
        }
    }

    /// Extracts one frame per planned timestamp into `out_dir`, reusing files
    /// that already exist. Returns the frame paths in plan order.
    pub fn extract_frames(&self, asset: &MediaAsset, plan: &FramePlan, out_dir: &Path) -> Result<Vec<PathBuf>> {
        self.extract_frames_with_ext(asset, plan, out_dir, "jpg")
    }

    pub fn extract_frames_with_ext(
        &self,
        asset: &MediaAsset,
        plan: &FramePlan,
        out_dir: &Path,
        ext: &str,
    ) -> Result<Vec<PathBuf>> {
        let lock = self.lock_for(&asset.path);
        let _guard = lock.lock().expect("media file lock poisoned");
        let mut frames = Vec::with_capacity(plan.timestamps_s.len());
        for &t in &plan.timestamps_s {
            let out = out_dir.join(frame_file_name(t, ext));
            if !out.is_file() {
                let fail = |reason: String| MediaError::Extraction {
                    path: asset.path.clone(),
                    timestamp_s: t,
                    reason,
                };
                let template = self
                    .extract
                    .as_ref()
                    .ok_or_else(|| fail("no extraction tool configured".into()))?;
                std::fs::create_dir_all(out_dir).map_err(|e| fail(e.to_string()))?;
                let status = template
                    .render(&[
                        ("input", &asset.path.to_string_lossy()),
                        ("timestamp", &format!("{t:.3}")),
                        ("output", &out.to_string_lossy()),
                    ])
                    .output()
                    .map_err(|e| fail(e.to_string()))?;
                if !status.status.success() || !out.is_file() {
                    return Err(fail(String::from_utf8_lossy(&status.stderr).trim().to_string()));
                }
            }
            frames.push(out);
        }
        Ok(frames)
    }
}

/// File name of the frame sampled at `t` seconds: zero-padded milliseconds.
pub fn frame_file_name(t: f64, ext: &str) -> String {
    format!("{:09}.{ext}", (t * 1000.0).round() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn video(duration_s: f64) -> MediaAsset {
        MediaAsset {
            path: "clip.mp4".into(),
            kind: MediaKind::Video,
            container: Container::Mp4,
            duration_s,
            has_audio_stream: true,
            width_px: Some(640),
            height_px: Some(360),
        }
    }

    #[test]
    fn extension_classification_covers_all_twelve() {
        let exts = [
            "mp4", "m4v", "mov", "wmv", "webm", "avi", "mpg", "3gp", "mp3", "wav", "m4a", "flac",
        ];
        let got: Vec<Container> = exts.iter().map(|e| Container::from_extension(e).unwrap()).collect();
        let mut expected: Vec<Container> = Container::VIDEO
            .iter()
            .chain(Container::AUDIO.iter())
            .copied()
            .collect();
        expected.sort();
        let mut sorted = got.clone();
        sorted.sort();
        assert_eq!(sorted, expected);
        assert_eq!(Container::from_extension("pdf"), None);
        assert_eq!(Container::from_extension("MKV"), None);
        assert_eq!(Container::from_extension("FLAC"), Some(Container::Flac));
    }

    #[test]
    fn probe_metadata_wins_over_extension() {
        assert_eq!(
            Container::from_probe("mov,mp4,m4a,3gp,3g2,mj2", Some("M4V ")),
            Some(Container::M4v)
        );
        assert_eq!(
            Container::from_probe("mov,mp4,m4a,3gp,3g2,mj2", Some("qt  ")),
            Some(Container::QuickTime)
        );
        assert_eq!(
            Container::from_probe("mov,mp4,m4a,3gp,3g2,mj2", Some("3gp5")),
            Some(Container::ThreeGpp)
        );
        assert_eq!(Container::from_probe("mov,mp4,m4a,3gp,3g2,mj2", None), None);
        assert_eq!(Container::from_probe("asf", None), Some(Container::Wmv));
        assert_eq!(Container::from_probe("matroska,webm", None), None);
    }

    #[test]
    fn frames_at_point_one_fps() {
        let plan = plan_frames(&video(60.0), 0.1).unwrap();
        assert_eq!(plan.timestamps_s, vec![0.0, 10.0, 20.0, 30.0, 40.0, 50.0]);
    }

    #[test]
    fn frames_fall_back_to_midpoint() {
        let plan = plan_frames(&video(60.0), 0.01).unwrap();
        assert_eq!(plan.timestamps_s, vec![30.0]);
    }

    #[test]
    fn frames_at_one_fps_on_shortest_video() {
        // brute-force grid: every integer second strictly below 11
        let mut expected = Vec::new();
        let mut t = 0u32;
        while (t as f64) < 11.0 {
            expected.push(t as f64);
            t += 1;
        }
        let plan = plan_frames(&video(11.0), 1.0).unwrap();
        assert_eq!(plan.timestamps_s, expected);
        assert_eq!(plan.timestamps_s.len(), 11);
    }

    #[test]
    fn frames_reject_audio_and_bad_fps() {
        let mut audio = video(10.0);
        audio.kind = MediaKind::Audio;
        assert!(matches!(plan_frames(&audio, 1.0), Err(MediaError::NotAVideo(_))));
        assert!(matches!(plan_frames(&video(10.0), 0.0), Err(MediaError::InvalidFps(_))));
        assert!(plan_frames(&video(0.0), 1.0).unwrap().timestamps_s.is_empty());
    }

    #[test]
    fn split_examples() {
        let hour = plan_split(&video(3600.0), 600.0, 0.0).unwrap();
        assert_eq!(hour.segments.len(), 6);
        assert_eq!(hour.segments[5], (3000.0, 3600.0));

        let short = plan_split(&video(100.0), 600.0, 0.0).unwrap();
        assert_eq!(short.segments, vec![(0.0, 100.0)]);

        let overlapped = plan_split(&video(1000.0), 600.0, 60.0).unwrap();
        assert_eq!(overlapped.segments, vec![(0.0, 600.0), (540.0, 1000.0)]);

        assert!(matches!(
            plan_split(&video(100.0), 60.0, 60.0),
            Err(MediaError::InvalidOverlap { .. })
        ));
    }

    #[test]
    fn probe_json_for_m4v_lecture() {
        let json = r#"{"streams":[{"codec_type":"video","width":1280,"height":720},{"codec_type":"audio"}],
            "format":{"format_name":"mov,mp4,m4a,3gp,3g2,mj2","duration":"120.000000","tags":{"major_brand":"M4V "}}}"#;
        let asset = asset_from_probe_json(Path::new("lecture.m4v"), json).unwrap();
        assert_eq!(asset.kind, MediaKind::Video);
        assert_eq!(asset.container, Container::M4v);
        assert_eq!(asset.duration_s, 120.0);
        assert_eq!((asset.width_px, asset.height_px), (Some(1280), Some(720)));
        assert!(asset.has_audio_stream);
    }

    #[test]
    fn probe_json_for_flac_talk() {
        let json = r#"{"streams":[{"codec_type":"audio"}],"format":{"format_name":"flac","duration":"42.5"}}"#;
        let asset = asset_from_probe_json(Path::new("talk.flac"), json).unwrap();
        assert_eq!(asset.kind, MediaKind::Audio);
        assert_eq!(asset.container, Container::Flac);
        assert_eq!(asset.width_px, None);
    }

    #[test]
    fn probe_json_rejects_video_without_stream() {
        let json = r#"{"streams":[{"codec_type":"audio"}],"format":{"format_name":"avi","duration":"5"}}"#;
        assert!(matches!(
            asset_from_probe_json(Path::new("x.avi"), json),
            Err(MediaError::ProbeFailure { .. })
        ));
    }

    #[test]
    fn command_template_roundtrips_through_json() {
        let t = CommandTemplate::ffmpeg_frame();
        let json = serde_json::to_string(&t).unwrap();
        assert!(json.starts_with("[\"ffmpeg\""));
        let back: CommandTemplate = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
    }
}
