use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::dataset::DurationClass;
use crate::parsing::{self, KeyframeParser, McqAnswer, OptionLetter, ParseError, ParsedVideoOutput};
use crate::providers::{ConditionTag, ModelResponse, ResponseStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RequestKind {
    Mcq,
    SummaryKeyframes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    AnsweredCorrect,
    AnsweredWrong,
    Unanswered,
    InvalidOutput,
    Oom,
    /// A summary/keyframe output that passed the validity gate.
    ValidOutput,
}

impl Outcome {
    pub fn is_answered(self) -> bool {
        matches!(self, Self::AnsweredCorrect | Self::AnsweredWrong)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Parsed {
    Mcq(McqAnswer),
    Video(ParsedVideoOutput),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordErrorKind {
    ProviderUnavailable,
    ReplayMiss,
    Media,
    Transcript,
    Malformed,
    Request,
}

/// Why a record carries no provider response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordError {
    pub kind: RecordErrorKind,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    /// `question_id` for MCQ records, the media key for summary records.
    pub item_ref: String,
    pub video_id: String,
    pub condition: ConditionTag,
    pub request_kind: RequestKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task_type: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_class: Option<DurationClass>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub answer_key: Option<OptionLetter>,
    pub response: ModelResponse,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parsed: Option<Parsed>,
    pub outcome: Outcome,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<RecordError>,
}

/// Derives the parsed payload and outcome from a response. Pure: stored
/// records can be re-classified from their raw responses.
pub fn classify(
    kind: RequestKind,
    response: &ModelResponse,
    answer_key: Option<OptionLetter>,
    parser: &KeyframeParser,
) -> (Option<Parsed>, Outcome) {
    match response.status {
        ResponseStatus::Oom => return (None, Outcome::Oom),
        ResponseStatus::Timeout => return (None, Outcome::Unanswered),
        ResponseStatus::Invalid => return (None, Outcome::InvalidOutput),
        ResponseStatus::Ok => {}
    }
    match kind {
        RequestKind::Mcq => match parsing::parse_mcq(&response.raw_text) {
            Ok(answer) => {
                let outcome = if Some(answer.letter) == answer_key {
                    Outcome::AnsweredCorrect
                } else {
                    Outcome::AnsweredWrong
                };
                (Some(Parsed::Mcq(answer)), outcome)
            }
            Err(ParseError::NoAnswerFound) => (None, Outcome::Unanswered),
            Err(_) => (None, Outcome::InvalidOutput),
        },
        RequestKind::SummaryKeyframes => {
            let parsed = parser.parse_video_output(&response.raw_text);
            let outcome = if parsed.valid {
                Outcome::ValidOutput
            } else {
                Outcome::InvalidOutput
            };
            (Some(Parsed::Video(parsed)), outcome)
        }
    }
}

impl RunRecord {
    /// Identity within a manifest: one record per (condition, kind, item).
    pub fn key(&self) -> RecordKey {
        RecordKey::new(&self.condition, self.request_kind, &self.item_ref)
    }

    pub fn mcq_answer(&self) -> Option<&McqAnswer> {
        match &self.parsed {
            Some(Parsed::Mcq(a)) => Some(a),
            _ => None,
        }
    }

    pub fn video_output(&self) -> Option<&ParsedVideoOutput> {
        match &self.parsed {
            Some(Parsed::Video(v)) => Some(v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RecordKey {
    pub condition: String,
    pub kind: RequestKind,
    pub item_ref: String,
}

impl RecordKey {
    pub fn new(condition: &ConditionTag, kind: RequestKind, item_ref: &str) -> Self {
        Self {
            condition: condition_key(condition),
            kind,
            item_ref: item_ref.to_string(),
        }
    }
}

/// Stable identity string for a condition.
pub fn condition_key(c: &ConditionTag) -> String {
    serde_json::to_string(c).expect("condition serializes")
}

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} line {line}: {detail}")]
    Format { path: PathBuf, line: usize, detail: String },
    #[error("duplicate record for {0:?}")]
    Duplicate(RecordKey),
    #[error("manifest is completed and immutable")]
    Completed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestHeader {
    pub dataset_path: String,
    pub conditions: Vec<ConditionTag>,
    pub providers: Vec<String>,
    /// Unix seconds; only set for live runs so replayed manifests stay
    /// byte-identical.
    #[serde(default)]
    pub started_at: Option<u64>,
    #[serde(default)]
    pub completed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum ManifestLine {
    Header(ManifestHeader),
    Record(Box<RunRecord>),
}

/// Header plus append-only records, stored as JSON lines.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub header: ManifestHeader,
    records: Vec<RunRecord>,
    keys: HashSet<RecordKey>,
}

impl RunManifest {
    pub fn new(header: ManifestHeader) -> Self {
        Self {
            header,
            records: Vec::new(),
            keys: HashSet::new(),
        }
    }

    pub fn records(&self) -> &[RunRecord] {
        &self.records
    }

    pub fn is_completed(&self) -> bool {
        self.header.completed
    }

    pub fn contains(&self, key: &RecordKey) -> bool {
        self.keys.contains(key)
    }

    pub fn push(&mut self, record: RunRecord) -> Result<(), ManifestError> {
        if self.header.completed {
            return Err(ManifestError::Completed);
        }
        let key = record.key();
        if !self.keys.insert(key.clone()) {
            return Err(ManifestError::Duplicate(key));
        }
        self.records.push(record);
        Ok(())
    }

    /// Sorts records by (condition position, kind, item_ref) and seals the
    /// manifest.
    pub fn complete(&mut self) {
        let order: Vec<String> = self.header.conditions.iter().map(condition_key).collect();
        let position = |c: &ConditionTag| {
            let k = condition_key(c);
            order.iter().position(|o| *o == k).unwrap_or(usize::MAX)
        };
        self.records.sort_by(|a, b| {
            (position(&a.condition), a.request_kind, &a.item_ref).cmp(&(
                position(&b.condition),
                b.request_kind,
                &b.item_ref,
            ))
        });
        self.header.completed = true;
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = header_line(&self.header);
        for r in &self.records {
            out.push_str(&record_line(r));
        }
        out
    }

    pub fn from_jsonl(text: &str, path: &Path) -> Result<Self, ManifestError> {
        let fmt_err = |line: usize, detail: String| ManifestError::Format {
            path: path.to_path_buf(),
            line,
            detail,
        };
        let mut manifest: Option<RunManifest> = None;
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let parsed: ManifestLine = serde_json::from_str(line).map_err(|e| fmt_err(i + 1, e.to_string()))?;
            match (parsed, manifest.as_mut()) {
                (ManifestLine::Header(h), None) => manifest = Some(RunManifest::new(h)),
                (ManifestLine::Header(_), Some(_)) => return Err(fmt_err(i + 1, "second header".into())),
                (ManifestLine::Record(_), None) => return Err(fmt_err(i + 1, "record before header".into())),
                (ManifestLine::Record(r), Some(m)) => {
                    let key = r.key();
                    if !m.keys.insert(key.clone()) {
                        return Err(ManifestError::Duplicate(key));
                    }
                    m.records.push(*r);
                }
            }
        }
        manifest.ok_or_else(|| fmt_err(0, "empty manifest".into()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ManifestError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| ManifestError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_jsonl(&text, path)
    }

    /// Writes atomically (temp file + rename).
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ManifestError> {
        let path = path.as_ref();
        let io = |source| ManifestError::Io {
            path: path.to_path_buf(),
            source,
        };
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).map_err(io)?;
        }
        let tmp = path.with_extension("jsonl.tmp");
        fs::write(&tmp, self.to_jsonl()).map_err(io)?;
        fs::rename(&tmp, path).map_err(io)
    }
}

pub(crate) fn header_line(h: &ManifestHeader) -> String {
    let mut s = serde_json::to_string(&ManifestLine::Header(h.clone())).expect("header serializes");
    s.push('\n');
    s
}

pub(crate) fn record_line(r: &RunRecord) -> String {
    let mut s = serde_json::to_string(&ManifestLine::Record(Box::new(r.clone()))).expect("record serializes");
    s.push('\n');
    s
}

/// Append-only journal of an in-progress run.
pub(crate) struct Journal {
    path: PathBuf,
    file: fs::File,
}

impl Journal {
    pub fn open(path: &Path, header: &ManifestHeader) -> Result<Self, ManifestError> {
        let io = |source| ManifestError::Io {
            path: path.to_path_buf(),
            source,
        };
        let fresh = !path.exists();
        let mut file = fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(io)?;
        if fresh {
            file.write_all(header_line(header).as_bytes()).map_err(io)?;
        }
        Ok(Self {
            path: path.to_path_buf(),
            file,
        })
    }

    pub fn append(&mut self, record: &RunRecord) -> Result<(), ManifestError> {
        self.file
            .write_all(record_line(record).as_bytes())
            .and_then(|_| self.file.flush())
            .map_err(|source| ManifestError::Io {
                path: self.path.clone(),
                source,
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::providers::AttentionKind;

    pub(crate) fn condition(with_transcript: bool) -> ConditionTag {
        ConditionTag {
            fps: 0.1,
            with_transcript,
            attention: AttentionKind::Sdpa,
            gpu: "A10G".into(),
            model_name: "qwen2-vl-7b".into(),
        }
    }

    fn record(item: &str, with_transcript: bool, text: &str) -> RunRecord {
        let response = ModelResponse::ok(text, 10);
        let (parsed, outcome) = classify(
            RequestKind::Mcq,
            &response,
            Some(OptionLetter::A),
            &KeyframeParser::default(),
        );
        RunRecord {
            item_ref: item.into(),
            video_id: "v".into(),
            condition: condition(with_transcript),
            request_kind: RequestKind::Mcq,
            task_type: Some("Counting Problem".into()),
            duration_class: Some(DurationClass::Short),
            answer_key: Some(OptionLetter::A),
            response,
            parsed,
            outcome,
            error: None,
        }
    }

    #[test]
    fn classification_table() {
        let p = KeyframeParser::default();
        let key = Some(OptionLetter::B);
        let mcq = |r: ModelResponse| classify(RequestKind::Mcq, &r, key, &p).1;
        assert_eq!(mcq(ModelResponse::failed(ResponseStatus::Oom, 1, "")), Outcome::Oom);
        assert_eq!(
            mcq(ModelResponse::failed(ResponseStatus::Timeout, 1, "")),
            Outcome::Unanswered
        );
        assert_eq!(
            mcq(ModelResponse::failed(ResponseStatus::Invalid, 1, "")),
            Outcome::InvalidOutput
        );
        assert_eq!(mcq(ModelResponse::ok("The answer is B.", 1)), Outcome::AnsweredCorrect);
        assert_eq!(mcq(ModelResponse::ok("C", 1)), Outcome::AnsweredWrong);
        assert_eq!(
            mcq(ModelResponse::ok("the options are unclear", 1)),
            Outcome::Unanswered
        );

        let video = |t: &str| classify(RequestKind::SummaryKeyframes, &ModelResponse::ok(t, 1), None, &p).1;
        assert_eq!(video("A dwarf sings.\n(00:08, Mirror)"), Outcome::ValidOutput);
        assert_eq!(video("(00:08, Mirror)"), Outcome::InvalidOutput);
    }

    #[test]
    fn duplicates_and_sealing() {
        let mut m = RunManifest::new(ManifestHeader {
            dataset_path: "dataset.json".into(),
            conditions: vec![condition(false), condition(true)],
            providers: vec!["qwen2-vl-7b".into()],
            started_at: None,
            completed: false,
        });
        m.push(record("001-2", true, "A")).unwrap();
        m.push(record("001-1", true, "B")).unwrap();
        m.push(record("001-2", false, "A")).unwrap();
        assert!(matches!(
            m.push(record("001-2", true, "C")),
            Err(ManifestError::Duplicate(_))
        ));
        m.complete();
        let order: Vec<_> = m
            .records()
            .iter()
            .map(|r| (r.condition.with_transcript, r.item_ref.as_str()))
            .collect();
        assert_eq!(order, vec![(false, "001-2"), (true, "001-1"), (true, "001-2")]);
        assert!(matches!(
            m.push(record("002-1", true, "A")),
            Err(ManifestError::Completed)
        ));

        let text = m.to_jsonl();
        let back = RunManifest::from_jsonl(&text, Path::new("m.jsonl")).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_jsonl(), text);
    }

    #[test]
    fn rejects_malformed_manifests() {
        let rec = record_line(&record("x", true, "A"));
        assert!(RunManifest::from_jsonl(&rec, Path::new("m")).is_err());
        assert!(RunManifest::from_jsonl("", Path::new("m")).is_err());
    }
}
