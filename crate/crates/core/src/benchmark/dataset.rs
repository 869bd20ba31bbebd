use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::parsing::OptionLetter;
use crate::providers::Transcript;
use crate::templates::{self, TemplateError};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read dataset {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("schema error in record {index}: {detail}")]
    Schema { index: usize, detail: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DurationClass {
    Short,
    Medium,
    Long,
}

impl DurationClass {
    pub const ALL: [DurationClass; 3] = [Self::Short, Self::Medium, Self::Long];

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "short" => Some(Self::Short),
            "medium" => Some(Self::Medium),
            "long" => Some(Self::Long),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Short => "short",
            Self::Medium => "medium",
            Self::Long => "long",
        }
    }
}

impl fmt::Display for DurationClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One multiple-choice question about one video.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchmarkItem {
    pub video_id: String,
    pub duration_class: DurationClass,
    pub domain: String,
    pub sub_category: String,
    pub url: String,
    /// Upstream video identifier (`videoID`), used to find the media file.
    pub video_key: String,
    pub question_id: String,
    pub task_type: String,
    pub question: String,
    pub options: BTreeMap<OptionLetter, String>,
    pub answer: OptionLetter,
}

fn field<'a>(obj: &'a serde_json::Map<String, Value>, name: &str, index: usize) -> Result<&'a str, DatasetError> {
    match obj.get(name) {
        Some(Value::String(s)) => Ok(s),
        Some(other) => Err(DatasetError::Schema {
            index,
            detail: format!("field {name:?} must be a string, got {other}"),
        }),
        None => Err(DatasetError::Schema {
            index,
            detail: format!("missing field {name:?}"),
        }),
    }
}

/// Accepts `{"A": "...", ...}` or `["A. ...", "B. ...", ...]`.
fn parse_options(value: &Value, index: usize) -> Result<BTreeMap<OptionLetter, String>, DatasetError> {
    let schema = |detail: String| DatasetError::Schema { index, detail };
    let mut options = BTreeMap::new();
    let mut insert = |letter: &str, text: &str| -> Result<(), DatasetError> {
        let mut chars = letter.trim().chars();
        let letter = match (chars.next().and_then(OptionLetter::from_char), chars.next()) {
            (Some(l), None) => l,
            _ => return Err(schema(format!("bad option label {letter:?}"))),
        };
        if options.insert(letter, text.trim().to_string()).is_some() {
            return Err(schema(format!("option {letter} given twice")));
        }
        Ok(())
    };
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let text = v
                    .as_str()
                    .ok_or_else(|| schema(format!("option {k} is not a string")))?;
                insert(k, text)?;
            }
        }
        Value::Array(list) => {
            for v in list {
                let s = v
                    .as_str()
                    .ok_or_else(|| schema(format!("option {v} is not a string")))?;
                let s = s.trim_start();
                let (label, rest) = s.split_at(s.char_indices().nth(1).map_or(s.len(), |(i, _)| i));
                let text = rest
                    .strip_prefix(['.', ')', ':'])
                    .ok_or_else(|| schema(format!("option {s:?} lacks an \"A.\" style label")))?;
                insert(label, text)?;
            }
        }
        _ => return Err(schema("options must be an object or a list".into())),
    }
    if options.len() != 4 {
        return Err(schema(format!("expected 4 options, found {}", options.len())));
    }
    Ok(options)
}

impl BenchmarkItem {
    pub fn from_json(value: &Value, index: usize) -> Result<Self, DatasetError> {
        let schema = |detail: String| DatasetError::Schema { index, detail };
        let obj = value
            .as_object()
            .ok_or_else(|| schema("record is not an object".into()))?;
        let duration = field(obj, "duration", index)?;
        let duration_class =
            DurationClass::parse(duration).ok_or_else(|| schema(format!("unknown duration {duration:?}")))?;
        let options = parse_options(
            obj.get("options")
                .ok_or_else(|| schema("missing field \"options\"".into()))?,
            index,
        )?;
        let answer_text = field(obj, "answer", index)?.trim();
        let answer = match answer_text.chars().collect::<Vec<_>>().as_slice() {
            [c] => OptionLetter::from_char(*c),
            _ => None,
        }
        .ok_or_else(|| schema(format!("answer {answer_text:?} is not one of A-D")))?;
        if !options.contains_key(&answer) {
            return Err(schema(format!("answer {answer} not among options")));
        }
        let video_id = field(obj, "video_id", index)?.to_string();
        let video_key = match obj.get("videoID") {
            Some(_) => field(obj, "videoID", index)?.to_string(),
            None => video_id.clone(),
        };
        let optional = |name: &str| obj.get(name).and_then(Value::as_str).unwrap_or_default().to_string();
        Ok(Self {
            video_id,
            duration_class,
            domain: optional("domain"),
            sub_category: optional("sub_category"),
            url: optional("url"),
            video_key,
            question_id: field(obj, "question_id", index)?.to_string(),
            task_type: field(obj, "task_type", index)?.to_string(),
            question: field(obj, "question", index)?.to_string(),
            options,
            answer,
        })
    }

    /// `A. ...\nB. ...` in letter order.
    pub fn options_block(&self) -> String {
        self.options
            .iter()
            .map(|(l, t)| format!("{l}. {t}"))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// Parses a JSON array or JSON-lines document of raw records.
pub fn parse_dataset(text: &str) -> Result<Vec<BenchmarkItem>, DatasetError> {
    let trimmed = text.trim_start();
    let values: Vec<Value> = if trimmed.starts_with('[') {
        serde_json::from_str(trimmed).map_err(|e| DatasetError::Schema {
            index: 0,
            detail: format!("invalid JSON: {e}"),
        })?
    } else {
        trimmed
            .lines()
            .filter(|l| !l.trim().is_empty())
            .enumerate()
            .map(|(i, l)| {
                serde_json::from_str(l).map_err(|e| DatasetError::Schema {
                    index: i,
                    detail: format!("invalid JSON line: {e}"),
                })
            })
            .collect::<Result<_, _>>()?
    };
    let mut seen = HashSet::new();
    let mut items = Vec::with_capacity(values.len());
    for (i, v) in values.iter().enumerate() {
        let item = BenchmarkItem::from_json(v, i)?;
        if !seen.insert(item.question_id.clone()) {
            return Err(DatasetError::Schema {
                index: i,
                detail: format!("duplicate question_id {:?}", item.question_id),
            });
        }
        items.push(item);
    }
    Ok(items)
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Vec<BenchmarkItem>, DatasetError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_dataset(&text)
}

/// Renders the MCQ prompt. The transcript block appears only when a
/// non-empty transcript is passed.
pub fn build_question_prompt(
    item: &BenchmarkItem,
    transcript: Option<&Transcript>,
    template: &str,
) -> Result<String, TemplateError> {
    templates::require(template, &["question", "options"])?;
    let text = transcript.map(|t| t.full_text.as_str()).unwrap_or_default();
    let options = item.options_block();
    templates::render(
        template,
        &[
            ("question", &item.question),
            ("options", &options),
            ("transcript", text),
        ],
        &[("transcript", !text.is_empty())],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::templates::DEFAULT_MCQ_TEMPLATE;
    use serde_json::json;

    fn synopsis_record() -> Value {
        json!({
            "video_id": "001",
            "duration": "Short",
            "domain": "Knowledge",
            "sub_category": "Humanity & History",
            "url": "https://www.youtube.com/watch?v=fFjy93ACGo8",
            "videoID": "fFjy93ACGo8",
            "question_id": "001-2",
            "task_type": "Information Synopsis",
            "question": "What is the genre of this video?",
            "options": [
                "A. It is a news report that introduces the history behind Christmas decorations.",
                "B. It is a documentary on the evolution of Christmas holiday recipes.",
                "C. It is a travel vlog exploring Christmas markets around the world.",
                "D. It is a tutorial on DIY Christmas ornament crafting."
            ],
            "answer": "A"
        })
    }

    #[test]
    fn loads_synopsis_record() {
        let item = BenchmarkItem::from_json(&synopsis_record(), 0).unwrap();
        assert_eq!(item.question_id, "001-2");
        assert_eq!(item.answer, OptionLetter::A);
        assert_eq!(item.duration_class, DurationClass::Short);
        assert_eq!(item.video_key, "fFjy93ACGo8");
        assert_eq!(item.task_type, "Information Synopsis");
        assert_eq!(
            item.options[&OptionLetter::C],
            "It is a travel vlog exploring Christmas markets around the world."
        );
    }

    #[test]
    fn map_options_are_accepted() {
        let mut rec = synopsis_record();
        rec["options"] = json!({"A": "a", "B": "b", "C": "c", "D": "d"});
        let item = BenchmarkItem::from_json(&rec, 0).unwrap();
        assert_eq!(item.options_block(), "A. a\nB. b\nC. c\nD. d");
    }

    #[test]
    fn schema_violations() {
        let mut three = synopsis_record();
        three["options"].as_array_mut().unwrap().pop();
        assert!(matches!(
            BenchmarkItem::from_json(&three, 0),
            Err(DatasetError::Schema { .. })
        ));

        let mut bad_answer = synopsis_record();
        bad_answer["answer"] = json!("E");
        assert!(BenchmarkItem::from_json(&bad_answer, 0).is_err());

        let mut missing = synopsis_record();
        missing.as_object_mut().unwrap().remove("question_id");
        assert!(BenchmarkItem::from_json(&missing, 0).is_err());

        let mut duration = synopsis_record();
        duration["duration"] = json!("epic");
        assert!(BenchmarkItem::from_json(&duration, 0).is_err());

        let dup = json!([synopsis_record(), synopsis_record()]).to_string();
        assert!(parse_dataset(&dup).is_err());
    }

    #[test]
    fn json_lines_and_array_agree() {
        let mut second = synopsis_record();
        second["question_id"] = json!("001-3");
        let array = json!([synopsis_record(), second.clone()]).to_string();
        let lines = format!("{}\n\n{}\n", synopsis_record(), second);
        assert_eq!(parse_dataset(&array).unwrap(), parse_dataset(&lines).unwrap());
    }

    #[test]
    fn distinct_videos_in_large_file() {
        let rows: Vec<Value> = (0..2700)
            .map(|i| {
                let mut r = synopsis_record();
                r["video_id"] = json!(format!("{:03}", i / 3 + 1));
                r.as_object_mut().unwrap().remove("videoID");
                r["question_id"] = json!(format!("{:03}-{}", i / 3 + 1, i % 3 + 1));
                r
            })
            .collect();
        let items = parse_dataset(&Value::Array(rows).to_string()).unwrap();
        assert_eq!(items.len(), 2700);
        let videos: HashSet<_> = items.iter().map(|i| i.video_key.as_str()).collect();
        assert_eq!(videos.len(), 900);
    }

    #[test]
    fn question_prompt_transcript_rules() {
        let item = BenchmarkItem::from_json(&synopsis_record(), 0).unwrap();
        let bare = build_question_prompt(&item, None, DEFAULT_MCQ_TEMPLATE).unwrap();
        for text in item.options.values() {
            assert!(bare.contains(text.as_str()));
        }
        let transcript = Transcript::from_segments(
            vec![crate::providers::TranscriptSegment {
                id: 0,
                start_s: 0.0,
                end_s: 2.0,
                text: " Deck the halls".into(),
            }],
            None,
        )
        .unwrap();
        let with = build_question_prompt(&item, Some(&transcript), DEFAULT_MCQ_TEMPLATE).unwrap();
        assert!(with.contains("Deck the halls"));
        assert!(with.ends_with(&bare));
        let empty = build_question_prompt(&item, Some(&Transcript::empty()), DEFAULT_MCQ_TEMPLATE).unwrap();
        assert_eq!(empty, bare);
        assert!(matches!(
            build_question_prompt(&item, None, "Question only: {question}"),
            Err(TemplateError::MissingPlaceholder(_))
        ));
    }
}
