use serde::{Deserialize, Serialize};

/// One timed ASR segment, Whisper `verbose_json` style.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptSegment {
    pub id: u32,
    #[serde(rename = "start")]
    pub start_s: f64,
    #[serde(rename = "end")]
    pub end_s: f64,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub segments: Vec<TranscriptSegment>,
    pub full_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub language: Option<String>,
}

impl Transcript {
    pub fn empty() -> Self {
        Self {
            segments: Vec::new(),
            full_text: String::new(),
            language: None,
        }
    }

    /// Builds a transcript from ordered segments, checking ordering and
    /// deriving `full_text` from the segment texts.
    pub fn from_segments(segments: Vec<TranscriptSegment>, language: Option<String>) -> Result<Self, String> {
        for (i, seg) in segments.iter().enumerate() {
            if !(seg.start_s.is_finite() && seg.end_s.is_finite()) || seg.start_s > seg.end_s {
                return Err(format!(
                    "segment {} has start {} > end {}",
                    seg.id, seg.start_s, seg.end_s
                ));
            }
            if i > 0 {
                let prev = &segments[i - 1];
                if seg.id <= prev.id || seg.start_s < prev.start_s {
                    return Err(format!("segment {} is out of order", seg.id));
                }
            }
        }
        let concat: String = segments.iter().map(|s| s.text.as_str()).collect();
        Ok(Self {
            full_text: normalize_whitespace(&concat),
            segments,
            language,
        })
    }
}

/// Collapses whitespace runs to one space and trims the ends.
pub fn normalize_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[derive(Deserialize)]
struct AsrBody {
    segments: Option<Vec<TranscriptSegment>>,
    #[serde(default)]
    language: Option<String>,
}

/// Parses a Whisper-style JSON body: `{"text", "segments": [{id, start, end, text}], "language"}`.
pub fn parse_asr_output(raw: &str) -> Result<Transcript, String> {
    let body: AsrBody = serde_json::from_str(raw).map_err(|e| format!("not ASR JSON: {e}"))?;
    let segments = body.segments.ok_or("ASR output has no segments array")?;
    Transcript::from_segments(segments, body.language)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_out_of_order_segments() {
        let raw = r#"{"segments":[{"id":0,"start":5,"end":6,"text":"a"},{"id":1,"start":1,"end":2,"text":"b"}]}"#;
        assert!(parse_asr_output(raw).is_err());
        let raw = r#"{"segments":[{"id":0,"start":5,"end":4,"text":"a"}]}"#;
        assert!(parse_asr_output(raw).is_err());
        assert!(parse_asr_output(r#"{"text":"hello"}"#).is_err());
    }

    #[test]
    fn two_segment_concatenation() {
        let raw = r#"{"segments":[{"id":0,"start":0,"end":1.5,"text":" Hello  there"},{"id":1,"start":1.5,"end":3,"text":" general\nKenobi "}]}"#;
        let t = parse_asr_output(raw).unwrap();
        assert_eq!(t.full_text, "Hello there general Kenobi");
    }

    proptest! {
        #[test]
        fn full_text_is_normalized_concatenation(texts in proptest::collection::vec("[ a-z\n]{0,12}", 0..8)) {
            let segments: Vec<TranscriptSegment> = texts.iter().enumerate().map(|(i, t)| TranscriptSegment {
                id: i as u32, start_s: i as f64, end_s: i as f64 + 0.5, text: t.clone(),
            }).collect();
            let t = Transcript::from_segments(segments, None).unwrap();
            let oracle = texts.concat().split_whitespace().collect::<Vec<_>>().join(" ");
            prop_assert_eq!(t.full_text, oracle);
        }
    }
}
