//! Structured extraction from free-form model text.
//!
//! Models are asked for keyframes as `(00:00, caption)` but routinely drift to
//! `00:00 - caption`, `00:00 caption`, `(00:07) caption`, or several entries
//! run together on one line. The keyframe scanner accepts all of these.

use std::fmt;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("bad timestamp {0:?}")]
    BadTimestamp(String),
    #[error("keyframe caption is empty")]
    EmptyCaption,
    #[error("keyframe timestamp {0}s is out of range")]
    TimestampOutOfRange(u32),
    #[error("no answer letter found")]
    NoAnswerFound,
}

pub type Result<T> = std::result::Result<T, ParseError>;

/// Keyframe timestamps stay below 99:59:59.
pub const MAX_TIMESTAMP_S: u32 = 359_999;
pub const DEFAULT_MAX_CAPTION_CHARS: usize = 500;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KeyframeEntry {
    pub timestamp_s: u32,
    pub caption: String,
}

impl KeyframeEntry {
    pub fn new(timestamp_s: u32, caption: impl AsRef<str>) -> Result<Self> {
        if timestamp_s >= MAX_TIMESTAMP_S {
            return Err(ParseError::TimestampOutOfRange(timestamp_s));
        }
        let caption = caption.as_ref().replace(['\r', '\n'], " ").trim().to_string();
        if caption.is_empty() {
            return Err(ParseError::EmptyCaption);
        }
        Ok(Self { timestamp_s, caption })
    }

    /// Renders in the requested `(MM:SS, caption)` form.
    pub fn to_paren_line(&self) -> String {
        format!("({}, {})", format_timestamp(self.timestamp_s), self.caption)
    }

    /// Renders in the `MM:SS - caption` form models tend to produce.
    pub fn to_dash_line(&self) -> String {
        format!("{} - {}", format_timestamp(self.timestamp_s), self.caption)
    }
}

impl fmt::Display for KeyframeEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", format_timestamp(self.timestamp_s), self.caption)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedVideoOutput {
    pub summary: String,
    pub keyframes: Vec<KeyframeEntry>,
    pub valid: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OptionLetter {
    A,
    B,
    C,
    D,
}

impl OptionLetter {
    pub const ALL: [OptionLetter; 4] = [OptionLetter::A, OptionLetter::B, OptionLetter::C, OptionLetter::D];

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'A' => Some(Self::A),
            'B' => Some(Self::B),
            'C' => Some(Self::C),
            'D' => Some(Self::D),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Self::A => 'A',
            Self::B => 'B',
            Self::C => 'C',
            Self::D => 'D',
        }
    }
}

impl fmt::Display for OptionLetter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnswerSource {
    /// Stated with an "answer is X" / "Answer: X" pattern.
    Explicit,
    /// A bare standalone letter.
    Extracted,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McqAnswer {
    pub letter: OptionLetter,
    pub confidence_source: AnswerSource,
}

/// Formats seconds as `MM:SS`, or `HH:MM:SS` from one hour on.
pub fn format_timestamp(seconds: u32) -> String {
    let (h, m, s) = (seconds / 3600, (seconds / 60) % 60, seconds % 60);
    if h > 0 {
        format!("{h:02}:{m:02}:{s:02}")
    } else {
        format!("{m:02}:{s:02}")
    }
}

/// Parses `MM:SS` or `HH:MM:SS`; the leading field has one or two digits and
/// every following field exactly two.
pub fn parse_timestamp(text: &str) -> Result<u32> {
    let bad = || ParseError::BadTimestamp(text.to_string());
    let parts: Vec<&str> = text.trim().split(':').collect();
    if !(2..=3).contains(&parts.len()) {
        return Err(bad());
    }
    let all_digits = |p: &str| !p.is_empty() && p.bytes().all(|b| b.is_ascii_digit());
    if !parts.iter().all(|p| all_digits(p)) {
        return Err(bad());
    }
    if parts[0].len() > 2 || parts[1..].iter().any(|p| p.len() != 2) {
        return Err(bad());
    }
    let nums: Vec<u32> = parts.iter().map(|p| p.parse::<u32>().unwrap()).collect();
    let (h, m, s) = match nums.as_slice() {
        [m, s] => (0, *m, *s),
        [h, m, s] => (*h, *m, *s),
        _ => unreachable!(),
    };
    if m >= 60 || s >= 60 {
        return Err(bad());
    }
    Ok(3600 * h + 60 * m + s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum AnchorKind {
    /// `(MM:SS, caption)`
    ParenComma,
    /// `(MM:SS) caption` or `[MM:SS] caption`
    ParenClosed,
    /// `MM:SS caption` at the start of a line, after optional bullets
    LineStart,
    /// `... MM:SS - caption` in the middle of a line
    InlineDash,
}

#[derive(Debug)]
struct Anchor {
    timestamp_s: u32,
    /// Where the previous anchor's caption stops.
    start: usize,
    caption_start: usize,
    kind: AnchorKind,
}

fn timestamp_token_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\d+(?::\d+)+").unwrap())
}

fn bullet_prefix_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^\s*(?:(?:[-*•>#]+|\d+[.)])\s*)*(?:\*\*|__)?\s*$").unwrap())
}

fn header_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)^\s*[-#>*_\s]*key\s*-?\s*frames?\b").unwrap())
}

fn anchors_in_line(line: &str) -> Vec<Anchor> {
    let mut anchors = Vec::new();
    for m in timestamp_token_re().find_iter(line) {
        let Ok(timestamp_s) = parse_timestamp(m.as_str()) else {
            continue;
        };
        let before = &line[..m.start()];
        let after = &line[m.end()..];
        let before_trim = before.trim_end();
        let after_trim = after.trim_start();
        let after_offset = m.end() + (after.len() - after_trim.len());

        if before_trim.ends_with('(') || before_trim.ends_with('[') {
            let open = before_trim.len() - 1;
            if after_trim.starts_with(',') {
                anchors.push(Anchor {
                    timestamp_s,
                    start: open,
                    caption_start: after_offset + 1,
                    kind: AnchorKind::ParenComma,
                });
                continue;
            }
            if after_trim.starts_with(')') || after_trim.starts_with(']') {
                anchors.push(Anchor {
                    timestamp_s,
                    start: open,
                    caption_start: after_offset + 1,
                    kind: AnchorKind::ParenClosed,
                });
                continue;
            }
            continue;
        }

        // Tokens glued to letters ("00:08abc") are not anchors.
        if after.chars().next().is_some_and(|c| c.is_alphanumeric()) {
            continue;
        }
        if bullet_prefix_re().is_match(before) {
            anchors.push(Anchor {
                timestamp_s,
                start: m.start(),
                caption_start: m.end(),
                kind: AnchorKind::LineStart,
            });
            continue;
        }
        let after_bold = after_trim.trim_start_matches('*').trim_start();
        let dash = ['-', '–', '—'];
        if let Some(c) = after_bold.chars().next() {
            if dash.contains(&c) && after_bold[c.len_utf8()..].starts_with(char::is_whitespace) {
                anchors.push(Anchor {
                    timestamp_s,
                    start: m.start(),
                    caption_start: m.end(),
                    kind: AnchorKind::InlineDash,
                });
            }
        }
    }
    anchors
}

fn clean_caption(raw: &str, kind: AnchorKind, max_chars: usize) -> String {
    let mut c = raw.trim();
    if kind == AnchorKind::ParenComma {
        c = c
            .strip_suffix(')')
            .or_else(|| c.strip_suffix(']'))
            .unwrap_or(c)
            .trim_end();
    }
    let leading: &[char] = &['*', '_', '-', '–', '—', ':', ',', ' ', '\t'];
    c = c.trim_start_matches(leading);
    c = c.strip_suffix("**").unwrap_or(c).trim_end();
    if c.chars().count() > max_chars {
        c.chars().take(max_chars).collect::<String>().trim_end().to_string()
    } else {
        c.to_string()
    }
}

/// Keyframe extraction with a configurable caption length bound.
#[derive(Debug, Clone, Copy)]
pub struct KeyframeParser {
    pub max_caption_chars: usize,
}

impl Default for KeyframeParser {
    fn default() -> Self {
        Self {
            max_caption_chars: DEFAULT_MAX_CAPTION_CHARS,
        }
    }
}

impl KeyframeParser {
    pub fn parse(&self, raw_text: &str) -> Vec<KeyframeEntry> {
        let mut out: Vec<KeyframeEntry> = Vec::new();
        for line in raw_text.lines() {
            let anchors = anchors_in_line(line);
            for (i, a) in anchors.iter().enumerate() {
                let end = anchors.get(i + 1).map_or(line.len(), |next| next.start);
                if a.caption_start > end {
                    continue;
                }
                let caption = clean_caption(&line[a.caption_start..end], a.kind, self.max_caption_chars);
                let Ok(entry) = KeyframeEntry::new(a.timestamp_s, caption) else {
                    continue;
                };
                if !out.contains(&entry) {
                    out.push(entry);
                }
            }
        }
        out
    }

    pub fn parse_video_output(&self, raw_text: &str) -> ParsedVideoOutput {
        let mut boundary = raw_text.len();
        let mut header_found = false;
        let mut offset = 0;
        for line in raw_text.split_inclusive('\n') {
            if header_re().is_match(line) {
                header_found = true;
                boundary = offset;
                break;
            }
            if let Some(first) = anchors_in_line(line).first() {
                boundary = offset + first.start;
                break;
            }
            offset += line.len();
        }
        let summary = strip_summary_label(raw_text[..boundary].trim()).to_string();
        let keyframes = self.parse(&raw_text[boundary..]);
        let valid = !summary.is_empty() && !(header_found && keyframes.is_empty());
        ParsedVideoOutput {
            summary,
            keyframes,
            valid,
        }
    }
}

fn strip_summary_label(s: &str) -> &str {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| Regex::new(r"(?i)^[*_#\s]*summary[*_]*\s*:[*_]*\s*").unwrap());
    match re.find(s) {
        Some(m) => s[m.end()..].trim(),
        None => s,
    }
}

/// Extracts keyframe entries in source order, dropping duplicate
/// `(timestamp, caption)` pairs. Lines without a recognizable timestamp are
/// skipped.
pub fn parse_keyframes(raw_text: &str) -> Vec<KeyframeEntry> {
    KeyframeParser::default().parse(raw_text)
}

/// Splits a summary-plus-keyframes response. The summary is everything before
/// the first keyframe entry or "Key Frames" header.
pub fn parse_video_output(raw_text: &str) -> ParsedVideoOutput {
    KeyframeParser::default().parse_video_output(raw_text)
}

pub fn parse_mcq(raw_text: &str) -> Result<McqAnswer> {
    static EXPLICIT: OnceLock<Regex> = OnceLock::new();
    static BARE: OnceLock<Regex> = OnceLock::new();
    let explicit = EXPLICIT.get_or_init(|| {
        Regex::new(
            r"(?i)\b(?:answer|option|choice)\b[^A-Za-z0-9\n]{0,3}(?:is|would be|should be)?[\s:\-]*[(\[]?\s*((?-i:[A-D]))\s*[)\]]?(?:[^A-Za-z0-9]|$)",
        )
        .unwrap()
    });
    let bare = BARE.get_or_init(|| Regex::new(r"(?:^|[^A-Za-z0-9])[(\[]?([A-D])(?:[)\].:,]|\s*$)").unwrap());
    let pick = |re: &Regex, source: AnswerSource| {
        re.captures(raw_text).map(|c| McqAnswer {
            letter: OptionLetter::from_char(c[1].chars().next().unwrap()).unwrap(),
            confidence_source: source,
        })
    };
    pick(explicit, AnswerSource::Explicit)
        .or_else(|| pick(bare, AnswerSource::Extracted))
        .ok_or(ParseError::NoAnswerFound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn timestamps() {
        assert_eq!(parse_timestamp("01:27"), Ok(87));
        assert_eq!(parse_timestamp("00:00"), Ok(0));
        assert_eq!(parse_timestamp("1:02:03"), Ok(3723));
        assert_eq!(parse_timestamp("9:05"), Ok(545));
        for bad in ["01:60", "60:00", "1:2", "aa:bb", "123:00", "1:02:03:04", ""] {
            assert!(parse_timestamp(bad).is_err(), "{bad}");
        }
    }

    // Digit-by-digit evaluator, independent of the split-based parser.
    fn brute_seconds(s: &str) -> u32 {
        let mut total = 0u32;
        let mut field = 0u32;
        for ch in s.chars() {
            if ch == ':' {
                total = total * 60 + field;
                field = 0;
            } else {
                field = field * 10 + ch.to_digit(10).unwrap();
            }
        }
        total * 60 + field
    }

    #[test]
    fn timestamp_matches_brute_force() {
        assert_eq!(brute_seconds("1:02:03"), 3723);
        for h in [0u32, 1, 9, 12, 99] {
            for m in [0u32, 7, 59] {
                for s in [0u32, 30, 59] {
                    let text = if h == 0 {
                        format!("{m:02}:{s:02}")
                    } else {
                        format!("{h}:{m:02}:{s:02}")
                    };
                    assert_eq!(parse_timestamp(&text), Ok(brute_seconds(&text)), "{text}");
                }
            }
        }
    }

    #[test]
    fn keyframe_formats() {
        let text = "Summary first.\n(00:08, Magic Mirror)\n01:27 - Dopey dancing\n02:17 Snow White with basket\n- **03:42**: At a wishing well\nNo timestamp here\n";
        let kf = parse_keyframes(text);
        let got: Vec<(u32, &str)> = kf.iter().map(|k| (k.timestamp_s, k.caption.as_str())).collect();
        assert_eq!(
            got,
            vec![
                (8, "Magic Mirror"),
                (87, "Dopey dancing"),
                (137, "Snow White with basket"),
                (222, "At a wishing well"),
            ]
        );
    }

    #[test]
    fn keyframes_run_together_on_one_line() {
        let text =
            "Key Frames:(00:07) Introduction to pCR.(00:19) Progress in systemic treatments. (00:24) Rates (50-60%).";
        let kf = parse_keyframes(text);
        assert_eq!(kf.len(), 3);
        assert_eq!(kf[0], KeyframeEntry::new(7, "Introduction to pCR.").unwrap());
        assert_eq!(kf[2].caption, "Rates (50-60%).");

        let inline = "Key Frames with Captions: 00:00 - Introduction: a box. 01:00 - Organ Highlighting: liver.";
        let kf = parse_keyframes(inline);
        assert_eq!(kf.len(), 2);
        assert_eq!(kf[1].timestamp_s, 60);
        assert_eq!(kf[1].caption, "Organ Highlighting: liver.");
    }

    #[test]
    fn keyframes_ignore_prose_times_and_dedupe() {
        assert!(parse_keyframes("The meeting starts at 10:30 sharp.").is_empty());
        assert!(parse_keyframes("").is_empty());
        let dup = "00:08 Mirror\n00:08 Mirror\n00:08 Mirror again";
        assert_eq!(parse_keyframes(dup).len(), 2);
    }

    #[test]
    fn paren_caption_keeps_inner_parentheses() {
        let kf = parse_keyframes("(00:08, Snow White (young))");
        assert_eq!(kf[0].caption, "Snow White (young)");
    }

    #[test]
    fn captions_are_truncated() {
        let long = "x".repeat(800);
        let kf = parse_keyframes(&format!("00:01 {long}"));
        assert_eq!(kf[0].caption.chars().count(), DEFAULT_MAX_CAPTION_CHARS);
        let short = KeyframeParser { max_caption_chars: 10 }.parse(&format!("00:01 {long}"));
        assert_eq!(short[0].caption.len(), 10);
    }

    #[test]
    fn video_output_split() {
        let text = "Summary: A stage play.\n\nKey Frames:\n00:08 Mirror\n00:42 Rags";
        let out = parse_video_output(text);
        assert_eq!(out.summary, "A stage play.");
        assert_eq!(out.keyframes.len(), 2);
        assert!(out.valid);

        let empty = parse_video_output("");
        assert!(!empty.valid);

        let header_only = parse_video_output("A summary.\nKey Frames:\nnothing parseable");
        assert!(!header_only.valid);

        let no_frames = parse_video_output("Just a summary without any frames.");
        assert!(no_frames.valid);
        assert!(no_frames.keyframes.is_empty());
    }

    #[test]
    fn summary_stops_at_inline_anchor() {
        let out = parse_video_output("A demo video. (00:05, First scene) (00:10, Second scene)");
        assert_eq!(out.summary, "A demo video.");
        assert_eq!(out.keyframes.len(), 2);
    }

    #[test]
    fn mcq_answers() {
        assert_eq!(
            parse_mcq("The answer is A."),
            Ok(McqAnswer {
                letter: OptionLetter::A,
                confidence_source: AnswerSource::Explicit
            })
        );
        assert_eq!(
            parse_mcq("B"),
            Ok(McqAnswer {
                letter: OptionLetter::B,
                confidence_source: AnswerSource::Extracted
            })
        );
        assert_eq!(parse_mcq("the options are unclear"), Err(ParseError::NoAnswerFound));
        assert_eq!(parse_mcq("Answer: (C)").unwrap().letter, OptionLetter::C);
        assert_eq!(parse_mcq("A. It is a news report.").unwrap().letter, OptionLetter::A);
        assert_eq!(
            parse_mcq("A man walks in; the best answer is D").unwrap().letter,
            OptionLetter::D
        );
        assert_eq!(parse_mcq("the answer is a bit unclear"), Err(ParseError::NoAnswerFound));
        assert_eq!(parse_mcq("E."), Err(ParseError::NoAnswerFound));
    }

    fn caption_strategy() -> impl Strategy<Value = String> {
        "[A-Za-z][A-Za-z0-9 ,.'&()-]{0,40}[A-Za-z0-9.]"
    }

    proptest! {
        #[test]
        fn entry_roundtrips_in_both_formats(ts in 0u32..MAX_TIMESTAMP_S, caption in caption_strategy()) {
            let entry = KeyframeEntry::new(ts, &caption).unwrap();
            for line in [entry.to_paren_line(), entry.to_dash_line()] {
                let parsed = parse_keyframes(&line);
                prop_assert_eq!(parsed, vec![entry.clone()], "line {}", line);
            }
        }

        #[test]
        fn mcq_never_leaves_the_option_set(text in ".{0,80}") {
            if let Ok(ans) = parse_mcq(&text) {
                prop_assert!(OptionLetter::ALL.contains(&ans.letter));
            }
        }
    }
}
