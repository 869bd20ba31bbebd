//! Prompt templates.
//!
//! Templates use `{name}` placeholders and `{#name}...{/name}` optional
//! sections. A section is kept only when its switch is on; this is how the
//! with/without-transcript manipulation becomes a pure prompt difference.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TemplateError {
    #[error("template is missing required placeholder {{{0}}}")]
    MissingPlaceholder(String),
    #[error("unbalanced section {{#{0}}}")]
    UnbalancedSection(String),
}

/// Summary prompt used with GPT-4 Turbo (frames sent as sampled images).
pub const SUMMARY_PROMPT_GPT4_TURBO: &str = "Could you please provide a summary of this video based on sample frames focusing on the content and workflow rather than specific logos or the color of text? After summarizing, list the key frames with brief captions in the format (00:00, caption). Ensure the analysis is accurate and avoid including any assumptions or extrapolations. Use an expert domain perspective to enhance relevance and precision. Do not repeat sentences or focus on QR codes or logos.";

/// Summary prompt used with Qwen2-VL-7B.
pub const SUMMARY_PROMPT_QWEN2_VL: &str = "Could you please provide a summary of this video, focusing on the content and workflow rather than specific logos or the color of text? After summarizing, list the key frames with brief captions in the format (00:00, caption). Ensure the analysis is accurate and avoid including any assumptions or extrapolations. Use an expert domain perspective to enhance relevance and precision. Do not repeat sentences or focus on QR codes or logos.";

/// Summary prompt used with Gemini 2.0 Flash (same wording as Qwen2-VL).
pub const SUMMARY_PROMPT_GEMINI_FLASH: &str = SUMMARY_PROMPT_QWEN2_VL;

pub const DEFAULT_MCQ_TEMPLATE: &str = "{#transcript}Transcript of the video's audio track:\n{transcript}\n\n{/transcript}Select the best answer to the following multiple-choice question based on the video. Respond with only the letter (A, B, C, or D) of the correct option.\nQuestion: {question}\nOptions:\n{options}\nThe best answer is:";

pub const DEFAULT_REFINE_TEMPLATE: &str = "Improve the following video summary and keyframe captions. Keep the same structure: a summary paragraph followed by key frames in the format (00:00, caption).{#transcript} Use the voice-over transcription below to correct terminology and add details that are stated in the audio; do not invent timestamps.\n\nTranscription:\n{transcript}{/transcript}\n\nVideo summary:\n{summary}";

/// The per-run template set. Missing entries fall back to the defaults.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PromptTemplates {
    pub mcq: String,
    pub summary: String,
    pub refine: String,
}

impl Default for PromptTemplates {
    fn default() -> Self {
        Self {
            mcq: DEFAULT_MCQ_TEMPLATE.to_string(),
            summary: format!("{{#transcript}}Transcript of the video's audio track:\n{{transcript}}\n\n{{/transcript}}{SUMMARY_PROMPT_QWEN2_VL}"),
            refine: DEFAULT_REFINE_TEMPLATE.to_string(),
        }
    }
}

pub fn require(template: &str, names: &[&str]) -> Result<(), TemplateError> {
    for name in names {
        if !template.contains(&format!("{{{name}}}")) {
            return Err(TemplateError::MissingPlaceholder(name.to_string()));
        }
    }
    Ok(())
}

/// Renders `template`: sections are resolved first, then placeholders.
/// Unknown `{...}` text is left untouched.
pub fn render(template: &str, vars: &[(&str, &str)], sections: &[(&str, bool)]) -> Result<String, TemplateError> {
    let mut text = template.to_string();
    for (name, keep) in sections {
        let open = format!("{{#{name}}}");
        let close = format!("{{/{name}}}");
        while let Some(start) = text.find(&open) {
            let Some(rel_end) = text[start..].find(&close) else {
                return Err(TemplateError::UnbalancedSection(name.to_string()));
            };
            let end = start + rel_end;
            let inner = text[start + open.len()..end].to_string();
            let replacement = if *keep { inner } else { String::new() };
            text.replace_range(start..end + close.len(), &replacement);
        }
        if text.contains(&close) {
            return Err(TemplateError::UnbalancedSection(name.to_string()));
        }
    }
    // Single pass so substituted values are never re-scanned for placeholders.
    let mut out = String::with_capacity(text.len());
    let mut rest = text.as_str();
    'scan: while let Some(pos) = rest.find('{') {
        out.push_str(&rest[..pos]);
        let tail = &rest[pos..];
        for (name, value) in vars {
            let token = format!("{{{name}}}");
            if tail.starts_with(&token) {
                out.push_str(value);
                rest = &tail[token.len()..];
                continue 'scan;
            }
        }
        out.push('{');
        rest = &tail[1..];
    }
    out.push_str(rest);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_toggle() {
        let t = "a{#x} [{v}]{/x} b {v}";
        assert_eq!(render(t, &[("v", "1")], &[("x", true)]).unwrap(), "a [1] b 1");
        assert_eq!(render(t, &[("v", "1")], &[("x", false)]).unwrap(), "a b 1");
    }

    #[test]
    fn values_are_not_rescanned() {
        let out = render("{a} {b}", &[("a", "{b}"), ("b", "x")], &[]).unwrap();
        assert_eq!(out, "{b} x");
        assert_eq!(render("json {\"k\": 1}", &[], &[]).unwrap(), "json {\"k\": 1}");
    }

    #[test]
    fn unbalanced_section_is_an_error() {
        assert_eq!(
            render("{#x} open", &[], &[("x", true)]),
            Err(TemplateError::UnbalancedSection("x".into()))
        );
    }

    #[test]
    fn default_templates_carry_their_placeholders() {
        let t = PromptTemplates::default();
        require(&t.mcq, &["question", "options"]).unwrap();
        require(&t.refine, &["summary"]).unwrap();
        assert!(t.summary.ends_with(SUMMARY_PROMPT_QWEN2_VL));
        assert!(SUMMARY_PROMPT_GPT4_TURBO.contains("(00:00, caption)"));
    }
}
