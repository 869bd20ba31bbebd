//! Desk-scale harness for evaluating vision-language models on long videos.
//!
//! The pipeline mirrors a production ingestion stack:
//!
//! ```text
//! media probe -> frame plan -> ASR transcript -> VLM call -> (LLM refinement)
//!      -> parsed summary / keyframes / MCQ answer -> run manifest
//!      -> score tables + knowledge-graph comparisons
//! ```
//!
//! Every model call goes through [`providers::Providers`], which either calls a
//! live backend and records the exchange into a cassette store, or replays
//! stored cassettes byte-for-byte. Everything downstream of the providers is
//! pure and deterministic, so a replayed run reproduces manifests, tables and
//! graph exports exactly.
//!
//! Runnable walkthroughs for each capability live in `examples/`:
//!
//! ```bash
//! cargo run --example plan_media
//! cargo run --example parse_outputs
//! cargo run --example record_and_replay
//! cargo run --example score_tables
//! cargo run --example knowledge_graph
//! cargo run --example replay_demo
//! cargo run --example build_demo
//! ```

pub mod benchmark;
pub mod cli;
pub mod config;
pub mod demo;
pub mod knowledge_graph;
pub mod media;
pub mod parsing;
pub mod providers;
pub mod report;
pub mod scoring;
pub mod templates;

pub use benchmark::{BenchmarkItem, BenchmarkRunner, Outcome, RunManifest, RunRecord};
pub use knowledge_graph::{EvalGraph, GraphMetrics, LayoutParams, NodePosition};
pub use media::{Container, FramePlan, MediaAsset, MediaKind, SplitPlan};
pub use parsing::{KeyframeEntry, McqAnswer, OptionLetter, ParsedVideoOutput};
pub use providers::{
    AttentionKind, ConditionTag, ModelRequest, ModelResponse, Providers, ResponseStatus, Transcript, TranscriptSegment,
};
pub use scoring::{MatchVector, ScoreReport};
