//! Dataset loading, run orchestration and run manifests.

mod dataset;
mod record;
mod runner;

use std::path::PathBuf;

use thiserror::Error;

pub use dataset::{build_question_prompt, load_dataset, parse_dataset, BenchmarkItem, DatasetError, DurationClass};
pub use record::{
    classify, condition_key, ManifestError, ManifestHeader, Outcome, Parsed, RecordError, RecordErrorKind, RecordKey,
    RequestKind, RunManifest, RunRecord,
};
pub use runner::{video_outputs, BenchmarkRunner, RunSettings, RunSummary};

#[derive(Debug, Error)]
pub enum BenchmarkError {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error("{0}: completed manifest was produced with different conditions")]
    ManifestMismatch(PathBuf),
    #[error("condition matrix is empty")]
    NoConditions,
    #[error("worker pool: {0}")]
    Pool(String),
    #[error("{0}: {1}")]
    Io(PathBuf, #[source] std::io::Error),
}
