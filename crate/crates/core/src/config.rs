//! Harness configuration: one JSON document, paths relative to its directory.
//!
//! ```json
//! {
//!   "dataset": "dataset.json",
//!   "inventory": "inventory.json",
//!   "frames_dir": "frames",
//!   "cassettes": "cassettes",
//!   "mode": "replay",
//!   "conditions": [
//!     {"model_name": "qwen2-vl-7b", "fps": 0.1, "with_transcript": true, "attention": "sdpa", "gpu": "A10G"}
//!   ]
//! }
//! ```
//!
//! Provider endpoints live in a separate `providers_file`; API keys are only
//! ever named there (`api_key_env`) and read from the environment at call time.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::benchmark::{load_dataset, BenchmarkItem, DatasetError, RunSettings};
use crate::knowledge_graph::{LayoutParams, KEYFRAMES};
use crate::media::{CommandTemplate, MediaAsset, MediaTool};
use crate::providers::{CassetteStore, ConditionTag, HttpBackend, Mode, ProviderFile, Providers};
use crate::scoring::{load_annotations, Annotations};
use crate::templates::PromptTemplates;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {detail}")]
    Parse { path: PathBuf, detail: String },
    #[error("{field} points at {path}, which does not exist")]
    MissingFile { field: &'static str, path: PathBuf },
    #[error("the condition matrix is empty")]
    NoConditions,
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

pub type Result<T> = std::result::Result<T, ConfigError>;

/// Resolves a path relative to `base` unless it is already absolute.
pub fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MediaCommands {
    pub probe: CommandTemplate,
    pub extract: CommandTemplate,
}

impl Default for MediaCommands {
    fn default() -> Self {
        Self {
            probe: CommandTemplate::ffprobe(),
            extract: CommandTemplate::ffmpeg_frame(),
        }
    }
}

fn default_frame_ext() -> String {
    "jpg".into()
}
fn default_mode() -> Mode {
    Mode::Replay
}
fn default_tolerance_s() -> u32 {
    2
}
fn default_out_dir() -> PathBuf {
    "out".into()
}
fn default_workers() -> usize {
    4
}
fn default_max_in_flight() -> usize {
    4
}
fn default_center() -> String {
    KEYFRAMES.into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarnessConfig {
    pub dataset: PathBuf,
    /// JSON array of probed media assets (what `ingest` writes).
    pub inventory: PathBuf,
    pub frames_dir: PathBuf,
    #[serde(default = "default_frame_ext")]
    pub frame_ext: String,
    #[serde(default)]
    pub transcripts_dir: Option<PathBuf>,
    pub cassettes: PathBuf,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    #[serde(default)]
    pub providers_file: Option<PathBuf>,
    #[serde(default)]
    pub asr_provider: Option<String>,
    #[serde(default)]
    pub refine_provider: Option<String>,
    pub conditions: Vec<ConditionTag>,
    #[serde(default)]
    pub templates: PromptTemplates,
    #[serde(default = "default_tolerance_s")]
    pub tolerance_s: u32,
    #[serde(default)]
    pub layout: LayoutParams,
    /// Node that graph distances are measured from.
    #[serde(default = "default_center")]
    pub graph_center: String,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default = "default_max_in_flight")]
    pub max_in_flight: usize,
    #[serde(default)]
    pub summaries: bool,
    #[serde(default)]
    pub annotations: Option<PathBuf>,
    #[serde(default)]
    pub media: Option<MediaCommands>,
}

impl HarnessConfig {
    /// Parses and validates a config file. Every relative path is rebased on
    /// the config file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_json(&text, base).map_err(|e| match e {
            ConfigError::Parse { detail, .. } => ConfigError::Parse {
                path: path.to_path_buf(),
                detail,
            },
            other => other,
        })
    }

    pub fn from_json(text: &str, base: &Path) -> Result<Self> {
        let cfg = Self::from_json_unchecked(text, base)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses and rebases without checking that referenced files exist.
    /// For commands that only read layout, media or scoring settings.
    pub fn from_json_unchecked(text: &str, base: &Path) -> Result<Self> {
        let mut cfg: HarnessConfig = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
            path: PathBuf::new(),
            detail: e.to_string(),
        })?;
        cfg.rebase(base);
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        for p in [
            &mut self.dataset,
            &mut self.inventory,
            &mut self.frames_dir,
            &mut self.cassettes,
            &mut self.out_dir,
        ] {
            *p = resolve(base, p);
        }
        for p in [
            &mut self.transcripts_dir,
            &mut self.providers_file,
            &mut self.annotations,
        ]
        .into_iter()
        .flatten()
        {
            *p = resolve(base, p);
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.conditions.is_empty() {
            return Err(ConfigError::NoConditions);
        }
        let must_exist = [
            ("dataset", Some(&self.dataset)),
            ("inventory", Some(&self.inventory)),
            ("providers_file", self.providers_file.as_ref()),
            ("annotations", self.annotations.as_ref()),
            ("transcripts_dir", self.transcripts_dir.as_ref()),
        ];
        for (field, p) in must_exist {
            if let Some(p) = p {
                if !p.exists() {
                    return Err(ConfigError::MissingFile { field, path: p.clone() });
                }
            }
        }
        if self.mode == Mode::Replay && !self.cassettes.is_dir() {
            return Err(ConfigError::MissingFile {
                field: "cassettes",
                path: self.cassettes.clone(),
            });
        }
        for c in &self.conditions {
            if !(c.fps.is_finite() && c.fps > 0.0) {
                return Err(ConfigError::Invalid(format!(
                    "condition {}: fps must be positive",
                    c.label()
                )));
            }
        }
        if self.workers == 0 || self.max_in_flight == 0 {
            return Err(ConfigError::Invalid(
                "workers and max_in_flight must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Keeps only the conditions named in `selectors`, each either a
    /// condition label or a zero-based index into the matrix.
    pub fn select_conditions(&mut self, selectors: &[String]) -> Result<()> {
        if selectors.is_empty() {
            return Ok(());
        }
        let mut chosen = Vec::new();
        for sel in selectors {
            let found = match sel.parse::<usize>() {
                Ok(i) => self.conditions.get(i),
                Err(_) => self.conditions.iter().find(|c| c.label() == *sel),
            };
            let c = found.ok_or_else(|| ConfigError::Invalid(format!("no condition matches {sel:?}")))?;
            if !chosen.contains(c) {
                chosen.push(c.clone());
            }
        }
        self.conditions = chosen;
        Ok(())
    }

    pub fn items(&self) -> Result<Vec<BenchmarkItem>> {
        Ok(load_dataset(&self.dataset)?)
    }

    /// Loads the inventory. Relative asset paths are taken relative to the
    /// inventory file.
    pub fn assets(&self) -> Result<Vec<MediaAsset>> {
        let text = std::fs::read_to_string(&self.inventory).map_err(|source| ConfigError::Io {
            path: self.inventory.clone(),
            source,
        })?;
        let mut assets: Vec<MediaAsset> = serde_json::from_str(&text).map_err(|e| ConfigError::Parse {
            path: self.inventory.clone(),
            detail: e.to_string(),
        })?;
        let base = self.inventory.parent().unwrap_or(Path::new("."));
        for a in &mut assets {
            a.path = resolve(base, &a.path);
        }
        Ok(assets)
    }

    pub fn annotations(&self) -> Result<Option<Annotations>> {
        self.annotations
            .as_ref()
            .map(|p| {
                load_annotations(p).map_err(|e| ConfigError::Parse {
                    path: p.clone(),
                    detail: e.to_string(),
                })
            })
            .transpose()
    }

    pub fn provider_file(&self) -> Result<ProviderFile> {
        let Some(path) = &self.providers_file else {
            return Ok(ProviderFile { providers: Vec::new() });
        };
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.clone(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| ConfigError::Parse {
            path: path.clone(),
            detail: e.to_string(),
        })
    }

    /// Builds the provider layer. Live mode registers one HTTP backend per
    /// providers-file entry.
    pub fn providers(&self) -> Result<Providers> {
        let open = |dir: &Path| {
            CassetteStore::open(dir).map_err(|e| ConfigError::Invalid(format!("cassette store {}: {e}", dir.display())))
        };
        match self.mode {
            Mode::Replay => Ok(Providers::replay(open(&self.cassettes)?)),
            Mode::Live => {
                std::fs::create_dir_all(&self.cassettes).map_err(|source| ConfigError::Io {
                    path: self.cassettes.clone(),
                    source,
                })?;
                let mut providers = Providers::live(open(&self.cassettes)?, self.max_in_flight);
                for p in self.provider_file()?.providers {
                    providers.register(p.id.clone(), Arc::new(HttpBackend::new(p)));
                }
                Ok(providers)
            }
        }
    }

    pub fn media_tool(&self) -> Option<MediaTool> {
        self.media
            .as_ref()
            .map(|m| MediaTool::new(m.probe.clone(), m.extract.clone()))
    }

    pub fn run_settings(&self) -> RunSettings {
        let mut s = RunSettings::new(
            self.dataset.display().to_string(),
            self.conditions.clone(),
            &self.frames_dir,
        );
        s.templates = self.templates.clone();
        s.frame_ext = self.frame_ext.clone();
        s.transcripts_dir = self.transcripts_dir.clone();
        s.asr_provider = self.asr_provider.clone();
        s.refine_provider = self.refine_provider.clone();
        s.summaries = self.summaries;
        s.workers = self.workers;
        s
    }
}
