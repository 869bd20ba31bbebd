use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{ConditionTag, Modality, ModelRequest, ModelResponse, ProviderError, Result};

/// One stored exchange. Media paths are not kept: the key already pins the
/// media content.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CassetteRecord {
    pub key: String,
    pub provider_id: String,
    pub modality: Modality,
    pub prompt: String,
    pub frame_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition: Option<ConditionTag>,
    pub response: ModelResponse,
}

impl CassetteRecord {
    pub fn new(key: String, request: &ModelRequest, response: ModelResponse) -> Self {
        Self {
            key,
            provider_id: request.provider_id.clone(),
            modality: request.modality,
            prompt: request.prompt.clone(),
            frame_count: request.frame_refs.len(),
            condition: request.condition.clone(),
            response,
        }
    }
}

/// Append-only directory of `<key>.json` records.
///
/// Reads are lock-free; appends are serialized and never overwrite an
/// existing record.
#[derive(Debug)]
pub struct CassetteStore {
    dir: PathBuf,
    append_lock: Mutex<()>,
}

impl CassetteStore {
    pub fn open(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir).map_err(|e| ProviderError::Store(format!("{}: {e}", dir.display())))?;
        Ok(Self {
            dir,
            append_lock: Mutex::new(()),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub fn get(&self, key: &str) -> Result<Option<CassetteRecord>> {
        let path = self.path_for(key);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(ProviderError::Store(format!("{}: {e}", path.display()))),
        };
        let record: CassetteRecord =
            serde_json::from_slice(&bytes).map_err(|e| ProviderError::Store(format!("{}: {e}", path.display())))?;
        if record.key != key {
            return Err(ProviderError::Store(format!(
                "{} holds key {}",
                path.display(),
                record.key
            )));
        }
        Ok(Some(record))
    }

    /// Returns `false` when a record with the same key already exists.
    pub fn append(&self, record: CassetteRecord) -> Result<bool> {
        let _guard = self.append_lock.lock().expect("cassette append lock poisoned");
        let path = self.path_for(&record.key);
        if path.exists() {
            return Ok(false);
        }
        let store_err = |e: std::io::Error| ProviderError::Store(format!("{}: {e}", path.display()));
        let tmp = self.dir.join(format!(".{}.tmp", record.key));
        let mut bytes = serde_json::to_vec_pretty(&record).expect("cassette record serializes");
        bytes.push(b'\n');
        let mut f = fs::File::create(&tmp).map_err(store_err)?;
        f.write_all(&bytes).map_err(store_err)?;
        f.sync_all().map_err(store_err)?;
        fs::rename(&tmp, &path).map_err(store_err)?;
        Ok(true)
    }

    pub fn len(&self) -> Result<usize> {
        let entries = fs::read_dir(&self.dir).map_err(|e| ProviderError::Store(e.to_string()))?;
        Ok(entries
            .filter_map(|e| e.ok())
            .filter(|e| e.path().extension().is_some_and(|x| x == "json"))
            .count())
    }

    pub fn is_empty(&self) -> Result<bool> {
        Ok(self.len()? == 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::providers::ResponseStatus;

    fn record(key: &str, text: &str) -> CassetteRecord {
        CassetteRecord {
            key: key.into(),
            provider_id: "p".into(),
            modality: Modality::Llm,
            prompt: "x".into(),
            frame_count: 0,
            condition: None,
            response: ModelResponse::ok(text, 1),
        }
    }

    #[test]
    fn append_never_overwrites() {
        let dir = tempfile::tempdir().unwrap();
        let store = CassetteStore::open(dir.path()).unwrap();
        assert!(store.append(record("k1", "first")).unwrap());
        assert!(!store.append(record("k1", "second")).unwrap());
        let got = store.get("k1").unwrap().unwrap();
        assert_eq!(got.response.raw_text, "first");
        assert_eq!(got.response.status, ResponseStatus::Ok);
        assert!(store.get("missing").unwrap().is_none());
        assert_eq!(store.len().unwrap(), 1);
    }

    #[test]
    fn mismatched_key_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let store = CassetteStore::open(dir.path()).unwrap();
        store.append(record("k1", "a")).unwrap();
        std::fs::copy(dir.path().join("k1.json"), dir.path().join("k2.json")).unwrap();
        assert!(matches!(store.get("k2"), Err(ProviderError::Store(_))));
    }
}
