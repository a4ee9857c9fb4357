//! On-disk persistence: one directory per dataset, one file per story and
//! per share snapshot.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use factweaver::document::{RenderMode, StoryDocument};
use factweaver::{FieldKind, FieldMeta};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSummary {
    pub name: String,
    pub kind: FieldKind,
    pub cardinality: usize,
}

impl From<&FieldMeta> for FieldSummary {
    fn from(f: &FieldMeta) -> Self {
        FieldSummary {
            name: f.name.clone(),
            kind: f.kind,
            cardinality: f.distinct_values.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetHandle {
    pub id: String,
    pub schema: Vec<FieldSummary>,
    pub row_count: usize,
    pub created_at: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShareSnapshot {
    pub token: String,
    pub mode: RenderMode,
    pub document: StoryDocument,
}

#[derive(Debug, Clone)]
pub struct Store {
    root: PathBuf,
}

/// Ids are generated server side; anything else is refused before touching
/// the filesystem.
pub fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= 64 && id.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'-' || b == b'_')
}

fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(tmp, path)
}

fn read_json<T: DeserializeOwned>(path: &Path) -> io::Result<Option<T>> {
    match fs::read(path) {
        Ok(bytes) => serde_json::from_slice(&bytes)
            .map(Some)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e)),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(e),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    let bytes = serde_json::to_vec_pretty(value).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
    write_atomic(path, &bytes)
}

impl Store {
    pub fn open(root: impl Into<PathBuf>) -> io::Result<Self> {
        let root = root.into();
        for d in ["datasets", "stories", "shares"] {
            fs::create_dir_all(root.join(d))?;
        }
        Ok(Store { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn dataset_dir(&self, id: &str) -> PathBuf {
        self.root.join("datasets").join(id)
    }

    pub fn put_dataset(&self, handle: &DatasetHandle, csv: &[u8]) -> io::Result<()> {
        let dir = self.dataset_dir(&handle.id);
        fs::create_dir_all(&dir)?;
        write_atomic(&dir.join("data.csv"), csv)?;
        write_json(&dir.join("meta.json"), handle)
    }

    pub fn dataset(&self, id: &str) -> io::Result<Option<DatasetHandle>> {
        if !valid_id(id) {
            return Ok(None);
        }
        read_json(&self.dataset_dir(id).join("meta.json"))
    }

    pub fn dataset_csv(&self, id: &str) -> io::Result<Option<Vec<u8>>> {
        if !valid_id(id) {
            return Ok(None);
        }
        match fs::read(self.dataset_dir(id).join("data.csv")) {
            Ok(b) => Ok(Some(b)),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e),
        }
    }

    pub fn put_story(&self, doc: &StoryDocument) -> io::Result<()> {
        write_json(&self.root.join("stories").join(format!("{}.json", doc.id)), doc)
    }

    pub fn story(&self, id: &str) -> io::Result<Option<StoryDocument>> {
        if !valid_id(id) {
            return Ok(None);
        }
        read_json(&self.root.join("stories").join(format!("{id}.json")))
    }

    pub fn put_share(&self, snap: &ShareSnapshot) -> io::Result<()> {
        let path = self.root.join("shares").join(format!("{}.json", snap.token));
        if path.exists() {
            return Ok(());
        }
        write_json(&path, snap)
    }

    pub fn share(&self, token: &str) -> io::Result<Option<ShareSnapshot>> {
        if !valid_id(token) {
            return Ok(None);
        }
        read_json(&self.root.join("shares").join(format!("{token}.json")))
    }
}
