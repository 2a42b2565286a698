//! Projects held in memory, each behind its own lock, mirrored to one file
//! per project when a data directory is configured.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use erpsel_core::project::{load_path, save_path, validate_project, ProjectFile};
use tokio::sync::{Mutex, RwLock};

use crate::error::ApiError;

#[derive(Debug, Clone)]
pub struct Entry {
    /// Bumped on every accepted edit; clients send it back to detect
    /// concurrent changes.
    pub version: u64,
    pub project: ProjectFile,
}

pub type Handle = Arc<RwLock<Entry>>;

#[derive(Debug, thiserror::Error)]
pub enum OpenError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {message}")]
    Project { path: PathBuf, message: String },
}

#[derive(Debug)]
pub struct ProjectStore {
    dir: Option<PathBuf>,
    projects: RwLock<BTreeMap<String, Handle>>,
    next_id: Mutex<u64>,
}

fn version_path(dir: &Path, id: &str) -> PathBuf {
    dir.join(format!("{id}.version"))
}

impl ProjectStore {
    pub fn in_memory() -> Self {
        Self { dir: None, projects: RwLock::new(BTreeMap::new()), next_id: Mutex::new(1) }
    }

    /// Loads every `*.json` project in `dir`, creating the directory if needed.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, OpenError> {
        let dir = dir.into();
        let io_err = |path: &Path| {
            let path = path.to_path_buf();
            move |source| OpenError::Io { path, source }
        };
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        let mut projects = BTreeMap::new();
        let mut next = 1;
        for item in fs::read_dir(&dir).map_err(io_err(&dir))? {
            let path = item.map_err(io_err(&dir))?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            let Some(id) = path.file_stem().and_then(|s| s.to_str()).map(str::to_owned) else { continue };
            let project = load_path(&path).map_err(|e| OpenError::Project { path: path.clone(), message: e.to_string() })?;
            let version = fs::read_to_string(version_path(&dir, &id))
                .ok()
                .and_then(|s| s.trim().parse().ok())
                .unwrap_or(1);
            if let Some(n) = id.strip_prefix('p').and_then(|n| n.parse::<u64>().ok()) {
                next = next.max(n + 1);
            }
            projects.insert(id, Arc::new(RwLock::new(Entry { version, project })));
        }
        Ok(Self { dir: Some(dir), projects: RwLock::new(projects), next_id: Mutex::new(next) })
    }

    pub async fn ids(&self) -> Vec<String> {
        self.projects.read().await.keys().cloned().collect()
    }

    pub async fn get(&self, id: &str) -> Result<Handle, ApiError> {
        self.projects.read().await.get(id).cloned().ok_or_else(|| ApiError::not_found("project", id))
    }

    /// Validates, persists and registers a new project; returns its id.
    pub async fn create(&self, project: ProjectFile) -> Result<(String, Entry), ApiError> {
        let violations = validate_project(&project);
        if !violations.is_empty() {
            return Err(ApiError::invalid(violations));
        }
        let mut next = self.next_id.lock().await;
        let mut projects = self.projects.write().await;
        let id = loop {
            let candidate = format!("p{}", *next);
            *next += 1;
            if !projects.contains_key(&candidate) {
                break candidate;
            }
        };
        let entry = Entry { version: 1, project };
        self.persist(&id, &entry)?;
        projects.insert(id.clone(), Arc::new(RwLock::new(entry.clone())));
        Ok((id, entry))
    }

    /// Writes `entry` to disk. Callers swap it into memory only after this
    /// succeeds, so a failed write leaves the old state everywhere.
    pub fn persist(&self, id: &str, entry: &Entry) -> Result<(), ApiError> {
        let Some(dir) = &self.dir else { return Ok(()) };
        save_path(&entry.project, &dir.join(format!("{id}.json")))?;
        let vp = version_path(dir, id);
        let tmp = vp.with_extension("version.tmp");
        fs::write(&tmp, format!("{}\n", entry.version))
            .and_then(|_| fs::rename(&tmp, &vp))
            .map_err(|e| ApiError::internal(format!("{}: {e}", vp.display())))
    }
}
