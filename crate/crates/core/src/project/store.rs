use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{validate_project, ProjectFile, Violation, SCHEMA_VERSION};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("unsupported schema version {found} (expected {SCHEMA_VERSION})")]
    Version { found: String },
    #[error("at `{path}`: {message}")]
    Field { path: String, message: String },
    #[error("project is invalid: {}", summarize(.0))]
    Invalid(Vec<Violation>),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

fn summarize(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

impl StoreError {
    /// JSON path of the offending field, where one is known.
    pub fn path(&self) -> Option<String> {
        match self {
            StoreError::Field { path, .. } => Some(path.clone()),
            StoreError::Version { .. } => Some("schema_version".into()),
            StoreError::Invalid(v) => v.first().map(|x| x.location.clone()),
            _ => None,
        }
    }
}

/// Pretty JSON with a trailing newline. Maps are ordered, so equal projects
/// always produce identical bytes.
pub fn to_canonical_json(project: &ProjectFile) -> String {
    let mut s = serde_json::to_string_pretty(project).expect("project serializes");
    s.push('\n');
    s
}

/// Parses without semantic validation.
pub fn parse_project(text: &str) -> Result<ProjectFile, StoreError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| StoreError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    parse_project_value(value)
}

/// Like [`parse_project`], for a document that is already parsed.
pub fn parse_project_value(value: serde_json::Value) -> Result<ProjectFile, StoreError> {
    match value.get("schema_version") {
        Some(v) if v.as_u64() == Some(SCHEMA_VERSION as u64) => {}
        Some(v) => return Err(StoreError::Version { found: v.to_string() }),
        None => return Err(StoreError::Version { found: "none".into() }),
    }
    serde_path_to_error::deserialize(value).map_err(|e| StoreError::Field {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

/// Parses and validates.
pub fn load(text: &str) -> Result<ProjectFile, StoreError> {
    let p = parse_project(text)?;
    let violations = validate_project(&p);
    if violations.is_empty() {
        Ok(p)
    } else {
        Err(StoreError::Invalid(violations))
    }
}

/// Validates and serializes.
pub fn save(project: &ProjectFile) -> Result<String, StoreError> {
    let violations = validate_project(project);
    if !violations.is_empty() {
        return Err(StoreError::Invalid(violations));
    }
    Ok(to_canonical_json(project))
}

pub fn load_path(path: &Path) -> Result<ProjectFile, StoreError> {
    let text = fs::read_to_string(path).map_err(|source| StoreError::Io { path: path.into(), source })?;
    load(&text)
}

/// Writes through a temporary sibling and a rename so readers never see a
/// half-written file.
pub fn save_path(project: &ProjectFile, path: &Path) -> Result<(), StoreError> {
    let text = save(project)?;
    let io_err = |source| StoreError::Io { path: path.into(), source };
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, text).map_err(io_err)?;
    fs::rename(&tmp, path).map_err(io_err)
}

/// Hex SHA-256 of the canonical JSON encoding of `value`.
pub fn input_hash<T: Serialize + ?Sized>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("hash input serializes");
    hex::encode(Sha256::digest(bytes))
}
