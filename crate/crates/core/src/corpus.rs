//! Loading a directory of plain-text assignments.
//!
//! Every matching file becomes one [`RawDocument`] whose id is its path
//! relative to the corpus root, with `/` separators. Documents are kept in
//! lexicographic id order so that everything downstream is independent of
//! filesystem enumeration order.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use walkdir::WalkDir;

use crate::error::{Error, Result};

/// One ingested assignment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RawDocument {
    pub id: String,
    pub path: PathBuf,
    pub text: String,
}

impl RawDocument {
    pub fn new(id: impl Into<String>, path: impl Into<PathBuf>, text: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            path: path.into(),
            text: text.into(),
        }
    }
}

/// An immutable, id-ordered set of documents compared only against each other.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    name: String,
    documents: Vec<RawDocument>,
    warnings: Vec<String>,
}

impl Corpus {
    /// Builds a corpus from in-memory documents, sorting them by id.
    pub fn new(name: impl Into<String>, mut documents: Vec<RawDocument>) -> Result<Self> {
        documents.sort_by(|a, b| a.id.cmp(&b.id));
        let mut seen = HashSet::with_capacity(documents.len());
        for doc in &documents {
            if !seen.insert(doc.id.as_str()) {
                return Err(Error::DuplicateId(doc.id.clone()));
            }
        }
        let warnings = documents
            .iter()
            .filter(|d| d.text.is_empty())
            .map(|d| format!("{} is empty", d.id))
            .collect();
        Ok(Self {
            name: name.into(),
            documents,
            warnings,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn documents(&self) -> &[RawDocument] {
        &self.documents
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    /// Non-fatal observations made while loading (currently: empty files).
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Writes every document under `dir` at its id path, creating directories as needed.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        for doc in &self.documents {
            let path = dir.join(&doc.id);
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent).map_err(|source| Error::Write {
                    path: parent.to_path_buf(),
                    source,
                })?;
            }
            std::fs::write(&path, &doc.text).map_err(|source| Error::Write { path, source })?;
        }
        Ok(())
    }
}

fn matches_extension(path: &Path, extensions: &[String]) -> bool {
    let Some(ext) = path.extension().and_then(|e| e.to_str()) else {
        return false;
    };
    extensions
        .iter()
        .any(|want| want.trim_start_matches('.') == ext)
}

fn relative_id(root: &Path, path: &Path) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path);
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

fn read_document(root: &Path, path: PathBuf) -> Result<RawDocument> {
    let bytes = std::fs::read(&path).map_err(|source| Error::Read {
        path: path.clone(),
        source,
    })?;
    let text = String::from_utf8(bytes).map_err(|e| Error::InvalidUtf8 {
        path: path.clone(),
        offset: e.utf8_error().valid_up_to(),
    })?;
    Ok(RawDocument {
        id: relative_id(root, &path),
        path,
        text,
    })
}

/// Loads every file under `root` whose extension is in `extensions`.
///
/// Files are read in parallel; the result is sorted by id.
pub fn load_corpus(root: &Path, extensions: &[String]) -> Result<Corpus> {
    let mut paths = Vec::new();
    for entry in WalkDir::new(root).follow_links(true) {
        let entry = entry.map_err(|e| {
            let path = e.path().unwrap_or(root).to_path_buf();
            Error::Read {
                path,
                source: e.into(),
            }
        })?;
        if entry.file_type().is_file() && matches_extension(entry.path(), extensions) {
            paths.push(entry.into_path());
        }
    }
    if paths.is_empty() {
        return Err(Error::EmptyCorpus {
            root: root.to_path_buf(),
            extensions: extensions.to_vec(),
        });
    }

    let documents = paths
        .into_par_iter()
        .map(|p| read_document(root, p))
        .collect::<Result<Vec<_>>>()?;

    let name = root
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| root.display().to_string());
    Corpus::new(name, documents)
}
