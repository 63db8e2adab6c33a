//! Reading class-per-file corpora and lexicographer directories.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::lexicon::{build_database, LexDatabase};
use crate::tweets::ClassDataset;

/// A line that was not valid UTF-8 and was left out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineSkip {
    pub file: PathBuf,
    pub line: usize,
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub datasets: Vec<ClassDataset>,
    pub skipped: Vec<LineSkip>,
}

impl Corpus {
    pub fn labels(&self) -> Vec<&str> {
        self.datasets.iter().map(|d| d.class_label.as_str()).collect()
    }
}

/// Regular, non-hidden files of `dir`, sorted by name.
fn data_files(dir: &Path) -> Result<Vec<PathBuf>> {
    if !dir.is_dir() {
        return Err(Error::MissingDirectory(dir.to_path_buf()));
    }
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        let hidden = path
            .file_name()
            .and_then(|n| n.to_str())
            .is_none_or(|n| n.starts_with('.'));
        if path.is_file() && !hidden {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// One dataset per file, labeled with the file stem. Blank lines are ignored;
/// lines that are not UTF-8 are skipped and reported.
pub fn read_corpus(dir: impl AsRef<Path>) -> Result<Corpus> {
    let dir = dir.as_ref();
    let files = data_files(dir)?;
    if files.is_empty() {
        return Err(Error::NoCorpusFiles(dir.to_path_buf()));
    }
    let mut datasets = Vec::with_capacity(files.len());
    let mut skipped = Vec::new();
    for path in files {
        let label = path
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| Error::InvalidLabel(path.display().to_string()))?
            .to_string();
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        let mut lines = Vec::new();
        for (i, raw) in bytes.split(|&b| b == b'\n').enumerate() {
            let raw = raw.strip_suffix(b"\r").unwrap_or(raw);
            match std::str::from_utf8(raw) {
                Ok(text) if text.trim().is_empty() => {}
                Ok(text) => lines.push(text.to_string()),
                Err(_) => {
                    log::warn!("{}:{}: not UTF-8, skipped", path.display(), i + 1);
                    skipped.push(LineSkip {
                        file: path.clone(),
                        line: i + 1,
                    });
                }
            }
        }
        datasets.push(ClassDataset::from_lines(&label, lines));
    }
    Ok(Corpus { datasets, skipped })
}

/// Loads every lexicographer file in `dir`; each file name is used verbatim
/// as its category name (e.g. `noun.person`).
pub fn read_lexicon_dir(dir: impl AsRef<Path>) -> Result<LexDatabase> {
    let dir = dir.as_ref();
    let files = data_files(dir)?;
    if files.is_empty() {
        return Err(Error::NoLexiconFiles(dir.to_path_buf()));
    }
    let mut contents = Vec::with_capacity(files.len());
    for path in files {
        let name = path
            .file_name()
            .and_then(|n| n.to_str())
            .expect("data_files keeps UTF-8 names")
            .to_string();
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        contents.push((name, text));
    }
    Ok(build_database(&contents)?)
}
