//! Linking parsed references to a metadata collection, plus the registry of
//! references that did not link.

mod promote;
mod registry;

use std::collections::{HashMap, HashSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::normalize::{repair_homoglyphs, HomoglyphTable};
use crate::ref_parser::{trim_field_punct, ParsedReference};

pub use promote::promote;
pub use registry::{Registry, RegistryEntry, RegistryStatus, TEMP_HANDLE_PREFIX};

#[derive(Debug, Error)]
pub enum LinkError {
    #[error("{path}:{line}: {reason}")]
    Collection { path: String, line: usize, reason: String },
    #[error("duplicate handle {0:?} in collection")]
    DuplicateHandle(String),
    #[error("registry {path}:{line}: {reason}")]
    Registry { path: String, line: usize, reason: String },
    #[error("unknown temporary handle {0:?}")]
    UnknownTempHandle(String),
    #[error("handle {0:?} is not in the collection")]
    UnknownHandle(String),
    #[error("{temp:?} was already promoted to {to:?}")]
    AlreadyPromoted { temp: String, to: String },
    #[error("citation store {path}: {reason}")]
    Store { path: PathBuf, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Repair look-alike letters, fold case, turn everything that is not a
/// letter or digit into a space and collapse spaces.
pub fn normalize_text(s: &str, table: &HomoglyphTable) -> String {
    let spaced: String = s.chars().map(|c| if c.is_alphanumeric() { c } else { ' ' }).collect();
    spaced
        .split_whitespace()
        .map(|w| repair_homoglyphs(w, table).0.to_lowercase())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Normalized first word of an author string.
pub fn surname(author: &str, table: &HomoglyphTable) -> String {
    author
        .split_whitespace()
        .map(|w| normalize_text(w, table))
        .find(|w| !w.is_empty())
        .unwrap_or_default()
}

/// Surnames of a joined author string such as `Иванов И., Петров П.`: the
/// first word of every comma-separated part that is not just initials.
fn reference_surnames(author: &str, table: &HomoglyphTable) -> Vec<String> {
    author
        .split(',')
        .filter(|part| part.chars().filter(|c| c.is_alphabetic()).count() > 2 || !part.contains('.'))
        .map(|part| surname(part, table))
        .filter(|s| !s.is_empty())
        .collect()
}

/// Canonical `title|year|surname` string used for matching and dedup.
pub fn normalize_key(author: &str, title: &str, year: &str, table: &HomoglyphTable) -> String {
    format!(
        "{}|{}|{}",
        normalize_text(trim_field_punct(title), table),
        year.trim(),
        surname(author, table)
    )
}

pub fn reference_key(r: &ParsedReference, table: &HomoglyphTable) -> String {
    normalize_key(&r.author, &r.title, &r.year, table)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetadataRecord {
    pub handle: String,
    #[serde(default)]
    pub authors: Vec<String>,
    pub title: String,
    #[serde(default)]
    pub year: String,
}

/// An immutable metadata collection indexed by normalized title.
#[derive(Debug, Clone, Default)]
pub struct Collection {
    records: Vec<MetadataRecord>,
    titles: Vec<String>,
    surnames: Vec<HashSet<String>>,
    by_title: HashMap<String, Vec<usize>>,
    handles: HashSet<String>,
}

impl Collection {
    pub fn new(records: Vec<MetadataRecord>, table: &HomoglyphTable) -> Result<Self, LinkError> {
        let mut c = Collection::default();
        for r in records {
            if r.handle.is_empty() {
                return Err(LinkError::Collection { path: String::new(), line: c.records.len() + 1, reason: "empty handle".into() });
            }
            if !c.handles.insert(r.handle.clone()) {
                return Err(LinkError::DuplicateHandle(r.handle));
            }
            let title = normalize_text(&r.title, table);
            c.by_title.entry(title.clone()).or_default().push(c.records.len());
            c.titles.push(title);
            c.surnames.push(r.authors.iter().map(|a| surname(a, table)).filter(|s| !s.is_empty()).collect());
            c.records.push(r);
        }
        Ok(c)
    }

    /// Read a JSON-lines collection file. Blank lines and `#` comments are
    /// skipped.
    pub fn load(path: &Path, table: &HomoglyphTable) -> Result<Self, LinkError> {
        let text = std::fs::read_to_string(path)?;
        let mut records = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let rec: MetadataRecord = serde_json::from_str(line).map_err(|e| LinkError::Collection {
                path: path.display().to_string(),
                line: i + 1,
                reason: e.to_string(),
            })?;
            records.push(rec);
        }
        Collection::new(records, table).map_err(|e| match e {
            LinkError::Collection { line, reason, .. } => {
                LinkError::Collection { path: path.display().to_string(), line, reason }
            }
            other => other,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[MetadataRecord] {
        &self.records
    }

    pub fn contains_handle(&self, handle: &str) -> bool {
        self.handles.contains(handle)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkConfig {
    /// Fall back to Jaro-Winkler title similarity when no title is equal.
    pub fuzzy: bool,
    pub fuzzy_threshold: f64,
}

impl Default for LinkConfig {
    fn default() -> Self {
        LinkConfig { fuzzy: false, fuzzy_threshold: 0.95 }
    }
}

/// Handle of the one collection record matching `r`, if exactly one does.
///
/// Candidates share the normalized title. Years must be equal when both
/// sides have one; when both sides have authors, some surname must agree.
pub fn link_reference(
    r: &ParsedReference,
    collection: &Collection,
    table: &HomoglyphTable,
    config: &LinkConfig,
) -> Option<String> {
    let title = normalize_text(trim_field_punct(&r.title), table);
    if title.is_empty() || collection.is_empty() {
        return None;
    }
    let exact = collection.by_title.get(&title).cloned().unwrap_or_default();
    let candidates: Vec<usize> = if exact.is_empty() && config.fuzzy {
        (0..collection.len())
            .filter(|&i| strsim::jaro_winkler(&title, &collection.titles[i]) >= config.fuzzy_threshold)
            .collect()
    } else {
        exact
    };
    let year = r.year.trim();
    let surnames = reference_surnames(&r.author, table);
    let survivors: Vec<usize> = candidates
        .into_iter()
        .filter(|&i| {
            let rec = &collection.records[i];
            year.is_empty() || rec.year.trim().is_empty() || rec.year.trim() == year
        })
        .filter(|&i| {
            let theirs = &collection.surnames[i];
            surnames.is_empty() || theirs.is_empty() || surnames.iter().any(|s| theirs.contains(s))
        })
        .collect();
    match survivors.as_slice() {
        [one] => Some(collection.records[*one].handle.clone()),
        [] => None,
        many => {
            log::info!("ambiguous link for {:?}: {} candidates", r.title, many.len());
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkKind {
    Linked,
    Unlinked,
}

impl LinkKind {
    /// Temporary handles are unlinked, everything else is linked.
    pub fn of_handle(handle: &str) -> LinkKind {
        if handle.starts_with(TEMP_HANDLE_PREFIX) {
            LinkKind::Unlinked
        } else {
            LinkKind::Linked
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Link {
    pub handle: String,
    pub kind: LinkKind,
}

/// One reference of a citing document with its link, if any.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkRecord {
    pub citing: String,
    pub reference: ParsedReference,
    pub link: Option<Link>,
}
