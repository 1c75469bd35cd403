//! End-to-end processing of page/item documents into citation data files.
//!
//! A document runs load → linearize → segment → parse → intext → link →
//! serialize. The first failing stage is recorded in an error sidecar and
//! nothing else is written for that document.
//!
//! Batches run in two phases: the read-only stages in parallel, then
//! registration of unlinked references in input order (so temporary handle
//! numbers do not depend on thread timing), then the writes.

use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::docingest::{linearize, load_document, segment_references, DocIngestError, DocumentText};
use crate::features::FeatureContext;
use crate::intext::extract_intext_refs;
use crate::labeler::Model;
use crate::lexicons::Lexicons;
use crate::linker::{link_reference, Collection, Link, LinkKind, LinkRecord, Registry};
use crate::ref_parser::{parse_line, Fields, ParsedReference};
use crate::serialize::{verify_spans, write_document, write_error_sidecar, CitationDocument, DocumentId, ErrorSidecar, OutputPaths};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Load,
    Linearize,
    Segment,
    Parse,
    Intext,
    Link,
    Serialize,
}

impl Stage {
    pub const ALL: [Stage; 7] =
        [Stage::Load, Stage::Linearize, Stage::Segment, Stage::Parse, Stage::Intext, Stage::Link, Stage::Serialize];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Load => "load",
            Stage::Linearize => "linearize",
            Stage::Segment => "segment",
            Stage::Parse => "parse",
            Stage::Intext => "intext",
            Stage::Link => "link",
            Stage::Serialize => "serialize",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageError {
    pub stage: Stage,
    pub code: String,
    pub message: String,
}

impl StageError {
    fn new(stage: Stage, code: &str, message: impl Into<String>) -> Self {
        StageError { stage, code: code.to_string(), message: message.into() }
    }

    fn ingest(stage: Stage, e: DocIngestError) -> Self {
        let code = match e {
            DocIngestError::BrokenStructure(_) => "BrokenStructure",
            DocIngestError::NoTextLayer => "NoTextLayer",
            DocIngestError::NoReferenceSection => "NoReferenceSection",
            DocIngestError::Io(_) => "Io",
        };
        StageError::new(stage, code, e.to_string())
    }
}

impl fmt::Display for StageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} failed ({}): {}", self.stage, self.code, self.message)
    }
}

impl std::error::Error for StageError {}

/// Shared read-only inputs.
#[derive(Clone, Copy)]
pub struct Pipeline<'a> {
    pub model: &'a Model,
    pub lexicons: &'a Lexicons,
    pub collection: &'a Collection,
    pub config: &'a Config,
}

/// A document after the read-only stages.
#[derive(Debug, Clone)]
pub struct Analyzed {
    pub id: DocumentId,
    pub text: DocumentText,
    /// Parsed references with the collection handle, when one matched.
    pub references: Vec<(ParsedReference, Option<String>)>,
    pub intext: Vec<crate::intext::InTextRef>,
}

/// Outcome of one document.
#[derive(Debug)]
pub enum Outcome {
    Written { id: DocumentId, paths: OutputPaths, references: usize, linked: usize, intext: usize },
    Failed { id: DocumentId, error: StageError, sidecar: PathBuf },
}

impl Outcome {
    pub fn is_ok(&self) -> bool {
        matches!(self, Outcome::Written { .. })
    }
}

impl<'a> Pipeline<'a> {
    pub fn feature_context(&self) -> FeatureContext<'a> {
        FeatureContext::new(self.lexicons, self.config.year_range())
    }

    /// Load through in-text extraction, plus the collection lookup.
    pub fn analyze(&self, input: &Path, id: DocumentId) -> Result<Analyzed, StageError> {
        let items = load_document(input).map_err(|e| StageError::ingest(Stage::Load, e))?;
        let text = linearize(&items);
        if text.text.trim().is_empty() {
            return Err(StageError::new(Stage::Linearize, "NoTextLayer", "linearized text is empty"));
        }
        let section = segment_references(&text, &self.config.segment, &self.lexicons.homoglyphs)
            .map_err(|e| StageError::ingest(Stage::Segment, e))?;
        if section.entries.is_empty() {
            return Err(StageError::new(Stage::Segment, "NoReferenceSection", "reference heading without numbered entries"));
        }

        let ctx = self.feature_context();
        let parsed: Vec<ParsedReference> = section
            .entries
            .iter()
            .map(|e| {
                let Fields { author, title, year, unparsed_tail } = parse_line(&e.raw, self.model, &ctx).fields;
                ParsedReference { num: e.num, raw: e.raw.clone(), span: e.span.clone(), author, title, year, unparsed_tail }
            })
            .collect();

        let max_num = section.entries.last().map_or(0, |e| e.num);
        let intext = extract_intext_refs(&text, section.interval.start, max_num, &self.config.intext);

        let references = parsed
            .into_iter()
            .map(|r| {
                let handle = link_reference(&r, self.collection, &self.lexicons.homoglyphs, &self.config.link);
                (r, handle)
            })
            .collect();
        Ok(Analyzed { id, text, references, intext })
    }

    /// Give every reference with a title a handle, registering the unlinked
    /// ones, and check the spans.
    pub fn finalize(&self, a: Analyzed, registry: &mut Registry) -> Result<(CitationDocument, DocumentText), StageError> {
        let citing = a.id.to_string();
        let mut references = Vec::with_capacity(a.references.len());
        for (r, handle) in a.references {
            let link = match handle {
                Some(h) => Some(Link { handle: h, kind: LinkKind::Linked }),
                None if !r.title.trim().is_empty() => Some(
                    registry
                        .register(&r, &self.lexicons.homoglyphs)
                        .map_err(|e| StageError::new(Stage::Link, "Registry", e.to_string()))?,
                ),
                None => None,
            };
            references.push(LinkRecord { citing: citing.clone(), reference: r, link });
        }
        let doc = CitationDocument { id: a.id, references, intext: a.intext };
        verify_spans(&doc, &a.text).map_err(|e| StageError::new(Stage::Serialize, "SpanMismatch", e.to_string()))?;
        Ok((doc, a.text))
    }

    fn write(&self, doc: &CitationDocument, out: &Path) -> Result<OutputPaths, StageError> {
        write_document(doc, out).map_err(|e| StageError::new(Stage::Serialize, "Io", e.to_string()))
    }

    fn fail(&self, id: DocumentId, error: StageError, out: &Path) -> Outcome {
        log::warn!("{id}: {error}");
        let sidecar = ErrorSidecar {
            document: id.to_string(),
            stage: error.stage.to_string(),
            code: error.code.clone(),
            message: error.message.clone(),
        };
        let path = match write_error_sidecar(&id, &sidecar, out) {
            Ok(p) => p,
            Err(e) => {
                log::error!("{id}: cannot write error sidecar: {e}");
                OutputPaths::new(out, &id).error
            }
        };
        Outcome::Failed { id, error, sidecar: path }
    }

    fn written(doc: &CitationDocument, paths: OutputPaths) -> Outcome {
        Outcome::Written {
            id: doc.id.clone(),
            paths,
            references: doc.references.len(),
            linked: doc.references.iter().filter(|r| r.link.as_ref().is_some_and(|l| l.kind == LinkKind::Linked)).count(),
            intext: doc.intext.len(),
        }
    }

    /// Run every stage for one document.
    pub fn process_document(&self, input: &Path, id: DocumentId, registry: &mut Registry, out: &Path) -> Outcome {
        let result = self
            .analyze(input, id.clone())
            .and_then(|a| self.finalize(a, registry))
            .and_then(|(doc, _)| self.write(&doc, out).map(|p| (doc, p)));
        match result {
            Ok((doc, paths)) => Self::written(&doc, paths),
            Err(e) => self.fail(id, e, out),
        }
    }

    /// Process many documents. `jobs` of 0 means one per logical CPU.
    pub fn process_batch(&self, inputs: &[(PathBuf, DocumentId)], registry: &mut Registry, out: &Path, jobs: usize) -> Vec<Outcome> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build().expect("thread pool");
        let analyzed: Vec<Result<Analyzed, StageError>> =
            pool.install(|| inputs.par_iter().map(|(path, id)| self.analyze(path, id.clone())).collect());

        let mut finalized = Vec::with_capacity(inputs.len());
        for ((_, id), a) in inputs.iter().zip(analyzed) {
            finalized.push((id.clone(), a.and_then(|a| self.finalize(a, registry))));
        }

        pool.install(|| {
            finalized
                .into_par_iter()
                .map(|(id, r)| match r.and_then(|(doc, _)| self.write(&doc, out).map(|p| (doc, p))) {
                    Ok((doc, paths)) => Self::written(&doc, paths),
                    Err(e) => self.fail(id, e, out),
                })
                .collect()
        })
    }
}

/// `.json` files under `root`, sorted, with their document ids: the
/// collection is the parent directory relative to `root` (or `root`'s own
/// name for top-level files) and the paper id is the file stem.
pub fn discover_inputs(root: &Path) -> std::io::Result<Vec<(PathBuf, DocumentId)>> {
    fn walk(dir: &Path, out: &mut Vec<PathBuf>) -> std::io::Result<()> {
        for e in std::fs::read_dir(dir)? {
            let e = e?;
            let p = e.path();
            if e.file_type()?.is_dir() {
                walk(&p, out)?;
            } else if p.extension().is_some_and(|x| x == "json") {
                out.push(p);
            }
        }
        Ok(())
    }
    let mut files = Vec::new();
    walk(root, &mut files)?;
    files.sort();
    Ok(files
        .into_iter()
        .map(|p| {
            let id = document_id_for(root, &p);
            (p, id)
        })
        .collect())
}

/// Document id of `path` found under `root`.
pub fn document_id_for(root: &Path, path: &Path) -> DocumentId {
    let paper = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let rel_parent = path.parent().and_then(|p| p.strip_prefix(root).ok()).filter(|p| !p.as_os_str().is_empty());
    let collection = match rel_parent {
        Some(p) => p.components().map(|c| c.as_os_str().to_string_lossy().into_owned()).collect::<Vec<_>>().join("/"),
        None => root
            .canonicalize()
            .ok()
            .and_then(|r| r.file_name().map(|n| n.to_string_lossy().into_owned()))
            .unwrap_or_else(|| "default".into()),
    };
    DocumentId::new(collection, paper)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stage_names_are_stable() {
        let names: Vec<&str> = Stage::ALL.iter().map(|s| s.as_str()).collect();
        assert_eq!(names, ["load", "linearize", "segment", "parse", "intext", "link", "serialize"]);
        assert!(Stage::Load < Stage::Serialize);
        assert_eq!(serde_json::to_string(&Stage::Intext).unwrap(), "\"intext\"");
    }

    #[test]
    fn ids_from_paths() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().join("in");
        std::fs::create_dir_all(root.join("spz/neicon")).unwrap();
        std::fs::write(root.join("spz/neicon/a.json"), "[]").unwrap();
        std::fs::write(root.join("top.json"), "[]").unwrap();
        std::fs::write(root.join("notes.txt"), "").unwrap();
        let found = discover_inputs(&root).unwrap();
        let ids: Vec<String> = found.iter().map(|(_, id)| id.to_string()).collect();
        assert_eq!(ids, ["spz/neicon/a", "in/top"]);
    }
}
