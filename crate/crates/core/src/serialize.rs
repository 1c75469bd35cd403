//! Per-document citation data files.
//!
//! Layout under an output root: `<collection>/<paper>-refs.xml`,
//! `-intext.xml`, their JSON-lines mirrors `-refs.jsonl` and `-intext.jsonl`,
//! and `-error.json` for a document that failed. Offsets are code points,
//! half-open.

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};

use quick_xml::events::{BytesStart, Event};
use quick_xml::{Reader, XmlVersion};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::docingest::DocumentText;
use crate::intext::InTextRef;
use crate::linker::{Link, LinkKind, LinkRecord};
use crate::ref_parser::ParsedReference;
use crate::xml::{escape_attr, escape_text, resolve_ref};

pub const OFFSETS_SCHEME: &str = "codepoint-v1";

#[derive(Debug, Error)]
pub enum SerializeError {
    #[error("malformed citation file: {0}")]
    Xml(String),
    #[error("reference {num}: {reason}")]
    Span { num: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DocumentId {
    pub collection: String,
    pub paper: String,
}

impl DocumentId {
    pub fn new(collection: impl Into<String>, paper: impl Into<String>) -> Self {
        DocumentId { collection: collection.into(), paper: paper.into() }
    }

    /// Parse `collection/paper`.
    pub fn parse(s: &str) -> Option<Self> {
        let (c, p) = s.rsplit_once('/')?;
        (!c.is_empty() && !p.is_empty()).then(|| DocumentId::new(c, p))
    }
}

impl fmt::Display for DocumentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.collection, self.paper)
    }
}

/// Citation data of one processed document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CitationDocument {
    pub id: DocumentId,
    pub references: Vec<LinkRecord>,
    pub intext: Vec<InTextRef>,
}

/// Why a document was left unprocessed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorSidecar {
    pub document: String,
    pub stage: String,
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputPaths {
    pub refs_xml: PathBuf,
    pub intext_xml: PathBuf,
    pub refs_jsonl: PathBuf,
    pub intext_jsonl: PathBuf,
    pub error: PathBuf,
}

impl OutputPaths {
    pub fn new(out: &Path, id: &DocumentId) -> Self {
        let dir = out.join(&id.collection);
        let f = |suffix: &str| dir.join(format!("{}{suffix}", id.paper));
        OutputPaths {
            refs_xml: f("-refs.xml"),
            intext_xml: f("-intext.xml"),
            refs_jsonl: f("-refs.jsonl"),
            intext_jsonl: f("-intext.jsonl"),
            error: f("-error.json"),
        }
    }

    pub fn outputs(&self) -> [&Path; 4] {
        [&self.refs_xml, &self.intext_xml, &self.refs_jsonl, &self.intext_jsonl]
    }
}

/// Check that every reference and in-text span cuts its own text out of the
/// document, and that every in-text number has a reference.
pub fn verify_spans(doc: &CitationDocument, text: &DocumentText) -> Result<(), SerializeError> {
    let n = text.len();
    for rec in &doc.references {
        let r = &rec.reference;
        if r.span.start > r.span.end || r.span.end > n {
            return Err(SerializeError::Span { num: r.num, reason: format!("span {:?} outside text of {n}", r.span) });
        }
        if text.slice(r.span.clone()) != r.raw {
            return Err(SerializeError::Span { num: r.num, reason: "span does not match raw text".into() });
        }
    }
    for it in &doc.intext {
        if it.span.end > n || text.slice(it.span.clone()) != it.exact {
            return Err(SerializeError::Span { num: it.reference_num, reason: format!("in-text span {:?} does not match {:?}", it.span, it.exact) });
        }
        if !doc.references.iter().any(|r| r.reference.num == it.reference_num) {
            return Err(SerializeError::Span { num: it.reference_num, reason: "in-text number without reference".into() });
        }
    }
    Ok(())
}

const DECL: &str = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";

pub fn render_references_xml(document: &str, refs: &[LinkRecord]) -> String {
    let mut s = String::from(DECL);
    let _ = writeln!(s, "<references document=\"{}\" offsets=\"{OFFSETS_SCHEME}\">", escape_attr(document));
    for rec in refs {
        let r = &rec.reference;
        let _ = write!(
            s,
            "  <reference num=\"{}\" start=\"{}\" end=\"{}\" author=\"{}\" title=\"{}\" year=\"{}\"",
            r.num,
            r.span.start,
            r.span.end,
            escape_attr(&r.author),
            escape_attr(&r.title),
            escape_attr(&r.year)
        );
        if let Some(link) = &rec.link {
            let _ = write!(s, " handle=\"{}\"", escape_attr(&link.handle));
        }
        let _ = writeln!(s, ">\n    <from_pdf>{}</from_pdf>\n  </reference>", escape_text(&r.raw));
    }
    s.push_str("</references>\n");
    s
}

pub fn render_intext_xml(document: &str, refs: &[InTextRef]) -> String {
    let mut s = String::from(DECL);
    let _ = writeln!(s, "<intextrefs document=\"{}\" offsets=\"{OFFSETS_SCHEME}\">", escape_attr(document));
    for r in refs {
        let _ = writeln!(
            s,
            "  <intextref>\n    <Reference>{}</Reference>\n    <Exact>{}</Exact>\n    <Start>{}</Start>\n    <End>{}</End>\n    <Prefix>{}</Prefix>\n    <Suffix>{}</Suffix>\n  </intextref>",
            r.reference_num,
            escape_text(&r.exact),
            r.span.start,
            r.span.end,
            escape_text(&r.prefix),
            escape_text(&r.suffix)
        );
    }
    s.push_str("</intextrefs>\n");
    s
}

fn render_jsonl<T: Serialize>(items: &[T]) -> String {
    let mut s = String::new();
    for it in items {
        s.push_str(&serde_json::to_string(it).expect("plain data serializes"));
        s.push('\n');
    }
    s
}

pub fn render_references_jsonl(refs: &[LinkRecord]) -> String {
    render_jsonl(refs)
}

pub fn render_intext_jsonl(refs: &[InTextRef]) -> String {
    render_jsonl(refs)
}

pub fn read_jsonl<T: for<'de> Deserialize<'de>>(text: &str) -> Result<Vec<T>, SerializeError> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| SerializeError::Xml(format!("JSON line {}: {e}", i + 1))))
        .collect()
}

fn attrs(e: &BytesStart<'_>) -> Result<Vec<(String, String)>, SerializeError> {
    e.attributes()
        .map(|a| {
            let a = a.map_err(|e| SerializeError::Xml(e.to_string()))?;
            let key = a.key.as_ref().to_string();
            let value = a.normalized_value(XmlVersion::Implicit1_0).map_err(|e| SerializeError::Xml(e.to_string()))?;
            Ok((key, value.into_owned()))
        })
        .collect()
}

fn attr<'a>(list: &'a [(String, String)], key: &str) -> Option<&'a str> {
    list.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
}

fn number(list: &[(String, String)], key: &str) -> Result<usize, SerializeError> {
    attr(list, key)
        .ok_or_else(|| SerializeError::Xml(format!("missing attribute {key}")))?
        .parse()
        .map_err(|_| SerializeError::Xml(format!("attribute {key} is not a number")))
}

/// Minimal event walk shared by both readers: element starts (with their
/// attributes), decoded text, and element ends.
enum Item {
    Open(String, Vec<(String, String)>),
    Text(String),
    Close(String),
}

fn walk(xml: &str) -> Result<Vec<Item>, SerializeError> {
    let mut reader = Reader::from_str(xml);
    let err = |e: quick_xml::Error| SerializeError::Xml(e.to_string());
    let mut out = Vec::new();
    loop {
        match reader.read_event().map_err(err)? {
            Event::Start(e) => out.push(Item::Open(e.name().as_ref().to_string(), attrs(&e)?)),
            Event::Empty(e) => {
                let name = e.name().as_ref().to_string();
                out.push(Item::Open(name.clone(), attrs(&e)?));
                out.push(Item::Close(name));
            }
            Event::End(e) => out.push(Item::Close(e.name().as_ref().to_string())),
            Event::Text(t) => out.push(Item::Text(t.xml10_content().into_owned())),
            Event::CData(c) => out.push(Item::Text(c.xml10_content().into_owned())),
            Event::GeneralRef(r) => {
                let ch = resolve_ref(&r).ok_or_else(|| SerializeError::Xml(format!("unknown entity &{};", r.xml10_content())))?;
                out.push(Item::Text(ch.to_string()));
            }
            Event::Eof => break,
            _ => {}
        }
    }
    Ok(out)
}

/// Parse a references file back. The unparsed tail is not stored there and
/// comes back empty; the link kind follows from the handle.
pub fn read_references_xml(xml: &str) -> Result<(String, Vec<LinkRecord>), SerializeError> {
    let mut document = None;
    let mut out = Vec::new();
    let mut current: Option<LinkRecord> = None;
    let mut in_raw = false;
    for item in walk(xml)? {
        match item {
            Item::Open(name, a) if name == "references" => {
                document = Some(attr(&a, "document").unwrap_or_default().to_string());
            }
            Item::Open(name, a) if name == "reference" => {
                let start = number(&a, "start")?;
                let end = number(&a, "end")?;
                let reference = ParsedReference {
                    num: number(&a, "num")?,
                    span: start..end,
                    author: attr(&a, "author").unwrap_or_default().to_string(),
                    title: attr(&a, "title").unwrap_or_default().to_string(),
                    year: attr(&a, "year").unwrap_or_default().to_string(),
                    ..Default::default()
                };
                let link = attr(&a, "handle").map(|h| Link { handle: h.to_string(), kind: LinkKind::of_handle(h) });
                current = Some(LinkRecord { citing: document.clone().unwrap_or_default(), reference, link });
            }
            Item::Open(name, _) if name == "from_pdf" => in_raw = true,
            Item::Close(name) if name == "from_pdf" => in_raw = false,
            Item::Text(t) if in_raw => {
                if let Some(c) = &mut current {
                    c.reference.raw.push_str(&t);
                }
            }
            Item::Close(name) if name == "reference" => {
                out.push(current.take().ok_or_else(|| SerializeError::Xml("stray </reference>".into()))?);
            }
            Item::Open(name, _) => return Err(SerializeError::Xml(format!("unexpected element <{name}>"))),
            _ => {}
        }
    }
    let document = document.ok_or_else(|| SerializeError::Xml("missing <references> root".into()))?;
    Ok((document, out))
}

pub fn read_intext_xml(xml: &str) -> Result<(String, Vec<InTextRef>), SerializeError> {
    let mut document = None;
    let mut out = Vec::new();
    let mut fields: Vec<(String, String)> = Vec::new();
    let mut open: Option<String> = None;
    for item in walk(xml)? {
        match item {
            Item::Open(name, a) if name == "intextrefs" => {
                document = Some(attr(&a, "document").unwrap_or_default().to_string());
            }
            Item::Open(name, _) if name == "intextref" => fields.clear(),
            Item::Open(name, _) => {
                fields.push((name.clone(), String::new()));
                open = Some(name);
            }
            Item::Text(t) => {
                if let (Some(_), Some(last)) = (&open, fields.last_mut()) {
                    last.1.push_str(&t);
                }
            }
            Item::Close(name) if name == "intextref" => {
                let get = |k: &str| attr(&fields, k).ok_or_else(|| SerializeError::Xml(format!("missing <{k}>")));
                let num = |k: &str| -> Result<usize, SerializeError> {
                    get(k)?.trim().parse().map_err(|_| SerializeError::Xml(format!("<{k}> is not a number")))
                };
                out.push(InTextRef {
                    reference_num: num("Reference")?,
                    exact: get("Exact")?.to_string(),
                    span: num("Start")?..num("End")?,
                    prefix: get("Prefix")?.to_string(),
                    suffix: get("Suffix")?.to_string(),
                });
            }
            Item::Close(_) => open = None,
        }
    }
    let document = document.ok_or_else(|| SerializeError::Xml("missing <intextrefs> root".into()))?;
    Ok((document, out))
}

/// Write to a sibling temporary file, then rename over the target.
pub(crate) fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)
}

fn remove_if_present(path: &Path) -> std::io::Result<()> {
    match std::fs::remove_file(path) {
        Err(e) if e.kind() != std::io::ErrorKind::NotFound => Err(e),
        _ => Ok(()),
    }
}

/// Write all four output files of a processed document and drop any stale
/// error sidecar.
pub fn write_document(doc: &CitationDocument, out: &Path) -> Result<OutputPaths, SerializeError> {
    let paths = OutputPaths::new(out, &doc.id);
    let id = doc.id.to_string();
    write_atomic(&paths.refs_xml, &render_references_xml(&id, &doc.references))?;
    write_atomic(&paths.intext_xml, &render_intext_xml(&id, &doc.intext))?;
    write_atomic(&paths.refs_jsonl, &render_references_jsonl(&doc.references))?;
    write_atomic(&paths.intext_jsonl, &render_intext_jsonl(&doc.intext))?;
    remove_if_present(&paths.error)?;
    Ok(paths)
}

/// Mark a document unprocessed: write its sidecar and remove any outputs
/// left from an earlier run.
pub fn write_error_sidecar(id: &DocumentId, sidecar: &ErrorSidecar, out: &Path) -> Result<PathBuf, SerializeError> {
    let paths = OutputPaths::new(out, id);
    for p in paths.outputs() {
        remove_if_present(p)?;
    }
    let mut json = serde_json::to_string_pretty(sidecar).expect("sidecar serializes");
    json.push('\n');
    write_atomic(&paths.error, &json)?;
    Ok(paths.error)
}
