//! Annotated training data: `<r>` fragments with `<a>`, `<t>` and `<y>` spans,
//! and the two-column `token<TAB>label` layout the labeler trains on.

use std::fmt;
use std::ops::Range;
use std::path::Path;
use std::str::FromStr;

use quick_xml::events::Event;
use quick_xml::Reader;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::normalize::{collapse_whitespace, tokenize};
use crate::xml::resolve_ref;

#[derive(Debug, Error)]
pub enum TrainingDataError {
    #[error("malformed annotation XML: {0}")]
    Xml(String),
    #[error("unexpected element <{0}>")]
    UnexpectedElement(String),
    #[error("field elements may not nest or overlap")]
    NestedField,
    #[error("text outside the <r> element")]
    TextOutsideRoot,
    #[error("fragment has no <r> element")]
    MissingRoot,
    #[error("field boundary falls inside token {0:?}")]
    FieldBoundaryInsideToken(String),
    #[error("field <{0}> holds no tokens")]
    EmptyField(char),
    #[error("year field spans {0} tokens; it must be exactly one")]
    YearSpansTokens(usize),
    #[error("reconstructed text differs from the tag-stripped fragment")]
    RoundTripMismatch,
    #[error("invalid labeled sequence: {0}")]
    InvalidSequence(String),
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("column line {line}: {reason}")]
    Columns { line: usize, reason: String },
    #[error("annotation line {line}: {source}")]
    AtLine {
        line: usize,
        #[source]
        source: Box<TrainingDataError>,
    },
    #[error("failed to read training data: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Field {
    Author,
    Title,
    Year,
}

impl Field {
    pub fn letter(self) -> char {
        match self {
            Field::Author => 'A',
            Field::Title => 'T',
            Field::Year => 'Y',
        }
    }

    fn from_element(name: &str) -> Option<Self> {
        match name {
            "a" => Some(Field::Author),
            "t" => Some(Field::Title),
            "y" => Some(Field::Year),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "B-A")]
    BeginAuthor,
    #[serde(rename = "I-A")]
    InsideAuthor,
    #[serde(rename = "B-T")]
    BeginTitle,
    #[serde(rename = "I-T")]
    InsideTitle,
    #[serde(rename = "B-Y")]
    BeginYear,
    #[serde(rename = "O")]
    Outside,
}

impl Label {
    pub const ALL: [Label; 6] = [
        Label::BeginAuthor,
        Label::InsideAuthor,
        Label::BeginTitle,
        Label::InsideTitle,
        Label::BeginYear,
        Label::Outside,
    ];
    pub const COUNT: usize = 6;

    pub fn as_str(self) -> &'static str {
        match self {
            Label::BeginAuthor => "B-A",
            Label::InsideAuthor => "I-A",
            Label::BeginTitle => "B-T",
            Label::InsideTitle => "I-T",
            Label::BeginYear => "B-Y",
            Label::Outside => "O",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Label {
        Label::ALL[i]
    }

    pub fn field(self) -> Option<Field> {
        match self {
            Label::BeginAuthor | Label::InsideAuthor => Some(Field::Author),
            Label::BeginTitle | Label::InsideTitle => Some(Field::Title),
            Label::BeginYear => Some(Field::Year),
            Label::Outside => None,
        }
    }

    pub fn is_inside(self) -> bool {
        matches!(self, Label::InsideAuthor | Label::InsideTitle)
    }

    pub fn begin(field: Field) -> Label {
        match field {
            Field::Author => Label::BeginAuthor,
            Field::Title => Label::BeginTitle,
            Field::Year => Label::BeginYear,
        }
    }

    /// The I- label of `field`; years are single-token and have none.
    pub fn inside(field: Field) -> Option<Label> {
        match field {
            Field::Author => Some(Label::InsideAuthor),
            Field::Title => Some(Label::InsideTitle),
            Field::Year => None,
        }
    }

    /// Whether `self` may follow `prev` (`None` = sequence start).
    pub fn may_follow(self, prev: Option<Label>) -> bool {
        if !self.is_inside() {
            return true;
        }
        prev.is_some_and(|p| p.field() == self.field() && p != Label::BeginYear)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = TrainingDataError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Label::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| TrainingDataError::UnknownLabel(s.to_string()))
    }
}

pub fn is_valid_scheme(labels: &[Label]) -> bool {
    let mut prev = None;
    for &l in labels {
        if !l.may_follow(prev) {
            return false;
        }
        prev = Some(l);
    }
    true
}

/// Rewrite every orphan I-X (one not preceded by B-X/I-X) to B-X.
pub fn repair_labels(labels: &mut [Label]) {
    let mut prev = None;
    for l in labels.iter_mut() {
        if !l.may_follow(prev) {
            *l = Label::begin(l.field().expect("inside labels carry a field"));
        }
        prev = Some(*l);
    }
}

/// Tokens of one reference line paired with B-/I-/O labels.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LabeledSequence {
    tokens: Vec<String>,
    labels: Vec<Label>,
}

impl LabeledSequence {
    pub fn new(tokens: Vec<String>, labels: Vec<Label>) -> Result<Self, TrainingDataError> {
        if tokens.len() != labels.len() {
            return Err(TrainingDataError::InvalidSequence(format!(
                "{} tokens but {} labels",
                tokens.len(),
                labels.len()
            )));
        }
        if let Some(t) = tokens.iter().find(|t| t.is_empty() || t.chars().any(char::is_whitespace)) {
            return Err(TrainingDataError::InvalidSequence(format!(
                "token {t:?} is empty or contains whitespace"
            )));
        }
        if !is_valid_scheme(&labels) {
            return Err(TrainingDataError::InvalidSequence(
                "I- label does not continue a field of the same type".into(),
            ));
        }
        Ok(LabeledSequence { tokens, labels })
    }

    pub fn from_pairs<S: Into<String>>(
        pairs: impl IntoIterator<Item = (S, Label)>,
    ) -> Result<Self, TrainingDataError> {
        let (tokens, labels) = pairs.into_iter().map(|(t, l)| (t.into(), l)).unzip();
        Self::new(tokens, labels)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&str, Label)> {
        self.tokens.iter().map(String::as_str).zip(self.labels.iter().copied())
    }
}

struct Stripped {
    text: String,
    fields: Vec<(Field, Range<usize>)>,
}

fn strip(fragment: &str) -> Result<Stripped, TrainingDataError> {
    let mut reader = Reader::from_str(fragment);
    let xml_err = |e: quick_xml::Error| TrainingDataError::Xml(e.to_string());

    let mut text = String::new();
    let mut len = 0usize;
    let mut fields = Vec::new();
    let mut root_open = false;
    let mut root_seen = false;
    let mut open_field: Option<(Field, usize)> = None;

    fn push(s: &str, text: &mut String, len: &mut usize) {
        text.push_str(s);
        *len += s.chars().count();
    }

    loop {
        match reader.read_event().map_err(xml_err)? {
            Event::Start(e) => {
                let name = e.name().as_ref().to_string();
                if name == "r" {
                    if root_seen {
                        return Err(TrainingDataError::UnexpectedElement(name));
                    }
                    root_open = true;
                    root_seen = true;
                } else if let Some(field) = Field::from_element(&name) {
                    if !root_open {
                        return Err(TrainingDataError::TextOutsideRoot);
                    }
                    if open_field.is_some() {
                        return Err(TrainingDataError::NestedField);
                    }
                    open_field = Some((field, len));
                } else {
                    return Err(TrainingDataError::UnexpectedElement(name));
                }
            }
            Event::Empty(e) => {
                let name = e.name().as_ref().to_string();
                match (name.as_str(), Field::from_element(&name)) {
                    ("r", _) if !root_seen => root_seen = true,
                    (_, Some(field)) if root_open => return Err(TrainingDataError::EmptyField(field.letter())),
                    _ => return Err(TrainingDataError::UnexpectedElement(name)),
                }
            }
            Event::End(e) => {
                let name = e.name().as_ref().to_string();
                if name == "r" {
                    if open_field.is_some() {
                        return Err(TrainingDataError::NestedField);
                    }
                    root_open = false;
                } else if let Some((field, start)) = open_field.take() {
                    fields.push((field, start..len));
                }
            }
            Event::Text(t) => {
                let content = t.xml10_content();
                if !root_open {
                    if !content.trim().is_empty() {
                        return Err(TrainingDataError::TextOutsideRoot);
                    }
                } else {
                    push(&content, &mut text, &mut len);
                }
            }
            Event::CData(c) => {
                if !root_open {
                    return Err(TrainingDataError::TextOutsideRoot);
                }
                let content = c.xml10_content().into_owned();
                push(&content, &mut text, &mut len);
            }
            Event::GeneralRef(r) => {
                if !root_open {
                    return Err(TrainingDataError::TextOutsideRoot);
                }
                let ch = resolve_ref(&r)
                    .ok_or_else(|| TrainingDataError::Xml(format!("unknown entity &{};", r.xml10_content())))?;
                push(ch.encode_utf8(&mut [0; 4]), &mut text, &mut len);
            }
            Event::Eof => break,
            Event::Comment(_) | Event::Decl(_) | Event::PI(_) | Event::DocType(_) => {}
        }
    }
    if !root_seen {
        return Err(TrainingDataError::MissingRoot);
    }
    if root_open {
        return Err(TrainingDataError::Xml("unclosed <r> element".into()));
    }
    Ok(Stripped { text, fields })
}

/// Plain reference text of a fragment, tags removed.
pub fn strip_tags(fragment: &str) -> Result<String, TrainingDataError> {
    strip(fragment).map(|s| s.text)
}

/// Turn an annotation fragment into labeled tokens.
pub fn parse_annotation(fragment: &str) -> Result<LabeledSequence, TrainingDataError> {
    let Stripped { text, fields } = strip(fragment)?;
    let tokens = tokenize(&text);
    let mut labels = vec![Label::Outside; tokens.len()];
    for (field, range) in &fields {
        let mut inside: Vec<usize> = Vec::new();
        for tok in &tokens {
            let overlaps = tok.span.start < range.end && range.start < tok.span.end;
            if !overlaps {
                continue;
            }
            if tok.span.start < range.start || tok.span.end > range.end {
                return Err(TrainingDataError::FieldBoundaryInsideToken(tok.text.clone()));
            }
            inside.push(tok.index);
        }
        let Some((&first, rest)) = inside.split_first() else {
            return Err(TrainingDataError::EmptyField(field.letter()));
        };
        labels[first] = Label::begin(*field);
        match Label::inside(*field) {
            Some(l) => rest.iter().for_each(|&i| labels[i] = l),
            None if !rest.is_empty() => return Err(TrainingDataError::YearSpansTokens(inside.len())),
            None => {}
        }
    }
    let seq = LabeledSequence::new(tokens.into_iter().map(|t| t.text).collect(), labels)?;
    if reconstruct(&seq) != collapse_whitespace(&text) {
        return Err(TrainingDataError::RoundTripMismatch);
    }
    Ok(seq)
}

/// Read an annotation file: one `<r>` fragment per non-blank line.
pub fn load_annotations(path: &Path) -> Result<Vec<LabeledSequence>, TrainingDataError> {
    parse_annotation_lines(&std::fs::read_to_string(path)?)
}

pub fn parse_annotation_lines(text: &str) -> Result<Vec<LabeledSequence>, TrainingDataError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            parse_annotation(l).map_err(|e| TrainingDataError::AtLine {
                line: i + 1,
                source: Box::new(e),
            })
        })
        .collect()
}

/// `token<TAB>label` per line, no trailing newline.
pub fn render_columns(seq: &LabeledSequence) -> String {
    seq.pairs()
        .map(|(t, l)| format!("{t}\t{l}"))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Several sequences separated by one blank line, newline-terminated.
pub fn render_column_batch(seqs: &[LabeledSequence]) -> String {
    let mut out = seqs
        .iter()
        .filter(|s| !s.is_empty())
        .map(render_columns)
        .collect::<Vec<_>>()
        .join("\n\n");
    if !out.is_empty() {
        out.push('\n');
    }
    out
}

/// Inverse of [`render_column_batch`] (and of [`render_columns`] for one
/// sequence).
pub fn parse_columns(text: &str) -> Result<Vec<LabeledSequence>, TrainingDataError> {
    let mut out = Vec::new();
    let mut tokens = Vec::new();
    let mut labels = Vec::new();
    let flush = |tokens: &mut Vec<String>, labels: &mut Vec<Label>, out: &mut Vec<LabeledSequence>| {
        if tokens.is_empty() {
            return Ok(());
        }
        out.push(LabeledSequence::new(std::mem::take(tokens), std::mem::take(labels))?);
        Ok::<_, TrainingDataError>(())
    };
    for (i, line) in text.lines().enumerate() {
        if line.is_empty() {
            flush(&mut tokens, &mut labels, &mut out)?;
            continue;
        }
        let bad = |reason: String| TrainingDataError::Columns { line: i + 1, reason };
        let (tok, label) = line
            .split_once('\t')
            .ok_or_else(|| bad("expected token<TAB>label".into()))?;
        let label = label.parse::<Label>().map_err(|e| bad(e.to_string()))?;
        tokens.push(tok.to_string());
        labels.push(label);
    }
    flush(&mut tokens, &mut labels, &mut out)?;
    Ok(out)
}

/// Token texts joined with single spaces.
pub fn reconstruct(seq: &LabeledSequence) -> String {
    seq.tokens.join(" ")
}
