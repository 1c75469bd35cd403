//! Structured page/item text dumps: loading, linearization and reference
//! section segmentation.
//!
//! The input is the JSON produced by a PDF text extractor: an array of pages,
//! each with `textContent.items`, each item carrying at least `str`.
//!
//! Linearization contract (offsets are code points into the produced text):
//! items are appended in page order, then stored order. Before each item with
//! non-empty `str`, except the first, one separator may be inserted:
//! - `\n` when the page changes, or when both items have a transform and
//!   their vertical positions (`transform[5]`) differ by more than 1.0, unless
//!   the text already ends with `\n`;
//! - otherwise a single space, unless the text ends with whitespace or the
//!   item starts with whitespace.

use std::ops::Range;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::normalize::{collapse_whitespace, repair_homoglyphs, HomoglyphTable};

#[derive(Debug, Error)]
pub enum DocIngestError {
    #[error("broken structure: {0}")]
    BrokenStructure(String),
    #[error("document has no text layer")]
    NoTextLayer,
    #[error("no reference section found")]
    NoReferenceSection,
    #[error("cannot read document: {0}")]
    Io(#[from] std::io::Error),
}

/// One positioned text run of a page.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageItem {
    #[serde(rename = "str")]
    pub text: String,
    pub dir: Option<String>,
    pub width: Option<f64>,
    pub height: Option<f64>,
    pub transform: Option<[f64; 6]>,
    #[serde(rename = "fontName")]
    pub font_name: Option<String>,
    /// 1-based.
    pub page: u32,
}

#[derive(Deserialize)]
struct RawPage {
    page: Option<i64>,
    #[serde(rename = "textContent")]
    text_content: RawTextContent,
}

#[derive(Deserialize)]
struct RawTextContent {
    items: Vec<RawItem>,
}

#[derive(Deserialize)]
struct RawItem {
    #[serde(rename = "str")]
    text: String,
    dir: Option<String>,
    width: Option<f64>,
    height: Option<f64>,
    transform: Option<Vec<f64>>,
    #[serde(rename = "fontName")]
    font_name: Option<String>,
}

/// Parse a page/item dump. Pages are sorted ascending (stable), items keep
/// their stored order.
pub fn parse_document(json: &str) -> Result<Vec<PageItem>, DocIngestError> {
    let pages: Vec<RawPage> =
        serde_json::from_str(json).map_err(|e| DocIngestError::BrokenStructure(e.to_string()))?;
    let mut numbered = Vec::with_capacity(pages.len());
    for (i, p) in pages.into_iter().enumerate() {
        let page = p.page.unwrap_or(i as i64 + 1);
        if page < 1 || page > u32::MAX as i64 {
            return Err(DocIngestError::BrokenStructure(format!("page number {page} at index {i}")));
        }
        numbered.push((page as u32, p.text_content.items));
    }
    numbered.sort_by_key(|(page, _)| *page);
    let mut items = Vec::new();
    for (page, raw_items) in numbered {
        for (j, r) in raw_items.into_iter().enumerate() {
            let transform = match r.transform {
                None => None,
                Some(t) => Some(<[f64; 6]>::try_from(t.as_slice()).map_err(|_| {
                    DocIngestError::BrokenStructure(format!(
                        "page {page} item {j}: transform has {} numbers, expected 6",
                        t.len()
                    ))
                })?),
            };
            items.push(PageItem {
                text: r.text,
                dir: r.dir,
                width: r.width,
                height: r.height,
                transform,
                font_name: r.font_name,
                page,
            });
        }
    }
    if !items.iter().any(|it| !it.text.trim().is_empty()) {
        return Err(DocIngestError::NoTextLayer);
    }
    Ok(items)
}

pub fn load_document(path: &Path) -> Result<Vec<PageItem>, DocIngestError> {
    let bytes = std::fs::read(path)?;
    let text = String::from_utf8(bytes).map_err(|e| DocIngestError::BrokenStructure(format!("not UTF-8: {e}")))?;
    parse_document(&text)
}

/// A separator inserted between two items.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Separator {
    /// Code-point offset of the separator in the text.
    pub at: usize,
    pub ch: char,
}

/// The linearized document with its offset maps.
#[derive(Debug, Clone, PartialEq)]
pub struct DocumentText {
    pub text: String,
    /// Code-point interval of each item's `str`.
    pub item_spans: Vec<Range<usize>>,
    pub item_pages: Vec<u32>,
    pub separators: Vec<Separator>,
    /// Item index owning each code point; separators belong to the item
    /// they precede.
    owner: Vec<u32>,
    /// Byte offset of each code point, plus the total length.
    byte_at: Vec<usize>,
}

impl DocumentText {
    /// Length in code points.
    pub fn len(&self) -> usize {
        self.owner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.owner.is_empty()
    }

    /// `(page, item index)` of the code point at `offset`.
    pub fn offset_map(&self, offset: usize) -> Option<(u32, usize)> {
        let item = *self.owner.get(offset)? as usize;
        Some((self.item_pages[item], item))
    }

    /// Text of a code-point interval.
    pub fn slice(&self, span: Range<usize>) -> &str {
        &self.text[self.byte_at[span.start]..self.byte_at[span.end]]
    }

    pub fn byte_offset(&self, char_offset: usize) -> usize {
        self.byte_at[char_offset]
    }

    /// Code-point offset of a byte offset that falls on a char boundary.
    pub fn char_offset(&self, byte_offset: usize) -> usize {
        self.byte_at.partition_point(|&b| b < byte_offset)
    }
}

/// Join items into one text. See the module docs for the separator rules.
pub fn linearize(items: &[PageItem]) -> DocumentText {
    let mut text = String::new();
    let mut owner: Vec<u32> = Vec::new();
    let mut byte_at: Vec<usize> = Vec::new();
    let mut item_spans = Vec::with_capacity(items.len());
    let mut separators = Vec::new();
    let mut prev: Option<&PageItem> = None;

    for (i, item) in items.iter().enumerate() {
        if item.text.is_empty() {
            item_spans.push(owner.len()..owner.len());
            continue;
        }
        if let Some(p) = prev {
            let new_line = p.page != item.page
                || matches!((p.transform, item.transform), (Some(a), Some(b)) if (a[5] - b[5]).abs() > 1.0);
            let sep = if new_line {
                (!text.ends_with('\n')).then_some('\n')
            } else {
                let left_ws = text.chars().next_back().is_some_and(char::is_whitespace);
                let right_ws = item.text.chars().next().is_some_and(char::is_whitespace);
                (!left_ws && !right_ws).then_some(' ')
            };
            if let Some(ch) = sep {
                separators.push(Separator { at: owner.len(), ch });
                byte_at.push(text.len());
                owner.push(i as u32);
                text.push(ch);
            }
        }
        let start = owner.len();
        for ch in item.text.chars() {
            byte_at.push(text.len());
            owner.push(i as u32);
            text.push(ch);
        }
        item_spans.push(start..owner.len());
        prev = Some(item);
    }
    byte_at.push(text.len());
    DocumentText {
        text,
        item_spans,
        item_pages: items.iter().map(|it| it.page).collect(),
        separators,
        owner,
        byte_at,
    }
}

pub const DEFAULT_HEADINGS: [&str; 5] = [
    "Список литературы",
    "Литература",
    "Библиографический список",
    "References",
    "Библиография",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SegmentConfig {
    pub headings: Vec<String>,
    /// Entries a headingless numbered block needs to count as a reference list.
    pub min_fallback_entries: usize,
}

impl Default for SegmentConfig {
    fn default() -> Self {
        SegmentConfig {
            headings: DEFAULT_HEADINGS.iter().map(|s| s.to_string()).collect(),
            min_fallback_entries: 3,
        }
    }
}

/// One numbered entry of the reference list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawEntry {
    pub num: usize,
    pub raw: String,
    pub span: Range<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceSection {
    /// From the start of the heading line (or of the first entry when there
    /// is no heading) to the end of the text.
    pub interval: Range<usize>,
    pub entries: Vec<RawEntry>,
}

struct Line {
    start: usize,
    chars: Vec<char>,
}

fn lines(doc: &DocumentText) -> Vec<Line> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut chars = Vec::new();
    for (i, ch) in doc.text.chars().enumerate() {
        if ch == '\n' {
            out.push(Line { start, chars: std::mem::take(&mut chars) });
            start = i + 1;
        } else {
            chars.push(ch);
        }
    }
    out.push(Line { start, chars });
    out
}

fn heading_key(s: &str, table: &HomoglyphTable) -> String {
    let repaired: Vec<String> = s
        .split_whitespace()
        .map(|t| repair_homoglyphs(t, table).0.to_lowercase())
        .collect();
    let mut key = collapse_whitespace(&repaired.join(" "));
    // optional leading section number: "5.", "5", "V."
    if let Some((first, rest)) = key.split_once(' ') {
        let num = first.trim_end_matches('.');
        let roman = num.chars().all(|c| matches!(c, 'i' | 'v' | 'x' | 'l' | 'с' | 'х'));
        if !num.is_empty() && (num.chars().all(|c| c.is_ascii_digit()) || roman) {
            key = rest.to_string();
        }
    }
    key.trim_end_matches([':', '.']).trim_end().to_string()
}

/// Length in chars of an entry marker for `n` at the start of `line`
/// (after leading whitespace), including the whitespace that follows it.
fn marker_len(line: &[char], n: usize) -> Option<usize> {
    let lead = line.iter().take_while(|c| c.is_whitespace()).count();
    let rest = &line[lead..];
    let digits: Vec<char> = n.to_string().chars().collect();
    let (open, body) = match rest.first() {
        Some('[') => (1, &rest[1..]),
        _ => (0, rest),
    };
    if !body.starts_with(&digits) {
        return None;
    }
    let after = &body[digits.len()..];
    let close_len = match (open, after.first()) {
        (1, Some(']')) => 1,
        (0, Some('.')) | (0, Some(')')) => 1,
        _ => return None,
    };
    let after_marker = &after[close_len..];
    let ws = after_marker.iter().take_while(|c| c.is_whitespace()).count();
    if ws == 0 && !after_marker.is_empty() {
        return None;
    }
    Some(lead + open + digits.len() + close_len + ws)
}

/// Numbered entries starting at `lines[from]`. The first entry must be 1 and
/// each next one exactly one more.
fn collect_entries(doc: &DocumentText, lines: &[Line], from: usize, end: usize) -> Vec<RawEntry> {
    let mut entries: Vec<RawEntry> = Vec::new();
    let mut open: Option<(usize, usize)> = None; // (num, start)
    let mut last_end = 0;
    let close = |entries: &mut Vec<RawEntry>, num: usize, start: usize, end: usize| {
        let mut s = start;
        let mut e = end.max(start);
        let chars: Vec<char> = doc.slice(s..e).chars().collect();
        let lead = chars.iter().take_while(|c| c.is_whitespace()).count();
        let trail = chars[lead..].iter().rev().take_while(|c| c.is_whitespace()).count();
        s += lead;
        e -= trail;
        entries.push(RawEntry { num, raw: doc.slice(s..e).to_string(), span: s..e });
    };
    for line in &lines[from..] {
        let next = open.map_or(1, |(n, _)| n + 1);
        if let Some(len) = marker_len(&line.chars, next) {
            if let Some((num, start)) = open {
                close(&mut entries, num, start, last_end);
            }
            open = Some((next, line.start + len));
        }
        if open.is_some() {
            last_end = line.start + line.chars.len();
        }
    }
    if let Some((num, start)) = open {
        close(&mut entries, num, start, last_end.min(end));
    }
    entries
}

/// Find the reference list: the last heading line from `config.headings`,
/// or failing that the last block of numbered entries starting at 1.
pub fn segment_references(
    doc: &DocumentText,
    config: &SegmentConfig,
    table: &HomoglyphTable,
) -> Result<ReferenceSection, DocIngestError> {
    let lines = lines(doc);
    let headings: Vec<String> = config.headings.iter().map(|h| heading_key(h, table)).collect();
    let heading = lines.iter().enumerate().rev().find(|(_, l)| {
        let s: String = l.chars.iter().collect();
        !s.trim().is_empty() && headings.contains(&heading_key(&s, table))
    });
    if let Some((idx, line)) = heading {
        let entries = collect_entries(doc, &lines, idx + 1, doc.len());
        return Ok(ReferenceSection { interval: line.start..doc.len(), entries });
    }
    for (idx, line) in lines.iter().enumerate().rev() {
        if marker_len(&line.chars, 1).is_none() {
            continue;
        }
        let entries = collect_entries(doc, &lines, idx, doc.len());
        if entries.len() >= config.min_fallback_entries.max(1) {
            return Ok(ReferenceSection { interval: line.start..doc.len(), entries });
        }
    }
    Err(DocIngestError::NoReferenceSection)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE_DUMP: &str = r#"[{"page":1,"textContent":{"items":[
{"str":" ", "dir":"ltr", "width":1.2, "height":23.04, "transform": [4.8, 0, 0, 4.8, 118.3199, 736.64], "fontName": "g_d0_f1"},
{"str": "Available online at ", "dir": "ltr", "width": 75.63096, "height": 78.85439999999998, "transform": [8.879999999999999, 0, 0, 8.879999999999999, 182.9868, 788.48], "fontName": "g_d0_f2"},
{"str": "www.sciencedirect.com", "dir": "ltr", "width": 94.038312, "height": 78.85439999999998, "transform": [8.879999999999999, 0, 0, 8.879999999999999, 258.5376, 788.48], "fontName": "g_d0_f2"}]}}]"#;

    fn item(text: &str, page: u32, y: f64) -> PageItem {
        PageItem {
            text: text.into(),
            dir: None,
            width: None,
            height: None,
            transform: Some([1.0, 0.0, 0.0, 1.0, 0.0, y]),
            font_name: None,
            page,
        }
    }

    fn doc_from_lines(lines: &[&str]) -> DocumentText {
        let items: Vec<PageItem> = lines
            .iter()
            .enumerate()
            .map(|(i, l)| item(l, 1, 800.0 - 12.0 * i as f64))
            .collect();
        linearize(&items)
    }

    #[test]
    fn sample_dump_loads() {
        let items = parse_document(SAMPLE_DUMP).unwrap();
        assert_eq!(items.len(), 3);
        assert_eq!(items[0].text, " ");
        assert_eq!(items[0].page, 1);
        assert_eq!(items[1].font_name.as_deref(), Some("g_d0_f2"));
        let doc = linearize(&items);
        assert_eq!(doc.text, " \nAvailable online at www.sciencedirect.com");
        assert_eq!(doc.separators, vec![Separator { at: 1, ch: '\n' }]);
    }

    #[test]
    fn load_errors() {
        assert!(matches!(parse_document("[]"), Err(DocIngestError::NoTextLayer)));
        assert!(matches!(
            parse_document(r#"[{"page":1,"textContent":{"items":[]}}]"#),
            Err(DocIngestError::NoTextLayer)
        ));
        assert!(matches!(
            parse_document(r#"[{"page":1,"textContent":{"items":[{"str":"  "}]}}]"#),
            Err(DocIngestError::NoTextLayer)
        ));
        let truncated = &SAMPLE_DUMP[..SAMPLE_DUMP.len() / 2];
        assert!(matches!(parse_document(truncated), Err(DocIngestError::BrokenStructure(_))));
        assert!(matches!(
            parse_document(r#"[{"page":0,"textContent":{"items":[{"str":"a"}]}}]"#),
            Err(DocIngestError::BrokenStructure(_))
        ));
        assert!(matches!(
            parse_document(r#"[{"page":1,"textContent":{"items":[{"str":"a","transform":[1,2]}]}}]"#),
            Err(DocIngestError::BrokenStructure(_))
        ));
    }

    #[test]
    fn pages_are_sorted_and_separated() {
        let json = r#"[{"page":2,"textContent":{"items":[{"str":"second"}]}},{"page":1,"textContent":{"items":[{"str":"first"},{"str":"word"}]}}]"#;
        let doc = linearize(&parse_document(json).unwrap());
        assert_eq!(doc.text, "first word\nsecond");
        assert_eq!(doc.offset_map(0), Some((1, 0)));
        assert_eq!(doc.offset_map(6), Some((1, 1)));
        assert_eq!(doc.offset_map(10), Some((2, 2)));
        assert_eq!(doc.offset_map(11), Some((2, 2)));
        assert_eq!(doc.offset_map(doc.len()), None);
    }

    #[test]
    fn single_item_text_is_its_str() {
        let doc = linearize(&[item("Привет, мир", 1, 0.0)]);
        assert_eq!(doc.text, "Привет, мир");
        assert!(doc.separators.is_empty());
        assert_eq!(doc.slice(8..11), "мир");
        assert_eq!(doc.char_offset(doc.byte_offset(8)), 8);
    }

    #[test]
    fn heading_and_entries() {
        let doc = doc_from_lines(&[
            "Введение",
            "Текст со ссылкой [1] и ещё [2].",
            "Список литературы",
            "1. Иванов И.И. Труды. М.: Наука, 2001.",
            "2. Петров П.П. Очерки",
            "экономики. СПб., 1999.",
            "3) Сидоров С. Статья // Журнал. 2005.",
        ]);
        let sec = segment_references(&doc, &SegmentConfig::default(), &HomoglyphTable::default()).unwrap();
        assert_eq!(doc.slice(sec.interval.clone()).lines().next(), Some("Список литературы"));
        let nums: Vec<usize> = sec.entries.iter().map(|e| e.num).collect();
        assert_eq!(nums, [1, 2, 3]);
        assert_eq!(sec.entries[0].raw, "Иванов И.И. Труды. М.: Наука, 2001.");
        assert_eq!(sec.entries[1].raw, "Петров П.П. Очерки\nэкономики. СПб., 1999.");
        for e in &sec.entries {
            assert_eq!(doc.slice(e.span.clone()), e.raw);
            assert!(sec.interval.start <= e.span.start && e.span.end <= sec.interval.end);
        }
    }

    #[test]
    fn last_heading_wins_and_variants_match() {
        let table = HomoglyphTable::default();
        let doc = doc_from_lines(&["References", "1. Old.", "Text", "5. ЛИТЕРАТУРА:", "[1] New one.", "[2] Next."]);
        let sec = segment_references(&doc, &SegmentConfig::default(), &table).unwrap();
        assert_eq!(sec.entries.len(), 2);
        assert_eq!(sec.entries[0].raw, "New one.");
        // Latin homoglyphs in a Cyrillic heading
        assert_eq!(heading_key("Литepaтypa", &table), heading_key("Литература", &table));
    }

    #[test]
    fn entry_numbers_must_continue() {
        let doc = doc_from_lines(&["References", "1. One", "2001. not an entry", "3. still one", "2. Two"]);
        let sec = segment_references(&doc, &SegmentConfig::default(), &HomoglyphTable::default()).unwrap();
        assert_eq!(sec.entries.len(), 2);
        assert_eq!(sec.entries[0].raw, "One\n2001. not an entry\n3. still one");
    }

    #[test]
    fn heading_without_entries() {
        let doc = doc_from_lines(&["Body", "Литература"]);
        let sec = segment_references(&doc, &SegmentConfig::default(), &HomoglyphTable::default()).unwrap();
        assert!(sec.entries.is_empty());
        assert_eq!(sec.interval, 5..doc.len());
    }

    #[test]
    fn fallback_block() {
        let table = HomoglyphTable::default();
        let doc = doc_from_lines(&["Body 1. text", "1. A", "2. B", "3. C"]);
        let sec = segment_references(&doc, &SegmentConfig::default(), &table).unwrap();
        assert_eq!(sec.entries.len(), 3);
        let short = doc_from_lines(&["Body", "1. A", "2. B"]);
        assert!(matches!(
            segment_references(&short, &SegmentConfig::default(), &table),
            Err(DocIngestError::NoReferenceSection)
        ));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn items() -> impl Strategy<Value = Vec<PageItem>> {
            proptest::collection::vec(
                ("[ a-zа-я\\[\\]0-9.]{0,8}", 1u32..4, 0u8..3),
                1..30,
            )
            .prop_map(|raw| {
                let mut v: Vec<PageItem> = raw
                    .into_iter()
                    .map(|(t, page, line)| item(&t, page, 700.0 - f64::from(line) * 10.0))
                    .collect();
                v.sort_by_key(|i| i.page);
                v
            })
        }

        proptest! {
            #[test]
            fn linearization_is_lossless(items in items()) {
                let doc = linearize(&items);
                prop_assert_eq!(doc.item_spans.len(), items.len());
                for (i, (span, it)) in doc.item_spans.iter().zip(&items).enumerate() {
                    prop_assert_eq!(doc.slice(span.clone()), it.text.as_str());
                    if !span.is_empty() {
                        prop_assert_eq!(doc.offset_map(span.start), Some((it.page, i)));
                    }
                }
                // removing recorded separators gives the concatenation of strs
                let mut stripped = String::new();
                let sep_at: std::collections::BTreeSet<usize> = doc.separators.iter().map(|s| s.at).collect();
                for (i, ch) in doc.text.chars().enumerate() {
                    if !sep_at.contains(&i) {
                        stripped.push(ch);
                    }
                }
                let joined: String = items.iter().map(|i| i.text.as_str()).collect();
                prop_assert_eq!(stripped, joined);
                for s in &doc.separators {
                    prop_assert!(s.ch == ' ' || s.ch == '\n');
                }
                prop_assert!((0..doc.len()).all(|o| doc.offset_map(o).is_some()));
            }

            #[test]
            fn entry_spans_are_substrings(body in proptest::collection::vec("[a-zа-я ]{1,20}", 0..5), refs in proptest::collection::vec("[A-Za-zа-я ,.]{1,30}", 0..6)) {
                let mut lines: Vec<String> = body;
                lines.push("Литература".into());
                for (i, r) in refs.iter().enumerate() {
                    lines.push(format!("{}. {}", i + 1, r));
                }
                let refs_lines: Vec<&str> = lines.iter().map(String::as_str).collect();
                let doc = doc_from_lines(&refs_lines);
                let sec = segment_references(&doc, &SegmentConfig::default(), &HomoglyphTable::default()).unwrap();
                let mut prev_end = sec.interval.start;
                for (k, e) in sec.entries.iter().enumerate() {
                    prop_assert_eq!(e.num, k + 1);
                    prop_assert_eq!(doc.slice(e.span.clone()), e.raw.as_str());
                    prop_assert!(e.span.start >= prev_end && e.span.end <= sec.interval.end);
                    prev_end = e.span.end;
                }
            }
        }
    }
}
