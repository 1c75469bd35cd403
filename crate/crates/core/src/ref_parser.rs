//! Turn a labeled reference line into the three linking fields.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::features::{contains_double_slash, featurize, year_core, FeatureContext, YearRange};
use crate::labeler::{Model, Tagged};
use crate::normalize::{find_cyrillic_span, repaired_class, tokenize, ScriptClass, Token};
use crate::training_data::{Field, Label};

/// One entry of a reference list, parsed.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedReference {
    /// 1-based ordinal in the reference list; 0 for a free-standing line.
    pub num: usize,
    pub raw: String,
    /// Code-point interval of `raw` in the document text.
    pub span: Range<usize>,
    pub author: String,
    pub title: String,
    pub year: String,
    pub unparsed_tail: String,
}

impl ParsedReference {
    /// Title without trailing punctuation, for comparisons.
    pub fn title_trimmed(&self) -> &str {
        trim_field_punct(&self.title)
    }

    /// All three linking fields are present.
    pub fn is_complete(&self) -> bool {
        !self.author.is_empty() && !self.title.is_empty() && !self.year.is_empty()
    }
}

/// Strip trailing separators (`. , ; : / – —` and spaces).
pub fn trim_field_punct(s: &str) -> &str {
    s.trim_end_matches(|c: char| matches!(c, '.' | ',' | ';' | ':' | '/' | '–' | '—' | '-') || c.is_whitespace())
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Fields {
    pub author: String,
    pub title: String,
    pub year: String,
    pub unparsed_tail: String,
}

fn runs(labels: &[Label], field: Field) -> Vec<Range<usize>> {
    let mut out: Vec<Range<usize>> = Vec::new();
    for (i, l) in labels.iter().enumerate() {
        if l.field() != Some(field) {
            continue;
        }
        match out.last_mut() {
            Some(r) if r.end == i && l.is_inside() => r.end = i + 1,
            _ => out.push(i..i + 1),
        }
    }
    out
}

fn join<S: AsRef<str>>(tokens: &[S], idx: impl IntoIterator<Item = usize>) -> String {
    idx.into_iter().map(|i| tokens[i].as_ref()).collect::<Vec<_>>().join(" ")
}

/// Collect author, title, year and the unparsed tail from a labeled line.
///
/// Author runs are joined with `", "` after dropping their trailing `,;`.
/// The title is every title token before the first double-slash token; when
/// there is none there, the first title run after it, cut at the next double
/// slash. The year is the 4-digit core of the first year token inside
/// `years`. The tail is the outside tokens after the title (all outside tokens
/// when there is no title).
pub fn assemble_fields<S: AsRef<str>>(tokens: &[S], labels: &[Label], years: YearRange) -> Fields {
    assert_eq!(tokens.len(), labels.len(), "one label per token");
    let n = tokens.len();

    let author = runs(labels, Field::Author)
        .into_iter()
        .map(|r| {
            let s = join(tokens, r);
            s.trim_end_matches([',', ';']).trim_end().to_string()
        })
        .filter(|s| !s.is_empty())
        .collect::<Vec<_>>()
        .join(", ");

    let is_slash = |i: usize| contains_double_slash(tokens[i].as_ref());
    let first_slash = (0..n).find(|&i| is_slash(i)).unwrap_or(n);
    let is_title = |i: usize| labels[i].field() == Some(Field::Title);
    let mut title_idx: Vec<usize> = (0..first_slash).filter(|&i| is_title(i)).collect();
    if title_idx.is_empty() {
        if let Some(start) = (first_slash..n).find(|&i| is_title(i) && !is_slash(i)) {
            title_idx = (start..n)
                .take_while(|&i| is_title(i) && !is_slash(i) && (i == start || labels[i].is_inside()))
                .collect();
        }
    }
    let title = join(tokens, title_idx.iter().copied());

    let year = (0..n)
        .filter(|&i| labels[i] == Label::BeginYear)
        .filter_map(|i| year_core(tokens[i].as_ref()))
        .find(|core| core.parse().is_ok_and(|y| years.contains(y)))
        .unwrap_or("")
        .to_string();

    let tail_from = title_idx.last().map_or(0, |&i| i + 1);
    let unparsed_tail = join(tokens, (tail_from..n).filter(|&i| labels[i] == Label::Outside));

    Fields { author, title, year, unparsed_tail }
}

/// Everything [`parse_line`] worked out for one line.
#[derive(Debug, Clone)]
pub struct LineParse {
    pub tokens: Vec<Token>,
    /// Token range that was labeled: the Cyrillic span or the whole line.
    pub labeled: Range<usize>,
    pub tagged: Tagged,
    pub fields: Fields,
}

fn is_latin_like(c: ScriptClass) -> bool {
    matches!(c, ScriptClass::Latin | ScriptClass::Url | ScriptClass::Undetermined)
}

/// Token range to label. The Cyrillic span is used alone when the tokens
/// outside it hold at least two Latin-like tokens that make up half or more
/// of the outside part, and the span has at least as many Cyrillic tokens as
/// the outside part has Latin-like ones. Otherwise the whole line.
pub fn labeling_range(tokens: &[Token], ctx: &FeatureContext<'_>) -> Range<usize> {
    let whole = 0..tokens.len();
    let table = &ctx.lexicons.homoglyphs;
    let Some(span) = find_cyrillic_span(tokens, table) else {
        return whole;
    };
    let class = |t: &Token| repaired_class(&t.text, table);
    let outside: Vec<ScriptClass> = tokens[..span.start]
        .iter()
        .chain(&tokens[span.end..])
        .map(class)
        .collect();
    let latin_outside = outside.iter().filter(|&&c| is_latin_like(c)).count();
    let cyrillic_inside = tokens[span.clone()]
        .iter()
        .filter(|t| class(t) == ScriptClass::Cyrillic)
        .count();
    if latin_outside >= 2 && 2 * latin_outside >= outside.len() && cyrillic_inside >= latin_outside {
        span
    } else {
        whole
    }
}

/// Tokenize, pick the labeling range, featurize, predict and assemble.
pub fn parse_line(line: &str, model: &Model, ctx: &FeatureContext<'_>) -> LineParse {
    let tokens = tokenize(line);
    let labeled = labeling_range(&tokens, ctx);
    let texts: Vec<&str> = tokens[labeled.clone()].iter().map(|t| t.text.as_str()).collect();
    let features = featurize(&texts, ctx);
    let tagged = model.predict(&texts, &features);
    let mut fields = assemble_fields(&texts, tagged.sequence.labels(), ctx.years);
    let before = tokens[..labeled.start].iter().map(|t| t.text.as_str());
    let after = tokens[labeled.end..].iter().map(|t| t.text.as_str());
    let tail: Vec<&str> = before
        .chain((!fields.unparsed_tail.is_empty()).then_some(fields.unparsed_tail.as_str()))
        .chain(after)
        .collect();
    fields.unparsed_tail = tail.join(" ");
    LineParse { tokens, labeled, tagged, fields }
}

/// Parse one free-standing reference line; `num` is 0 and `span` covers the
/// line itself.
pub fn parse_reference(line: &str, model: &Model, ctx: &FeatureContext<'_>) -> ParsedReference {
    let parse = parse_line(line, model, ctx);
    let Fields { author, title, year, unparsed_tail } = parse.fields;
    ParsedReference {
        num: 0,
        raw: line.to_string(),
        span: 0..line.chars().count(),
        author,
        title,
        year,
        unparsed_tail,
    }
}
