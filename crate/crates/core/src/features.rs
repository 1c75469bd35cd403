//! Token features and row features for the sequence labeler.
//!
//! Token features look at one token at a time. Row features are computed
//! afterwards from the token features of the whole line: where the first
//! slashes sit, and where the author and title zones probably are.

use std::fmt::Write as _;

use chrono::Datelike;
use serde::{Deserialize, Serialize};

use crate::lexicons::Lexicons;
use crate::normalize::{classify_script, repair_homoglyphs, ScriptClass};
use crate::training_data::Label;

/// Inclusive range of plausible publication years.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct YearRange {
    pub min: u32,
    pub max: u32,
}

impl YearRange {
    pub fn new(min: u32, max: u32) -> Self {
        YearRange { min, max }
    }

    pub fn contains(&self, year: u32) -> bool {
        (self.min..=self.max).contains(&year)
    }
}

impl Default for YearRange {
    /// 1500 through next year.
    fn default() -> Self {
        let next = chrono::Local::now().year() + 1;
        YearRange {
            min: 1500,
            max: next.max(1500) as u32,
        }
    }
}

/// Shared read-only inputs of the feature extractor.
#[derive(Debug, Clone, Copy)]
pub struct FeatureContext<'a> {
    pub lexicons: &'a Lexicons,
    pub years: YearRange,
}

impl<'a> FeatureContext<'a> {
    pub fn new(lexicons: &'a Lexicons, years: YearRange) -> Self {
        FeatureContext { lexicons, years }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenFeatures {
    pub broad_type: ScriptClass,
    pub is_known_surname: bool,
    pub is_capitalized: bool,
    pub is_allcaps_dotted: bool,
    pub is_publication_year: bool,
    pub is_four_digits: bool,
    pub is_mimeo_marker: bool,
    pub is_double_slash: bool,
    pub is_single_slash: bool,
    pub is_abbreviation: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowFeatures {
    pub before_single_slash: bool,
    pub after_single_slash: bool,
    pub before_double_slash: bool,
    pub after_double_slash: bool,
    pub likely_author_zone: bool,
    pub likely_title_zone: bool,
}

/// Complete feature vector of one token.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub token: TokenFeatures,
    pub row: RowFeatures,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureValue {
    Bool(bool),
    Class(ScriptClass),
}

impl FeatureValue {
    /// `1`/`0` for booleans, the class name otherwise.
    pub fn render(self) -> &'static str {
        match self {
            FeatureValue::Bool(true) => "1",
            FeatureValue::Bool(false) => "0",
            FeatureValue::Class(c) => c.as_str(),
        }
    }
}

/// Declared feature order; also the column order of the TSV dump.
pub const FEATURE_NAMES: [&str; 16] = [
    "broad_type",
    "is_known_surname",
    "is_capitalized",
    "is_allcaps_dotted",
    "is_publication_year",
    "is_four_digits",
    "is_mimeo_marker",
    "is_double_slash",
    "is_single_slash",
    "is_abbreviation",
    "before_single_slash",
    "after_single_slash",
    "before_double_slash",
    "after_double_slash",
    "likely_author_zone",
    "likely_title_zone",
];

impl FeatureVector {
    /// `(name, value)` pairs in [`FEATURE_NAMES`] order.
    pub fn named(&self) -> [(&'static str, FeatureValue); 16] {
        use FeatureValue::{Bool, Class};
        let t = &self.token;
        let r = &self.row;
        let values = [
            Class(t.broad_type),
            Bool(t.is_known_surname),
            Bool(t.is_capitalized),
            Bool(t.is_allcaps_dotted),
            Bool(t.is_publication_year),
            Bool(t.is_four_digits),
            Bool(t.is_mimeo_marker),
            Bool(t.is_double_slash),
            Bool(t.is_single_slash),
            Bool(t.is_abbreviation),
            Bool(r.before_single_slash),
            Bool(r.after_single_slash),
            Bool(r.before_double_slash),
            Bool(r.after_double_slash),
            Bool(r.likely_author_zone),
            Bool(r.likely_title_zone),
        ];
        let mut out = [("", Bool(false)); 16];
        for (slot, (name, value)) in out.iter_mut().zip(FEATURE_NAMES.iter().zip(values)) {
            *slot = (name, value);
        }
        out
    }

    pub fn get(&self, name: &str) -> Option<FeatureValue> {
        self.named().into_iter().find(|(n, _)| *n == name).map(|(_, v)| v)
    }
}

fn is_lead_punct(c: char) -> bool {
    matches!(c, '-' | '–' | '—' | '(' | '[' | '«' | '"')
}

fn is_trail_punct(c: char) -> bool {
    matches!(c, '.' | ',' | ';' | ':' | ')' | ']' | '»' | '"')
}

/// The 4-digit core of a year-like token ("2010.", "-2008.", "(1999)"), if it
/// has one. Only surrounding punctuation may accompany the digits.
pub fn year_core(text: &str) -> Option<&str> {
    let core = text.trim_start_matches(is_lead_punct).trim_end_matches(is_trail_punct);
    (core.len() == 4 && core.bytes().all(|b| b.is_ascii_digit())).then_some(core)
}

pub fn is_publication_year(text: &str, years: YearRange) -> bool {
    year_core(text).and_then(|c| c.parse().ok()).is_some_and(|y| years.contains(y))
}

/// True when some maximal run of ASCII digits has length exactly 4.
pub fn has_four_digit_run(text: &str) -> bool {
    let mut run = 0;
    for ch in text.chars().chain(std::iter::once(' ')) {
        if ch.is_ascii_digit() {
            run += 1;
        } else {
            if run == 4 {
                return true;
            }
            run = 0;
        }
    }
    false
}

/// Initials shape: uppercase letters, each optionally followed by a dot, with
/// an optional trailing `,;:`.
pub fn is_allcaps_dotted(text: &str) -> bool {
    let body = text.strip_suffix([',', ';', ':']).unwrap_or(text);
    let mut chars = body.chars().peekable();
    let mut letters = 0;
    while let Some(c) = chars.next() {
        if !c.is_uppercase() {
            return false;
        }
        letters += 1;
        if chars.peek() == Some(&'.') {
            chars.next();
        }
    }
    letters > 0
}

fn is_capitalized(text: &str) -> bool {
    text.trim_start_matches(is_lead_punct)
        .chars()
        .next()
        .is_some_and(|c| c.is_uppercase())
}

fn is_url_like(text: &str) -> bool {
    text.contains("://") || text.to_lowercase().starts_with("www.")
}

/// Contains `//` outside a URL.
pub fn contains_double_slash(text: &str) -> bool {
    if is_url_like(text) {
        return false;
    }
    let chars: Vec<char> = text.chars().collect();
    (0..chars.len().saturating_sub(1))
        .any(|i| chars[i] == '/' && chars[i + 1] == '/')
}

fn has_single_slash(text: &str) -> bool {
    if is_url_like(text) {
        return false;
    }
    let chars: Vec<char> = text.chars().collect();
    (0..chars.len()).any(|i| {
        chars[i] == '/'
            && chars.get(i + 1) != Some(&'/')
            && (i == 0 || chars[i - 1] != '/')
    })
}

fn is_mimeo_marker(repaired: &str) -> bool {
    repaired.trim_start_matches(is_lead_punct).starts_with("М.:")
}

/// Features of one token taken on its own.
pub fn token_features(text: &str, ctx: &FeatureContext<'_>) -> TokenFeatures {
    let table = &ctx.lexicons.homoglyphs;
    let (repaired, _) = repair_homoglyphs(text, table);
    TokenFeatures {
        broad_type: classify_script(&repaired).unwrap_or(ScriptClass::Symbol),
        is_known_surname: ctx.lexicons.names.is_known_surname(text, table),
        is_capitalized: is_capitalized(text),
        is_allcaps_dotted: is_allcaps_dotted(text),
        is_publication_year: is_publication_year(text, ctx.years),
        is_four_digits: has_four_digit_run(text),
        is_mimeo_marker: is_mimeo_marker(&repaired),
        is_double_slash: contains_double_slash(text),
        is_single_slash: has_single_slash(text),
        is_abbreviation: ctx.lexicons.abbreviations.is_abbreviation(text, table),
    }
}

fn is_initials(t: &TokenFeatures, text: &str) -> bool {
    t.is_allcaps_dotted && text.contains('.') && !t.is_mimeo_marker
}

/// One past the last token of the `(surname, initials)+` prefix.
fn author_zone_end<S: AsRef<str>>(texts: &[S], toks: &[TokenFeatures]) -> usize {
    let mut i = 0;
    loop {
        let Some(head) = toks.get(i) else { return i };
        let next_is_initials = toks
            .get(i + 1)
            .is_some_and(|t| is_initials(t, texts[i + 1].as_ref()));
        let surname = (head.is_known_surname || head.is_capitalized)
            && !is_initials(head, texts[i].as_ref())
            && !head.is_double_slash
            && next_is_initials;
        if !surname {
            return i;
        }
        let mut j = i + 1;
        while j < toks.len() && j < i + 3 && is_initials(&toks[j], texts[j].as_ref()) {
            let ends_group = texts[j].as_ref().ends_with([',', ';']);
            j += 1;
            if ends_group {
                break;
            }
        }
        i = j;
    }
}

/// Complete the row: positional slash flags and the author/title zones.
pub fn row_features<S: AsRef<str>>(texts: &[S], toks: Vec<TokenFeatures>) -> Vec<FeatureVector> {
    assert_eq!(texts.len(), toks.len(), "one token feature set per token");
    let first_double = toks.iter().position(|t| t.is_double_slash);
    let first_single = toks.iter().position(|t| t.is_single_slash);
    let author_end = author_zone_end(texts, &toks);

    let mut title_end = first_double.unwrap_or(toks.len());
    if let Some(stop) = (author_end..title_end).find(|&i| {
        let text = texts[i].as_ref();
        text.ends_with('.') && !toks[i].is_abbreviation && !is_initials(&toks[i], text)
    }) {
        title_end = stop + 1;
    }

    toks.into_iter()
        .enumerate()
        .map(|(i, token)| {
            let rel = |pos: Option<usize>| match pos {
                Some(p) => (i < p, i > p),
                None => (false, false),
            };
            let (before_single_slash, after_single_slash) = rel(first_single);
            let (before_double_slash, after_double_slash) = rel(first_double);
            FeatureVector {
                token,
                row: RowFeatures {
                    before_single_slash,
                    after_single_slash,
                    before_double_slash,
                    after_double_slash,
                    likely_author_zone: i < author_end,
                    likely_title_zone: i >= author_end && i < title_end,
                },
            }
        })
        .collect()
}

/// Token features then row features for a whole line.
pub fn featurize<S: AsRef<str>>(texts: &[S], ctx: &FeatureContext<'_>) -> Vec<FeatureVector> {
    let toks = texts.iter().map(|t| token_features(t.as_ref(), ctx)).collect();
    row_features(texts, toks)
}

/// TSV dump: token, the features in [`FEATURE_NAMES`] order, then the gold
/// label when given. One token per line, no header, no trailing blank line.
pub fn render_feature_tsv<S: AsRef<str>>(
    texts: &[S],
    features: &[FeatureVector],
    gold: Option<&[Label]>,
) -> String {
    let mut out = String::new();
    for (i, (text, fv)) in texts.iter().zip(features).enumerate() {
        out.push_str(text.as_ref());
        for (_, value) in fv.named() {
            out.push('\t');
            out.push_str(value.render());
        }
        if let Some(label) = gold.and_then(|g| g.get(i)) {
            let _ = write!(out, "\t{label}");
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normalize::tokenize;

    fn ctx(lex: &Lexicons) -> FeatureContext<'_> {
        FeatureContext::new(lex, YearRange::new(1500, 2027))
    }

    fn row(line: &str, lex: &Lexicons) -> (Vec<String>, Vec<FeatureVector>) {
        let texts: Vec<String> = tokenize(line).into_iter().map(|t| t.text).collect();
        let fv = featurize(&texts, &ctx(lex));
        (texts, fv)
    }

    #[test]
    fn year_token() {
        let lex = Lexicons::bundled();
        let f = token_features("2010.", &ctx(&lex));
        assert!(f.is_publication_year && f.is_four_digits);
        assert_eq!(f.broad_type, ScriptClass::Numeric);
        assert!(token_features("-2008.", &ctx(&lex)).is_publication_year);
        let pages = token_features("1234-1250", &ctx(&lex));
        assert!(!pages.is_publication_year && pages.is_four_digits);
        assert!(!token_features("1499", &ctx(&lex)).is_publication_year);
        assert!(!token_features("12345", &ctx(&lex)).is_four_digits);
    }

    #[test]
    fn slash_tokens() {
        let lex = Lexicons::bundled();
        let c = ctx(&lex);
        assert!(token_features("//Практическая", &c).is_double_slash);
        assert!(token_features("//", &c).is_double_slash);
        assert!(!token_features("//", &c).is_single_slash);
        assert!(token_features("/", &c).is_single_slash);
        assert!(token_features("сотр./", &c).is_single_slash);
        let url = token_features("http://www.hse.ru/data/945.pdf", &c);
        assert!(!url.is_double_slash && !url.is_single_slash);
    }

    #[test]
    fn initials_and_mimeo() {
        let lex = Lexicons::bundled();
        let c = ctx(&lex);
        let f = token_features("Э.А.", &c);
        assert!(f.is_allcaps_dotted && !f.is_known_surname);
        assert!(token_features("М.:", &c).is_mimeo_marker);
        assert!(token_features("M.:", &c).is_mimeo_marker);
        assert!(!token_features("М.;", &c).is_mimeo_marker);
        assert!(token_features("Гордиенко", &c).is_known_surname);
    }

    #[test]
    fn gordienko_zones() {
        let lex = Lexicons::bundled();
        let (texts, fv) = row(
            "Гордиенко Э.А. Варлаам Хутынский и архиепископ Антоний в житиях и мистериях XII-XVI века. – М.; СПб., 2010.",
            &lex,
        );
        let authors: Vec<&str> = (0..texts.len()).filter(|&i| fv[i].row.likely_author_zone).map(|i| texts[i].as_str()).collect();
        assert_eq!(authors, ["Гордиенко", "Э.А."]);
        let title: Vec<&str> = (0..texts.len()).filter(|&i| fv[i].row.likely_title_zone).map(|i| texts[i].as_str()).collect();
        assert_eq!(title.first(), Some(&"Варлаам"));
        assert_eq!(title.last(), Some(&"века."));
        assert!(fv.iter().all(|f| !f.row.before_double_slash && !f.row.after_double_slash));
    }

    #[test]
    fn maistrenko_slash_flags() {
        let lex = Lexicons::bundled();
        let (texts, fv) = row(
            "Майстренко Н.А., Шейко С.Б., Алентьев А.В. и сотр.//Практическая онкология. -2008. -Т. 9, № 4. -С. 229-236.",
            &lex,
        );
        let slash = texts.iter().position(|t| t.contains("//")).unwrap();
        for (i, f) in fv.iter().enumerate() {
            assert_eq!(f.row.after_double_slash, i > slash);
            assert_eq!(f.row.before_double_slash, i < slash);
        }
        assert!(fv[..6].iter().all(|f| f.row.likely_author_zone));
        assert!(!fv[6].row.likely_author_zone);
        assert!(fv[slash..].iter().all(|f| !f.row.likely_title_zone));
    }

    #[test]
    fn title_zone_skips_abbreviations_and_stops_at_double_slash() {
        let lex = Lexicons::bundled();
        let (texts, fv) = row("Иванов И.И. Очерки экономики // Вопросы экономики. 2001.", &lex);
        let title: Vec<&str> = (0..texts.len()).filter(|&i| fv[i].row.likely_title_zone).map(|i| texts[i].as_str()).collect();
        assert_eq!(title, ["Очерки", "экономики"]);
        let (texts, fv) = row("Петров П. Экономика т. 2 регионов. М.: Наука, 2001.", &lex);
        let title: Vec<&str> = (0..texts.len()).filter(|&i| fv[i].row.likely_title_zone).map(|i| texts[i].as_str()).collect();
        assert_eq!(title, ["Экономика", "т.", "2", "регионов."]);
    }

    #[test]
    fn no_slash_row_has_no_slash_flags() {
        let lex = Lexicons::bundled();
        let (_, fv) = row("Иванов И. Труды. М., 2001.", &lex);
        assert!(fv.iter().all(|f| {
            let r = &f.row;
            !(r.before_single_slash || r.after_single_slash || r.before_double_slash || r.after_double_slash)
        }));
    }

    #[test]
    fn tsv_layout() {
        let lex = Lexicons::bundled();
        let (texts, fv) = row("Гордиенко Э.А.", &lex);
        let tsv = render_feature_tsv(&texts, &fv, Some(&[Label::BeginAuthor, Label::InsideAuthor]));
        let lines: Vec<&str> = tsv.lines().collect();
        assert_eq!(lines.len(), 2);
        let cols: Vec<&str> = lines[0].split('\t').collect();
        assert_eq!(cols.len(), 1 + FEATURE_NAMES.len() + 1);
        assert_eq!(cols[0], "Гордиенко");
        assert_eq!(cols[1], "Cyrillic");
        assert_eq!(cols[2], "1");
        assert_eq!(*cols.last().unwrap(), "B-A");
        let plain = render_feature_tsv(&texts, &fv, None);
        assert_eq!(plain.lines().next().unwrap().split('\t').count(), 1 + FEATURE_NAMES.len());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;
        use regex::Regex;

        fn token_strategy() -> impl Strategy<Value = String> {
            prop_oneof![
                "[А-ЯA-Z]\\.?[А-ЯA-Z]?\\.?[,;:]?",
                "[А-Яа-я]{1,8}[.,]?",
                "[0-9]{1,6}[.,]?",
                "/|//|//[А-Я][а-я]{2,5}|[а-я]+/",
                "[–\\-]|М\\.:|M\\.:",
            ]
        }

        proptest! {
            #[test]
            fn allcaps_dotted_matches_regex(tok in "[А-ЯA-Zа-я.,;:]{1,6}") {
                let re = Regex::new(r"^(?:\p{Lu}\.?)+[,;:]?$").unwrap();
                prop_assert_eq!(is_allcaps_dotted(&tok), re.is_match(&tok));
            }

            #[test]
            fn four_digit_run_matches_regex(tok in "[0-9a./-]{0,12}") {
                let re = Regex::new(r"(?:^|[^0-9])[0-9]{4}(?:[^0-9]|$)").unwrap();
                prop_assert_eq!(has_four_digit_run(&tok), re.is_match(&tok));
            }

            #[test]
            fn row_flags_are_consistent(tokens in proptest::collection::vec(token_strategy(), 0..14)) {
                let lex = Lexicons::bundled();
                let fv = featurize(&tokens, &ctx(&lex));
                prop_assert_eq!(fv.len(), tokens.len());
                let first_double = fv.iter().position(|f| f.token.is_double_slash);
                let first_single = fv.iter().position(|f| f.token.is_single_slash);
                for (i, f) in fv.iter().enumerate() {
                    let r = &f.row;
                    prop_assert!(!(r.before_double_slash && r.after_double_slash));
                    prop_assert!(!(r.before_single_slash && r.after_single_slash));
                    let none_double = !r.before_double_slash && !r.after_double_slash;
                    prop_assert_eq!(none_double, first_double.is_none() || first_double == Some(i));
                    let none_single = !r.before_single_slash && !r.after_single_slash;
                    prop_assert_eq!(none_single, first_single.is_none() || first_single == Some(i));
                    prop_assert!(!(r.likely_author_zone && r.likely_title_zone));
                    if let Some(d) = first_double {
                        prop_assert!(!r.likely_title_zone || i < d);
                    }
                }
                // author zone is a prefix
                let n = fv.iter().take_while(|f| f.row.likely_author_zone).count();
                prop_assert!(fv[n..].iter().all(|f| !f.row.likely_author_zone));
                // deterministic
                prop_assert_eq!(featurize(&tokens, &ctx(&lex)), fv);
            }
        }
    }
}
