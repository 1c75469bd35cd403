//! Script classification, homoglyph repair and whitespace tokenization.
//!
//! Reference strings harvested from Russian journals mix Cyrillic text with
//! transliterations, translations and look-alike Latin letters typed in place
//! of Cyrillic ones. Everything downstream works on whitespace tokens; no
//! attempt is made to split at word borders inside a token.

use std::collections::HashMap;
use std::fmt;
use std::ops::Range;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NormalizeError {
    #[error("empty token")]
    EmptyToken,
    #[error("homoglyph table line {line}: {reason}")]
    BadTableLine { line: usize, reason: String },
    #[error("homoglyph table is not an involution: {0:?} appears twice")]
    NotInvolution(char),
    #[error("failed to read homoglyph table: {0}")]
    Io(#[from] std::io::Error),
}

/// One whitespace-delimited unit of a line.
///
/// `span` is a half-open interval of character (code point) offsets into the
/// line the token was cut from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub index: usize,
    pub span: Range<usize>,
}

impl AsRef<str> for Token {
    fn as_ref(&self) -> &str {
        &self.text
    }
}

/// Split `line` at runs of Unicode whitespace.
pub fn tokenize(line: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut start = 0;
    let mut pos = 0;
    for ch in line.chars() {
        if ch.is_whitespace() {
            if !current.is_empty() {
                tokens.push(Token {
                    text: std::mem::take(&mut current),
                    index: tokens.len(),
                    span: start..pos,
                });
            }
        } else {
            if current.is_empty() {
                start = pos;
            }
            current.push(ch);
        }
        pos += 1;
    }
    if !current.is_empty() {
        tokens.push(Token {
            text: current,
            index: tokens.len(),
            span: start..pos,
        });
    }
    tokens
}

/// Collapse whitespace runs to single spaces and trim both ends.
pub fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ScriptClass {
    Cyrillic,
    Latin,
    Numeric,
    RomanNumeral,
    Url,
    Symbol,
    Undetermined,
}

impl ScriptClass {
    pub const ALL: [ScriptClass; 7] = [
        ScriptClass::Cyrillic,
        ScriptClass::Latin,
        ScriptClass::Numeric,
        ScriptClass::RomanNumeral,
        ScriptClass::Url,
        ScriptClass::Symbol,
        ScriptClass::Undetermined,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScriptClass::Cyrillic => "Cyrillic",
            ScriptClass::Latin => "Latin",
            ScriptClass::Numeric => "Numeric",
            ScriptClass::RomanNumeral => "RomanNumeral",
            ScriptClass::Url => "Url",
            ScriptClass::Symbol => "Symbol",
            ScriptClass::Undetermined => "Undetermined",
        }
    }
}

impl fmt::Display for ScriptClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn is_cyrillic(ch: char) -> bool {
    matches!(ch, '\u{0400}'..='\u{052F}' | '\u{1C80}'..='\u{1C8F}' | '\u{2DE0}'..='\u{2DFF}' | '\u{A640}'..='\u{A69F}')
}

pub fn is_latin(ch: char) -> bool {
    ch.is_ascii_alphabetic()
        || (matches!(ch, '\u{00C0}'..='\u{024F}' | '\u{1E00}'..='\u{1EFF}') && ch.is_alphabetic())
}

fn looks_like_url(text: &str) -> bool {
    let t = text.trim_start_matches(['(', '<', '[', '"']);
    let lower = t.to_lowercase();
    for scheme in ["http://", "https://", "ftp://"] {
        if let Some(rest) = lower.strip_prefix(scheme) {
            return rest.chars().next().is_some_and(|c| c.is_alphanumeric());
        }
    }
    if let Some(rest) = lower.strip_prefix("www.") {
        return rest.contains('.') || rest.chars().next().is_some_and(|c| c.is_alphanumeric());
    }
    false
}

fn is_roman_run(run: &str) -> bool {
    // Strict canonical form: M{0,3}(CM|CD|D?C{0,3})(XC|XL|L?X{0,3})(IX|IV|V?I{0,3})
    fn value(c: u8) -> u32 {
        match c {
            b'I' => 1,
            b'V' => 5,
            b'X' => 10,
            b'L' => 50,
            b'C' => 100,
            b'D' => 500,
            b'M' => 1000,
            _ => 0,
        }
    }
    if run.is_empty() || !run.bytes().all(|b| value(b) > 0) {
        return false;
    }
    let bytes = run.as_bytes();
    let mut total = 0u32;
    for (i, &b) in bytes.iter().enumerate() {
        let v = value(b);
        if bytes.get(i + 1).is_some_and(|&n| value(n) > v) {
            total = total.wrapping_sub(v);
        } else {
            total = total.wrapping_add(v);
        }
    }
    if total == 0 || total >= 4000 {
        return false;
    }
    to_roman(total) == run
}

fn to_roman(mut n: u32) -> String {
    const TABLE: [(u32, &str); 13] = [
        (1000, "M"),
        (900, "CM"),
        (500, "D"),
        (400, "CD"),
        (100, "C"),
        (90, "XC"),
        (50, "L"),
        (40, "XL"),
        (10, "X"),
        (9, "IX"),
        (5, "V"),
        (4, "IV"),
        (1, "I"),
    ];
    let mut out = String::new();
    for &(v, s) in &TABLE {
        while n >= v {
            out.push_str(s);
            n -= v;
        }
    }
    out
}

/// Broad type of a token.
pub fn classify_script(token_text: &str) -> Result<ScriptClass, NormalizeError> {
    if token_text.is_empty() {
        return Err(NormalizeError::EmptyToken);
    }
    if looks_like_url(token_text) {
        return Ok(ScriptClass::Url);
    }
    let alnum: Vec<char> = token_text.chars().filter(|c| c.is_alphanumeric()).collect();
    if alnum.is_empty() {
        return Ok(ScriptClass::Symbol);
    }
    let letters: Vec<char> = alnum.iter().copied().filter(|c| c.is_alphabetic()).collect();
    if letters.is_empty() {
        return Ok(ScriptClass::Numeric);
    }
    if letters.len() == alnum.len() && letters.iter().all(|c| c.is_ascii_uppercase()) {
        let runs = token_text
            .split(|c: char| !c.is_alphanumeric())
            .filter(|r| !r.is_empty());
        let mut any = false;
        let mut all = true;
        for run in runs {
            any = true;
            all &= is_roman_run(run);
        }
        if any && all {
            return Ok(ScriptClass::RomanNumeral);
        }
    }
    if letters.iter().all(|&c| is_cyrillic(c)) {
        return Ok(ScriptClass::Cyrillic);
    }
    if letters.iter().all(|&c| is_latin(c)) {
        return Ok(ScriptClass::Latin);
    }
    Ok(ScriptClass::Undetermined)
}

/// Bidirectional Latin/Cyrillic look-alike mapping.
#[derive(Debug, Clone)]
pub struct HomoglyphTable {
    pairs: Vec<(char, char)>,
    to_cyrillic: HashMap<char, char>,
    to_latin: HashMap<char, char>,
}

const DEFAULT_TABLE: &str = include_str!("../data/homoglyphs.tsv");

impl Default for HomoglyphTable {
    fn default() -> Self {
        Self::parse(DEFAULT_TABLE).expect("bundled homoglyph table is valid")
    }
}

fn parse_code_point(field: &str) -> Option<char> {
    let field = field.trim();
    if let Some(hex) = field.strip_prefix("U+").or_else(|| field.strip_prefix("u+")) {
        return u32::from_str_radix(hex, 16).ok().and_then(char::from_u32);
    }
    let mut chars = field.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) => Some(c),
        _ => None,
    }
}

impl HomoglyphTable {
    /// Build a table from explicit `(latin, cyrillic)` pairs.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (char, char)>) -> Result<Self, NormalizeError> {
        let mut table = HomoglyphTable {
            pairs: Vec::new(),
            to_cyrillic: HashMap::new(),
            to_latin: HashMap::new(),
        };
        for (lat, cyr) in pairs {
            if table.to_cyrillic.contains_key(&lat) || table.to_latin.contains_key(&lat) {
                return Err(NormalizeError::NotInvolution(lat));
            }
            if table.to_latin.contains_key(&cyr) || table.to_cyrillic.contains_key(&cyr) {
                return Err(NormalizeError::NotInvolution(cyr));
            }
            table.to_cyrillic.insert(lat, cyr);
            table.to_latin.insert(cyr, lat);
            table.pairs.push((lat, cyr));
        }
        Ok(table)
    }

    /// Parse the two-column text format: Latin code point, Cyrillic code
    /// point, separated by whitespace. Code points are either the literal
    /// character or `U+XXXX`. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, NormalizeError> {
        let mut pairs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(NormalizeError::BadTableLine {
                    line: i + 1,
                    reason: format!("expected 2 columns, got {}", fields.len()),
                });
            }
            let bad = |reason: &str| NormalizeError::BadTableLine {
                line: i + 1,
                reason: reason.to_string(),
            };
            let lat = parse_code_point(fields[0]).ok_or_else(|| bad("bad Latin code point"))?;
            let cyr = parse_code_point(fields[1]).ok_or_else(|| bad("bad Cyrillic code point"))?;
            if !is_latin(lat) {
                return Err(bad("first column is not a Latin letter"));
            }
            if !is_cyrillic(cyr) {
                return Err(bad("second column is not a Cyrillic letter"));
            }
            pairs.push((lat, cyr));
        }
        Self::from_pairs(pairs)
    }

    pub fn load(path: &Path) -> Result<Self, NormalizeError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn pairs(&self) -> &[(char, char)] {
        &self.pairs
    }

    pub fn latin_to_cyrillic(&self, ch: char) -> Option<char> {
        self.to_cyrillic.get(&ch).copied()
    }

    pub fn cyrillic_to_latin(&self, ch: char) -> Option<char> {
        self.to_latin.get(&ch).copied()
    }

    /// The other half of the pair `ch` belongs to, if any.
    pub fn counterpart(&self, ch: char) -> Option<char> {
        self.latin_to_cyrillic(ch).or_else(|| self.cyrillic_to_latin(ch))
    }

    pub fn is_ambiguous(&self, ch: char) -> bool {
        self.counterpart(ch).is_some()
    }
}

/// Rewrite look-alike letters so that every letter of `token_text` belongs to
/// one script.
///
/// Letters that appear in `table` are ambiguous; all other letters anchor the
/// token to their script. A token anchored to both scripts, or containing
/// letters of a third script, cannot be resolved and comes back unchanged with
/// `false`. A token made only of ambiguous letters goes to Cyrillic.
pub fn repair_homoglyphs(token_text: &str, table: &HomoglyphTable) -> (String, bool) {
    let mut cyr_anchors = 0usize;
    let mut lat_anchors = 0usize;
    for ch in token_text.chars().filter(|c| c.is_alphabetic()) {
        if table.is_ambiguous(ch) {
            continue;
        }
        if is_cyrillic(ch) {
            cyr_anchors += 1;
        } else if is_latin(ch) {
            lat_anchors += 1;
        } else {
            return (token_text.to_string(), false);
        }
    }
    let target_cyrillic = match (cyr_anchors > 0, lat_anchors > 0) {
        (true, true) => return (token_text.to_string(), false),
        (true, false) => true,
        (false, true) => false,
        (false, false) => true,
    };
    let repaired = token_text
        .chars()
        .map(|ch| {
            if target_cyrillic {
                table.latin_to_cyrillic(ch).unwrap_or(ch)
            } else {
                table.cyrillic_to_latin(ch).unwrap_or(ch)
            }
        })
        .collect();
    (repaired, true)
}

/// Script class of a token after homoglyph repair.
pub fn repaired_class(token_text: &str, table: &HomoglyphTable) -> ScriptClass {
    let (repaired, _) = repair_homoglyphs(token_text, table);
    classify_script(&repaired).unwrap_or(ScriptClass::Symbol)
}

/// Longest contiguous run of Cyrillic/Numeric/Symbol tokens that holds at
/// least one Cyrillic token. Ties go to the earliest run.
///
/// Classes are taken after homoglyph repair, but only a token that already
/// contains Cyrillic letters counts as the Cyrillic witness: a Latin word made
/// entirely of look-alike letters ("po", "a") repairs to Cyrillic and may sit
/// inside a run without starting one.
pub fn find_cyrillic_span(tokens: &[Token], table: &HomoglyphTable) -> Option<Range<usize>> {
    let classes: Vec<SpanClass> = tokens
        .iter()
        .map(|t| {
            let class = repaired_class(&t.text, table);
            SpanClass {
                class,
                witness: class == ScriptClass::Cyrillic && t.text.chars().any(is_cyrillic),
            }
        })
        .collect();
    longest_cyrillic_run(&classes)
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct SpanClass {
    pub class: ScriptClass,
    pub witness: bool,
}

impl From<ScriptClass> for SpanClass {
    fn from(class: ScriptClass) -> Self {
        SpanClass {
            class,
            witness: class == ScriptClass::Cyrillic,
        }
    }
}

fn span_member(c: &SpanClass) -> bool {
    matches!(c.class, ScriptClass::Cyrillic | ScriptClass::Numeric | ScriptClass::Symbol)
}

pub(crate) fn longest_cyrillic_run(classes: &[SpanClass]) -> Option<Range<usize>> {
    let mut best: Option<Range<usize>> = None;
    let mut i = 0;
    while i < classes.len() {
        if !span_member(&classes[i]) {
            i += 1;
            continue;
        }
        let start = i;
        let mut has_witness = false;
        while i < classes.len() && span_member(&classes[i]) {
            has_witness |= classes[i].witness;
            i += 1;
        }
        if has_witness && best.as_ref().is_none_or(|b| i - start > b.len()) {
            best = Some(start..i);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(tokens: &[Token]) -> Vec<&str> {
        tokens.iter().map(|t| t.text.as_str()).collect()
    }

    #[test]
    fn tokenize_sample_line() {
        let t = tokenize("Гордиенко Э.А. Варлаам");
        assert_eq!(texts(&t), ["Гордиенко", "Э.А.", "Варлаам"]);
        assert_eq!(t[1].span, 10..14);
        assert_eq!(t[2].index, 2);
    }

    #[test]
    fn tokenize_empty_and_whitespace() {
        assert!(tokenize("").is_empty());
        assert!(tokenize(" \t\n ").is_empty());
        let t = tokenize("  a\t b ");
        assert_eq!(texts(&t), ["a", "b"]);
        assert_eq!(t[0].span, 2..3);
        assert_eq!(t[1].span, 5..6);
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify_script("XII-XVI").unwrap(), ScriptClass::RomanNumeral);
        assert_eq!(classify_script("2010.").unwrap(), ScriptClass::Numeric);
        assert_eq!(classify_script("229-236.").unwrap(), ScriptClass::Numeric);
        assert_eq!(classify_script("Varлaam").unwrap(), ScriptClass::Undetermined);
        assert_eq!(classify_script("–").unwrap(), ScriptClass::Symbol);
        assert_eq!(classify_script("№").unwrap(), ScriptClass::Symbol);
        assert_eq!(classify_script("Э.А.").unwrap(), ScriptClass::Cyrillic);
        assert_eq!(classify_script("Smith,").unwrap(), ScriptClass::Latin);
        assert_eq!(classify_script("http://socionet.ru/x.pdf").unwrap(), ScriptClass::Url);
        assert_eq!(classify_script("www.hse.ru").unwrap(), ScriptClass::Url);
        assert_eq!(classify_script("2-е").unwrap(), ScriptClass::Cyrillic);
        assert_eq!(classify_script("IIII").unwrap(), ScriptClass::Latin);
        assert!(matches!(classify_script(""), Err(NormalizeError::EmptyToken)));
    }

    #[test]
    fn mimeo_marker_is_not_url() {
        assert_eq!(classify_script("M.:").unwrap(), ScriptClass::RomanNumeral);
        assert_eq!(classify_script("М.:").unwrap(), ScriptClass::Cyrillic);
    }

    #[test]
    fn repair_examples() {
        let table = HomoglyphTable::default();
        assert_eq!(repair_homoglyphs("Пeтров", &table), ("Петров".to_string(), true));
        assert_eq!(repair_homoglyphs("Smith", &table), ("Smith".to_string(), true));
        assert_eq!(repair_homoglyphs("ABC123", &table), ("АВС123".to_string(), true));
        assert_eq!(repair_homoglyphs("Varлaam", &table), ("Varлaam".to_string(), false));
        assert_eq!(repair_homoglyphs("Tоwards", &table), ("Towards".to_string(), true));
        assert_eq!(repair_homoglyphs("2010.", &table), ("2010.".to_string(), true));
    }

    /// Exhaustive flip search: try every way of swapping ambiguous letters and
    /// keep assignments that leave one script only.
    fn brute_force_resolvable(token: &str, table: &HomoglyphTable) -> Vec<String> {
        let chars: Vec<char> = token.chars().collect();
        let amb: Vec<usize> = (0..chars.len()).filter(|&i| table.is_ambiguous(chars[i])).collect();
        let mut out = Vec::new();
        for mask in 0u32..(1 << amb.len()) {
            let mut c = chars.clone();
            for (bit, &i) in amb.iter().enumerate() {
                if mask & (1 << bit) != 0 {
                    c[i] = table.counterpart(c[i]).unwrap();
                }
            }
            let letters: Vec<char> = c.iter().copied().filter(|x| x.is_alphabetic()).collect();
            if letters.iter().all(|&x| is_cyrillic(x)) || letters.iter().all(|&x| is_latin(x)) {
                out.push(c.into_iter().collect());
            }
        }
        out
    }

    #[test]
    fn varlaam_has_no_single_script_assignment() {
        let table = HomoglyphTable::default();
        assert!(brute_force_resolvable("Varлaam", &table).is_empty());
        let abc = brute_force_resolvable("ABC123", &table);
        assert!(abc.contains(&"АВС123".to_string()));
        assert!(abc.contains(&"ABC123".to_string()));
    }

    #[test]
    fn repair_agrees_with_brute_force() {
        let table = HomoglyphTable::default();
        for w in ["Пeтров", "Smith", "ABC123", "Varлaam", "сoсна", "Hello", "КPACНЫЙ", "Xх", "ёж"] {
            let options = brute_force_resolvable(w, &table);
            let (fixed, ok) = repair_homoglyphs(w, &table);
            assert_eq!(ok, !options.is_empty(), "{w}");
            if ok {
                assert!(options.contains(&fixed), "{w} -> {fixed}");
            }
        }
    }

    #[test]
    fn default_table_is_involution() {
        let table = HomoglyphTable::default();
        assert_eq!(table.pairs().len(), 18);
        for &(l, c) in table.pairs() {
            assert_eq!(table.counterpart(l), Some(c));
            assert_eq!(table.counterpart(c), Some(l));
        }
    }

    #[test]
    fn table_parse_accepts_literal_chars_and_rejects_junk() {
        let t = HomoglyphTable::parse("# c\nA\tА\nU+0065 U+0435\n").unwrap();
        assert_eq!(t.latin_to_cyrillic('e'), Some('е'));
        assert!(HomoglyphTable::parse("A А x\n").is_err());
        assert!(HomoglyphTable::parse("А A\n").is_err());
        assert!(matches!(
            HomoglyphTable::parse("A А\nA О\n"),
            Err(NormalizeError::NotInvolution('A'))
        ));
    }

    /// All contiguous runs, checked one by one.
    fn brute_force_span(tokens: &[Token], table: &HomoglyphTable) -> Option<Range<usize>> {
        let ok = |t: &Token| {
            matches!(
                classify_script(&repair_homoglyphs(&t.text, table).0).unwrap(),
                ScriptClass::Cyrillic | ScriptClass::Numeric | ScriptClass::Symbol
            )
        };
        let cyrillic = |t: &Token| t.text.chars().any(is_cyrillic) && repaired_class(&t.text, table) == ScriptClass::Cyrillic;
        let mut best: Option<Range<usize>> = None;
        for start in 0..tokens.len() {
            for end in start + 1..=tokens.len() {
                let run = &tokens[start..end];
                if run.iter().all(ok)
                    && run.iter().any(cyrillic)
                    && best.as_ref().is_none_or(|b| run.len() > b.len())
                {
                    best = Some(start..end);
                }
            }
        }
        best
    }

    #[test]
    fn cyrillic_span_examples() {
        let table = HomoglyphTable::default();
        let latin = tokenize("Ivanov I. Trudy po ekonomike. Moscow, 2001.");
        assert_eq!(find_cyrillic_span(&latin, &table), None);
        assert_eq!(brute_force_span(&latin, &table), None);

        let cyr = tokenize("Иванов И. Труды по экономике. – М., 2001.");
        assert_eq!(find_cyrillic_span(&cyr, &table), Some(0..cyr.len()));

        let mixed = tokenize("Ivanov I. [Иванов И. Труды. 2001] transl.");
        let span = find_cyrillic_span(&mixed, &table).unwrap();
        assert_eq!(Some(span.clone()), brute_force_span(&mixed, &table));
        assert_eq!(texts(&mixed[span]), ["[Иванов", "И.", "Труды.", "2001]"]);
    }

    #[test]
    fn cyrillic_span_tie_goes_to_first_run() {
        use ScriptClass::*;
        let classes: Vec<SpanClass> = [Cyrillic, Numeric, Latin, Cyrillic, Symbol].map(SpanClass::from).to_vec();
        assert_eq!(longest_cyrillic_run(&classes), Some(0..2));
        assert_eq!(longest_cyrillic_run(&[Numeric.into(), Symbol.into()]), None);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        const CYR: &str = "абвгдежзийклмнопрстуфхцчшщъыьэюяАБВГДЕЖЗИЙКЛМНОПРСТУФХЦЧШЩЭЮЯ";

        fn cyr_word() -> impl Strategy<Value = String> {
            let alphabet: Vec<char> = CYR.chars().collect();
            proptest::collection::vec(proptest::sample::select(alphabet), 1..12)
                .prop_map(|v| v.into_iter().collect())
        }

        proptest! {
            #[test]
            fn tokenize_is_a_fixed_point(s in "\\PC{0,40}") {
                let once: Vec<String> = tokenize(&s).into_iter().map(|t| t.text).collect();
                let twice: Vec<String> = tokenize(&once.join(" ")).into_iter().map(|t| t.text).collect();
                prop_assert_eq!(&once, &twice);
                prop_assert_eq!(once.join(" "), collapse_whitespace(&s));
            }

            #[test]
            fn token_spans_index_the_source(s in "[ \\ta-zа-я.,]{0,40}") {
                let chars: Vec<char> = s.chars().collect();
                let tokens = tokenize(&s);
                let mut last_end = 0;
                for t in &tokens {
                    prop_assert!(t.span.start >= last_end && t.span.start < t.span.end);
                    let cut: String = chars[t.span.clone()].iter().collect();
                    prop_assert_eq!(&cut, &t.text);
                    prop_assert!(!t.text.chars().any(char::is_whitespace));
                    last_end = t.span.end;
                }
            }

            #[test]
            fn repair_is_idempotent(s in "[a-zA-Zа-яА-Я0-9.\\-]{1,16}") {
                let table = HomoglyphTable::default();
                let (once, _) = repair_homoglyphs(&s, &table);
                let (twice, _) = repair_homoglyphs(&once, &table);
                prop_assert_eq!(once, twice);
            }

            #[test]
            fn repair_recovers_injected_homoglyphs(word in cyr_word(), picks in proptest::collection::vec(any::<usize>(), 1..4)) {
                let table = HomoglyphTable::default();
                let mut chars: Vec<char> = word.chars().collect();
                let slots: Vec<usize> = (0..chars.len()).filter(|&i| table.cyrillic_to_latin(chars[i]).is_some()).collect();
                prop_assume!(!slots.is_empty());
                for p in picks {
                    let i = slots[p % slots.len()];
                    chars[i] = table.cyrillic_to_latin(word.chars().nth(i).unwrap()).unwrap();
                }
                let polluted: String = chars.into_iter().collect();
                prop_assert_eq!(repair_homoglyphs(&polluted, &table), (word, true));
            }

            #[test]
            fn resolved_alphabetic_tokens_are_never_undetermined(s in "[a-zA-Zа-яА-Я]{1,12}") {
                let table = HomoglyphTable::default();
                let (fixed, ok) = repair_homoglyphs(&s, &table);
                if ok {
                    prop_assert_ne!(classify_script(&fixed).unwrap(), ScriptClass::Undetermined);
                }
            }
        }
    }
}
