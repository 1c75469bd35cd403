//! Surname lexicon and abbreviation list.
//!
//! The surname lexicon starts from a seed list, is closed under male/female
//! derivation, and grows by scanning reference lines for unknown capitalized
//! words that sit next to a known `Surname I.I.` group.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::normalize::{is_cyrillic, repair_homoglyphs, tokenize, HomoglyphTable};

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("line {line}: {reason}")]
    BadLine { line: usize, reason: String },
    #[error("failed to read lexicon: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Seed,
    Derived,
    Mined,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Seed => "seed",
            Provenance::Derived => "derived",
            Provenance::Mined => "mined",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "seed" => Some(Provenance::Seed),
            "derived" => Some(Provenance::Derived),
            "mined" => Some(Provenance::Mined),
            _ => None,
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

// Checked in order; the first matching suffix wins so that "-ская" is not
// read as "-ая".
const GENDER_RULES: [(&str, &str); 12] = [
    ("ская", "ский"),
    ("цкая", "цкий"),
    ("ский", "ская"),
    ("цкий", "цкая"),
    ("ова", "ов"),
    ("ева", "ев"),
    ("ина", "ин"),
    ("ая", "ый"),
    ("ый", "ая"),
    ("ов", "ова"),
    ("ев", "ева"),
    ("ин", "ина"),
];

const MIN_STEM_CHARS: usize = 2;

/// The surname plus its opposite-gender form, when a suffix rule applies.
pub fn derive_gender_variants(surname: &str) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    out.insert(surname.to_string());
    for (from, to) in GENDER_RULES {
        if let Some(stem) = surname.strip_suffix(from) {
            if stem.chars().count() >= MIN_STEM_CHARS {
                out.insert(format!("{stem}{to}"));
            }
            break;
        }
    }
    out
}

/// A capitalized Cyrillic word: uppercase first letter, lowercase Cyrillic
/// letters after it, optional inner hyphens.
pub fn is_capitalized_cyrillic_word(s: &str) -> bool {
    let mut chars = s.chars();
    let Some(first) = chars.next() else {
        return false;
    };
    if !(is_cyrillic(first) && first.is_uppercase()) {
        return false;
    }
    let rest: Vec<char> = chars.collect();
    if rest.is_empty() || rest.last() == Some(&'-') {
        return false;
    }
    let mut prev_hyphen = false;
    for &c in &rest {
        if c == '-' {
            if prev_hyphen {
                return false;
            }
            prev_hyphen = true;
        } else if is_cyrillic(c) && c.is_alphabetic() {
            if c.is_uppercase() && !prev_hyphen {
                return false;
            }
            prev_hyphen = false;
        } else {
            return false;
        }
    }
    true
}

fn strip_name_punct(s: &str) -> &str {
    s.trim_matches(|c: char| matches!(c, ',' | ';' | ':' | '.' | '(' | ')' | '[' | ']' | '"' | '«' | '»'))
}

#[derive(Debug, Clone, Default)]
pub struct NameLexicon {
    entries: BTreeMap<String, Provenance>,
}

impl NameLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Bundled seed list of common Russian surnames.
    pub fn bundled_seed() -> Self {
        Self::parse(include_str!("../data/surnames_seed.txt")).expect("bundled seed is valid")
    }

    /// One surname per line, optionally followed by a tab and a provenance tag.
    /// Untagged lines are seed entries.
    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut lex = NameLexicon::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split('\t');
            let name = cols.next().unwrap_or("").trim();
            let prov = match cols.next() {
                Some(p) => Provenance::parse(p.trim()).ok_or_else(|| LexiconError::BadLine {
                    line: i + 1,
                    reason: format!("unknown provenance {p:?}"),
                })?,
                None => Provenance::Seed,
            };
            if !lex.insert(name, prov) {
                return Err(LexiconError::BadLine {
                    line: i + 1,
                    reason: format!("{name:?} is not a capitalized Cyrillic surname"),
                });
            }
        }
        Ok(lex)
    }

    pub fn load(path: &Path) -> Result<Self, LexiconError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Insert a surname together with its derived counterpart. Returns false
    /// when `name` is not a capitalized Cyrillic word.
    pub fn insert(&mut self, name: &str, provenance: Provenance) -> bool {
        if !is_capitalized_cyrillic_word(name) {
            return false;
        }
        for variant in derive_gender_variants(name) {
            let prov = if variant == name { provenance } else { Provenance::Derived };
            self.entries
                .entry(variant)
                .and_modify(|p| *p = (*p).min(prov))
                .or_insert(prov);
        }
        true
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn provenance(&self, name: &str) -> Option<Provenance> {
        self.entries.get(name).copied()
    }

    /// Token lookup: surrounding punctuation is dropped and homoglyphs are
    /// repaired; case is kept.
    pub fn is_known_surname(&self, token_text: &str, table: &HomoglyphTable) -> bool {
        let core = strip_name_punct(token_text);
        if core.is_empty() {
            return false;
        }
        let (repaired, _) = repair_homoglyphs(core, table);
        self.entries.contains_key(&repaired)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Provenance)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// `name<TAB>provenance` per line, sorted.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (name, prov) in &self.entries {
            out.push_str(name);
            out.push('\t');
            out.push_str(prov.as_str());
            out.push('\n');
        }
        out
    }
}

fn is_initial_token(s: &str) -> Option<usize> {
    // "Э.А." / "Э." with an optional trailing comma; returns the letter count.
    let s = s.strip_suffix(',').unwrap_or(s);
    let chars: Vec<char> = s.chars().collect();
    if chars.is_empty() || !chars.len().is_multiple_of(2) || chars.len() > 4 {
        return None;
    }
    for pair in chars.chunks(2) {
        if !(is_cyrillic(pair[0]) && pair[0].is_uppercase() && pair[1] == '.') {
            return None;
        }
    }
    Some(chars.len() / 2)
}

/// `(surname, first token, one past last token)` for each `Surname I.I.` group.
fn name_groups(tokens: &[String]) -> Vec<(String, usize, usize)> {
    let mut groups = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let word = tokens[i].strip_suffix(',').unwrap_or(&tokens[i]);
        if is_capitalized_cyrillic_word(word) {
            if let Some(n) = tokens.get(i + 1).and_then(|t| is_initial_token(t)) {
                let mut end = i + 2;
                if n == 1 && !tokens[i + 1].ends_with(',') {
                    if let Some(1) = tokens.get(i + 2).and_then(|t| is_initial_token(t)) {
                        end = i + 3;
                    }
                }
                groups.push((word.to_string(), i, end));
                i = end;
                continue;
            }
        }
        i += 1;
    }
    groups
}

/// Grow `lexicon` from `corpus` until a pass finds nothing new.
///
/// A candidate is an unknown surname in a `Surname I.I.` group directly next
/// to a group whose surname is known. Candidates seen at least `min_count`
/// times in a pass are added with their derived counterparts.
pub fn mine_candidate_names<'a>(
    corpus: impl IntoIterator<Item = &'a str>,
    lexicon: &NameLexicon,
    table: &HomoglyphTable,
    min_count: usize,
) -> NameLexicon {
    let lines: Vec<Vec<String>> = corpus
        .into_iter()
        .map(|line| {
            tokenize(line)
                .into_iter()
                .map(|t| repair_homoglyphs(&t.text, table).0)
                .collect()
        })
        .collect();
    let groups: Vec<Vec<(String, usize, usize)>> = lines.iter().map(|l| name_groups(l)).collect();
    let mut lex = lexicon.clone();
    loop {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for line in &groups {
            for pair in line.windows(2) {
                let (a, _, a_end) = &pair[0];
                let (b, b_start, _) = &pair[1];
                if a_end != b_start {
                    continue;
                }
                match (lex.contains(a), lex.contains(b)) {
                    (true, false) => *counts.entry(b).or_default() += 1,
                    (false, true) => *counts.entry(a).or_default() += 1,
                    _ => {}
                }
            }
        }
        let fresh: Vec<&str> = counts
            .into_iter()
            .filter(|&(_, n)| n >= min_count.max(1))
            .map(|(name, _)| name)
            .collect();
        if fresh.is_empty() {
            return lex;
        }
        for name in fresh {
            lex.insert(name, Provenance::Mined);
        }
    }
}

/// Everything the feature extractor looks up, bundled so it can be shared
/// read-only across worker threads.
#[derive(Debug, Clone)]
pub struct Lexicons {
    pub homoglyphs: HomoglyphTable,
    pub names: NameLexicon,
    pub abbreviations: AbbreviationList,
}

impl Lexicons {
    /// Bundled homoglyph table, seed surnames and abbreviation list.
    pub fn bundled() -> Self {
        Lexicons {
            homoglyphs: HomoglyphTable::default(),
            names: NameLexicon::bundled_seed(),
            abbreviations: AbbreviationList::bundled(),
        }
    }
}

impl Default for Lexicons {
    fn default() -> Self {
        Self::bundled()
    }
}

/// Dotted abbreviations that must not be read as the end of a title.
#[derive(Debug, Clone, Default)]
pub struct AbbreviationList {
    entries: BTreeSet<String>,
}

impl AbbreviationList {
    pub fn bundled() -> Self {
        Self::parse(include_str!("../data/abbreviations.txt")).expect("bundled list is valid")
    }

    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut list = AbbreviationList::default();
        for (i, raw) in text.lines().enumerate() {
            let entry = raw.trim();
            if entry.is_empty() || entry.starts_with('#') {
                continue;
            }
            if !list.insert(entry) {
                return Err(LexiconError::BadLine {
                    line: i + 1,
                    reason: format!("abbreviation {entry:?} must end with '.'"),
                });
            }
        }
        Ok(list)
    }

    pub fn load(path: &Path) -> Result<Self, LexiconError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn insert(&mut self, entry: &str) -> bool {
        if !entry.ends_with('.') || entry.len() < 2 {
            return false;
        }
        self.entries.insert(entry.to_lowercase());
        true
    }

    /// Case-insensitive match, with leading dashes/brackets and trailing
    /// `,;:` dropped first.
    pub fn is_abbreviation(&self, token_text: &str, table: &HomoglyphTable) -> bool {
        let core = token_text
            .trim_start_matches(['-', '–', '—', '(', '['])
            .trim_end_matches([',', ';', ':', ')', ']']);
        if !core.ends_with('.') {
            return false;
        }
        let (repaired, _) = repair_homoglyphs(core, table);
        self.entries.contains(&repaired.to_lowercase())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
