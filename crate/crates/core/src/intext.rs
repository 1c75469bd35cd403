//! Numeric square-bracket in-text references with their context windows.

use std::collections::BTreeMap;
use std::ops::Range;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::docingest::DocumentText;

/// One mention of a reference in the body text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InTextRef {
    pub reference_num: usize,
    /// The whole bracket as written, e.g. `[4]` or `[2-4]`.
    pub exact: String,
    /// Code-point interval of `exact`.
    pub span: Range<usize>,
    pub prefix: String,
    pub suffix: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InTextConfig {
    /// Context width on each side, in code points.
    pub context_width: usize,
    /// Expand `[1, 3]` and `[2-4]`; when off only plain `[n]` is read.
    pub expand_lists: bool,
}

impl Default for InTextConfig {
    fn default() -> Self {
        InTextConfig { context_width: 200, expand_lists: true }
    }
}

fn bracket_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\[(\d+(?:\s*[-–,]\s*\d+)*)\]").expect("valid regex"))
}

fn plain_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\[(\d+)\]").expect("valid regex"))
}

/// Numbers named by a bracket body such as `1, 3-5`. Ranges are expanded;
/// a reversed range is read as its two endpoints, and a range is capped at
/// `max` so a typo like `[1-99999]` stays cheap. Numbers that overflow are
/// skipped.
fn expand(body: &str, max: usize) -> Vec<usize> {
    let mut out = Vec::new();
    for part in body.split(',') {
        let bounds: Vec<&str> = part.split(['-', '–']).map(str::trim).collect();
        let nums: Vec<Option<usize>> = bounds.iter().map(|b| b.parse().ok()).collect();
        match nums.as_slice() {
            [Some(n)] => out.push(*n),
            [Some(a), Some(b)] if a <= b => {
                let hi = (*b).min(max.max(*a));
                out.extend(*a..=hi);
            }
            [Some(a), Some(b)] => out.extend([*a, *b]),
            _ => {
                // a chain like 1-2-3: take every number
                out.extend(nums.iter().flatten());
            }
        }
    }
    out
}

/// Find bracketed reference numbers in `doc.text[..body_end]` and attach the
/// context windows. Contexts are clipped to `[0, body_end)`, so they never
/// reach into the reference list, and whitespace touching the bracket is
/// dropped from them. Numbers outside `1..=max_ref_num` are
/// dropped.
pub fn extract_intext_refs(
    doc: &DocumentText,
    body_end: usize,
    max_ref_num: usize,
    config: &InTextConfig,
) -> Vec<InTextRef> {
    let body_end = body_end.min(doc.len());
    let body = doc.slice(0..body_end);
    let re = if config.expand_lists { bracket_re() } else { plain_re() };
    let mut out = Vec::new();
    for caps in re.captures_iter(body) {
        let m = caps.get(0).expect("group 0");
        let start = doc.char_offset(m.start());
        let end = start + m.as_str().chars().count();
        let nums = if config.expand_lists {
            expand(&caps[1], max_ref_num)
        } else {
            caps[1].parse().map(|n| vec![n]).unwrap_or_default()
        };
        let mut seen = Vec::new();
        let pre_start = start.saturating_sub(config.context_width);
        let post_end = (end + config.context_width).min(body_end);
        for n in nums {
            if n == 0 || n > max_ref_num || seen.contains(&n) {
                continue;
            }
            seen.push(n);
            out.push(InTextRef {
                reference_num: n,
                exact: m.as_str().to_string(),
                span: start..end,
                prefix: doc.slice(pre_start..start).trim_end().to_string(),
                suffix: doc.slice(end..post_end).trim_start().to_string(),
            });
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FrequencyBin {
    Once,
    TwoToFour,
    FiveOrMore,
}

impl FrequencyBin {
    /// `None` for a count of zero.
    pub fn of(count: usize) -> Option<FrequencyBin> {
        match count {
            0 => None,
            1 => Some(FrequencyBin::Once),
            2..=4 => Some(FrequencyBin::TwoToFour),
            _ => Some(FrequencyBin::FiveOrMore),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FrequencyBin::Once => "once",
            FrequencyBin::TwoToFour => "2-4",
            FrequencyBin::FiveOrMore => "5+",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Frequency {
    pub count: usize,
    pub bin: FrequencyBin,
}

/// Mention count and bin per reference number.
pub fn frequency_bins(refs: &[InTextRef]) -> BTreeMap<usize, Frequency> {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for r in refs {
        *counts.entry(r.reference_num).or_default() += 1;
    }
    counts
        .into_iter()
        .map(|(n, count)| {
            let bin = FrequencyBin::of(count).expect("count is at least one");
            (n, Frequency { count, bin })
        })
        .collect()
}
