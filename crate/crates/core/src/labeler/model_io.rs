//! Plain-text model format.
//!
//! ```text
//! gostcite-model v1
//! labels B-A I-A B-T I-T B-Y O
//! epochs 20
//! seed 20170601
//! examples 240
//! corpus-sha256 <64 hex digits>
//! transitions
//! START<TAB>w w w w w w
//! B-A<TAB>w w w w w w
//! ...                          (one row per label, in label order)
//! features <n>
//! <feature name><TAB>w w w w w w   (sorted by name)
//! end
//! ```
//!
//! Weights are written with Rust's shortest round-trip float formatting, so a
//! saved model reloads bit-exactly.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{LabelerError, Model, ModelMeta, L, START};
use crate::training_data::Label;

const MAGIC: &str = "gostcite-model v1";

fn write_row(out: &mut String, head: &str, w: &[f64; L]) {
    out.push_str(head);
    out.push('\t');
    let cols: Vec<String> = w.iter().map(|x| x.to_string()).collect();
    out.push_str(&cols.join(" "));
    out.push('\n');
}

impl Model {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(MAGIC);
        out.push('\n');
        let labels: Vec<&str> = Label::ALL.iter().map(|l| l.as_str()).collect();
        let _ = writeln!(out, "labels {}", labels.join(" "));
        let _ = writeln!(out, "epochs {}", self.meta.epochs);
        let _ = writeln!(out, "seed {}", self.meta.seed);
        let _ = writeln!(out, "examples {}", self.meta.examples);
        let _ = writeln!(out, "corpus-sha256 {}", self.meta.corpus_sha256);
        out.push_str("transitions\n");
        write_row(&mut out, "START", &self.transitions[START]);
        for l in Label::ALL {
            write_row(&mut out, l.as_str(), &self.transitions[l.index()]);
        }
        let mut names: Vec<&String> = self.weights.keys().collect();
        names.sort();
        let _ = writeln!(out, "features {}", names.len());
        for name in names {
            write_row(&mut out, name, &self.weights[name]);
        }
        out.push_str("end\n");
        out
    }

    pub fn from_text(text: &str) -> Result<Model, LabelerError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let mut last_line = 0;
        let mut next = |what: &str| -> Result<(usize, &str), LabelerError> {
            let (n, l) = lines.next().ok_or_else(|| LabelerError::ModelFormat {
                line: last_line + 1,
                reason: format!("unexpected end of file, expected {what}"),
            })?;
            last_line = n;
            Ok((n, l))
        };
        let bad = |line: usize, reason: String| LabelerError::ModelFormat { line, reason };

        let (n, magic) = next("header")?;
        if magic != MAGIC {
            return Err(bad(n, format!("expected {MAGIC:?}")));
        }
        let (n, labels) = next("labels")?;
        let expected: Vec<&str> = Label::ALL.iter().map(|l| l.as_str()).collect();
        if labels != format!("labels {}", expected.join(" ")) {
            return Err(bad(n, "label set must be exactly B-A I-A B-T I-T B-Y O".into()));
        }
        fn keyed<'a>(line: (usize, &'a str), key: &str) -> Result<&'a str, LabelerError> {
            line.1
                .strip_prefix(key)
                .and_then(|r| r.strip_prefix(' '))
                .ok_or_else(|| LabelerError::ModelFormat { line: line.0, reason: format!("expected {key:?}") })
        }
        let num = |line: (usize, &str), key: &str| -> Result<u64, LabelerError> {
            keyed(line, key)?
                .parse()
                .map_err(|e| bad(line.0, format!("{key}: {e}")))
        };
        let epochs = num(next("epochs")?, "epochs")? as usize;
        let seed = num(next("seed")?, "seed")?;
        let examples = num(next("examples")?, "examples")? as usize;
        let hash_line = next("corpus-sha256")?;
        let corpus_sha256 = keyed(hash_line, "corpus-sha256")?.to_string();
        if corpus_sha256.len() != 64 || !corpus_sha256.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(bad(hash_line.0, "corpus hash must be 64 hex digits".into()));
        }
        let (n, t) = next("transitions")?;
        if t != "transitions" {
            return Err(bad(n, "expected \"transitions\"".into()));
        }

        let parse_row = |(n, line): (usize, &str)| -> Result<(String, [f64; L]), LabelerError> {
            let (head, rest) = line.rsplit_once('\t').ok_or_else(|| bad(n, "expected name<TAB>weights".into()))?;
            let vals: Vec<f64> = rest
                .split(' ')
                .map(|v| v.parse::<f64>().map_err(|e| bad(n, format!("weight {v:?}: {e}"))))
                .collect::<Result<_, _>>()?;
            let arr: [f64; L] = vals
                .try_into()
                .map_err(|_| bad(n, format!("expected {L} weights")))?;
            if arr.iter().any(|x| !x.is_finite()) {
                return Err(bad(n, "weights must be finite".into()));
            }
            Ok((head.to_string(), arr))
        };

        let mut transitions = [[0.0; L]; L + 1];
        let heads = std::iter::once("START").chain(Label::ALL.iter().map(|l| l.as_str()));
        for (row, head) in heads.enumerate() {
            let line = next("transition row")?;
            let (name, w) = parse_row(line)?;
            if name != head {
                return Err(bad(line.0, format!("expected transition row {head:?}")));
            }
            let idx = if row == 0 { START } else { row - 1 };
            transitions[idx] = w;
        }

        let count_line = next("features")?;
        let count = num(count_line, "features")? as usize;
        let mut weights = HashMap::with_capacity(count);
        let mut prev: Option<String> = None;
        for _ in 0..count {
            let line = next("feature row")?;
            let (name, w) = parse_row(line)?;
            if prev.as_ref().is_some_and(|p| *p >= name) {
                return Err(bad(line.0, "feature rows must be sorted and unique".into()));
            }
            prev = Some(name.clone());
            weights.insert(name, w);
        }
        let (n, end) = next("end")?;
        if end != "end" {
            return Err(bad(n, "expected \"end\"".into()));
        }
        if let Some((n, _)) = lines.next() {
            return Err(bad(n, "trailing content after \"end\"".into()));
        }
        Ok(Model {
            transitions,
            weights,
            meta: ModelMeta { epochs, seed, examples, corpus_sha256 },
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), LabelerError> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Model, LabelerError> {
        Model::from_text(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Model {
        let mut weights = HashMap::new();
        weights.insert("0:is_known_surname".to_string(), [1.5, -0.1, 0.0, 1e-300, -2.25, 0.1 + 0.2]);
        weights.insert("bias".to_string(), [0.0, 0.0, 0.0, 0.0, 0.0, -7.0 / 3.0]);
        let mut transitions = [[0.0; L]; L + 1];
        transitions[START][0] = 0.123_456_789_012_345_67;
        transitions[2][3] = -1.0 / 7.0;
        Model {
            transitions,
            weights,
            meta: ModelMeta { epochs: 3, seed: 9, examples: 2, corpus_sha256: "ab".repeat(32) },
        }
    }

    #[test]
    fn round_trips_bit_exactly() {
        let m = sample();
        let back = Model::from_text(&m.to_text()).unwrap();
        assert_eq!(back, m);
        for (k, w) in &m.weights {
            let b = back.weights[k];
            assert!(w.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
        assert_eq!(back.to_text(), m.to_text());
    }

    #[test]
    fn rejects_damaged_files() {
        let text = sample().to_text();
        assert!(Model::from_text("").is_err());
        assert!(Model::from_text(&text.replace("gostcite-model v1", "gostcite-model v2")).is_err());
        assert!(Model::from_text(&text.replace("labels B-A", "labels B-X")).is_err());
        assert!(Model::from_text(&text.replace("end\n", "")).is_err());
        assert!(Model::from_text(&format!("{text}junk\n")).is_err());
        assert!(Model::from_text(&text.replace("features 2", "features 3")).is_err());
        let err = Model::from_text(&text.replace("seed 9", "seed x")).unwrap_err();
        assert!(matches!(err, LabelerError::ModelFormat { line: 4, .. }), "{err}");
    }
}
