//! Append-only registry of unlinked references.
//!
//! The file is JSON lines, one operation per line:
//! `{"op":"register","n":1,"handle":"spz:cyrkitec:references:1","key":..,...}`
//! or `{"op":"promote","handle":..,"to":..,"at":..}`. Loading replays the
//! operations, so numbering continues where the last run stopped.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{reference_key, Link, LinkError, LinkKind};
use crate::normalize::HomoglyphTable;
use crate::ref_parser::ParsedReference;

pub const TEMP_HANDLE_PREFIX: &str = "spz:cyrkitec:references:";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "lowercase")]
pub enum RegistryStatus {
    Open,
    Promoted { to: String, at: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegistryEntry {
    pub n: u64,
    pub handle: String,
    pub key: String,
    pub raw: String,
    pub author: String,
    pub title: String,
    pub year: String,
    pub first_seen: String,
    #[serde(skip, default = "open_status")]
    pub status: RegistryStatus,
}

fn open_status() -> RegistryStatus {
    RegistryStatus::Open
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
enum Op {
    Register(RegistryEntry),
    Promote { handle: String, to: String, at: String },
}

#[derive(Debug, Default)]
pub struct Registry {
    path: Option<PathBuf>,
    file: Option<File>,
    entries: Vec<RegistryEntry>,
    by_key: HashMap<String, usize>,
    by_handle: HashMap<String, usize>,
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

impl Registry {
    /// A registry that is not persisted.
    pub fn in_memory() -> Self {
        Registry::default()
    }

    /// Open (or create) a registry file and replay it.
    pub fn open(path: &Path) -> Result<Self, LinkError> {
        let mut reg = Registry { path: Some(path.to_path_buf()), ..Default::default() };
        if path.exists() {
            let text = std::fs::read_to_string(path)?;
            for (i, line) in text.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let bad = |reason: String| LinkError::Registry { path: path.display().to_string(), line: i + 1, reason };
                let op: Op = serde_json::from_str(line).map_err(|e| bad(e.to_string()))?;
                reg.apply(op).map_err(bad)?;
            }
        }
        reg.file = Some(OpenOptions::new().create(true).append(true).open(path)?);
        Ok(reg)
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    fn apply(&mut self, op: Op) -> Result<(), String> {
        match op {
            Op::Register(mut e) => {
                let expected = self.entries.len() as u64 + 1;
                if e.n != expected || e.handle != format!("{TEMP_HANDLE_PREFIX}{}", e.n) {
                    return Err(format!("{} out of sequence, expected number {expected}", e.handle));
                }
                if self.by_key.contains_key(&e.key) {
                    return Err(format!("{} repeats key {:?}", e.handle, e.key));
                }
                e.status = RegistryStatus::Open;
                self.by_key.insert(e.key.clone(), self.entries.len());
                self.by_handle.insert(e.handle.clone(), self.entries.len());
                self.entries.push(e);
            }
            Op::Promote { handle, to, at } => {
                let i = *self.by_handle.get(&handle).ok_or_else(|| format!("promotes unknown {handle}"))?;
                if let RegistryStatus::Promoted { to: prev, .. } = &self.entries[i].status {
                    return Err(format!("{handle} promoted twice (first to {prev})"));
                }
                self.entries[i].status = RegistryStatus::Promoted { to, at };
            }
        }
        Ok(())
    }

    fn append(&mut self, op: &Op) -> Result<(), LinkError> {
        if let Some(f) = &mut self.file {
            let mut line = serde_json::to_string(op).expect("registry op serializes");
            line.push('\n');
            f.write_all(line.as_bytes())?;
            f.flush()?;
        }
        Ok(())
    }

    /// Handle for an unlinked reference. A known key gets its existing
    /// handle back (or the real handle once promoted); a new key gets the
    /// next number.
    pub fn register(&mut self, r: &ParsedReference, table: &HomoglyphTable) -> Result<Link, LinkError> {
        let key = reference_key(r, table);
        if let Some(&i) = self.by_key.get(&key) {
            return Ok(match &self.entries[i].status {
                RegistryStatus::Open => Link { handle: self.entries[i].handle.clone(), kind: LinkKind::Unlinked },
                RegistryStatus::Promoted { to, .. } => Link { handle: to.clone(), kind: LinkKind::Linked },
            });
        }
        let n = self.entries.len() as u64 + 1;
        let entry = RegistryEntry {
            n,
            handle: format!("{TEMP_HANDLE_PREFIX}{n}"),
            key,
            raw: r.raw.clone(),
            author: r.author.clone(),
            title: r.title.clone(),
            year: r.year.clone(),
            first_seen: now(),
            status: RegistryStatus::Open,
        };
        let op = Op::Register(entry);
        self.append(&op)?;
        let Op::Register(entry) = op else { unreachable!() };
        let handle = entry.handle.clone();
        self.apply(Op::Register(entry)).expect("fresh key and next number");
        Ok(Link { handle, kind: LinkKind::Unlinked })
    }

    /// Record that `temp` now stands for `real`.
    pub(crate) fn mark_promoted(&mut self, temp: &str, real: &str) -> Result<(), LinkError> {
        let i = *self.by_handle.get(temp).ok_or_else(|| LinkError::UnknownTempHandle(temp.to_string()))?;
        if let RegistryStatus::Promoted { to, .. } = &self.entries[i].status {
            return Err(LinkError::AlreadyPromoted { temp: temp.to_string(), to: to.clone() });
        }
        let op = Op::Promote { handle: temp.to_string(), to: real.to_string(), at: now() };
        self.append(&op)?;
        self.apply(op).expect("checked above");
        Ok(())
    }

    pub fn get(&self, handle: &str) -> Option<&RegistryEntry> {
        self.by_handle.get(handle).map(|&i| &self.entries[i])
    }

    pub fn entries(&self) -> &[RegistryEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference(title: &str) -> ParsedReference {
        ParsedReference {
            raw: format!("Preston J. {title}. 2013"),
            author: "Preston J.".into(),
            title: title.into(),
            year: "2013".into(),
            ..Default::default()
        }
    }

    #[test]
    fn numbering_starts_at_one_and_is_idempotent() {
        let t = HomoglyphTable::default();
        let mut reg = Registry::in_memory();
        let a = reg.register(&reference("The Future of Academic Research"), &t).unwrap();
        assert_eq!(a, Link { handle: "spz:cyrkitec:references:1".into(), kind: LinkKind::Unlinked });
        let again = reg.register(&reference("The future of academic research."), &t).unwrap();
        assert_eq!(again, a);
        assert_eq!(reg.len(), 1);
        let b = reg.register(&reference("Another Paper"), &t).unwrap();
        assert_eq!(b.handle, "spz:cyrkitec:references:2");
    }

    #[test]
    fn replay_continues_numbering() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("unlinked.jsonl");
        let t = HomoglyphTable::default();
        {
            let mut reg = Registry::open(&path).unwrap();
            reg.register(&reference("One"), &t).unwrap();
            reg.register(&reference("Two"), &t).unwrap();
            reg.mark_promoted("spz:cyrkitec:references:1", "RePEc:x:y:1").unwrap();
        }
        let mut reg = Registry::open(&path).unwrap();
        assert_eq!(reg.len(), 2);
        assert!(matches!(reg.get("spz:cyrkitec:references:1").unwrap().status, RegistryStatus::Promoted { .. }));
        assert_eq!(reg.register(&reference("Three"), &t).unwrap().handle, "spz:cyrkitec:references:3");
        // a promoted key resolves to the real handle
        assert_eq!(reg.register(&reference("One"), &t).unwrap(), Link { handle: "RePEc:x:y:1".into(), kind: LinkKind::Linked });
        assert!(matches!(
            reg.mark_promoted("spz:cyrkitec:references:1", "RePEc:x:y:2"),
            Err(LinkError::AlreadyPromoted { .. })
        ));
        assert!(matches!(reg.mark_promoted("spz:cyrkitec:references:9", "RePEc:x:y:2"), Err(LinkError::UnknownTempHandle(_))));
    }

    #[test]
    fn gaps_in_the_file_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("unlinked.jsonl");
        let t = HomoglyphTable::default();
        {
            let mut reg = Registry::open(&path).unwrap();
            reg.register(&reference("One"), &t).unwrap();
            reg.register(&reference("Two"), &t).unwrap();
        }
        let text = std::fs::read_to_string(&path).unwrap();
        let second = text.lines().nth(1).unwrap();
        std::fs::write(&path, format!("{second}\n")).unwrap();
        assert!(matches!(Registry::open(&path), Err(LinkError::Registry { line: 1, .. })));
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(48))]

        /// Random register calls split into sessions by restarts: handles
        /// match a map from first sighting to a counter, across every restart.
        #[test]
        fn numbering_is_gapless_across_restarts(
            sessions in proptest::collection::vec(proptest::collection::vec(0usize..12, 0..10), 1..5)
        ) {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("unlinked.jsonl");
            let t = HomoglyphTable::default();
            let mut expected: HashMap<usize, String> = HashMap::new();
            for session in &sessions {
                let mut reg = Registry::open(&path).unwrap();
                proptest::prop_assert_eq!(reg.len(), expected.len());
                for &k in session {
                    let got = reg.register(&reference(&format!("Paper number {k}")), &t).unwrap().handle;
                    let next = expected.len() + 1;
                    let want = expected.entry(k).or_insert_with(|| format!("{TEMP_HANDLE_PREFIX}{next}"));
                    proptest::prop_assert_eq!(&got, want);
                }
            }
            let reg = Registry::open(&path).unwrap();
            let numbers: Vec<u64> = reg.entries().iter().map(|e| e.n).collect();
            proptest::prop_assert_eq!(numbers, (1..=expected.len() as u64).collect::<Vec<_>>());
        }
    }
}
