//! Replacing a temporary handle by a real one across stored citation files.

use std::path::{Path, PathBuf};

use super::{Collection, LinkError, LinkKind, LinkRecord, Registry};
use crate::serialize::{read_jsonl, read_references_xml, render_references_jsonl, render_references_xml, write_atomic};

fn refs_files(root: &Path, out: &mut Vec<PathBuf>) -> std::io::Result<()> {
    let mut entries: Vec<_> = std::fs::read_dir(root)?.collect::<Result<_, _>>()?;
    entries.sort_by_key(|e| e.file_name());
    for e in entries {
        let path = e.path();
        if e.file_type()?.is_dir() {
            refs_files(&path, out)?;
        } else if path.to_string_lossy().ends_with("-refs.xml") {
            out.push(path);
        }
    }
    Ok(())
}

fn rewrite(records: &mut [LinkRecord], temp: &str, real: &str) -> usize {
    let mut n = 0;
    for rec in records {
        if let Some(link) = &mut rec.link {
            if link.handle == temp {
                link.handle = real.to_string();
                link.kind = LinkKind::Linked;
                n += 1;
            }
        }
    }
    n
}

/// Rewrite every stored reference carrying `temp` to `real`, mark the
/// registry entry promoted, and return how many references changed.
///
/// Both handles are checked before anything is written.
pub fn promote(
    temp: &str,
    real: &str,
    registry: &mut Registry,
    collection: &Collection,
    store: &Path,
) -> Result<usize, LinkError> {
    let entry = registry.get(temp).ok_or_else(|| LinkError::UnknownTempHandle(temp.to_string()))?;
    if let super::RegistryStatus::Promoted { to, .. } = &entry.status {
        return Err(LinkError::AlreadyPromoted { temp: temp.to_string(), to: to.clone() });
    }
    if !collection.contains_handle(real) {
        return Err(LinkError::UnknownHandle(real.to_string()));
    }
    let store_err = |path: &Path, e: &dyn std::fmt::Display| LinkError::Store { path: path.to_path_buf(), reason: e.to_string() };

    let mut files = Vec::new();
    if store.exists() {
        refs_files(store, &mut files)?;
    }
    let mut count = 0;
    for xml_path in files {
        let text = std::fs::read_to_string(&xml_path)?;
        let (document, mut records) = read_references_xml(&text).map_err(|e| store_err(&xml_path, &e))?;
        let changed = rewrite(&mut records, temp, real);
        if changed == 0 {
            continue;
        }
        write_atomic(&xml_path, &render_references_xml(&document, &records))?;
        let stem = xml_path.to_string_lossy();
        let jsonl_path = PathBuf::from(format!("{}-refs.jsonl", stem.trim_end_matches("-refs.xml")));
        if jsonl_path.exists() {
            let mut mirror: Vec<LinkRecord> =
                read_jsonl(&std::fs::read_to_string(&jsonl_path)?).map_err(|e| store_err(&jsonl_path, &e))?;
            rewrite(&mut mirror, temp, real);
            write_atomic(&jsonl_path, &render_references_jsonl(&mirror))?;
        }
        count += changed;
    }
    registry.mark_promoted(temp, real)?;
    Ok(count)
}
