//! JSON Lines dataset manifests. Relative paths resolve against the manifest's directory.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::metric::Category;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub shoe_id: String,
    pub category: Category,
    pub image_path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gt_print_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub albedo_path: Option<PathBuf>,
    /// Index into the light table used to render `image_path`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub light: Option<usize>,
}

impl ManifestEntry {
    fn paths_mut(&mut self) -> impl Iterator<Item = &mut PathBuf> {
        std::iter::once(&mut self.image_path)
            .chain(self.mask_path.as_mut())
            .chain(self.gt_print_path.as_mut())
            .chain(self.depth_path.as_mut())
            .chain(self.albedo_path.as_mut())
    }
}

/// Parses manifest text. Paths are returned as written.
pub fn parse_manifest(text: &str, origin: &Path) -> Result<Vec<ManifestEntry>> {
    let mut entries = Vec::new();
    let mut ids = HashSet::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let e: ManifestEntry = serde_json::from_str(line).map_err(|err| Error::format(origin, format!("line {}: {err}", i + 1)))?;
        if !ids.insert(e.shoe_id.clone()) {
            return Err(Error::format(origin, format!("line {}: duplicate shoe_id {:?}", i + 1, e.shoe_id)));
        }
        entries.push(e);
    }
    Ok(entries)
}

/// Loads a manifest, resolving relative paths and checking that every referenced file exists.
pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut entries = parse_manifest(&text, path)?;
    for e in &mut entries {
        let id = e.shoe_id.clone();
        for p in e.paths_mut() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
            if !p.exists() {
                return Err(Error::data(format!("{id}: referenced file {} does not exist", p.display())));
            }
        }
    }
    Ok(entries)
}

pub fn manifest_to_string(entries: &[ManifestEntry]) -> String {
    entries
        .iter()
        .map(|e| serde_json::to_string(e).expect("manifest entries serialize") + "\n")
        .collect()
}

pub fn write_manifest(path: &Path, entries: &[ManifestEntry]) -> Result<()> {
    std::fs::write(path, manifest_to_string(entries)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_reject_duplicates() {
        let text = r#"{"shoe_id":"a","category":"formal","image_path":"a.png","mask_path":"m.png"}

{"shoe_id":"b","category":"new-athletic","image_path":"b.png","depth_path":"b.pfm"}
"#;
        let e = parse_manifest(text, Path::new("m.jsonl")).unwrap();
        assert_eq!(e.len(), 2);
        assert_eq!(e[1].category, Category::NewAthletic);
        assert_eq!(manifest_to_string(&e).lines().next().unwrap(), text.lines().next().unwrap());
        let dup = format!("{}\n{}", text.lines().next().unwrap(), text.lines().next().unwrap());
        assert!(parse_manifest(&dup, Path::new("m")).is_err());
        assert!(parse_manifest(r#"{"shoe_id":"a","category":"boots","image_path":"a"}"#, Path::new("m")).is_err());
    }

    #[test]
    fn read_resolves_and_checks_files() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("a.png"), b"x").unwrap();
        let m = dir.path().join("m.jsonl");
        std::fs::write(&m, r#"{"shoe_id":"a","category":"used","image_path":"a.png"}"#).unwrap();
        let e = read_manifest(&m).unwrap();
        assert_eq!(e[0].image_path, dir.path().join("a.png"));
        std::fs::write(&m, r#"{"shoe_id":"a","category":"used","image_path":"b.png"}"#).unwrap();
        assert!(matches!(read_manifest(&m), Err(Error::Data(_))));
    }
}
