//! File formats: PFM depth, PNG images, JSONL manifests, CSV reports and correspondences.

mod correspondences;
mod manifest;
mod pfm;
mod png;
mod report;

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::{Error, Result};

pub use correspondences::{read_correspondences, write_correspondences};
pub use manifest::{manifest_to_string, parse_manifest, read_manifest, write_manifest, ManifestEntry};
pub use pfm::{decode_pfm, encode_pfm, read_pfm, write_pfm};
pub use png::{read_gray, read_ink, read_mask, read_print, read_rgb, write_gray, write_ink, write_mask, write_print, write_rgb};
pub use report::{parse_report, read_report, report_to_string, summarize, write_report, ReportRow, SummaryLine};

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::format(path, e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))
}
