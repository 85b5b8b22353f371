use std::path::Path;

use crate::align::Correspondence;
use crate::{Error, Result};

/// Reads `src_x,src_y,dst_x,dst_y` rows.
pub fn read_correspondences(path: &Path) -> Result<Vec<Correspondence>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(|e| csv_error(path, e))?;
    let headers = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["src_x", "src_y", "dst_x", "dst_y"] {
        return Err(Error::format(path, "expected header src_x,src_y,dst_x,dst_y"));
    }
    rdr.deserialize().map(|r| r.map_err(|e| csv_error(path, e))).collect()
}

pub fn write_correspondences(path: &Path, corr: &[Correspondence]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    for c in corr {
        w.serialize(c).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub(crate) fn csv_error(path: &Path, e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::format(path, format!("{other:?}")),
        }
    } else {
        Error::format(path, e.to_string())
    }
}
