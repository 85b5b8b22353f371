//! Portable float map: `Pf` header, one channel, rows stored bottom-up.

use std::path::Path;

use crate::{Error, GrayGrid, Grid, Result};

/// Little-endian single-channel PFM bytes.
pub fn encode_pfm(grid: &GrayGrid) -> Vec<u8> {
    let (w, h) = grid.dims();
    let mut out = format!("Pf\n{w} {h}\n-1.0\n").into_bytes();
    out.reserve(4 * w * h);
    for y in (0..h).rev() {
        for x in 0..w {
            out.extend_from_slice(&(*grid.get(x, y) as f32).to_le_bytes());
        }
    }
    out
}

fn next_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Option<&'a str> {
    while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return None;
    }
    std::str::from_utf8(&bytes[start..*pos]).ok()
}

/// Parses a single-channel PFM of either byte order. Errors carry no path.
pub fn decode_pfm(bytes: &[u8]) -> std::result::Result<GrayGrid, String> {
    let mut pos = 0;
    match next_token(bytes, &mut pos) {
        Some("Pf") => {}
        Some("PF") => return Err("three-channel PFM is not supported".into()),
        _ => return Err("missing Pf magic".into()),
    }
    let mut num = |what: &str| next_token(bytes, &mut pos).ok_or_else(|| format!("missing {what}"));
    let w: usize = num("width")?.parse().map_err(|_| "bad width".to_string())?;
    let h: usize = num("height")?.parse().map_err(|_| "bad height".to_string())?;
    let scale: f64 = num("scale")?.parse().map_err(|_| "bad scale".to_string())?;
    if scale == 0.0 || !scale.is_finite() {
        return Err("scale must be nonzero".into());
    }
    // exactly one whitespace byte separates the header from the data
    pos += 1;
    let need = 4 * w * h;
    let data = bytes.get(pos..).unwrap_or(&[]);
    if data.len() < need {
        return Err(format!("expected {need} data bytes, found {}", data.len()));
    }
    let little = scale < 0.0;
    let mut values = vec![0.0; w * h];
    for (i, chunk) in data[..need].chunks_exact(4).enumerate() {
        let raw = [chunk[0], chunk[1], chunk[2], chunk[3]];
        let v = if little { f32::from_le_bytes(raw) } else { f32::from_be_bytes(raw) };
        let (x, row) = (i % w, i / w);
        values[(h - 1 - row) * w + x] = v as f64;
    }
    Grid::from_vec(w, h, values).map_err(|e| e.to_string())
}

pub fn write_pfm(path: &Path, grid: &GrayGrid) -> Result<()> {
    std::fs::write(path, encode_pfm(grid)).map_err(|e| Error::io(path, e))
}

pub fn read_pfm(path: &Path) -> Result<GrayGrid> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pfm(&bytes).map_err(|m| Error::format(path, m))
}
