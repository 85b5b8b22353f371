//! Turns a depth map into a binary print without ground truth and writes
//! both to PNG.
//!
//! `cargo run --release --example predict_print -- [out_dir]`

use std::path::PathBuf;

use shoeprint::io;
use shoeprint::metric::{normalize_depth, predict_print};
use shoeprint::{DepthGrid, Grid};

fn main() -> shoeprint::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "predict_print_out".into()));
    std::fs::create_dir_all(&out).map_err(|e| shoeprint::Error::Io { path: out.clone(), source: e })?;

    let (w, h) = (200, 360);
    let raw: DepthGrid = Grid::from_fn(w, h, |x, y| {
        let (u, v) = (x as f64, y as f64);
        let groove = ((u / 7.0).sin() * (v / 11.0).cos()).max(0.0);
        12.0 + 30.0 * groove + 0.02 * v
    });
    let mask = Grid::from_fn(w, h, |x, y| x > 10 && x < w - 10 && y > 10 && y < h - 10);
    // any depth scale works; normalizing only changes what gets written
    let depth = normalize_depth(&raw, &mask)?;
    let print = predict_print(&depth, &mask)?;

    io::write_pfm(&out.join("depth.pfm"), &depth)?;
    io::write_gray(&out.join("depth.png"), &depth)?;
    io::write_print(&out.join("print.png"), &print)?;
    println!("{} contact pixels of {} -> {}", print.count(), mask.count(), out.display());
    Ok(())
}
