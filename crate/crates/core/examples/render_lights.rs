//! Renders one tread under all 17 light environments and writes a PNG per
//! light together with the synthetic albedo it was shaded with.
//!
//! `cargo run --release --example render_lights -- [out_dir]`

use std::path::PathBuf;

use shoeprint::appearance::{compose_albedo, Palette, PaletteEntry};
use shoeprint::io;
use shoeprint::render::{light_table, render, RenderParams};
use shoeprint::{DepthGrid, Grid};

fn main() -> shoeprint::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "render_lights_out".into()));
    std::fs::create_dir_all(&out).map_err(|e| shoeprint::Error::Io { path: out.clone(), source: e })?;

    let (w, h) = (160, 280);
    let depth: DepthGrid = Grid::from_fn(w, h, |x, y| {
        let lug = ((x as f64 / 9.0).sin() + (y as f64 / 13.0).cos()).max(0.0);
        0.8 - 0.5 * lug.min(1.0)
    });
    let mask = Grid::from_fn(w, h, |x, y| ((x as f64 - 80.0) / 75.0).powi(2) + ((y as f64 - 140.0) / 135.0).powi(2) < 1.0);
    let palette = Palette::new(vec![
        PaletteEntry { rgb: [0.12, 0.12, 0.14], proportion: 0.6 },
        PaletteEntry { rgb: [0.85, 0.35, 0.1], proportion: 0.4 },
    ])?;
    let (albedo, segments) = compose_albedo(&depth, &mask, &palette, 3)?;
    io::write_rgb(&out.join("albedo.png"), &albedo)?;
    println!("{} albedo segments", segments.len());

    let params = RenderParams::default();
    for light in light_table(&params) {
        let img = render(&depth, &albedo, &light, &mask, &params)?;
        let name = format!("light{:02}.png", light.index);
        io::write_rgb(&out.join(&name), &img)?;
        let azimuths: Vec<f64> = light.bulbs.iter().map(|b| b.azimuth).collect();
        println!("{name}: bulbs at {azimuths:?} deg");
    }
    Ok(())
}
