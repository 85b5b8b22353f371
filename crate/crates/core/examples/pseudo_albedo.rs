//! Estimates a piecewise-constant albedo from a shaded two-colour tread photo
//! and extracts its palette.
//!
//! `cargo run --release --example pseudo_albedo`

use shoeprint::appearance::{extract_palette, pseudo_albedo, PseudoAlbedoConfig, PALETTE_BANDWIDTH};
use shoeprint::{Grid, RgbGrid};

fn main() -> shoeprint::Result<()> {
    let (w, h) = (134, 300);
    // rubber and a coloured insert, under a soft left-to-right shading ramp
    let photo: RgbGrid = Grid::from_fn(w, h, |x, y| {
        let base = if (x / 22 + y / 40) % 3 == 0 { [0.8, 0.3, 0.1] } else { [0.2, 0.2, 0.22] };
        let shade = 0.9 + 0.1 * x as f64 / w as f64;
        base.map(|c| c * shade)
    });
    let mask = Grid::filled(w, h, true);

    let r = pseudo_albedo(&photo, &mask, &PseudoAlbedoConfig::default())?;
    println!("{} segments after {} refinement iterations", r.segments.len(), r.iterations);
    for (i, c) in r.segments.colors.iter().enumerate() {
        println!("  segment {i}: rgb [{:.3}, {:.3}, {:.3}]", c[0], c[1], c[2]);
    }

    let palette = extract_palette(&photo, &mask, PALETTE_BANDWIDTH)?;
    println!("palette:");
    for e in palette.entries() {
        println!("  [{:.3}, {:.3}, {:.3}] x {:.3}", e.rgb[0], e.rgb[1], e.rgb[2], e.proportion);
    }
    Ok(())
}
