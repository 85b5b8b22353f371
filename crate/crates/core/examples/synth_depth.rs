//! Fabricates pseudo depth maps from a scanned orange shoeprint and reports
//! the drawn parameters of each variant.
//!
//! `cargo run --release --example synth_depth`

use shoeprint::synth::{mask_from_print, synth_variants, HueBand, SynthRanges, MIN_VARIANTS};
use shoeprint::{Grid, RgbGrid};

fn main() -> shoeprint::Result<()> {
    let (w, h) = (120, 220);
    let scan: RgbGrid = Grid::from_fn(w, h, |x, y| {
        let sole = ((x as f64 - 60.0) / 52.0).powi(2) + ((y as f64 - 110.0) / 100.0).powi(2) < 1.0;
        let lug = (x / 8 + y / 12) % 2 == 0;
        if sole && lug {
            [0.93, 0.52, 0.12]
        } else {
            [0.98, 0.98, 0.97]
        }
    });
    let mask = mask_from_print(&scan, &HueBand::default())?;
    println!("tread mask: {} of {} pixels", mask.count(), w * h);

    let variants = synth_variants(&scan, MIN_VARIANTS, 42, &SynthRanges::default())?;
    for (i, (depth, _, cfg)) in variants.iter().enumerate() {
        let inside: Vec<f64> = depth.data().iter().zip(mask.data()).filter(|(_, &m)| m).map(|(&d, _)| d).collect();
        let lo = inside.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = inside.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        println!(
            "v{i:02}: blur {:.2} gain {:5.1} bevel {} relief {:.2} -> depth [{lo:.3}, {hi:.3}]",
            cfg.blur_sigma, cfg.sigmoid_gain, cfg.bevel_width, cfg.relief
        );
    }
    Ok(())
}
