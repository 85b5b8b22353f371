//! Builds the 23 augmented views of a photo, runs a stand-in predictor on
//! each, and merges the predictions back into the original frame.
//!
//! `cargo run --release --example tta_roundtrip`

use shoeprint::tta::{make_variants, merge_predictions};
use shoeprint::{DepthGrid, Grid, RgbGrid};

/// Stand-in depth predictor: inverted brightness.
fn predict(img: &RgbGrid) -> DepthGrid {
    img.map(|p| 1.0 - (p[0] + p[1] + p[2]) / 3.0)
}

fn main() -> shoeprint::Result<()> {
    let (w, h) = (96, 160);
    let photo: RgbGrid = Grid::from_fn(w, h, |x, y| {
        let v = 0.5 + 0.35 * (x as f64 / 11.0).sin() * (y as f64 / 17.0).cos();
        [v, v * 0.9, v * 0.8]
    });
    let mask = Grid::from_fn(w, h, |x, y| x > 5 && x < w - 6 && y > 5 && y < h - 6);

    let original = predict(&photo);
    let variants = make_variants(&photo, &mask)?;
    let predictions: Vec<_> = variants.iter().map(|v| (predict(&v.image), v.spec)).collect();
    for v in &variants {
        println!("{:>24}: {} valid pixels", v.spec.slug(), v.mask.count());
    }
    let merged = merge_predictions(&original, &predictions, &mask)?;
    let mae = (0..merged.len())
        .filter(|&i| mask.data()[i])
        .map(|i| (merged.data()[i] - original.data()[i]).abs())
        .sum::<f64>()
        / mask.count() as f64;
    println!("merged vs single-view prediction: mean abs difference {mae:.2e}");
    Ok(())
}
