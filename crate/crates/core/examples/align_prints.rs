//! Warps two inked prints onto a photo frame with thin-plate splines and
//! averages them into one ground-truth print.
//!
//! `cargo run --release --example align_prints`

use shoeprint::align::{align_print, average_and_threshold, fit_tps, Correspondence, DEFAULT_SMOOTHNESS, DEFAULT_THRESHOLD};
use shoeprint::{GrayGrid, Grid};

fn main() -> shoeprint::Result<()> {
    let (w, h) = (100, 180);
    let truth = |x: f64, y: f64| ((x / 10.0).floor() + (y / 15.0).floor()) as i64 % 2 == 0;

    // each print is the pattern shifted and slightly stretched
    let mut aligned = Vec::new();
    for (dx, sy) in [(4.0, 1.03), (-3.0, 0.97)] {
        let ink: GrayGrid = Grid::from_fn(w, h, |x, y| {
            let (u, v) = (x as f64 - dx, y as f64 / sy);
            if truth(u, v) { 1.0 } else { 0.0 }
        });
        // landmarks clicked in the print and in the photo
        let corr: Vec<Correspondence> = [[10.0, 10.0], [90.0, 12.0], [50.0, 90.0], [12.0, 170.0], [88.0, 168.0], [30.0, 130.0]]
            .into_iter()
            .map(|p| Correspondence::new([p[0] + dx, p[1] * sy], p))
            .collect();
        let warp = fit_tps(&corr, DEFAULT_SMOOTHNESS)?;
        println!("print shifted {dx:+} px, stretched x{sy}: side-condition residual {:.1e}", warp.side_condition_residual());
        aligned.push(align_print(&ink, &corr, DEFAULT_SMOOTHNESS, w, h)?);
    }

    let gt = average_and_threshold(&aligned, DEFAULT_THRESHOLD)?;
    let inner = Grid::from_fn(w, h, |x, y| x > 8 && x < w - 8 && y > 8 && y < h - 8);
    let agree = (0..gt.len())
        .filter(|&i| inner.data()[i])
        .filter(|&i| gt.data()[i] == truth((i % w) as f64, (i / w) as f64))
        .count();
    println!("agreement with the undistorted pattern: {:.1}%", 100.0 * agree as f64 / inner.count() as f64);
    Ok(())
}
