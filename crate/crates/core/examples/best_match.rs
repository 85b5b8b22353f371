//! Scores a synthetic depth map against its ground-truth print with the
//! threshold-free best-match IoU and shows what each sweep stage contributed.
//!
//! `cargo run --release --example best_match`

use shoeprint::metric::{adaptive_match, best_match, DEFAULT_WINDOW};
use shoeprint::{DepthGrid, Grid};

fn main() -> shoeprint::Result<()> {
    let (w, h) = (405, 765);
    // lugs at 0.3 on a 0.7 base, tilted front to back
    let depth: DepthGrid = Grid::from_fn(w, h, |x, y| {
        let lug = (x / 20 + y / 30) % 2 == 0;
        (if lug { 0.3 } else { 0.7 }) + 0.15 * y as f64 / h as f64
    });
    // the true print misses a worn patch in the heel
    let gt = Grid::from_fn(w, h, |x, y| (x / 20 + y / 30) % 2 == 0 && !(y > 600 && x > 150 && x < 250));
    let mask = Grid::from_fn(w, h, |x, y| {
        let (u, v) = (x as f64 / w as f64 - 0.5, y as f64 / h as f64 - 0.5);
        u * u * 4.0 + v * v * 4.0 < 0.95
    });

    let stage1 = adaptive_match(&depth, &gt, &mask, DEFAULT_WINDOW)?;
    let full = best_match(&depth, &gt, &mask)?;
    println!("adaptive threshold only: IoU {:.4} at s = {:?}", stage1.iou, stage1.params.s);
    println!("full search:             IoU {:.4}", full.iou);
    println!("  s    = {:?}", full.params.s);
    println!("  t_nc = {:?}", full.params.t_nc);
    println!("  t_c  = {:?}", full.params.t_c);
    println!("predicted print covers {} of {} tread pixels", full.print.count(), mask.count());
    Ok(())
}
