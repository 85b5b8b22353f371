//! Colour palettes, synthetic albedo composition and pseudo-albedo of real photos.

mod albedo;
pub mod color;
mod meanshift;
mod palette;
mod pseudo;

pub use albedo::{assign_colors, compose_albedo, depth_segments, watershed_regions, AlbedoMap, SegmentMap, WATERSHED_SIGMA};
pub use meanshift::{mean_shift, MeanShift, MAX_ITERATIONS, SHIFT_TOLERANCE};
pub use palette::{extract_palette, Palette, PaletteEntry, MAX_PALETTE_POINTS, PALETTE_BANDWIDTH};
pub use pseudo::{pseudo_albedo, PseudoAlbedo, PseudoAlbedoConfig};
