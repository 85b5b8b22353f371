//! Shoe-tread depth maps to shoeprints.
//!
//! The crate covers the non-learned half of a shoeprint-from-tread-photo
//! pipeline:
//!
//! - [`metric`]: threshold-free best-match IoU between a predicted depth map
//!   and a ground-truth print, the generic print predictor, and mIoU tables.
//! - [`synth`]: pseudo depth maps fabricated from lab shoeprints.
//! - [`appearance`]: mean-shift palettes, synthetic albedo and pseudo albedo.
//! - [`render`]: a local diffuse + ambient-occlusion renderer with the
//!   17-entry light table.
//! - [`align`]: thin-plate-spline alignment and averaging of inked prints.
//! - [`tta`]: the 23-variant test-time augmentation set and its merge.
//! - [`io`] and [`commands`]: file formats (PNG, PFM, JSONL, CSV) and the
//!   command layer behind the `shoeprint` binary.
//!
//! All rasters are row-major [`Grid`]s. Depth follows the lower-is-contact
//! convention throughout.

pub mod align;
pub mod appearance;
pub mod commands;
pub mod config;
mod error;
pub mod grid;
pub mod imaging;
pub mod io;
pub mod metric;
pub mod render;
pub mod synth;
pub mod tta;

pub use error::{Error, Result};
pub use grid::{DepthGrid, GrayGrid, Grid, PrintMask, RegionMask, RgbGrid};
