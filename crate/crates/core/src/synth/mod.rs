//! Pseudo depth maps fabricated from binary lab shoeprints.
//!
//! A print is masked with the concave hull of its ink, denoised with a blur
//! and a sigmoid, and then given texture, bevels, local curvature on the
//! non-contact surfaces and a global upward curl along the tread edge.

mod depth;
mod mask;

pub use depth::{
    add_bevels, add_global_curvature, add_local_curvature, add_texture, clean_print, print_to_gray,
    synth_variants, synth_variants_with_mask, synthesize_depth, Range, SynthDepthConfig, SynthRanges, MAX_VARIANTS,
    MIN_VARIANTS,
};
pub use mask::{close_with_disk, ink_pixels, mask_from_print, HueBand};
