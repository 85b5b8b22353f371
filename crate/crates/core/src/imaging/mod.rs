//! Raster kernels: blur, masked local means, percentiles, the exact Euclidean
//! distance transform and the geometric transforms used for augmentation.

mod edt;
mod label;
mod filter;
mod stats;
mod transform;

pub use edt::euclidean_distance_transform;
pub use label::{fill_holes, label_regions, UNLABELED};
pub use filter::{box_sum, gaussian_blur, gaussian_kernel, local_mean_depth};
pub use stats::{percentile, SortedSample};
pub use transform::{
    geom_transform, geom_transform_masked, resize_bilinear, sample_bilinear, transform_mask, Flip,
    TransformSpec, Transformed,
};
