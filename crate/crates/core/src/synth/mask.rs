use serde::{Deserialize, Serialize};

use crate::appearance::color::rgb_to_hsv;
use crate::imaging::{euclidean_distance_transform, fill_holes};
use crate::{Error, RegionMask, Result, RgbGrid};

/// Colour band selecting ink pixels of a scanned print.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HueBand {
    /// Inclusive hue range in degrees.
    pub hue_min: f64,
    pub hue_max: f64,
    pub min_saturation: f64,
    pub min_value: f64,
    /// Radius of the concave hull, in pixels.
    pub hull_radius: f64,
}

impl Default for HueBand {
    fn default() -> Self {
        HueBand {
            hue_min: 5.0,
            hue_max: 50.0,
            min_saturation: 0.3,
            min_value: 0.2,
            hull_radius: 15.0,
        }
    }
}

/// Pixels whose colour lies in the band.
pub fn ink_pixels(print: &RgbGrid, band: &HueBand) -> RegionMask {
    print.map(|&rgb| {
        let (h, s, v) = rgb_to_hsv(rgb);
        s >= band.min_saturation && v >= band.min_value && h >= band.hue_min && h <= band.hue_max
    })
}

/// Morphological closing with a Euclidean disk of `radius` px.
///
/// This is the discrete alpha hull: a pixel is dropped only if some disk of
/// the given radius covers it without touching the set. Pixels beyond the
/// canvas never count as empty space.
pub fn close_with_disk(set: &RegionMask, radius: f64) -> RegionMask {
    // distance of every pixel to the nearest set pixel
    let to_set = euclidean_distance_transform(&set.not());
    let dilated = to_set.map(|&d| d <= radius);
    if dilated.data().iter().all(|&b| b) {
        return dilated;
    }
    euclidean_distance_transform(&dilated).map(|&d| d > radius)
}

/// Tread region of a scanned print: the filled concave hull of its ink.
pub fn mask_from_print(print: &RgbGrid, band: &HueBand) -> Result<RegionMask> {
    let ink = ink_pixels(print, band);
    if !ink.any() {
        return Err(Error::data("print has no pixels in the ink colour band"));
    }
    Ok(fill_holes(&close_with_disk(&ink, band.hull_radius)))
}
