use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::palette::Palette;
use crate::imaging::{gaussian_blur, label_regions, UNLABELED};
use crate::metric::predict_print;
use crate::{DepthGrid, Error, Grid, RegionMask, Result, RgbGrid};

/// Piecewise-constant reflectance.
pub type AlbedoMap = RgbGrid;

/// Smoothing applied to depth before the watershed.
pub const WATERSHED_SIGMA: f64 = 2.0;
const WATERSHED_LEVELS: f64 = 1000.0;

/// Segment ids per pixel (`UNLABELED` outside the mask) and one colour per id.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentMap {
    pub labels: Grid<u32>,
    pub colors: Vec<[f64; 3]>,
}

impl SegmentMap {
    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    /// Pixel count of every segment.
    pub fn areas(&self) -> Vec<usize> {
        segment_areas(&self.labels, self.colors.len())
    }

    /// Paints every labelled pixel with its segment colour.
    pub fn to_albedo(&self, background: [f64; 3]) -> AlbedoMap {
        self.labels.map(|&l| if l == UNLABELED { background } else { self.colors[l as usize] })
    }
}

pub(crate) fn segment_areas(labels: &Grid<u32>, n: usize) -> Vec<usize> {
    let mut areas = vec![0usize; n];
    for &l in labels.data() {
        if l != UNLABELED {
            areas[l as usize] += 1;
        }
    }
    areas
}

fn neighbors4(x: usize, y: usize, w: usize, h: usize) -> impl Iterator<Item = (usize, usize)> {
    let mut out = [None; 4];
    if x > 0 {
        out[0] = Some((x - 1, y));
    }
    if x + 1 < w {
        out[1] = Some((x + 1, y));
    }
    if y > 0 {
        out[2] = Some((x, y - 1));
    }
    if y + 1 < h {
        out[3] = Some((x, y + 1));
    }
    out.into_iter().flatten()
}

/// Watershed of `depth` restricted to `region`, flooding downward from the
/// regional maxima of the smoothed, quantized depth. Returns labels and count.
pub fn watershed_regions(depth: &DepthGrid, region: &RegionMask) -> Result<(Grid<u32>, usize)> {
    depth.check_same_dims(region, "watershed_regions")?;
    let (w, h) = depth.dims();
    let smooth = gaussian_blur(depth, WATERSHED_SIGMA)?;
    let level = smooth.map(|&v| (v * WATERSHED_LEVELS).round() as i64);
    let (plateaus, count) = label_regions(&level, region);

    let mut is_max = vec![true; count];
    for y in 0..h {
        for x in 0..w {
            let p = *plateaus.get(x, y);
            if p == UNLABELED {
                continue;
            }
            let l = *level.get(x, y);
            if neighbors4(x, y, w, h).any(|(nx, ny)| *region.get(nx, ny) && *level.get(nx, ny) > l) {
                is_max[p as usize] = false;
            }
        }
    }
    let mut seed_id = vec![UNLABELED; count];
    let mut next = 0u32;
    for (p, &m) in is_max.iter().enumerate() {
        if m {
            seed_id[p] = next;
            next += 1;
        }
    }

    let mut labels = Grid::filled(w, h, UNLABELED);
    // highest level first, then insertion order
    let mut heap = BinaryHeap::new();
    let mut tick = 0u64;
    for y in 0..h {
        for x in 0..w {
            let p = *plateaus.get(x, y);
            if p != UNLABELED && seed_id[p as usize] != UNLABELED {
                labels.set(x, y, seed_id[p as usize]);
                heap.push((*level.get(x, y), Reverse(tick), x, y));
                tick += 1;
            }
        }
    }
    while let Some((_, _, x, y)) = heap.pop() {
        let l = *labels.get(x, y);
        for (nx, ny) in neighbors4(x, y, w, h) {
            if *region.get(nx, ny) && *labels.get(nx, ny) == UNLABELED {
                labels.set(nx, ny, l);
                heap.push((*level.get(nx, ny), Reverse(tick), nx, ny));
                tick += 1;
            }
        }
    }
    Ok((labels, next as usize))
}

/// Tread elements of a depth map: connected components of the predicted
/// contact set, then the rest of the mask split by [`watershed_regions`].
pub fn depth_segments(depth: &DepthGrid, mask: &RegionMask) -> Result<(Grid<u32>, usize)> {
    depth.check_same_dims(mask, "depth_segments")?;
    let contact = predict_print(depth, mask)?;
    let (mut labels, n_contact) = label_regions(&contact, &contact);
    let rest = Grid::from_vec(
        mask.width(),
        mask.height(),
        mask.data().iter().zip(contact.data()).map(|(&m, &c)| m && !c).collect(),
    )?;
    let (basins, n_basins) = watershed_regions(depth, &rest)?;
    for (l, &b) in labels.data_mut().iter_mut().zip(basins.data()) {
        if b != UNLABELED {
            *l = n_contact as u32 + b;
        }
    }
    Ok((labels, n_contact + n_basins))
}

/// Palette index for each segment so that covered areas track the palette
/// proportions.
///
/// Segments are visited largest first (equal areas in seed-shuffled order)
/// and each takes the colour with the largest remaining area deficit, ties
/// to the lower palette index. No colour ends further than the largest
/// segment area from its target.
pub fn assign_colors(areas: &[usize], palette: &Palette, seed: u64) -> Vec<usize> {
    let total: usize = areas.iter().sum();
    let mut order: Vec<usize> = (0..areas.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    order.sort_by(|&a, &b| areas[b].cmp(&areas[a]));
    let mut deficit: Vec<f64> = palette.entries().iter().map(|e| e.proportion * total as f64).collect();
    let mut choice = vec![0usize; areas.len()];
    for s in order {
        let mut best = 0;
        for k in 1..deficit.len() {
            if deficit[k] > deficit[best] {
                best = k;
            }
        }
        deficit[best] -= areas[s] as f64;
        choice[s] = best;
    }
    choice
}

/// Synthetic albedo for a depth map: [`depth_segments`] painted with palette
/// colours by [`assign_colors`]. Pixels outside the mask are black.
pub fn compose_albedo(depth: &DepthGrid, mask: &RegionMask, palette: &Palette, seed: u64) -> Result<(AlbedoMap, SegmentMap)> {
    if palette.is_empty() {
        return Err(Error::arg("palette is empty"));
    }
    let (labels, n) = depth_segments(depth, mask)?;
    let areas = segment_areas(&labels, n);
    let choice = assign_colors(&areas, palette, seed);
    let segments = SegmentMap {
        labels,
        colors: choice.iter().map(|&k| palette.entries()[k].rgb).collect(),
    };
    Ok((segments.to_albedo([0.0; 3]), segments))
}
