//! Test-time augmentation: the 23 canonical input variants and the merge of
//! the 24 predictions back into the original frame.

use rayon::prelude::*;

use crate::imaging::{geom_transform, geom_transform_masked, resize_bilinear, transform_mask, Flip, TransformSpec};
use crate::{DepthGrid, Error, GrayGrid, Grid, RegionMask, Result, RgbGrid};

pub const VARIANT_COUNT: usize = 23;

const ANGLES: [f64; 4] = [5.0, 10.0, -5.0, -10.0];
const SCALES: [f64; 4] = [0.5, 0.8, 1.5, 1.8];

/// Canonical variant order: three flips, four rotations, four scalings,
/// then every flip combined with every rotation.
pub fn canonical_specs() -> Vec<TransformSpec> {
    let flips = [Flip::H, Flip::V, Flip::Hv];
    let mut specs: Vec<TransformSpec> = flips.iter().map(|&flip| TransformSpec::Flip { flip }).collect();
    specs.extend(ANGLES.iter().map(|&degrees| TransformSpec::Rotate { degrees }));
    specs.extend(SCALES.iter().map(|&factor| TransformSpec::Scale { factor }));
    for &flip in &flips {
        specs.extend(ANGLES.iter().map(|&degrees| TransformSpec::FlipRotate { flip, degrees }));
    }
    specs
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variant {
    pub spec: TransformSpec,
    pub image: RgbGrid,
    pub mask: RegionMask,
}

/// Canvas size of the variant for `spec`: scalings resize the canvas,
/// everything else keeps it.
pub fn variant_dims(spec: &TransformSpec, width: usize, height: usize) -> (usize, usize) {
    match *spec {
        TransformSpec::Scale { factor } => {
            let side = |n: usize| ((n as f64 * factor).round() as usize).max(1);
            (side(width), side(height))
        }
        _ => (width, height),
    }
}

/// Forward variant transform of one channel. Scalings resample the whole
/// image onto a resized canvas; flips and rotations act about the centre of
/// a same-size canvas.
pub fn transform_channel(img: &GrayGrid, spec: &TransformSpec) -> Result<GrayGrid> {
    match *spec {
        TransformSpec::Scale { .. } => {
            spec.validate()?;
            let (w, h) = variant_dims(spec, img.width(), img.height());
            resize_bilinear(img, w, h)
        }
        _ => Ok(geom_transform(img, spec)?.grid),
    }
}

fn transform_rgb(img: &RgbGrid, spec: &TransformSpec) -> Result<RgbGrid> {
    let channels: Vec<GrayGrid> = (0..3)
        .map(|c| transform_channel(&GrayGrid::channel(img, c), spec))
        .collect::<Result<_>>()?;
    RgbGrid::from_channels(&channels[0], &channels[1], &channels[2])
}

fn transform_region(mask: &RegionMask, spec: &TransformSpec) -> Result<RegionMask> {
    match *spec {
        TransformSpec::Scale { .. } => {
            let (w, h) = variant_dims(spec, mask.width(), mask.height());
            let m = mask.map(|&b| if b { 1.0 } else { 0.0 });
            Ok(resize_bilinear(&m, w, h)?.map(|&v| v >= 0.5))
        }
        _ => transform_mask(mask, spec),
    }
}

/// A variant prediction mapped back to the original frame, with the pixels
/// it actually covers.
fn restore(depth: &DepthGrid, spec: &TransformSpec, width: usize, height: usize) -> Result<(GrayGrid, RegionMask)> {
    match *spec {
        TransformSpec::Scale { .. } => Ok((resize_bilinear(depth, width, height)?, Grid::filled(width, height, true))),
        _ => {
            let support = geom_transform(&GrayGrid::filled(width, height, 1.0), spec)?.valid;
            let back = geom_transform_masked(depth, Some(&support), &spec.inverse())?;
            Ok((back.grid, back.valid))
        }
    }
}

/// The 23 transformed copies of an image and its mask, in canonical order.
/// Pixels with no source are black and outside the mask. Scaled variants
/// have the canvas size given by [`variant_dims`].
pub fn make_variants(img: &RgbGrid, mask: &RegionMask) -> Result<Vec<Variant>> {
    img.check_same_dims(mask, "make_variants")?;
    canonical_specs()
        .into_par_iter()
        .map(|spec| {
            Ok(Variant {
                spec,
                image: transform_rgb(img, &spec)?,
                mask: transform_region(mask, &spec)?,
            })
        })
        .collect()
}

/// Averages the original prediction with every variant prediction mapped
/// back to the original frame.
///
/// Each variant depth must have the canvas size of its variant. A variant
/// contributes to a pixel only where the inverse transform has full support,
/// both from its canvas and from the pixels the forward transform actually
/// filled; scaled variants cover every pixel. Pixels outside `mask` keep the
/// original value.
pub fn merge_predictions(original: &DepthGrid, variants: &[(DepthGrid, TransformSpec)], mask: &RegionMask) -> Result<DepthGrid> {
    original.check_same_dims(mask, "merge_predictions")?;
    let canonical = canonical_specs();
    let mut seen = vec![false; canonical.len()];
    let (w, h) = original.dims();
    for (depth, spec) in variants {
        let want = variant_dims(spec, w, h);
        if depth.dims() != want {
            return Err(Error::arg(format!(
                "variant {} is {}x{}, expected {}x{}",
                spec.slug(),
                depth.width(),
                depth.height(),
                want.0,
                want.1
            )));
        }
        let i = canonical
            .iter()
            .position(|c| c == spec)
            .ok_or_else(|| Error::arg(format!("unexpected variant spec {}", spec.slug())))?;
        if seen[i] {
            return Err(Error::arg(format!("duplicate variant spec {}", spec.slug())));
        }
        seen[i] = true;
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        return Err(Error::arg(format!("missing variant spec {}", canonical[i].slug())));
    }

    let restored: Vec<_> = variants
        .par_iter()
        .map(|(depth, spec)| restore(depth, spec, w, h))
        .collect::<Result<_>>()?;

    // offsets from the original keep identical inputs exact
    Ok(Grid::from_fn(w, h, |x, y| {
        let base = *original.get(x, y);
        if !*mask.get(x, y) {
            return base;
        }
        let mut acc = 0.0;
        let mut n = 1usize;
        for (grid, valid) in &restored {
            if *valid.get(x, y) {
                acc += grid.get(x, y) - base;
                n += 1;
            }
        }
        base + acc / n as f64
    }))
}

/// How many of the 24 predictions reach each pixel.
pub fn contributor_counts(width: usize, height: usize) -> Result<Grid<usize>> {
    let mut counts = Grid::filled(width, height, 1usize);
    for spec in canonical_specs() {
        let (cw, ch) = variant_dims(&spec, width, height);
        let (_, valid) = restore(&GrayGrid::filled(cw, ch, 1.0), &spec, width, height)?;
        for (c, &v) in counts.data_mut().iter_mut().zip(valid.data()) {
            *c += v as usize;
        }
    }
    Ok(counts)
}
