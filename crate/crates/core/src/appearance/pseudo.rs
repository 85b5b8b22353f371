use serde::{Deserialize, Serialize};

use super::albedo::{AlbedoMap, SegmentMap};
use super::color::srgb_to_lab;
use super::meanshift::mean_shift;
use crate::imaging::{label_regions, resize_bilinear, UNLABELED};
use crate::{Error, GrayGrid, Grid, RegionMask, Result, RgbGrid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PseudoAlbedoConfig {
    /// Weight of L* relative to a* and b*.
    pub l_scale: f64,
    pub work_width: usize,
    pub work_height: usize,
    /// Mean-shift bandwidth in scaled LAB units.
    pub bandwidth: f64,
    /// Segments smaller than this (working-resolution px) may merge.
    pub min_segment: usize,
    /// Largest scaled-LAB distance between merged segment means.
    pub merge_tau: f64,
    pub max_iterations: usize,
}

impl Default for PseudoAlbedoConfig {
    fn default() -> Self {
        PseudoAlbedoConfig {
            l_scale: 0.15,
            work_width: 67,
            work_height: 150,
            bandwidth: 10.0,
            min_segment: 20,
            merge_tau: 8.0,
            max_iterations: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PseudoAlbedo {
    /// Segment mean colour inside the mask, black outside.
    pub albedo: AlbedoMap,
    pub segments: SegmentMap,
    /// Refinement passes run, at most `max_iterations`.
    pub iterations: usize,
}

/// Mean of `items` computed as offsets from the first, exact when all are equal.
fn mean3<'a>(items: impl Iterator<Item = &'a [f64; 3]>) -> Option<[f64; 3]> {
    let mut anchor: Option<[f64; 3]> = None;
    let mut acc = [0.0; 3];
    let mut n = 0usize;
    for v in items {
        let a = *anchor.get_or_insert(*v);
        for d in 0..3 {
            acc[d] += v[d] - a[d];
        }
        n += 1;
    }
    anchor.map(|a| [a[0] + acc[0] / n as f64, a[1] + acc[1] / n as f64, a[2] + acc[2] / n as f64])
}

fn dist2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (0..3).map(|d| (a[d] - b[d]) * (a[d] - b[d])).sum()
}

fn segment_means(labels: &Grid<u32>, values: &Grid<[f64; 3]>, n: usize) -> Vec<[f64; 3]> {
    let mut members: Vec<Vec<[f64; 3]>> = vec![Vec::new(); n];
    for (&l, v) in labels.data().iter().zip(values.data()) {
        if l != UNLABELED {
            members[l as usize].push(*v);
        }
    }
    members.iter().map(|m| mean3(m.iter()).unwrap_or([0.0; 3])).collect()
}

/// Renumbers labels `0..k` in order of first appearance; returns `k`.
fn compact(labels: &mut Grid<u32>) -> usize {
    let mut map = std::collections::HashMap::new();
    for l in labels.data_mut() {
        if *l != UNLABELED {
            let next = map.len() as u32;
            *l = *map.entry(*l).or_insert(next);
        }
    }
    map.len()
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// One merge pass: every small segment joins its closest adjacent segment
/// whose mean lies within `tau`. Returns whether anything merged.
fn merge_small(labels: &mut Grid<u32>, lab: &Grid<[f64; 3]>, n: usize, cfg: &PseudoAlbedoConfig) -> bool {
    let means = segment_means(labels, lab, n);
    let sizes = super::albedo::segment_areas(labels, n);
    let (w, h) = labels.dims();
    let mut adjacent: Vec<Vec<u32>> = vec![Vec::new(); n];
    for y in 0..h {
        for x in 0..w {
            let a = *labels.get(x, y);
            if a == UNLABELED {
                continue;
            }
            for (nx, ny) in [(x + 1, y), (x, y + 1)] {
                if nx < w && ny < h {
                    let b = *labels.get(nx, ny);
                    if b != UNLABELED && b != a {
                        adjacent[a as usize].push(b);
                        adjacent[b as usize].push(a);
                    }
                }
            }
        }
    }
    let tau2 = cfg.merge_tau * cfg.merge_tau;
    let mut parent: Vec<usize> = (0..n).collect();
    let mut changed = false;
    for s in 0..n {
        if sizes[s] >= cfg.min_segment {
            continue;
        }
        let mut best: Option<(f64, u32)> = None;
        for &t in &adjacent[s] {
            let d = dist2(&means[s], &means[t as usize]);
            if d <= tau2 && best.is_none_or(|(bd, bt)| d < bd || (d == bd && t < bt)) {
                best = Some((d, t));
            }
        }
        if let Some((_, t)) = best {
            let (rs, rt) = (find(&mut parent, s), find(&mut parent, t as usize));
            if rs != rt {
                parent[rs.max(rt)] = rs.min(rt);
                changed = true;
            }
        }
    }
    if changed {
        for l in labels.data_mut() {
            if *l != UNLABELED {
                *l = find(&mut parent, *l as usize) as u32;
            }
        }
    }
    changed
}

/// Piecewise-constant albedo estimate of a real tread photo.
///
/// Pixels are clustered by mean shift in LAB with L* down-weighted, at a
/// fixed working resolution. Connected clusters form segments; small ones
/// merge into similar neighbours until nothing changes or the pass limit is
/// hit. Labels are brought back to full resolution by nearest neighbour,
/// each pixel snapping to the closest-coloured label in the surrounding 3x3
/// working cells, and every segment is painted with its mean input colour.
pub fn pseudo_albedo(img: &RgbGrid, mask: &RegionMask, cfg: &PseudoAlbedoConfig) -> Result<PseudoAlbedo> {
    img.check_same_dims(mask, "pseudo_albedo")?;
    if !mask.any() {
        return Err(Error::data("pseudo-albedo mask is empty"));
    }
    if cfg.work_width == 0 || cfg.work_height == 0 {
        return Err(Error::arg("working resolution must be non-zero"));
    }
    let (w, h) = img.dims();
    let (lw, lh) = (cfg.work_width, cfg.work_height);
    let lab = img.map(|&p| {
        let v = srgb_to_lab(p);
        [v[0] * cfg.l_scale, v[1], v[2]]
    });

    // mask-normalized downsizing
    let m = mask.map(|&b| if b { 1.0 } else { 0.0 });
    let small_m = resize_bilinear(&m, lw, lh)?;
    let mut small_c = Vec::with_capacity(3);
    for d in 0..3 {
        let ch: GrayGrid = Grid::from_vec(w, h, lab.data().iter().zip(mask.data()).map(|(v, &b)| if b { v[d] } else { 0.0 }).collect())?;
        small_c.push(resize_bilinear(&ch, lw, lh)?);
    }
    let small_mask = small_m.map(|&v| v >= 0.5);
    let small_lab = Grid::from_fn(lw, lh, |x, y| {
        let wgt = *small_m.get(x, y);
        if wgt > 0.0 {
            [0, 1, 2].map(|d| small_c[d].get(x, y) / wgt)
        } else {
            [0.0; 3]
        }
    });

    let mut labels = Grid::filled(lw, lh, UNLABELED);
    let mut n = 0;
    if small_mask.any() {
        let points: Vec<[f64; 3]> = small_lab.data().iter().zip(small_mask.data()).filter(|(_, &b)| b).map(|(p, _)| *p).collect();
        let ms = mean_shift(&points, cfg.bandwidth)?;
        let mut modes = Grid::filled(lw, lh, usize::MAX);
        let mut it = ms.assignment.iter();
        for (v, &b) in modes.data_mut().iter_mut().zip(small_mask.data()) {
            if b {
                *v = *it.next().unwrap();
            }
        }
        let (l, count) = label_regions(&modes, &small_mask);
        labels = l;
        n = count;
    }

    let mut iterations = 0;
    while iterations < cfg.max_iterations && n > 0 {
        iterations += 1;
        if !merge_small(&mut labels, &small_lab, n, cfg) {
            break;
        }
        n = compact(&mut labels);
    }
    debug_assert!(iterations <= cfg.max_iterations);

    let small_means = segment_means(&labels, &small_lab, n);
    let mut full = Grid::filled(w, h, UNLABELED);
    for y in 0..h {
        for x in 0..w {
            if !*mask.get(x, y) {
                continue;
            }
            let cx = ((x * lw) / w).min(lw - 1);
            let cy = ((y * lh) / h).min(lh - 1);
            let px = lab.get(x, y);
            let mut best: Option<(f64, u32)> = None;
            let mut radius = 1usize;
            while best.is_none() && radius <= lw.max(lh) {
                let (x0, x1) = (cx.saturating_sub(radius), (cx + radius).min(lw - 1));
                let (y0, y1) = (cy.saturating_sub(radius), (cy + radius).min(lh - 1));
                for yy in y0..=y1 {
                    for xx in x0..=x1 {
                        let l = *labels.get(xx, yy);
                        if l == UNLABELED {
                            continue;
                        }
                        let d = dist2(px, &small_means[l as usize]);
                        if best.is_none_or(|(bd, bl)| d < bd || (d == bd && l < bl)) {
                            best = Some((d, l));
                        }
                    }
                }
                radius *= 2;
            }
            // an empty working mask leaves one segment for the whole tread
            full.set(x, y, best.map_or(0, |(_, l)| l));
        }
    }
    let count = compact(&mut full);
    let colors = segment_means(&full, img, count);
    let segments = SegmentMap { labels: full, colors };
    Ok(PseudoAlbedo {
        albedo: segments.to_albedo([0.0; 3]),
        segments,
        iterations,
    })
}
