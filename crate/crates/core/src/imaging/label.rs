use std::collections::VecDeque;

use crate::{Grid, RegionMask};

/// Label assigned to pixels outside the labelling mask.
pub const UNLABELED: u32 = u32::MAX;

/// 4-connected regions of equal value inside `mask`, numbered in raster order
/// of their first pixel. Returns the label grid and the number of regions.
pub fn label_regions<T: PartialEq>(values: &Grid<T>, mask: &RegionMask) -> (Grid<u32>, usize) {
    let (w, h) = values.dims();
    let mut labels = Grid::filled(w, h, UNLABELED);
    let mut next = 0u32;
    let mut queue = VecDeque::new();
    for start in 0..values.len() {
        if !mask.data()[start] || labels.data()[start] != UNLABELED {
            continue;
        }
        labels.data_mut()[start] = next;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            let (x, y) = (i % w, i / w);
            let mut visit = |j: usize| {
                if mask.data()[j] && labels.data()[j] == UNLABELED && values.data()[j] == values.data()[i] {
                    labels.data_mut()[j] = next;
                    queue.push_back(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < w {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - w);
            }
            if y + 1 < h {
                visit(i + w);
            }
        }
        next += 1;
    }
    (labels, next as usize)
}

/// Sets every `false` pixel not 4-connected to the canvas border to `true`.
pub fn fill_holes(mask: &RegionMask) -> RegionMask {
    let (w, h) = mask.dims();
    let mut outside = Grid::filled(w, h, false);
    let mut queue = VecDeque::new();
    for y in 0..h {
        for x in 0..w {
            if (x == 0 || y == 0 || x + 1 == w || y + 1 == h) && !mask.get(x, y) {
                outside.set(x, y, true);
                queue.push_back(y * w + x);
            }
        }
    }
    while let Some(i) = queue.pop_front() {
        let (x, y) = (i % w, i / w);
        let neighbours = [
            (x > 0).then(|| i - 1),
            (x + 1 < w).then(|| i + 1),
            (y > 0).then(|| i - w),
            (y + 1 < h).then(|| i + w),
        ];
        for j in neighbours.into_iter().flatten() {
            if !mask.data()[j] && !outside.data()[j] {
                outside.data_mut()[j] = true;
                queue.push_back(j);
            }
        }
    }
    outside.not()
}
