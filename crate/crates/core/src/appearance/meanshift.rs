use std::cmp::Ordering;
use std::collections::HashMap;

use rayon::prelude::*;

use crate::{Error, Result};

pub const MAX_ITERATIONS: usize = 100;
pub const SHIFT_TOLERANCE: f64 = 1e-4;

/// Modes found by [`mean_shift`] and the mode index of every input point.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanShift<const N: usize> {
    /// Sorted by descending support, ties by coordinates.
    pub modes: Vec<[f64; N]>,
    pub support: Vec<usize>,
    pub assignment: Vec<usize>,
}

fn lex_cmp<const N: usize>(a: &[f64; N], b: &[f64; N]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

fn dist2<const N: usize>(a: &[f64; N], b: &[f64; N]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

struct CellIndex<const N: usize> {
    bandwidth: f64,
    cells: HashMap<[i64; N], Vec<usize>>,
}

impl<const N: usize> CellIndex<N> {
    fn cell(&self, p: &[f64; N]) -> [i64; N] {
        p.map(|v| (v / self.bandwidth).floor() as i64)
    }

    fn new(points: &[[f64; N]], bandwidth: f64) -> Self {
        let mut index = CellIndex {
            bandwidth,
            cells: HashMap::new(),
        };
        for (i, p) in points.iter().enumerate() {
            let c = index.cell(p);
            index.cells.entry(c).or_default().push(i);
        }
        index
    }

    /// Calls `f` for every indexed point within `bandwidth` of `y`, in index order per cell.
    fn for_neighbors(&self, points: &[[f64; N]], y: &[f64; N], mut f: impl FnMut(usize)) {
        let base = self.cell(y);
        let r2 = self.bandwidth * self.bandwidth;
        let mut offset = [-1i64; N];
        loop {
            let mut key = base;
            for d in 0..N {
                key[d] += offset[d];
            }
            if let Some(ids) = self.cells.get(&key) {
                for &i in ids {
                    if dist2(&points[i], y) <= r2 {
                        f(i);
                    }
                }
            }
            // odometer over {-1, 0, 1}^N
            let mut d = 0;
            while d < N {
                offset[d] += 1;
                if offset[d] <= 1 {
                    break;
                }
                offset[d] = -1;
                d += 1;
            }
            if d == N {
                return;
            }
        }
    }
}

/// Flat-kernel mean shift.
///
/// Every point climbs to the mean of the points within `bandwidth` of its
/// current position until the step is below 1e-4 or 100 iterations pass.
/// Converged positions closer than `bandwidth / 2` to an existing mode join
/// it. The result depends only on the multiset of points, so permuting the
/// input permutes `assignment` and nothing else.
pub fn mean_shift<const N: usize>(points: &[[f64; N]], bandwidth: f64) -> Result<MeanShift<N>> {
    if points.is_empty() {
        return Err(Error::arg("mean shift needs at least one point"));
    }
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(Error::arg(format!("bandwidth must be positive and finite, got {bandwidth}")));
    }
    if points.iter().any(|p| p.iter().any(|v| !v.is_finite())) {
        return Err(Error::arg("mean shift points must be finite"));
    }

    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| lex_cmp(&points[a], &points[b]));
    let mut unique: Vec<[f64; N]> = Vec::new();
    let mut weight: Vec<usize> = Vec::new();
    let mut unique_of = vec![0usize; points.len()];
    for &i in &order {
        if unique.last().is_none_or(|u| lex_cmp(u, &points[i]) != Ordering::Equal) {
            unique.push(points[i]);
            weight.push(0);
        }
        *weight.last_mut().unwrap() += 1;
        unique_of[i] = unique.len() - 1;
    }

    let index = CellIndex::new(&unique, bandwidth);
    let converged: Vec<[f64; N]> = unique
        .par_iter()
        .map(|start| {
            let mut y = *start;
            for _ in 0..MAX_ITERATIONS {
                // mean as offset from the first neighbour, exact for identical points
                let mut anchor: Option<[f64; N]> = None;
                let mut acc = [0.0; N];
                let mut total = 0usize;
                index.for_neighbors(&unique, &y, |j| {
                    let a = *anchor.get_or_insert(unique[j]);
                    for d in 0..N {
                        acc[d] += weight[j] as f64 * (unique[j][d] - a[d]);
                    }
                    total += weight[j];
                });
                let Some(a) = anchor else { break };
                let mut next = a;
                for d in 0..N {
                    next[d] += acc[d] / total as f64;
                }
                let shift = dist2(&next, &y).sqrt();
                y = next;
                if shift < SHIFT_TOLERANCE {
                    break;
                }
            }
            y
        })
        .collect();

    let merge2 = (bandwidth / 2.0) * (bandwidth / 2.0);
    let mut mode_sum: Vec<[f64; N]> = Vec::new();
    let mut mode_rep: Vec<[f64; N]> = Vec::new();
    let mut support: Vec<usize> = Vec::new();
    let mut mode_of_unique = Vec::with_capacity(unique.len());
    for (u, y) in converged.iter().enumerate() {
        let hit = mode_rep.iter().position(|m| dist2(m, y) < merge2);
        let m = match hit {
            Some(m) => m,
            None => {
                mode_rep.push(*y);
                mode_sum.push([0.0; N]);
                support.push(0);
                mode_rep.len() - 1
            }
        };
        for d in 0..N {
            mode_sum[m][d] += weight[u] as f64 * (y[d] - mode_rep[m][d]);
        }
        support[m] += weight[u];
        mode_of_unique.push(m);
    }
    let modes: Vec<[f64; N]> = mode_rep
        .iter()
        .zip(&mode_sum)
        .zip(&support)
        .map(|((r, s), &n)| {
            let mut m = *r;
            for d in 0..N {
                m[d] += s[d] / n as f64;
            }
            m
        })
        .collect();

    let mut rank: Vec<usize> = (0..modes.len()).collect();
    rank.sort_by(|&a, &b| support[b].cmp(&support[a]).then_with(|| lex_cmp(&modes[a], &modes[b])));
    let mut new_id = vec![0usize; modes.len()];
    for (new, &old) in rank.iter().enumerate() {
        new_id[old] = new;
    }
    Ok(MeanShift {
        modes: rank.iter().map(|&m| modes[m]).collect(),
        support: rank.iter().map(|&m| support[m]).collect(),
        assignment: unique_of.iter().map(|&u| new_id[mode_of_unique[u]]).collect(),
    })
}
