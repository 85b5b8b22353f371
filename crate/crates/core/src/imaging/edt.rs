use crate::{GrayGrid, RegionMask};

const FAR: f64 = 1e20;

/// Exact Euclidean distance from every pixel to the nearest `false` pixel.
///
/// Two passes of the lower-envelope-of-parabolas squared distance transform
/// (rows, then columns), so distances are exact square roots of integers.
/// A mask without any `false` pixel yields `max(width, height)` everywhere.
pub fn euclidean_distance_transform(fg: &RegionMask) -> GrayGrid {
    let (w, h) = fg.dims();
    if !fg.data().iter().any(|&b| !b) {
        return GrayGrid::filled(w, h, w.max(h) as f64);
    }
    let mut sq: Vec<f64> = fg.data().iter().map(|&b| if b { FAR } else { 0.0 }).collect();

    let n = w.max(h);
    let mut f = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut v = vec![0usize; n];
    let mut z = vec![0.0; n + 1];

    for y in 0..h {
        f[..w].copy_from_slice(&sq[y * w..(y + 1) * w]);
        squared_dt_1d(&f[..w], &mut d[..w], &mut v, &mut z);
        sq[y * w..(y + 1) * w].copy_from_slice(&d[..w]);
    }
    for x in 0..w {
        for y in 0..h {
            f[y] = sq[y * w + x];
        }
        squared_dt_1d(&f[..h], &mut d[..h], &mut v, &mut z);
        for y in 0..h {
            sq[y * w + x] = d[y];
        }
    }
    GrayGrid::from_vec(w, h, sq.into_iter().map(f64::sqrt).collect())
        .expect("dimensions preserved")
}

fn squared_dt_1d(f: &[f64], d: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    if n == 0 {
        return;
    }
    let intersect = |q: usize, p: usize| {
        ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64))
    };
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        let mut s = intersect(q, v[k]);
        while s <= z[k] {
            k -= 1;
            s = intersect(q, v[k]);
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    k = 0;
    for (q, out) in d.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let dq = q as f64 - p as f64;
        *out = dq * dq + f[p];
    }
}
