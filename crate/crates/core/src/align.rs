//! Registration of collected ink prints onto the tread photo: regularized
//! thin-plate splines, warping, and majority thresholding of the average.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::imaging::sample_bilinear;
use crate::{Error, GrayGrid, Grid, PrintMask, Result};

pub const DEFAULT_SMOOTHNESS: f64 = 0.5;
pub const DEFAULT_THRESHOLD: f64 = 0.5;
/// Systems with a larger condition estimate are rejected.
pub const MAX_CONDITION: f64 = 1e14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correspondence {
    pub src_x: f64,
    pub src_y: f64,
    pub dst_x: f64,
    pub dst_y: f64,
}

impl Correspondence {
    pub fn new(src: [f64; 2], dst: [f64; 2]) -> Self {
        Correspondence {
            src_x: src[0],
            src_y: src[1],
            dst_x: dst[0],
            dst_y: dst[1],
        }
    }

    pub fn src(&self) -> [f64; 2] {
        [self.src_x, self.src_y]
    }

    pub fn dst(&self) -> [f64; 2] {
        [self.dst_x, self.dst_y]
    }

    pub fn reversed(&self) -> Self {
        Correspondence::new(self.dst(), self.src())
    }
}

/// `U(r) = r^2 log r^2`, with `U(0) = 0`.
pub fn tps_kernel(r2: f64) -> f64 {
    if r2 > 0.0 {
        r2 * r2.ln()
    } else {
        0.0
    }
}

/// Smooth map of the plane: an affine part plus radial kernel terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TpsWarp {
    /// `out_k = a[k][0] + a[k][1] x + a[k][2] y` before the kernel terms.
    pub affine: [[f64; 3]; 2],
    pub weights: Vec<[f64; 2]>,
    pub controls: Vec<[f64; 2]>,
    pub lambda: f64,
}

impl TpsWarp {
    pub fn apply(&self, p: [f64; 2]) -> [f64; 2] {
        let mut out = [0.0; 2];
        for k in 0..2 {
            let a = &self.affine[k];
            out[k] = a[0] + a[1] * p[0] + a[2] * p[1];
        }
        for (c, w) in self.controls.iter().zip(&self.weights) {
            let u = tps_kernel((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2));
            out[0] += w[0] * u;
            out[1] += w[1] * u;
        }
        out
    }

    /// Largest violation of `sum w = 0`, `sum w x = 0`, `sum w y = 0`.
    pub fn side_condition_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..2 {
            let mut s = [0.0; 3];
            for (c, w) in self.controls.iter().zip(&self.weights) {
                s[0] += w[k];
                s[1] += w[k] * c[0];
                s[2] += w[k] * c[1];
            }
            worst = s.iter().fold(worst, |m, v| m.max(v.abs()));
        }
        worst
    }
}

fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

/// Fits the regularized thin-plate spline taking every `src` near its `dst`.
///
/// Solves `[K + lambda I, P; P^T, 0] [w; a] = [v; 0]` per output coordinate
/// for the displacement `v = dst - src`, so coincident points give an exact
/// identity map.
pub fn fit_tps(corr: &[Correspondence], lambda: f64) -> Result<TpsWarp> {
    let n = corr.len();
    if n < 3 {
        return Err(Error::arg(format!("thin-plate spline needs at least 3 correspondences, got {n}")));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::arg(format!("smoothness must be finite and >= 0, got {lambda}")));
    }
    if corr.iter().any(|c| ![c.src_x, c.src_y, c.dst_x, c.dst_y].iter().all(|v| v.is_finite())) {
        return Err(Error::data("correspondences must be finite"));
    }

    // collinearity from the spread of the centred source points
    let (mx, my) = corr.iter().fold((0.0, 0.0), |(a, b), c| (a + c.src_x / n as f64, b + c.src_y / n as f64));
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for c in corr {
        let (dx, dy) = (c.src_x - mx, c.src_y - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let tr = sxx + syy;
    let det = sxx * syy - sxy * sxy;
    let disc = ((sxx - syy).powi(2) + 4.0 * sxy * sxy).sqrt();
    let (lmax, lmin) = ((tr + disc) / 2.0, (det / ((tr + disc) / 2.0)).max(0.0));
    if !(lmax > 0.0) || lmin <= lmax * 1e-12 {
        let condition = if lmin > 0.0 { lmax / lmin } else { f64::INFINITY };
        return Err(Error::Numerical {
            message: "control points are collinear".into(),
            condition,
        });
    }

    let size = n + 3;
    let mut a = DMatrix::<f64>::zeros(size, size);
    for i in 0..n {
        for j in 0..n {
            let (ci, cj) = (corr[i].src(), corr[j].src());
            a[(i, j)] = tps_kernel((ci[0] - cj[0]).powi(2) + (ci[1] - cj[1]).powi(2));
        }
        a[(i, i)] += lambda;
        let p = [1.0, corr[i].src_x, corr[i].src_y];
        for k in 0..3 {
            a[(i, n + k)] = p[k];
            a[(n + k, i)] = p[k];
        }
    }
    let condition = condition_number(&a);
    if !(condition < MAX_CONDITION) {
        return Err(Error::Numerical {
            message: "thin-plate spline system is ill-conditioned".into(),
            condition,
        });
    }
    let lu = a.lu();
    let mut coef = Vec::with_capacity(2);
    for k in 0..2 {
        let rhs = DVector::from_fn(size, |i, _| if i < n { corr[i].dst()[k] - corr[i].src()[k] } else { 0.0 });
        let sol = lu.solve(&rhs).ok_or(Error::Numerical {
            message: "thin-plate spline system is singular".into(),
            condition,
        })?;
        coef.push(sol);
    }
    Ok(TpsWarp {
        affine: [
            [coef[0][n], 1.0 + coef[0][n + 1], coef[0][n + 2]],
            [coef[1][n], coef[1][n + 1], 1.0 + coef[1][n + 2]],
        ],
        weights: (0..n).map(|i| [coef[0][i], coef[1][i]]).collect(),
        controls: corr.iter().map(Correspondence::src).collect(),
        lambda,
    })
}

/// Output pixel `q` takes `img` at `warp.apply(q)`, bilinearly; positions
/// outside `img` read 0 (no ink).
pub fn warp_image(img: &GrayGrid, warp: &TpsWarp, width: usize, height: usize) -> GrayGrid {
    let mut out = vec![0.0; width * height];
    out.par_chunks_mut(width.max(1)).enumerate().for_each(|(y, row)| {
        for (x, v) in row.iter_mut().enumerate() {
            let p = warp.apply([x as f64, y as f64]);
            *v = sample_bilinear(img, p[0], p[1]).unwrap_or(0.0);
        }
    });
    Grid::from_vec(width, height, out).expect("sized buffer")
}

/// Brings a print into the photo frame given `print -> photo` correspondences.
pub fn align_print(print: &GrayGrid, corr: &[Correspondence], lambda: f64, width: usize, height: usize) -> Result<GrayGrid> {
    let inverse: Vec<Correspondence> = corr.iter().map(Correspondence::reversed).collect();
    let warp = fit_tps(&inverse, lambda)?;
    Ok(warp_image(print, &warp, width, height))
}

/// Pixels whose mean ink over the aligned prints is at least `theta`.
pub fn average_and_threshold(prints: &[GrayGrid], theta: f64) -> Result<PrintMask> {
    if prints.len() < 2 {
        return Err(Error::arg(format!("need at least 2 aligned prints, got {}", prints.len())));
    }
    for p in &prints[1..] {
        prints[0].check_same_dims(p, "average_and_threshold")?;
    }
    let n = prints.len() as f64;
    let mut vals = vec![0.0; prints.len()];
    Ok(Grid::from_fn(prints[0].width(), prints[0].height(), |x, y| {
        for (v, p) in vals.iter_mut().zip(prints) {
            *v = *p.get(x, y);
        }
        // sorted summation keeps the mean independent of print order
        vals.sort_by(f64::total_cmp);
        vals.iter().sum::<f64>() / n >= theta
    }))
}
