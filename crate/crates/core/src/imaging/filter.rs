use crate::{DepthGrid, Error, GrayGrid, RegionMask, Result};

/// Normalized 1-D Gaussian taps, truncated at `ceil(3 sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil().max(1.0) as isize;
    let denom = 2.0 * sigma * sigma;
    let taps: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / denom).exp())
        .collect();
    let total: f64 = taps.iter().sum();
    taps.into_iter().map(|t| t / total).collect()
}

/// Separable Gaussian blur with replicated borders. `sigma == 0` is the identity.
pub fn gaussian_blur(img: &GrayGrid, sigma: f64) -> Result<GrayGrid> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::arg(format!("gaussian_blur: sigma must be >= 0, got {sigma}")));
    }
    if sigma == 0.0 || img.is_empty() {
        return Ok(img.clone());
    }
    let kernel = gaussian_kernel(sigma);
    let r = (kernel.len() / 2) as isize;
    let (w, h) = img.dims();
    let clamp = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;

    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        let row = &img.data()[y * w..(y + 1) * w];
        for x in 0..w {
            let mut acc = 0.0;
            for (k, &t) in kernel.iter().enumerate() {
                acc += t * row[clamp(x as isize + k as isize - r, w)];
            }
            tmp[y * w + x] = acc;
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, &t) in kernel.iter().enumerate() {
                acc += t * tmp[clamp(y as isize + k as isize - r, h) * w + x];
            }
            out[y * w + x] = acc;
        }
    }
    GrayGrid::from_vec(w, h, out)
}

/// Sum over a `window`x`window` square centred on each pixel, zero padded.
/// Each output is a direct sum (rows first, then columns) so constant
/// inputs produce exact multiples.
pub fn box_sum(img: &GrayGrid, window: usize) -> Result<GrayGrid> {
    if window == 0 || window.is_multiple_of(2) {
        return Err(Error::arg(format!("box window must be odd and >= 1, got {window}")));
    }
    let r = window / 2;
    let (w, h) = img.dims();
    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        let row = &img.data()[y * w..(y + 1) * w];
        for x in 0..w {
            let lo = x.saturating_sub(r);
            let hi = (x + r).min(w.saturating_sub(1));
            tmp[y * w + x] = row[lo..=hi].iter().sum();
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        let lo = y.saturating_sub(r);
        let hi = (y + r).min(h.saturating_sub(1));
        for x in 0..w {
            let mut acc = 0.0;
            for yy in lo..=hi {
                acc += tmp[yy * w + x];
            }
            out[y * w + x] = acc;
        }
    }
    GrayGrid::from_vec(w, h, out)
}

/// Mask-normalized local mean depth `d_l = box(depth * mask) / box(mask)`.
///
/// Values outside the mask are ignored. Pixels whose window holds no masked
/// pixel get 0. Sums are taken relative to the smallest masked value, which
/// leaves the result mathematically unchanged but makes constant regions
/// reproduce their value exactly and keeps the result independent of scan
/// order.
pub fn local_mean_depth(depth: &DepthGrid, mask: &RegionMask, window: usize) -> Result<GrayGrid> {
    depth.check_same_dims(mask, "local_mean_depth")?;
    if window == 0 || window.is_multiple_of(2) {
        return Err(Error::arg(format!("window must be odd and >= 1, got {window}")));
    }
    let reference = depth
        .data()
        .iter()
        .zip(mask.data())
        .filter(|(_, &m)| m)
        .map(|(&d, _)| d)
        .reduce(f64::min)
        .unwrap_or(0.0);
    let deviations = GrayGrid::from_vec(
        depth.width(),
        depth.height(),
        depth
            .data()
            .iter()
            .zip(mask.data())
            .map(|(&d, &m)| if m { d - reference } else { 0.0 })
            .collect(),
    )?;
    let weights = mask.map(|&m| if m { 1.0 } else { 0.0 });
    let num = box_sum(&deviations, window)?;
    let den = box_sum(&weights, window)?;
    GrayGrid::from_vec(
        depth.width(),
        depth.height(),
        num.data()
            .iter()
            .zip(den.data())
            .map(|(&n, &c)| if c > 0.0 { reference + n / c } else { 0.0 })
            .collect(),
    )
}
