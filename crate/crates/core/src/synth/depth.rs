use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mask::{mask_from_print, HueBand};
use crate::imaging::{euclidean_distance_transform, gaussian_blur, SortedSample};
use crate::{DepthGrid, Error, GrayGrid, RegionMask, Result, RgbGrid};

pub const MIN_VARIANTS: usize = 10;
pub const MAX_VARIANTS: usize = 15;

/// Parameters of one synthetic depth map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthDepthConfig {
    /// Denoising blur, px. Also the high-pass scale of the texture.
    pub blur_sigma: f64,
    pub sigmoid_gain: f64,
    pub sigmoid_center: f64,
    pub texture_amp: f64,
    /// Bevel ramp width in px; 0 disables bevels.
    pub bevel_width: usize,
    pub local_curv_amp: f64,
    /// Smoothing of the squared distance field, px.
    pub local_curv_sigma: f64,
    pub global_curv_amp: f64,
    pub global_curv_width: f64,
    /// Depth of the groove floor below the contact surface before curvature.
    pub relief: f64,
    pub rng_seed: u64,
}

impl Default for SynthDepthConfig {
    fn default() -> Self {
        SynthDepthConfig {
            blur_sigma: 2.0,
            sigmoid_gain: 10.0,
            sigmoid_center: 0.5,
            texture_amp: 0.15,
            bevel_width: 3,
            local_curv_amp: 0.2,
            local_curv_sigma: 5.0,
            global_curv_amp: 0.3,
            global_curv_width: 40.0,
            relief: 0.5,
            rng_seed: 0,
        }
    }
}

impl SynthDepthConfig {
    pub fn validate(&self) -> Result<()> {
        let amps = [
            ("blur_sigma", self.blur_sigma),
            ("texture_amp", self.texture_amp),
            ("local_curv_amp", self.local_curv_amp),
            ("local_curv_sigma", self.local_curv_sigma),
            ("global_curv_amp", self.global_curv_amp),
            ("global_curv_width", self.global_curv_width),
            ("relief", self.relief),
        ];
        for (name, v) in amps {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::arg(format!("{name} must be a finite value >= 0, got {v}")));
            }
        }
        if !(self.relief > 0.0 && self.relief <= 1.0) {
            return Err(Error::arg(format!("relief must lie in (0, 1], got {}", self.relief)));
        }
        Ok(())
    }
}

/// Closed interval a per-variant value is drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range(pub f64, pub f64);

impl Range {
    fn sample(&self, rng: &mut impl Rng) -> f64 {
        if self.1 > self.0 {
            rng.gen_range(self.0..=self.1)
        } else {
            self.0
        }
    }
}

/// Per-variant randomization ranges used by [`synth_variants`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthRanges {
    pub blur_sigma: Range,
    pub sigmoid_gain: Range,
    pub sigmoid_center: Range,
    pub texture_amp: Range,
    /// Probability that a variant gets bevels at all.
    pub bevel_probability: f64,
    pub bevel_width: (usize, usize),
    pub local_curv_amp: Range,
    pub local_curv_sigma: Range,
    pub global_curv_amp: Range,
    pub global_curv_width: Range,
    pub relief: Range,
    pub hue: HueBand,
}

impl Default for SynthRanges {
    fn default() -> Self {
        SynthRanges {
            blur_sigma: Range(1.5, 2.5),
            sigmoid_gain: Range(8.0, 12.0),
            sigmoid_center: Range(0.45, 0.55),
            texture_amp: Range(0.05, 0.25),
            bevel_probability: 0.7,
            bevel_width: (2, 6),
            local_curv_amp: Range(0.1, 0.3),
            local_curv_sigma: Range(4.0, 6.0),
            global_curv_amp: Range(0.15, 0.4),
            global_curv_width: Range(30.0, 50.0),
            relief: Range(0.4, 0.6),
            hue: HueBand::default(),
        }
    }
}

impl SynthRanges {
    pub fn draw(&self, rng: &mut impl Rng, rng_seed: u64) -> SynthDepthConfig {
        let bevel = rng.gen_bool(self.bevel_probability.clamp(0.0, 1.0));
        let (lo, hi) = self.bevel_width;
        let width = rng.gen_range(lo.min(hi)..=hi.max(lo));
        SynthDepthConfig {
            blur_sigma: self.blur_sigma.sample(rng),
            sigmoid_gain: self.sigmoid_gain.sample(rng),
            sigmoid_center: self.sigmoid_center.sample(rng),
            texture_amp: self.texture_amp.sample(rng),
            bevel_width: if bevel { width } else { 0 },
            local_curv_amp: self.local_curv_amp.sample(rng),
            local_curv_sigma: self.local_curv_sigma.sample(rng),
            global_curv_amp: self.global_curv_amp.sample(rng),
            global_curv_width: self.global_curv_width.sample(rng),
            relief: self.relief.sample(rng),
            rng_seed,
        }
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Luma of a scanned print stretched so that ink is ~0 and blank background ~1
/// (1st and 99th masked percentiles map to 0 and 1).
pub fn print_to_gray(print: &RgbGrid, mask: &RegionMask) -> Result<GrayGrid> {
    let luma = print.luma();
    let sample = SortedSample::new(&luma, mask)?;
    let lo = sample.percentile(1.0)?;
    let hi = sample.percentile(99.0)?;
    let span = hi - lo;
    Ok(luma.map(|&v| {
        if span > 0.0 {
            ((v - lo) / span).clamp(0.0, 1.0)
        } else {
            1.0
        }
    }))
}

/// `sigmoid(k (blur(print) - x0))`, with pixels outside the mask set to 1.
pub fn clean_print(print_gray: &GrayGrid, mask: &RegionMask, cfg: &SynthDepthConfig) -> Result<GrayGrid> {
    print_gray.check_same_dims(mask, "clean_print")?;
    let blurred = gaussian_blur(print_gray, cfg.blur_sigma)?;
    let mut out = blurred.map(|&b| sigmoid(cfg.sigmoid_gain * (b - cfg.sigmoid_center)));
    for (v, &m) in out.data_mut().iter_mut().zip(mask.data()) {
        if !m {
            *v = 1.0;
        }
    }
    Ok(out)
}

/// Adds `amp * (print - blur(print, sigma))` and clamps to `[0, 1]`.
pub fn add_texture(depth: &GrayGrid, print_gray: &GrayGrid, amp: f64, sigma: f64) -> Result<GrayGrid> {
    depth.check_same_dims(print_gray, "add_texture")?;
    if amp == 0.0 {
        return Ok(depth.clone());
    }
    let low = gaussian_blur(print_gray, sigma)?;
    let mut out = depth.clone();
    for ((d, &p), &l) in out.data_mut().iter_mut().zip(print_gray.data()).zip(low.data()) {
        *d = (*d + amp * (p - l)).clamp(0.0, 1.0);
    }
    Ok(out)
}

/// Slanted bevels: contact pixels (`depth < contact_below`) within `width` px
/// of a non-contact pixel are raised toward `floor` along a linear ramp,
/// `(width + 1 - e) / (width + 1)` of the way at distance `e`.
pub fn add_bevels(depth: &GrayGrid, width: usize, contact_below: f64, floor: f64) -> GrayGrid {
    if width == 0 {
        return depth.clone();
    }
    let contact = depth.map(|&d| d < contact_below);
    let dist = euclidean_distance_transform(&contact);
    let span = (width + 1) as f64;
    let mut out = depth.clone();
    for ((d, &c), &e) in out.data_mut().iter_mut().zip(contact.data()).zip(dist.data()) {
        if c && e <= width as f64 && floor > *d {
            let f = (span - e) / span;
            *d = (*d + f * (floor - *d)).clamp(0.0, 1.0);
        }
    }
    out
}

/// Local curvature of non-contact surfaces (`depth >= contact_below`): the
/// squared distance to the nearest contact pixel, smoothed with `sigma`,
/// rescaled to peak at `amp`, added and clamped to `[0, 1]`.
pub fn add_local_curvature(depth: &GrayGrid, amp: f64, sigma: f64, contact_below: f64) -> Result<GrayGrid> {
    if amp == 0.0 {
        return Ok(depth.clone());
    }
    let non_contact = depth.map(|&d| d >= contact_below);
    let sq = euclidean_distance_transform(&non_contact).map(|&e| e * e);
    let field = gaussian_blur(&sq, sigma)?;
    let peak = field.data().iter().cloned().fold(0.0, f64::max);
    if peak <= 0.0 {
        return Ok(depth.clone());
    }
    let scale = amp / peak;
    let mut out = depth.clone();
    for (d, &f) in out.data_mut().iter_mut().zip(field.data()) {
        *d = (*d + scale * f).clamp(0.0, 1.0);
    }
    Ok(out)
}

/// Upward curl near the tread edge: adds `amp (1 - min(r / width, 1))^2`
/// where `r` is the distance to the nearest pixel outside `mask`.
pub fn add_global_curvature(depth: &GrayGrid, mask: &RegionMask, amp: f64, width: f64) -> Result<GrayGrid> {
    depth.check_same_dims(mask, "add_global_curvature")?;
    if amp == 0.0 {
        return Ok(depth.clone());
    }
    if !(width > 0.0) {
        return Err(Error::arg(format!("global curvature width must be > 0, got {width}")));
    }
    let r = euclidean_distance_transform(mask);
    let mut out = depth.clone();
    for (d, &e) in out.data_mut().iter_mut().zip(r.data()) {
        let t = 1.0 - (e / width).min(1.0);
        *d = (*d + amp * t * t).clamp(0.0, 1.0);
    }
    Ok(out)
}

/// The full depth pipeline for one configuration. Contact surfaces end near
/// 0, groove floors near `relief`, and everything outside the mask at 1.
pub fn synthesize_depth(print_gray: &GrayGrid, mask: &RegionMask, cfg: &SynthDepthConfig) -> Result<DepthGrid> {
    cfg.validate()?;
    let cleaned = clean_print(print_gray, mask, cfg)?;
    let textured = add_texture(&cleaned, print_gray, cfg.texture_amp, cfg.blur_sigma)?;
    let relief = textured.scaled(cfg.relief);
    let contact_below = cfg.relief * cfg.sigmoid_center;
    let beveled = add_bevels(&relief, cfg.bevel_width, contact_below, cfg.relief);
    let curved = add_local_curvature(&beveled, cfg.local_curv_amp, cfg.local_curv_sigma, contact_below)?;
    let mut depth = add_global_curvature(&curved, mask, cfg.global_curv_amp, cfg.global_curv_width)?;
    for (d, &m) in depth.data_mut().iter_mut().zip(mask.data()) {
        if !m {
            *d = 1.0;
        }
    }
    Ok(depth)
}

/// The random stream for variant `index` of a print, split from `seed`.
pub(crate) fn variant_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64 + 1);
    rng
}

/// `n` depth variants of one scanned print, each with its own configuration
/// drawn from `ranges`. Output is a pure function of `(print, n, seed, ranges)`.
pub fn synth_variants(
    print: &RgbGrid,
    n: usize,
    seed: u64,
    ranges: &SynthRanges,
) -> Result<Vec<(DepthGrid, RegionMask, SynthDepthConfig)>> {
    if !(MIN_VARIANTS..=MAX_VARIANTS).contains(&n) {
        return Err(Error::arg(format!(
            "variant count must lie in [{MIN_VARIANTS}, {MAX_VARIANTS}], got {n}"
        )));
    }
    let mask = mask_from_print(print, &ranges.hue)?;
    synth_variants_with_mask(print, &mask, n, seed, ranges)
}

/// As [`synth_variants`] with a known tread mask.
pub fn synth_variants_with_mask(
    print: &RgbGrid,
    mask: &RegionMask,
    n: usize,
    seed: u64,
    ranges: &SynthRanges,
) -> Result<Vec<(DepthGrid, RegionMask, SynthDepthConfig)>> {
    if !(MIN_VARIANTS..=MAX_VARIANTS).contains(&n) {
        return Err(Error::arg(format!(
            "variant count must lie in [{MIN_VARIANTS}, {MAX_VARIANTS}], got {n}"
        )));
    }
    print.check_same_dims(mask, "synth_variants")?;
    let gray = print_to_gray(print, mask)?;
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = variant_rng(seed, i);
            let cfg = ranges.draw(&mut rng, seed);
            let depth = synthesize_depth(&gray, mask, &cfg)?;
            Ok((depth, mask.clone(), cfg))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Grid;

    fn orange_tread(w: usize, h: usize) -> RgbGrid {
        Grid::from_fn(w, h, |x, y| {
            let inside = x > 4 && x < w - 5 && y > 4 && y < h - 5;
            let block = (x / 6 + y / 6) % 2 == 0;
            if inside && block {
                [0.95, 0.55, 0.15]
            } else {
                [1.0, 1.0, 1.0]
            }
        })
    }

    #[test]
    fn clean_print_constant_half() {
        let g = GrayGrid::filled(9, 9, 0.5);
        let m = Grid::filled(9, 9, true);
        let out = clean_print(&g, &m, &SynthDepthConfig::default()).unwrap();
        assert!(out.data().iter().all(|&v| (v - 0.5).abs() < 1e-12));
    }

    #[test]
    fn clean_print_steep_sigmoid_is_near_binary() {
        let g = Grid::from_fn(40, 20, |x, _| if x < 20 { 0.0 } else { 1.0 });
        let m = Grid::filled(40, 20, true);
        let cfg = SynthDepthConfig {
            sigmoid_gain: 50.0,
            ..SynthDepthConfig::default()
        };
        let out = clean_print(&g, &m, &cfg).unwrap();
        let blurred = gaussian_blur(&g, cfg.blur_sigma).unwrap();
        let mut checked = 0;
        for (o, b) in out.data().iter().zip(blurred.data()) {
            // sigmoid(50 * 0.14) is 1 - 9.1e-4
            if (b - 0.5).abs() >= 0.14 {
                let hard = if *b > 0.5 { 1.0 } else { 0.0 };
                assert!((o - hard).abs() < 1e-3);
                checked += 1;
            }
        }
        assert!(checked > 600);
    }

    #[test]
    fn clean_print_removes_single_pixel_noise() {
        let mut g = GrayGrid::filled(15, 15, 0.0);
        g.set(7, 7, 1.0);
        let m = Grid::filled(15, 15, true);
        let out = clean_print(&g, &m, &SynthDepthConfig::default()).unwrap();
        assert!(*out.get(7, 7) < 0.1);
        // kernel mass on the impulse is about 0.0398; sigmoid(10 * (0.0398 - 0.5)) ~ 0.0099
        assert!((out.get(7, 7) - sigmoid(10.0 * (0.0398 - 0.5))).abs() < 1e-3);
    }

    #[test]
    fn clean_print_background_is_one() {
        let g = GrayGrid::filled(6, 6, 0.0);
        let m = Grid::from_fn(6, 6, |x, _| x < 3);
        let out = clean_print(&g, &m, &SynthDepthConfig::default()).unwrap();
        assert_eq!(*out.get(5, 2), 1.0);
        assert!(*out.get(0, 2) < 0.01);
    }

    #[test]
    fn texture_identities() {
        let d = Grid::from_fn(8, 8, |x, y| ((x + y) % 3) as f64 / 3.0);
        let p = Grid::from_fn(8, 8, |x, _| (x % 2) as f64);
        assert_eq!(add_texture(&d, &p, 0.0, 2.0).unwrap(), d);
        assert_eq!(add_texture(&d, &GrayGrid::filled(8, 8, 0.3), 0.15, 2.0).unwrap(), d.map(|&v| v.clamp(0.0, 1.0)));
    }

    #[test]
    fn checkerboard_texture_amplitude() {
        let p = Grid::from_fn(32, 32, |x, y| ((x + y) % 2) as f64);
        let d = GrayGrid::filled(32, 32, 0.5);
        let out = add_texture(&d, &p, 0.15, 2.0).unwrap();
        // oracle: in the interior the sigma=2 blur of a checkerboard is
        // 0.5 + 0.5 * (sum_k (-1)^k g_k)^2 for the normalized taps g
        let k = crate::imaging::gaussian_kernel(2.0);
        let r = (k.len() / 2) as isize;
        let alt: f64 = k.iter().enumerate().map(|(i, g)| if (i as isize - r) % 2 == 0 { *g } else { -*g }).sum();
        let blur_on_one = 0.5 + 0.5 * alt * alt;
        let expected = 0.5 + 0.15 * (1.0 - blur_on_one);
        let v = out.get(16, 15); // x + y odd -> print value 1
        assert!((v - expected).abs() < 1e-12, "{v} vs {expected}");
    }

    #[test]
    fn bevel_width_zero_is_identity_and_ramp_is_linear() {
        let d = Grid::from_fn(30, 5, |x, _| if (10..20).contains(&x) { 0.0 } else { 0.5 });
        assert_eq!(add_bevels(&d, 0, 0.25, 0.5), d);
        let b = add_bevels(&d, 3, 0.25, 0.5);
        let row: Vec<f64> = (0..30).map(|x| *b.get(x, 2)).collect();
        let expect = |x: usize| -> f64 {
            if !(10..20).contains(&x) {
                return 0.5;
            }
            let e = (x - 9).min(20 - x) as f64;
            if e <= 3.0 {
                0.5 * (4.0 - e) / 4.0
            } else {
                0.0
            }
        };
        for x in 0..30 {
            assert!((row[x] - expect(x)).abs() < 1e-12, "x={x}: {} vs {}", row[x], expect(x));
        }
        assert!(b.data().iter().zip(d.data()).all(|(a, o)| a >= o));
    }

    #[test]
    fn local_curvature_cases() {
        let d = Grid::from_fn(10, 10, |x, y| ((x * y) % 4) as f64 * 0.05);
        assert_eq!(add_local_curvature(&d, 0.0, 5.0, 0.25).unwrap(), d);
        let contact = GrayGrid::filled(10, 10, 0.0);
        assert_eq!(add_local_curvature(&contact, 0.2, 5.0, 0.25).unwrap(), contact);

        let disc = Grid::from_fn(41, 41, |x, y| {
            let (dx, dy) = (x as f64 - 20.0, y as f64 - 20.0);
            if dx * dx + dy * dy <= 144.0 {
                0.5
            } else {
                0.0
            }
        });
        let out = add_local_curvature(&disc, 0.2, 2.0, 0.25).unwrap();
        let added: Vec<f64> = out.data().iter().zip(disc.data()).map(|(a, b)| a - b).collect();
        let (imax, vmax) = added.iter().enumerate().fold((0, f64::MIN), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        let (mx, my) = (imax % 41, imax / 41);
        assert!((mx as i64 - 20).abs() <= 1 && (my as i64 - 20).abs() <= 1, "peak at ({mx}, {my})");
        assert!((vmax - 0.2).abs() < 1e-9);
    }

    #[test]
    fn global_curvature_cases() {
        let d = GrayGrid::filled(40, 40, 0.0);
        let m = Grid::from_fn(40, 40, |x, y| x > 0 && y > 0 && x < 39 && y < 39);
        assert_eq!(add_global_curvature(&d, &m, 0.0, 10.0).unwrap(), d);
        let out = add_global_curvature(&d, &m, 0.3, 10.0).unwrap();
        assert_eq!(*out.get(0, 20), 0.3);
        assert_eq!(*out.get(20, 20), 0.0);
        // distance 5 from the edge: 0.3 * 0.25
        assert!((out.get(5, 20) - 0.075).abs() < 1e-12);
    }

    #[test]
    fn stages_stay_in_unit_interval() {
        let p = Grid::from_fn(50, 40, |x, y| if (x / 5 + y / 7) % 2 == 0 { 0.0 } else { 1.0 });
        let m = Grid::from_fn(50, 40, |x, y| x > 3 && y > 3 && x < 46 && y < 36);
        let cfg = SynthDepthConfig {
            local_curv_amp: 0.9,
            global_curv_amp: 0.9,
            texture_amp: 0.8,
            ..SynthDepthConfig::default()
        };
        let d = synthesize_depth(&p, &m, &cfg).unwrap();
        assert!(d.data().iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn contact_stays_below_groove_floor() {
        // wide blocks so curvature and bevels cannot reach block centres
        let p = Grid::from_fn(80, 80, |x, y| if (x / 20 + y / 20) % 2 == 0 { 0.0 } else { 1.0 });
        let m = Grid::filled(80, 80, true);
        let cfg = SynthDepthConfig {
            global_curv_amp: 0.0,
            ..SynthDepthConfig::default()
        };
        let d = synthesize_depth(&p, &m, &cfg).unwrap();
        let contact_centre = *d.get(10, 10);
        let groove_centre = *d.get(30, 10);
        assert!(contact_centre < cfg.relief * cfg.sigmoid_center);
        assert!(groove_centre > contact_centre + 0.3);
    }

    #[test]
    fn variants_are_deterministic_and_distinct() {
        let print = orange_tread(60, 50);
        let r = SynthRanges::default();
        let a = synth_variants(&print, 10, 7, &r).unwrap();
        let b = synth_variants(&print, 10, 7, &r).unwrap();
        assert_eq!(a.len(), 10);
        assert_eq!(a, b);
        for i in 0..a.len() {
            for j in (i + 1)..a.len() {
                assert_ne!(a[i].0, a[j].0, "variants {i} and {j} coincide");
            }
        }
        let c = synth_variants(&print, 10, 8, &r).unwrap();
        assert_ne!(a[0].0, c[0].0);
    }

    #[test]
    fn variant_count_enforced() {
        let print = orange_tread(30, 30);
        let r = SynthRanges::default();
        assert!(matches!(synth_variants(&print, 9, 0, &r), Err(Error::Argument(_))));
        assert!(matches!(synth_variants(&print, 16, 0, &r), Err(Error::Argument(_))));
    }
}
