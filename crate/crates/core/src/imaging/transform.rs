use serde::{Deserialize, Serialize};

use crate::{Error, GrayGrid, Grid, RegionMask, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flip {
    H,
    V,
    Hv,
}

impl Flip {
    fn matrix(self) -> [[f64; 2]; 2] {
        match self {
            Flip::H => [[-1.0, 0.0], [0.0, 1.0]],
            Flip::V => [[1.0, 0.0], [0.0, -1.0]],
            Flip::Hv => [[-1.0, 0.0], [0.0, -1.0]],
        }
    }
}

/// A geometric transform about the image centre on a same-size canvas.
///
/// Rotation angles are in degrees, positive = counter-clockwise as displayed
/// (rows run downwards). `FlipRotate` applies the flip first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TransformSpec {
    Flip { flip: Flip },
    Rotate { degrees: f64 },
    Scale { factor: f64 },
    FlipRotate { flip: Flip, degrees: f64 },
}

impl TransformSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            TransformSpec::Scale { factor } if !(factor > 0.0) || !factor.is_finite() => Err(
                Error::arg(format!("scale factor must be > 0, got {factor}")),
            ),
            TransformSpec::Rotate { degrees } | TransformSpec::FlipRotate { degrees, .. }
                if !degrees.is_finite() =>
            {
                Err(Error::arg("rotation angle must be finite"))
            }
            _ => Ok(()),
        }
    }

    /// The transform undoing this one.
    ///
    /// A mirror followed by a rotation is itself a reflection, hence its own
    /// inverse; the half-turn flip commutes with rotations instead.
    pub fn inverse(&self) -> TransformSpec {
        match *self {
            TransformSpec::Flip { flip } => TransformSpec::Flip { flip },
            TransformSpec::Rotate { degrees } => TransformSpec::Rotate { degrees: -degrees },
            TransformSpec::Scale { factor } => TransformSpec::Scale {
                factor: 1.0 / factor,
            },
            TransformSpec::FlipRotate {
                flip: Flip::Hv,
                degrees,
            } => TransformSpec::FlipRotate {
                flip: Flip::Hv,
                degrees: -degrees,
            },
            spec @ TransformSpec::FlipRotate { .. } => spec,
        }
    }

    /// Forward linear map about the centre: `out = c + A (in - c)`.
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        match *self {
            TransformSpec::Flip { flip } => flip.matrix(),
            TransformSpec::Rotate { degrees } => rotation(degrees),
            TransformSpec::Scale { factor } => [[factor, 0.0], [0.0, factor]],
            TransformSpec::FlipRotate { flip, degrees } => mat_mul(rotation(degrees), flip.matrix()),
        }
    }

    pub fn is_pure_flip(&self) -> bool {
        matches!(self, TransformSpec::Flip { .. })
    }

    /// Short stable name used for file names.
    pub fn slug(&self) -> String {
        let flip = |f: Flip| match f {
            Flip::H => "h",
            Flip::V => "v",
            Flip::Hv => "hv",
        };
        match *self {
            TransformSpec::Flip { flip: f } => format!("flip-{}", flip(f)),
            TransformSpec::Rotate { degrees } => format!("rot{:+}", degrees),
            TransformSpec::Scale { factor } => format!("scale{}", factor),
            TransformSpec::FlipRotate { flip: f, degrees } => {
                format!("flip-{}-rot{:+}", flip(f), degrees)
            }
        }
    }
}

fn rotation(degrees: f64) -> [[f64; 2]; 2] {
    let (s, c) = degrees.to_radians().sin_cos();
    [[c, s], [-s, c]]
}

fn mat_mul(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

fn mat_inv(a: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    [
        [a[1][1] / det, -a[0][1] / det],
        [-a[1][0] / det, a[0][0] / det],
    ]
}

/// Output of a transform: resampled values plus a support flag per pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct Transformed {
    pub grid: GrayGrid,
    pub valid: RegionMask,
}

const EDGE_EPS: f64 = 1e-9;

/// Bilinear sample at continuous coordinates; `None` outside `[0, w-1] x [0, h-1]`.
/// Also reports the integer taps that received nonzero weight.
fn bilinear_taps(w: usize, h: usize, x: f64, y: f64) -> Option<[(usize, usize, f64); 4]> {
    let maxx = (w - 1) as f64;
    let maxy = (h - 1) as f64;
    if x < -EDGE_EPS || y < -EDGE_EPS || x > maxx + EDGE_EPS || y > maxy + EDGE_EPS {
        return None;
    }
    let x = x.clamp(0.0, maxx);
    let y = y.clamp(0.0, maxy);
    let x0 = x.floor() as usize;
    let y0 = y.floor() as usize;
    let fx = x - x0 as f64;
    let fy = y - y0 as f64;
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    Some([
        (x0, y0, (1.0 - fx) * (1.0 - fy)),
        (x1, y0, fx * (1.0 - fy)),
        (x0, y1, (1.0 - fx) * fy),
        (x1, y1, fx * fy),
    ])
}

/// Bilinear interpolation with the edge convention of [`geom_transform`].
pub fn sample_bilinear(img: &GrayGrid, x: f64, y: f64) -> Option<f64> {
    if img.is_empty() {
        return None;
    }
    let taps = bilinear_taps(img.width(), img.height(), x, y)?;
    Some(
        taps.iter()
            .filter(|t| t.2 != 0.0)
            .map(|&(tx, ty, wgt)| wgt * img.get(tx, ty))
            .sum(),
    )
}

/// Applies `spec` to `img`. Flips are exact pixel permutations; everything
/// else is inverse-mapped bilinear resampling. Pixels whose source falls
/// outside the canvas are 0 and flagged invalid.
pub fn geom_transform(img: &GrayGrid, spec: &TransformSpec) -> Result<Transformed> {
    geom_transform_masked(img, None, spec)
}

/// As [`geom_transform`], additionally treating pixels where `valid_in` is
/// false as unsupported: an output pixel is valid only when every bilinear tap
/// with nonzero weight is valid.
pub fn geom_transform_masked(
    img: &GrayGrid,
    valid_in: Option<&RegionMask>,
    spec: &TransformSpec,
) -> Result<Transformed> {
    spec.validate()?;
    if let Some(v) = valid_in {
        img.check_same_dims(v, "geom_transform")?;
    }
    let (w, h) = img.dims();
    if let TransformSpec::Flip { flip } = *spec {
        let valid = valid_in
            .cloned()
            .unwrap_or_else(|| Grid::filled(w, h, true));
        let (g, v) = match flip {
            Flip::H => (img.flip_h(), valid.flip_h()),
            Flip::V => (img.flip_v(), valid.flip_v()),
            Flip::Hv => (img.flip_h().flip_v(), valid.flip_h().flip_v()),
        };
        return Ok(Transformed { grid: g, valid: v });
    }
    let inv = mat_inv(spec.matrix());
    let cx = (w as f64 - 1.0) / 2.0;
    let cy = (h as f64 - 1.0) / 2.0;
    let mut grid = GrayGrid::filled(w, h, 0.0);
    let mut valid = RegionMask::filled(w, h, false);
    for y in 0..h {
        for x in 0..w {
            let dx = x as f64 - cx;
            let dy = y as f64 - cy;
            let sx = cx + inv[0][0] * dx + inv[0][1] * dy;
            let sy = cy + inv[1][0] * dx + inv[1][1] * dy;
            let Some(taps) = bilinear_taps(w, h, sx, sy) else {
                continue;
            };
            let mut acc = 0.0;
            let mut ok = true;
            for &(tx, ty, wgt) in taps.iter().filter(|t| t.2 != 0.0) {
                if let Some(v) = valid_in {
                    ok &= *v.get(tx, ty);
                }
                acc += wgt * img.get(tx, ty);
            }
            if ok {
                grid.set(x, y, acc);
                valid.set(x, y, true);
            }
        }
    }
    Ok(Transformed { grid, valid })
}

/// Nearest-neighbour transform of a boolean mask; out-of-canvas pixels are false.
pub fn transform_mask(mask: &RegionMask, spec: &TransformSpec) -> Result<RegionMask> {
    spec.validate()?;
    let (w, h) = mask.dims();
    if let TransformSpec::Flip { flip } = *spec {
        return Ok(match flip {
            Flip::H => mask.flip_h(),
            Flip::V => mask.flip_v(),
            Flip::Hv => mask.flip_h().flip_v(),
        });
    }
    let inv = mat_inv(spec.matrix());
    let cx = (w as f64 - 1.0) / 2.0;
    let cy = (h as f64 - 1.0) / 2.0;
    Ok(Grid::from_fn(w, h, |x, y| {
        let dx = x as f64 - cx;
        let dy = y as f64 - cy;
        let sx = (cx + inv[0][0] * dx + inv[0][1] * dy).round();
        let sy = (cy + inv[1][0] * dx + inv[1][1] * dy).round();
        if sx < 0.0 || sy < 0.0 || sx > (w - 1) as f64 || sy > (h - 1) as f64 {
            false
        } else {
            *mask.get(sx as usize, sy as usize)
        }
    }))
}

/// Bilinear resize sampling at pixel centres (no prefiltering).
pub fn resize_bilinear(img: &GrayGrid, width: usize, height: usize) -> Result<GrayGrid> {
    if width == 0 || height == 0 || img.is_empty() {
        return Err(Error::arg("resize to or from an empty grid"));
    }
    let sx = img.width() as f64 / width as f64;
    let sy = img.height() as f64 / height as f64;
    Ok(Grid::from_fn(width, height, |x, y| {
        let fx = ((x as f64 + 0.5) * sx - 0.5).clamp(0.0, (img.width() - 1) as f64);
        let fy = ((y as f64 + 0.5) * sy - 0.5).clamp(0.0, (img.height() - 1) as f64);
        sample_bilinear(img, fx, fy).expect("clamped inside canvas")
    }))
}
