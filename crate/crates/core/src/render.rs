//! Diffuse heightfield shading with a groove-darkening occlusion term, and
//! the table of 17 light environments.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::imaging::local_mean_depth;
use crate::metric::DEFAULT_WINDOW;
use crate::{DepthGrid, Error, Grid, RegionMask, Result, RgbGrid};

pub const LIGHT_COUNT: usize = 17;

/// Unit surface normals, `z > 0`.
pub type NormalMap = Grid<[f64; 3]>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bulb {
    /// Degrees counter-clockwise from the +x image axis as displayed.
    pub azimuth: f64,
    /// Degrees above the image plane.
    pub elevation: f64,
}

impl Bulb {
    /// Unit vector toward the bulb in image coordinates (x right, y down, z toward the viewer).
    pub fn direction(&self) -> [f64; 3] {
        let (sa, ca) = sincos_deg(self.azimuth);
        let (se, ce) = sincos_deg(self.elevation);
        [ce * ca, -(ce * sa), se]
    }
}

/// Sine and cosine of an angle in degrees, reduced by quadrant so that
/// angles differing by a multiple of 90 degrees give exactly permuted values.
pub fn sincos_deg(deg: f64) -> (f64, f64) {
    let r = deg.rem_euclid(360.0);
    let q = (r / 90.0).floor();
    let rem = r - 90.0 * q;
    let (s, c) = rem.to_radians().sin_cos();
    match q as i64 {
        0 => (s, c),
        1 => (c, -s),
        2 => (-s, -c),
        _ => (-c, s),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LightConfig {
    pub index: usize,
    pub bulbs: Vec<Bulb>,
    pub ambient: f64,
}

impl LightConfig {
    /// Entry `index` of the light table: 0 is ambient only, 1-8 one bulb
    /// every 45 degrees, 9-16 the same first bulb plus a second 120 degrees on.
    pub fn from_index(index: usize, params: &RenderParams) -> Result<Self> {
        let elevation = params.elevation;
        let bulb = |azimuth: f64| Bulb { azimuth, elevation };
        let bulbs = match index {
            0 => vec![],
            1..=8 => vec![bulb(45.0 * (index - 1) as f64)],
            9..=16 => {
                let a = 45.0 * (index - 9) as f64;
                vec![bulb(a), bulb((a + 120.0).rem_euclid(360.0))]
            }
            _ => return Err(Error::arg(format!("light index must lie in [0, 16], got {index}"))),
        };
        Ok(LightConfig {
            index,
            bulbs,
            ambient: params.ambient,
        })
    }
}

pub fn light_table(params: &RenderParams) -> Vec<LightConfig> {
    (0..LIGHT_COUNT)
        .map(|i| LightConfig::from_index(i, params).expect("index in range"))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderParams {
    pub ambient: f64,
    /// Diffuse weight of each bulb.
    pub bulb_weight: f64,
    /// Largest occlusion darkening.
    pub ao_strength: f64,
    /// Depth below the local mean at which occlusion saturates.
    pub ao_height: f64,
    pub elevation: f64,
    /// Pixels per depth unit.
    pub z_scale: f64,
    pub ao_window: usize,
}

impl Default for RenderParams {
    fn default() -> Self {
        RenderParams {
            ambient: 0.75,
            bulb_weight: 0.35,
            ao_strength: 0.5,
            ao_height: 0.1,
            elevation: 45.0,
            z_scale: 20.0,
            ao_window: DEFAULT_WINDOW,
        }
    }
}

fn diff(v: &[f64], i: usize) -> f64 {
    let n = v.len();
    if n < 2 {
        0.0
    } else if i == 0 {
        v[1] - v[0]
    } else if i == n - 1 {
        v[n - 1] - v[n - 2]
    } else {
        (v[i + 1] - v[i - 1]) / 2.0
    }
}

/// Normals `(-z dD/dx, -z dD/dy, 1)` normalized, from central differences
/// (one-sided on the border).
pub fn normals_from_depth(depth: &DepthGrid, z_scale: f64) -> NormalMap {
    let (w, h) = depth.dims();
    let columns: Vec<Vec<f64>> = (0..w).map(|x| (0..h).map(|y| *depth.get(x, y)).collect()).collect();
    let rows: Vec<&[f64]> = depth.rows().collect();
    Grid::from_fn(w, h, |x, y| {
        let a = -z_scale * diff(rows[y], x);
        let b = -z_scale * diff(&columns[x], y);
        let norm = (a * a + b * b + 1.0).sqrt();
        [a / norm, b / norm, 1.0 / norm]
    })
}

/// `albedo * clamp(ambient * ao + sum_bulbs w * max(0, n.l), 0, 1)` inside
/// the mask, white outside, where `ao = 1 - strength * clamp((d - d_l) / h0, 0, 1)`
/// darkens pixels deeper than their local mean `d_l`.
pub fn render(depth: &DepthGrid, albedo: &RgbGrid, light: &LightConfig, mask: &RegionMask, params: &RenderParams) -> Result<RgbGrid> {
    depth.check_same_dims(albedo, "render")?;
    depth.check_same_dims(mask, "render")?;
    if !(params.ao_height > 0.0) {
        return Err(Error::arg(format!("ao_height must be positive, got {}", params.ao_height)));
    }
    let (w, h) = depth.dims();
    let normals = normals_from_depth(depth, params.z_scale);
    let local = if mask.any() {
        local_mean_depth(depth, mask, params.ao_window)?
    } else {
        depth.clone()
    };
    let dirs: Vec<[f64; 3]> = light.bulbs.iter().map(Bulb::direction).collect();
    let mut out = vec![[1.0; 3]; w * h];
    out.par_chunks_mut(w.max(1)).enumerate().for_each(|(y, row)| {
        for (x, px) in row.iter_mut().enumerate() {
            if !*mask.get(x, y) {
                continue;
            }
            let rel = ((depth.get(x, y) - local.get(x, y)) / params.ao_height).clamp(0.0, 1.0);
            let ao = 1.0 - params.ao_strength * rel;
            let n = normals.get(x, y);
            let mut shade = light.ambient * ao;
            for l in &dirs {
                let dot = (n[0] * l[0] + n[1] * l[1]) + n[2] * l[2];
                shade += params.bulb_weight * dot.max(0.0);
            }
            let shade = shade.clamp(0.0, 1.0);
            *px = albedo.get(x, y).map(|a| (a * shade).clamp(0.0, 1.0));
        }
    });
    Grid::from_vec(w, h, out)
}
