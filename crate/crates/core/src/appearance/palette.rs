use serde::{Deserialize, Serialize};

use super::meanshift::mean_shift;
use crate::{Error, RegionMask, Result, RgbGrid};

/// Default RGB bandwidth for palette extraction.
pub const PALETTE_BANDWIDTH: f64 = 0.08;
pub const MAX_PALETTE_POINTS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PaletteEntry {
    pub rgb: [f64; 3],
    pub proportion: f64,
}

/// Colours with positive proportions summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<PaletteEntry>", into = "Vec<PaletteEntry>")]
pub struct Palette {
    entries: Vec<PaletteEntry>,
}

impl Palette {
    pub fn new(entries: Vec<PaletteEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::arg("palette is empty"));
        }
        if let Some(e) = entries.iter().find(|e| !(e.proportion > 0.0)) {
            return Err(Error::arg(format!("palette proportion must be positive, got {}", e.proportion)));
        }
        let sum: f64 = entries.iter().map(|e| e.proportion).sum();
        if (sum - 1.0).abs() > 1e-6 {
            return Err(Error::arg(format!("palette proportions sum to {sum}, expected 1")));
        }
        Ok(Palette { entries })
    }

    pub fn entries(&self) -> &[PaletteEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl TryFrom<Vec<PaletteEntry>> for Palette {
    type Error = Error;

    fn try_from(entries: Vec<PaletteEntry>) -> Result<Self> {
        Palette::new(entries)
    }
}

impl From<Palette> for Vec<PaletteEntry> {
    fn from(p: Palette) -> Self {
        p.entries
    }
}

/// Dominant colours of the masked pixels by mean shift, most frequent first.
///
/// More than 20 000 masked pixels are thinned with a fixed raster stride.
pub fn extract_palette(img: &RgbGrid, mask: &RegionMask, bandwidth: f64) -> Result<Palette> {
    img.check_same_dims(mask, "extract_palette")?;
    let masked: Vec<[f64; 3]> = img
        .data()
        .iter()
        .zip(mask.data())
        .filter(|(_, &m)| m)
        .map(|(p, _)| *p)
        .collect();
    if masked.is_empty() {
        return Err(Error::data("palette mask is empty"));
    }
    let stride = masked.len().div_ceil(MAX_PALETTE_POINTS);
    let points: Vec<[f64; 3]> = masked.into_iter().step_by(stride).collect();
    let ms = mean_shift(&points, bandwidth)?;
    let n = points.len() as f64;
    let entries = ms
        .modes
        .iter()
        .zip(&ms.support)
        .map(|(m, &s)| PaletteEntry {
            rgb: m.map(|v| v.clamp(0.0, 1.0)),
            proportion: s as f64 / n,
        })
        .collect();
    Palette::new(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Grid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sixty_forty_split() {
        let c1 = [0.8, 0.2, 0.1];
        let c2 = [0.1, 0.1, 0.1];
        let img = Grid::from_fn(10, 10, |x, _| if x < 6 { c1 } else { c2 });
        let mask = Grid::filled(10, 10, true);
        let p = extract_palette(&img, &mask, PALETTE_BANDWIDTH).unwrap();
        assert_eq!(p.entries(), &[PaletteEntry { rgb: c1, proportion: 0.6 }, PaletteEntry { rgb: c2, proportion: 0.4 }]);
    }

    #[test]
    fn one_colour() {
        let img = Grid::filled(7, 3, [0.5, 0.25, 0.75]);
        let p = extract_palette(&img, &Grid::filled(7, 3, true), 0.08).unwrap();
        assert_eq!(p.entries(), &[PaletteEntry { rgb: [0.5, 0.25, 0.75], proportion: 1.0 }]);
    }

    #[test]
    fn noisy_colours_recovered() {
        let c1 = [0.7, 0.3, 0.2];
        let c2 = [0.2, 0.4, 0.9];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let img = Grid::from_fn(40, 40, |x, _| {
            let c = if x < 25 { c1 } else { c2 };
            c.map(|v| v + rng.gen_range(-1.0..=1.0) / 255.0)
        });
        let mask = Grid::filled(40, 40, true);
        let p = extract_palette(&img, &mask, 0.1).unwrap();
        assert_eq!(p.len(), 2);
        // oracle: plain means of each half
        for (entry, (c, lo, hi)) in p.entries().iter().zip([(c1, 0, 25), (c2, 25, 40)]) {
            let mut mean = [0.0; 3];
            let mut n = 0.0;
            for y in 0..40 {
                for x in lo..hi {
                    for d in 0..3 {
                        mean[d] += img.get(x, y)[d];
                    }
                    n += 1.0;
                }
            }
            for d in 0..3 {
                assert!((entry.rgb[d] - mean[d] / n).abs() < 1e-9);
                assert!((entry.rgb[d] - c[d]).abs() < 2.0 / 255.0);
            }
        }
    }

    #[test]
    fn empty_mask_is_data_error() {
        let img = Grid::filled(3, 3, [0.0; 3]);
        assert!(matches!(extract_palette(&img, &Grid::filled(3, 3, false), 0.1), Err(Error::Data(_))));
    }

    #[test]
    fn json_round_trip_validates() {
        let p = Palette::new(vec![PaletteEntry { rgb: [1.0, 0.0, 0.0], proportion: 1.0 }]).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"[{"rgb":[1.0,0.0,0.0],"proportion":1.0}]"#);
        assert_eq!(serde_json::from_str::<Palette>(&s).unwrap(), p);
        assert!(serde_json::from_str::<Palette>(r#"[{"rgb":[1,0,0],"proportion":0.5}]"#).is_err());
    }
}
