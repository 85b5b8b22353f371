use crate::{DepthGrid, Error, RegionMask, Result};

/// Masked values sorted ascending, for repeated percentile queries.
#[derive(Debug, Clone)]
pub struct SortedSample {
    values: Vec<f64>,
}

impl SortedSample {
    pub fn new(depth: &DepthGrid, mask: &RegionMask) -> Result<Self> {
        depth.check_same_dims(mask, "percentile")?;
        let mut values: Vec<f64> = depth
            .data()
            .iter()
            .zip(mask.data())
            .filter_map(|(&d, &m)| m.then_some(d))
            .collect();
        if values.is_empty() {
            return Err(Error::domain("percentile of an empty mask"));
        }
        values.sort_by(f64::total_cmp);
        Ok(SortedSample { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Nearest-rank percentile: the element at 1-based rank `ceil(p/100 * n)`,
    /// clamped to `[1, n]`.
    pub fn percentile(&self, p: f64) -> Result<f64> {
        if !(0.0..=100.0).contains(&p) {
            return Err(Error::arg(format!("percentile must lie in [0, 100], got {p}")));
        }
        let n = self.values.len();
        let rank = (p * n as f64 / 100.0).ceil() as usize;
        Ok(self.values[rank.clamp(1, n) - 1])
    }
}

/// Nearest-rank percentile of the masked depth values.
pub fn percentile(depth: &DepthGrid, mask: &RegionMask, p: f64) -> Result<f64> {
    SortedSample::new(depth, mask)?.percentile(p)
}
