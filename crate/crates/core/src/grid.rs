//! Row-major rasters shared by every module.

use crate::{Error, Result};

/// A dense row-major raster.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

/// Single-channel float raster.
pub type GrayGrid = Grid<f64>;
/// Depth field; lower values are closer to the ground (contact).
pub type DepthGrid = Grid<f64>;
/// RGB raster with channels in `[0, 1]`.
pub type RgbGrid = Grid<[f64; 3]>;
/// Validity mask delimiting the shoe-tread inside the frame.
pub type RegionMask = Grid<bool>;
/// Binary shoeprint; `true` leaves a print.
pub type PrintMask = Grid<bool>;

impl<T: Clone> Grid<T> {
    pub fn filled(width: usize, height: usize, value: T) -> Self {
        Grid {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Grid {
            width,
            height,
            data,
        }
    }

    /// Horizontal mirror (x -> width-1-x).
    pub fn flip_h(&self) -> Self {
        Grid::from_fn(self.width, self.height, |x, y| {
            self.get(self.width - 1 - x, y).clone()
        })
    }

    /// Vertical mirror (y -> height-1-y).
    pub fn flip_v(&self) -> Self {
        Grid::from_fn(self.width, self.height, |x, y| {
            self.get(x, self.height - 1 - y).clone()
        })
    }

    /// Quarter turn clockwise as displayed (rows run downwards). Swaps width and height.
    pub fn rot90_cw(&self) -> Self {
        let (w, h) = (self.width, self.height);
        Grid::from_fn(h, w, |x, y| self.get(y, h - 1 - x).clone())
    }
}

impl<T> Grid<T> {
    pub fn from_vec(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::arg(format!(
                "grid data has {} values, expected {}x{}={}",
                data.len(),
                width,
                height,
                width * height
            )));
        }
        Ok(Grid {
            width,
            height,
            data,
        })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> &T {
        &self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: T) {
        let i = y * self.width + x;
        self.data[i] = value;
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Grid<U> {
        Grid {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(f).collect(),
        }
    }

    /// Errors unless `other` has the same width and height.
    pub fn check_same_dims<U>(&self, other: &Grid<U>, what: &str) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::arg(format!(
                "{what}: dimension mismatch {}x{} vs {}x{}",
                self.width, self.height, other.width, other.height
            )));
        }
        Ok(())
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, T> {
        self.data.chunks_exact(self.width.max(1))
    }
}

impl Grid<bool> {
    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn any(&self) -> bool {
        self.data.iter().any(|&b| b)
    }

    pub fn not(&self) -> Self {
        self.map(|&b| !b)
    }
}

impl Grid<f64> {
    /// Multiplies every value by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        self.map(|&v| v * factor)
    }

    pub fn min_max(&self) -> Option<(f64, f64)> {
        self.data.iter().fold(None, |acc, &v| match acc {
            None => Some((v, v)),
            Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
        })
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Per-channel extraction from an RGB grid.
    pub fn channel(rgb: &RgbGrid, c: usize) -> Self {
        rgb.map(|p| p[c])
    }
}

impl Grid<[f64; 3]> {
    pub fn from_channels(r: &GrayGrid, g: &GrayGrid, b: &GrayGrid) -> Result<Self> {
        r.check_same_dims(g, "from_channels")?;
        r.check_same_dims(b, "from_channels")?;
        let data = r
            .data()
            .iter()
            .zip(g.data())
            .zip(b.data())
            .map(|((&r, &g), &b)| [r, g, b])
            .collect();
        Grid::from_vec(r.width(), r.height(), data)
    }

    /// Rec. 601 luma of gamma-encoded values.
    pub fn luma(&self) -> GrayGrid {
        self.map(|p| 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2])
    }
}
