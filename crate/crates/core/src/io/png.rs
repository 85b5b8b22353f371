//! 8-bit PNG images. Masks are 255 = inside; prints are dark where inked.

use std::path::Path;

use image::{GrayImage, ImageFormat, RgbImage};

use crate::{Error, GrayGrid, Grid, PrintMask, RegionMask, Result, RgbGrid};

fn to_u8(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

fn open(path: &Path) -> Result<image::DynamicImage> {
    image::open(path).map_err(|e| match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => Error::format(path, other.to_string()),
    })
}

fn save_gray(path: &Path, w: usize, h: usize, data: Vec<u8>) -> Result<()> {
    let img = GrayImage::from_raw(w as u32, h as u32, data).expect("sized buffer");
    img.save_with_format(path, ImageFormat::Png).map_err(|e| Error::format(path, e.to_string()))
}

pub fn read_rgb(path: &Path) -> Result<RgbGrid> {
    let img = open(path)?.to_rgb8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    Grid::from_vec(w, h, img.pixels().map(|p| p.0.map(|c| c as f64 / 255.0)).collect())
}

pub fn write_rgb(path: &Path, grid: &RgbGrid) -> Result<()> {
    let data: Vec<u8> = grid.data().iter().flat_map(|p| p.map(to_u8)).collect();
    let img = RgbImage::from_raw(grid.width() as u32, grid.height() as u32, data).expect("sized buffer");
    img.save_with_format(path, ImageFormat::Png).map_err(|e| Error::format(path, e.to_string()))
}

/// Gray values scaled to `[0, 1]`.
pub fn read_gray(path: &Path) -> Result<GrayGrid> {
    let img = open(path)?.to_luma8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    Grid::from_vec(w, h, img.pixels().map(|p| p.0[0] as f64 / 255.0).collect())
}

pub fn write_gray(path: &Path, grid: &GrayGrid) -> Result<()> {
    save_gray(path, grid.width(), grid.height(), grid.data().iter().map(|&v| to_u8(v)).collect())
}

/// Mask pixels at or above mid-gray are inside.
pub fn read_mask(path: &Path) -> Result<RegionMask> {
    Ok(read_gray(path)?.map(|&v| v >= 0.5))
}

pub fn write_mask(path: &Path, mask: &RegionMask) -> Result<()> {
    save_gray(path, mask.width(), mask.height(), mask.data().iter().map(|&b| if b { 255 } else { 0 }).collect())
}

/// Ink amount in `[0, 1]`: black pixels read 1, white reads 0.
pub fn read_ink(path: &Path) -> Result<GrayGrid> {
    Ok(read_gray(path)?.map(|&v| 1.0 - v))
}

pub fn write_ink(path: &Path, ink: &GrayGrid) -> Result<()> {
    write_gray(path, &ink.map(|&v| 1.0 - v))
}

/// Binary print: pixels darker than mid-gray are inked.
pub fn read_print(path: &Path) -> Result<PrintMask> {
    Ok(read_ink(path)?.map(|&v| v > 0.5))
}

pub fn write_print(path: &Path, print: &PrintMask) -> Result<()> {
    save_gray(path, print.width(), print.height(), print.data().iter().map(|&b| if b { 0 } else { 255 }).collect())
}
