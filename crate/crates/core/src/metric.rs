//! Threshold-free depth-to-print matching.
//!
//! [`best_match`] searches for the print, derived from a depth map, that best
//! overlaps a ground-truth print. It runs three greedy stages, each of which
//! only accepts strict IoU improvements:
//!
//! 1. adaptive threshold `depth < s * d_l` for `s = 0.10, 0.11, ..., 2.00`,
//!    where `d_l` is the mask-normalized local mean depth;
//! 2. non-contact clipping `S AND depth < t_nc` for `t_nc` from `0.1 p95` to
//!    `p95` in steps of 0.01;
//! 3. contact filling `S OR depth < t_c` for `t_c` from `p05` to `30 p05` in
//!    steps of 0.1 (skipped when `p05 <= 0`).
//!
//! Depth is used as given; step sizes are absolute.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::imaging::{local_mean_depth, SortedSample};
use crate::{DepthGrid, Error, PrintMask, RegionMask, Result};

/// Side of the square local-mean window, in pixels.
pub const DEFAULT_WINDOW: usize = 45;

/// Shoe category used to break down mIoU tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Category {
    NewAthletic,
    Formal,
    Used,
}

impl Category {
    pub const ALL: [Category; 3] = [Category::NewAthletic, Category::Formal, Category::Used];

    pub fn as_str(&self) -> &'static str {
        match self {
            Category::NewAthletic => "new-athletic",
            Category::Formal => "formal",
            Category::Used => "used",
        }
    }

    fn title(&self) -> &'static str {
        match self {
            Category::NewAthletic => "New-Athletic",
            Category::Formal => "Formal",
            Category::Used => "Used",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "new-athletic" => Ok(Category::NewAthletic),
            "formal" => Ok(Category::Formal),
            "used" => Ok(Category::Used),
            other => Err(Error::data(format!("unknown category {other:?}"))),
        }
    }
}

/// Parameters that produced a best-match print. `None` means the stage never
/// improved on the previous result.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MatchParams {
    pub s: Option<f64>,
    pub t_nc: Option<f64>,
    pub t_c: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    pub iou: f64,
    pub print: PrintMask,
    pub params: MatchParams,
}

/// An inclusive, evenly spaced parameter grid `start + step * k`, `k < count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweep {
    pub start: f64,
    pub step: f64,
    pub count: usize,
}

impl Sweep {
    /// Samples `lo, lo + step, ...` up to and including `hi` (with a 1e-9 step
    /// tolerance on the endpoint). Empty when `hi < lo`.
    pub fn inclusive(lo: f64, hi: f64, step: f64) -> Sweep {
        let count = if hi >= lo {
            ((hi - lo) / step + 1e-9).floor() as usize + 1
        } else {
            0
        };
        Sweep {
            start: lo,
            step,
            count,
        }
    }

    pub fn value(&self, k: usize) -> f64 {
        self.start + self.step * k as f64
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(|k| self.value(k))
    }
}

/// The scale sweep `0.10 ..= 2.00` (191 samples).
pub fn scale_sweep() -> Sweep {
    Sweep {
        start: 0.1,
        step: 0.01,
        count: 191,
    }
}

pub fn non_contact_sweep(p95: f64) -> Sweep {
    Sweep::inclusive(0.1 * p95, p95, 0.01)
}

pub fn contact_sweep(p05: f64) -> Sweep {
    if p05 > 0.0 {
        Sweep::inclusive(p05, 30.0 * p05, 0.1)
    } else {
        Sweep {
            start: p05,
            step: 0.1,
            count: 0,
        }
    }
}

/// `|a AND b| / |a OR b|` restricted to `mask`; 1.0 when both are empty there.
pub fn iou(a: &PrintMask, b: &PrintMask, mask: &RegionMask) -> Result<f64> {
    a.check_same_dims(b, "iou")?;
    a.check_same_dims(mask, "iou")?;
    let (mut inter, mut union) = (0usize, 0usize);
    for ((&x, &y), &m) in a.data().iter().zip(b.data()).zip(mask.data()) {
        if m {
            inter += (x && y) as usize;
            union += (x || y) as usize;
        }
    }
    Ok(ratio(inter, union))
}

#[inline]
fn ratio(inter: usize, union: usize) -> f64 {
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

/// Masked pixels flattened to parallel vectors.
struct Flat {
    index: Vec<usize>,
    depth: Vec<f64>,
    gt: Vec<bool>,
}

impl Flat {
    fn new(depth: &DepthGrid, gt: Option<&PrintMask>, mask: &RegionMask) -> Result<Self> {
        let mut flat = Flat {
            index: Vec::new(),
            depth: Vec::new(),
            gt: Vec::new(),
        };
        for (i, (&d, &m)) in depth.data().iter().zip(mask.data()).enumerate() {
            if !m {
                continue;
            }
            if !d.is_finite() {
                let (x, y) = (i % depth.width(), i / depth.width());
                return Err(Error::data(format!("non-finite depth {d} inside mask at ({x}, {y})")));
            }
            flat.index.push(i);
            flat.depth.push(d);
            flat.gt.push(gt.is_some_and(|g| g.data()[i]));
        }
        if flat.index.is_empty() {
            return Err(Error::domain("mask has no pixels"));
        }
        Ok(flat)
    }

    fn iou_of(&self, pred: impl Fn(usize) -> bool) -> f64 {
        let (mut inter, mut union) = (0usize, 0usize);
        for (i, &g) in self.gt.iter().enumerate() {
            let p = pred(i);
            inter += (p && g) as usize;
            union += (p || g) as usize;
        }
        ratio(inter, union)
    }

    fn to_print(&self, width: usize, height: usize, pred: impl Fn(usize) -> bool) -> PrintMask {
        let mut out = PrintMask::filled(width, height, false);
        for (k, &i) in self.index.iter().enumerate() {
            out.data_mut()[i] = pred(k);
        }
        out
    }
}

/// Stage 1 sweep: best IoU and its scale, `None` if no scale beats 0.
fn scale_stage(flat: &Flat, dl: &[f64]) -> (f64, Option<f64>) {
    let mut best_iou = 0.0;
    let mut best_scale = None;
    for s in scale_sweep().values() {
        let v = flat.iou_of(|i| flat.depth[i] < s * dl[i]);
        if v > best_iou {
            best_iou = v;
            best_scale = Some(s);
        }
    }
    (best_iou, best_scale)
}

/// Stage 1 alone: the adaptive threshold `depth < s * d_l` with the best `s`.
pub fn adaptive_match(depth: &DepthGrid, gt: &PrintMask, mask: &RegionMask, window: usize) -> Result<MatchResult> {
    depth.check_same_dims(gt, "adaptive_match")?;
    depth.check_same_dims(mask, "adaptive_match")?;
    let flat = Flat::new(depth, Some(gt), mask)?;
    let local = local_mean_depth(depth, mask, window)?;
    let dl: Vec<f64> = flat.index.iter().map(|&i| local.data()[i]).collect();
    let (iou, s) = scale_stage(&flat, &dl);
    Ok(MatchResult {
        iou,
        print: flat.to_print(depth.width(), depth.height(), |k| s.is_some_and(|s| flat.depth[k] < s * dl[k])),
        params: MatchParams {
            s,
            ..MatchParams::default()
        },
    })
}

/// Best-match IoU with the default 45 px window.
pub fn best_match(depth: &DepthGrid, gt: &PrintMask, mask: &RegionMask) -> Result<MatchResult> {
    best_match_windowed(depth, gt, mask, DEFAULT_WINDOW)
}

/// Staged best-match search; see the module docs. Ties keep the earliest
/// (smallest) parameter in every sweep.
pub fn best_match_windowed(
    depth: &DepthGrid,
    gt: &PrintMask,
    mask: &RegionMask,
    window: usize,
) -> Result<MatchResult> {
    depth.check_same_dims(gt, "best_match")?;
    depth.check_same_dims(mask, "best_match")?;
    let flat = Flat::new(depth, Some(gt), mask)?;
    let local = local_mean_depth(depth, mask, window)?;
    let dl: Vec<f64> = flat.index.iter().map(|&i| local.data()[i]).collect();

    let (mut best_iou, best_scale) = scale_stage(&flat, &dl);
    let mut params = MatchParams {
        s: best_scale,
        ..MatchParams::default()
    };
    let mut best: Vec<bool> = match best_scale {
        Some(s) => (0..flat.index.len()).map(|i| flat.depth[i] < s * dl[i]).collect(),
        None => vec![false; flat.index.len()],
    };

    let sample = SortedSample::new(depth, mask)?;
    let p95 = sample.percentile(95.0)?;
    for t in non_contact_sweep(p95).values() {
        let v = flat.iou_of(|i| best[i] && flat.depth[i] < t);
        if v > best_iou {
            best_iou = v;
            params.t_nc = Some(t);
            for (i, b) in best.iter_mut().enumerate() {
                *b = *b && flat.depth[i] < t;
            }
        }
    }

    let p05 = sample.percentile(5.0)?;
    let mut fill = None;
    for t in contact_sweep(p05).values() {
        let v = flat.iou_of(|i| best[i] || flat.depth[i] < t);
        if v > best_iou {
            best_iou = v;
            fill = Some(t);
        }
    }
    if let Some(t) = fill {
        params.t_c = Some(t);
        for (i, b) in best.iter_mut().enumerate() {
            *b = *b || flat.depth[i] < t;
        }
    }

    Ok(MatchResult {
        iou: best_iou,
        print: flat.to_print(depth.width(), depth.height(), |k| best[k]),
        params,
    })
}

/// Print prediction without ground truth:
/// `((depth < d_l) AND (depth < p97)) OR (depth < p03)` inside the mask.
pub fn predict_print(depth: &DepthGrid, mask: &RegionMask) -> Result<PrintMask> {
    predict_print_windowed(depth, mask, DEFAULT_WINDOW)
}

pub fn predict_print_windowed(depth: &DepthGrid, mask: &RegionMask, window: usize) -> Result<PrintMask> {
    depth.check_same_dims(mask, "predict_print")?;
    let flat = Flat::new(depth, None, mask)?;
    let local = local_mean_depth(depth, mask, window)?;
    let sample = SortedSample::new(depth, mask)?;
    let p97 = sample.percentile(97.0)?;
    let p03 = sample.percentile(3.0)?;
    Ok(flat.to_print(depth.width(), depth.height(), |k| {
        let d = flat.depth[k];
        (d < local.data()[flat.index[k]] && d < p97) || d < p03
    }))
}

/// Min-max normalization of the masked depth values to `[0, 1]`.
/// Values outside the mask are left untouched; a constant depth maps to 0.
pub fn normalize_depth(depth: &DepthGrid, mask: &RegionMask) -> Result<DepthGrid> {
    depth.check_same_dims(mask, "normalize_depth")?;
    let flat = Flat::new(depth, None, mask)?;
    let lo = flat.depth.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = flat.depth.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    let mut out = depth.clone();
    for (k, &i) in flat.index.iter().enumerate() {
        out.data_mut()[i] = if span > 0.0 { (flat.depth[k] - lo) / span } else { 0.0 };
    }
    Ok(out)
}

/// One evaluated shoe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub shoe_id: String,
    pub category: Category,
    /// Fraction in `[0, 1]`.
    pub iou: f64,
    #[serde(flatten)]
    pub params: MatchParams,
}

impl EvalRecord {
    pub fn new(shoe_id: impl Into<String>, category: Category, iou: f64) -> Self {
        EvalRecord {
            shoe_id: shoe_id.into(),
            category,
            iou,
            params: MatchParams::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CategoryStats {
    pub count: usize,
    pub mean_iou: f64,
}

/// Per-category and overall mean IoU. The overall figure is the mean over
/// shoes, not over categories.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalSummary {
    pub categories: BTreeMap<Category, CategoryStats>,
    pub count: usize,
    pub mean_iou: f64,
}

pub fn aggregate(records: &[EvalRecord]) -> Result<EvalSummary> {
    if records.is_empty() {
        return Err(Error::arg("aggregate of an empty record list"));
    }
    let mut sums: BTreeMap<Category, (usize, f64)> = BTreeMap::new();
    let mut total = 0.0;
    for r in records {
        if !(0.0..=1.0).contains(&r.iou) {
            return Err(Error::data(format!("{}: iou {} outside [0, 1]", r.shoe_id, r.iou)));
        }
        let e = sums.entry(r.category).or_default();
        e.0 += 1;
        e.1 += r.iou;
        total += r.iou;
    }
    Ok(EvalSummary {
        categories: sums
            .into_iter()
            .map(|(c, (n, s))| {
                (
                    c,
                    CategoryStats {
                        count: n,
                        mean_iou: s / n as f64,
                    },
                )
            })
            .collect(),
        count: records.len(),
        mean_iou: total / records.len() as f64,
    })
}

impl EvalSummary {
    /// Text table in percent with one decimal, one column per category and a
    /// final mIoU column. Empty categories show `-`.
    pub fn table(&self) -> String {
        let mut header = String::new();
        let mut row = String::new();
        for c in Category::ALL {
            header.push_str(&format!("{:>14}", c.title()));
            match self.categories.get(&c) {
                Some(s) => row.push_str(&format!("{:>14.1}", 100.0 * s.mean_iou)),
                None => row.push_str(&format!("{:>14}", "-")),
            }
        }
        header.push_str(&format!("{:>8}", "mIoU"));
        row.push_str(&format!("{:>8.1}", 100.0 * self.mean_iou));
        format!("{header}\n{row}\n")
    }
}

impl fmt::Display for EvalSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.table())
    }
}
