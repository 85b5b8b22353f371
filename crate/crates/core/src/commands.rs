//! Command-line surface. Each subcommand is also callable as a library function.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::align::{align_print, average_and_threshold, DEFAULT_SMOOTHNESS, DEFAULT_THRESHOLD};
use crate::appearance::{compose_albedo, extract_palette, pseudo_albedo, Palette};
use crate::config::Config;
use crate::imaging::TransformSpec;
use crate::io::{self, ManifestEntry, ReportRow};
use crate::metric::{best_match_windowed, normalize_depth, predict_print_windowed, EvalSummary, DEFAULT_WINDOW};
use crate::render::{light_table, render, LightConfig, LIGHT_COUNT};
use crate::synth::{ink_pixels, mask_from_print, synth_variants_with_mask, SynthDepthConfig};
use crate::tta::{make_variants, merge_predictions, variant_dims};
use crate::{DepthGrid, Error, Grid, PrintMask, RegionMask, Result, RgbGrid};

#[derive(Debug, Parser)]
#[command(name = "shoeprint", version, about = "Shoeprint prediction toolkit")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// TOML file overriding synthesis, appearance and renderer defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthetic depth, albedo and renders from scanned prints.
    Synth(SynthArgs),
    /// Best-match IoU of predicted depth against ground-truth prints.
    Eval(EvalArgs),
    /// Binary print from a depth map by adaptive thresholding.
    PredictPrint(PredictPrintArgs),
    /// Piecewise-constant albedo estimate of a tread photo.
    PseudoAlbedo(PseudoAlbedoArgs),
    /// Dominant colours of a tread photo as palette JSON.
    Palette(PaletteArgs),
    /// Warps ink prints into the photo frame, averages and thresholds them.
    AlignPrints(AlignPrintsArgs),
    /// Writes the light table as JSON.
    Lights(LightsArgs),
    /// Test-time augmentation variants and merge.
    #[command(subcommand)]
    Tta(TtaCommand),
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    /// JSONL manifest of scanned prints (`image_path`; `mask_path` optional).
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Depth variants per print, 10 to 15 (default from config).
    #[arg(long)]
    pub variants: Option<usize>,
    /// Light environments per variant (default from config).
    #[arg(long)]
    pub lights: Option<usize>,
    /// Palette JSON replacing the configured palette.
    #[arg(long)]
    pub palette: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    /// JSONL manifest with `depth_path`, `gt_print_path` and `mask_path`.
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub report: PathBuf,
    /// Min-max normalize each depth map inside its mask first.
    #[arg(long)]
    pub normalize: bool,
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    pub window: usize,
}

#[derive(Debug, Clone, Args)]
pub struct PredictPrintArgs {
    #[arg(long)]
    pub depth: PathBuf,
    /// Tread mask PNG (default: whole frame).
    #[arg(long)]
    pub mask: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub normalize: bool,
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    pub window: usize,
}

#[derive(Debug, Clone, Args)]
pub struct PseudoAlbedoArgs {
    #[arg(long)]
    pub image: PathBuf,
    #[arg(long)]
    pub mask: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct PaletteArgs {
    #[arg(long)]
    pub image: PathBuf,
    #[arg(long)]
    pub mask: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// RGB bandwidth (default from config).
    #[arg(long)]
    pub bandwidth: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct AlignPrintsArgs {
    /// Ink print PNG, dark = ink. Repeat for each print.
    #[arg(long = "print", required = true)]
    pub prints: Vec<PathBuf>,
    /// Correspondence CSV (print -> photo) per print, in the same order.
    #[arg(long = "corr", required = true)]
    pub correspondences: Vec<PathBuf>,
    /// Image whose size defines the output frame.
    #[arg(long)]
    pub reference: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SMOOTHNESS)]
    pub lambda: f64,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub theta: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct LightsArgs {
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum TtaCommand {
    /// Writes the original, the 23 variants and `tta.json`.
    Expand(TtaExpandArgs),
    /// Merges the 24 predicted depth maps listed in `tta.json`.
    Merge(TtaMergeArgs),
}

#[derive(Debug, Clone, Args)]
pub struct TtaExpandArgs {
    #[arg(long)]
    pub image: PathBuf,
    #[arg(long)]
    pub mask: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct TtaMergeArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

/// Parses arguments, runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<i32> {
    let config = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let go = || dispatch(&cli.command, &config);
    match cli.threads {
        Some(0) => Err(Error::arg("--threads must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::arg(format!("thread pool: {e}")))?
            .install(go),
        None => go(),
    }
}

fn dispatch(command: &Command, config: &Config) -> Result<i32> {
    match command {
        Command::Synth(a) => {
            let out = cmd_synth(a, config)?;
            for (id, e) in &out.failures {
                eprintln!("error: {id}: {e}");
            }
            println!("wrote {} entries to {}", out.entries.len(), a.out_dir.join(SYNTH_MANIFEST).display());
            Ok(if out.failures.is_empty() { 0 } else { 1 })
        }
        Command::Eval(a) => {
            let out = cmd_eval(a)?;
            for r in &out.rows {
                if let Some(e) = &r.error {
                    eprintln!("error: {}: {e}", r.shoe_id);
                }
            }
            if let Some(s) = &out.summary {
                print!("{}", s.table());
            }
            Ok(if out.rows.iter().any(|r| r.error.is_some()) { 1 } else { 0 })
        }
        Command::PredictPrint(a) => cmd_predict_print(a).map(|_| 0),
        Command::PseudoAlbedo(a) => cmd_pseudo_albedo(a, config).map(|_| 0),
        Command::Palette(a) => cmd_palette(a, config).map(|_| 0),
        Command::AlignPrints(a) => cmd_align_prints(a).map(|_| 0),
        Command::Lights(a) => io::write_json(&a.out, &light_table(&config.render)).map(|_| 0),
        Command::Tta(TtaCommand::Expand(a)) => cmd_tta_expand(a).map(|_| 0),
        Command::Tta(TtaCommand::Merge(a)) => cmd_tta_merge(a).map(|_| 0),
    }
}

fn read_mask_or_full(path: Option<&Path>, width: usize, height: usize) -> Result<RegionMask> {
    match path {
        Some(p) => {
            let m = io::read_mask(p)?;
            if m.dims() != (width, height) {
                return Err(Error::data(format!("{}: mask size does not match the image", p.display())));
            }
            Ok(m)
        }
        None => Ok(Grid::filled(width, height, true)),
    }
}

pub const SYNTH_MANIFEST: &str = "manifest.jsonl";
pub const LIGHTS_FILE: &str = "lights.json";

/// Per-shoe seed that does not depend on manifest order.
fn shoe_seed(seed: u64, shoe_id: &str) -> u64 {
    // FNV-1a, then a splitmix finalizer
    let mut h: u64 = 0xcbf29ce484222325;
    for b in shoe_id.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    let mut z = seed ^ h;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

struct RenderedVariant {
    depth: DepthGrid,
    albedo: RgbGrid,
    config: SynthDepthConfig,
    renders: Vec<(usize, RgbGrid)>,
}

struct SynthShoe {
    mask: RegionMask,
    print: PrintMask,
    variants: Vec<RenderedVariant>,
}

fn synth_one(entry: &ManifestEntry, seed: u64, n: usize, lights: usize, palette: &Palette, config: &Config, table: &[LightConfig]) -> Result<SynthShoe> {
    let scan = io::read_rgb(&entry.image_path)?;
    let ranges = &config.synth.ranges;
    let mask = match &entry.mask_path {
        Some(p) => read_mask_or_full(Some(p), scan.width(), scan.height())?,
        None => mask_from_print(&scan, &ranges.hue)?,
    };
    let ink = ink_pixels(&scan, &ranges.hue);
    let print = Grid::from_vec(scan.width(), scan.height(), ink.data().iter().zip(mask.data()).map(|(&i, &m)| i && m).collect())?;
    let seed = shoe_seed(seed, &entry.shoe_id);
    let depths = synth_variants_with_mask(&scan, &mask, n, seed, ranges)?;
    let variants = depths
        .into_par_iter()
        .enumerate()
        .map(|(i, (depth, _, cfg))| {
            let (albedo, _) = compose_albedo(&depth, &mask, palette, seed.wrapping_add(i as u64))?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(1_000 + i as u64);
            let mut picks = rand::seq::index::sample(&mut rng, LIGHT_COUNT, lights).into_vec();
            picks.sort_unstable();
            let renders = picks
                .into_iter()
                .map(|l| Ok((l, render(&depth, &albedo, &table[l], &mask, &config.render)?)))
                .collect::<Result<_>>()?;
            Ok(RenderedVariant {
                depth,
                albedo,
                config: cfg,
                renders,
            })
        })
        .collect::<Result<_>>()?;
    Ok(SynthShoe { mask, print, variants })
}

fn path_str(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

pub struct SynthOutcome {
    pub entries: Vec<ManifestEntry>,
    pub failures: Vec<(String, Error)>,
}

/// Generates `<out>/<shoe_id>/` files per print plus `manifest.jsonl` and
/// `lights.json`. Paths in the output manifest are relative to `out_dir`.
pub fn cmd_synth(args: &SynthArgs, config: &Config) -> Result<SynthOutcome> {
    let inputs = io::read_manifest(&args.manifest)?;
    if inputs.is_empty() {
        return Err(Error::arg("no entries"));
    }
    let n = args.variants.unwrap_or(config.synth.variants);
    if !(crate::synth::MIN_VARIANTS..=crate::synth::MAX_VARIANTS).contains(&n) {
        return Err(Error::arg(format!("variant count must lie in [10, 15], got {n}")));
    }
    let lights = args.lights.unwrap_or(config.synth.lights_per_variant);
    if !(1..=LIGHT_COUNT).contains(&lights) {
        return Err(Error::arg(format!("lights per variant must lie in [1, {LIGHT_COUNT}], got {lights}")));
    }
    let palette = match &args.palette {
        Some(p) => io::read_json::<Palette>(p)?,
        None => config.appearance.palette()?,
    };
    let table = light_table(&config.render);

    let results: Vec<Result<SynthShoe>> = inputs
        .par_iter()
        .map(|e| synth_one(e, args.seed, n, lights, &palette, config, &table))
        .collect();

    std::fs::create_dir_all(&args.out_dir).map_err(|e| Error::io(&args.out_dir, e))?;
    io::write_json(&args.out_dir.join(LIGHTS_FILE), &table)?;
    let mut entries = Vec::new();
    let mut failures = Vec::new();
    for (input, result) in inputs.iter().zip(results) {
        let shoe = match result {
            Ok(s) => s,
            Err(e) => {
                failures.push((input.shoe_id.clone(), e));
                continue;
            }
        };
        let rel_dir = PathBuf::from(&input.shoe_id);
        let dir = args.out_dir.join(&rel_dir);
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        io::write_mask(&dir.join("mask.png"), &shoe.mask)?;
        io::write_print(&dir.join("print.png"), &shoe.print)?;
        let configs: Vec<&SynthDepthConfig> = shoe.variants.iter().map(|v| &v.config).collect();
        io::write_json(&dir.join("variants.json"), &configs)?;
        for (i, v) in shoe.variants.iter().enumerate() {
            let depth_name = format!("v{i:02}_depth.pfm");
            let albedo_name = format!("v{i:02}_albedo.png");
            io::write_pfm(&dir.join(&depth_name), &v.depth)?;
            io::write_rgb(&dir.join(&albedo_name), &v.albedo)?;
            for (l, img) in &v.renders {
                let name = format!("v{i:02}_light{l:02}.png");
                io::write_rgb(&dir.join(&name), img)?;
                entries.push(ManifestEntry {
                    shoe_id: format!("{}_v{i:02}_l{l:02}", input.shoe_id),
                    category: input.category,
                    image_path: PathBuf::from(path_str(&rel_dir.join(&name))),
                    mask_path: Some(rel_dir.join("mask.png")),
                    gt_print_path: Some(rel_dir.join("print.png")),
                    depth_path: Some(rel_dir.join(&depth_name)),
                    albedo_path: Some(rel_dir.join(&albedo_name)),
                    light: Some(*l),
                });
            }
        }
    }
    io::write_manifest(&args.out_dir.join(SYNTH_MANIFEST), &entries)?;
    Ok(SynthOutcome { entries, failures })
}

pub struct EvalOutcome {
    pub rows: Vec<ReportRow>,
    pub summary: Option<EvalSummary>,
}

fn eval_one(e: &ManifestEntry, args: &EvalArgs) -> Result<ReportRow> {
    let depth_path = e.depth_path.as_ref().ok_or_else(|| Error::data("entry has no depth_path"))?;
    let gt_path = e.gt_print_path.as_ref().ok_or_else(|| Error::data("entry has no gt_print_path"))?;
    let mut depth = io::read_pfm(depth_path)?;
    let gt = io::read_print(gt_path)?;
    let mask = read_mask_or_full(e.mask_path.as_deref(), depth.width(), depth.height())?;
    if args.normalize {
        depth = normalize_depth(&depth, &mask)?;
    }
    let r = best_match_windowed(&depth, &gt, &mask, args.window)?;
    Ok(ReportRow::ok(&e.shoe_id, e.category, r.iou, r.params))
}

/// Runs the best-match metric on every entry and writes the CSV report.
/// Entries that fail become error rows and are left out of the summary.
pub fn cmd_eval(args: &EvalArgs) -> Result<EvalOutcome> {
    let entries = io::read_manifest(&args.manifest)?;
    if entries.is_empty() {
        return Err(Error::arg("no entries"));
    }
    if args.window == 0 || args.window.is_multiple_of(2) {
        return Err(Error::arg(format!("--window must be odd, got {}", args.window)));
    }
    let rows: Vec<ReportRow> = entries
        .par_iter()
        .map(|e| eval_one(e, args).unwrap_or_else(|err| ReportRow::failed(&e.shoe_id, e.category, err)))
        .collect();
    io::write_report(&args.report, &rows)?;
    let summary = io::summarize(&rows)?;
    Ok(EvalOutcome { rows, summary })
}

pub fn cmd_predict_print(args: &PredictPrintArgs) -> Result<PrintMask> {
    let mut depth = io::read_pfm(&args.depth)?;
    let mask = read_mask_or_full(args.mask.as_deref(), depth.width(), depth.height())?;
    if args.normalize {
        depth = normalize_depth(&depth, &mask)?;
    }
    let print = predict_print_windowed(&depth, &mask, args.window)?;
    io::write_print(&args.out, &print)?;
    Ok(print)
}

pub fn cmd_pseudo_albedo(args: &PseudoAlbedoArgs, config: &Config) -> Result<RgbGrid> {
    let img = io::read_rgb(&args.image)?;
    let mask = read_mask_or_full(args.mask.as_deref(), img.width(), img.height())?;
    let r = pseudo_albedo(&img, &mask, &config.appearance.pseudo)?;
    io::write_rgb(&args.out, &r.albedo)?;
    Ok(r.albedo)
}

pub fn cmd_palette(args: &PaletteArgs, config: &Config) -> Result<Palette> {
    let img = io::read_rgb(&args.image)?;
    let mask = read_mask_or_full(args.mask.as_deref(), img.width(), img.height())?;
    let p = extract_palette(&img, &mask, args.bandwidth.unwrap_or(config.appearance.palette_bandwidth))?;
    io::write_json(&args.out, &p)?;
    Ok(p)
}

/// A single print is warped and thresholded on its own.
pub fn cmd_align_prints(args: &AlignPrintsArgs) -> Result<PrintMask> {
    if args.prints.len() != args.correspondences.len() {
        return Err(Error::arg(format!(
            "{} prints but {} correspondence files",
            args.prints.len(),
            args.correspondences.len()
        )));
    }
    let (w, h) = image::image_dimensions(&args.reference).map_err(|e| Error::format(&args.reference, e.to_string()))?;
    let aligned = args
        .prints
        .iter()
        .zip(&args.correspondences)
        .map(|(p, c)| {
            let ink = io::read_ink(p)?;
            let corr = io::read_correspondences(c)?;
            align_print(&ink, &corr, args.lambda, w as usize, h as usize)
        })
        .collect::<Result<Vec<_>>>()?;
    let gt = if aligned.len() == 1 {
        aligned[0].map(|&v| v >= args.theta)
    } else {
        average_and_threshold(&aligned, args.theta)?
    };
    io::write_print(&args.out, &gt)?;
    Ok(gt)
}

pub const TTA_MANIFEST: &str = "tta.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TtaFiles {
    pub image: PathBuf,
    pub mask: PathBuf,
    /// Where the external predictor must write its depth map.
    pub depth: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TtaVariantFiles {
    pub spec: TransformSpec,
    #[serde(flatten)]
    pub files: TtaFiles,
}

/// `tta.json`: file names relative to the manifest's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TtaManifest {
    pub width: usize,
    pub height: usize,
    pub original: TtaFiles,
    pub variants: Vec<TtaVariantFiles>,
}

pub fn cmd_tta_expand(args: &TtaExpandArgs) -> Result<TtaManifest> {
    let img = io::read_rgb(&args.image)?;
    let mask = read_mask_or_full(args.mask.as_deref(), img.width(), img.height())?;
    let variants = make_variants(&img, &mask)?;
    let dir = &args.out_dir;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files = |stem: &str| TtaFiles {
        image: format!("{stem}.png").into(),
        mask: format!("{stem}_mask.png").into(),
        depth: format!("{stem}.pfm").into(),
    };
    let original = files("original");
    io::write_rgb(&dir.join(&original.image), &img)?;
    io::write_mask(&dir.join(&original.mask), &mask)?;
    let mut listed = Vec::new();
    for v in &variants {
        let f = files(&v.spec.slug());
        io::write_rgb(&dir.join(&f.image), &v.image)?;
        io::write_mask(&dir.join(&f.mask), &v.mask)?;
        listed.push(TtaVariantFiles { spec: v.spec, files: f });
    }
    let manifest = TtaManifest {
        width: img.width(),
        height: img.height(),
        original,
        variants: listed,
    };
    io::write_json(&dir.join(TTA_MANIFEST), &manifest)?;
    Ok(manifest)
}

pub fn cmd_tta_merge(args: &TtaMergeArgs) -> Result<DepthGrid> {
    let m: TtaManifest = io::read_json(&args.manifest)?;
    let base = args.manifest.parent().unwrap_or(Path::new("."));
    let load = |p: &Path, (w, h): (usize, usize)| {
        let d = io::read_pfm(&base.join(p))?;
        if d.dims() != (w, h) {
            return Err(Error::data(format!("{}: expected {w}x{h} depth", p.display())));
        }
        Ok(d)
    };
    let original = load(&m.original.depth, (m.width, m.height))?;
    let mask = read_mask_or_full(Some(&base.join(&m.original.mask)), m.width, m.height)?;
    let variants = m
        .variants
        .iter()
        .map(|v| Ok((load(&v.files.depth, variant_dims(&v.spec, m.width, m.height))?, v.spec)))
        .collect::<Result<Vec<_>>>()?;
    let merged = merge_predictions(&original, &variants, &mask)?;
    io::write_pfm(&args.out, &merged)?;
    Ok(merged)
}
