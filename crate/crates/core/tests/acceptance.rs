//! Acceptance suite: one pass/fail line per criterion, nonzero exit on any failure.
//!
//! Run with `cargo test -p shoeprint --test acceptance`.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use shoeprint::align::{fit_tps, Correspondence, DEFAULT_SMOOTHNESS};
use shoeprint::appearance::color::lab_to_srgb;
use shoeprint::appearance::{pseudo_albedo, PseudoAlbedoConfig};
use shoeprint::commands::{cmd_eval, cmd_synth, EvalArgs, SynthArgs};
use shoeprint::config::Config;
use shoeprint::imaging::euclidean_distance_transform;
use shoeprint::io::{self, ManifestEntry};
use shoeprint::metric::{adaptive_match, aggregate, best_match, Category, EvalRecord, MatchParams, DEFAULT_WINDOW};
use shoeprint::render::{light_table, render, LightConfig, RenderParams, LIGHT_COUNT};
use shoeprint::tta::{canonical_specs, merge_predictions, transform_channel, VARIANT_COUNT};
use shoeprint::{DepthGrid, Grid, PrintMask, RegionMask, RgbGrid};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

/// Inclusive bound. Table means are exact multiples of 0.1 / n, so a mean
/// sitting on the boundary must not be rejected by float rounding noise.
fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol + 1e-9
}

// ---------------------------------------------------------------- 1

fn load_fixture(name: &str) -> Result<(Vec<EvalRecord>, Vec<EvalRecord>), String> {
    let mut reader = csv::Reader::from_path(fixture(name)).map_err(|e| e.to_string())?;
    let (mut base, mut aug) = (Vec::new(), Vec::new());
    for row in reader.records() {
        let row = row.map_err(|e| e.to_string())?;
        let cat: Category = row[1].parse().map_err(|e: shoeprint::Error| e.to_string())?;
        let b: f64 = row[2].parse().map_err(|_| format!("bad value {:?}", &row[2]))?;
        let a: f64 = row[3].parse().map_err(|_| format!("bad value {:?}", &row[3]))?;
        base.push(EvalRecord::new(&row[0], cat, b));
        aug.push(EvalRecord::new(&row[0], cat, a));
    }
    Ok((base, aug))
}

fn check_table(records: &[EvalRecord], cats: Option<[f64; 3]>, overall: f64, what: &str) -> Outcome {
    let s = aggregate(records).map_err(|e| e.to_string())?;
    let got = 100.0 * s.mean_iou;
    ensure!(close(got, overall, 0.05), "{what}: overall {got:.3} vs {overall}");
    let mut detail = format!("{what} {got:.2}");
    if let Some(want) = cats {
        for (c, w) in [Category::NewAthletic, Category::Formal, Category::Used].into_iter().zip(want) {
            let v = 100.0 * s.categories.get(&c).ok_or(format!("{what}: no {c} rows"))?.mean_iou;
            ensure!(close(v, w, 0.05), "{what}: {c} {v:.3} vs {w}");
            detail.push_str(&format!("/{v:.2}"));
        }
    }
    Ok(detail)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let (base, aug) = load_fixture("benchmark_real_val.csv")?;
    ensure!(base.len() == 36, "real-val fixture has {} rows", base.len());
    let (fid_base, fid_aug) = load_fixture("benchmark_fid_val.csv")?;
    ensure!(fid_base.len() == 41, "fid-val fixture has {} rows", fid_base.len());
    let mut parts = vec![
        check_table(&base, Some([50.5, 47.8, 35.8]), 46.8, "real")?,
        check_table(&fid_base, None, 31.6, "fid")?,
    ];
    // the augmented-training columns of the same tables
    parts.push(check_table(&aug, Some([52.4, 52.9, 36.9]), 49.0, "real+aug")?);
    parts.push(check_table(&fid_aug, None, 32.0, "fid+aug")?);
    let t = start.elapsed();
    ensure!(t < Duration::from_secs(1), "took {t:?}");
    Ok(format!("{} in {t:.2?}", parts.join(", ")))
}

// ---------------------------------------------------------------- 2 & 3

/// Random instance with dyadic depth values `k / 256`, so every sum the
/// metric forms is exact and oracle results must agree bit for bit.
fn random_instance(rng: &mut ChaCha8Rng, w: usize, h: usize) -> (DepthGrid, PrintMask, RegionMask) {
    let bw = rng.gen_range(3..9);
    let levels: Vec<u32> = (0..(w / bw + 1) * (h / bw + 1)).map(|_| rng.gen_range(0..200)).collect();
    let cols = w / bw + 1;
    let depth = Grid::from_fn(w, h, |x, y| {
        let k = levels[(y / bw) * cols + x / bw] + rng.gen_range(0..56);
        k as f64 / 256.0
    });
    let cut = rng.gen_range(0.2..0.7);
    let flip = rng.gen_range(0.0..0.2);
    let gt = Grid::from_fn(w, h, |x, y| (*depth.get(x, y) < cut) ^ rng.gen_bool(flip));
    let holes = rng.gen_range(0.0..0.3);
    let mut mask = Grid::from_fn(w, h, |_, _| !rng.gen_bool(holes));
    mask.set(w / 2, h / 2, true);
    (depth, gt, mask)
}

struct Oracle {
    depth: Vec<f64>,
    gt: Vec<bool>,
    masked: Vec<usize>,
}

impl Oracle {
    fn new(depth: &DepthGrid, gt: &PrintMask, mask: &RegionMask) -> Self {
        let masked = (0..mask.len()).filter(|&i| mask.data()[i]).collect();
        Oracle {
            depth: depth.data().to_vec(),
            gt: gt.data().to_vec(),
            masked,
        }
    }

    fn iou(&self, pred: &[bool]) -> f64 {
        let mut inter = 0u64;
        let mut union = 0u64;
        for &i in &self.masked {
            if pred[i] && self.gt[i] {
                inter += 1;
            }
            if pred[i] || self.gt[i] {
                union += 1;
            }
        }
        if union == 0 {
            1.0
        } else {
            inter as f64 / union as f64
        }
    }

    /// Masked windowed mean by direct summation, relative to the masked minimum.
    fn local_mean(&self, w: usize, h: usize, mask: &RegionMask, win: usize) -> Vec<f64> {
        let r = (win / 2) as i64;
        let lo = self.masked.iter().map(|&i| self.depth[i]).fold(f64::INFINITY, f64::min);
        let mut out = vec![0.0; w * h];
        for y in 0..h as i64 {
            for x in 0..w as i64 {
                let (mut sum, mut n) = (0.0, 0.0);
                for yy in (y - r).max(0)..=(y + r).min(h as i64 - 1) {
                    for xx in (x - r).max(0)..=(x + r).min(w as i64 - 1) {
                        let i = yy as usize * w + xx as usize;
                        if mask.data()[i] {
                            sum += self.depth[i] - lo;
                            n += 1.0;
                        }
                    }
                }
                out[y as usize * w + x as usize] = if n > 0.0 { lo + sum / n } else { 0.0 };
            }
        }
        out
    }

    /// Nearest rank with integer arithmetic.
    fn percentile(&self, p: usize) -> f64 {
        let mut v: Vec<f64> = self.masked.iter().map(|&i| self.depth[i]).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = v.len();
        let rank = (p * n).div_ceil(100).clamp(1, n);
        v[rank - 1]
    }
}

fn grid_values(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    if hi < lo {
        return Vec::new();
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    (0..n).map(|k| lo + step * k as f64).collect()
}

/// Stage 1 of the oracle: returns (iou, s, print).
fn oracle_stage_one(o: &Oracle, dl: &[f64]) -> (f64, Option<f64>, Vec<bool>) {
    let mut best = (0.0, None, vec![false; o.depth.len()]);
    for s in (0..191).map(|k| 0.1 + 0.01 * k as f64) {
        let pred: Vec<bool> = (0..o.depth.len()).map(|i| o.depth[i] < s * dl[i]).collect();
        let v = o.iou(&pred);
        if v > best.0 {
            best = (v, Some(s), pred);
        }
    }
    best
}

fn oracle_best_match(depth: &DepthGrid, gt: &PrintMask, mask: &RegionMask) -> (f64, MatchParams, Vec<bool>) {
    let o = Oracle::new(depth, gt, mask);
    let dl = o.local_mean(depth.width(), depth.height(), mask, DEFAULT_WINDOW);
    let (mut best, s, mut print) = oracle_stage_one(&o, &dl);
    let mut params = MatchParams { s, t_nc: None, t_c: None };

    let p95 = o.percentile(95);
    for t in grid_values(0.1 * p95, p95, 0.01) {
        let pred: Vec<bool> = (0..print.len()).map(|i| print[i] && o.depth[i] < t).collect();
        let v = o.iou(&pred);
        if v > best {
            best = v;
            params.t_nc = Some(t);
            print = pred;
        }
    }

    let p05 = o.percentile(5);
    if p05 > 0.0 {
        for t in grid_values(p05, 30.0 * p05, 0.1) {
            let pred: Vec<bool> = (0..print.len()).map(|i| print[i] || o.depth[i] < t).collect();
            let v = o.iou(&pred);
            if v > best {
                best = v;
                params.t_c = Some(t);
            }
        }
    }
    if let Some(t) = params.t_c {
        for (i, p) in print.iter_mut().enumerate() {
            *p = *p || o.depth[i] < t;
        }
    }
    for (p, &m) in print.iter_mut().zip(mask.data()) {
        *p &= m;
    }
    (best, params, print)
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut with_nc, mut with_c) = (0, 0);
    for case in 0..200 {
        let (depth, gt, mask) = random_instance(&mut rng, 32, 32);
        let got = best_match(&depth, &gt, &mask).map_err(|e| e.to_string())?;
        let (iou, params, print) = oracle_best_match(&depth, &gt, &mask);
        ensure!(got.iou == iou, "case {case}: iou {} vs oracle {iou}", got.iou);
        ensure!(got.params == params, "case {case}: params {:?} vs oracle {params:?}", got.params);
        ensure!(got.print.data() == &print[..], "case {case}: print sets differ");
        with_nc += params.t_nc.is_some() as usize;
        with_c += params.t_c.is_some() as usize;
    }
    let t = start.elapsed();
    ensure!(t < Duration::from_secs(60), "took {t:?}");
    Ok(format!("200/200 identical ({with_nc} used t_nc, {with_c} used t_c) in {t:.2?}"))
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for case in 0..50 {
        let (w, h) = (rng.gen_range(16..48), rng.gen_range(16..48));
        let (depth, gt, mask) = random_instance(&mut rng, w, h);
        let base = adaptive_match(&depth, &gt, &mask, DEFAULT_WINDOW).map_err(|e| e.to_string())?;
        // cross-check Stage 1 against the oracle as well
        let o = Oracle::new(&depth, &gt, &mask);
        let (iou, s, _) = oracle_stage_one(&o, &o.local_mean(w, h, &mask, DEFAULT_WINDOW));
        ensure!(base.iou == iou && base.params.s == s, "case {case}: stage 1 disagrees with oracle");
        for c in [0.5, 2.0] {
            let scaled = adaptive_match(&depth.scaled(c), &gt, &mask, DEFAULT_WINDOW).map_err(|e| e.to_string())?;
            ensure!(scaled.print == base.print, "case {case}, c = {c}: print set changed");
            ensure!(scaled.iou == base.iou, "case {case}, c = {c}: iou changed");
        }
    }
    Ok("50 instances x c in {0.5, 2}: identical print sets".into())
}

// ---------------------------------------------------------------- 4

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for case in 0..500 {
        let (w, h) = (rng.gen_range(1..=16), rng.gen_range(1..=16));
        let density = rng.gen_range(0.0..1.0);
        let fg: RegionMask = Grid::from_fn(w, h, |_, _| rng.gen_bool(density));
        let got = euclidean_distance_transform(&fg);
        let zeros: Vec<(i64, i64)> = (0..h)
            .flat_map(|y| (0..w).map(move |x| (x, y)))
            .filter(|&(x, y)| !*fg.get(x, y))
            .map(|(x, y)| (x as i64, y as i64))
            .collect();
        for y in 0..h {
            for x in 0..w {
                let want = if zeros.is_empty() {
                    w.max(h) as f64
                } else {
                    let d2 = zeros.iter().map(|&(zx, zy)| (zx - x as i64).pow(2) + (zy - y as i64).pow(2)).min().unwrap();
                    (d2 as f64).sqrt()
                };
                ensure!(*got.get(x, y) == want, "case {case} ({w}x{h}) at ({x}, {y}): {} vs {want}", got.get(x, y));
            }
        }
    }
    Ok("500 random masks up to 16x16: exact".into())
}

// ---------------------------------------------------------------- 5

fn random_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<[f64; 2]> {
    (0..n).map(|_| [rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0)]).collect()
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_side: f64 = 0.0;
    let mut worst_id: f64 = 0.0;
    let mut worst_interp: f64 = 0.0;
    for _ in 0..20 {
        let n = rng.gen_range(4..40);
        let pts = random_points(&mut rng, n);

        let id: Vec<_> = pts.iter().map(|&p| Correspondence::new(p, p)).collect();
        let warp = fit_tps(&id, DEFAULT_SMOOTHNESS).map_err(|e| e.to_string())?;
        worst_side = worst_side.max(warp.side_condition_residual());
        for y in 0..100 {
            for x in 0..100 {
                let p = [x as f64, y as f64];
                let q = warp.apply(p);
                worst_id = worst_id.max((q[0] - p[0]).abs().max((q[1] - p[1]).abs()));
            }
        }

        let moved: Vec<_> = pts
            .iter()
            .map(|&p| Correspondence::new(p, [p[0] + rng.gen_range(-5.0..5.0), p[1] + rng.gen_range(-5.0..5.0)]))
            .collect();
        for lambda in [1e-9, DEFAULT_SMOOTHNESS, 10.0] {
            let warp = fit_tps(&moved, lambda).map_err(|e| e.to_string())?;
            worst_side = worst_side.max(warp.side_condition_residual());
            if lambda == 1e-9 {
                for c in &moved {
                    let q = warp.apply(c.src());
                    let d = c.dst();
                    worst_interp = worst_interp.max((q[0] - d[0]).hypot(q[1] - d[1]));
                }
            }
        }
    }
    ensure!(worst_id <= 1e-9, "identity displacement {worst_id:e}");
    ensure!(worst_interp <= 1e-6, "control point error {worst_interp:e}");
    ensure!(worst_side <= 1e-8, "side condition residual {worst_side:e}");
    Ok(format!("identity {worst_id:.1e}, interpolation {worst_interp:.1e}, side conditions {worst_side:.1e}"))
}

// ---------------------------------------------------------------- 6

fn criterion_6() -> Outcome {
    let (w, h) = (64, 96);
    let orig = Grid::from_fn(w, h, |x, y| {
        let (u, v) = (x as f64 / w as f64, y as f64 / h as f64);
        0.5 + 0.2 * (3.0 * u).sin() * (2.0 * v).cos()
    });
    let specs = canonical_specs();
    ensure!(specs.len() == VARIANT_COUNT, "{} specs", specs.len());
    let mut variants = Vec::new();
    for s in specs {
        let fwd = transform_channel(&orig, &s).map_err(|e| e.to_string())?;
        if s.is_pure_flip() {
            let back = transform_channel(&fwd, &s.inverse()).map_err(|e| e.to_string())?;
            ensure!(back == orig, "{} does not round-trip exactly", s.slug());
        }
        variants.push((fwd, s));
    }
    let mask = Grid::from_fn(w, h, |x, y| x > 4 && y > 4 && x < w - 5 && y < h - 5);
    let merged = merge_predictions(&orig, &variants, &mask).map_err(|e| e.to_string())?;
    let mae = (0..orig.len())
        .filter(|&i| mask.data()[i])
        .map(|i| (merged.data()[i] - orig.data()[i]).abs())
        .sum::<f64>()
        / mask.count() as f64;
    ensure!(mae < 0.02, "merge MAE {mae}");
    Ok(format!("flips exact, merge MAE {mae:.2e}"))
}

// ---------------------------------------------------------------- 7

fn criterion_7() -> Outcome {
    let cfg = PseudoAlbedoConfig::default();
    let cols = [[0.85, 0.2, 0.15], [0.15, 0.15, 0.15], [0.9, 0.9, 0.85]];
    let mut iterations = Vec::new();
    for (w, h) in [(134, 300), (101, 211)] {
        let img: RgbGrid = Grid::from_fn(w, h, |x, y| {
            if y < h / 3 {
                cols[0]
            } else if x < w / 2 {
                cols[1]
            } else {
                cols[2]
            }
        });
        let r = pseudo_albedo(&img, &Grid::filled(w, h, true), &cfg).map_err(|e| e.to_string())?;
        ensure!(r.segments.len() == 3, "{w}x{h}: {} segments", r.segments.len());
        ensure!(r.albedo == img, "{w}x{h}: albedo differs from the input colours");
        iterations.push(r.iterations);
    }

    let img: RgbGrid = Grid::from_fn(80, 160, |_, y| lab_to_srgb([35.0 + 40.0 * y as f64 / 159.0, 30.0, 20.0]));
    let r = pseudo_albedo(&img, &Grid::filled(80, 160, true), &cfg).map_err(|e| e.to_string())?;
    ensure!(r.segments.len() == 1, "gradient gave {} segments", r.segments.len());
    iterations.push(r.iterations);

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let noisy: RgbGrid = Grid::from_fn(90, 170, |x, y| {
        let c = cols[(x / 30 + y / 40) % 3];
        c.map(|v| (v + rng.gen_range(-0.05..0.05f64)).clamp(0.0, 1.0))
    });
    let mask = Grid::from_fn(90, 170, |x, y| (x as i64 - 45).pow(2) * 4 + (y as i64 - 85).pow(2) < 85 * 85);
    let r = pseudo_albedo(&noisy, &mask, &cfg).map_err(|e| e.to_string())?;
    iterations.push(r.iterations);

    ensure!(iterations.iter().all(|&i| i <= 10), "iterations {iterations:?}");
    Ok(format!("3 colours exact, gradient 1 segment, iterations {iterations:?}"))
}

// ---------------------------------------------------------------- 8

fn files_under(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p.strip_prefix(dir).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}

fn criterion_8() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (w, h) = (90, 150);
    let scan: RgbGrid = Grid::from_fn(w, h, |x, y| {
        let inside = x > 6 && x < w - 7 && y > 6 && y < h - 7;
        let lug = (x / 7 + y / 9) % 2 == 0;
        if inside && lug {
            [0.95, 0.55, 0.15]
        } else {
            [1.0, 1.0, 1.0]
        }
    });
    io::write_rgb(&tmp.path().join("scan.png"), &scan).map_err(|e| e.to_string())?;
    let entry = ManifestEntry {
        shoe_id: "s01".into(),
        category: Category::Used,
        image_path: "scan.png".into(),
        mask_path: None,
        gt_print_path: None,
        depth_path: None,
        albedo_path: None,
        light: None,
    };
    let manifest = tmp.path().join("scans.jsonl");
    io::write_manifest(&manifest, &[entry]).map_err(|e| e.to_string())?;
    let config = Config::default();
    let args = |out: &str, n: usize| SynthArgs {
        manifest: manifest.clone(),
        out_dir: tmp.path().join(out),
        seed: 11,
        variants: Some(n),
        lights: None,
        palette: None,
    };

    let a = cmd_synth(&args("a", 10), &config).map_err(|e| e.to_string())?;
    let b = cmd_synth(&args("b", 10), &config).map_err(|e| e.to_string())?;
    ensure!(a.entries == b.entries, "manifest entries differ");
    ensure!(a.failures.is_empty(), "synthesis failed: {}", a.failures[0].1);
    ensure!(a.entries.len() == 10, "{} manifest entries", a.entries.len());
    let files = files_under(&tmp.path().join("a"));
    ensure!(files == files_under(&tmp.path().join("b")), "file lists differ");
    for f in &files {
        let x = std::fs::read(tmp.path().join("a").join(f)).unwrap();
        let y = std::fs::read(tmp.path().join("b").join(f)).unwrap();
        ensure!(x == y, "{} differs between runs", f.display());
    }
    for n in [9, 16] {
        ensure!(cmd_synth(&args("c", n), &config).is_err(), "n = {n} accepted");
    }
    ensure!(cmd_synth(&args("d", 15), &config).is_ok(), "n = 15 rejected");

    let table = light_table(&RenderParams::default());
    ensure!(table.len() == LIGHT_COUNT && LIGHT_COUNT == 17, "light table has {} entries", table.len());
    let counts: Vec<usize> = table.iter().map(|l| l.bulbs.len()).collect();
    ensure!(counts[0] == 0, "entry 0 has bulbs");
    ensure!(counts[1..9].iter().all(|&c| c == 1), "entries 1-8 are not single-bulb: {counts:?}");
    ensure!(counts[9..].iter().all(|&c| c == 2), "entries 9-16 are not two-bulb: {counts:?}");
    Ok(format!("{} files byte-identical across runs, n in [10, 15] enforced, 17 lights (1/8/8)", files.len()))
}

// ---------------------------------------------------------------- 9

fn criterion_9() -> Outcome {
    let params = RenderParams::default();
    let (w, h) = (40, 40);
    let a = [0.6, 0.4, 0.2];
    let mask = Grid::from_fn(w, h, |x, y| x > 2 && y > 1);
    let flat = DepthGrid::filled(w, h, 0.37);
    let ambient = LightConfig::from_index(0, &params).map_err(|e| e.to_string())?;
    let out = render(&flat, &Grid::filled(w, h, a), &ambient, &mask, &params).map_err(|e| e.to_string())?;
    let want = a.map(|v| v * params.ambient);
    for (p, &m) in out.data().iter().zip(mask.data()) {
        ensure!(!m || *p == want, "flat render {p:?} vs {want:?}");
    }

    let groove = Grid::from_fn(w, h, |x, _| if (18..22).contains(&x) { 0.5 } else { 0.0 });
    let albedo = Grid::filled(w, h, [0.8; 3]);
    let full = Grid::filled(w, h, true);
    for light in light_table(&params) {
        let g = render(&groove, &albedo, &light, &full, &params).map_err(|e| e.to_string())?;
        let f = render(&DepthGrid::filled(w, h, 0.0), &albedo, &light, &full, &params).map_err(|e| e.to_string())?;
        let (in_groove, reference) = (g.get(20, 20)[0], f.get(20, 20)[0]);
        ensure!(in_groove < reference, "light {}: groove {in_groove} not darker than {reference}", light.index);
    }
    Ok("flat ambient exact, groove darker under all 17 lights".into())
}

// ---------------------------------------------------------------- 10

fn tread_instance(rng: &mut ChaCha8Rng, w: usize, h: usize) -> (DepthGrid, PrintMask, RegionMask) {
    let (fx, fy, phase) = (rng.gen_range(0.1..0.3), rng.gen_range(0.1..0.3), rng.gen_range(0.0..6.0));
    let depth = Grid::from_fn(w, h, |x, y| {
        let (u, v) = (x as f64, y as f64);
        let lug = ((fx * u + phase).sin() * (fy * v).cos()).max(0.0);
        0.3 + 0.4 * lug + 0.1 * (v / h as f64) + 0.02 * rng.gen_range(0.0..1.0)
    });
    let gt = depth.map(|&d| d < 0.36);
    let mask = Grid::from_fn(w, h, |x, y| {
        let (u, v) = ((x as f64 - w as f64 / 2.0) / (w as f64 / 2.0), (y as f64 - h as f64 / 2.0) / (h as f64 / 2.0));
        u * u + v * v < 0.95
    });
    (depth, gt, mask)
}

fn criterion_10() -> Outcome {
    let (w, h) = (405, 765);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (depth, gt, mask) = tread_instance(&mut rng, w, h);
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().map_err(|e| e.to_string())?;
    let start = Instant::now();
    let r = single.install(|| best_match(&depth, &gt, &mask)).map_err(|e| e.to_string())?;
    let one = start.elapsed();
    ensure!(r.iou > 0.5, "implausible iou {}", r.iou);
    ensure!(one < Duration::from_secs(2), "single best_match took {one:?}");

    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut entries = Vec::new();
    for i in 0..36 {
        let (d, g, m) = tread_instance(&mut rng, w, h);
        let id = format!("{i:04}");
        io::write_pfm(&tmp.path().join(format!("{id}.pfm")), &d).map_err(|e| e.to_string())?;
        io::write_print(&tmp.path().join(format!("{id}_gt.png")), &g).map_err(|e| e.to_string())?;
        io::write_mask(&tmp.path().join(format!("{id}_mask.png")), &m).map_err(|e| e.to_string())?;
        entries.push(ManifestEntry {
            shoe_id: id.clone(),
            category: Category::ALL[i % 3],
            image_path: format!("{id}_gt.png").into(),
            mask_path: Some(format!("{id}_mask.png").into()),
            gt_print_path: Some(format!("{id}_gt.png").into()),
            depth_path: Some(format!("{id}.pfm").into()),
            albedo_path: None,
            light: None,
        });
    }
    let manifest = tmp.path().join("eval.jsonl");
    io::write_manifest(&manifest, &entries).map_err(|e| e.to_string())?;
    let args = EvalArgs {
        manifest,
        report: tmp.path().join("report.csv"),
        normalize: false,
        window: DEFAULT_WINDOW,
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(8).build().map_err(|e| e.to_string())?;
    let start = Instant::now();
    let outcome = pool.install(|| cmd_eval(&args)).map_err(|e| e.to_string())?;
    let all = start.elapsed();
    ensure!(outcome.rows.iter().all(|r| r.error.is_none()), "some rows failed");
    ensure!(outcome.summary.map(|s| s.count) == Some(36), "summary does not cover 36 shoes");
    ensure!(all < Duration::from_secs(30), "36-shoe evaluation took {all:?}");
    Ok(format!("405x765 best_match {one:.2?} on 1 thread, 36 shoes {all:.2?} on 8 threads"))
}

// ----------------------------------------------------------------

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("aggregation fixtures", criterion_1),
        ("metric oracle equivalence", criterion_2),
        ("stage-1 scale invariance", criterion_3),
        ("distance transform brute force", criterion_4),
        ("thin-plate spline", criterion_5),
        ("augmentation round trip", criterion_6),
        ("pseudo albedo", criterion_7),
        ("synthesis determinism", criterion_8),
        ("renderer sanity", criterion_9),
        ("performance", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("[PASS] criterion {}: {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("[FAIL] criterion {}: {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
