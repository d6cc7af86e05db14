//! Accuracy evaluation on synthetic cross-modal pairs with known transforms.
//!
//! A base image is warped by a planted transform, pushed through a photometric
//! "modality" model, and both bands get independent Gaussian noise. Both are
//! cropped to the region where the warp had full support, so fill values never
//! reach the detector. Registration output is scored by the Euclidean distance
//! between estimated and planted translation components.

mod synth;

pub use synth::{natural_color, natural_texture};

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::edges::EdgeMap;
use crate::error::{Error, Result};
use crate::raster::{warp_affine, write_atomic, GrayImage, Plane};
use crate::registration::{register, RegistrationConfig};
use crate::transform::{AffineTransform, Point};

/// Photometric map applied to the second band.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Modality {
    Identity,
    /// `1 - v`
    Invert,
    /// `v^gamma`
    Gamma(f64),
    /// `(1 - v)^gamma`
    InvertGamma(f64),
}

impl Modality {
    #[inline]
    pub fn apply(self, v: f32) -> f32 {
        let v = v as f64;
        let out = match self {
            Modality::Identity => v,
            Modality::Invert => 1.0 - v,
            Modality::Gamma(g) => v.max(0.0).powf(g),
            Modality::InvertGamma(g) => (1.0 - v).max(0.0).powf(g),
        };
        out as f32
    }

    pub fn gamma(self) -> Option<f64> {
        match self {
            Modality::Gamma(g) | Modality::InvertGamma(g) => Some(g),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Modality::Identity => "identity",
            Modality::Invert => "invert",
            Modality::Gamma(_) => "gamma",
            Modality::InvertGamma(_) => "invert_gamma",
        }
    }

    /// Parse a modality name; `gamma` is used by the gamma variants.
    pub fn parse(name: &str, gamma: f64) -> Result<Self> {
        match name.trim().to_ascii_lowercase().replace('+', "_").as_str() {
            "identity" => Ok(Modality::Identity),
            "invert" => Ok(Modality::Invert),
            "gamma" => Ok(Modality::Gamma(gamma)),
            "invert_gamma" => Ok(Modality::InvertGamma(gamma)),
            other => Err(Error::param(format!(
                "unknown modality {other:?} (expected identity, invert, gamma or invert_gamma)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationSpec {
    /// Planted translations are uniform in `[-range, range]` on each axis.
    pub translation_range: f64,
    /// Planted scale factors, one block of `trials` per entry.
    pub scales: Vec<f64>,
    pub modality: Modality,
    pub noise_sigma: f64,
    pub trials: usize,
    pub rng_seed: u64,
    /// Draw integer translations only.
    pub integer_translation: bool,
}

impl Default for SimulationSpec {
    fn default() -> Self {
        SimulationSpec {
            translation_range: 20.0,
            scales: vec![1.0],
            modality: Modality::InvertGamma(2.2),
            noise_sigma: 0.02,
            trials: 20,
            rng_seed: 0xACC,
            integer_translation: false,
        }
    }
}

impl SimulationSpec {
    /// The five-point scale sweep from 0.90 to 1.10.
    pub fn scale_sweep() -> Vec<f64> {
        vec![0.90, 0.95, 1.00, 1.05, 1.10]
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::param("sim.trials must be >= 1"));
        }
        if !(self.translation_range >= 0.0) || !self.translation_range.is_finite() {
            return Err(Error::param(format!(
                "sim.translation_range must be finite and >= 0, got {}",
                self.translation_range
            )));
        }
        if self.scales.is_empty() || self.scales.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
            return Err(Error::param("sim.scales must be a non-empty list of positive numbers"));
        }
        if let Some(g) = self.modality.gamma() {
            if !(g > 0.0) {
                return Err(Error::param(format!("sim.gamma must be positive, got {g}")));
            }
        }
        if !(self.noise_sigma >= 0.0) {
            return Err(Error::param(format!(
                "sim.noise_sigma must be >= 0, got {}",
                self.noise_sigma
            )));
        }
        Ok(())
    }
}

/// A simulated pair in its cropped frame.
#[derive(Clone, Debug, PartialEq)]
pub struct SimulatedPair {
    pub img_v: GrayImage,
    pub img_ir: GrayImage,
    /// Planted visible-to-IR transform expressed in the cropped frame.
    pub t_true: AffineTransform,
    /// Top-left corner of the crop in the base frame.
    pub crop_origin: (usize, usize),
}

/// Minimum side of the common valid region.
pub const MIN_VALID_SIDE: usize = 64;

// Largest-ish axis-aligned rectangle whose pixels all have full bilinear support,
// found by peeling off the border side with the most invalid pixels.
fn valid_rect(mask: &[bool], w: usize, h: usize) -> Option<(usize, usize, usize, usize)> {
    let (mut x0, mut y0, mut x1, mut y1) = (0usize, 0usize, w, h);
    loop {
        if x1 <= x0 || y1 <= y0 {
            return None;
        }
        let bad = |x: usize, y: usize| !mask[y * w + x];
        let top = (x0..x1).filter(|&x| bad(x, y0)).count();
        let bottom = (x0..x1).filter(|&x| bad(x, y1 - 1)).count();
        let left = (y0..y1).filter(|&y| bad(x0, y)).count();
        let right = (y0..y1).filter(|&y| bad(x1 - 1, y)).count();
        let worst = top.max(bottom).max(left).max(right);
        if worst == 0 {
            return Some((x0, y0, x1 - x0, y1 - y0));
        }
        if worst == top {
            y0 += 1;
        } else if worst == bottom {
            y1 -= 1;
        } else if worst == left {
            x0 += 1;
        } else {
            x1 -= 1;
        }
    }
}

/// Warp `base` by `t_true`, apply the modality, add noise, and crop both bands
/// to the common valid region.
pub fn simulate_pair(
    base: &GrayImage,
    t_true: &AffineTransform,
    modality: Modality,
    noise_sigma: f64,
    rng: &mut impl Rng,
) -> Result<SimulatedPair> {
    let (w, h) = base.dimensions();
    let warped = warp_affine(base, t_true, w, h, f32::NAN)?;
    let mask: Vec<bool> = warped.data().iter().map(|v| !v.is_nan()).collect();
    let (x0, y0, cw, ch) = valid_rect(&mask, w, h)
        .filter(|&(_, _, cw, ch)| cw >= MIN_VALID_SIDE && ch >= MIN_VALID_SIDE)
        .ok_or_else(|| {
            Error::param(format!(
                "common valid region under the planted transform is smaller than {MIN_VALID_SIDE}x{MIN_VALID_SIDE}"
            ))
        })?;

    let noise = if noise_sigma > 0.0 {
        Some(Normal::new(0.0, noise_sigma).map_err(|e| Error::param(e.to_string()))?)
    } else {
        None
    };
    let noisy = |v: f32, rng: &mut dyn rand::RngCore| -> f32 {
        match &noise {
            Some(n) => (v as f64 + n.sample(rng)).clamp(0.0, 1.0) as f32,
            None => v,
        }
    };
    let crop_v = base.crop(x0, y0, cw, ch)?;
    let crop_ir = warped.crop(x0, y0, cw, ch)?;
    let img_v = Plane::from_vec(cw, ch, crop_v.data().iter().map(|&v| noisy(v, rng)).collect())?;
    let img_ir = Plane::from_vec(
        cw,
        ch,
        crop_ir.data().iter().map(|&v| noisy(modality.apply(v), rng)).collect(),
    )?;

    // In crop coordinates: p_base = p + o, so T' = shift(-o) . T . shift(o).
    let o = AffineTransform::translation(x0 as f64, y0 as f64);
    let back = AffineTransform::translation(-(x0 as f64), -(y0 as f64));
    let local = back.compose(&t_true.compose(&o));
    let t_local = AffineTransform::with_kind(local.matrix(), t_true.kind()).unwrap_or(local);
    Ok(SimulatedPair {
        img_v,
        img_ir,
        t_true: t_local,
        crop_origin: (x0, y0),
    })
}

/// Euclidean distance between translation components.
pub fn translation_error(t_est: &AffineTransform, t_true: &AffineTransform) -> f64 {
    (t_est.tx() - t_true.tx()).hypot(t_est.ty() - t_true.ty())
}

/// Exhaustive integer shift maximizing edge overlap `sum e_v(x) & e_ir(x + d)`.
///
/// Ties go to the smallest `|d|`, then to the smallest `(dy, dx)`.
pub fn brute_force_translation(edge_v: &EdgeMap, edge_ir: &EdgeMap, range: usize) -> AffineTransform {
    let (wv, hv) = (edge_v.width(), edge_v.height());
    let (wi, hi) = (edge_ir.width() as isize, edge_ir.height() as isize);
    let pixels: Vec<(isize, isize)> = (0..hv)
        .flat_map(|y| (0..wv).map(move |x| (x, y)))
        .filter(|&(x, y)| edge_v.is_edge(x, y))
        .map(|(x, y)| (x as isize, y as isize))
        .collect();
    let r = range as isize;
    let mut best = (0usize, 0isize, 0isize);
    let mut have = false;
    for dy in -r..=r {
        for dx in -r..=r {
            let count = pixels
                .iter()
                .filter(|&&(x, y)| {
                    let (tx, ty) = (x + dx, y + dy);
                    tx >= 0 && ty >= 0 && tx < wi && ty < hi && edge_ir.is_edge(tx as usize, ty as usize)
                })
                .count();
            let better = !have
                || count > best.0
                || (count == best.0 && {
                    let (n_new, n_old) = (dx * dx + dy * dy, best.1 * best.1 + best.2 * best.2);
                    n_new < n_old || (n_new == n_old && (dy, dx) < (best.2, best.1))
                });
            if better {
                best = (count, dx, dy);
                have = true;
            }
        }
    }
    AffineTransform::translation(best.1 as f64, best.2 as f64)
}

/// What a registrar reports for one pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub transform: AffineTransform,
    pub support: usize,
}

/// Registrar backed by the full pipeline.
pub fn pipeline_registrar(cfg: RegistrationConfig) -> impl Fn(&SimulatedPair) -> Result<Estimate> + Sync {
    move |pair| {
        let r = register(&pair.img_v, &pair.img_ir, &cfg)?;
        Ok(Estimate {
            transform: r.t3,
            support: r.support,
        })
    }
}

/// Registrar that returns the planted transform; checks the harness itself.
pub fn oracle_registrar(pair: &SimulatedPair) -> Result<Estimate> {
    Ok(Estimate {
        transform: pair.t_true,
        support: 0,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum TrialStatus {
    Ok,
    Failed(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialRow {
    pub trial: usize,
    pub scale: f64,
    pub t_true: AffineTransform,
    pub t_est: Option<AffineTransform>,
    pub error_px: Option<f64>,
    pub support: usize,
    pub status: TrialStatus,
}

impl TrialRow {
    /// `|scale(est) - scale(true)|` when the trial succeeded.
    pub fn scale_error(&self) -> Option<f64> {
        self.t_est.map(|t| (t.scale() - self.t_true.scale()).abs())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScaleSummary {
    pub scale: f64,
    pub trials: usize,
    pub failures: usize,
    pub mean_error: f64,
    pub median_error: f64,
    pub max_error: f64,
    pub max_scale_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AccuracyReport {
    pub rows: Vec<TrialRow>,
    pub mean: f64,
    pub median: f64,
    pub max: f64,
    pub failures: usize,
    pub per_scale: Vec<ScaleSummary>,
}

fn stats(errors: &[f64]) -> (f64, f64, f64) {
    if errors.is_empty() {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    let mut sorted = errors.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mean = sorted.iter().sum::<f64>() / n as f64;
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    (mean, median, sorted[n - 1])
}

impl AccuracyReport {
    pub fn from_rows(rows: Vec<TrialRow>) -> Self {
        let errors: Vec<f64> = rows.iter().filter_map(|r| r.error_px).collect();
        let (mean, median, max) = stats(&errors);
        let failures = rows.iter().filter(|r| r.status != TrialStatus::Ok).count();
        let mut scales: Vec<f64> = Vec::new();
        for r in &rows {
            if !scales.contains(&r.scale) {
                scales.push(r.scale);
            }
        }
        let per_scale = scales
            .into_iter()
            .map(|s| {
                let sel: Vec<&TrialRow> = rows.iter().filter(|r| r.scale == s).collect();
                let errs: Vec<f64> = sel.iter().filter_map(|r| r.error_px).collect();
                let (mean_error, median_error, max_error) = stats(&errs);
                ScaleSummary {
                    scale: s,
                    trials: sel.len(),
                    failures: sel.iter().filter(|r| r.status != TrialStatus::Ok).count(),
                    mean_error,
                    median_error,
                    max_error,
                    max_scale_error: sel.iter().filter_map(|r| r.scale_error()).fold(0.0, f64::max),
                }
            })
            .collect();
        AccuracyReport {
            rows,
            mean,
            median,
            max,
            failures,
            per_scale,
        }
    }

    /// `trial,scale,tx_true,ty_true,tx_est,ty_est,error_px,support,status` with a header; LF endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("trial,scale,tx_true,ty_true,tx_est,ty_est,error_px,support,status\n");
        for r in &self.rows {
            let (tx_est, ty_est) = match r.t_est {
                Some(t) => (format!("{:.6}", t.tx()), format!("{:.6}", t.ty())),
                None => (String::new(), String::new()),
            };
            let err = r.error_px.map(|e| format!("{e:.6}")).unwrap_or_default();
            let status = match &r.status {
                TrialStatus::Ok => "ok",
                TrialStatus::Failed(_) => "failed",
            };
            let _ = writeln!(
                out,
                "{},{:.4},{:.6},{:.6},{},{},{},{},{}",
                r.trial,
                r.scale,
                r.t_true.tx(),
                r.t_true.ty(),
                tx_est,
                ty_est,
                err,
                r.support,
                status
            );
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path.as_ref(), self.to_csv().as_bytes())
    }
}

/// Planted transform: scale `s` about the image centre, then translate by `(tx, ty)`.
pub fn planted_transform(width: usize, height: usize, scale: f64, tx: f64, ty: f64) -> AffineTransform {
    let c = Point::new((width as f64 - 1.0) / 2.0, (height as f64 - 1.0) / 2.0);
    if scale == 1.0 {
        return AffineTransform::translation(tx, ty);
    }
    AffineTransform::similarity(scale, 0.0, c.x - scale * c.x + tx, c.y - scale * c.y + ty)
}

/// Run every (scale, trial) combination; failures are recorded, not fatal.
///
/// Trial `i` (counted across scale blocks) draws its planted translation and
/// noise from a ChaCha8 stream seeded with `rng_seed + i` and uses base image
/// `i mod bases.len()`. Rows come back in trial order.
pub fn run_benchmark<F>(bases: &[GrayImage], spec: &SimulationSpec, registrar: F) -> Result<AccuracyReport>
where
    F: Fn(&SimulatedPair) -> Result<Estimate> + Sync,
{
    spec.validate()?;
    if bases.is_empty() {
        return Err(Error::param("benchmark needs at least one base image"));
    }
    let jobs: Vec<(usize, f64)> = spec
        .scales
        .iter()
        .flat_map(|&s| std::iter::repeat_n(s, spec.trials))
        .enumerate()
        .collect();
    let rows: Vec<TrialRow> = jobs
        .par_iter()
        .map(|&(trial, scale)| -> Result<TrialRow> {
            let base = &bases[trial % bases.len()];
            let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed.wrapping_add(trial as u64));
            let r = spec.translation_range;
            let draw = |rng: &mut ChaCha8Rng| {
                let v = if r > 0.0 { rng.random_range(-r..=r) } else { 0.0 };
                if spec.integer_translation { v.round() } else { v }
            };
            let (tx, ty) = (draw(&mut rng), draw(&mut rng));
            let planted = planted_transform(base.width(), base.height(), scale, tx, ty);
            let pair = simulate_pair(base, &planted, spec.modality, spec.noise_sigma, &mut rng)?;
            Ok(match registrar(&pair) {
                Ok(est) => TrialRow {
                    trial,
                    scale,
                    t_true: pair.t_true,
                    t_est: Some(est.transform),
                    error_px: Some(translation_error(&est.transform, &pair.t_true)),
                    support: est.support,
                    status: TrialStatus::Ok,
                },
                Err(e) => TrialRow {
                    trial,
                    scale,
                    t_true: pair.t_true,
                    t_est: None,
                    error_px: None,
                    support: 0,
                    status: TrialStatus::Failed(e.to_string()),
                },
            })
        })
        .collect::<Result<_>>()?;
    Ok(AccuracyReport::from_rows(rows))
}

/// Load every `.png`, `.pgm` and `.ppm` in `dir` (sorted by name) as a gray image.
pub fn load_dataset(dir: impl AsRef<Path>) -> Result<Vec<GrayImage>> {
    let dir = dir.as_ref();
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| matches!(e.to_ascii_lowercase().as_str(), "png" | "pgm" | "ppm"))
        })
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::param(format!("no images found in {}", dir.display())));
    }
    paths
        .iter()
        .map(|p| crate::raster::read_image(p).map(|img| img.to_gray()))
        .collect()
}

impl FromStr for Modality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Modality::parse(s, 2.2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edges::{canny, CannyConfig};

    fn base() -> GrayImage {
        synth::natural_texture(128, 112, 3)
    }

    #[test]
    fn identity_simulation_is_exact() {
        let b = base();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = simulate_pair(&b, &AffineTransform::identity(), Modality::Identity, 0.0, &mut rng).unwrap();
        assert_eq!(p.img_v, b);
        assert_eq!(p.img_ir, b);
        assert_eq!(p.crop_origin, (0, 0));
    }

    #[test]
    fn invert_simulation() {
        let b = base();
        let t = AffineTransform::translation(5.0, -3.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = simulate_pair(&b, &t, Modality::Invert, 0.0, &mut rng).unwrap();
        let warped = warp_affine(&b, &t, 128, 112, 0.0).unwrap();
        let (x0, y0) = p.crop_origin;
        assert_eq!((x0, y0), (5, 0));
        assert_eq!(p.img_ir.dimensions(), (123, 109));
        for y in 0..p.img_ir.height() {
            for x in 0..p.img_ir.width() {
                assert_eq!(p.img_ir.get(x, y), 1.0 - warped.get(x + x0, y + y0));
            }
        }
        assert_eq!(p.t_true, t);
    }

    #[test]
    fn gamma_on_ramp() {
        let ramp = GrayImage::from_fn(100, 100, |x, _| x as f32 / 99.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = simulate_pair(&ramp, &AffineTransform::identity(), Modality::Gamma(2.2), 0.0, &mut rng).unwrap();
        for x in 0..100 {
            let expect = (x as f64 / 99.0).powf(2.2);
            assert!((p.img_ir.get(x, 50) as f64 - expect).abs() < 1e-6);
        }
    }

    #[test]
    fn cropped_frame_transform_is_consistent() {
        let b = base();
        let t = planted_transform(128, 112, 1.08, 2.5, -1.5);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = simulate_pair(&b, &t, Modality::Identity, 0.0, &mut rng).unwrap();
        let (ox, oy) = (p.crop_origin.0 as f64, p.crop_origin.1 as f64);
        // A crop-frame point maps the same way as its base-frame counterpart.
        let q = Point::new(10.0, 20.0);
        let via_base = t.apply(Point::new(q.x + ox, q.y + oy));
        let via_crop = p.t_true.apply(q);
        assert!((via_base.x - ox - via_crop.x).abs() < 1e-9);
        assert!((via_base.y - oy - via_crop.y).abs() < 1e-9);
        // Every cropped IR pixel had full support.
        assert!(p.img_ir.data().iter().all(|v| !v.is_nan()));
    }

    #[test]
    fn too_small_valid_region() {
        let small = GrayImage::filled(70, 70, 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r = simulate_pair(&small, &AffineTransform::translation(10.0, 0.0), Modality::Identity, 0.0, &mut rng);
        assert!(matches!(r, Err(Error::Parameter(_))));
    }

    #[test]
    fn translation_error_cases() {
        let a = AffineTransform::translation(3.0, 4.0);
        assert_eq!(translation_error(&a, &a), 0.0);
        assert_eq!(translation_error(&a, &AffineTransform::identity()), 5.0);
        let e = translation_error(&AffineTransform::translation(7.2, -2.6), &AffineTransform::translation(7.0, -3.0));
        assert!((e - 0.2f64.sqrt()).abs() < 1e-12);
    }

    fn shift_edges(e: &EdgeMap, dx: isize, dy: isize) -> EdgeMap {
        let (w, h) = (e.width(), e.height());
        let mut out = vec![0u8; w * h];
        for y in 0..h as isize {
            for x in 0..w as isize {
                let (sx, sy) = (x - dx, y - dy);
                if sx >= 0 && sy >= 0 && sx < w as isize && sy < h as isize {
                    out[(y as usize) * w + x as usize] = e.edges()[sy as usize * w + sx as usize];
                }
            }
        }
        EdgeMap::from_parts(w, h, out, e.directions().to_vec(), e.bins()).unwrap()
    }

    #[test]
    fn brute_force_finds_planted_shift() {
        let e = canny(&base(), &CannyConfig::default()).unwrap();
        assert_eq!(brute_force_translation(&e, &e, 6), AffineTransform::translation(0.0, 0.0));
        let shifted = shift_edges(&e, 3, -2);
        assert_eq!(brute_force_translation(&e, &shifted, 6), AffineTransform::translation(3.0, -2.0));

        // 10% of pixels flipped.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let noisy: Vec<u8> = shifted
            .edges()
            .iter()
            .map(|&v| if rng.random::<f64>() < 0.1 { 1 - v } else { v })
            .collect();
        let noisy = EdgeMap::from_parts(e.width(), e.height(), noisy, e.directions().to_vec(), 16).unwrap();
        let t = brute_force_translation(&e, &noisy, 6);
        assert!(translation_error(&t, &AffineTransform::translation(3.0, -2.0)) <= 1.0);
    }

    #[test]
    fn oracle_harness_has_zero_error() {
        let spec = SimulationSpec { trials: 6, ..SimulationSpec::default() };
        let report = run_benchmark(&[synth::natural_texture(160, 160, 1)], &spec, oracle_registrar).unwrap();
        assert_eq!(report.rows.len(), 6);
        assert_eq!(report.failures, 0);
        assert_eq!(report.mean, 0.0);
        let csv = report.to_csv();
        assert_eq!(csv.lines().count(), 7);
        assert!(csv.starts_with("trial,scale,tx_true,ty_true,tx_est,ty_est,error_px,support,status\n"));
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn failures_are_recorded() {
        let spec = SimulationSpec { trials: 3, ..SimulationSpec::default() };
        let report = run_benchmark(&[synth::natural_texture(160, 160, 1)], &spec, |_| {
            Err(Error::registration("test", "always fails"))
        })
        .unwrap();
        assert_eq!(report.failures, 3);
        assert!(report.to_csv().lines().skip(1).all(|l| l.ends_with(",0,failed")));
    }

    #[test]
    fn mean_recomputable_from_rows() {
        let spec = SimulationSpec { trials: 5, scales: vec![1.0, 1.05], ..SimulationSpec::default() };
        let report = run_benchmark(&[synth::natural_texture(160, 160, 2)], &spec, |p| {
            Ok(Estimate {
                transform: AffineTransform::translation(p.t_true.tx() + 0.5, p.t_true.ty()),
                support: 1,
            })
        })
        .unwrap();
        assert_eq!(report.rows.len(), 10);
        let mean = report.rows.iter().filter_map(|r| r.error_px).sum::<f64>() / 10.0;
        assert!((report.mean - mean).abs() < 1e-12);
        assert_eq!(report.per_scale.len(), 2);
    }

    #[test]
    fn modality_parse() {
        assert_eq!(Modality::parse("invert+gamma", 2.2).unwrap(), Modality::InvertGamma(2.2));
        assert!(Modality::parse("thermal", 1.0).is_err());
    }
}
