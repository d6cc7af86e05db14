//! Cross-spectral registration: corner matching with edge descriptors and a
//! three-round RANSAC that tightens its gates and thresholds each round.
//!
//! Round 1 matches every visible corner against every IR corner and runs
//! RANSAC with `rd1`. Round 2 only admits pairs within `md1` pixels of where
//! round 1's transform sends the visible corner, again with `rd1`. Round 3
//! gates with `md2` around round 2's transform and uses `rd2`. The transform
//! maps visible-image coordinates to IR-image coordinates.

mod fit;
mod ransac;
mod record;

pub use fit::{fit_least_squares, fit_points};
pub use ransac::{ransac_once, ransac_points, RansacOutcome};
pub use record::{read_transform, write_transform_json, write_transform_text, TransformRecord};

use rayon::prelude::*;

use crate::descriptor::{best_match, describe_corners, EdgeDescriptor, Gate, MatchOptions, Polarity};
use crate::edges::{canny, CannyConfig, EdgeMap};
use crate::error::{Error, Result};
use crate::features::{harris_corners, HarrisConfig};
use crate::raster::GrayImage;
use crate::transform::{AffineTransform, ModelKind, Point};

/// A visible corner `p` paired with IR corner `q`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Match {
    pub p: usize,
    pub q: usize,
    pub score: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RansacConfig {
    pub model: ModelKind,
    pub samples_per_iter: usize,
    /// Inlier distance for rounds 1 and 2.
    pub rd1: f64,
    /// Inlier distance for round 3.
    pub rd2: f64,
    /// Match gate for round 2.
    pub md1: f64,
    /// Match gate for round 3.
    pub md2: f64,
    pub rng_seed: u64,
}

impl Default for RansacConfig {
    fn default() -> Self {
        RansacConfig {
            model: ModelKind::Translation,
            samples_per_iter: 1000,
            rd1: 5.0,
            rd2: 2.0,
            md1: 15.0,
            md2: 5.0,
            rng_seed: 0x5eed,
        }
    }
}

impl RansacConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples_per_iter == 0 {
            return Err(Error::param("ransac.samples must be >= 1"));
        }
        let positive = [("ransac.rd1", self.rd1), ("ransac.rd2", self.rd2), ("ransac.md1", self.md1), ("ransac.md2", self.md2)];
        for (name, v) in positive {
            if !(v > 0.0) || v.is_nan() {
                return Err(Error::param(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.rd2 < self.rd1) {
            return Err(Error::param(format!(
                "ransac.rd2 ({}) must be below ransac.rd1 ({})",
                self.rd2, self.rd1
            )));
        }
        if !(self.md2 < self.md1) {
            return Err(Error::param(format!(
                "ransac.md2 ({}) must be below ransac.md1 ({})",
                self.md2, self.md1
            )));
        }
        Ok(())
    }
}

/// Everything `register` needs besides the two images.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegistrationConfig {
    pub harris: HarrisConfig,
    pub canny: CannyConfig,
    /// Descriptor window side `w2` (odd).
    pub window: usize,
    pub matching: MatchOptions,
    pub ransac: RansacConfig,
}

impl Default for RegistrationConfig {
    fn default() -> Self {
        RegistrationConfig {
            harris: HarrisConfig::default(),
            canny: CannyConfig::default(),
            window: crate::descriptor::DEFAULT_WINDOW,
            // Cross-band pairs routinely reverse contrast (hot objects on cold sky).
            matching: MatchOptions {
                polarity: Polarity::Either,
                ..MatchOptions::default()
            },
            ransac: RansacConfig::default(),
        }
    }
}

impl RegistrationConfig {
    pub fn validate(&self) -> Result<()> {
        self.harris.validate()?;
        self.canny.validate()?;
        if self.window < 5 || self.window.is_multiple_of(2) {
            return Err(Error::param(format!(
                "descriptor.window must be odd and >= 5, got {}",
                self.window
            )));
        }
        self.ransac.validate()
    }
}

/// Corners and descriptors extracted from one image.
#[derive(Clone, Debug)]
pub struct ImageFeatures {
    pub edges: EdgeMap,
    pub descriptors: Vec<EdgeDescriptor>,
}

impl ImageFeatures {
    pub fn extract(img: &GrayImage, cfg: &RegistrationConfig) -> Result<Self> {
        let corners = harris_corners(img, &cfg.harris)?;
        let edges = canny(img, &cfg.canny)?;
        let descriptors = describe_corners(&corners, &edges, cfg.window)?;
        Ok(ImageFeatures { edges, descriptors })
    }

    pub fn points(&self) -> Vec<Point> {
        self.descriptors.iter().map(EdgeDescriptor::position).collect()
    }
}

/// Best IR partner for every visible descriptor, sorted by descending score.
pub fn match_all(
    desc_v: &[EdgeDescriptor],
    desc_ir: &[EdgeDescriptor],
    gate: Option<&Gate>,
    opts: &MatchOptions,
) -> Result<Vec<Match>> {
    if desc_v.is_empty() || desc_ir.is_empty() {
        return Err(Error::param("match_all needs descriptors in both images"));
    }
    let found: Vec<Option<Match>> = desc_v
        .par_iter()
        .enumerate()
        .map(|(p, dp)| {
            best_match(dp, desc_ir, gate, opts).map(|m| m.map(|(q, score)| Match { p, q, score }))
        })
        .collect::<Result<_>>()?;
    let mut matches: Vec<Match> = found.into_iter().flatten().collect();
    matches.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.p.cmp(&b.p)));
    Ok(matches)
}

/// `|T (x_p, y_p) - (x_q, y_q)|`.
#[inline]
pub fn residual(t: &AffineTransform, m: &Match, points_v: &[Point], points_ir: &[Point]) -> f64 {
    t.apply(points_v[m.p]).distance(points_ir[m.q])
}

/// Transform and support reached by one round.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub transform: AffineTransform,
    pub support: usize,
    pub match_count: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegistrationResult {
    /// Final visible-to-IR transform.
    pub t3: AffineTransform,
    /// Round-3 matches that agree with `t3` within `rd2`.
    pub inliers: Vec<Match>,
    pub support: usize,
    pub per_iteration: [IterationRecord; 3],
    pub corners_v: usize,
    pub corners_ir: usize,
    /// Corner positions the match indices refer to.
    pub points_v: Vec<Point>,
    pub points_ir: Vec<Point>,
}

/// Support below this fraction of round-1 matches marks a result as low confidence.
pub const LOW_CONFIDENCE_RATIO: f64 = 0.1;

impl RegistrationResult {
    /// Final support relative to the number of round-1 matches.
    pub fn inlier_ratio(&self) -> f64 {
        let m1 = self.per_iteration[0].match_count;
        if m1 == 0 {
            0.0
        } else {
            self.support as f64 / m1 as f64
        }
    }

    pub fn is_low_confidence(&self) -> bool {
        self.inlier_ratio() < LOW_CONFIDENCE_RATIO
    }
}

/// Minimum side length accepted by [`register`].
pub const MIN_REGISTER_SIDE: usize = 64;
const MIN_DESCRIPTORS: usize = 4;

/// Register `img_ir` against `img_v`; the result maps visible pixels onto IR pixels.
pub fn register(img_v: &GrayImage, img_ir: &GrayImage, cfg: &RegistrationConfig) -> Result<RegistrationResult> {
    cfg.validate()?;
    for (name, img) in [("visible", img_v), ("ir", img_ir)] {
        let (w, h) = img.dimensions();
        if w < MIN_REGISTER_SIDE || h < MIN_REGISTER_SIDE {
            return Err(Error::param(format!(
                "{name} image is {w}x{h}; registration needs at least {MIN_REGISTER_SIDE}x{MIN_REGISTER_SIDE}"
            )));
        }
    }
    let (fv, fir) = rayon::join(
        || ImageFeatures::extract(img_v, cfg),
        || ImageFeatures::extract(img_ir, cfg),
    );
    register_features(&fv?, &fir?, cfg)
}

/// The three RANSAC rounds on precomputed features.
pub fn register_features(
    fv: &ImageFeatures,
    fir: &ImageFeatures,
    cfg: &RegistrationConfig,
) -> Result<RegistrationResult> {
    cfg.validate()?;
    for (name, f) in [("visible", fv), ("ir", fir)] {
        if f.descriptors.len() < MIN_DESCRIPTORS {
            return Err(Error::registration(
                format!("feature extraction ({name})"),
                format!(
                    "{} usable corners, need at least {MIN_DESCRIPTORS}",
                    f.descriptors.len()
                ),
            ));
        }
    }
    let pv = fv.points();
    let pir = fir.points();
    let rc = &cfg.ransac;
    let min_sample = rc.model.minimal_sample();

    let rounds: [(Option<f64>, f64); 3] = [(None, rc.rd1), (Some(rc.md1), rc.rd1), (Some(rc.md2), rc.rd2)];
    let mut prev: Option<AffineTransform> = None;
    let mut records = Vec::with_capacity(3);
    let mut last: Option<(Vec<Match>, RansacOutcome)> = None;
    for (i, (md, rd)) in rounds.into_iter().enumerate() {
        let stage = format!("iteration {}", i + 1);
        let gate = match (md, prev) {
            (Some(d), Some(t)) => Some(Gate::new(t, d)),
            _ => None,
        };
        let matches = match_all(&fv.descriptors, &fir.descriptors, gate.as_ref(), &cfg.matching)?;
        if matches.len() < min_sample {
            return Err(Error::registration(
                stage,
                format!("{} matches, {} needs at least {min_sample}", matches.len(), rc.model),
            ));
        }
        let outcome = ransac_once(&matches, &pv, &pir, rc, rd, rc.rng_seed.wrapping_add(i as u64))
            .map_err(|e| match e {
                Error::Registration { message, .. } => Error::registration(format!("iteration {}", i + 1), message),
                other => other,
            })?;
        records.push(IterationRecord {
            transform: outcome.transform,
            support: outcome.support,
            match_count: matches.len(),
        });
        prev = Some(outcome.transform);
        last = Some((matches, outcome));
    }
    let (matches, outcome) = last.expect("three rounds ran");
    let inliers: Vec<Match> = outcome.inliers.iter().map(|&i| matches[i]).collect();
    let per_iteration: [IterationRecord; 3] = records.try_into().expect("three rounds ran");
    Ok(RegistrationResult {
        t3: outcome.transform,
        support: inliers.len(),
        inliers,
        per_iteration,
        corners_v: fv.descriptors.len(),
        corners_ir: fir.descriptors.len(),
        points_v: pv,
        points_ir: pir,
    })
}
