//! Harris corner detection with windowed non-maximum suppression.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::raster::{gaussian_blur_f64, gradients, GrayImage, Plane};
use crate::transform::Point;

/// Signed Harris response per pixel.
pub type ScoreMap = Plane<f64>;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HarrisConfig {
    /// Sensitivity `k` in `det(A) - k trace(A)^2`.
    pub k: f64,
    /// Standard deviation of the Gaussian window that weights the structure tensor.
    pub window_sigma: f64,
    /// Side of the square non-maximum-suppression window (odd).
    pub nms_window: usize,
    pub max_corners: usize,
    /// Scores below `min_score * max(S)` are discarded.
    pub min_score: f64,
}

impl Default for HarrisConfig {
    fn default() -> Self {
        HarrisConfig {
            k: 0.04,
            window_sigma: 1.5,
            nms_window: 7,
            max_corners: 400,
            min_score: 0.01,
        }
    }
}

impl HarrisConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.k > 0.0 && self.k < 0.25) {
            return Err(Error::param(format!("harris.k must be in (0, 0.25), got {}", self.k)));
        }
        if !(self.window_sigma > 0.0) {
            return Err(Error::param(format!(
                "harris.window_sigma must be positive, got {}",
                self.window_sigma
            )));
        }
        if self.nms_window < 3 || self.nms_window.is_multiple_of(2) {
            return Err(Error::param(format!(
                "harris.nms_window must be odd and >= 3, got {}",
                self.nms_window
            )));
        }
        if self.max_corners < 4 {
            return Err(Error::param(format!(
                "harris.max_corners must be >= 4, got {}",
                self.max_corners
            )));
        }
        if !(0.0..=1.0).contains(&self.min_score) {
            return Err(Error::param(format!(
                "harris.min_score must be in [0, 1], got {}",
                self.min_score
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Corner {
    pub x: usize,
    pub y: usize,
    pub score: f64,
}

impl Corner {
    pub fn position(&self) -> Point {
        Point::new(self.x as f64, self.y as f64)
    }
}

/// Per-pixel `det(A) - k trace(A)^2` of the Gaussian-weighted structure tensor
/// `A = sum w [Ix^2, IxIy; IxIy, Iy^2]`.
pub fn harris_score_map(img: &GrayImage, cfg: &HarrisConfig) -> Result<ScoreMap> {
    cfg.validate()?;
    let g = gradients(img)?;
    let (w, h) = img.dimensions();
    let n = w * h;
    let mut xx = Vec::with_capacity(n);
    let mut yy = Vec::with_capacity(n);
    let mut xy = Vec::with_capacity(n);
    for (&gx, &gy) in g.ix.data().iter().zip(g.iy.data()) {
        let (gx, gy) = (gx as f64, gy as f64);
        xx.push(gx * gx);
        yy.push(gy * gy);
        xy.push(gx * gy);
    }
    let blur = |v: Vec<f64>| gaussian_blur_f64(&Plane::from_vec(w, h, v)?, cfg.window_sigma);
    let (axx, ayy, axy) = (blur(xx)?, blur(yy)?, blur(xy)?);
    let data = axx
        .data()
        .iter()
        .zip(ayy.data())
        .zip(axy.data())
        .map(|((&a, &c), &b)| {
            let trace = a + c;
            (a * c - b * b) - cfg.k * trace * trace
        })
        .collect();
    Plane::from_vec(w, h, data)
}

/// Strict local maxima of `score` over `nms_window`², thresholded and capped.
///
/// Equal scores inside one window resolve to the pixel with the smallest
/// row-major index. Output is sorted by descending score (row-major index
/// breaks ties) and truncated to `max_corners`.
pub fn detect_corners(score: &ScoreMap, cfg: &HarrisConfig) -> Result<Vec<Corner>> {
    cfg.validate()?;
    let (w, h) = score.dimensions();
    let s = score.data();
    let max = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(max > 0.0) {
        return Ok(Vec::new());
    }
    let threshold = cfg.min_score * max;
    let r = cfg.nms_window / 2;
    let mut corners = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let v = s[i];
            if !(v > 0.0 && v >= threshold) {
                continue;
            }
            if is_window_max(s, w, h, x, y, r) {
                corners.push(Corner { x, y, score: v });
            }
        }
    }
    corners.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then((a.y, a.x).cmp(&(b.y, b.x)))
    });
    corners.truncate(cfg.max_corners);
    Ok(corners)
}

#[inline]
fn is_window_max(s: &[f64], w: usize, h: usize, x: usize, y: usize, r: usize) -> bool {
    let i = y * w + x;
    let v = s[i];
    for ny in y.saturating_sub(r)..=(y + r).min(h - 1) {
        let row = &s[ny * w..(ny + 1) * w];
        for nx in x.saturating_sub(r)..=(x + r).min(w - 1) {
            let j = ny * w + nx;
            let o = row[nx];
            if o > v || (o == v && j < i) {
                return false;
            }
        }
    }
    true
}

/// Harris scores followed by non-maximum suppression.
pub fn harris_corners(img: &GrayImage, cfg: &HarrisConfig) -> Result<Vec<Corner>> {
    detect_corners(&harris_score_map(img, cfg)?, cfg)
}

/// `x,y,score` CSV with a header row.
pub fn corners_to_csv(corners: &[Corner]) -> String {
    let mut out = String::from("x,y,score\n");
    for c in corners {
        let _ = writeln!(out, "{},{},{}", c.x, c.y, c.score);
    }
    out
}

pub fn write_corners_csv(path: impl AsRef<Path>, corners: &[Corner]) -> Result<()> {
    crate::raster::write_atomic(path.as_ref(), corners_to_csv(corners).as_bytes())
}
