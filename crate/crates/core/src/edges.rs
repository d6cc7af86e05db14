//! Canny edges and full-circle gradient direction bins.

use std::f64::consts::TAU;
use std::path::Path;

use crate::error::{Error, Result};
use crate::raster::{gaussian_blur, gradients, write_gray, BitDepth, GrayImage, Plane};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CannyConfig {
    pub blur_sigma: f64,
    /// Hysteresis thresholds as fractions of the image's maximum gradient magnitude.
    pub low_ratio: f64,
    pub high_ratio: f64,
    /// Number of direction bins `k1` covering 360 degrees.
    pub bins: usize,
}

impl Default for CannyConfig {
    fn default() -> Self {
        CannyConfig {
            blur_sigma: 1.0,
            low_ratio: 0.1,
            high_ratio: 0.2,
            bins: 16,
        }
    }
}

impl CannyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.blur_sigma > 0.0) {
            return Err(Error::param(format!(
                "canny.blur_sigma must be positive, got {}",
                self.blur_sigma
            )));
        }
        if !(self.low_ratio > 0.0 && self.low_ratio < self.high_ratio && self.high_ratio <= 1.0) {
            return Err(Error::param(format!(
                "canny.low_ratio and canny.high_ratio need 0 < low < high <= 1, got {} / {}",
                self.low_ratio, self.high_ratio
            )));
        }
        if self.bins < 2 || self.bins > 256 {
            return Err(Error::param(format!(
                "canny.bins must be in [2, 256], got {}",
                self.bins
            )));
        }
        Ok(())
    }
}

/// Binary edge raster `e` plus a direction-bin raster `g` defined at every pixel.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeMap {
    width: usize,
    height: usize,
    edges: Vec<u8>,
    dirs: Vec<u8>,
    bins: usize,
}

impl EdgeMap {
    /// Assemble from raw rasters; `edges` must be 0/1 and `dirs` below `bins`.
    pub fn from_parts(width: usize, height: usize, edges: Vec<u8>, dirs: Vec<u8>, bins: usize) -> Result<Self> {
        if width == 0 || height == 0 || edges.len() != width * height || dirs.len() != width * height {
            return Err(Error::param("edge map rasters do not match the stated dimensions"));
        }
        if !(2..=256).contains(&bins) {
            return Err(Error::param(format!("direction bin count {bins} outside [2, 256]")));
        }
        if edges.iter().any(|&e| e > 1) {
            return Err(Error::param("edge raster must be binary"));
        }
        if dirs.iter().any(|&g| g as usize >= bins) {
            return Err(Error::param("direction index out of range"));
        }
        Ok(EdgeMap {
            width,
            height,
            edges,
            dirs,
            bins,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn edges(&self) -> &[u8] {
        &self.edges
    }

    pub fn directions(&self) -> &[u8] {
        &self.dirs
    }

    #[inline]
    pub fn is_edge(&self, x: usize, y: usize) -> bool {
        self.edges[y * self.width + x] != 0
    }

    #[inline]
    pub fn direction(&self, x: usize, y: usize) -> usize {
        self.dirs[y * self.width + x] as usize
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().map(|&e| e as usize).sum()
    }

    /// Edge raster as 0/1 intensities.
    pub fn edge_image(&self) -> GrayImage {
        GrayImage::from_vec(self.width, self.height, self.edges.iter().map(|&e| e as f32).collect())
            .expect("dimensions checked at construction")
    }

    /// Direction raster scaled so that an 8-bit write stores the bin index as the code.
    pub fn direction_image(&self) -> GrayImage {
        GrayImage::from_vec(
            self.width,
            self.height,
            self.dirs.iter().map(|&g| g as f32 / 255.0).collect(),
        )
        .expect("dimensions checked at construction")
    }

    /// Write `<stem>_edges.pgm` (0/255) and `<stem>_dirs.pgm` (bin index codes) into `dir`.
    pub fn write_debug(&self, dir: impl AsRef<Path>, stem: &str) -> Result<()> {
        let dir = dir.as_ref();
        write_gray(dir.join(format!("{stem}_edges.pgm")), &self.edge_image(), BitDepth::Eight)?;
        write_gray(dir.join(format!("{stem}_dirs.pgm")), &self.direction_image(), BitDepth::Eight)
    }
}

/// Bin of the gradient angle `atan2(iy, ix)` over the full circle; `(0, 0)` maps to bin 0.
pub fn quantize_direction(ix: f64, iy: f64, bins: usize) -> usize {
    debug_assert!(bins >= 2);
    if ix == 0.0 && iy == 0.0 {
        return 0;
    }
    let mut angle = iy.atan2(ix);
    if angle < 0.0 {
        angle += TAU;
    }
    // The nudge keeps angles that sit exactly on a boundary (up to rounding) in the upper bin.
    let t = angle / TAU * bins as f64 + 1e-9;
    (t.floor() as usize) % bins
}

/// Canny edges with thresholds relative to the image's peak gradient magnitude.
pub fn canny(img: &GrayImage, cfg: &CannyConfig) -> Result<EdgeMap> {
    cfg.validate()?;
    let (grad, magnitude) = blurred_gradients(img, cfg.blur_sigma)?;
    let peak = magnitude.data().iter().copied().fold(0.0f32, f32::max) as f64;
    finish_canny(&grad, &magnitude, peak * cfg.low_ratio, peak * cfg.high_ratio, cfg.bins)
}

/// Canny with absolute magnitude thresholds (same units as the Sobel response).
pub fn canny_with_thresholds(
    img: &GrayImage,
    blur_sigma: f64,
    low: f64,
    high: f64,
    bins: usize,
) -> Result<EdgeMap> {
    CannyConfig {
        blur_sigma,
        low_ratio: 0.5,
        high_ratio: 1.0,
        bins,
    }
    .validate()?;
    if !(low >= 0.0 && low <= high) {
        return Err(Error::param(format!("need 0 <= low <= high, got {low} / {high}")));
    }
    let (grad, magnitude) = blurred_gradients(img, blur_sigma)?;
    finish_canny(&grad, &magnitude, low, high, bins)
}

fn blurred_gradients(img: &GrayImage, sigma: f64) -> Result<(crate::raster::GradientPair, Plane<f32>)> {
    let (w, h) = img.dimensions();
    if w < 5 || h < 5 {
        return Err(Error::param(format!("canny needs at least 5x5 pixels, got {w}x{h}")));
    }
    let blurred = gaussian_blur(img, sigma)?;
    let grad = gradients(&blurred)?;
    let magnitude = grad.ix.zip_map(&grad.iy, |a, b| a.hypot(b))?;
    Ok((grad, magnitude))
}

fn finish_canny(
    grad: &crate::raster::GradientPair,
    magnitude: &Plane<f32>,
    low: f64,
    high: f64,
    bins: usize,
) -> Result<EdgeMap> {
    let (w, h) = magnitude.dimensions();
    let dirs: Vec<u8> = grad
        .ix
        .data()
        .iter()
        .zip(grad.iy.data())
        .map(|(&gx, &gy)| quantize_direction(gx as f64, gy as f64, bins) as u8)
        .collect();

    let thin = non_max_suppress(grad, magnitude);
    let edges = hysteresis(&thin, w, h, low, high);
    EdgeMap::from_parts(w, h, edges, dirs, bins)
}

/// Keep pixels that dominate their two neighbours across the edge.
///
/// Neighbours are picked from the gradient axis (mod 180 degrees) so the
/// result does not depend on contrast polarity. On two-pixel plateaus the
/// pixel whose "forward" neighbour ties is kept.
fn non_max_suppress(grad: &crate::raster::GradientPair, magnitude: &Plane<f32>) -> Vec<f32> {
    let (w, h) = magnitude.dimensions();
    let mut out = vec![0.0f32; w * h];
    let tan22 = (std::f64::consts::PI / 8.0).tan();
    for y in 0..h {
        for x in 0..w {
            let m = magnitude.get(x, y);
            if m <= 0.0 {
                continue;
            }
            let gx = grad.ix.get(x, y) as f64;
            let gy = grad.iy.get(x, y) as f64;
            let (ax, ay) = (gx.abs(), gy.abs());
            // Forward offset along the gradient axis.
            let (dx, dy): (isize, isize) = if ay <= ax * tan22 {
                (1, 0)
            } else if ax <= ay * tan22 {
                (0, 1)
            } else if (gx > 0.0) == (gy > 0.0) {
                (1, 1)
            } else {
                (1, -1)
            };
            let (xi, yi) = (x as isize, y as isize);
            let fwd = magnitude.get_clamped(xi + dx, yi + dy);
            let back = magnitude.get_clamped(xi - dx, yi - dy);
            if m > back && m >= fwd {
                out[y * w + x] = m;
            }
        }
    }
    out
}

fn hysteresis(thin: &[f32], w: usize, h: usize, low: f64, high: f64) -> Vec<u8> {
    let mut edges = vec![0u8; w * h];
    let mut stack = Vec::new();
    for (i, &m) in thin.iter().enumerate() {
        if m > 0.0 && m as f64 >= high && edges[i] == 0 {
            edges[i] = 1;
            stack.push(i);
            while let Some(j) = stack.pop() {
                let (x, y) = (j % w, j / w);
                for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
                    for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                        let k = ny * w + nx;
                        if edges[k] == 0 && thin[k] > 0.0 && thin[k] as f64 >= low {
                            edges[k] = 1;
                            stack.push(k);
                        }
                    }
                }
            }
        }
    }
    edges
}
