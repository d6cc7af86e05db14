//! High-pass/low-pass (HPLP) fusion of a visible luminance image with an IR
//! image, and colour restoration of the fused luminance.
//!
//! At each of three Gaussian scales the low-pass bands are alpha-blended, the
//! high-pass bands are merged by per-pixel maximum magnitude (visible wins
//! ties), and the result is `LP + gain * HP`. The three scale results are
//! averaged and clamped to `[0, 1]`.

use crate::error::{Error, Result};
use crate::raster::{gaussian_blur, ColorImage, GrayImage, Plane};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FusionConfig {
    /// Weight of the visible low-pass band.
    pub alpha: f64,
    /// Multiplier on the merged high-pass band.
    pub gain: f64,
    pub sigmas: [f64; 3],
    /// Floor on the visible luminance when forming the colour ratio.
    pub color_eps: f64,
}

impl Default for FusionConfig {
    fn default() -> Self {
        FusionConfig {
            alpha: 0.5,
            gain: 1.5,
            sigmas: [1.0, 2.0, 4.0],
            color_eps: 1.0 / 255.0,
        }
    }
}

impl FusionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::param(format!("fusion.alpha must be in [0, 1], got {}", self.alpha)));
        }
        if !(self.gain >= 0.0) || !self.gain.is_finite() {
            return Err(Error::param(format!("fusion.gain must be >= 0, got {}", self.gain)));
        }
        let [s1, s2, s3] = self.sigmas;
        if !(s1 > 0.0 && s1 < s2 && s2 < s3) || !s3.is_finite() {
            return Err(Error::param(format!(
                "fusion.sigma1 < fusion.sigma2 < fusion.sigma3 must be positive and increasing, got {s1}, {s2}, {s3}"
            )));
        }
        if !(self.color_eps > 0.0) {
            return Err(Error::param(format!(
                "fusion.color_eps must be positive, got {}",
                self.color_eps
            )));
        }
        Ok(())
    }
}

/// `lp = img * g_sigma` and `hp = img - lp`.
///
/// `hp` is formed in `f64` from the `f32` samples, where the subtraction is
/// exact, so `lp as f64 + hp` reproduces `img` bit for bit.
pub fn split_frequencies(img: &GrayImage, sigma: f64) -> Result<(GrayImage, Plane<f64>)> {
    let lp = gaussian_blur(img, sigma)?;
    let hp = img.zip_map(&lp, |i, l| i as f64 - l as f64)?;
    Ok((lp, hp))
}

/// Per-pixel maximum-magnitude selection; ties take the visible band.
pub fn select_high_pass(hp_v: &Plane<f64>, hp_ir: &Plane<f64>) -> Result<Plane<f64>> {
    hp_v.zip_map(hp_ir, |v, r| if v.abs() >= r.abs() { v } else { r })
}

/// One scale of HPLP: `alpha LP(yv) + (1 - alpha) LP(ir) + gain * HP_max`, unclamped.
pub fn fuse_single_scale(
    yv: &GrayImage,
    ir: &GrayImage,
    sigma: f64,
    alpha: f64,
    gain: f64,
) -> Result<Plane<f64>> {
    yv.check_same_size(ir)?;
    let (lp_v, hp_v) = split_frequencies(yv, sigma)?;
    let (lp_ir, hp_ir) = split_frequencies(ir, sigma)?;
    let hp = select_high_pass(&hp_v, &hp_ir)?;
    let data = lp_v
        .data()
        .iter()
        .zip(lp_ir.data())
        .zip(hp.data())
        .map(|((&a, &b), &h)| alpha * a as f64 + (1.0 - alpha) * b as f64 + gain * h)
        .collect();
    Plane::from_vec(yv.width(), yv.height(), data)
}

fn check_unit_range(name: &str, img: &GrayImage) -> Result<()> {
    if img.data().iter().all(|v| (0.0..=1.0).contains(v)) {
        Ok(())
    } else {
        Err(Error::param(format!("{name} has samples outside [0, 1]")))
    }
}

/// Three-scale fusion, returning the clamped result and the per-scale `F_sigma` planes.
pub fn fuse_hplp_scales(yv: &GrayImage, ir: &GrayImage, cfg: &FusionConfig) -> Result<(GrayImage, [Plane<f64>; 3])> {
    cfg.validate()?;
    yv.check_same_size(ir)?;
    check_unit_range("visible luminance", yv)?;
    check_unit_range("ir image", ir)?;
    let mut scales = Vec::with_capacity(3);
    for &sigma in &cfg.sigmas {
        scales.push(fuse_single_scale(yv, ir, sigma, cfg.alpha, cfg.gain)?);
    }
    let data = (0..yv.data().len())
        .map(|i| {
            let mean = (scales[0].data()[i] + scales[1].data()[i] + scales[2].data()[i]) / 3.0;
            mean.clamp(0.0, 1.0) as f32
        })
        .collect();
    let fused = Plane::from_vec(yv.width(), yv.height(), data)?;
    let scales: [Plane<f64>; 3] = scales.try_into().expect("three scales");
    Ok((fused, scales))
}

pub fn fuse_hplp(yv: &GrayImage, ir: &GrayImage, cfg: &FusionConfig) -> Result<GrayImage> {
    fuse_hplp_scales(yv, ir, cfg).map(|(f, _)| f)
}

/// Scale every channel of `v` by `f / max(Y(v), eps)`, clamping to `[0, 1]`.
pub fn restore_color(f: &GrayImage, v: &ColorImage, color_eps: f64) -> Result<ColorImage> {
    if !(color_eps > 0.0) {
        return Err(Error::param(format!("color_eps must be positive, got {color_eps}")));
    }
    f.check_same_size(v.r())?;
    let y = v.to_luminance();
    let ratio: Vec<f64> = f
        .data()
        .iter()
        .zip(y.data())
        .map(|(&f, &y)| f as f64 / (y as f64).max(color_eps))
        .collect();
    let scale = |c: &GrayImage| -> Result<GrayImage> {
        let data = c
            .data()
            .iter()
            .zip(&ratio)
            .map(|(&c, &r)| (r * c as f64).clamp(0.0, 1.0) as f32)
            .collect();
        Plane::from_vec(c.width(), c.height(), data)
    };
    ColorImage::from_planes(scale(v.r())?, scale(v.g())?, scale(v.b())?)
}

/// Fuse a colour visible image with an aligned IR image: `(F, F_c)`.
pub fn fuse_pair(v: &ColorImage, ir: &GrayImage, cfg: &FusionConfig) -> Result<(GrayImage, ColorImage)> {
    let f = fuse_hplp(&v.to_luminance(), ir, cfg)?;
    let fc = restore_color(&f, v, cfg.color_eps)?;
    Ok((f, fc))
}
