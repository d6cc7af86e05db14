use super::{GrayImage, Plane};
use crate::error::{Error, Result};
use crate::transform::{AffineTransform, Point};

/// Bilinear sample at `(x, y)`; `None` outside `[0, w-1] × [0, h-1]`.
#[inline]
pub fn sample_bilinear(img: &GrayImage, x: f64, y: f64) -> Option<f32> {
    let (w, h) = img.dimensions();
    if !(x >= 0.0 && y >= 0.0 && x <= (w - 1) as f64 && y <= (h - 1) as f64) {
        return None;
    }
    let x0 = x.floor() as usize;
    let y0 = y.floor() as usize;
    let fx = x - x0 as f64;
    let fy = y - y0 as f64;
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    let v00 = img.get(x0, y0) as f64;
    let v10 = img.get(x1, y0) as f64;
    let v01 = img.get(x0, y1) as f64;
    let v11 = img.get(x1, y1) as f64;
    let top = v00 + fx * (v10 - v00);
    let bottom = v01 + fx * (v11 - v01);
    Some((top + fy * (bottom - top)) as f32)
}

/// Resample `img` into an `out_w`×`out_h` frame so that `out(p) = img(t⁻¹ p)`.
///
/// A point at `p` in `img` lands at `t(p)` in the output. Samples whose
/// pre-image falls outside the source take `fill`.
pub fn warp_affine(
    img: &GrayImage,
    t: &AffineTransform,
    out_w: usize,
    out_h: usize,
    fill: f32,
) -> Result<GrayImage> {
    if out_w == 0 || out_h == 0 {
        return Err(Error::param("warp output dimensions must be positive"));
    }
    let inv = t.inverse()?;
    let mut data = Vec::with_capacity(out_w * out_h);
    for y in 0..out_h {
        for x in 0..out_w {
            let src = inv.apply(Point::new(x as f64, y as f64));
            data.push(sample_bilinear(img, src.x, src.y).unwrap_or(fill));
        }
    }
    Plane::from_vec(out_w, out_h, data)
}
