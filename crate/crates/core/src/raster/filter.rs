use super::Plane;
use crate::error::{Error, Result};

/// Sampled Gaussian of standard deviation `sigma`, radius `ceil(3 sigma)`, normalized to sum 1.
pub fn gaussian_kernel(sigma: f64) -> Result<Vec<f64>> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::param(format!("gaussian sigma must be positive, got {sigma}")));
    }
    let radius = (3.0 * sigma).ceil() as usize;
    let denom = 2.0 * sigma * sigma;
    let mut k: Vec<f64> = (0..=2 * radius)
        .map(|i| {
            let d = i as f64 - radius as f64;
            (-d * d / denom).exp()
        })
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    Ok(k)
}

pub(crate) trait Sample: Copy + Send + Sync {
    fn to_f64(self) -> f64;
    fn from_f64(v: f64) -> Self;
}

impl Sample for f32 {
    #[inline]
    fn to_f64(self) -> f64 {
        self as f64
    }
    #[inline]
    fn from_f64(v: f64) -> Self {
        v as f32
    }
}

impl Sample for f64 {
    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
    #[inline]
    fn from_f64(v: f64) -> Self {
        v
    }
}

/// Separable convolution with a symmetric odd-length kernel, replicate border.
pub(crate) fn convolve_separable<T: Sample>(img: &Plane<T>, kernel: &[f64]) -> Plane<T> {
    let (w, h) = img.dimensions();
    let r = kernel.len() / 2;

    // Horizontal pass into an f64 scratch buffer.
    let mut tmp = vec![0.0f64; w * h];
    let mut padded = vec![0.0f64; w + 2 * r];
    for y in 0..h {
        let row = img.row(y);
        for (i, p) in padded.iter_mut().enumerate() {
            let x = (i as isize - r as isize).clamp(0, w as isize - 1) as usize;
            *p = row[x].to_f64();
        }
        let out = &mut tmp[y * w..(y + 1) * w];
        for (x, o) in out.iter_mut().enumerate() {
            *o = padded[x..x + kernel.len()]
                .iter()
                .zip(kernel)
                .map(|(a, k)| a * k)
                .sum();
        }
    }

    // Vertical pass, row at a time so inner loops stay contiguous.
    let mut data = vec![T::from_f64(0.0); w * h];
    let mut acc = vec![0.0f64; w];
    for y in 0..h {
        acc.iter_mut().for_each(|a| *a = 0.0);
        for (j, &k) in kernel.iter().enumerate() {
            let sy = (y as isize + j as isize - r as isize).clamp(0, h as isize - 1) as usize;
            let src = &tmp[sy * w..(sy + 1) * w];
            for (a, s) in acc.iter_mut().zip(src) {
                *a += k * s;
            }
        }
        for (d, a) in data[y * w..(y + 1) * w].iter_mut().zip(&acc) {
            *d = T::from_f64(*a);
        }
    }
    Plane {
        width: w,
        height: h,
        data,
    }
}

/// Gaussian low-pass `img * g_sigma` with replicate borders.
pub fn gaussian_blur(img: &Plane<f32>, sigma: f64) -> Result<Plane<f32>> {
    let k = gaussian_kernel(sigma)?;
    Ok(convolve_separable(img, &k))
}

pub(crate) fn gaussian_blur_f64(img: &Plane<f64>, sigma: f64) -> Result<Plane<f64>> {
    let k = gaussian_kernel(sigma)?;
    Ok(convolve_separable(img, &k))
}

/// Horizontal and vertical image derivatives.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientPair {
    pub ix: Plane<f32>,
    pub iy: Plane<f32>,
}

/// 3×3 Sobel derivative along x (right minus left).
pub const SOBEL_X: [[f32; 3]; 3] = [[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]];
/// 3×3 Sobel derivative along y (down minus up).
pub const SOBEL_Y: [[f32; 3]; 3] = [[-1.0, -2.0, -1.0], [0.0, 0.0, 0.0], [1.0, 2.0, 1.0]];

/// Unnormalized 3×3 Sobel derivatives with replicate border.
pub fn gradients(img: &Plane<f32>) -> Result<GradientPair> {
    let (w, h) = img.dimensions();
    if w < 3 || h < 3 {
        return Err(Error::param(format!(
            "gradients need at least 3x3 pixels, got {w}x{h}"
        )));
    }
    let mut ix = vec![0.0f32; w * h];
    let mut iy = vec![0.0f32; w * h];
    for y in 0..h {
        let up = img.row(y.saturating_sub(1));
        let mid = img.row(y);
        let down = img.row((y + 1).min(h - 1));
        for x in 0..w {
            let l = x.saturating_sub(1);
            let r = (x + 1).min(w - 1);
            let gx = (up[r] - up[l]) + 2.0 * (mid[r] - mid[l]) + (down[r] - down[l]);
            let gy = (down[l] - up[l]) + 2.0 * (down[x] - up[x]) + (down[r] - up[r]);
            ix[y * w + x] = gx;
            iy[y * w + x] = gy;
        }
    }
    Ok(GradientPair {
        ix: Plane {
            width: w,
            height: h,
            data: ix,
        },
        iy: Plane {
            width: w,
            height: h,
            data: iy,
        },
    })
}

pub fn sobel_x(img: &Plane<f32>) -> Result<Plane<f32>> {
    gradients(img).map(|g| g.ix)
}

pub fn sobel_y(img: &Plane<f32>) -> Result<Plane<f32>> {
    gradients(img).map(|g| g.iy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::GrayImage;

    // Dense 2D correlation with replicate border, the reference for both blur and Sobel.
    fn dense_correlate(img: &GrayImage, k: &[Vec<f64>]) -> Vec<f64> {
        let (w, h) = img.dimensions();
        let r = (k.len() / 2) as isize;
        let mut out = vec![0.0; w * h];
        for y in 0..h as isize {
            for x in 0..w as isize {
                let mut s = 0.0;
                for (j, row) in k.iter().enumerate() {
                    for (i, kv) in row.iter().enumerate() {
                        s += kv * img.get_clamped(x + i as isize - r, y + j as isize - r) as f64;
                    }
                }
                out[(y as usize) * w + x as usize] = s;
            }
        }
        out
    }

    fn pseudo_random(w: usize, h: usize, seed: u64) -> GrayImage {
        let mut s = seed;
        GrayImage::from_fn(w, h, |_, _| {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s % 1000) as f32 / 999.0
        })
    }

    #[test]
    fn kernel_shape() {
        let k = gaussian_kernel(1.0).unwrap();
        assert_eq!(k.len(), 7);
        assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(gaussian_kernel(0.5).unwrap().len(), 5);
        assert!(gaussian_kernel(0.0).is_err());
        assert!(gaussian_kernel(-1.0).is_err());
    }

    #[test]
    fn blur_rejects_bad_sigma() {
        let img = GrayImage::filled(4, 4, 0.5);
        assert!(matches!(gaussian_blur(&img, 0.0), Err(Error::Parameter(_))));
    }

    #[test]
    fn blur_preserves_constant() {
        let img = GrayImage::filled(20, 15, 0.37);
        for sigma in [0.3, 1.0, 2.5, 6.0] {
            let b = gaussian_blur(&img, sigma).unwrap();
            assert!(b.data().iter().all(|&v| (v - 0.37).abs() < 1e-6));
        }
    }

    #[test]
    fn blur_impulse_is_sampled_gaussian() {
        let n = 21;
        let mut img = GrayImage::filled(n, n, 0.0);
        img.set(10, 10, 1.0);
        let b = gaussian_blur(&img, 1.0).unwrap();
        // Independent evaluation: normalized 1D Gaussian over radius 3, outer product.
        let g: Vec<f64> = (-3i32..=3).map(|d| (-(d * d) as f64 / 2.0).exp()).collect();
        let s: f64 = g.iter().sum();
        for y in 0..n {
            for x in 0..n {
                let dx = x as i32 - 10;
                let dy = y as i32 - 10;
                let expect = if dx.abs() <= 3 && dy.abs() <= 3 {
                    g[(dx + 3) as usize] * g[(dy + 3) as usize] / (s * s)
                } else {
                    0.0
                };
                assert!((b.get(x, y) as f64 - expect).abs() < 1e-7, "({x},{y})");
            }
        }
    }

    #[test]
    fn tiny_sigma_is_near_identity() {
        let img = pseudo_random(16, 12, 7);
        let b = gaussian_blur(&img, 0.1).unwrap();
        let k1 = gaussian_kernel(0.1).unwrap();
        let k2: Vec<Vec<f64>> = k1.iter().map(|a| k1.iter().map(|b| a * b).collect()).collect();
        let dense = dense_correlate(&img, &k2);
        for (i, (&v, &d)) in b.data().iter().zip(&dense).enumerate() {
            assert!((v as f64 - d).abs() < 1e-6, "{i}");
            assert!((v - img.data()[i]).abs() < 1e-3);
        }
    }

    #[test]
    fn blur_preserves_interior_mean() {
        let img = pseudo_random(64, 64, 99);
        let b = gaussian_blur(&img, 2.0).unwrap();
        let r = 6;
        let inner = |p: &GrayImage| {
            let mut s = 0.0;
            let mut n = 0.0;
            for y in r..64 - r {
                for x in r..64 - r {
                    s += p.get(x, y) as f64;
                    n += 1.0;
                }
            }
            s / n
        };
        assert!((inner(&img) - inner(&b)).abs() < 1e-3);
    }

    #[test]
    fn gradients_constant_is_zero() {
        let g = gradients(&GrayImage::filled(6, 5, 0.8)).unwrap();
        assert!(g.ix.data().iter().chain(g.iy.data()).all(|&v| v == 0.0));
    }

    #[test]
    fn gradients_of_ramp() {
        let w = 10;
        let img = GrayImage::from_fn(w, 8, |x, _| x as f32 / w as f32);
        let g = gradients(&img).unwrap();
        for y in 1..7 {
            for x in 1..w - 1 {
                assert!((g.ix.get(x, y) - 8.0 / w as f32).abs() < 1e-6);
                assert_eq!(g.iy.get(x, y), 0.0);
            }
        }
    }

    #[test]
    fn gradients_match_dense_convolution_on_checkerboard() {
        let img = GrayImage::from_fn(8, 8, |x, y| ((x + y) % 2) as f32);
        let g = gradients(&img).unwrap();
        let kx: Vec<Vec<f64>> = SOBEL_X.iter().map(|r| r.iter().map(|&v| v as f64).collect()).collect();
        let ky: Vec<Vec<f64>> = SOBEL_Y.iter().map(|r| r.iter().map(|&v| v as f64).collect()).collect();
        let dx = dense_correlate(&img, &kx);
        let dy = dense_correlate(&img, &ky);
        for i in 0..64 {
            assert_eq!(g.ix.data()[i] as f64, dx[i]);
            assert_eq!(g.iy.data()[i] as f64, dy[i]);
        }
    }

    #[test]
    fn gradients_need_3x3() {
        assert!(gradients(&GrayImage::filled(2, 5, 0.0)).is_err());
    }

    #[test]
    fn gradients_are_linear() {
        let img = pseudo_random(12, 9, 3);
        let (a, b) = (0.5f32, 0.25f32);
        let scaled = img.map(|v| a * v + b);
        let g0 = gradients(&img).unwrap();
        let g1 = gradients(&scaled).unwrap();
        for i in 0..img.data().len() {
            assert!((g1.ix.data()[i] - a * g0.ix.data()[i]).abs() < 1e-6);
            assert!((g1.iy.data()[i] - a * g0.iy.data()[i]).abs() < 1e-6);
        }
    }
}
