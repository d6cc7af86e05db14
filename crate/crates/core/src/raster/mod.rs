//! Pixel buffers and the low-level image operations every other module builds on.
//!
//! Intensities live in `[0, 1]` as `f32`. Signed intermediates (derivatives,
//! Harris scores, high-pass residuals) use the same [`Plane`] container and
//! are never clamped.

mod filter;
mod io;
pub(crate) use filter::gaussian_blur_f64;
pub(crate) use io::write_atomic;
mod warp;

pub use filter::{gaussian_blur, gaussian_kernel, gradients, sobel_x, sobel_y, GradientPair, SOBEL_X, SOBEL_Y};
pub use io::{read_image, write_gray, write_image, AnyImage, BitDepth};
pub use warp::{sample_bilinear, warp_affine};

use crate::error::{Error, Result};

/// A row-major 2D raster.
#[derive(Clone, Debug, PartialEq)]
pub struct Plane<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

/// Scalar intensity image; values are in `[0, 1]` unless documented otherwise.
pub type GrayImage = Plane<f32>;

impl<T: Copy> Plane<T> {
    pub fn from_vec(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::param(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::param(format!(
                "buffer holds {} samples, expected {}x{} = {}",
                data.len(),
                width,
                height,
                width * height
            )));
        }
        Ok(Plane {
            width,
            height,
            data,
        })
    }

    /// # Panics
    /// If either dimension is zero.
    pub fn filled(width: usize, height: usize, value: T) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        Plane {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Plane {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> T {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: T) {
        self.data[y * self.width + x] = value;
    }

    /// Sample with coordinates clamped into the raster (replicate border).
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> T {
        let cx = x.clamp(0, self.width as isize - 1) as usize;
        let cy = y.clamp(0, self.height as isize - 1) as usize;
        self.data[cy * self.width + cx]
    }

    #[inline]
    pub fn row(&self, y: usize) -> &[T] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    pub fn map<U: Copy>(&self, f: impl Fn(T) -> U) -> Plane<U> {
        Plane {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map<U: Copy, V: Copy>(&self, other: &Plane<U>, f: impl Fn(T, U) -> V) -> Result<Plane<V>> {
        self.check_same_size(other)?;
        Ok(Plane {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Copy out the `w`×`h` rectangle whose top-left corner is `(x0, y0)`.
    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> Result<Self> {
        if w == 0 || h == 0 || x0 + w > self.width || y0 + h > self.height {
            return Err(Error::param(format!(
                "crop {w}x{h}+{x0}+{y0} outside {}x{} image",
                self.width, self.height
            )));
        }
        let mut data = Vec::with_capacity(w * h);
        for y in y0..y0 + h {
            data.extend_from_slice(&self.data[y * self.width + x0..y * self.width + x0 + w]);
        }
        Ok(Plane {
            width: w,
            height: h,
            data,
        })
    }

    pub fn same_size<U>(&self, other: &Plane<U>) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub(crate) fn check_same_size<U>(&self, other: &Plane<U>) -> Result<()> {
        if self.same_size(other) {
            Ok(())
        } else {
            Err(Error::param(format!(
                "dimension mismatch: {}x{} vs {}x{}",
                self.width, self.height, other.width, other.height
            )))
        }
    }
}

impl Plane<f32> {
    /// Clamp every sample into `[0, 1]`; NaN becomes 0.
    pub fn clamped_unit(&self) -> Self {
        self.map(|v| if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) })
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().map(|&v| v as f64).sum::<f64>() / self.data.len() as f64
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f32> {
        self.check_same_size(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f32::max))
    }
}

/// Three-plane RGB image sharing one set of dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct ColorImage {
    planes: [GrayImage; 3],
}

/// BT.601 luma weights for R, G, B.
pub const LUMA_WEIGHTS: [f32; 3] = [0.299, 0.587, 0.114];

impl ColorImage {
    pub fn from_planes(r: GrayImage, g: GrayImage, b: GrayImage) -> Result<Self> {
        r.check_same_size(&g)?;
        r.check_same_size(&b)?;
        Ok(ColorImage { planes: [r, g, b] })
    }

    /// Gray image replicated into all three channels.
    pub fn from_gray(g: &GrayImage) -> Self {
        ColorImage {
            planes: [g.clone(), g.clone(), g.clone()],
        }
    }

    pub fn width(&self) -> usize {
        self.planes[0].width()
    }

    pub fn height(&self) -> usize {
        self.planes[0].height()
    }

    pub fn dimensions(&self) -> (usize, usize) {
        self.planes[0].dimensions()
    }

    pub fn r(&self) -> &GrayImage {
        &self.planes[0]
    }

    pub fn g(&self) -> &GrayImage {
        &self.planes[1]
    }

    pub fn b(&self) -> &GrayImage {
        &self.planes[2]
    }

    pub fn planes(&self) -> &[GrayImage; 3] {
        &self.planes
    }

    pub fn into_planes(self) -> [GrayImage; 3] {
        self.planes
    }

    pub fn pixel(&self, x: usize, y: usize) -> [f32; 3] {
        [
            self.planes[0].get(x, y),
            self.planes[1].get(x, y),
            self.planes[2].get(x, y),
        ]
    }

    /// Luminance `Y = 0.299 R + 0.587 G + 0.114 B`, clamped to `[0, 1]`.
    pub fn to_luminance(&self) -> GrayImage {
        let [wr, wg, wb] = LUMA_WEIGHTS;
        let (r, g, b) = (self.r().data(), self.g().data(), self.b().data());
        let data = r
            .iter()
            .zip(g)
            .zip(b)
            .map(|((&r, &g), &b)| (wr * r + wg * g + wb * b).clamp(0.0, 1.0))
            .collect();
        Plane {
            width: self.width(),
            height: self.height(),
            data,
        }
    }
}

/// Free-function form of [`ColorImage::to_luminance`].
pub fn to_luminance(img: &ColorImage) -> GrayImage {
    img.to_luminance()
}
