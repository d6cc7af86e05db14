//! Procedural test imagery: fractal value noise overlaid with random shapes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::raster::{gaussian_blur, ColorImage, GrayImage, Plane};

fn value_noise(w: usize, h: usize, cell: usize, rng: &mut ChaCha8Rng) -> Vec<f32> {
    let gw = w / cell + 2;
    let gh = h / cell + 2;
    let lattice: Vec<f32> = (0..gw * gh).map(|_| rng.random::<f32>()).collect();
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        let gy = y as f32 / cell as f32;
        let (y0, fy) = (gy.floor() as usize, gy.fract());
        let sy = fy * fy * (3.0 - 2.0 * fy);
        for x in 0..w {
            let gx = x as f32 / cell as f32;
            let (x0, fx) = (gx.floor() as usize, gx.fract());
            let sx = fx * fx * (3.0 - 2.0 * fx);
            let v00 = lattice[y0 * gw + x0];
            let v10 = lattice[y0 * gw + x0 + 1];
            let v01 = lattice[(y0 + 1) * gw + x0];
            let v11 = lattice[(y0 + 1) * gw + x0 + 1];
            let top = v00 + sx * (v10 - v00);
            let bottom = v01 + sx * (v11 - v01);
            out.push(top + sy * (bottom - top));
        }
    }
    out
}

/// A scene-like grayscale image: smooth multi-octave background, rectangles,
/// ellipses and triangles of random intensity, lightly antialiased.
pub fn natural_texture(width: usize, height: usize, seed: u64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = vec![0.0f32; width * height];
    let mut amp = 0.5;
    for cell in [96usize, 48, 24, 12, 6] {
        for (d, n) in data.iter_mut().zip(value_noise(width, height, cell, &mut rng)) {
            *d += amp * (n - 0.5);
        }
        amp *= 0.55;
    }
    data.iter_mut().for_each(|d| *d += 0.5);

    let area = (width * height) as f32;
    let shapes = (area / 2500.0).round().max(8.0) as usize;
    let side = width.min(height) as f32;
    for _ in 0..shapes {
        let cx = rng.random_range(0.0..width as f32);
        let cy = rng.random_range(0.0..height as f32);
        let rx = rng.random_range(0.02 * side..0.09 * side);
        let ry = rng.random_range(0.02 * side..0.09 * side);
        let value = rng.random_range(0.0f32..1.0);
        let opacity = rng.random_range(0.6f32..1.0);
        let kind = rng.random_range(0..3);
        // Triangle vertices, used when kind == 2.
        let tri: Vec<(f32, f32)> = (0..3)
            .map(|_| (cx + rng.random_range(-rx..rx) * 1.5, cy + rng.random_range(-ry..ry) * 1.5))
            .collect();
        let x0 = (cx - 1.5 * rx).floor().max(0.0) as usize;
        let x1 = ((cx + 1.5 * rx).ceil() as usize).min(width - 1);
        let y0 = (cy - 1.5 * ry).floor().max(0.0) as usize;
        let y1 = ((cy + 1.5 * ry).ceil() as usize).min(height - 1);
        for y in y0..=y1 {
            for x in x0..=x1 {
                let (px, py) = (x as f32, y as f32);
                let inside = match kind {
                    0 => (px - cx).abs() <= rx && (py - cy).abs() <= ry,
                    1 => ((px - cx) / rx).powi(2) + ((py - cy) / ry).powi(2) <= 1.0,
                    _ => point_in_triangle((px, py), tri[0], tri[1], tri[2]),
                };
                if inside {
                    let d = &mut data[y * width + x];
                    *d = *d * (1.0 - opacity) + value * opacity;
                }
            }
        }
    }

    let img = Plane::from_vec(width, height, data).expect("dimensions match");
    let img = gaussian_blur(&img, 0.7).expect("positive sigma");
    let (lo, hi) = img
        .data()
        .iter()
        .fold((f32::MAX, f32::MIN), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let span = (hi - lo).max(1e-6);
    img.map(|v| 0.05 + 0.9 * (v - lo) / span)
}

fn point_in_triangle(p: (f32, f32), a: (f32, f32), b: (f32, f32), c: (f32, f32)) -> bool {
    let cross = |o: (f32, f32), u: (f32, f32), v: (f32, f32)| (u.0 - o.0) * (v.1 - o.1) - (u.1 - o.1) * (v.0 - o.0);
    let d1 = cross(p, a, b);
    let d2 = cross(p, b, c);
    let d3 = cross(p, c, a);
    let neg = d1 < 0.0 || d2 < 0.0 || d3 < 0.0;
    let pos = d1 > 0.0 || d2 > 0.0 || d3 > 0.0;
    !(neg && pos)
}

/// Colour counterpart of [`natural_texture`]: three correlated planes.
pub fn natural_color(width: usize, height: usize, seed: u64) -> ColorImage {
    let base = natural_texture(width, height, seed);
    let tint_a = natural_texture(width, height, seed.wrapping_add(101));
    let tint_b = natural_texture(width, height, seed.wrapping_add(202));
    let mix = |t: &GrayImage, w: f32| base.zip_map(t, |b, t| (1.0 - w) * b + w * t).expect("same size");
    ColorImage::from_planes(mix(&tint_a, 0.35), base.clone(), mix(&tint_b, 0.35)).expect("same size")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_in_range() {
        let a = natural_texture(96, 80, 5);
        let b = natural_texture(96, 80, 5);
        assert_eq!(a, b);
        assert_ne!(a, natural_texture(96, 80, 6));
        assert!(a.data().iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn color_in_range() {
        let c = natural_color(40, 30, 1);
        assert!(c.planes().iter().all(|p| p.data().iter().all(|&v| (0.0..=1.0).contains(&v))));
    }
}
