//! Warp an image through a transform, then back, and report the round-trip error.
//!
//! ```text
//! cargo run --release --example warp_image -- [image.png] [transform.json|.txt] [out.png]
//! ```

use msfusion::eval::natural_texture;
use msfusion::raster::{read_image, warp_affine, write_gray, BitDepth};
use msfusion::registration::read_transform;
use msfusion::transform::AffineTransform;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let img = match args.first() {
        Some(p) => read_image(p)?.to_gray(),
        None => natural_texture(256, 256, 5),
    };
    let t = match args.get(1) {
        Some(p) => read_transform(p)?,
        None => AffineTransform::similarity(1.05 * 0.1f64.cos(), 1.05 * 0.1f64.sin(), -6.0, 4.5),
    };
    let (w, h) = img.dimensions();
    let warped = warp_affine(&img, &t, w, h, 0.0)?;
    let back = warp_affine(&warped, &t.inverse()?, w, h, f32::NAN)?;

    // Compare only well inside the region that survived both resamplings.
    let margin = w.min(h) / 6;
    let mut worst = 0.0f32;
    for y in margin..h - margin {
        for x in margin..w - margin {
            let b = back.get(x, y);
            if !b.is_nan() {
                worst = worst.max((b - img.get(x, y)).abs());
            }
        }
    }
    println!("transform:\n{}", t.to_text());
    println!("interior round-trip max error: {worst:.4}");
    if let Some(out) = args.get(2) {
        write_gray(out, &warped, BitDepth::Eight)?;
        println!("wrote {out}");
    }
    Ok(())
}
