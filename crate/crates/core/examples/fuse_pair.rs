//! Fuse an aligned visible / IR pair, or a synthetic one when no paths are given.
//!
//! ```text
//! cargo run --release --example fuse_pair -- [visible.png ir.png] [out_dir]
//! ```

use std::path::PathBuf;

use msfusion::eval::{natural_color, natural_texture};
use msfusion::fusion::{fuse_pair, FusionConfig};
use msfusion::raster::{read_image, write_gray, write_image, AnyImage, BitDepth};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (v, ir, out) = if args.len() >= 2 {
        let out = args.get(2).map(PathBuf::from).unwrap_or_else(|| ".".into());
        (read_image(&args[0])?.to_color(), read_image(&args[1])?.to_gray(), out)
    } else {
        let out = args.first().map(PathBuf::from).unwrap_or_else(|| ".".into());
        // The IR band sees a different scene texture plus the visible structure, inverted.
        let v = natural_color(256, 256, 4);
        let hot = natural_texture(256, 256, 99);
        let ir = v.to_luminance().zip_map(&hot, |a, b| 0.5 * (1.0 - a) + 0.5 * b)?;
        (v, ir, out)
    };

    let (f, fc) = fuse_pair(&v, &ir, &FusionConfig::default())?;
    std::fs::create_dir_all(&out)?;
    write_gray(out.join("fused_gray.png"), &f, BitDepth::Eight)?;
    write_image(out.join("fused_color.png"), &AnyImage::Color(fc), BitDepth::Eight)?;
    println!("wrote fused_gray.png and fused_color.png to {}", out.display());
    println!("mean luminance: visible {:.3}, ir {:.3}, fused {:.3}", v.to_luminance().mean(), ir.mean(), f.mean());
    Ok(())
}
