//! Write the Canny edge raster and the direction-bin raster as PGM files.
//!
//! ```text
//! cargo run --release --example edge_maps -- [image.png] [out_dir]
//! ```

use msfusion::edges::{canny, CannyConfig};
use msfusion::eval::natural_texture;
use msfusion::raster::read_image;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let img = match args.first() {
        Some(p) => read_image(p)?.to_gray(),
        None => natural_texture(320, 240, 11),
    };
    let out = args.get(1).map(String::as_str).unwrap_or(".");
    let cfg = CannyConfig::default();
    let edges = canny(&img, &cfg)?;
    std::fs::create_dir_all(out)?;
    edges.write_debug(out, "image")?;
    let total = edges.width() * edges.height();
    println!(
        "{} edge pixels of {} ({:.1}%), {} direction bins; wrote image_edges.pgm and image_dirs.pgm to {out}",
        edges.edge_count(),
        total,
        100.0 * edges.edge_count() as f64 / total as f64,
        cfg.bins
    );
    Ok(())
}
