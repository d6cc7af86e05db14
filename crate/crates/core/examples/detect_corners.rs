//! Detect Harris corners and dump them as `x,y,score` CSV.
//!
//! ```text
//! cargo run --release --example detect_corners -- [image.png] [corners.csv]
//! ```

use msfusion::eval::natural_texture;
use msfusion::features::{corners_to_csv, harris_corners, write_corners_csv, HarrisConfig};
use msfusion::raster::read_image;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let img = match args.first() {
        Some(p) => read_image(p)?.to_gray(),
        None => natural_texture(320, 240, 11),
    };
    let corners = harris_corners(&img, &HarrisConfig::default())?;
    match args.get(1) {
        Some(out) => {
            write_corners_csv(out, &corners)?;
            println!("{} corners written to {out}", corners.len());
        }
        None => print!("{}", corners_to_csv(&corners)),
    }
    Ok(())
}
