//! Register two images, or a synthetic pair when no paths are given.
//!
//! ```text
//! cargo run --release --example register_pair -- [visible.png ir.png]
//! ```

use std::time::Instant;

use msfusion::eval::{natural_texture, simulate_pair, translation_error, Modality};
use msfusion::raster::read_image;
use msfusion::registration::{register, RegistrationConfig};
use msfusion::transform::AffineTransform;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (v, ir, truth) = if args.len() >= 2 {
        (read_image(&args[0])?.to_gray(), read_image(&args[1])?.to_gray(), None)
    } else {
        let base = natural_texture(512, 512, 7);
        let planted = AffineTransform::translation(7.4, -3.2);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pair = simulate_pair(&base, &planted, Modality::InvertGamma(2.2), 0.02, &mut rng)?;
        (pair.img_v, pair.img_ir, Some(pair.t_true))
    };

    let cfg = RegistrationConfig::default();
    let start = Instant::now();
    let result = register(&v, &ir, &cfg)?;
    println!("registered in {:.2} s", start.elapsed().as_secs_f64());
    println!("corners: visible {}, ir {}", result.corners_v, result.corners_ir);
    for (i, it) in result.per_iteration.iter().enumerate() {
        println!(
            "iteration {}: support {}/{} tx {:.3} ty {:.3}",
            i + 1,
            it.support,
            it.match_count,
            it.transform.tx(),
            it.transform.ty()
        );
    }
    println!("{}", result.t3.to_text());
    if let Some(t) = truth {
        println!("translation error: {:.3} px", translation_error(&result.t3, &t));
    }
    Ok(())
}
