//! Accuracy benchmark on synthetic cross-modal pairs.
//!
//! ```text
//! cargo run --release --example benchmark -- [translation|sweep] [trials] [out.csv]
//! ```

use std::time::Instant;

use msfusion::eval::{natural_texture, pipeline_registrar, run_benchmark, Modality, SimulationSpec};
use msfusion::registration::RegistrationConfig;
use msfusion::transform::ModelKind;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mode = args.first().map(String::as_str).unwrap_or("translation");
    let trials: usize = args.get(1).map(|s| s.parse()).transpose()?.unwrap_or(20);

    let mut cfg = RegistrationConfig::default();
    let mut spec = SimulationSpec {
        modality: Modality::InvertGamma(2.2),
        trials,
        ..SimulationSpec::default()
    };
    if mode == "sweep" {
        cfg.ransac.model = ModelKind::Similarity;
        spec.scales = SimulationSpec::scale_sweep();
        spec.translation_range = 10.0;
    }
    let bases: Vec<_> = (0..4).map(|i| natural_texture(512, 512, 100 + i)).collect();

    let start = Instant::now();
    let report = run_benchmark(&bases, &spec, pipeline_registrar(cfg))?;
    let elapsed = start.elapsed();

    for s in &report.per_scale {
        println!(
            "scale {:.2}: mean {:.3} px, median {:.3} px, max {:.3} px, scale err {:.4}, failures {}/{}",
            s.scale, s.mean_error, s.median_error, s.max_error, s.max_scale_error, s.failures, s.trials
        );
    }
    println!(
        "overall: mean {:.3} px, median {:.3} px, max {:.3} px, failures {} ({:.1} s)",
        report.mean,
        report.median,
        report.max,
        report.failures,
        elapsed.as_secs_f64()
    );
    if let Some(path) = args.get(2) {
        report.write_csv(path)?;
        println!("wrote {path}");
    }
    Ok(())
}
