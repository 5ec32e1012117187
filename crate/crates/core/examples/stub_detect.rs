//! Runs the stand-in detector at a few noise levels and reports what it
//! did to the ground truth.
//!
//! cargo run --example stub_detect

use dangerzone::detector::{run_stub, NoiseConfig};
use dangerzone::simulation::{generate_scenario, ScenarioSpec};

fn main() -> anyhow::Result<()> {
    let config = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/city_block.toml");
    let spec = ScenarioSpec::from_file(config.as_ref())?;
    let frames = generate_scenario(&spec, &spec.zone.unwrap_or_default())?;
    let gt: usize = frames.iter().map(|f| f.objects.len()).sum();
    println!("{} frames, {gt} ground-truth objects", frames.len());

    let levels = [
        ("perfect", NoiseConfig::default()),
        ("jitter", NoiseConfig { center_sigma: 0.3, ..NoiseConfig::default() }),
        ("misses", NoiseConfig { miss_rate: 0.2, ..NoiseConfig::default() }),
        ("clutter", NoiseConfig { spurious_rate: 3.0, ..NoiseConfig::default() }),
        ("flips", NoiseConfig { label_flip_rate: 0.1, ..NoiseConfig::default() }),
    ];
    for (name, cfg) in levels {
        let dets = run_stub(&frames, &cfg)?;
        let mean_conf = dets.iter().map(|d| d.confidence).sum::<f64>() / dets.len().max(1) as f64;
        println!("{name:<8} {:>6} detections, mean confidence {mean_conf:.3}", dets.len());
    }
    Ok(())
}
