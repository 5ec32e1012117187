//! Measures how many frames early a detector flags objects as harmful.
//!
//! cargo run --example temporal_lead

use dangerzone::analysis::temporal_lead_analysis;
use dangerzone::detector::{run_stub, NoiseConfig};
use dangerzone::simulation::{generate_scenario, ScenarioSpec};

fn main() -> anyhow::Result<()> {
    let config = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/city_block.toml");
    let spec = ScenarioSpec::from_file(config.as_ref())?;
    let frames = generate_scenario(&spec, &spec.zone.unwrap_or_default())?;

    for early in [0, 1, 2, 3] {
        let cfg = NoiseConfig { early_harm_frames: early, ..NoiseConfig::default() };
        let dets = run_stub(&frames, &cfg)?;
        let report = temporal_lead_analysis(&dets, &frames, 2.0)?;
        println!("early_harm_frames = {early}: mode lead {:?}, histogram {:?}, missed {}", report.mode(), report.histogram, report.missed_onsets);
    }
    Ok(())
}
