//! Writes bird's-eye and camera SVGs for the busiest frame of a scenario.
//!
//! cargo run --example render_frame [out_dir]

use std::path::PathBuf;

use dangerzone::classification::HarmLabel;
use dangerzone::render::{render_bev, render_camera, RenderStyle};
use dangerzone::simulation::{generate_scenario, ScenarioSpec};

fn main() -> anyhow::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    let config = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/city_block.toml");
    let spec = ScenarioSpec::from_file(config.as_ref())?;
    let params = spec.zone.unwrap_or_default();
    let frames = generate_scenario(&spec, &params)?;
    let frame = frames
        .iter()
        .max_by_key(|f| f.objects.iter().filter(|o| o.label == HarmLabel::Harmful).count())
        .expect("scenario has frames");

    let style = RenderStyle::default();
    let bev = out.join(format!("frame{}-bev.svg", frame.index));
    let cam = out.join(format!("frame{}-camera.svg", frame.index));
    std::fs::write(&bev, render_bev(frame, &params, &style)?)?;
    std::fs::write(&cam, render_camera(frame, &params, &style)?)?;
    println!("frame {} ({} objects): {} and {}", frame.index, frame.objects.len(), bev.display(), cam.display());
    Ok(())
}
