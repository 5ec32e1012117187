//! Scores a noisy detector under the combined and both separated
//! evaluation variants and prints the summary table.
//!
//! cargo run --example evaluate_variants

use dangerzone::detector::{run_stub, NoiseConfig};
use dangerzone::evaluation::{evaluate_variants, EvalConfig, Subset, Variant};
use dangerzone::simulation::{generate_scenario, ScenarioSpec};

fn main() -> anyhow::Result<()> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs");
    let spec = ScenarioSpec::from_file(format!("{dir}/city_block.toml").as_ref())?;
    let noise = NoiseConfig::from_toml_str(&std::fs::read_to_string(format!("{dir}/noise.toml"))?)?;
    let cfg = EvalConfig::from_toml_str(&std::fs::read_to_string(format!("{dir}/eval.toml"))?)?;

    let frames = generate_scenario(&spec, &spec.zone.unwrap_or_default())?;
    let dets = run_stub(&frames, &noise)?;
    let summary = evaluate_variants(&dets, &frames, &cfg)?;
    println!("{summary}");

    let all = summary.report(Variant::SeparatedAllFps).and_then(|r| r.total_map(Subset::Ood));
    let matched = summary.report(Variant::SeparatedMatchedFps).and_then(|r| r.total_map(Subset::Ood));
    if let (Some(a), Some(m)) = (all, matched) {
        println!("\nOOD mAP drops by {:.4} when background false positives are charged to OOD", m - a);
    }
    let combined = summary.report(Variant::Combined).unwrap();
    for c in &combined.confusion {
        println!("@{:.1} m: TP {} (ID {}, OOD {}), misclassified {}, unmatched {}", c.threshold, c.tp_id + c.tp_ood, c.tp_id, c.tp_ood, c.fp_misclassified, c.fp_unmatched);
    }
    Ok(())
}
