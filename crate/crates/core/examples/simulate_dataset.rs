//! Generates train/validation/test splits from one scenario template,
//! writes them to disk, reads them back and prints label statistics.
//!
//! cargo run --example simulate_dataset [out_dir]

use std::path::PathBuf;

use dangerzone::dataset::{compute_stats, generate_split, read_dataset, split_dataset, write_dataset, DatasetManifest, Split};
use dangerzone::simulation::ScenarioSpec;

fn main() -> anyhow::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("dangerzone-splits"));
    let config = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/city_block.toml");
    let template = ScenarioSpec::from_file(config.as_ref())?;
    let params = template.zone.unwrap_or_default();

    let seeds: Vec<u64> = (100..110).collect();
    let splits = split_dataset(&seeds, &[(Split::Train, 0.6), (Split::Validation, 0.2), (Split::Test, 0.2)], 1)?;
    for (split, seeds) in &splits {
        let frames = generate_split(&template, *split, seeds, &params)?;
        let dir = out.join(split.name());
        let manifest = DatasetManifest::new(format!("city-block-{split}"), *split, &frames, params);
        write_dataset(&frames, &manifest, &dir)?;

        let (back, _) = read_dataset(&dir)?;
        assert_eq!(back, frames);
        println!("== {split}: scenarios {seeds:?}, {} frames in {}", frames.len(), dir.display());
        println!("{}\n", compute_stats(&back));
    }
    Ok(())
}
