//! On-disk datasets, split planning and label statistics.
//!
//! A dataset directory holds one split:
//!
//! ```text
//! <dir>/manifest          JSON document (DatasetManifest)
//! <dir>/frames.<split>    one JSON Frame record per line
//! ```
//!
//! Floats are written in their shortest round-trip decimal form, so reading
//! a dataset back yields bit-identical values. The field layout is fixed by
//! the serde definitions of [`DatasetManifest`] and [`Frame`] and is
//! described in `docs/formats.md`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classification::{Category, Distribution, HarmLabel};
use crate::error::{Error, Result};
use crate::geometry::ZoneParams;
use crate::simulation::{concat_scenarios, generate_scenario, Frame, ScenarioSpec};

pub const FORMAT_VERSION: &str = "dangerzone-dataset/1";
pub const MANIFEST_FILE: &str = "manifest";
const LOCK_FILE: &str = ".lock";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "validation" | "val" => Ok(Split::Validation),
            "test" => Ok(Split::Test),
            other => Err(Error::invalid(format!("unknown split {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format_version: String,
    pub name: String,
    pub split: Split,
    pub frame_count: usize,
    pub scenario_seeds: Vec<u64>,
    pub zone_params: ZoneParams,
}

impl DatasetManifest {
    pub fn new(name: impl Into<String>, split: Split, frames: &[Frame], zone_params: ZoneParams) -> Self {
        let seeds: BTreeSet<u64> = frames.iter().map(|f| f.scenario).collect();
        Self {
            format_version: FORMAT_VERSION.to_string(),
            name: name.into(),
            split,
            frame_count: frames.len(),
            scenario_seeds: seeds.into_iter().collect(),
            zone_params,
        }
    }
}

pub fn frames_file(dir: &Path, split: Split) -> PathBuf {
    dir.join(format!("frames.{split}"))
}

/// Exclusive writer lock on a dataset directory, released on drop.
#[derive(Debug)]
pub struct DirLock {
    path: PathBuf,
}

impl DirLock {
    pub fn acquire(dir: &Path) -> Result<Self> {
        let path = dir.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(_) => Ok(Self { path }),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(Error::Locked(dir.to_path_buf())),
            Err(e) => Err(e.into()),
        }
    }
}

impl Drop for DirLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

pub fn write_dataset(frames: &[Frame], manifest: &DatasetManifest, dir: &Path) -> Result<()> {
    if manifest.frame_count != frames.len() {
        return Err(Error::FrameCountMismatch {
            declared: manifest.frame_count,
            found: frames.len(),
        });
    }
    if manifest.format_version != FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            found: manifest.format_version.clone(),
            expected: FORMAT_VERSION.to_string(),
        });
    }
    fs::create_dir_all(dir)?;
    let _lock = DirLock::acquire(dir)?;

    let mut out = BufWriter::new(File::create(frames_file(dir, manifest.split))?);
    for frame in frames {
        serde_json::to_writer(&mut out, frame)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;

    let mut text = serde_json::to_string_pretty(manifest)?;
    text.push('\n');
    fs::write(dir.join(MANIFEST_FILE), text)?;
    Ok(())
}

pub fn read_manifest(dir: &Path) -> Result<DatasetManifest> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path)?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::MalformedRecord {
        path: path.clone(),
        line: e.line(),
        reason: e.to_string(),
    })?;
    let version = value.get("format_version").and_then(|v| v.as_str()).unwrap_or("<missing>");
    if version != FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            found: version.to_string(),
            expected: FORMAT_VERSION.to_string(),
        });
    }
    serde_json::from_value(value).map_err(|e| Error::MalformedRecord {
        path,
        line: 1,
        reason: e.to_string(),
    })
}

pub fn read_dataset(dir: &Path) -> Result<(Vec<Frame>, DatasetManifest)> {
    let manifest = read_manifest(dir)?;
    let path = frames_file(dir, manifest.split);
    let reader = BufReader::new(File::open(&path)?);
    let mut frames = Vec::with_capacity(manifest.frame_count);
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let frame: Frame = serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
            path: path.clone(),
            line: i + 1,
            reason: e.to_string(),
        })?;
        frames.push(frame);
    }
    if frames.len() != manifest.frame_count {
        return Err(Error::FrameCountMismatch {
            declared: manifest.frame_count,
            found: frames.len(),
        });
    }
    Ok((frames, manifest))
}

/// Object counts by category, distribution and harm label.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StatsTable {
    counts: BTreeMap<(Category, Distribution, HarmLabel), usize>,
}

impl StatsTable {
    pub fn count(&self, category: Category, distribution: Distribution, label: HarmLabel) -> usize {
        self.counts.get(&(category, distribution, label)).copied().unwrap_or(0)
    }

    pub fn category_total(&self, category: Category) -> usize {
        self.sum(|c, _, _| c == category)
    }

    pub fn total(&self, distribution: Distribution, label: HarmLabel) -> usize {
        self.sum(|_, d, l| d == distribution && l == label)
    }

    pub fn label_total(&self, label: HarmLabel) -> usize {
        self.sum(|_, _, l| l == label)
    }

    pub fn distribution_total(&self, distribution: Distribution) -> usize {
        self.sum(|_, d, _| d == distribution)
    }

    pub fn grand_total(&self) -> usize {
        self.counts.values().sum()
    }

    /// OOD/ID object ratio; `None` without ID objects.
    pub fn ood_id_ratio(&self) -> Option<f64> {
        let id = self.distribution_total(Distribution::Id);
        (id > 0).then(|| self.distribution_total(Distribution::Ood) as f64 / id as f64)
    }

    fn sum(&self, pred: impl Fn(Category, Distribution, HarmLabel) -> bool) -> usize {
        self.counts
            .iter()
            .filter(|((c, d, l), _)| pred(*c, *d, *l))
            .map(|(_, n)| n)
            .sum()
    }

    /// Rows of (category, distribution, label, count) in display order.
    pub fn rows(&self) -> Vec<(Category, Distribution, HarmLabel, usize)> {
        let mut rows = Vec::new();
        for c in Category::ALL {
            for l in HarmLabel::ALL {
                for d in Distribution::ALL {
                    rows.push((c, d, l, self.count(c, d, l)));
                }
            }
        }
        rows
    }
}

pub fn compute_stats(frames: &[Frame]) -> StatsTable {
    let mut table = StatsTable::default();
    for o in frames.iter().flat_map(|f| &f.objects) {
        *table
            .counts
            .entry((o.object.category, o.object.distribution, o.label))
            .or_default() += 1;
    }
    table
}

impl fmt::Display for StatsTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<16}{:<16}{:>10}", "Category", "Label", "Count")?;
        writeln!(f, "{}", "-".repeat(42))?;
        let name = |c: Category| match c {
            Category::Vehicle => "Vehicles",
            Category::Pedestrian => "Pedestrians",
            Category::Static => "Static objects",
        };
        for c in Category::ALL {
            let with_ood = Distribution::ALL.iter().any(|&d| {
                d == Distribution::Ood && HarmLabel::ALL.iter().any(|&l| self.count(c, d, l) > 0)
            }) || c == Category::Static;
            let mut first = true;
            for l in HarmLabel::ALL {
                if with_ood {
                    for d in Distribution::ALL {
                        let head = if first { name(c) } else { "" };
                        writeln!(f, "{:<16}{:<16}{:>10}", head, format!("{l}: {d}"), self.count(c, d, l))?;
                        first = false;
                    }
                } else {
                    let head = if first { name(c) } else { "" };
                    let n: usize = Distribution::ALL.iter().map(|&d| self.count(c, d, l)).sum();
                    writeln!(f, "{:<16}{:<16}{:>10}", head, l.to_string(), n)?;
                    first = false;
                }
            }
        }
        let mut first = true;
        for l in HarmLabel::ALL {
            for d in Distribution::ALL {
                let head = if first { "Total" } else { "" };
                writeln!(f, "{:<16}{:<16}{:>10}", head, format!("{l}: {d}"), self.total(d, l))?;
                first = false;
            }
        }
        writeln!(f, "{:<16}{:<16}{:>10}", "", "all", self.grand_total())?;
        match self.ood_id_ratio() {
            Some(r) => write!(f, "OOD/ID ratio: {r:.3}"),
            None => write!(f, "OOD/ID ratio: n/a"),
        }
    }
}

/// Assigns whole scenarios to splits so no scenario contributes frames to
/// two splits. Counts follow the ratios by largest remainder, and every
/// split with a non-zero ratio receives at least one scenario.
pub fn split_dataset(scenarios: &[u64], ratios: &[(Split, f64)], seed: u64) -> Result<BTreeMap<Split, Vec<u64>>> {
    let sum: f64 = ratios.iter().map(|(_, r)| r).sum();
    if (sum - 1.0).abs() > 1e-9 || ratios.iter().any(|(_, r)| !(*r >= 0.0)) {
        return Err(Error::Split(format!("ratios must be >= 0 and sum to 1, got {sum}")));
    }
    let distinct: BTreeSet<u64> = scenarios.iter().copied().collect();
    if distinct.len() != scenarios.len() {
        return Err(Error::Split("scenario seeds must be unique".into()));
    }
    let nonzero = ratios.iter().filter(|(_, r)| *r > 0.0).count();
    let n = scenarios.len();
    if n < nonzero {
        return Err(Error::Split(format!("{n} scenarios cannot fill {nonzero} non-empty splits")));
    }

    let mut counts: Vec<usize> = ratios.iter().map(|(_, r)| (r * n as f64 + 1e-9).floor() as usize).collect();
    let mut order: Vec<usize> = (0..ratios.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = ratios[a].1 * n as f64 - counts[a] as f64;
        let fb = ratios[b].1 * n as f64 - counts[b] as f64;
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    let mut left = n - counts.iter().sum::<usize>();
    for &i in order.iter().cycle().take(left) {
        counts[i] += 1;
        left -= 1;
    }
    debug_assert_eq!(left, 0);
    for i in 0..ratios.len() {
        if ratios[i].1 > 0.0 && counts[i] == 0 {
            let donor = (0..counts.len()).max_by_key(|&j| counts[j]).expect("at least one split");
            counts[donor] -= 1;
            counts[i] += 1;
        }
    }

    let mut shuffled = scenarios.to_vec();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut out = BTreeMap::new();
    let mut cursor = 0;
    for ((split, _), count) in ratios.iter().zip(counts) {
        let entry: &mut Vec<u64> = out.entry(*split).or_default();
        entry.extend_from_slice(&shuffled[cursor..cursor + count]);
        cursor += count;
    }
    Ok(out)
}

/// Generates one split from a scenario template, one scenario per seed.
/// OOD census entries are kept only for the test split.
pub fn generate_split(template: &ScenarioSpec, split: Split, seeds: &[u64], params: &ZoneParams) -> Result<Vec<Frame>> {
    let base = if split == Split::Test {
        template.clone()
    } else {
        template.without_ood()
    };
    let mut streams = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let spec = ScenarioSpec { seed, ..base.clone() };
        streams.push(generate_scenario(&spec, params)?);
    }
    Ok(concat_scenarios(streams))
}
