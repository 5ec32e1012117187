//! Stand-in detector that corrupts ground truth in controlled ways.
//!
//! Each frame draws from its own ChaCha stream keyed by (seed, frame
//! index), and spurious boxes from a second stream, so the output for one
//! frame does not depend on any other frame and adding spurious boxes
//! leaves the true detections untouched.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::classification::HarmLabel;
use crate::error::{Error, Result};
use crate::polygon::Point2;
use crate::simulation::Frame;

/// Spurious boxes keep at least this ground-plane distance from every
/// ground-truth centre.
pub const SPURIOUS_CLEARANCE: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    /// m, Gaussian jitter on each centre axis
    pub center_sigma: f64,
    pub miss_rate: f64,
    /// Expected spurious boxes per frame (Poisson).
    pub spurious_rate: f64,
    pub label_flip_rate: f64,
    /// Frames before a ground-truth harmful onset in which the object is
    /// already reported harmful.
    pub early_harm_frames: u32,
    /// Share of spurious boxes labeled harmless.
    pub spurious_harmless_fraction: f64,
    /// Uniform range for detections of real objects.
    pub matched_confidence: [f64; 2],
    /// Uniform range for spurious boxes.
    pub spurious_confidence: [f64; 2],
    pub seed: u64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            center_sigma: 0.0,
            miss_rate: 0.0,
            spurious_rate: 0.0,
            label_flip_rate: 0.0,
            early_harm_frames: 0,
            spurious_harmless_fraction: 0.8,
            matched_confidence: [0.7, 1.0],
            spurious_confidence: [0.1, 0.9],
            seed: 0,
        }
    }
}

impl NoiseConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: NoiseConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let unit = [
            ("miss_rate", self.miss_rate),
            ("label_flip_rate", self.label_flip_rate),
            ("spurious_harmless_fraction", self.spurious_harmless_fraction),
        ];
        for (name, v) in unit {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        if !(self.center_sigma >= 0.0 && self.center_sigma.is_finite()) {
            return Err(Error::Config("center_sigma must be >= 0".into()));
        }
        if !(self.spurious_rate >= 0.0 && self.spurious_rate.is_finite()) {
            return Err(Error::Config("spurious_rate must be >= 0".into()));
        }
        for (name, [lo, hi]) in [("matched_confidence", self.matched_confidence), ("spurious_confidence", self.spurious_confidence)] {
            if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
                return Err(Error::Config(format!("{name} must be an ordered range inside [0, 1]")));
            }
        }
        Ok(())
    }

    /// True when the configuration reproduces ground truth exactly.
    pub fn is_identity(&self) -> bool {
        self.center_sigma == 0.0
            && self.miss_rate == 0.0
            && self.spurious_rate == 0.0
            && self.label_flip_rate == 0.0
            && self.early_harm_frames == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub frame: u64,
    pub center: [f64; 3],
    pub dims: [f64; 3],
    pub yaw: f64,
    pub label: HarmLabel,
    pub confidence: f64,
}

impl Detection {
    pub fn ground_center(&self) -> Point2 {
        Point2::new(self.center[0], self.center[1])
    }
}

fn uniform(rng: &mut ChaCha8Rng, [lo, hi]: [f64; 2]) -> f64 {
    if hi > lo {
        rng.gen_range(lo..=hi)
    } else {
        lo
    }
}

/// (frame index, object id) pairs reported harmful ahead of their onset.
fn early_harm_set(frames: &[Frame], k: u32) -> HashSet<(u64, String)> {
    let mut out = HashSet::new();
    if k == 0 {
        return out;
    }
    let mut onset: BTreeMap<(u64, &str), u64> = BTreeMap::new();
    for f in frames {
        for o in &f.objects {
            if o.label == HarmLabel::Harmful {
                onset.entry((f.scenario, o.object.id.as_str())).or_insert(f.index);
            }
        }
    }
    for f in frames {
        for o in &f.objects {
            if let Some(&first) = onset.get(&(f.scenario, o.object.id.as_str())) {
                if f.index < first && first - f.index <= k as u64 {
                    out.insert((f.index, o.object.id.clone()));
                }
            }
        }
    }
    out
}

const SPURIOUS_DIMS: [[f64; 3]; 3] = [[4.5, 1.9, 1.5], [0.6, 0.6, 1.75], [1.0, 1.0, 1.0]];
const SPURIOUS_STREAM: u64 = 1 << 63;

pub fn run_stub(frames: &[Frame], cfg: &NoiseConfig) -> Result<Vec<Detection>> {
    cfg.validate()?;
    let early = early_harm_set(frames, cfg.early_harm_frames);
    let jitter = Normal::new(0.0, cfg.center_sigma).map_err(|e| Error::Config(e.to_string()))?;
    let spawn = if cfg.spurious_rate > 0.0 {
        Some(Poisson::new(cfg.spurious_rate).map_err(|e| Error::Config(e.to_string()))?)
    } else {
        None
    };
    let identity = cfg.is_identity();

    let mut out = Vec::new();
    for frame in frames {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(frame.index);
        for o in &frame.objects {
            // Fixed draw order per object keeps streams aligned across configs.
            let missed = rng.gen::<f64>() < cfg.miss_rate;
            let flip = rng.gen::<f64>() < cfg.label_flip_rate;
            let offset: [f64; 3] = [jitter.sample(&mut rng), jitter.sample(&mut rng), jitter.sample(&mut rng)];
            let confidence = uniform(&mut rng, cfg.matched_confidence);
            if missed {
                continue;
            }
            let mut label = o.label;
            if early.contains(&(frame.index, o.object.id.clone())) {
                label = HarmLabel::Harmful;
            }
            if flip {
                label = label.flipped();
            }
            let c = o.object.center;
            out.push(Detection {
                frame: frame.index,
                center: [c[0] + offset[0], c[1] + offset[1], c[2] + offset[2]],
                dims: o.object.dims,
                yaw: o.object.yaw,
                label,
                confidence: if identity { 1.0 } else { confidence },
            });
        }

        if let Some(poisson) = &spawn {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(SPURIOUS_STREAM | frame.index);
            let count = poisson.sample(&mut rng) as usize;
            for _ in 0..count {
                if let Some(d) = spurious_box(frame, cfg, &mut rng) {
                    out.push(d);
                }
            }
        }
    }
    Ok(out)
}

fn spurious_box(frame: &Frame, cfg: &NoiseConfig, rng: &mut ChaCha8Rng) -> Option<Detection> {
    let dims = SPURIOUS_DIMS[rng.gen_range(0..SPURIOUS_DIMS.len())];
    let label = if rng.gen::<f64>() < cfg.spurious_harmless_fraction {
        HarmLabel::Harmless
    } else {
        HarmLabel::Harmful
    };
    let confidence = uniform(rng, cfg.spurious_confidence);
    let yaw = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
    for _ in 0..50 {
        let bearing = rng.gen_range(-0.45..0.45) * frame.fov;
        let range = rng.gen_range(3.0..50.0);
        let p = frame.ego.pose.to_world(Point2::new(range * bearing.sin(), range * bearing.cos()));
        let clear = frame
            .objects
            .iter()
            .all(|o| o.object.ground_center().distance(p) > SPURIOUS_CLEARANCE);
        if clear {
            return Some(Detection {
                frame: frame.index,
                center: [p.x, p.y, dims[2] / 2.0],
                dims,
                yaw,
                label,
                confidence,
            });
        }
    }
    None
}

pub fn write_detections(path: &Path, detections: &[Detection]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for d in detections {
        serde_json::to_writer(&mut out, d)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_detections(path: &Path) -> Result<Vec<Detection>> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let d: Detection = serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
            path: path.to_path_buf(),
            line: i + 1,
            reason: e.to_string(),
        })?;
        if !(0.0..=1.0).contains(&d.confidence) || !d.dims.iter().all(|v| *v > 0.0) {
            return Err(Error::MalformedRecord {
                path: path.to_path_buf(),
                line: i + 1,
                reason: "confidence must lie in [0, 1] and dims must be > 0".into(),
            });
        }
        out.push(d);
    }
    Ok(out)
}
