//! Ego-state sweeps and harmful-onset timing.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::classification::{relabel, HarmLabel};
use crate::detector::Detection;
use crate::error::{Error, Result};
use crate::evaluation::match_detections;
use crate::geometry::{EgoState, ZoneParams};
use crate::simulation::Frame;

/// Labels of every object in a frame under substituted (speed, steering) pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMatrix {
    pub frame: u64,
    pub object_ids: Vec<String>,
    pub speeds: Vec<f64>,
    /// rad
    pub steers: Vec<f64>,
    /// `labels[speed][steer][object]`
    pub labels: Vec<Vec<Vec<HarmLabel>>>,
}

impl SweepMatrix {
    pub fn label(&self, speed_idx: usize, steer_idx: usize, object: &str) -> Option<HarmLabel> {
        let j = self.object_ids.iter().position(|id| id == object)?;
        Some(self.labels[speed_idx][steer_idx][j])
    }

    pub fn harmful_ids(&self, speed_idx: usize, steer_idx: usize) -> Vec<&str> {
        self.object_ids
            .iter()
            .zip(&self.labels[speed_idx][steer_idx])
            .filter(|(_, l)| **l == HarmLabel::Harmful)
            .map(|(id, _)| id.as_str())
            .collect()
    }
}

pub fn sweep_ego_state(frame: &Frame, speeds: &[f64], steers: &[f64], params: &ZoneParams) -> Result<SweepMatrix> {
    let mut labels = Vec::with_capacity(speeds.len());
    for &speed in speeds {
        let mut row = Vec::with_capacity(steers.len());
        for &steer in steers {
            let ego = EgoState {
                speed,
                steering_angle: steer,
                ..frame.ego
            };
            row.push(relabel(frame, &ego, params)?);
        }
        labels.push(row);
    }
    Ok(SweepMatrix {
        frame: frame.index,
        object_ids: frame.objects.iter().map(|o| o.object.id.clone()).collect(),
        speeds: speeds.to_vec(),
        steers: steers.to_vec(),
        labels,
    })
}

impl fmt::Display for SweepMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:<16}", "object")?;
        for s in &self.speeds {
            for t in &self.steers {
                write!(f, "{:>20}", format!("{s:.2}m/s {:.1}deg", t.to_degrees()))?;
            }
        }
        writeln!(f)?;
        for (j, id) in self.object_ids.iter().enumerate() {
            write!(f, "{id:<16}")?;
            for row in &self.labels {
                for cell in row {
                    write!(f, "{:>20}", cell[j].to_string())?;
                }
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Frames by which predicted harmful onsets precede (negative) or trail
/// (positive) ground-truth onsets, per object track.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LeadReport {
    /// (scenario, object id, lead)
    pub leads: Vec<(u64, String, i64)>,
    pub histogram: BTreeMap<i64, usize>,
    /// Tracks harmful in ground truth that were never predicted harmful.
    pub missed_onsets: usize,
    /// Tracks predicted harmful that never are in ground truth.
    pub spurious_onsets: usize,
}

impl LeadReport {
    /// Most frequent lead; ties resolve to the smallest value.
    pub fn mode(&self) -> Option<i64> {
        let max = *self.histogram.values().max()?;
        self.histogram.iter().find(|(_, n)| **n == max).map(|(k, _)| *k)
    }
}

/// Associates detections with tracks by label-agnostic greedy matching at
/// `match_threshold` metres, then compares first harmful frames.
pub fn temporal_lead_analysis(detections: &[Detection], frames: &[Frame], match_threshold: f64) -> Result<LeadReport> {
    let position: BTreeMap<u64, usize> = frames.iter().enumerate().map(|(i, f)| (f.index, i)).collect();
    let mut by_frame: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, d) in detections.iter().enumerate() {
        let pos = *position.get(&d.frame).ok_or(Error::UnknownFrame { index: i, frame: d.frame })?;
        by_frame.entry(pos).or_default().push(i);
    }

    let mut gt_onset: BTreeMap<(u64, &str), u64> = BTreeMap::new();
    let mut pred_onset: BTreeMap<(u64, &str), u64> = BTreeMap::new();
    let mut ordered: Vec<&Frame> = frames.iter().collect();
    ordered.sort_by_key(|f| f.index);
    for f in ordered {
        for o in &f.objects {
            if o.label == HarmLabel::Harmful {
                gt_onset.entry((f.scenario, o.object.id.as_str())).or_insert(f.index);
            }
        }
        let Some(list) = by_frame.get_mut(&position[&f.index]) else {
            continue;
        };
        list.sort_by(|&a, &b| detections[b].confidence.total_cmp(&detections[a].confidence).then(a.cmp(&b)));
        let dets: Vec<&Detection> = list.iter().map(|&i| &detections[i]).collect();
        for (d, gt) in dets.iter().zip(match_detections(&dets, &f.objects, match_threshold)) {
            if let (Some(g), HarmLabel::Harmful) = (gt, d.label) {
                pred_onset.entry((f.scenario, f.objects[g].object.id.as_str())).or_insert(f.index);
            }
        }
    }

    let mut report = LeadReport::default();
    for (key, &gt_first) in &gt_onset {
        match pred_onset.get(key) {
            Some(&pred_first) => {
                let lead = pred_first as i64 - gt_first as i64;
                report.leads.push((key.0, key.1.to_string(), lead));
                *report.histogram.entry(lead).or_default() += 1;
            }
            None => report.missed_onsets += 1,
        }
    }
    report.spurious_onsets = pred_onset.keys().filter(|k| !gt_onset.contains_key(*k)).count();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classification::{label_frame, Category, Distribution, SceneObject};
    use crate::detector::{run_stub, NoiseConfig};
    use crate::geometry::{CameraModel, Pose2};
    use crate::simulation::Snapshot;

    fn car(id: &str, x: f64, y: f64) -> SceneObject {
        SceneObject {
            id: id.into(),
            center: [x, y, 0.75],
            dims: [4.5, 1.9, 1.5],
            yaw: 0.0,
            category: Category::Vehicle,
            distribution: Distribution::Id,
            kind: "car".into(),
        }
    }

    fn labeled(speed: f64, steer: f64, objects: Vec<SceneObject>) -> Frame {
        let snap = Snapshot {
            index: 0,
            timestamp: 0.0,
            scenario: 1,
            ego: EgoState::new(speed, steer, Pose2::default(), 2.7).unwrap(),
            fov: std::f64::consts::FRAC_PI_2,
            camera: CameraModel::default(),
            objects,
        };
        label_frame(&snap, &ZoneParams::default()).unwrap()
    }

    #[test]
    fn speed_sweep_moves_far_object_in_and_out() {
        // Car body spans 12.75..17.25 m ahead; zones reach 17.2 and 6.8 m.
        let f = labeled(6.6, 0.0, vec![car("ahead", 0.0, 15.0)]);
        let m = sweep_ego_state(&f, &[6.6, 1.4], &[0.0], &ZoneParams::default()).unwrap();
        assert_eq!(m.label(0, 0, "ahead"), Some(HarmLabel::Harmful));
        assert_eq!(m.label(1, 0, "ahead"), Some(HarmLabel::Harmless));
    }

    #[test]
    fn standstill_row_only_flags_close_objects() {
        let f = labeled(5.0, 0.0, vec![car("near", 0.0, 3.0), car("mid", 0.0, 10.0)]);
        let m = sweep_ego_state(&f, &[0.0], &[0.0], &ZoneParams::default()).unwrap();
        assert_eq!(m.harmful_ids(0, 0), vec!["near"]);
    }

    #[test]
    fn steering_sweep_reaches_right_offset_object() {
        let theta = 26f64.to_radians();
        // Zone centreline at 26° right passes (sin 26°, cos 26°) * 13 ≈ (5.7, 11.7).
        let f = labeled(8.0, 0.0, vec![car("right", 5.5, 12.0)]);
        let m = sweep_ego_state(&f, &[8.0], &[0.0, theta], &ZoneParams::default()).unwrap();
        assert_eq!(m.label(0, 0, "right"), Some(HarmLabel::Harmless));
        assert_eq!(m.label(0, 1, "right"), Some(HarmLabel::Harmful));
        assert!(m.to_string().contains("right"));
    }

    fn track(onset: u64, n: u64) -> Vec<Frame> {
        (0..n)
            .map(|i| {
                let mut f = labeled(5.0, 0.0, vec![car("t", 0.0, 30.0)]);
                f.index = i;
                f.timestamp = i as f64 * 0.3;
                f.objects[0].label = if i >= onset { HarmLabel::Harmful } else { HarmLabel::Harmless };
                f
            })
            .collect()
    }

    #[test]
    fn perfect_stub_has_zero_lead() {
        let fs = track(4, 8);
        let dets = run_stub(&fs, &NoiseConfig::default()).unwrap();
        let r = temporal_lead_analysis(&dets, &fs, 2.0).unwrap();
        assert_eq!(r.histogram, BTreeMap::from([(0, 1)]));
    }

    #[test]
    fn early_stub_leads_by_two() {
        let fs = track(4, 8);
        let cfg = NoiseConfig { early_harm_frames: 2, ..NoiseConfig::default() };
        let dets = run_stub(&fs, &cfg).unwrap();
        let r = temporal_lead_analysis(&dets, &fs, 2.0).unwrap();
        assert_eq!(r.mode(), Some(-2));
    }

    #[test]
    fn never_harmful_tracks_are_excluded() {
        let fs = track(100, 5);
        let dets = run_stub(&fs, &NoiseConfig::default()).unwrap();
        let r = temporal_lead_analysis(&dets, &fs, 2.0).unwrap();
        assert!(r.leads.is_empty());
        assert_eq!(r.mode(), None);
    }
}
