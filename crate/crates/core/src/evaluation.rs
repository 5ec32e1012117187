//! Center-distance mAP for harmful/harmless detection, with ID/OOD splits.
//!
//! Matching is greedy: within a frame, detections are visited in descending
//! confidence and each takes the nearest still-free ground-truth box whose
//! ground-plane centre lies within the distance threshold, whatever its
//! label. A detection matched to a box of the other label is a
//! misclassification; one matched to nothing is an unmatched (background)
//! false positive.
//!
//! Three ways of tallying the matches:
//!
//! * [`Variant::Combined`]: one tally per label over every object.
//! * [`Variant::SeparatedAllFps`]: separate ID and OOD tallies. True
//!   positives and misclassifications go to the tally of the matched
//!   object's distribution; unmatched false positives all go to OOD.
//! * [`Variant::SeparatedMatchedFps`]: as above, but unmatched false
//!   positives are dropped.
//!
//! AP uses N-point interpolation (101 by default) without NuScenes'
//! min-recall/min-precision clipping. mAP averages over thresholds first,
//! then over labels.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::classification::{Distribution, HarmLabel};
use crate::detector::Detection;
use crate::error::{Error, Result};
use crate::simulation::{Frame, LabeledObject};

pub const REPORT_FORMAT_VERSION: &str = "dangerzone-eval/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Combined,
    SeparatedAllFps,
    SeparatedMatchedFps,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Combined, Variant::SeparatedAllFps, Variant::SeparatedMatchedFps];
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Combined => "combined",
            Variant::SeparatedAllFps => "separated_all_fps",
            Variant::SeparatedMatchedFps => "separated_matched_fps",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    /// m, strictly increasing
    pub distance_thresholds: Vec<f64>,
    pub variant: Variant,
    pub recall_points: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            distance_thresholds: vec![0.5, 1.0, 2.0, 4.0],
            variant: Variant::Combined,
            recall_points: 101,
        }
    }
}

impl EvalConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: EvalConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.distance_thresholds.is_empty() {
            return Err(Error::Config("at least one distance threshold is required".into()));
        }
        if !self.distance_thresholds.iter().all(|t| *t > 0.0 && t.is_finite()) {
            return Err(Error::Config("distance thresholds must be > 0".into()));
        }
        if self.distance_thresholds.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("distance thresholds must be strictly increasing".into()));
        }
        if self.recall_points < 2 {
            return Err(Error::Config("recall_points must be >= 2".into()));
        }
        Ok(())
    }
}

/// Greedy center-distance matching within one frame.
///
/// `detections` must already be in descending confidence order. Returns,
/// per detection, the index of the ground-truth object it claimed. Equal
/// distances go to the lower ground-truth index.
pub fn match_detections(detections: &[&Detection], ground_truth: &[LabeledObject], threshold: f64) -> Vec<Option<usize>> {
    let mut taken = vec![false; ground_truth.len()];
    detections
        .iter()
        .map(|d| {
            let c = d.ground_center();
            let mut best: Option<(usize, f64)> = None;
            for (j, gt) in ground_truth.iter().enumerate() {
                if taken[j] {
                    continue;
                }
                let dist = gt.object.ground_center().distance(c);
                if dist <= threshold && best.is_none_or(|(_, b)| dist < b) {
                    best = Some((j, dist));
                }
            }
            best.map(|(j, _)| {
                taken[j] = true;
                j
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub recall: f64,
    pub precision: f64,
}

/// Precision/recall after each ranked detection.
pub fn pr_curve(hits: &[bool], gt_count: usize) -> Vec<PrPoint> {
    let mut tp = 0usize;
    hits.iter()
        .enumerate()
        .map(|(k, &hit)| {
            tp += usize::from(hit);
            PrPoint {
                recall: tp as f64 / gt_count as f64,
                precision: tp as f64 / (k + 1) as f64,
            }
        })
        .collect()
}

/// Mean over `recall_points` evenly spaced recall levels in [0, 1] of the
/// best precision reached at or beyond each level (0 where none is).
pub fn average_precision(points: &[PrPoint], recall_points: usize) -> f64 {
    assert!(recall_points >= 2, "need at least two recall levels");
    let mut best_after = vec![0.0f64; points.len() + 1];
    for k in (0..points.len()).rev() {
        best_after[k] = best_after[k + 1].max(points[k].precision);
    }
    let last = (recall_points - 1) as f64;
    let sum: f64 = (0..recall_points)
        .map(|i| {
            let level = i as f64 / last;
            let first = points.partition_point(|p| p.recall < level);
            best_after[first]
        })
        .sum();
    sum / recall_points as f64
}

/// AP of a confidence-ranked hit list; `None` when there is nothing to find.
pub fn ranked_ap(hits: &[bool], gt_count: usize, recall_points: usize) -> Option<f64> {
    (gt_count > 0).then(|| average_precision(&pr_curve(hits, gt_count), recall_points))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subset {
    All,
    Id,
    Ood,
}

impl Subset {
    fn of(d: Distribution) -> Self {
        match d {
            Distribution::Id => Subset::Id,
            Distribution::Ood => Subset::Ood,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchOutcome {
    TruePositive,
    Misclassified,
    Unmatched,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchRecord {
    /// Position in the evaluated detection list.
    pub detection: usize,
    pub threshold: f64,
    pub frame: u64,
    pub object: Option<String>,
    pub outcome: MatchOutcome,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub threshold: f64,
    pub tp_id: usize,
    pub tp_ood: usize,
    pub fp_misclassified: usize,
    pub fp_unmatched: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp_id + self.tp_ood + self.fp_misclassified + self.fp_unmatched
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApRow {
    pub label: HarmLabel,
    pub subset: Subset,
    pub gt_count: usize,
    /// One entry per distance threshold.
    pub ap: Vec<Option<f64>>,
    pub map: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub format_version: String,
    pub variant: Variant,
    pub distance_thresholds: Vec<f64>,
    pub recall_points: usize,
    pub rows: Vec<ApRow>,
    /// Mean over labels, per subset present in this variant.
    pub map: BTreeMap<Subset, f64>,
    pub confusion: Vec<ConfusionCounts>,
    pub audit: Vec<MatchRecord>,
}

impl EvalReport {
    pub fn class_map(&self, label: HarmLabel, subset: Subset) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.label == label && r.subset == subset)
            .and_then(|r| r.map)
    }

    pub fn total_map(&self, subset: Subset) -> Option<f64> {
        self.map.get(&subset).copied()
    }
}

/// Per-threshold matching of every detection: (frame position, gt index).
struct Matching {
    per_threshold: Vec<Vec<Option<(usize, usize)>>>,
}

fn match_all(detections: &[Detection], frames: &[Frame], thresholds: &[f64]) -> Result<(Matching, Vec<usize>)> {
    let position: BTreeMap<u64, usize> = frames.iter().enumerate().map(|(i, f)| (f.index, i)).collect();
    let mut frame_of = Vec::with_capacity(detections.len());
    let mut by_frame: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, d) in detections.iter().enumerate() {
        let pos = *position
            .get(&d.frame)
            .ok_or(Error::UnknownFrame { index: i, frame: d.frame })?;
        frame_of.push(pos);
        by_frame.entry(pos).or_default().push(i);
    }
    for list in by_frame.values_mut() {
        list.sort_by(|&a, &b| detections[b].confidence.total_cmp(&detections[a].confidence).then(a.cmp(&b)));
    }

    let mut per_threshold = Vec::with_capacity(thresholds.len());
    for &t in thresholds {
        let mut assigned = vec![None; detections.len()];
        for (&pos, list) in &by_frame {
            let ordered: Vec<&Detection> = list.iter().map(|&i| &detections[i]).collect();
            let m = match_detections(&ordered, &frames[pos].objects, t);
            for (&det, gt) in list.iter().zip(m) {
                assigned[det] = gt.map(|g| (pos, g));
            }
        }
        per_threshold.push(assigned);
    }
    Ok((Matching { per_threshold }, frame_of))
}

pub fn evaluate(detections: &[Detection], frames: &[Frame], cfg: &EvalConfig) -> Result<EvalReport> {
    cfg.validate()?;
    let (matching, _) = match_all(detections, frames, &cfg.distance_thresholds)?;

    let subsets: &[Subset] = match cfg.variant {
        Variant::Combined => &[Subset::All],
        _ => &[Subset::Id, Subset::Ood],
    };

    // Detection order for ranking: confidence, then input position.
    let mut ranked: Vec<usize> = (0..detections.len()).collect();
    ranked.sort_by(|&a, &b| detections[b].confidence.total_cmp(&detections[a].confidence).then(a.cmp(&b)));

    let gt_objects = || frames.iter().flat_map(|f| &f.objects);
    let mut rows = Vec::new();
    for &label in &HarmLabel::ALL {
        for &subset in subsets {
            let gt_count = gt_objects()
                .filter(|o| o.label == label && (subset == Subset::All || Subset::of(o.object.distribution) == subset))
                .count();
            let mut ap = Vec::with_capacity(cfg.distance_thresholds.len());
            for assigned in &matching.per_threshold {
                let mut hits = Vec::new();
                for &i in &ranked {
                    let d = &detections[i];
                    if d.label != label {
                        continue;
                    }
                    match assigned[i] {
                        Some((pos, g)) => {
                            let gt = &frames[pos].objects[g];
                            if subset == Subset::All || Subset::of(gt.object.distribution) == subset {
                                hits.push(gt.label == label);
                            }
                        }
                        None => {
                            let counted = match cfg.variant {
                                Variant::Combined => true,
                                Variant::SeparatedAllFps => subset == Subset::Ood,
                                Variant::SeparatedMatchedFps => false,
                            };
                            if counted {
                                hits.push(false);
                            }
                        }
                    }
                }
                ap.push(ranked_ap(&hits, gt_count, cfg.recall_points));
            }
            let defined: Vec<f64> = ap.iter().flatten().copied().collect();
            let map = (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64);
            rows.push(ApRow { label, subset, gt_count, ap, map });
        }
    }

    let mut map = BTreeMap::new();
    for &subset in subsets {
        let vals: Vec<f64> = rows.iter().filter(|r| r.subset == subset).filter_map(|r| r.map).collect();
        if !vals.is_empty() {
            map.insert(subset, vals.iter().sum::<f64>() / vals.len() as f64);
        }
    }

    let mut confusion = Vec::new();
    let mut audit = Vec::new();
    for (t, assigned) in cfg.distance_thresholds.iter().zip(&matching.per_threshold) {
        let mut counts = ConfusionCounts { threshold: *t, ..Default::default() };
        for (i, d) in detections.iter().enumerate() {
            let (outcome, object) = match assigned[i] {
                Some((pos, g)) => {
                    let gt = &frames[pos].objects[g];
                    let outcome = if gt.label == d.label {
                        match gt.object.distribution {
                            Distribution::Id => counts.tp_id += 1,
                            Distribution::Ood => counts.tp_ood += 1,
                        }
                        MatchOutcome::TruePositive
                    } else {
                        counts.fp_misclassified += 1;
                        MatchOutcome::Misclassified
                    };
                    (outcome, Some(gt.object.id.clone()))
                }
                None => {
                    counts.fp_unmatched += 1;
                    (MatchOutcome::Unmatched, None)
                }
            };
            audit.push(MatchRecord {
                detection: i,
                threshold: *t,
                frame: d.frame,
                object,
                outcome,
            });
        }
        confusion.push(counts);
    }

    Ok(EvalReport {
        format_version: REPORT_FORMAT_VERSION.to_string(),
        variant: cfg.variant,
        distance_thresholds: cfg.distance_thresholds.clone(),
        recall_points: cfg.recall_points,
        rows,
        map,
        confusion,
        audit,
    })
}

/// The three variants over the same detections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantSummary {
    pub format_version: String,
    pub reports: Vec<EvalReport>,
}

impl VariantSummary {
    pub fn report(&self, variant: Variant) -> Option<&EvalReport> {
        self.reports.iter().find(|r| r.variant == variant)
    }
}

pub fn evaluate_variants(detections: &[Detection], frames: &[Frame], cfg: &EvalConfig) -> Result<VariantSummary> {
    let reports = Variant::ALL
        .iter()
        .map(|&variant| evaluate(detections, frames, &EvalConfig { variant, ..cfg.clone() }))
        .collect::<Result<Vec<_>>>()?;
    Ok(VariantSummary {
        format_version: REPORT_FORMAT_VERSION.to_string(),
        reports,
    })
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"))
}

/// Columns: combined mAP, ID mAP (matched FPs only), OOD mAP (all FPs),
/// OOD mAP (matched FPs only).
impl fmt::Display for VariantSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let combined = self.report(Variant::Combined);
        let all = self.report(Variant::SeparatedAllFps);
        let matched = self.report(Variant::SeparatedMatchedFps);
        writeln!(
            f,
            "{:<10}{:>14}{:>18}{:>18}{:>18}",
            "class", "mAP", "mAP_ID", "mAP_OOD", "mAP_OOD"
        )?;
        writeln!(
            f,
            "{:<10}{:>14}{:>18}{:>18}{:>18}",
            "", "(total)", "(matched FPs)", "(all FPs)", "(matched FPs)"
        )?;
        writeln!(f, "{}", "-".repeat(78))?;
        for label in HarmLabel::ALL {
            writeln!(
                f,
                "{:<10}{:>14}{:>18}{:>18}{:>18}",
                label.to_string(),
                cell(combined.and_then(|r| r.class_map(label, Subset::All))),
                cell(matched.and_then(|r| r.class_map(label, Subset::Id))),
                cell(all.and_then(|r| r.class_map(label, Subset::Ood))),
                cell(matched.and_then(|r| r.class_map(label, Subset::Ood))),
            )?;
        }
        write!(
            f,
            "{:<10}{:>14}{:>18}{:>18}{:>18}",
            "Total",
            cell(combined.and_then(|r| r.total_map(Subset::All))),
            cell(matched.and_then(|r| r.total_map(Subset::Id))),
            cell(all.and_then(|r| r.total_map(Subset::Ood))),
            cell(matched.and_then(|r| r.total_map(Subset::Ood))),
        )
    }
}
