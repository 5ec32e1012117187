//! Implementations behind the `dangerzone` binary's subcommands.
//!
//! Every command either completes or leaves no new output behind: files are
//! written under a temporary name and renamed into place.

use std::fs;
use std::path::{Path, PathBuf};

use crate::analysis::{sweep_ego_state, SweepMatrix};
use crate::dataset::{compute_stats, read_dataset, write_dataset, DatasetManifest, Split, StatsTable};
use crate::detector::{read_detections, run_stub, write_detections, NoiseConfig};
use crate::error::{Error, Result};
use crate::evaluation::{evaluate_variants, EvalConfig, VariantSummary};
use crate::geometry::ZoneParams;
use crate::render::{render_bev, render_camera, RenderStyle};
use crate::simulation::{generate_scenario, Frame, ScenarioSpec};

/// Command-line overrides for zone parameters; set fields win over files.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ZoneOverrides {
    pub width: Option<f64>,
    pub min_safe_distance: Option<f64>,
    pub area_threshold: Option<f64>,
    pub ratio_threshold: Option<f64>,
}

impl ZoneOverrides {
    pub fn apply(&self, mut params: ZoneParams) -> Result<ZoneParams> {
        if let Some(v) = self.width {
            params.width = v;
        }
        if let Some(v) = self.min_safe_distance {
            params.min_safe_distance = v;
        }
        if let Some(v) = self.area_threshold {
            params.overlap_area_threshold = v;
        }
        if let Some(v) = self.ratio_threshold {
            params.overlap_ratio_threshold = v;
        }
        params.validate()?;
        Ok(params)
    }
}

fn temp_sibling(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(format!(".partial-{}", std::process::id()));
    path.with_file_name(name)
}

/// Writes `contents` to `path` via a temporary sibling and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let tmp = temp_sibling(path);
    let res = fs::write(&tmp, contents).and_then(|_| fs::rename(&tmp, path));
    if res.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(res?)
}

#[derive(Debug, Clone)]
pub struct SimulateOptions {
    pub seed: Option<u64>,
    pub fov_deg: Option<f64>,
    pub zone: ZoneOverrides,
    pub split: Split,
    pub name: Option<String>,
}

impl Default for SimulateOptions {
    fn default() -> Self {
        Self {
            seed: None,
            fov_deg: None,
            zone: ZoneOverrides::default(),
            split: Split::Test,
            name: None,
        }
    }
}

/// Generates the scenario described by `spec_path` and stores it as a dataset.
pub fn cmd_simulate(spec_path: &Path, out_dir: &Path, opts: &SimulateOptions) -> Result<DatasetManifest> {
    let mut spec = ScenarioSpec::from_file(spec_path)?;
    if let Some(seed) = opts.seed {
        spec.seed = seed;
    }
    if let Some(fov) = opts.fov_deg {
        spec.fov_deg = Some(fov);
    }
    spec.validate()?;
    let params = opts.zone.apply(spec.zone.unwrap_or_default())?;
    let frames = generate_scenario(&spec, &params)?;
    let name = opts.name.clone().unwrap_or_else(|| {
        spec_path
            .file_stem()
            .map_or_else(|| "scenario".to_string(), |s| s.to_string_lossy().into_owned())
    });
    let manifest = DatasetManifest::new(name, opts.split, &frames, params);

    let tmp = temp_sibling(out_dir);
    let _ = fs::remove_dir_all(&tmp);
    let written = write_dataset(&frames, &manifest, &tmp).and_then(|_| {
        if out_dir.exists() {
            fs::remove_dir_all(out_dir)?;
        }
        fs::rename(&tmp, out_dir)?;
        Ok(())
    });
    if let Err(e) = written {
        let _ = fs::remove_dir_all(&tmp);
        return Err(e);
    }
    Ok(manifest)
}

pub fn cmd_stats(dataset_dir: &Path) -> Result<StatsTable> {
    let (frames, _) = read_dataset(dataset_dir)?;
    Ok(compute_stats(&frames))
}

pub fn load_noise_config(path: Option<&Path>, seed: Option<u64>) -> Result<NoiseConfig> {
    let mut cfg = match path {
        Some(p) => NoiseConfig::from_toml_str(&fs::read_to_string(p)?)
            .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?,
        None => NoiseConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

/// Runs the stand-in detector over a dataset; returns the detection count.
pub fn cmd_detect(dataset_dir: &Path, noise: &NoiseConfig, out_file: &Path) -> Result<usize> {
    let (frames, _) = read_dataset(dataset_dir)?;
    let dets = run_stub(&frames, noise)?;
    let tmp = temp_sibling(out_file);
    if let Err(e) = write_detections(&tmp, &dets).and_then(|_| Ok(fs::rename(&tmp, out_file)?)) {
        let _ = fs::remove_file(&tmp);
        return Err(e);
    }
    Ok(dets.len())
}

pub fn load_eval_config(path: Option<&Path>, thresholds: Option<Vec<f64>>) -> Result<EvalConfig> {
    let mut cfg = match path {
        Some(p) => EvalConfig::from_toml_str(&fs::read_to_string(p)?)
            .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?,
        None => EvalConfig::default(),
    };
    if let Some(t) = thresholds {
        cfg.distance_thresholds = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Evaluates all three variants. Writes the JSON report to `report_out`
/// and the text table next to it with a `.txt` extension.
pub fn cmd_eval(dataset_dir: &Path, detections_file: &Path, cfg: &EvalConfig, report_out: &Path) -> Result<VariantSummary> {
    let (frames, _) = read_dataset(dataset_dir)?;
    let dets = read_detections(detections_file)?;
    let summary = evaluate_variants(&dets, &frames, cfg)?;
    let mut json = serde_json::to_string_pretty(&summary)?;
    json.push('\n');
    let table_path = report_out.with_extension("txt");
    write_atomic(report_out, json.as_bytes())?;
    if let Err(e) = write_atomic(&table_path, format!("{summary}\n").as_bytes()) {
        let _ = fs::remove_file(report_out);
        return Err(e);
    }
    Ok(summary)
}

fn frame_at(frames: &[Frame], index: u64) -> Result<&Frame> {
    frames.iter().find(|f| f.index == index).ok_or(Error::FrameOutOfRange {
        index,
        count: frames.len(),
    })
}

/// Renders one frame's bird's-eye view, plus the camera view when asked.
pub fn cmd_render(
    dataset_dir: &Path,
    frame_index: u64,
    zone: &ZoneOverrides,
    style: &RenderStyle,
    out_image: &Path,
    camera_out: Option<&Path>,
) -> Result<()> {
    let (frames, manifest) = read_dataset(dataset_dir)?;
    let frame = frame_at(&frames, frame_index)?;
    let params = zone.apply(manifest.zone_params)?;
    let bev = render_bev(frame, &params, style)?;
    let cam = camera_out.map(|_| render_camera(frame, &params, style)).transpose()?;
    write_atomic(out_image, bev.as_bytes())?;
    if let (Some(path), Some(svg)) = (camera_out, cam) {
        if let Err(e) = write_atomic(path, svg.as_bytes()) {
            let _ = fs::remove_file(out_image);
            return Err(e);
        }
    }
    Ok(())
}

/// Label matrix for one frame under the given speeds (m/s) and steering
/// angles (degrees).
pub fn cmd_sweep(
    dataset_dir: &Path,
    frame_index: u64,
    speeds: &[f64],
    steers_deg: &[f64],
    zone: &ZoneOverrides,
    out: Option<&Path>,
) -> Result<SweepMatrix> {
    let (frames, manifest) = read_dataset(dataset_dir)?;
    let frame = frame_at(&frames, frame_index)?;
    let params = zone.apply(manifest.zone_params)?;
    let steers: Vec<f64> = steers_deg.iter().map(|d| d.to_radians()).collect();
    let matrix = sweep_ego_state(frame, speeds, &steers, &params)?;
    if let Some(path) = out {
        write_atomic(path, matrix.to_string().as_bytes())?;
    }
    Ok(matrix)
}
