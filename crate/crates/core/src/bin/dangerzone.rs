use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use dangerzone::commands::{self, SimulateOptions, ZoneOverrides};
use dangerzone::dataset::Split;
use dangerzone::render::RenderStyle;

#[derive(Parser)]
#[command(name = "dangerzone", version, about = "Danger-zone labeling, simulation and evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct ZoneFlags {
    /// Zone width, m.
    #[arg(long = "zone.width")]
    width: Option<f64>,
    /// Zone depth at standstill, m.
    #[arg(long = "zone.min-safe-distance")]
    min_safe_distance: Option<f64>,
    /// Overlap area that makes an object harmful, m².
    #[arg(long = "zone.area-threshold")]
    area_threshold: Option<f64>,
    /// Footprint fraction inside the zone that makes an object harmful.
    #[arg(long = "zone.ratio-threshold")]
    ratio_threshold: Option<f64>,
}

impl From<ZoneFlags> for ZoneOverrides {
    fn from(z: ZoneFlags) -> Self {
        Self {
            width: z.width,
            min_safe_distance: z.min_safe_distance,
            area_threshold: z.area_threshold,
            ratio_threshold: z.ratio_threshold,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labeled dataset from a scenario TOML file.
    Simulate {
        config: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Horizontal field of view used for labeling, degrees.
        #[arg(long = "fov-deg")]
        fov_deg: Option<f64>,
        #[arg(long, default_value = "test")]
        split: Split,
        #[arg(long)]
        name: Option<String>,
        #[command(flatten)]
        zone: ZoneFlags,
    },
    /// Print harmful/harmless counts per category and distribution.
    Stats { dataset: PathBuf },
    /// Run the noisy stand-in detector over a dataset.
    Detect {
        dataset: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        /// Noise configuration TOML; defaults to a perfect detector.
        #[arg(long)]
        noise: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Score detections under all three evaluation variants.
    Eval {
        dataset: PathBuf,
        detections: PathBuf,
        /// JSON report path; a text table is written beside it.
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Comma-separated center-distance thresholds, m.
        #[arg(long, value_delimiter = ',')]
        thresholds: Option<Vec<f64>>,
    },
    /// Draw one frame as SVG.
    Render {
        dataset: PathBuf,
        #[arg(long)]
        frame: u64,
        #[arg(short, long)]
        out: PathBuf,
        /// Also write the camera view here.
        #[arg(long)]
        camera: Option<PathBuf>,
        #[command(flatten)]
        zone: ZoneFlags,
    },
    /// Relabel one frame over a grid of ego speeds and steering angles.
    Sweep {
        dataset: PathBuf,
        #[arg(long)]
        frame: u64,
        /// Comma-separated speeds, m/s.
        #[arg(long, value_delimiter = ',', required = true)]
        speeds: Vec<f64>,
        /// Comma-separated steering angles, degrees.
        #[arg(long, value_delimiter = ',', default_value = "0", allow_hyphen_values = true)]
        steers: Vec<f64>,
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        zone: ZoneFlags,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Simulate { config, out, seed, fov_deg, split, name, zone } => {
            let opts = SimulateOptions { seed, fov_deg, zone: zone.into(), split, name };
            let manifest = commands::cmd_simulate(&config, &out, &opts)
                .with_context(|| format!("simulating {}", config.display()))?;
            println!("wrote {} frames to {}", manifest.frame_count, out.display());
        }
        Command::Stats { dataset } => {
            println!("{}", commands::cmd_stats(&dataset)?);
        }
        Command::Detect { dataset, out, noise, seed } => {
            let cfg = commands::load_noise_config(noise.as_deref(), seed)?;
            let n = commands::cmd_detect(&dataset, &cfg, &out)?;
            println!("wrote {n} detections to {}", out.display());
        }
        Command::Eval { dataset, detections, out, config, thresholds } => {
            let cfg = commands::load_eval_config(config.as_deref(), thresholds)?;
            let summary = commands::cmd_eval(&dataset, &detections, &cfg, &out)?;
            println!("{summary}");
        }
        Command::Render { dataset, frame, out, camera, zone } => {
            commands::cmd_render(&dataset, frame, &zone.into(), &RenderStyle::default(), &out, camera.as_deref())?;
            println!("wrote {}", out.display());
        }
        Command::Sweep { dataset, frame, speeds, steers, out, zone } => {
            let m = commands::cmd_sweep(&dataset, frame, &speeds, &steers, &zone.into(), out.as_deref())?;
            print!("{m}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
