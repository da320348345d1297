use std::net::IpAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use haarsf::image::ScaleFactor;

fn parse_sf(s: &str) -> Result<ScaleFactor, String> {
    s.parse::<ScaleFactor>().map_err(|e| e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "haarsf", version, about = "Haar-cascade face and eye detection with downsampling by a scale factor (SF)")]
pub struct Cli {
    /// Worker threads for detection (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Detect faces and eyes, writing one JSON line per frame.
    Detect(DetectArgs),
    /// Measure frames per second for a list of SFs.
    Bench(BenchArgs),
    /// Accuracy against ground truth for a list of SFs.
    Eval(EvalArgs),
    /// ROC curves and AUC against ground truth for a list of SFs.
    Roc(RocArgs),
    /// Serve frames and store annotations over HTTP.
    AnnotateServe(ServeArgs),
}

#[derive(Clone, Debug, Args)]
pub struct DetectorArgs {
    #[arg(long)]
    pub face_cascade: PathBuf,
    #[arg(long)]
    pub eye_cascade: Option<PathBuf>,
    /// Retry frames without an upright face at rotated angles.
    #[arg(long)]
    pub tilt: bool,
    /// Rotation sweep in degrees (must include 0).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub tilt_angles: Option<Vec<f64>>,
    #[arg(long, default_value_t = 3)]
    pub min_neighbors: u32,
    #[arg(long, default_value_t = 1.1)]
    pub scale_step: f64,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("input").required(true).args(["image", "dir"])))]
pub struct DetectArgs {
    #[arg(long)]
    pub image: Option<PathBuf>,
    #[arg(long)]
    pub dir: Option<PathBuf>,
    #[arg(long, default_value = "1", value_parser = parse_sf)]
    pub sf: ScaleFactor,
    /// JSON-lines output file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write copies of each frame with boxes drawn in.
    #[arg(long)]
    pub draw: bool,
    /// Directory for --draw output.
    #[arg(long, default_value = "detections")]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub detector: DetectorArgs,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Frame directory of one subject; repeat for several.
    #[arg(long, required = true)]
    pub dir: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,6,8,10,12", value_parser = parse_sf)]
    pub sf: Vec<ScaleFactor>,
    #[arg(long, default_value = "report")]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub detector: DetectorArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub dir: PathBuf,
    /// Ground truth, JSON lines.
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,6,8,10,12", value_parser = parse_sf)]
    pub sf: Vec<ScaleFactor>,
    /// Require this IoU with the marked face box for a true positive.
    #[arg(long)]
    pub iou: Option<f64>,
    #[arg(long, default_value = "report")]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub detector: DetectorArgs,
}

#[derive(Debug, Args)]
pub struct RocArgs {
    #[arg(long)]
    pub dir: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,6,8,10,12", value_parser = parse_sf)]
    pub sf: Vec<ScaleFactor>,
    #[arg(long, default_value = "report")]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub detector: DetectorArgs,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub dir: PathBuf,
    /// Ground-truth file to read and update (created on first save).
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: IpAddr,
    /// Enables /api/detections.
    #[arg(long)]
    pub face_cascade: Option<PathBuf>,
    #[arg(long)]
    pub eye_cascade: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub min_neighbors: u32,
    #[arg(long, default_value_t = 1.1)]
    pub scale_step: f64,
    /// Built annotation UI to serve at / (a minimal page otherwise).
    #[arg(long)]
    pub ui_dir: Option<PathBuf>,
}
