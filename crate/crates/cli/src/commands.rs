use std::collections::HashSet;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use haarsf::cascade::{load_cascade, ScanParams};
use haarsf::eval::{
    accuracy, auc, bench_speed, confusion, eye_confusion, fpr, frame_scores, load_ground_truth, roc_curve, tpr,
    write_accuracy_report, write_auc_report, write_roc_reports, write_speed_report, GroundTruthRecord, MatchMode, Sequence,
};
use haarsf::image::{load_image, save_pgm, GrayImage, ScaleFactor};
use haarsf::pipeline::{FrameResult, PipelineConfig, DEFAULT_TILT_ANGLES};
use haarsf::{Cascade, Pipeline};
use rayon::prelude::*;

use crate::args::{BenchArgs, Cli, Command, DetectArgs, DetectorArgs, EvalArgs, RocArgs};
use crate::frames::{frame_of, list_frames, Frame};

pub fn dispatch(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("cannot set up the thread pool")?;
    }
    match cli.command {
        Command::Detect(a) => detect(a),
        Command::Bench(a) => bench(a),
        Command::Eval(a) => eval(a),
        Command::Roc(a) => roc(a),
        Command::AnnotateServe(a) => crate::server::serve(a),
    }
}

/// Loaded cascades and the settings shared by every SF.
pub struct Detector {
    pub face: Cascade,
    pub eye: Option<Cascade>,
    pub config: PipelineConfig,
    pub tilt: bool,
}

pub fn scan_params(min_neighbors: u32, scale_step: f64) -> ScanParams {
    ScanParams { min_neighbors, scale_step, ..ScanParams::default() }
}

impl Detector {
    pub fn load(face: &Path, eye: Option<&Path>, params: ScanParams, tilt_angles: Option<Vec<f64>>, tilt: bool) -> Result<Self> {
        let face_c: Cascade = load_cascade(face).with_context(|| format!("loading face cascade {}", face.display()))?;
        let eye_c = match eye {
            Some(p) => Some(load_cascade(p).with_context(|| format!("loading eye cascade {}", p.display()))?),
            None => None,
        };
        let config = PipelineConfig {
            face_params: params.clone(),
            eye_params: params,
            tilt_angles: tilt_angles.unwrap_or_else(|| DEFAULT_TILT_ANGLES.to_vec()),
            ..PipelineConfig::default()
        };
        config.validate()?;
        Ok(Detector { face: face_c, eye: eye_c, config, tilt })
    }

    fn from_args(a: &DetectorArgs) -> Result<Self> {
        Self::load(
            &a.face_cascade,
            a.eye_cascade.as_deref(),
            scan_params(a.min_neighbors, a.scale_step),
            a.tilt_angles.clone(),
            a.tilt,
        )
    }

    pub fn pipeline(&self, sf: ScaleFactor) -> Result<Pipeline> {
        Ok(Pipeline::new(self.face.clone(), self.eye.clone(), PipelineConfig { sf, ..self.config.clone() })?)
    }

    pub fn run(&self, pipe: &Pipeline, id: &str, img: &GrayImage) -> Result<FrameResult> {
        let r = if self.tilt { pipe.detect_frame_with_tilt(id, img) } else { pipe.detect_frame(id, img) };
        r.with_context(|| format!("detecting in frame {id:?}"))
    }

    /// Results for `frames` in input order; frames are processed in parallel.
    fn run_all(&self, sf: ScaleFactor, frames: &[Frame]) -> Result<Vec<FrameResult>> {
        let pipe = self.pipeline(sf)?;
        frames
            .par_iter()
            .map(|f| {
                let img = load_image(&f.path).with_context(|| format!("reading {}", f.path.display()))?;
                self.run(&pipe, &f.id, &img)
            })
            .collect()
    }
}

fn detect(a: DetectArgs) -> Result<()> {
    let detector = Detector::from_args(&a.detector)?;
    let frames = match (&a.image, &a.dir) {
        (Some(img), _) => vec![frame_of(img)?],
        (None, Some(dir)) => list_frames(dir)?,
        (None, None) => bail!("one of --image or --dir is required"),
    };
    let pipe = detector.pipeline(a.sf)?;
    let mut out: Box<dyn Write> = match &a.out {
        Some(p) => Box::new(std::io::BufWriter::new(
            std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(std::io::stdout().lock()),
    };
    if a.draw {
        std::fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    }
    // frames run in parallel in chunks so output can stream in order
    let chunk = rayon::current_num_threads().max(1) * 2;
    for batch in frames.chunks(chunk) {
        let results: Vec<(FrameResult, Option<GrayImage>)> = batch
            .par_iter()
            .map(|f| {
                let img = load_image(&f.path).with_context(|| format!("reading {}", f.path.display()))?;
                let r = detector.run(&pipe, &f.id, &img)?;
                Ok((r, a.draw.then_some(img)))
            })
            .collect::<Result<_>>()?;
        for (r, img) in results {
            writeln!(out, "{}", serde_json::to_string(&r)?)?;
            if let Some(img) = img {
                let boxes: Vec<_> = r.faces.iter().chain(&r.eyes).map(|d| d.rect).collect();
                let path = a.out_dir.join(format!("{}.pgm", r.frame_id));
                save_pgm(&img.with_boxes(&boxes, 2, 255), &path).with_context(|| format!("writing {}", path.display()))?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn bench(a: BenchArgs) -> Result<()> {
    let detector = Detector::from_args(&a.detector)?;
    let mut sequences = Vec::new();
    for dir in &a.dir {
        let frames = list_frames(dir)?;
        let images = frames
            .iter()
            .map(|f| load_image(&f.path).with_context(|| format!("reading {}", f.path.display())))
            .collect::<Result<Vec<_>>>()?;
        let subject = dir.file_name().map_or_else(|| dir.display().to_string(), |n| n.to_string_lossy().into_owned());
        sequences.push(Sequence { subject, frames: images });
    }
    let rows = bench_speed(&sequences, &a.sf, &detector.face, detector.eye.as_ref(), &detector.config, detector.tilt)?;
    println!("{:>6} {:>10}", "sf", "mean_fps");
    for r in &rows {
        println!("{:>6} {:>10.3}", r.sf.to_string(), r.mean_fps);
    }
    write_speed_report(&rows, &a.out_dir)?;
    Ok(())
}

/// Frames and ground truth, checked to cover each other before any detection
/// runs.
fn labelled_frames(dir: &Path, gt: &Path) -> Result<(Vec<Frame>, Vec<GroundTruthRecord>)> {
    let frames = list_frames(dir)?;
    let gt = load_ground_truth(gt).with_context(|| format!("loading ground truth {}", gt.display()))?;
    let known: HashSet<&str> = gt.iter().map(|r| r.frame_id.as_str()).collect();
    if let Some(f) = frames.iter().find(|f| !known.contains(f.id.as_str())) {
        bail!("no ground truth for frame {:?}", f.id);
    }
    Ok((frames, gt))
}

fn eval(a: EvalArgs) -> Result<()> {
    let detector = Detector::from_args(&a.detector)?;
    let (frames, gt) = labelled_frames(&a.dir, &a.gt)?;
    let mode = match a.iou {
        Some(t) if (0.0..=1.0).contains(&t) => MatchMode::Iou(t),
        Some(t) => bail!("--iou must lie in [0, 1], got {t}"),
        None => MatchMode::Presence,
    };
    let mut rows = Vec::new();
    for &sf in &a.sf {
        let results = detector.run_all(sf, &frames)?;
        let c = confusion(&results, &gt, mode)?;
        let acc = accuracy::<f64>(&c);
        let eyes = accuracy::<f64>(&eye_confusion(&results, &gt)?);
        println!(
            "sf={sf} accuracy={acc} tpr={} fpr={} tp={} fp={} tn={} fn={} eyes_accuracy={eyes}",
            tpr::<f64>(&c),
            fpr::<f64>(&c),
            c.tp,
            c.fp,
            c.tn,
            c.fn_
        );
        rows.push((sf, c, acc));
    }
    write_accuracy_report(&rows, &a.out_dir)?;
    Ok(())
}

fn roc(a: RocArgs) -> Result<()> {
    let detector = Detector::from_args(&a.detector)?;
    let (frames, gt) = labelled_frames(&a.dir, &a.gt)?;
    let mut curves = Vec::new();
    let mut areas = Vec::new();
    for &sf in &a.sf {
        let results = detector.run_all(sf, &frames)?;
        let curve = roc_curve::<f64>(&frame_scores(&results), &gt)?;
        let area = auc(&curve)?;
        println!("sf={sf} auc={area} points={}", curve.points.len());
        areas.push((sf, area));
        curves.push((sf, curve));
    }
    write_roc_reports(&curves, &a.out_dir)?;
    write_auc_report(&areas, &a.out_dir)?;
    Ok(())
}
