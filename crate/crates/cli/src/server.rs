//! HTTP backend for the annotation UI.
//!
//! Routes:
//!
//! | method | path                          | response                               |
//! |--------|-------------------------------|----------------------------------------|
//! | GET    | `/api/frames`                 | `[{frame_id, annotated}]`, sorted      |
//! | GET    | `/api/frames/{id}/image`      | PNG                                    |
//! | GET    | `/api/annotations/{id}`       | ground-truth record, 404 if none       |
//! | POST   | `/api/annotations/{id}`       | 204; 400 with a field message; 404     |
//! | GET    | `/api/detections/{id}?sf=<k>` | frame result (needs `--face-cascade`)  |
//! | GET    | `/`                           | UI bundle                              |
//!
//! Saves rewrite the whole ground-truth file through a temp file and rename,
//! one at a time.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{Context, Result};
use axum::body::Bytes;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use haarsf::eval::{load_ground_truth, write_ground_truth, GroundTruthRecord};
use haarsf::image::{encode_png, load_image, ScaleFactor};
use serde::{Deserialize, Serialize};
use tokio::sync::Mutex;

use crate::args::ServeArgs;
use crate::commands::{scan_params, Detector};
use crate::frames::list_frames;

const FALLBACK_PAGE: &str = "<!doctype html>\n<html><head><meta charset=\"utf-8\"><title>haarsf annotate</title></head>\n\
<body><h1>haarsf annotation server</h1>\n<p>No UI bundle was given (<code>--ui-dir</code>). \
The JSON API is available under <a href=\"/api/frames\">/api/frames</a>.</p></body></html>\n";

pub struct AppState {
    frames: BTreeMap<String, PathBuf>,
    gt_path: PathBuf,
    records: Mutex<BTreeMap<String, GroundTruthRecord>>,
    detector: Option<Detector>,
    index_html: String,
}

impl AppState {
    /// Load the frame list and any existing ground truth.
    pub fn open(frames_dir: &Path, gt_path: &Path, detector: Option<Detector>, index_html: Option<String>) -> Result<Self> {
        let frames = list_frames(frames_dir)?.into_iter().map(|f| (f.id, f.path)).collect();
        let records = if gt_path.exists() {
            load_ground_truth(gt_path)
                .with_context(|| format!("loading {}", gt_path.display()))?
                .into_iter()
                .map(|r| (r.frame_id.clone(), r))
                .collect()
        } else {
            BTreeMap::new()
        };
        Ok(AppState {
            frames,
            gt_path: gt_path.to_path_buf(),
            records: Mutex::new(records),
            detector,
            index_html: index_html.unwrap_or_else(|| FALLBACK_PAGE.to_string()),
        })
    }
}

#[derive(Serialize)]
struct FrameEntry<'a> {
    frame_id: &'a str,
    annotated: bool,
}

#[derive(Serialize)]
struct ErrorBody {
    error: String,
}

fn error(status: StatusCode, msg: impl Into<String>) -> Response {
    (status, Json(ErrorBody { error: msg.into() })).into_response()
}

fn unknown_frame(id: &str) -> Response {
    error(StatusCode::NOT_FOUND, format!("unknown frame_id {id:?}"))
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/", get(index))
        .route("/api/frames", get(list))
        .route("/api/frames/{id}/image", get(image))
        .route("/api/annotations/{id}", get(get_annotation).post(post_annotation))
        .route("/api/detections/{id}", get(detections))
        .with_state(state)
}

async fn index(State(s): State<Arc<AppState>>) -> Html<String> {
    Html(s.index_html.clone())
}

async fn list(State(s): State<Arc<AppState>>) -> Response {
    let records = s.records.lock().await;
    let entries: Vec<_> = s
        .frames
        .keys()
        .map(|id| FrameEntry { frame_id: id, annotated: records.contains_key(id) })
        .collect();
    Json(entries).into_response()
}

async fn image(State(s): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> Response {
    let Some(path) = s.frames.get(&id).cloned() else { return unknown_frame(&id) };
    let png = tokio::task::spawn_blocking(move || load_image(&path).and_then(|img| encode_png(&img))).await;
    match png {
        Ok(Ok(bytes)) => ([(header::CONTENT_TYPE, "image/png")], bytes).into_response(),
        Ok(Err(e)) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

async fn get_annotation(State(s): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> Response {
    if !s.frames.contains_key(&id) {
        return unknown_frame(&id);
    }
    match s.records.lock().await.get(&id) {
        Some(r) => Json(r.clone()).into_response(),
        None => error(StatusCode::NOT_FOUND, format!("frame {id:?} is not annotated")),
    }
}

fn persist(path: &Path, text: &str) -> std::io::Result<()> {
    use std::io::Write;
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(text.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

async fn post_annotation(State(s): State<Arc<AppState>>, UrlPath(id): UrlPath<String>, body: Bytes) -> Response {
    if !s.frames.contains_key(&id) {
        return unknown_frame(&id);
    }
    let record: GroundTruthRecord = match serde_json::from_slice(&body) {
        Ok(r) => r,
        Err(e) => return error(StatusCode::BAD_REQUEST, e.to_string()),
    };
    if record.frame_id != id {
        return error(StatusCode::BAD_REQUEST, format!("frame_id: {:?} does not match the URL id {id:?}", record.frame_id));
    }
    if let Err(msg) = record.validate() {
        return error(StatusCode::BAD_REQUEST, msg);
    }
    // the lock is held across the write so saves reach the disk in order
    let mut records = s.records.lock().await;
    let mut next = records.clone();
    next.insert(id, record);
    let text = write_ground_truth(next.values());
    let path = s.gt_path.clone();
    match tokio::task::spawn_blocking(move || persist(&path, &text)).await {
        Ok(Ok(())) => {
            *records = next;
            StatusCode::NO_CONTENT.into_response()
        }
        Ok(Err(e)) => error(StatusCode::INTERNAL_SERVER_ERROR, format!("saving {}: {e}", s.gt_path.display())),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

#[derive(Deserialize)]
struct DetectQuery {
    sf: Option<f64>,
}

async fn detections(State(s): State<Arc<AppState>>, UrlPath(id): UrlPath<String>, Query(q): Query<DetectQuery>) -> Response {
    let Some(path) = s.frames.get(&id).cloned() else { return unknown_frame(&id) };
    if s.detector.is_none() {
        return error(StatusCode::SERVICE_UNAVAILABLE, "server started without --face-cascade");
    }
    let sf = match ScaleFactor::new(q.sf.unwrap_or(1.0)) {
        Ok(sf) => sf,
        Err(e) => return error(StatusCode::BAD_REQUEST, format!("sf: {e}")),
    };
    let state = s.clone();
    let run = tokio::task::spawn_blocking(move || -> Result<_> {
        let detector = state.detector.as_ref().expect("checked above");
        let img = load_image(&path)?;
        detector.run(&detector.pipeline(sf)?, &id, &img)
    })
    .await;
    match run {
        Ok(Ok(result)) => Json(result).into_response(),
        Ok(Err(e)) => error(StatusCode::INTERNAL_SERVER_ERROR, format!("{e:#}")),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

pub fn serve(a: ServeArgs) -> Result<()> {
    let detector = match &a.face_cascade {
        Some(face) => Some(Detector::load(face, a.eye_cascade.as_deref(), scan_params(a.min_neighbors, a.scale_step), None, false)?),
        None => None,
    };
    let index_html = match &a.ui_dir {
        Some(dir) => {
            let p = dir.join("index.html");
            Some(std::fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?)
        }
        None => None,
    };
    let state = Arc::new(AppState::open(&a.dir, &a.gt, detector, index_html)?);
    let addr = SocketAddr::new(a.host, a.port);
    let rt = tokio::runtime::Runtime::new().context("starting the async runtime")?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr).await.with_context(|| format!("cannot listen on {addr}"))?;
        println!("annotation server listening on http://{addr}/");
        axum::serve(listener, router(state))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .context("server failed")
    })
}
