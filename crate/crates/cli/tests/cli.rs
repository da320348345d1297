use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn fixture(rel: &str) -> PathBuf {
    root().join("fixtures").join(rel)
}

fn face() -> PathBuf {
    fixture("cascades/haarcascade_frontalface_default.xml")
}

fn haarsf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_haarsf")).args(args).output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn detect_single_image_prints_one_json_line() {
    let img = fixture("eval/frames/f001.png");
    let o = haarsf(&["detect", "--image", s(&img), "--face-cascade", s(&face()), "--sf", "4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let lines: Vec<_> = out.lines().collect();
    assert_eq!(lines.len(), 1);
    let v: serde_json::Value = serde_json::from_str(lines[0]).unwrap();
    assert_eq!(v["frame_id"], "f001");
    assert_eq!(v["face_present"], true);
    let b = &v["faces"][0];
    // remapped into full-resolution coordinates
    assert_eq!(b["sf_context"], 1.0);
    assert_eq!(b["rect"].as_array().map(Vec::len), Some(4));
    assert!(b["score"].as_u64().unwrap() >= 3);
}

#[test]
fn sf_below_one_is_a_usage_error() {
    let img = fixture("eval/frames/f001.png");
    let o = haarsf(&["detect", "--image", s(&img), "--face-cascade", s(&face()), "--sf", "0.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("SF must be"), "{}", stderr(&o));
}

#[test]
fn empty_directory_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = haarsf(&["detect", "--dir", s(dir.path()), "--face-cascade", s(&face())]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn missing_cascade_exits_1() {
    let img = fixture("eval/frames/f001.png");
    let o = haarsf(&["detect", "--image", s(&img), "--face-cascade", "/nonexistent.xml"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn draw_writes_annotated_frames() {
    let out = tempfile::tempdir().unwrap();
    let img = fixture("eval/frames/f001.png");
    let o = haarsf(&["detect", "--image", s(&img), "--face-cascade", s(&face()), "--sf", "4", "--draw", "--out-dir", s(out.path())]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(out.path().join("f001.pgm").exists());
}

fn copy_frames(ids: &[&str], dir: &Path) {
    for id in ids {
        std::fs::copy(fixture(&format!("eval/frames/{id}.png")), dir.join(format!("{id}.png"))).unwrap();
    }
}

#[test]
fn bench_reports_one_row_per_sf() {
    let work = tempfile::tempdir().unwrap();
    let frames = work.path().join("subject");
    std::fs::create_dir(&frames).unwrap();
    copy_frames(&["f001", "f002", "f007"], &frames);
    let report = work.path().join("report");
    let o = haarsf(&["bench", "--dir", s(&frames), "--sf", "2,4,6", "--face-cascade", s(&face()), "--out-dir", s(&report)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(report.join("speed_vs_sf.csv")).unwrap();
    let rows: Vec<_> = csv.lines().collect();
    assert_eq!(rows[0], "sf,mean_fps");
    assert_eq!(rows.len(), 4);
    assert!(rows[1].starts_with("2,") && rows[3].starts_with("6,"));
    assert!(report.join("speed_vs_sf.svg").exists());
}

/// Six face frames and four empty ones, with three labels flipped so the
/// expected counts are tp 4, fp 2, tn 3, fn 1.
fn mislabelled_set(dir: &Path) -> PathBuf {
    let faces = ["f001", "f007", "f011", "f012", "f013", "f014"];
    let empty = ["f000", "f002", "f003", "f004"];
    copy_frames(&faces, dir);
    copy_frames(&empty, dir);
    let mut gt = String::new();
    for (i, id) in faces.iter().enumerate() {
        gt += &format!("{{\"frame_id\": \"{id}\", \"face_present\": {}, \"eyes_present\": false}}\n", i < 4);
    }
    for (i, id) in empty.iter().enumerate() {
        gt += &format!("{{\"frame_id\": \"{id}\", \"face_present\": {}, \"eyes_present\": false}}\n", i == 0);
    }
    let path = dir.join("gt.jsonl");
    std::fs::write(&path, gt).unwrap();
    path
}

#[test]
fn eval_counts_on_a_known_set() {
    let work = tempfile::tempdir().unwrap();
    let frames = work.path().join("frames");
    std::fs::create_dir(&frames).unwrap();
    let gt = mislabelled_set(&frames);
    let report = work.path().join("report");
    let o = haarsf(&["eval", "--dir", s(&frames), "--gt", s(&gt), "--sf", "4", "--face-cascade", s(&face()), "--out-dir", s(&report)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let line = stdout(&o);
    assert!(line.contains("accuracy=0.7 "), "{line}");
    assert!(line.contains("tp=4 fp=2 tn=3 fn=1"), "{line}");
    let csv = std::fs::read_to_string(report.join("accuracy_vs_sf.csv")).unwrap();
    assert_eq!(csv.lines().nth(1).unwrap(), "4,0.7,4,2,3,1");
}

#[test]
fn eval_without_ground_truth_for_a_frame_fails() {
    let work = tempfile::tempdir().unwrap();
    copy_frames(&["f001", "f002"], work.path());
    let gt = work.path().join("gt.jsonl");
    std::fs::write(&gt, "{\"frame_id\": \"f001\", \"face_present\": true, \"eyes_present\": false}\n").unwrap();
    let o = haarsf(&["eval", "--dir", s(work.path()), "--gt", s(&gt), "--sf", "4", "--face-cascade", s(&face())]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("f002"), "{}", stderr(&o));
}

#[test]
fn roc_writes_a_curve_per_sf() {
    let work = tempfile::tempdir().unwrap();
    let frames = work.path().join("frames");
    std::fs::create_dir(&frames).unwrap();
    let gt = mislabelled_set(&frames);
    let report = work.path().join("report");
    let o = haarsf(&["roc", "--dir", s(&frames), "--gt", s(&gt), "--sf", "4,6", "--face-cascade", s(&face()), "--out-dir", s(&report)]);
    assert!(o.status.success(), "{}", stderr(&o));
    for k in [4, 6] {
        let csv = std::fs::read_to_string(report.join(format!("roc_sf{k}.csv"))).unwrap();
        let pts: Vec<(f64, f64)> = csv
            .lines()
            .skip(1)
            .map(|l| {
                let f: Vec<_> = l.split(',').collect();
                (f[0].parse().unwrap(), f[1].parse().unwrap())
            })
            .collect();
        assert_eq!(pts.first(), Some(&(0.0, 0.0)));
        assert_eq!(pts.last(), Some(&(1.0, 1.0)));
        assert!(pts.windows(2).all(|w| w[0].0 <= w[1].0 && w[0].1 <= w[1].1));
    }
    assert!(report.join("auc_vs_sf.csv").exists());
}

#[test]
fn tilt_flag_recovers_the_rotated_face() {
    let o = haarsf(&["detect", "--dir", s(&fixture("tilt")), "--face-cascade", s(&face()), "--sf", "2", "--tilt"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["face_present"], true);
    assert_ne!(v["faces"][0]["angle_context"], 0.0);
}
