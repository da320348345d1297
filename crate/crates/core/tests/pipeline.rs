mod common;

use common::{eye, fixture, frame, frontal_face};
use haarsf::cascade::{detect_multiscale, group_detections, Detection, ScanParams};
use haarsf::image::{load_image, GrayImage, Rect, ScaleFactor};
use haarsf::pipeline::{eye_roi, remap_detection, EyeRoiSpec, Pipeline, PipelineConfig, PipelineError};
use proptest::prelude::*;

fn sf(v: f64) -> ScaleFactor {
    ScaleFactor::new(v).unwrap()
}

fn pipeline(k: f64) -> Pipeline<f64> {
    Pipeline::new(frontal_face(), Some(eye()), PipelineConfig::with_sf(sf(k))).unwrap()
}

#[test]
fn blank_frame_has_no_faces() {
    let r = pipeline(2.0).detect_frame("blank", &GrayImage::filled(640, 480, 0)).unwrap();
    assert!(r.faces.is_empty() && r.eyes.is_empty());
    assert!(!r.face_present && !r.eyes_present);
}

#[test]
fn frame_smaller_than_the_scaled_window() {
    let err = pipeline(4.0).detect_frame("x", &GrayImage::filled(90, 200, 9)).unwrap_err();
    assert!(matches!(err, PipelineError::ImageTooSmall { width: 90, .. }), "{err}");
}

#[test]
fn unit_sf_matches_the_raw_cascade() {
    let img = frame("f011");
    let direct = group_detections(&detect_multiscale(&frontal_face(), &img, &ScanParams::default()).unwrap(), 3);
    let r = pipeline(1.0).detect_frame("f011", &img).unwrap();
    assert!(!direct.is_empty());
    assert_eq!(r.faces, direct);
}

#[test]
fn sf2_box_overlaps_sf1_box_and_eyes_sit_in_the_face() {
    let img = frame("f020");
    let one = pipeline(1.0).detect_frame("f020", &img).unwrap();
    let two = pipeline(2.0).detect_frame("f020", &img).unwrap();
    let best = |faces: &[Detection]| *faces.iter().max_by_key(|d| (d.score, d.rect.area())).unwrap();
    assert!(best(&one.faces).rect.iou(&best(&two.faces).rect) >= 0.5);
    assert!(two.eyes_present);
    let face = best(&two.faces).rect;
    for e in &two.eyes {
        assert!(face.contains(&e.rect), "{} outside {face}", e.rect);
        assert_eq!(e.sf_context, ScaleFactor::ONE);
    }
}

#[test]
fn results_stay_in_frame_and_eyes_imply_faces() {
    let p = pipeline(2.0);
    for id in ["f000", "f001", "f007", "f013", "f035"] {
        let r = p.detect_frame(id, &frame(id)).unwrap();
        assert!(r.faces.iter().chain(&r.eyes).all(|d| d.rect.fits_in(640, 480) && !d.rect.is_empty()));
        assert!(r.eyes.is_empty() || !r.faces.is_empty());
        assert!(r.faces.iter().all(|d| d.sf_context == ScaleFactor::ONE));
        let t = r.elapsed;
        assert!([t.downsample, t.integral, t.face_scan, t.eye_scan, t.tilt_extra].iter().all(|v| *v >= 0.0));
    }
}

#[test]
fn face_scan_is_faster_at_sf4() {
    let img = frame("f001");
    let time = |k: f64| {
        let p = Pipeline::new(frontal_face(), None, PipelineConfig::with_sf(sf(k))).unwrap();
        // best of three to keep scheduler noise out
        (0..3).map(|_| p.detect_frame("f001", &img).unwrap().elapsed.face_scan).fold(f64::INFINITY, f64::min)
    };
    let (t1, t4) = (time(1.0), time(4.0));
    assert!(t4 < t1, "sf4 {t4} ms vs sf1 {t1} ms");
}

#[test]
fn tilt_sweep_with_only_zero_equals_detect_frame() {
    let cfg = PipelineConfig { tilt_angles: vec![0.0], ..PipelineConfig::with_sf(sf(2.0)) };
    let p = Pipeline::new(frontal_face(), None, cfg).unwrap();
    for id in ["f001", "f002", "f026"] {
        let img = frame(id);
        assert_eq!(p.detect_tilted(&img).unwrap(), p.detect_frame(id, &img).unwrap().faces);
    }
}

#[test]
fn upright_face_is_found_at_zero_degrees() {
    let p = pipeline(2.0);
    let img = frame("f011");
    let tilted = p.detect_tilted(&img).unwrap();
    assert!(!tilted.is_empty());
    assert!(tilted.iter().all(|d| d.angle_context == 0.0));
    assert_eq!(tilted, p.detect_frame("f011", &img).unwrap().faces);
}

#[test]
fn rotated_face_needs_the_sweep() {
    let img = load_image(fixture("tilt/f001_rot-20.png")).unwrap();
    let marked = Rect::new(146, 190, 157, 157);
    let p = pipeline(2.0);
    assert!(!p.detect_frame("rot", &img).unwrap().face_present);
    let found = p.detect_tilted(&img).unwrap();
    assert!(!found.is_empty());
    assert!(found.iter().all(|d| d.angle_context == 15.0 || d.angle_context == 30.0));
    assert!(found.iter().any(|d| d.rect.iou(&marked) >= 0.3));

    let full = p.detect_frame_with_tilt("rot", &img).unwrap();
    assert_eq!(full.faces, found);
    assert!(full.elapsed.tilt_extra > 0.0);
    for e in &full.eyes {
        assert!(full.faces.iter().any(|f| f.rect.contains(&e.rect)));
    }
}

#[test]
fn blank_frame_survives_the_full_sweep() {
    assert!(pipeline(4.0).detect_tilted(&GrayImage::filled(320, 240, 128)).unwrap().is_empty());
}

#[test]
fn json_line_shape() {
    let r = pipeline(4.0).detect_frame("f001", &frame("f001")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
    for key in ["frame_id", "faces", "eyes", "face_present", "eyes_present", "elapsed"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    let rect = &v["faces"][0]["rect"];
    assert!(rect.is_array() && rect.as_array().unwrap().len() == 4);
    for key in ["downsample", "integral", "face_scan", "eye_scan", "tilt_extra"] {
        assert!(v["elapsed"][key].is_number(), "{key}");
    }
}

proptest! {
    #[test]
    fn remap_is_exact_without_clamping(x in 0u32..100, y in 0u32..100, w in 1u32..60, h in 1u32..60, k in prop::sample::select(vec![1u32, 2, 4])) {
        prop_assume!(k * (x + w) <= 640 && k * (y + h) <= 480);
        let det = Detection { sf_context: sf(f64::from(k)), ..Detection::raw(Rect::new(x, y, w, h), 7) };
        let r = remap_detection(&det, sf(f64::from(k)), 640, 480);
        prop_assert_eq!(r.rect, Rect::new(k * x, k * y, k * w, k * h));
        prop_assert_eq!(r.score, 7);
        prop_assert_eq!(r.sf_context, ScaleFactor::ONE);
    }

    #[test]
    fn remap_stays_in_frame(x in 0u32..400, y in 0u32..300, w in 1u32..200, h in 1u32..200, k in 1.0f64..8.0) {
        let r = remap_detection(&Detection::raw(Rect::new(x, y, w, h), 1), sf(k), 640, 480);
        prop_assert!(r.rect.fits_in(640, 480) && !r.rect.is_empty());
    }

    #[test]
    fn eye_regions_are_inside_the_face(x in 0u32..50, y in 0u32..50, w in 8u32..300, h in 8u32..300) {
        let face = Rect::new(x, y, w, h);
        let (l, r) = eye_roi(face, &EyeRoiSpec::default()).unwrap();
        prop_assert!(face.contains(&l) && face.contains(&r));
        prop_assert_eq!(l.y, r.y);
        prop_assert!(l.right() <= r.x);
    }
}
