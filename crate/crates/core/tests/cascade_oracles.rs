mod common;

use common::{band_cascade, banded_image, fixture, frame, frontal_face, naive_depth, naive_sq_sum, naive_sum, random_image, rng};
use haarsf::cascade::{
    detect_multiscale, eval_stage, group_detections, load_cascade, parse_cascade, parse_native, parse_opencv_xml,
    to_legacy_xml, to_native, window_mean_stddev, Cascade, CascadeError, Detection, ScanParams, Stage,
};
use haarsf::image::{downsample, integral, squared_integral, GrayImage, Rect, ScaleFactor};
use proptest::prelude::*;
use rand::Rng;

const ALWAYS_PASS: &str = "CASCADE always 24 24 1\nSTAGE 1 0.5\nSTUMP 1e30 1 0 2\nRECT 0 0 24 24 -1\nRECT 0 0 12 24 2\n";

#[test]
fn native_fixture_parses() {
    let text = "CASCADE tiny 24 24 1\nSTAGE 2 0.5\n\
                STUMP 0.1 -1 1 2\nRECT 0 0 24 24 -1\nRECT 0 8 24 8 3\n\
                STUMP -0.2 0.5 -0.5 3\nRECT 0 0 24 24 -1\nRECT 0 0 8 24 1.5\nRECT 16 0 8 24 1.5\n";
    let c: Cascade<f64> = parse_cascade(text).unwrap();
    assert_eq!((c.window_w, c.window_h, c.stage_count(), c.feature_count()), (24, 24, 1, 2));
    assert_eq!(c.name, "tiny");
    assert_eq!(c.stages[0].classifiers[1].feature.rects.len(), 3);
    let again: Cascade<f64> = parse_native(&to_native(&c)).unwrap();
    assert_eq!(again, c);
}

#[test]
fn native_rejects_bad_documents() {
    let parse = |s: &str| parse_native::<f64>(s);
    assert!(matches!(parse("CASCADE x 24 24 1\nSTAGE 1 0\n"), Err(CascadeError::Parse(_))));
    assert!(matches!(parse("CASCADE x 24 24 1\nSTAGE 0 0\n"), Err(CascadeError::Validation(_))));
    // rect spills over the right edge of the window
    let spill = "CASCADE x 24 24 1\nSTAGE 1 0\nSTUMP 0 1 0 2\nRECT 0 0 24 24 -1\nRECT 20 0 8 24 3\n";
    assert!(matches!(parse(spill), Err(CascadeError::Validation(_))));
    let unbalanced = "CASCADE x 24 24 1\nSTAGE 1 0\nSTUMP 0 1 0 2\nRECT 0 0 24 24 -1\nRECT 0 0 12 24 1\n";
    assert!(matches!(parse(unbalanced), Err(CascadeError::Validation(_))));
    assert!(matches!(parse(&format!("{ALWAYS_PASS}STAGE 1 0\n")), Err(CascadeError::Parse(_))));
}

fn legacy_doc(tilted: u8, extra_node: &str) -> String {
    format!(
        r#"<?xml version="1.0"?>
<opencv_storage>
<tiny type_id="opencv-haar-classifier">
  <size>20 20</size>
  <stages>
    <_>
      <trees>
        <_>
          <_>
            <feature>
              <rects><_>0 0 20 20 -1.</_><_>0 0 10 20 2.</_></rects>
              <tilted>{tilted}</tilted>
            </feature>
            <threshold>0.25</threshold>
            <left_val>-1.5</left_val>
            <right_val>2.5</right_val>
            {extra_node}
          </_>
        </_>
      </trees>
      <stage_threshold>0.125</stage_threshold>
      <parent>-1</parent>
      <next>-1</next>
    </_>
  </stages>
</tiny>
</opencv_storage>
"#
    )
}

#[test]
fn legacy_stump_document() {
    let c: Cascade<f64> = parse_cascade(&legacy_doc(0, "")).unwrap();
    assert_eq!((c.name.as_str(), c.window_w, c.window_h), ("tiny", 20, 20));
    let weak = &c.stages[0].classifiers[0];
    assert_eq!((weak.threshold, weak.left_val, weak.right_val), (0.25, -1.5, 2.5));
    assert_eq!(c.stages[0].threshold, 0.125);
}

#[test]
fn tilted_features_are_unsupported() {
    let err = parse_cascade::<f64>(&legacy_doc(1, "")).unwrap_err();
    assert!(matches!(&err, CascadeError::Unsupported(m) if m.contains("tilted")), "{err}");
}

#[test]
fn tree_classifiers_are_unsupported() {
    let err = parse_cascade::<f64>(&legacy_doc(0, "<left_node>1</left_node>")).unwrap_err();
    assert!(matches!(err, CascadeError::Unsupported(_)), "{err}");
}

#[test]
fn trimmed_legacy_cascade_round_trips_bit_exactly() {
    let text = std::fs::read_to_string(fixture("cascades/frontalface_legacy_2stages.xml")).unwrap();
    let c: Cascade<f64> = parse_opencv_xml(&text).unwrap();
    assert_eq!(c.stage_count(), 2);
    let again: Cascade<f64> = parse_opencv_xml(&to_legacy_xml(&c)).unwrap();
    for (a, b) in c.stages.iter().zip(&again.stages) {
        assert_eq!(a.threshold.to_bits(), b.threshold.to_bits());
        for (x, y) in a.classifiers.iter().zip(&b.classifiers) {
            assert_eq!(x.threshold.to_bits(), y.threshold.to_bits());
            assert_eq!(x.left_val.to_bits(), y.left_val.to_bits());
            assert_eq!(x.right_val.to_bits(), y.right_val.to_bits());
        }
    }
    assert_eq!(again, c);
    // the same two stages read from the current-format original
    let full = frontal_face();
    assert_eq!(c.stages[..], full.stages[..2]);
}

#[test]
fn stock_cascades_load() {
    let face = frontal_face();
    assert_eq!((face.window_w, face.window_h, face.stage_count()), (24, 24, 25));
    assert_eq!(face.name, "haarcascade_frontalface_default");
    let eye: Cascade<f32> = load_cascade(fixture("cascades/haarcascade_eye.xml")).unwrap();
    assert_eq!((eye.window_w, eye.window_h), (20, 20));
}

#[test]
fn window_stats_examples() {
    let flat = GrayImage::filled(30, 30, 7);
    let s = window_mean_stddev::<f64>(&integral(&flat), &squared_integral(&flat), Rect::new(3, 3, 24, 24)).unwrap();
    assert_eq!((s.mean, s.stddev, s.raw_stddev), (7.0, 1.0, 0.0));

    let pair = GrayImage::new(2, 1, vec![0, 10]).unwrap();
    let s = window_mean_stddev::<f64>(&integral(&pair), &squared_integral(&pair), Rect::new(0, 0, 2, 1)).unwrap();
    assert_eq!((s.mean, s.stddev), (5.0, 5.0));

    let err = window_mean_stddev::<f64>(&integral(&pair), &squared_integral(&pair), Rect::new(1, 0, 2, 1));
    assert!(matches!(err, Err(CascadeError::OutOfBounds(_))));
}

#[test]
fn window_stats_match_pixel_loops() {
    let mut r = rng(21);
    let img = random_image(&mut r, 64, 64);
    let (ii, sq) = (integral(&img), squared_integral(&img));
    for _ in 0..50 {
        let (x, y) = (r.gen_range(0..40), r.gen_range(0..40));
        let s = window_mean_stddev::<f64>(&ii, &sq, Rect::new(x, y, 24, 24)).unwrap();
        let n = 576.0;
        let mean = naive_sum(&img, x, y, 24, 24) as f64 / n;
        let var = naive_sq_sum(&img, x, y, 24, 24) as f64 / n - mean * mean;
        assert!((s.mean - mean).abs() <= 1e-9 * mean);
        assert!((s.raw_stddev - var.sqrt()).abs() <= 1e-9 * var.sqrt());
    }
}

fn single_stump(threshold: f64, left: f64, right: f64, stage_threshold: f64) -> Stage<f64> {
    let text = format!("CASCADE s 24 24 1\nSTAGE 1 {stage_threshold}\nSTUMP {threshold} {left} {right} 2\nRECT 0 0 24 24 -1\nRECT 0 0 12 24 2\n");
    parse_native::<f64>(&text).unwrap().stages.remove(0)
}

#[test]
fn stage_with_unreachable_threshold() {
    let img = random_image(&mut rng(1), 24, 24);
    let (ii, sq) = (integral(&img), squared_integral(&img));
    let window = Rect::new(0, 0, 24, 24);
    let (pass, sum) = eval_stage(&single_stump(1e30, 1.0, 0.0, 0.5), (24, 24), &ii, &sq, window, 1.0).unwrap();
    assert!(pass);
    assert_eq!(sum, 1.0);
    let (pass, _) = eval_stage(&single_stump(1e30, 1.0, 0.0, 1.5), (24, 24), &ii, &sq, window, 1.0).unwrap();
    assert!(!pass);
    let wrong_size = eval_stage(&single_stump(1e30, 1.0, 0.0, 0.5), (24, 24), &ii, &sq, Rect::new(0, 0, 20, 20), 1.0);
    assert!(wrong_size.is_err());
}

#[test]
fn two_stump_stage_by_hand() {
    // Left half 0, right half 100. The normalization region is the window
    // inset by one pixel: 22x22 with 11 columns of each value, so
    // n = 484, sum = 24200, sum of squares = 2420000 and
    // sqrt(n * sq - sum^2) = sqrt(1171280000 - 585640000) = 24200.
    let img = GrayImage::from_fn(24, 24, |x, _| if x < 12 { 0 } else { 100 });
    let (ii, sq) = (integral(&img), squared_integral(&img));
    let text = "CASCADE s 24 24 1\nSTAGE 2 0\n\
                STUMP 1.4 0.25 -1 2\nRECT 0 0 24 24 -1\nRECT 12 0 12 24 2\n\
                STUMP 0.3 -0.75 0.5 2\nRECT 0 0 24 24 -1\nRECT 0 8 24 8 3\n";
    let stage = parse_native::<f64>(text).unwrap().stages.remove(0);
    let (pass, sum) = eval_stage(&stage, (24, 24), &ii, &sq, Rect::new(0, 0, 24, 24), 1.0).unwrap();
    // stump 1: -28800 + 2 * 28800 = 28800; 28800 / 24200 = 1.19 < 1.4, left 0.25
    // stump 2: -28800 + 3 * 9600 = 0; 0 < 0.3, left -0.75
    assert!((sum - (0.25 - 0.75)).abs() < 1e-9, "{sum}");
    assert!(!pass);
}

#[test]
fn blank_image_yields_nothing_with_a_real_cascade() {
    let blank = GrayImage::filled(160, 120, 0);
    assert!(detect_multiscale(&frontal_face(), &blank, &ScanParams::default()).unwrap().is_empty());
}

#[test]
fn always_pass_cascade_single_window() {
    let c: Cascade<f64> = parse_cascade(ALWAYS_PASS).unwrap();
    let img = random_image(&mut rng(2), 24, 24);
    let dets = detect_multiscale(&c, &img, &ScanParams::single_scale(24)).unwrap();
    assert_eq!(dets, vec![Detection::raw(Rect::new(0, 0, 24, 24), 1)]);
}

#[test]
fn too_small_image_is_an_error() {
    let c: Cascade<f64> = parse_cascade(ALWAYS_PASS).unwrap();
    let err = detect_multiscale(&c, &GrayImage::filled(23, 40, 9), &ScanParams::default()).unwrap_err();
    assert!(matches!(err, CascadeError::ImageTooSmall { width: 23, .. }));
}

#[test]
fn scan_levels_are_ascending_and_row_major() {
    let c = band_cascade();
    let img = banded_image(&mut rng(8), 96, 80);
    let dets = detect_multiscale(&c, &img, &ScanParams::default()).unwrap();
    assert!(!dets.is_empty());
    for w in dets.windows(2) {
        let (a, b) = (w[0].rect, w[1].rect);
        assert!(a.w < b.w || (a.w == b.w && (a.y, a.x) < (b.y, b.x)), "{a} before {b}");
    }
    for d in &dets {
        assert_eq!(d.score, 1);
        assert!(d.rect.fits_in(96, 80));
    }
}

/// Every window of every visited size, evaluated from pixel loops.
fn oracle_scan(c: &Cascade<f64>, img: &GrayImage, window: u32) -> Vec<Rect> {
    let scale = f64::from(window) / f64::from(c.window_w);
    let params = ScanParams::single_scale(window);
    let stride = params.stride(window) as usize;
    let mut out = Vec::new();
    for y in (0..=img.height() - window).step_by(stride) {
        for x in (0..=img.width() - window).step_by(stride) {
            if naive_depth(c, img, x, y, scale) == c.stage_count() {
                out.push(Rect::new(x, y, window, window));
            }
        }
    }
    out
}

#[test]
fn scan_equals_exhaustive_oracle() {
    let c = band_cascade();
    let mut r = rng(9);
    let mut fired = 0;
    for _ in 0..6 {
        let img = banded_image(&mut r, 64, 64);
        for window in [24, 31, 40] {
            let got: Vec<Rect> =
                detect_multiscale(&c, &img, &ScanParams::single_scale(window)).unwrap().iter().map(|d| d.rect).collect();
            assert_eq!(got, oracle_scan(&c, &img, window), "window {window}");
            fired += got.len();
        }
    }
    assert!(fired > 0);
}

#[test]
fn real_cascade_equals_oracle_on_a_face_crop() {
    let c = frontal_face();
    let small = downsample(&frame("f001"), ScaleFactor::new(4.0).unwrap()).unwrap();
    let crop = small.crop(Rect::new(30, 45, 60, 60)).unwrap();
    let got: Vec<Rect> = detect_multiscale(&c, &crop, &ScanParams::single_scale(40)).unwrap().iter().map(|d| d.rect).collect();
    assert!(!got.is_empty());
    assert_eq!(got, oracle_scan(&c, &crop, 40));
}

#[test]
fn one_and_four_threads_agree() {
    let c = frontal_face();
    let img = downsample(&frame("f001"), ScaleFactor::new(2.0).unwrap()).unwrap();
    let run = |n: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
        pool.install(|| detect_multiscale(&c, &img, &ScanParams::default()).unwrap())
    };
    let one = run(1);
    assert!(!one.is_empty());
    assert_eq!(one, run(4));
    assert_eq!(one, run(3));
}

#[test]
fn grouped_scores_count_members() {
    let c = frontal_face();
    let img = downsample(&frame("f001"), ScaleFactor::new(2.0).unwrap()).unwrap();
    let raw = detect_multiscale(&c, &img, &ScanParams::default()).unwrap();
    assert!(raw.iter().all(|d| d.score == 25));
    let grouped = group_detections(&raw, 3);
    assert!(!grouped.is_empty());
    assert!(grouped.iter().all(|d| d.score >= 3 && d.score == d.neighbors));
    assert_eq!(group_detections(&grouped, 1), grouped);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn translation_shifts_detections(seed in any::<u64>(), dx in 0u32..16, dy in 0u32..16) {
        let c = band_cascade();
        let inner = banded_image(&mut rng(seed), 48, 48);
        let outer = GrayImage::from_fn(64, 64, |x, y| {
            if x >= dx && y >= dy && x - dx < 48 && y - dy < 48 { inner.get(x - dx, y - dy) } else { 90 }
        });
        let params = ScanParams { step_frac: 1e-6, ..ScanParams::single_scale(24) };
        let a: Vec<Rect> = detect_multiscale(&c, &inner, &params).unwrap().iter().map(|d| d.rect.translate(dx, dy)).collect();
        let region = Rect::new(dx, dy, 48, 48);
        let b: Vec<Rect> = detect_multiscale(&c, &outer, &params).unwrap().iter().map(|d| d.rect).filter(|r| region.contains(r)).collect();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn detection_is_deterministic(seed in any::<u64>()) {
        let c = band_cascade();
        let img = banded_image(&mut rng(seed), 72, 60);
        let p = ScanParams::default();
        prop_assert_eq!(detect_multiscale(&c, &img, &p).unwrap(), detect_multiscale(&c, &img, &p).unwrap());
    }
}
