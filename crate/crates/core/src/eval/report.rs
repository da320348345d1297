//! CSV tables and single-series SVG line plots.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{BenchRow, ConfusionCounts, EvalError, Rate, RocCurve};
use crate::image::ScaleFactor;

pub const PLOT_WIDTH: f64 = 800.0;
pub const PLOT_HEIGHT: f64 = 600.0;
const MARGIN: f64 = 70.0;

struct Csv {
    path: PathBuf,
    writer: csv::Writer<Vec<u8>>,
}

impl Csv {
    fn new(dir: &Path, name: &str, header: &[&str]) -> Self {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header).expect("in-memory write");
        Csv { path: dir.join(name), writer }
    }

    fn row<I: IntoIterator<Item = String>>(&mut self, fields: I) {
        self.writer.write_record(fields.into_iter().collect::<Vec<_>>()).expect("in-memory write");
    }

    fn finish(self) -> Result<PathBuf, EvalError> {
        let bytes = self.writer.into_inner().map_err(|e| EvalError::io(&self.path, e.into_error()))?;
        write_file(&self.path, &bytes)?;
        Ok(self.path)
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), EvalError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| EvalError::io(parent, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| EvalError::io(path, e))
}

fn fmt3(v: f64) -> String {
    format!("{v:.3}")
}

fn fmt_num(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v}")
    }
}

/// A line plot with one polyline, on a fixed 800x600 viewBox.
pub fn render_svg(title: &str, x_label: &str, y_label: &str, points: &[(f64, f64)], y_range: Option<(f64, f64)>) -> String {
    let span = |vals: &mut dyn Iterator<Item = f64>| {
        let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        if !lo.is_finite() {
            (0.0, 1.0)
        } else if hi - lo < 1e-12 {
            (lo - 0.5, hi + 0.5)
        } else {
            (lo, hi)
        }
    };
    let (x0, x1) = span(&mut points.iter().map(|p| p.0));
    let (y0, y1) = y_range.unwrap_or_else(|| {
        let (lo, hi) = span(&mut points.iter().map(|p| p.1));
        (lo.min(0.0), hi)
    });
    let (w, h) = (PLOT_WIDTH - 2.0 * MARGIN, PLOT_HEIGHT - 2.0 * MARGIN);
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * w;
    let py = |y: f64| PLOT_HEIGHT - MARGIN - (y - y0) / (y1 - y0) * h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="0 0 {PLOT_WIDTH} {PLOT_HEIGHT}" width="{PLOT_WIDTH}" height="{PLOT_HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{PLOT_WIDTH}" height="{PLOT_HEIGHT}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="35" font-family="sans-serif" font-size="20" text-anchor="middle">{}</text>"#, PLOT_WIDTH / 2.0, escape(title));
    let (left, right, top, bottom) = (MARGIN, PLOT_WIDTH - MARGIN, MARGIN, PLOT_HEIGHT - MARGIN);
    let _ = writeln!(s, r#"<line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}" stroke="black"/>"#);
    let _ = writeln!(s, r#"<line x1="{left}" y1="{top}" x2="{left}" y2="{bottom}" stroke="black"/>"#);
    for i in 0..=4 {
        let f = f64::from(i) / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#,
            px(xv),
            bottom + 20.0,
            tick(xv)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.1}" font-family="sans-serif" font-size="12" text-anchor="end">{}</text>"#,
            left - 8.0,
            py(yv) + 4.0,
            tick(yv)
        );
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#, PLOT_WIDTH / 2.0, PLOT_HEIGHT - 20.0, escape(x_label));
    let _ = writeln!(
        s,
        r#"<text x="20" y="{}" font-family="sans-serif" font-size="14" text-anchor="middle" transform="rotate(-90 20 {})">{}</text>"#,
        PLOT_HEIGHT / 2.0,
        PLOT_HEIGHT / 2.0,
        escape(y_label)
    );
    let coords: Vec<String> = points.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
    let _ = writeln!(s, r#"<polyline fill="none" stroke="steelblue" stroke-width="2" points="{}"/>"#, coords.join(" "));
    s.push_str("</svg>\n");
    s
}

fn tick(v: f64) -> String {
    let t = format!("{v:.2}");
    t.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn write_svg(dir: &Path, name: &str, svg: &str) -> Result<PathBuf, EvalError> {
    let path = dir.join(name);
    write_file(&path, svg.as_bytes())?;
    Ok(path)
}

/// `speed_vs_sf.csv` (`sf,mean_fps`), `speed_by_subject.csv` and
/// `speed_vs_sf.svg`.
pub fn write_speed_report(rows: &[BenchRow], out_dir: &Path) -> Result<Vec<PathBuf>, EvalError> {
    if rows.is_empty() {
        log::warn!("no benchmark rows; speed report not written");
        return Ok(Vec::new());
    }
    let mut mean = Csv::new(out_dir, "speed_vs_sf.csv", &["sf", "mean_fps"]);
    let mut subj = Csv::new(out_dir, "speed_by_subject.csv", &["sf", "subject", "fps"]);
    for r in rows {
        mean.row([r.sf.to_string(), fmt3(r.mean_fps)]);
        for (name, fps) in &r.per_subject_fps {
            subj.row([r.sf.to_string(), name.clone(), fmt3(*fps)]);
        }
    }
    let pts: Vec<_> = rows.iter().map(|r| (r.sf.value(), r.mean_fps)).collect();
    let svg = render_svg("Speed vs SF", "SF", "frames per second", &pts, None);
    Ok(vec![mean.finish()?, subj.finish()?, write_svg(out_dir, "speed_vs_sf.svg", &svg)?])
}

/// `accuracy_vs_sf.csv` with the counts behind each value, and its plot.
/// Undefined accuracies are written as `undefined` and left out of the plot.
pub fn write_accuracy_report(
    rows: &[(ScaleFactor, ConfusionCounts, Rate<f64>)],
    out_dir: &Path,
) -> Result<Vec<PathBuf>, EvalError> {
    if rows.is_empty() {
        log::warn!("no accuracy rows; accuracy report not written");
        return Ok(Vec::new());
    }
    let mut csv = Csv::new(out_dir, "accuracy_vs_sf.csv", &["sf", "accuracy", "tp", "fp", "tn", "fn"]);
    for (sf, c, acc) in rows {
        let acc = acc.value().map_or_else(|| "undefined".to_string(), |v| format!("{v}"));
        csv.row([sf.to_string(), acc, c.tp.to_string(), c.fp.to_string(), c.tn.to_string(), c.fn_.to_string()]);
    }
    let pts: Vec<_> = rows.iter().filter_map(|(sf, _, a)| a.value().map(|v| (sf.value(), v))).collect();
    let svg = render_svg("Accuracy vs SF", "SF", "accuracy", &pts, Some((0.0, 1.0)));
    Ok(vec![csv.finish()?, write_svg(out_dir, "accuracy_vs_sf.svg", &svg)?])
}

/// `auc_vs_sf.csv` and its plot.
pub fn write_auc_report(rows: &[(ScaleFactor, f64)], out_dir: &Path) -> Result<Vec<PathBuf>, EvalError> {
    if rows.is_empty() {
        log::warn!("no AUC rows; AUC report not written");
        return Ok(Vec::new());
    }
    let mut csv = Csv::new(out_dir, "auc_vs_sf.csv", &["sf", "auc"]);
    for (sf, a) in rows {
        csv.row([sf.to_string(), format!("{a}")]);
    }
    let pts: Vec<_> = rows.iter().map(|(sf, a)| (sf.value(), *a)).collect();
    let svg = render_svg("AUC vs SF", "SF", "AUC", &pts, Some((0.0, 1.0)));
    Ok(vec![csv.finish()?, write_svg(out_dir, "auc_vs_sf.svg", &svg)?])
}

/// `roc_sf<k>.csv` (`fpr,tpr,threshold`) and `roc_sf<k>.svg` per curve.
pub fn write_roc_reports(curves: &[(ScaleFactor, RocCurve<f64>)], out_dir: &Path) -> Result<Vec<PathBuf>, EvalError> {
    if curves.is_empty() {
        log::warn!("no ROC curves; ROC report not written");
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for (sf, curve) in curves {
        let mut csv = Csv::new(out_dir, &format!("roc_sf{sf}.csv"), &["fpr", "tpr", "threshold"]);
        for p in &curve.points {
            csv.row([format!("{}", p.fpr), format!("{}", p.tpr), fmt_num(p.threshold)]);
        }
        out.push(csv.finish()?);
        let pts: Vec<_> = curve.points.iter().map(|p| (p.fpr, p.tpr)).collect();
        let svg = render_svg(&format!("ROC at SF {sf}"), "false positive rate", "true positive rate", &pts, Some((0.0, 1.0)));
        out.push(write_svg(out_dir, &format!("roc_sf{sf}.svg"), &svg)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::RocPoint;
    use std::collections::BTreeMap;

    fn sf(v: f64) -> ScaleFactor {
        ScaleFactor::new(v).unwrap()
    }

    #[test]
    fn speed_csv_line() {
        let dir = tempfile::tempdir().unwrap();
        let rows = [BenchRow { sf: sf(2.0), per_subject_fps: BTreeMap::from([("s1".into(), 8.088)]), mean_fps: 8.088 }];
        write_speed_report(&rows, dir.path()).unwrap();
        let text = std::fs::read_to_string(dir.path().join("speed_vs_sf.csv")).unwrap();
        assert_eq!(text, "sf,mean_fps\n2,8.088\n");
    }

    #[test]
    fn empty_inputs_write_nothing() {
        let dir = tempfile::tempdir().unwrap();
        assert!(write_roc_reports(&[], dir.path()).unwrap().is_empty());
        assert!(write_speed_report(&[], dir.path()).unwrap().is_empty());
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
    }

    #[test]
    fn roc_svg_has_one_polyline_of_three_points() {
        let dir = tempfile::tempdir().unwrap();
        let p = |fpr: f64, tpr: f64, threshold: f64| RocPoint { fpr, tpr, threshold };
        let curve = RocCurve::new(vec![p(0.0, 0.0, f64::INFINITY), p(0.25, 0.75, 2.0), p(1.0, 1.0, f64::NEG_INFINITY)]).unwrap();
        write_roc_reports(&[(sf(4.0), curve)], dir.path()).unwrap();
        let svg = std::fs::read_to_string(dir.path().join("roc_sf4.svg")).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 1);
        let points = svg.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
        assert_eq!(points.split_whitespace().count(), 3);
        assert!(svg.contains(r#"viewBox="0 0 800 600""#));
        let csv = std::fs::read_to_string(dir.path().join("roc_sf4.csv")).unwrap();
        assert_eq!(csv, "fpr,tpr,threshold\n0,0,inf\n0.25,0.75,2\n1,1,-inf\n");
    }

    #[test]
    fn undefined_accuracy_is_labelled_and_not_plotted() {
        let dir = tempfile::tempdir().unwrap();
        let rows = [
            (sf(1.0), ConfusionCounts::new(4, 2, 3, 1), Rate::Defined(0.7)),
            (sf(2.0), ConfusionCounts::default(), Rate::Undefined),
        ];
        write_accuracy_report(&rows, dir.path()).unwrap();
        let csv = std::fs::read_to_string(dir.path().join("accuracy_vs_sf.csv")).unwrap();
        assert_eq!(csv, "sf,accuracy,tp,fp,tn,fn\n1,0.7,4,2,3,1\n2,undefined,0,0,0,0\n");
        let svg = std::fs::read_to_string(dir.path().join("accuracy_vs_sf.svg")).unwrap();
        let points = svg.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
        assert_eq!(points.split_whitespace().count(), 1);
    }
}
