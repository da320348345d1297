//! Line-oriented cascade format.
//!
//! ```text
//! CASCADE <name> <window_w> <window_h> <n_stages>
//! STAGE <n_stumps> <stage_threshold>
//! STUMP <threshold> <left_val> <right_val> <n_rects>
//! RECT <x> <y> <w> <h> <weight>
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Names carry no
//! whitespace; the writer replaces it with `_`.

use std::fmt::Write as _;
use std::str::FromStr;

use super::model::{Cascade, HaarFeature, Stage, WeakClassifier, WeightedRect};
use super::CascadeError;
use crate::image::Rect;
use crate::scalar::Real;

/// Line number and whitespace-split tokens of one content line.
type Tokens<'a> = (usize, Vec<&'a str>);

struct Lines<'a> {
    inner: std::iter::Peekable<Box<dyn Iterator<Item = Tokens<'a>> + 'a>>,
}

impl<'a> Lines<'a> {
    fn new(source: &'a str) -> Self {
        let it: Box<dyn Iterator<Item = (usize, Vec<&'a str>)>> = Box::new(
            source
                .lines()
                .enumerate()
                .map(|(i, l)| (i + 1, l.trim()))
                .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
                .map(|(i, l)| (i, l.split_whitespace().collect())),
        );
        Lines { inner: it.peekable() }
    }

    fn expect(&mut self, keyword: &str, arity: usize) -> Result<(usize, Vec<&'a str>), CascadeError> {
        let (line, toks) = self
            .inner
            .next()
            .ok_or_else(|| CascadeError::Parse(format!("unexpected end of input, wanted {keyword}")))?;
        if toks[0] != keyword {
            return Err(CascadeError::Parse(format!("line {line}: expected {keyword}, found {}", toks[0])));
        }
        if toks.len() != arity + 1 {
            return Err(CascadeError::Parse(format!(
                "line {line}: {keyword} takes {arity} fields, found {}",
                toks.len() - 1
            )));
        }
        Ok((line, toks))
    }
}

fn field<N: FromStr>(line: usize, tok: &str) -> Result<N, CascadeError> {
    tok.parse().map_err(|_| CascadeError::Parse(format!("line {line}: bad value {tok:?}")))
}

pub fn parse_native<T: Real>(source: &str) -> Result<Cascade<T>, CascadeError> {
    let mut lines = Lines::new(source);
    let (l, head) = lines.expect("CASCADE", 4)?;
    let name = head[1].to_string();
    let window_w: u32 = field(l, head[2])?;
    let window_h: u32 = field(l, head[3])?;
    let n_stages: usize = field(l, head[4])?;

    let mut stages = Vec::with_capacity(n_stages);
    for _ in 0..n_stages {
        let (l, st) = lines.expect("STAGE", 2)?;
        let n_stumps: usize = field(l, st[1])?;
        let threshold: T = field(l, st[2])?;
        let mut classifiers = Vec::with_capacity(n_stumps);
        for _ in 0..n_stumps {
            let (l, sp) = lines.expect("STUMP", 4)?;
            let n_rects: usize = field(l, sp[4])?;
            let mut rects = Vec::with_capacity(n_rects);
            for _ in 0..n_rects {
                let (l, r) = lines.expect("RECT", 5)?;
                rects.push(WeightedRect {
                    rect: Rect::new(field(l, r[1])?, field(l, r[2])?, field(l, r[3])?, field(l, r[4])?),
                    weight: field(l, r[5])?,
                });
            }
            classifiers.push(WeakClassifier {
                feature: HaarFeature { rects, tilted: false },
                threshold: field(l, sp[1])?,
                left_val: field(l, sp[2])?,
                right_val: field(l, sp[3])?,
            });
        }
        stages.push(Stage { classifiers, threshold });
    }
    if let Some((line, toks)) = lines.inner.next() {
        return Err(CascadeError::Parse(format!("line {line}: trailing {} after last stage", toks[0])));
    }
    Cascade::new(name, window_w, window_h, stages)
}

/// Serialize to the native format. Floats use shortest round-trip notation,
/// so `parse_native(&to_native(c)) == c`.
pub fn to_native<T: Real>(cascade: &Cascade<T>) -> String {
    let name: String = cascade.name.split_whitespace().collect::<Vec<_>>().join("_");
    let name = if name.is_empty() { "cascade".to_string() } else { name };
    let mut out = String::new();
    let _ = writeln!(out, "CASCADE {name} {} {} {}", cascade.window_w, cascade.window_h, cascade.stages.len());
    for stage in &cascade.stages {
        let _ = writeln!(out, "STAGE {} {}", stage.classifiers.len(), stage.threshold);
        for weak in &stage.classifiers {
            let _ = writeln!(
                out,
                "STUMP {} {} {} {}",
                weak.threshold,
                weak.left_val,
                weak.right_val,
                weak.feature.rects.len()
            );
            for r in &weak.feature.rects {
                let _ = writeln!(out, "RECT {} {} {} {} {}", r.rect.x, r.rect.y, r.rect.w, r.rect.h, r.weight);
            }
        }
    }
    out
}
