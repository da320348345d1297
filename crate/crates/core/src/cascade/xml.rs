//! OpenCV Haar cascade XML, upright stump-only subset.
//!
//! Two dialects are accepted. Both live under an `<opencv_storage>` root.
//!
//! Legacy (`type_id="opencv-haar-classifier"`):
//!
//! ```text
//! <NAME type_id="opencv-haar-classifier">
//!   <size>W H</size>
//!   <stages>
//!     <_>                                  one per stage
//!       <trees>
//!         <_>                              one per weak classifier
//!           <_>                            exactly one node (a stump)
//!             <feature>
//!               <rects><_>x y w h weight</_> ...</rects>
//!               <tilted>0</tilted>
//!             </feature>
//!             <threshold>t</threshold>
//!             <left_val>l</left_val>
//!             <right_val>r</right_val>
//!           </_>
//!         </_>
//!       </trees>
//!       <stage_threshold>s</stage_threshold>
//!       <parent>..</parent> <next>..</next>   ignored
//!     </_>
//!   </stages>
//! </NAME>
//! ```
//!
//! Current (`type_id="opencv-cascade-classifier"`, `stageType` BOOST,
//! `featureType` HAAR): `<width>`, `<height>`, `<stages>` whose weak
//! classifiers carry `<internalNodes>0 -1 idx threshold</internalNodes>` and
//! `<leafValues>left right</leafValues>`, and a shared `<features>` list
//! indexed by `idx`, each with `<rects>` and an optional `<tilted>`.
//!
//! Multi-node trees (more than one internal node, or `left_node`/`right_node`
//! children) and tilted features are rejected as unsupported.

use std::fmt::Write as _;
use std::str::FromStr;

use roxmltree::{Document, Node};

use super::model::{Cascade, HaarFeature, Stage, WeakClassifier, WeightedRect};
use super::CascadeError;
use crate::image::Rect;
use crate::scalar::Real;

fn parse_err(msg: impl Into<String>) -> CascadeError {
    CascadeError::Parse(msg.into())
}

fn elements<'a, 'i>(node: Node<'a, 'i>) -> impl Iterator<Item = Node<'a, 'i>> {
    node.children().filter(|n| n.is_element())
}

fn child<'a, 'i>(node: Node<'a, 'i>, name: &str) -> Result<Node<'a, 'i>, CascadeError> {
    elements(node)
        .find(|n| n.tag_name().name() == name)
        .ok_or_else(|| parse_err(format!("<{}> lacks <{name}>", node.tag_name().name())))
}

fn opt_child<'a, 'i>(node: Node<'a, 'i>, name: &str) -> Option<Node<'a, 'i>> {
    elements(node).find(|n| n.tag_name().name() == name)
}

fn text<'a>(node: Node<'a, '_>) -> &'a str {
    node.text().unwrap_or("").trim()
}

fn numbers<N: FromStr>(node: Node<'_, '_>, what: &str) -> Result<Vec<N>, CascadeError> {
    text(node)
        .split_whitespace()
        .map(|tok| tok.parse::<N>().map_err(|_| parse_err(format!("bad number {tok:?} in {what}"))))
        .collect()
}

fn number<N: FromStr>(node: Node<'_, '_>, name: &str) -> Result<N, CascadeError> {
    let s = text(child(node, name)?);
    s.parse().map_err(|_| parse_err(format!("bad <{name}> value {s:?}")))
}

fn parse_rect<T: Real>(node: Node<'_, '_>) -> Result<WeightedRect<T>, CascadeError> {
    let toks: Vec<&str> = text(node).split_whitespace().collect();
    if toks.len() != 5 {
        return Err(parse_err(format!("rect needs 5 values, got {:?}", text(node))));
    }
    let mut xywh = [0u32; 4];
    for (slot, tok) in xywh.iter_mut().zip(&toks[..4]) {
        *slot = tok.parse().map_err(|_| parse_err(format!("bad rect coordinate {tok:?}")))?;
    }
    let weight = toks[4].parse().map_err(|_| parse_err(format!("bad rect weight {:?}", toks[4])))?;
    Ok(WeightedRect { rect: Rect::new(xywh[0], xywh[1], xywh[2], xywh[3]), weight })
}

fn parse_feature<T: Real>(node: Node<'_, '_>) -> Result<HaarFeature<T>, CascadeError> {
    let tilted = match opt_child(node, "tilted") {
        Some(t) => text(t) != "0",
        None => false,
    };
    if tilted {
        return Err(CascadeError::Unsupported("tilted (45°) Haar feature (tilted=1)".into()));
    }
    let rects = elements(child(node, "rects")?).map(parse_rect).collect::<Result<Vec<_>, _>>()?;
    Ok(HaarFeature { rects, tilted })
}

/// Parse either OpenCV dialect.
pub fn parse_opencv_xml<T: Real>(source: &str) -> Result<Cascade<T>, CascadeError> {
    let doc = Document::parse(source).map_err(|e| parse_err(format!("XML: {e}")))?;
    let root = doc.root_element();
    let body = if root.tag_name().name() == "opencv_storage" {
        elements(root).next().ok_or_else(|| parse_err("empty <opencv_storage>"))?
    } else {
        root
    };
    match body.attribute("type_id") {
        Some("opencv-haar-classifier") => parse_legacy(body),
        Some("opencv-cascade-classifier") => parse_current(body),
        other => Err(parse_err(format!("unknown cascade type_id {other:?}"))),
    }
}

fn parse_legacy<T: Real>(body: Node<'_, '_>) -> Result<Cascade<T>, CascadeError> {
    let size: Vec<u32> = numbers(child(body, "size")?, "<size>")?;
    let [w, h] = size[..] else {
        return Err(parse_err("<size> must hold two integers"));
    };
    let mut stages = Vec::new();
    for (si, stage) in elements(child(body, "stages")?).enumerate() {
        let mut classifiers = Vec::new();
        for tree in elements(child(stage, "trees")?) {
            let nodes: Vec<_> = elements(tree).collect();
            if nodes.len() != 1 {
                return Err(CascadeError::Unsupported(format!(
                    "stage {si}: tree-structured weak classifier with {} nodes",
                    nodes.len()
                )));
            }
            let node = nodes[0];
            if opt_child(node, "left_node").is_some() || opt_child(node, "right_node").is_some() {
                return Err(CascadeError::Unsupported(format!("stage {si}: tree-structured weak classifier (left_node/right_node)")));
            }
            classifiers.push(WeakClassifier {
                feature: parse_feature(child(node, "feature")?)?,
                threshold: number(node, "threshold")?,
                left_val: number(node, "left_val")?,
                right_val: number(node, "right_val")?,
            });
        }
        stages.push(Stage { classifiers, threshold: number(stage, "stage_threshold")? });
    }
    Cascade::new(body.tag_name().name(), w, h, stages)
}

fn parse_current<T: Real>(body: Node<'_, '_>) -> Result<Cascade<T>, CascadeError> {
    let stage_type = text(child(body, "stageType")?);
    let feature_type = text(child(body, "featureType")?);
    if stage_type != "BOOST" || feature_type != "HAAR" {
        return Err(CascadeError::Unsupported(format!("{stage_type}/{feature_type} cascade (only BOOST/HAAR)")));
    }
    let w: u32 = number(body, "width")?;
    let h: u32 = number(body, "height")?;
    let features = elements(child(body, "features")?).map(parse_feature).collect::<Result<Vec<HaarFeature<T>>, _>>()?;

    let mut stages = Vec::new();
    for (si, stage) in elements(child(body, "stages")?).enumerate() {
        let mut classifiers = Vec::new();
        for weak in elements(child(stage, "weakClassifiers")?) {
            let nodes = text(child(weak, "internalNodes")?).split_whitespace().collect::<Vec<_>>();
            if nodes.len() != 4 {
                return Err(CascadeError::Unsupported(format!(
                    "stage {si}: tree-structured weak classifier with {} internal nodes",
                    nodes.len() / 4
                )));
            }
            if nodes[0] != "0" || nodes[1] != "-1" {
                return Err(CascadeError::Unsupported(format!("stage {si}: non-stump node layout {nodes:?}")));
            }
            let idx: usize = nodes[2].parse().map_err(|_| parse_err(format!("bad feature index {:?}", nodes[2])))?;
            let threshold: T = nodes[3].parse().map_err(|_| parse_err(format!("bad threshold {:?}", nodes[3])))?;
            let leaves: Vec<T> = numbers(child(weak, "leafValues")?, "<leafValues>")?;
            let [left_val, right_val] = leaves[..] else {
                return Err(parse_err(format!("stage {si}: stump needs 2 leaf values, got {}", leaves.len())));
            };
            let feature = features
                .get(idx)
                .cloned()
                .ok_or_else(|| CascadeError::Validation(format!("feature index {idx} out of range")))?;
            classifiers.push(WeakClassifier { feature, threshold, left_val, right_val });
        }
        stages.push(Stage { classifiers, threshold: number(stage, "stageThreshold")? });
    }
    Cascade::new("cascade", w, h, stages)
}

/// Write the legacy dialect. Parsing the output yields an identical cascade.
pub fn to_legacy_xml<T: Real>(cascade: &Cascade<T>) -> String {
    let tag = xml_name(&cascade.name);
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\"?>\n<opencv_storage>\n");
    let _ = writeln!(out, "<{tag} type_id=\"opencv-haar-classifier\">");
    let _ = writeln!(out, "  <size>{} {}</size>", cascade.window_w, cascade.window_h);
    out.push_str("  <stages>\n");
    for (i, stage) in cascade.stages.iter().enumerate() {
        let _ = writeln!(out, "    <_>\n      <!-- stage {i} -->\n      <trees>");
        for weak in &stage.classifiers {
            out.push_str("        <_>\n          <_>\n            <feature>\n              <rects>\n");
            for r in &weak.feature.rects {
                let _ = writeln!(
                    out,
                    "                <_>{} {} {} {} {}</_>",
                    r.rect.x, r.rect.y, r.rect.w, r.rect.h, r.weight
                );
            }
            out.push_str("              </rects>\n              <tilted>0</tilted>\n            </feature>\n");
            let _ = writeln!(out, "            <threshold>{}</threshold>", weak.threshold);
            let _ = writeln!(out, "            <left_val>{}</left_val>", weak.left_val);
            let _ = writeln!(out, "            <right_val>{}</right_val>", weak.right_val);
            out.push_str("          </_>\n        </_>\n");
        }
        out.push_str("      </trees>\n");
        let _ = writeln!(out, "      <stage_threshold>{}</stage_threshold>", stage.threshold);
        let _ = writeln!(out, "      <parent>{}</parent>\n      <next>-1</next>\n    </_>", i as i64 - 1);
    }
    let _ = write!(out, "  </stages>\n</{tag}>\n</opencv_storage>\n");
    out
}

fn xml_name(name: &str) -> String {
    let cleaned: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.' { c } else { '_' })
        .collect();
    match cleaned.chars().next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => cleaned,
        _ => format!("cascade_{cleaned}"),
    }
}
