use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};

/// An image file in a frame directory.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub id: String,
    pub path: PathBuf,
}

/// The frame directory exists but holds no frames.
#[derive(Debug)]
pub struct EmptyInput(pub PathBuf);

impl fmt::Display for EmptyInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "no .pgm or .png frames in {}", self.0.display())
    }
}

impl std::error::Error for EmptyInput {}

fn is_frame(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("pgm") || e.eq_ignore_ascii_case("png"))
}

/// Frame id of a single image: its file stem.
pub fn frame_of(path: &Path) -> anyhow::Result<Frame> {
    let id = path
        .file_stem()
        .and_then(|s| s.to_str())
        .with_context(|| format!("{} has no usable file name", path.display()))?;
    Ok(Frame { id: id.to_string(), path: path.to_path_buf() })
}

/// The `.pgm`/`.png` files of `dir`, sorted by file name, identified by stem.
pub fn list_frames(dir: &Path) -> anyhow::Result<Vec<Frame>> {
    let entries = std::fs::read_dir(dir).with_context(|| format!("cannot read frame directory {}", dir.display()))?;
    let mut by_name = BTreeMap::new();
    for entry in entries {
        let path = entry.with_context(|| format!("cannot read frame directory {}", dir.display()))?.path();
        if path.is_file() && is_frame(&path) {
            by_name.insert(path.file_name().unwrap_or_default().to_os_string(), path);
        }
    }
    if by_name.is_empty() {
        return Err(EmptyInput(dir.to_path_buf()).into());
    }
    let mut seen: HashMap<String, PathBuf> = HashMap::new();
    let mut frames = Vec::with_capacity(by_name.len());
    for path in by_name.into_values() {
        let frame = frame_of(&path)?;
        if let Some(prev) = seen.insert(frame.id.clone(), path.clone()) {
            bail!("frames {} and {} share the id {:?}", prev.display(), path.display(), frame.id);
        }
        frames.push(frame);
    }
    Ok(frames)
}
