//! Merging of overlapping raw windows into one box per object.

use super::model::Detection;
use crate::image::Rect;

/// Boxes with at least this IoU belong to the same object.
pub const GROUP_IOU: f64 = 0.4;

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet { parent: (0..n).collect() }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    /// Union keeping the smaller index as root, so roots are first members.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }
}

#[derive(Clone, Debug)]
struct Class {
    first: usize,
    weight: u64,
    sums: [u64; 4],
    proto: Detection,
}

impl Class {
    fn of(i: usize, d: &Detection) -> Self {
        let w = u64::from(d.weight());
        let r = d.rect;
        Class {
            first: i,
            weight: w,
            sums: [r.x, r.y, r.w, r.h].map(|v| u64::from(v) * w),
            proto: *d,
        }
    }

    fn absorb(&mut self, other: &Class) {
        self.weight += other.weight;
        for (s, o) in self.sums.iter_mut().zip(other.sums) {
            *s += o;
        }
        if other.first < self.first {
            self.first = other.first;
            self.proto = other.proto;
        }
    }

    /// Weighted mean box, rounded half-up.
    fn rect(&self) -> Rect {
        let m = self.sums.map(|s| ((2 * s + self.weight) / (2 * self.weight)) as u32);
        Rect::new(m[0], m[1], m[2], m[3])
    }
}

fn partition(classes: Vec<Class>, rect: impl Fn(&Class) -> Rect) -> (Vec<Class>, bool) {
    let n = classes.len();
    let rects: Vec<Rect> = classes.iter().map(&rect).collect();
    let mut set = DisjointSet::new(n);
    let mut merged = false;
    for i in 0..n {
        for j in i + 1..n {
            if rects[i].iou(&rects[j]) >= GROUP_IOU {
                merged |= set.union(i, j);
            }
        }
    }
    if !merged {
        return (classes, false);
    }
    let mut out: Vec<Option<Class>> = vec![None; n];
    for (i, c) in classes.into_iter().enumerate() {
        let root = set.find(i);
        match &mut out[root] {
            Some(acc) => acc.absorb(&c),
            slot @ None => *slot = Some(c),
        }
    }
    (out.into_iter().flatten().collect(), true)
}

/// Cluster `raw` by IoU ≥ [`GROUP_IOU`] under transitive closure and emit one
/// mean box per cluster of at least `min_neighbors` windows.
///
/// Clusters whose mean boxes still overlap by the same criterion are merged
/// until none do, which makes the result a fixed point: regrouping it with
/// `min_neighbors = 1` returns it unchanged. Output follows the order of each
/// cluster's first raw member.
pub fn group_detections(raw: &[Detection], min_neighbors: u32) -> Vec<Detection> {
    let singles: Vec<Class> = raw.iter().enumerate().map(|(i, d)| Class::of(i, d)).collect();
    let (mut classes, _) = partition(singles, |c| c.proto.rect);
    loop {
        let (next, merged) = partition(classes, Class::rect);
        classes = next;
        if !merged {
            break;
        }
    }
    classes.sort_by_key(|c| c.first);
    classes
        .into_iter()
        .filter(|c| c.weight >= u64::from(min_neighbors))
        .map(|c| {
            let n = u32::try_from(c.weight).unwrap_or(u32::MAX);
            Detection { rect: c.rect(), score: n, neighbors: n, ..c.proto }
        })
        .collect()
}
