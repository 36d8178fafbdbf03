use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use super::{CleanConfig, Connectivity, LabelMap};

/// Connected components of equal-label pixels.
#[derive(Debug, Clone)]
pub struct Components {
    /// Component id per pixel, raster order.
    pub ids: Vec<u32>,
    pub areas: Vec<usize>,
    pub labels: Vec<u8>,
    /// Raster index of each component's first pixel.
    pub first_pixel: Vec<usize>,
}

impl Components {
    pub fn len(&self) -> usize {
        self.areas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.areas.is_empty()
    }
}

#[inline]
pub(crate) fn neighbor(
    x: usize,
    y: usize,
    (dx, dy): (isize, isize),
    width: usize,
    height: usize,
) -> Option<usize> {
    let nx = x.checked_add_signed(dx)?;
    let ny = y.checked_add_signed(dy)?;
    (nx < width && ny < height).then_some(ny * width + nx)
}

/// Labels components in raster order of their first pixel.
pub fn connected_components(map: &LabelMap, connectivity: Connectivity) -> Components {
    let (w, h) = (map.width, map.height);
    let mut ids = vec![u32::MAX; w * h];
    let mut areas = Vec::new();
    let mut labels = Vec::new();
    let mut first_pixel = Vec::new();
    let mut stack = Vec::new();
    for start in 0..w * h {
        if ids[start] != u32::MAX {
            continue;
        }
        let id = areas.len() as u32;
        let label = map.labels[start];
        ids[start] = id;
        stack.push(start);
        let mut area = 0;
        while let Some(p) = stack.pop() {
            area += 1;
            let (x, y) = (p % w, p / w);
            for &off in connectivity.offsets() {
                if let Some(q) = neighbor(x, y, off, w, h) {
                    if ids[q] == u32::MAX && map.labels[q] == label {
                        ids[q] = id;
                        stack.push(q);
                    }
                }
            }
        }
        areas.push(area);
        labels.push(label);
        first_pixel.push(start);
    }
    Components {
        ids,
        areas,
        labels,
        first_pixel,
    }
}

/// Boundary length between each component and its neighbors: the number of
/// (inside pixel, outside neighbor pixel) pairs under `connectivity`.
pub fn boundary_counts(
    map: &LabelMap,
    comps: &Components,
    connectivity: Connectivity,
) -> Vec<HashMap<u32, u64>> {
    let (w, h) = (map.width, map.height);
    let mut nbrs = vec![HashMap::new(); comps.len()];
    for p in 0..w * h {
        let (x, y) = (p % w, p / w);
        let a = comps.ids[p];
        for &off in connectivity.offsets() {
            if let Some(q) = neighbor(x, y, off, w, h) {
                let b = comps.ids[q];
                if a != b {
                    *nbrs[a as usize].entry(b).or_insert(0) += 1;
                }
            }
        }
    }
    nbrs
}

/// Merges components smaller than `cfg.area_threshold` into the neighboring
/// label with the longest shared boundary (ties to the smaller label).
///
/// Components are processed smallest first (ties by first pixel), and the
/// region adjacency is updated after every merge. A merged region absorbs all
/// adjacent regions of its new label, so regions always stay components.
pub fn relabel_small_components(map: &LabelMap, cfg: &CleanConfig) -> LabelMap {
    let comps = connected_components(map, cfg.connectivity);
    let n = comps.len();
    let mut nbrs = boundary_counts(map, &comps, cfg.connectivity);
    let mut label = comps.labels.clone();
    let mut area = comps.areas.clone();
    let mut first = comps.first_pixel.clone();
    let mut parent: Vec<u32> = (0..n as u32).collect();
    let mut alive = vec![true; n];

    let mut heap: BinaryHeap<Reverse<(usize, usize, u32)>> = (0..n)
        .filter(|&r| area[r] < cfg.area_threshold)
        .map(|r| Reverse((area[r], first[r], r as u32)))
        .collect();

    while let Some(Reverse((a, f, r))) = heap.pop() {
        let r = r as usize;
        if !alive[r] || area[r] != a || first[r] != f || a >= cfg.area_threshold {
            continue;
        }
        if nbrs[r].is_empty() {
            continue;
        }
        let mut tally = [0u64; 256];
        for (&nb, &count) in &nbrs[r] {
            tally[label[nb as usize] as usize] += count;
        }
        let target = (0..256)
            .filter(|&l| tally[l] > 0)
            .fold(None::<usize>, |best, l| match best {
                Some(b) if tally[b] >= tally[l] => Some(b),
                _ => Some(l),
            })
            .expect("non-empty neighborhood") as u8;

        let mut group: Vec<usize> = nbrs[r]
            .keys()
            .map(|&k| k as usize)
            .filter(|&k| label[k] == target)
            .collect();
        group.sort_unstable();

        label[r] = target;
        let mut merged: HashMap<u32, u64> = std::mem::take(&mut nbrs[r]);
        for &m in &group {
            alive[m] = false;
            parent[m] = r as u32;
            area[r] += area[m];
            first[r] = first[r].min(first[m]);
            for (k, c) in std::mem::take(&mut nbrs[m]) {
                *merged.entry(k).or_insert(0) += c;
            }
        }
        merged.remove(&(r as u32));
        for &m in &group {
            merged.remove(&(m as u32));
        }
        for (&x, &count) in &merged {
            let xn = &mut nbrs[x as usize];
            xn.remove(&(r as u32));
            for &m in &group {
                xn.remove(&(m as u32));
            }
            xn.insert(r as u32, count);
        }
        nbrs[r] = merged;
        if area[r] < cfg.area_threshold {
            heap.push(Reverse((area[r], first[r], r as u32)));
        }
    }

    fn find(parent: &mut [u32], mut c: usize) -> usize {
        while parent[c] as usize != c {
            let next = parent[c] as usize;
            parent[c] = parent[next];
            c = next;
        }
        c
    }

    let mut out = map.clone();
    for (p, px) in out.labels.iter_mut().enumerate() {
        let root = find(&mut parent, comps.ids[p] as usize);
        *px = label[root];
    }
    out
}
