use std::cmp::Ordering;

use super::{Splat2D, TILE_SIZE};

/// Per-tile splat lists over a `tiles_x × tiles_y` grid of 16×16 tiles.
///
/// List entries index into the splat slice the bins were built from and are
/// ordered front to back (depth ascending, ties by Gaussian index).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TileBins {
    pub tiles_x: u32,
    pub tiles_y: u32,
    pub lists: Vec<Vec<u32>>,
}

impl TileBins {
    #[inline]
    pub fn tile_of(&self, x: u32, y: u32) -> &[u32] {
        let t = (y / TILE_SIZE) * self.tiles_x + x / TILE_SIZE;
        &self.lists[t as usize]
    }

    /// Total number of (tile, splat) entries.
    pub fn entry_count(&self) -> usize {
        self.lists.iter().map(Vec::len).sum()
    }
}

pub(crate) fn depth_order(a: &Splat2D, b: &Splat2D) -> Ordering {
    a.depth
        .total_cmp(&b.depth)
        .then(a.gaussian_index.cmp(&b.gaussian_index))
}

/// Bins splats into every tile their 3σ box overlaps.
pub fn build_tile_lists(splats: &[Splat2D], width: u32, height: u32) -> TileBins {
    let tiles_x = width.div_ceil(TILE_SIZE);
    let tiles_y = height.div_ceil(TILE_SIZE);
    let mut lists = vec![Vec::new(); (tiles_x * tiles_y) as usize];

    let mut order: Vec<u32> = (0..splats.len() as u32).collect();
    order.sort_by(|&a, &b| depth_order(&splats[a as usize], &splats[b as usize]));

    for &s in &order {
        let Some((x0, y0, x1, y1)) = splats[s as usize].pixel_bounds(width, height) else {
            continue;
        };
        for ty in y0 / TILE_SIZE..=y1 / TILE_SIZE {
            for tx in x0 / TILE_SIZE..=x1 / TILE_SIZE {
                lists[(ty * tiles_x + tx) as usize].push(s);
            }
        }
    }
    TileBins {
        tiles_x,
        tiles_y,
        lists,
    }
}
