use super::components::connected_components;
use super::{CleanConfig, LabelMap};

/// Separable square-window max/min filter. Pixels outside the image read as `outside`.
fn square_filter(mask: &[bool], w: usize, h: usize, radius: usize, dilate: bool) -> Vec<bool> {
    let outside = !dilate;
    let hit = |v: bool| if dilate { v } else { !v };
    let pass = |src: &[bool], horizontal: bool| -> Vec<bool> {
        let mut out = vec![false; w * h];
        for y in 0..h {
            for x in 0..w {
                let (pos, len) = if horizontal { (x, w) } else { (y, h) };
                let mut any = false;
                for d in 0..=2 * radius {
                    let v = match (pos + d).checked_sub(radius) {
                        Some(p) if p < len => {
                            if horizontal {
                                src[y * w + p]
                            } else {
                                src[p * w + x]
                            }
                        }
                        _ => outside,
                    };
                    if hit(v) {
                        any = true;
                        break;
                    }
                }
                out[y * w + x] = if dilate { any } else { !any };
            }
        }
        out
    };
    let rows = pass(mask, true);
    pass(&rows, false)
}

/// Binary closing (dilation then erosion) with a `kernel_size` square.
///
/// Erosion treats out-of-image pixels as foreground, so the result always
/// contains the input.
pub fn close_binary(mask: &[bool], width: usize, height: usize, kernel_size: usize) -> Vec<bool> {
    assert_eq!(mask.len(), width * height);
    let radius = kernel_size / 2;
    if radius == 0 {
        return mask.to_vec();
    }
    let dilated = square_filter(mask, width, height, radius, true);
    square_filter(&dilated, width, height, radius, false)
}

/// Per-label closing of a multi-label map.
///
/// Each label's binary mask is closed independently. A pixel claimed by
/// several closed masks goes to the label whose closed component through that
/// pixel is largest (ties to the smaller label); unclaimed pixels keep their
/// original label.
pub fn morphological_close(map: &LabelMap, cfg: &CleanConfig) -> LabelMap {
    let (w, h) = (map.width, map.height);
    let n = w * h;
    let mut best_area = vec![0usize; n];
    let mut out = map.clone();
    for l in map.label_set() {
        let own: Vec<bool> = map.labels.iter().map(|&v| v == l).collect();
        let closed = close_binary(&own, w, h, cfg.kernel_size);
        let as_map = LabelMap {
            width: w,
            height: h,
            labels: closed.iter().map(|&c| c as u8).collect(),
        };
        let comps = connected_components(&as_map, cfg.connectivity);
        for p in 0..n {
            if !closed[p] {
                continue;
            }
            let area = comps.areas[comps.ids[p] as usize];
            // labels visited in ascending order, so strict > keeps ties on the smaller label
            if area > best_area[p] {
                best_area[p] = area;
                out.labels[p] = l;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct definition: closing = erosion(dilation), both over the full window.
    fn reference_close(mask: &[bool], w: usize, h: usize, r: isize) -> Vec<bool> {
        let at = |m: &[bool], x: isize, y: isize, outside: bool| {
            if x < 0 || y < 0 || x >= w as isize || y >= h as isize {
                outside
            } else {
                m[y as usize * w + x as usize]
            }
        };
        let mut dil = vec![false; w * h];
        for y in 0..h as isize {
            for x in 0..w as isize {
                dil[y as usize * w + x as usize] = (-r..=r)
                    .flat_map(|dy| (-r..=r).map(move |dx| (dx, dy)))
                    .any(|(dx, dy)| at(mask, x + dx, y + dy, false));
            }
        }
        let mut ero = vec![false; w * h];
        for y in 0..h as isize {
            for x in 0..w as isize {
                ero[y as usize * w + x as usize] = (-r..=r)
                    .flat_map(|dy| (-r..=r).map(move |dx| (dx, dy)))
                    .all(|(dx, dy)| at(&dil, x + dx, y + dy, true));
            }
        }
        ero
    }

    #[test]
    fn uniform_map_unchanged() {
        let map = LabelMap::filled(9, 7, 4);
        assert_eq!(morphological_close(&map, &CleanConfig::default()), map);
    }

    #[test]
    fn fills_interior_hole() {
        let mut map = LabelMap::filled(12, 12, 0);
        for y in 1..11 {
            for x in 1..11 {
                map.set(x, y, 3);
            }
        }
        map.set(5, 6, 0);
        let own: Vec<bool> = map.labels.iter().map(|&v| v == 3).collect();
        let reference = reference_close(&own, 12, 12, 1);
        assert!(reference[6 * 12 + 5]);

        let out = morphological_close(&map, &CleanConfig::default());
        assert_eq!(out.get(5, 6), 3);
        for y in 1..11 {
            for x in 1..11 {
                assert_eq!(out.get(x, y), 3);
            }
        }

        // with a background margin wider than the kernel, only the hole changes
        let mut wide = LabelMap::filled(16, 16, 0);
        for y in 3..13 {
            for x in 3..13 {
                wide.set(x, y, 3);
            }
        }
        wide.set(7, 8, 0);
        let mut expect = wide.clone();
        expect.set(7, 8, 3);
        assert_eq!(morphological_close(&wide, &CleanConfig::default()), expect);
    }

    #[test]
    fn isolated_pixel_survives_own_closing() {
        let mut mask = vec![false; 25];
        mask[12] = true;
        let closed = close_binary(&mask, 5, 5, 3);
        assert!(closed[12]);
        assert_eq!(closed, reference_close(&mask, 5, 5, 1));
    }

    #[test]
    fn separable_filter_matches_reference() {
        let mut state = 0x2545_f491_4f6c_dd1du64;
        for k in [1usize, 3, 5] {
            for _ in 0..20 {
                let mask: Vec<bool> = (0..13 * 9)
                    .map(|_| {
                        state ^= state << 13;
                        state ^= state >> 7;
                        state ^= state << 17;
                        state.is_multiple_of(3)
                    })
                    .collect();
                let fast = close_binary(&mask, 13, 9, k);
                assert_eq!(fast, reference_close(&mask, 13, 9, (k / 2) as isize));
                assert!(mask.iter().zip(&fast).all(|(&m, &c)| !m || c));
            }
        }
    }
}
