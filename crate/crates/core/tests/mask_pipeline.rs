mod common;

use common::*;
use proptest::prelude::*;
use splatseg_core::mask::{
    decode_mask, encode_mask, load_mask_dir, preprocess, save_mask, CleanConfig, Connectivity, LabelMap,
};
use splatseg_core::Error;

/// Small components that still border a different label after cleanup.
fn surviving_specks(map: &LabelMap, cfg: &CleanConfig) -> usize {
    let (_, areas, adjacent) = oracle_components(map, cfg.connectivity == Connectivity::Eight);
    areas
        .iter()
        .zip(&adjacent)
        .filter(|(&a, adj)| a < cfg.area_threshold && !adj.is_empty())
        .count()
}

#[test]
fn defaults() {
    let cfg = CleanConfig::default();
    assert_eq!(cfg.kernel_size, 3);
    assert_eq!(cfg.area_threshold, 500);
    assert_eq!(cfg.connectivity, Connectivity::Eight);
}

#[test]
fn speckle_corpus_is_cleaned() {
    let cfg = CleanConfig::default();
    for seed in 0..12 {
        let map = speckled_map(seed, 128, 96, 4, 150);
        assert!(surviving_specks(&map, &cfg) > 0, "fixture {seed} has no speckle");
        let clean = preprocess(&map, &cfg);
        assert_eq!(surviving_specks(&clean, &cfg), 0, "fixture {seed}");
    }
}

#[test]
fn threshold_boundary() {
    // a 499-pixel island disappears, a 500-pixel one survives
    for (area, survives) in [(499usize, false), (500, true)] {
        let mut map = LabelMap::filled(80, 80, 0);
        for p in 0..area {
            map.set(10 + p % 25, 10 + p / 25, 6);
        }
        let clean = preprocess(&map, &CleanConfig::default());
        let count = clean.labels.iter().filter(|&&l| l == 6).count();
        assert_eq!(count > 0, survives, "area {area}");
    }
}

#[test]
fn clean_rectangles_are_fixed_points() {
    let mut map = LabelMap::filled(120, 90, 0);
    for (x0, y0, x1, y1, l) in [(0, 0, 40, 30, 1), (40, 0, 120, 30, 2), (10, 50, 70, 90, 3)] {
        for y in y0..y1 {
            for x in x0..x1 {
                map.set(x, y, l);
            }
        }
    }
    assert_eq!(preprocess(&map, &CleanConfig::default()), map);
}

#[test]
fn mask_directory_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let cams = arc_cameras(2, 20, 10);
    let maps: Vec<LabelMap> = (0..2).map(|i| random_label_map(i, 20, 10, 255)).collect();
    for (cam, map) in cams.iter().zip(&maps) {
        save_mask(map, dir.path().join(format!("{}.png", cam.id))).unwrap();
    }
    assert_eq!(load_mask_dir(dir.path(), &cams).unwrap(), maps);
    assert_eq!(decode_mask(&encode_mask(&maps[0])).unwrap(), maps[0]);

    let wrong = arc_cameras(1, 21, 10);
    assert!(matches!(load_mask_dir(dir.path(), &wrong), Err(Error::Shape(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn cleanup_leaves_no_small_bordered_component(
        seed in 0u64..100_000,
        threshold in 20usize..600,
        four in any::<bool>(),
    ) {
        let cfg = CleanConfig {
            area_threshold: threshold,
            connectivity: if four { Connectivity::Four } else { Connectivity::Eight },
            ..CleanConfig::default()
        };
        let map = speckled_map(seed, 64, 48, 3, 60);
        let clean = preprocess(&map, &cfg);
        prop_assert_eq!(surviving_specks(&clean, &cfg), 0);
        prop_assert_eq!(clean.labels.len(), map.labels.len());
    }
}
