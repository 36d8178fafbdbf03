mod common;

use common::*;
use proptest::prelude::*;
use splatseg_core::edit::{apply, extract_object, recolor_object, remove_object, EditOp};
use splatseg_core::raster::{render, Channels};
use splatseg_core::reassign::SegmentationMatrix;
use splatseg_core::scene::{inverse_logistic, scene_to_bytes, Gaussian, Scene};
use splatseg_core::session::{Session, SessionConfig};
use splatseg_core::train::LinearClassifier;

fn sorted_bytes(scene: &Scene) -> Vec<Vec<u8>> {
    let mut v: Vec<Vec<u8>> = scene
        .gaussians
        .iter()
        .map(|g| {
            scene_to_bytes(&Scene {
                gaussians: vec![g.clone()],
                sh_degree: scene.sh_degree,
            })
        })
        .collect();
    v.sort();
    v
}

#[test]
fn recolored_gaussian_renders_target_color() {
    let g = Gaussian {
        position: [0.0, 0.0, 2.0],
        scale: [0.05f32.ln(); 3],
        opacity: inverse_logistic(0.9999) as f32,
        ..Default::default()
    };
    let scene = Scene {
        gaussians: vec![g],
        sh_degree: 0,
    };
    let red = recolor_object(&scene, &[true], [1.0, 0.0, 0.0]);
    let cam = front_camera(16, 16);
    let c = render(&red, &cam, Channels::COLOR).frame.color[8 * 16 + 8];
    assert!(
        (c[0] - 0.99).abs() < 1e-6 && c[1].abs() < 1e-6 && c[2].abs() < 1e-6,
        "{c:?}"
    );
}

#[test]
fn extracted_object_renders_only_inside_its_footprint() {
    let syn = splatseg_core::synthetic::SyntheticScene::generate(&Default::default());
    let seg = SegmentationMatrix::from_labels(syn.scene.labels());
    let (cluster, cluster_seg) = apply(&syn.scene, &seg, &EditOp::extract(2)).unwrap();
    assert!(cluster_seg.labels.iter().all(|&l| l == 2));
    for cam in &syn.cameras {
        let full = render(&syn.scene, cam, Channels::COLOR).frame;
        let part = render(&cluster, cam, Channels::COLOR).frame;
        for p in 0..full.alpha.len() {
            if part.alpha[p] > 0.0 {
                assert!(full.alpha[p] > 0.0, "pixel {p} empty in the original");
            }
        }
        // a scene holding only that object is its own extraction
        let again = render(
            &extract_object(&cluster, &vec![true; cluster.len()]),
            cam,
            Channels::COLOR,
        )
        .frame;
        assert_eq!(again, part);
    }
}

#[test]
fn session_undo_restores_export_bytes() {
    let syn = splatseg_core::synthetic::SyntheticScene::generate(&Default::default());
    let mut s = Session::new(
        syn.scene.clone(),
        LinearClassifier::zeros(),
        SessionConfig::default(),
    );
    let original = s.export();
    s.edit(EditOp::recolor(1, [0.1, 0.9, 0.4])).unwrap();
    let recolored = s.export();
    s.edit(EditOp::remove(3)).unwrap();
    s.edit(EditOp::extract(1)).unwrap();
    assert_eq!(s.scene().len(), 100);
    s.undo().unwrap();
    s.undo().unwrap();
    assert_eq!(s.export(), recolored);
    s.undo().unwrap();
    assert_eq!(s.export(), original);
    assert_eq!(s.version(), 6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn remove_and_extract_partition(seed in 0u64..100_000, n in 0usize..80, target in 0u8..4) {
        let scene = random_scene(seed, n, (seed % 4) as u8, 4);
        let mask: Vec<bool> = scene.gaussians.iter().map(|g| g.label == target).collect();
        let removed = remove_object(&scene, &mask);
        let extracted = extract_object(&scene, &mask);
        prop_assert_eq!(removed.len() + extracted.len(), scene.len());
        let mut union = removed.clone();
        union.gaussians.extend(extracted.gaussians.iter().cloned());
        prop_assert_eq!(sorted_bytes(&union), sorted_bytes(&scene));
        prop_assert!(removed.gaussians.iter().all(|g| g.label != target));
        prop_assert!(extracted.gaussians.iter().all(|g| g.label == target));
    }

    #[test]
    fn recolor_touches_only_color(seed in 0u64..100_000, rgb in prop::array::uniform3(0.0f64..=1.0)) {
        let scene = random_scene(seed, 40, 3, 3);
        let mask: Vec<bool> = scene.gaussians.iter().map(|g| g.label == 1).collect();
        let out = recolor_object(&scene, &mask, rgb);
        for ((a, b), &m) in scene.gaussians.iter().zip(&out.gaussians).zip(&mask) {
            prop_assert_eq!(a.position.map(f32::to_bits), b.position.map(f32::to_bits));
            prop_assert_eq!(a.scale.map(f32::to_bits), b.scale.map(f32::to_bits));
            prop_assert_eq!(a.rotation.map(f32::to_bits), b.rotation.map(f32::to_bits));
            prop_assert_eq!(a.opacity.to_bits(), b.opacity.to_bits());
            prop_assert_eq!(a.obj_feature.map(f32::to_bits), b.obj_feature.map(f32::to_bits));
            prop_assert_eq!(a.label, b.label);
            if m {
                prop_assert!(b.sh[1..].iter().flatten().all(|&v| v == 0.0));
            } else {
                prop_assert_eq!(a, b);
            }
        }
    }
}
