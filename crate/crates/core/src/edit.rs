//! Object-level scene edits driven by a per-Gaussian binary mask.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reassign::{object_mask, SegmentationMatrix};
use crate::scene::Scene;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EditKind {
    Remove,
    Extract,
    Recolor,
}

impl std::str::FromStr for EditKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "remove" => Ok(EditKind::Remove),
            "extract" => Ok(EditKind::Extract),
            "recolor" => Ok(EditKind::Recolor),
            other => Err(Error::Config(format!("unknown edit kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EditOp {
    pub kind: EditKind,
    pub target: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color: Option<[f64; 3]>,
}

impl EditOp {
    pub fn remove(target: u8) -> Self {
        EditOp {
            kind: EditKind::Remove,
            target,
            color: None,
        }
    }

    pub fn extract(target: u8) -> Self {
        EditOp {
            kind: EditKind::Extract,
            target,
            color: None,
        }
    }

    pub fn recolor(target: u8, color: [f64; 3]) -> Self {
        EditOp {
            kind: EditKind::Recolor,
            target,
            color: Some(color),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match (self.kind, self.color) {
            (EditKind::Recolor, None) => Err(Error::Config("recolor needs a color".into())),
            (EditKind::Recolor, Some(c)) if !c.iter().all(|v| (0.0..=1.0).contains(v)) => {
                Err(Error::Config(format!("color {c:?} is outside [0, 1]")))
            }
            (EditKind::Remove | EditKind::Extract, Some(_)) => {
                Err(Error::Config(format!("{:?} does not take a color", self.kind)))
            }
            _ => Ok(()),
        }
    }
}

fn filter(scene: &Scene, mask: &[bool], keep: bool) -> Scene {
    assert_eq!(mask.len(), scene.len(), "mask length must match the scene");
    Scene {
        gaussians: scene
            .gaussians
            .iter()
            .zip(mask)
            .filter(|&(_, &m)| m == keep)
            .map(|(g, _)| g.clone())
            .collect(),
        sh_degree: scene.sh_degree,
    }
}

/// Keeps the Gaussians outside the mask, in order. Voids are left unfilled.
///
/// # Panics
///
/// If `mask.len() != scene.len()`.
pub fn remove_object(scene: &Scene, mask: &[bool]) -> Scene {
    filter(scene, mask, false)
}

/// Keeps the Gaussians inside the mask, in order.
///
/// # Panics
///
/// If `mask.len() != scene.len()`.
pub fn extract_object(scene: &Scene, mask: &[bool]) -> Scene {
    filter(scene, mask, true)
}

/// Sets the base color of every masked Gaussian to `color` and zeroes its
/// higher-order SH. Everything else is copied untouched.
///
/// # Panics
///
/// If `mask.len() != scene.len()`.
pub fn recolor_object(scene: &Scene, mask: &[bool], color: [f64; 3]) -> Scene {
    assert_eq!(mask.len(), scene.len(), "mask length must match the scene");
    let mut out = scene.clone();
    for (g, _) in out.gaussians.iter_mut().zip(mask).filter(|(_, &m)| m) {
        g.set_base_color(color);
    }
    out
}

/// Applies `op` to the object `op.target` of `seg`. Returns the edited scene
/// and the segmentation of its Gaussians.
pub fn apply(scene: &Scene, seg: &SegmentationMatrix, op: &EditOp) -> Result<(Scene, SegmentationMatrix)> {
    op.validate()?;
    if seg.n_gaussians() != scene.len() {
        return Err(Error::Shape(format!(
            "segmentation covers {} Gaussians, scene has {}",
            seg.n_gaussians(),
            scene.len()
        )));
    }
    let mask = object_mask(seg, op.target);
    let keep_labels = |keep: bool| {
        SegmentationMatrix::from_labels(
            seg.labels
                .iter()
                .zip(&mask)
                .filter(|&(_, &m)| m == keep)
                .map(|(&l, _)| l)
                .collect(),
        )
    };
    Ok(match op.kind {
        EditKind::Remove => (remove_object(scene, &mask), keep_labels(false)),
        EditKind::Extract => (extract_object(scene, &mask), keep_labels(true)),
        EditKind::Recolor => (
            recolor_object(scene, &mask, op.color.expect("validated")),
            seg.clone(),
        ),
    })
}
