//! Interactive editing session: one scene, its classifier, the current
//! segmentation and a replayable history of mutations.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::edit::{self, EditOp};
use crate::error::{Error, Result};
use crate::mask::LabelMap;
use crate::metrics::Image;
use crate::raster::{accumulate_contributions, render, Channels, ViewRaster, ALPHA_MIN};
use crate::reassign::{
    compute_priors, reassign_labels, PointQuery, SegmentationMatrix, DEFAULT_GAMMA_P, DEFAULT_K,
};
use crate::scene::{scene_to_bytes, Camera, Scene};
use crate::train::LinearClassifier;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub gamma_p: f64,
    pub k: usize,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            gamma_p: DEFAULT_GAMMA_P,
            k: DEFAULT_K,
        }
    }
}

/// A recorded mutation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "lowercase")]
pub enum Action {
    Reassign { gamma_p: f64 },
    Edit(EditOp),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RenderMode {
    Rgb,
    Label,
    /// Accumulated opacity as grayscale.
    Heat,
}

impl std::str::FromStr for RenderMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rgb" => Ok(RenderMode::Rgb),
            "label" => Ok(RenderMode::Label),
            "heat" => Ok(RenderMode::Heat),
            other => Err(Error::Config(format!("unknown render mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pick {
    pub point: [f64; 3],
    pub gaussian: usize,
    pub object_id: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionInfo {
    pub version: u64,
    pub gaussians: usize,
    pub sh_degree: u8,
    pub segmented: bool,
    pub can_reassign: bool,
    /// Gaussian count per object id.
    pub objects: BTreeMap<u8, usize>,
    pub history: Vec<Action>,
    pub config: SessionConfig,
}

/// Single-scene editing state.
///
/// The current scene is always the result of replaying `history` on the
/// loaded scene. The segmentation lives in the Gaussians' `label` field, so
/// exports carry it.
#[derive(Debug, Clone)]
pub struct Session {
    base: Scene,
    base_segmented: bool,
    classifier: LinearClassifier,
    views: Option<(Vec<Camera>, Vec<LabelMap>)>,
    config: SessionConfig,
    scene: Scene,
    segmented: bool,
    history: Vec<Action>,
    version: u64,
}

impl Session {
    /// A scene that already carries a nonzero label counts as segmented.
    pub fn new(scene: Scene, classifier: LinearClassifier, config: SessionConfig) -> Self {
        let segmented = scene.gaussians.iter().any(|g| g.label != 0);
        Session {
            base: scene.clone(),
            base_segmented: segmented,
            classifier,
            views: None,
            config,
            scene,
            segmented,
            history: Vec::new(),
            version: 0,
        }
    }

    /// Cameras and masks used by [`reassign`](Self::reassign).
    pub fn with_views(mut self, cameras: Vec<Camera>, masks: Vec<LabelMap>) -> Result<Self> {
        if cameras.len() != masks.len() {
            return Err(Error::Shape(format!(
                "{} cameras but {} masks",
                cameras.len(),
                masks.len()
            )));
        }
        self.views = Some((cameras, masks));
        Ok(self)
    }

    pub fn scene(&self) -> &Scene {
        &self.scene
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn history(&self) -> &[Action] {
        &self.history
    }

    pub fn config(&self) -> SessionConfig {
        self.config
    }

    pub fn set_k(&mut self, k: usize) -> Result<()> {
        if k == 0 {
            return Err(Error::Config("K must be at least 1".into()));
        }
        self.config.k = k;
        Ok(())
    }

    pub fn segmentation(&self) -> Option<SegmentationMatrix> {
        self.segmented
            .then(|| SegmentationMatrix::from_labels(self.scene.labels()))
    }

    pub fn info(&self) -> SessionInfo {
        let mut objects = BTreeMap::new();
        for g in &self.scene.gaussians {
            *objects.entry(g.label).or_insert(0) += 1;
        }
        SessionInfo {
            version: self.version,
            gaussians: self.scene.len(),
            sh_degree: self.scene.sh_degree,
            segmented: self.segmented,
            can_reassign: self.views.is_some(),
            objects,
            history: self.history.clone(),
            config: self.config,
        }
    }

    fn apply(&mut self, action: Action) -> Result<()> {
        match action {
            Action::Reassign { gamma_p } => {
                if !gamma_p.is_finite() {
                    return Err(Error::Config("gamma_p must be finite".into()));
                }
                let (cameras, masks) = self.views.as_ref().ok_or(Error::NoViews)?;
                let contribs = accumulate_contributions(&self.scene, cameras, masks)?;
                let priors = compute_priors(&self.scene, &self.classifier);
                let seg = reassign_labels(&contribs, &priors, &priors.labels(), gamma_p)?;
                for (g, &l) in self.scene.gaussians.iter_mut().zip(&seg.labels) {
                    g.label = l;
                }
                self.segmented = true;
            }
            Action::Edit(op) => {
                let seg = self.segmentation().ok_or(Error::NotSegmented)?;
                let (scene, _) = edit::apply(&self.scene, &seg, &op)?;
                self.scene = scene;
            }
        }
        Ok(())
    }

    fn record(&mut self, action: Action) -> Result<u64> {
        self.apply(action)?;
        self.history.push(action);
        self.version += 1;
        Ok(self.version)
    }

    /// Prior-guided reassignment of the current scene. Returns the new version.
    pub fn reassign(&mut self, gamma_p: f64) -> Result<u64> {
        let v = self.record(Action::Reassign { gamma_p })?;
        self.config.gamma_p = gamma_p;
        Ok(v)
    }

    /// Applies an object edit. Returns the new version.
    pub fn edit(&mut self, op: EditOp) -> Result<u64> {
        op.validate()?;
        self.record(Action::Edit(op))
    }

    /// Drops the last action and rebuilds the scene from the loaded one.
    pub fn undo(&mut self) -> Result<u64> {
        self.history.pop().ok_or(Error::NothingToUndo)?;
        self.scene = self.base.clone();
        self.segmented = self.base_segmented;
        for action in self.history.clone() {
            self.apply(action)?;
        }
        self.version += 1;
        Ok(self.version)
    }

    /// Lifts a pixel to the center of the Gaussian with the largest blend
    /// weight there, then queries the object at that point.
    pub fn pick(&self, cam: &Camera, pixel: [u32; 2]) -> Result<Pick> {
        pick_from_pixel(
            &self.scene,
            self.segmentation().as_ref(),
            cam,
            pixel,
            self.config.k,
        )
    }

    pub fn render_frame(&self, cam: &Camera, mode: RenderMode) -> Image {
        render_frame(&self.scene, cam, mode)
    }

    /// The current scene as PLY bytes.
    pub fn export(&self) -> Vec<u8> {
        scene_to_bytes(&self.scene)
    }
}

pub fn pick_from_pixel(
    scene: &Scene,
    seg: Option<&SegmentationMatrix>,
    cam: &Camera,
    pixel: [u32; 2],
    k: usize,
) -> Result<Pick> {
    let [x, y] = pixel;
    if x >= cam.width || y >= cam.height {
        return Err(Error::PixelOutOfBounds {
            x,
            y,
            width: cam.width,
            height: cam.height,
        });
    }
    let seg = seg.ok_or(Error::NotSegmented)?;
    let view = ViewRaster::new(scene, cam);
    let mut best: Option<(u32, f64)> = None;
    let alpha = view.blend_pixel(x, y, |s, w| {
        if best.is_none_or(|(_, bw)| w > bw) {
            best = Some((s.gaussian_index, w));
        }
    });
    let (gaussian, _) = match best {
        Some(b) if alpha >= ALPHA_MIN => b,
        _ => return Err(Error::NoHit { x, y }),
    };
    let point = scene.gaussians[gaussian as usize].position_f64();
    let object_id = PointQuery::new(scene).query(seg, point, k)?;
    Ok(Pick {
        point,
        gaussian: gaussian as usize,
        object_id,
    })
}

/// Display color of an object id. Label 0 is black.
pub fn label_color(label: u8) -> [f64; 3] {
    if label == 0 {
        return [0.0; 3];
    }
    // golden-angle hue steps keep neighboring ids apart
    let h = (label as f64 * 0.618_033_988_749_895).fract() * 6.0;
    let f = h.fract();
    let (s, v) = (0.75, 0.95);
    let (p, q, t) = (v * (1.0 - s), v * (1.0 - s * f), v * (1.0 - s * (1.0 - f)));
    match h as u32 {
        0 => [v, t, p],
        1 => [q, v, p],
        2 => [p, v, t],
        3 => [p, q, v],
        4 => [t, p, v],
        _ => [v, p, q],
    }
}

pub fn render_frame(scene: &Scene, cam: &Camera, mode: RenderMode) -> Image {
    let (w, h) = (cam.width as usize, cam.height as usize);
    let pixels = match mode {
        RenderMode::Rgb => render(scene, cam, Channels::COLOR)
            .frame
            .color
            .into_iter()
            .map(|c| c.map(|v| v.clamp(0.0, 1.0)))
            .collect(),
        RenderMode::Label => render(scene, cam, Channels::LABEL)
            .labels
            .expect("label channel requested")
            .labels
            .into_iter()
            .map(label_color)
            .collect(),
        RenderMode::Heat => render(
            scene,
            cam,
            Channels {
                color: false,
                feature: false,
                label: false,
            },
        )
        .frame
        .alpha
        .into_iter()
        .map(|a| [a; 3])
        .collect(),
    };
    Image {
        width: w,
        height: h,
        pixels,
    }
}
