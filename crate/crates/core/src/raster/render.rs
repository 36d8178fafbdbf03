use rayon::prelude::*;

use super::ViewRaster;
use crate::mask::LabelMap;
use crate::scene::{eval_sh_color, Camera, Scene, FEATURE_DIM};

/// Which channels [`render`] fills.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Channels {
    pub color: bool,
    pub feature: bool,
    pub label: bool,
}

impl Channels {
    pub const ALL: Channels = Channels {
        color: true,
        feature: true,
        label: true,
    };
    pub const COLOR: Channels = Channels {
        color: true,
        feature: false,
        label: false,
    };
    pub const FEATURE: Channels = Channels {
        color: false,
        feature: true,
        label: false,
    };
    pub const LABEL: Channels = Channels {
        color: false,
        feature: false,
        label: true,
    };
}

/// Rendered images in raster order. Channels that were not requested are empty.
#[derive(Debug, Clone, PartialEq)]
pub struct Framebuffer {
    pub width: u32,
    pub height: u32,
    pub color: Vec<[f64; 3]>,
    pub feature: Vec<[f64; FEATURE_DIM]>,
    /// Accumulated opacity `Σ αᵢTᵢ`; always filled.
    pub alpha: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderOutput {
    pub frame: Framebuffer,
    pub labels: Option<LabelMap>,
}

/// Pixels whose accumulated opacity is below this render as label 0.
pub const LABEL_COVERAGE_MIN: f64 = 0.5;

/// View-dependent colors of every Gaussian for `cam`.
pub fn gaussian_colors(scene: &Scene, cam: &Camera) -> Vec<[f64; 3]> {
    let eye = cam.center();
    scene
        .gaussians
        .iter()
        .map(|g| {
            let p = g.position_f64();
            let d = [p[0] - eye[0], p[1] - eye[1], p[2] - eye[2]];
            let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            let dir = if n > 0.0 {
                d.map(|v| v / n)
            } else {
                [0.0, 0.0, 1.0]
            };
            eval_sh_color(g, scene.sh_degree, dir)
        })
        .collect()
}

/// Argmax of per-label weights, ties to the smaller label.
pub(crate) fn argmax_label(weights: &[(u8, f64)]) -> Option<u8> {
    let mut best: Option<(u8, f64)> = None;
    for &(l, w) in weights {
        best = match best {
            Some((bl, bw)) if bw > w || (bw == w && bl < l) => Some((bl, bw)),
            _ => Some((l, w)),
        };
    }
    best.map(|(l, _)| l)
}

pub(crate) fn add_weight(acc: &mut Vec<(u8, f64)>, label: u8, w: f64) {
    match acc.iter_mut().find(|(l, _)| *l == label) {
        Some((_, v)) => *v += w,
        None => acc.push((label, w)),
    }
}

/// Renders `scene` from `cam`.
///
/// color = Σ cᵢαᵢTᵢ, feature = Σ fᵢαᵢTᵢ. The label channel takes, per pixel,
/// the label with the largest summed αᵢTᵢ (ties to the smaller label) and
/// emits 0 where accumulated opacity is below 0.5.
pub fn render(scene: &Scene, cam: &Camera, channels: Channels) -> RenderOutput {
    let view = ViewRaster::new(scene, cam);
    let colors = channels.color.then(|| gaussian_colors(scene, cam));
    let features = channels.feature.then(|| scene.features_f64());
    render_view(
        &view,
        scene,
        colors.as_deref(),
        features.as_deref(),
        channels.label,
    )
}

pub(crate) fn render_view(
    view: &ViewRaster,
    scene: &Scene,
    colors: Option<&[[f64; 3]]>,
    features: Option<&[[f64; FEATURE_DIM]]>,
    labels: bool,
) -> RenderOutput {
    struct Row {
        color: Vec<[f64; 3]>,
        feature: Vec<[f64; FEATURE_DIM]>,
        alpha: Vec<f64>,
        labels: Vec<u8>,
    }
    let (w, h) = (view.width, view.height);
    let rows: Vec<Row> = (0..h)
        .into_par_iter()
        .map(|y| {
            let mut row = Row {
                color: Vec::new(),
                feature: Vec::new(),
                alpha: Vec::with_capacity(w as usize),
                labels: Vec::new(),
            };
            let mut label_acc = Vec::new();
            for x in 0..w {
                let mut c = [0.0; 3];
                let mut f = [0.0; FEATURE_DIM];
                label_acc.clear();
                let a = view.blend_pixel(x, y, |s, wt| {
                    let i = s.gaussian_index as usize;
                    if let Some(colors) = colors {
                        for k in 0..3 {
                            c[k] += colors[i][k] * wt;
                        }
                    }
                    if let Some(features) = features {
                        for k in 0..FEATURE_DIM {
                            f[k] += features[i][k] * wt;
                        }
                    }
                    if labels {
                        add_weight(&mut label_acc, scene.gaussians[i].label, wt);
                    }
                });
                row.alpha.push(a);
                if colors.is_some() {
                    row.color.push(c);
                }
                if features.is_some() {
                    row.feature.push(f);
                }
                if labels {
                    let l = if a < LABEL_COVERAGE_MIN {
                        0
                    } else {
                        argmax_label(&label_acc).unwrap_or(0)
                    };
                    row.labels.push(l);
                }
            }
            row
        })
        .collect();

    let n = w as usize * h as usize;
    let mut frame = Framebuffer {
        width: w,
        height: h,
        color: Vec::with_capacity(if colors.is_some() { n } else { 0 }),
        feature: Vec::with_capacity(if features.is_some() { n } else { 0 }),
        alpha: Vec::with_capacity(n),
    };
    let mut label_px = Vec::with_capacity(if labels { n } else { 0 });
    for row in rows {
        frame.color.extend(row.color);
        frame.feature.extend(row.feature);
        frame.alpha.extend(row.alpha);
        label_px.extend(row.labels);
    }
    let labels = labels.then_some(LabelMap {
        width: w as usize,
        height: h as usize,
        labels: label_px,
    });
    RenderOutput { frame, labels }
}
