use rayon::prelude::*;

use super::tiles::{build_tile_lists, depth_order, TileBins};
use super::{project_gaussian, Splat2D, ALPHA_MAX, ALPHA_MIN, MAX_POWER, T_MIN};
use crate::scene::{Camera, Scene, FEATURE_DIM};

/// Projected, depth-sorted and binned splats of one scene seen from one camera.
///
/// Every per-pixel quantity in the crate (color, features, labels,
/// contributions, gradients, picking) goes through [`ViewRaster::blend_pixel`],
/// so they all share the exact same α and T values.
#[derive(Debug, Clone)]
pub struct ViewRaster {
    pub width: u32,
    pub height: u32,
    pub n_gaussians: usize,
    splats: Vec<Splat2D>,
    bins: TileBins,
}

impl ViewRaster {
    pub fn new(scene: &Scene, cam: &Camera) -> Self {
        let mut splats: Vec<Splat2D> = scene
            .gaussians
            .par_iter()
            .enumerate()
            .filter_map(|(i, g)| project_gaussian(cam, g, i as u32))
            .collect();
        splats.sort_by(depth_order);
        let bins = build_tile_lists(&splats, cam.width, cam.height);
        ViewRaster {
            width: cam.width,
            height: cam.height,
            n_gaussians: scene.len(),
            splats,
            bins,
        }
    }

    /// Visible splats, front to back.
    pub fn splats(&self) -> &[Splat2D] {
        &self.splats
    }

    pub fn bins(&self) -> &TileBins {
        &self.bins
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    /// Front-to-back α-blend at pixel `(x, y)`, sampled at the integer pixel
    /// coordinate. Calls `visit(splat, αᵢTᵢ)` for every contributing splat and
    /// returns the accumulated opacity `Σ αᵢTᵢ`.
    #[inline]
    pub fn blend_pixel(&self, x: u32, y: u32, mut visit: impl FnMut(&Splat2D, f64)) -> f64 {
        let (px, py) = (x as f64, y as f64);
        let mut transmittance = 1.0;
        let mut acc = 0.0;
        for &s in self.bins.tile_of(x, y) {
            let splat = &self.splats[s as usize];
            let power = splat.power(px, py);
            if power > MAX_POWER {
                continue;
            }
            let alpha = (splat.opacity * (-power).exp()).min(ALPHA_MAX);
            if alpha < ALPHA_MIN {
                continue;
            }
            let next = transmittance * (1.0 - alpha);
            if next < T_MIN {
                break;
            }
            let weight = alpha * transmittance;
            visit(splat, weight);
            acc += weight;
            transmittance = next;
        }
        acc
    }

    /// Records every pixel's blend weights for replay.
    pub fn blend_weights(&self) -> BlendWeights {
        let rows: Vec<(Vec<u32>, Vec<(u32, f64)>, Vec<f64>)> = (0..self.height)
            .into_par_iter()
            .map(|y| {
                let mut counts = Vec::with_capacity(self.width as usize);
                let mut entries = Vec::new();
                let mut alpha = Vec::with_capacity(self.width as usize);
                for x in 0..self.width {
                    let before = entries.len();
                    let acc = self.blend_pixel(x, y, |s, w| entries.push((s.gaussian_index, w)));
                    counts.push((entries.len() - before) as u32);
                    alpha.push(acc);
                }
                (counts, entries, alpha)
            })
            .collect();

        let mut offsets = Vec::with_capacity(self.pixel_count() + 1);
        offsets.push(0usize);
        let mut entries = Vec::new();
        let mut alpha = Vec::with_capacity(self.pixel_count());
        for (counts, row_entries, row_alpha) in rows {
            for c in counts {
                let last = *offsets.last().unwrap();
                offsets.push(last + c as usize);
            }
            entries.extend(row_entries);
            alpha.extend(row_alpha);
        }
        BlendWeights {
            width: self.width,
            height: self.height,
            n_gaussians: self.n_gaussians,
            offsets,
            entries,
            alpha,
        }
    }
}

/// Per-pixel `(gaussian index, αᵢTᵢ)` lists in blend order, stored CSR-style.
///
/// With geometry frozen these weights do not depend on the features, which
/// makes feature rendering and its backward pass sparse linear maps.
#[derive(Debug, Clone)]
pub struct BlendWeights {
    pub width: u32,
    pub height: u32,
    pub n_gaussians: usize,
    offsets: Vec<usize>,
    entries: Vec<(u32, f64)>,
    alpha: Vec<f64>,
}

impl BlendWeights {
    pub fn pixel(&self, p: usize) -> &[(u32, f64)] {
        &self.entries[self.offsets[p]..self.offsets[p + 1]]
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn pixel_count(&self) -> usize {
        self.alpha.len()
    }

    pub fn render_features(&self, features: &[[f64; FEATURE_DIM]]) -> Vec<[f64; FEATURE_DIM]> {
        assert_eq!(features.len(), self.n_gaussians);
        (0..self.pixel_count())
            .map(|p| {
                let mut out = [0.0; FEATURE_DIM];
                for &(i, w) in self.pixel(p) {
                    let f = &features[i as usize];
                    for k in 0..FEATURE_DIM {
                        out[k] += w * f[k];
                    }
                }
                out
            })
            .collect()
    }

    /// Adjoint of [`render_features`](Self::render_features): per-Gaussian
    /// `Σ_u αᵢ(u)Tᵢ(u)·grad(u)`, summed in raster order.
    pub fn backward(&self, grad: &[[f64; FEATURE_DIM]]) -> Vec<[f64; FEATURE_DIM]> {
        assert_eq!(grad.len(), self.pixel_count());
        let mut out = vec![[0.0; FEATURE_DIM]; self.n_gaussians];
        for (p, g) in grad.iter().enumerate() {
            for &(i, w) in self.pixel(p) {
                let o = &mut out[i as usize];
                for k in 0..FEATURE_DIM {
                    o[k] += w * g[k];
                }
            }
        }
        out
    }
}
