use super::ViewRaster;
use crate::error::{Error, Result};
use crate::mask::LabelMap;
use crate::scene::{Camera, Scene};

/// Sparse 256×N matrix of blended mass per (mask label, Gaussian).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ContributionMatrix {
    n_gaussians: usize,
    /// Per Gaussian: `(label, score)` pairs sorted by label, scores > 0.
    columns: Vec<Vec<(u8, f64)>>,
}

impl ContributionMatrix {
    pub fn new(n_gaussians: usize) -> Self {
        ContributionMatrix {
            n_gaussians,
            columns: vec![Vec::new(); n_gaussians],
        }
    }

    pub fn n_gaussians(&self) -> usize {
        self.n_gaussians
    }

    /// Adds `value` to entry `(label, gaussian)`.
    pub fn add(&mut self, label: u8, gaussian: usize, value: f64) {
        let col = &mut self.columns[gaussian];
        match col.binary_search_by_key(&label, |&(l, _)| l) {
            Ok(i) => col[i].1 += value,
            Err(i) => col.insert(i, (label, value)),
        }
    }

    pub fn get(&self, label: u8, gaussian: usize) -> f64 {
        let col = &self.columns[gaussian];
        col.binary_search_by_key(&label, |&(l, _)| l)
            .map(|i| col[i].1)
            .unwrap_or(0.0)
    }

    /// Nonzero entries of one Gaussian's column, sorted by label.
    pub fn column(&self, gaussian: usize) -> &[(u8, f64)] {
        &self.columns[gaussian]
    }

    /// Σ_l A_{l,i}: the Gaussian's total blended mass over all views.
    pub fn column_mass(&self, gaussian: usize) -> f64 {
        self.columns[gaussian].iter().map(|&(_, v)| v).sum()
    }

    pub fn nonzero_count(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }
}

/// Builds A_{l,i} = Σ_{v,u} αᵢ(u)Tᵢ(u)·1[M_v(u) = l].
///
/// Views are processed in order and pixels in raster order with the same
/// blend as [`render`](super::render).
pub fn accumulate_contributions(
    scene: &Scene,
    cameras: &[Camera],
    masks: &[LabelMap],
) -> Result<ContributionMatrix> {
    if cameras.len() != masks.len() {
        return Err(Error::Shape(format!(
            "{} cameras but {} masks",
            cameras.len(),
            masks.len()
        )));
    }
    for (cam, mask) in cameras.iter().zip(masks) {
        if mask.width != cam.width as usize || mask.height != cam.height as usize {
            return Err(Error::Shape(format!(
                "view `{}`: mask is {}x{}, camera is {}x{}",
                cam.id, mask.width, mask.height, cam.width, cam.height
            )));
        }
    }
    let mut matrix = ContributionMatrix::new(scene.len());
    for (cam, mask) in cameras.iter().zip(masks) {
        let view = ViewRaster::new(scene, cam);
        for y in 0..view.height {
            for x in 0..view.width {
                let label = mask.get(x as usize, y as usize);
                view.blend_pixel(x, y, |s, w| matrix.add(label, s.gaussian_index as usize, w));
            }
        }
    }
    Ok(matrix)
}
