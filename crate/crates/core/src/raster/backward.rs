use super::ViewRaster;
use crate::scene::{Camera, Scene, FEATURE_DIM};

/// Gradient of a scalar loss with respect to every Gaussian's object feature,
/// given the loss gradient with respect to the rendered feature image.
///
/// Feature rendering is linear in the features, so
/// `∂L/∂fᵢ = Σ_u αᵢ(u)Tᵢ(u)·grad_feature(u)`. Geometry and opacity are frozen
/// and receive no gradient. Pixels are visited in raster order, so the result
/// is bit-reproducible.
pub fn backward_features(
    scene: &Scene,
    cam: &Camera,
    grad_feature: &[[f64; FEATURE_DIM]],
) -> Vec<[f64; FEATURE_DIM]> {
    let view = ViewRaster::new(scene, cam);
    assert_eq!(grad_feature.len(), view.pixel_count(), "gradient image size");
    let mut grads = vec![[0.0; FEATURE_DIM]; scene.len()];
    for y in 0..view.height {
        for x in 0..view.width {
            let g = &grad_feature[(y * view.width + x) as usize];
            view.blend_pixel(x, y, |s, w| {
                let out = &mut grads[s.gaussian_index as usize];
                for k in 0..FEATURE_DIM {
                    out[k] += w * g[k];
                }
            });
        }
    }
    grads
}
