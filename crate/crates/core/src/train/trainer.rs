use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::adam::{adam_step, AdamConfig, AdamState};
use super::classifier::{softmax, LinearClassifier, NUM_CLASSES};
use crate::error::{Error, Result};
use crate::mask::LabelMap;
use crate::raster::{BlendWeights, ViewRaster};
use crate::scene::{Camera, Scene, FEATURE_DIM};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub lr_features: f64,
    pub lr_linear: f64,
    pub iterations: u64,
    /// Weight of the segmentation loss. Geometry is frozen, so the photometric
    /// term has no trainable inputs and this only scales the objective.
    pub gamma_obj: f64,
    pub adam: AdamConfig,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lr_features: 0.005,
            lr_linear: 0.0005,
            iterations: 30_000,
            gamma_obj: 1.0,
            adam: AdamConfig::default(),
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr_features > 0.0 && self.lr_linear > 0.0) {
            return Err(Error::Config("learning rates must be positive".into()));
        }
        if self.iterations == 0 {
            return Err(Error::Config("iterations must be at least 1".into()));
        }
        if !self.gamma_obj.is_finite() {
            return Err(Error::Config("gamma_obj must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub scene: Scene,
    pub classifier: LinearClassifier,
    /// Segmentation loss of the sampled view at every iteration.
    pub loss_history: Vec<f64>,
}

/// Stepwise trainer over object features and the linear classifier.
///
/// Blend weights of every training view are computed once up front: geometry
/// and opacity never change, so αᵢ and Tᵢ are constants of the run.
pub struct Trainer {
    cfg: TrainConfig,
    views: Vec<BlendWeights>,
    masks: Vec<LabelMap>,
    features: Vec<[f64; FEATURE_DIM]>,
    classifier: LinearClassifier,
    feature_state: AdamState,
    weight_state: AdamState,
    bias_state: AdamState,
    rng: ChaCha8Rng,
    history: Vec<f64>,
}

/// Loss and gradients of one view.
struct ViewPass {
    loss: f64,
    grad_features: Vec<[f64; FEATURE_DIM]>,
    grad_weights: Vec<f64>,
    grad_bias: Vec<f64>,
}

impl Trainer {
    pub fn new(
        scene: &Scene,
        classifier: LinearClassifier,
        cameras: &[Camera],
        masks: &[LabelMap],
        cfg: TrainConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        if cameras.is_empty() {
            return Err(Error::Config("training needs at least one camera".into()));
        }
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
        if !classifier.is_finite() {
            return Err(Error::Numeric("classifier"));
        }
        let views = cameras
            .iter()
            .map(|cam| ViewRaster::new(scene, cam).blend_weights())
            .collect();
        let n = scene.len();
        Ok(Trainer {
            cfg,
            views,
            masks: masks.to_vec(),
            features: scene.features_f64(),
            classifier,
            feature_state: AdamState::new(n * FEATURE_DIM),
            weight_state: AdamState::new(NUM_CLASSES * FEATURE_DIM),
            bias_state: AdamState::new(NUM_CLASSES),
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            history: Vec::new(),
        })
    }

    pub fn features(&self) -> &[[f64; FEATURE_DIM]] {
        &self.features
    }

    pub fn classifier(&self) -> &LinearClassifier {
        &self.classifier
    }

    pub fn history(&self) -> &[f64] {
        &self.history
    }

    /// Segmentation loss of view `v` under the current parameters.
    pub fn view_loss(&self, v: usize) -> f64 {
        self.pass(v, false).loss
    }

    fn pass(&self, v: usize, with_grad: bool) -> ViewPass {
        let weights = &self.views[v];
        let target = &self.masks[v].labels;
        let rendered = weights.render_features(&self.features);
        let n = rendered.len();
        let scale = self.cfg.gamma_obj / n.max(1) as f64;

        let mut loss = 0.0;
        let mut grad_image = vec![[0.0; FEATURE_DIM]; if with_grad { n } else { 0 }];
        let mut grad_weights = vec![0.0; if with_grad { NUM_CLASSES * FEATURE_DIM } else { 0 }];
        let mut grad_bias = vec![0.0; if with_grad { NUM_CLASSES } else { 0 }];
        let mut z = [0.0; NUM_CLASSES];
        for (p, f) in rendered.iter().enumerate() {
            let y = target[p] as usize;
            self.classifier.logits_into(f, &mut z);
            let z_y = z[y];
            let log_norm = softmax(&mut z);
            loss += log_norm - z_y;
            if !with_grad {
                continue;
            }
            // z now holds probabilities; dZ = γ (P − onehot) / N
            z[y] -= 1.0;
            let df = &mut grad_image[p];
            for k in 0..NUM_CLASSES {
                let dz = z[k] * scale;
                if dz == 0.0 {
                    continue;
                }
                grad_bias[k] += dz;
                let row = &self.classifier.weights[k * FEATURE_DIM..(k + 1) * FEATURE_DIM];
                let grow = &mut grad_weights[k * FEATURE_DIM..(k + 1) * FEATURE_DIM];
                for d in 0..FEATURE_DIM {
                    grow[d] += dz * f[d];
                    df[d] += dz * row[d];
                }
            }
        }
        let grad_features = if with_grad {
            weights.backward(&grad_image)
        } else {
            Vec::new()
        };
        ViewPass {
            loss: loss / n.max(1) as f64,
            grad_features,
            grad_weights,
            grad_bias,
        }
    }

    /// One iteration on a uniformly sampled view. Returns that view's loss.
    pub fn step(&mut self) -> f64 {
        let v = self.rng.gen_range(0..self.views.len());
        let pass = self.pass(v, true);

        let flat: &mut [f64] = self.features.as_flattened_mut();
        adam_step(
            &mut self.feature_state,
            flat,
            pass.grad_features.as_flattened(),
            self.cfg.lr_features,
            &self.cfg.adam,
        );
        adam_step(
            &mut self.weight_state,
            &mut self.classifier.weights,
            &pass.grad_weights,
            self.cfg.lr_linear,
            &self.cfg.adam,
        );
        adam_step(
            &mut self.bias_state,
            &mut self.classifier.bias,
            &pass.grad_bias,
            self.cfg.lr_linear,
            &self.cfg.adam,
        );
        self.history.push(pass.loss);
        pass.loss
    }

    /// Writes the trained features into a copy of `scene`.
    pub fn finish(self, scene: &Scene) -> TrainOutput {
        let mut scene = scene.clone();
        scene.set_features(&self.features);
        TrainOutput {
            scene,
            classifier: self.classifier,
            loss_history: self.history,
        }
    }
}

/// Runs `cfg.iterations` training steps.
pub fn train(
    scene: &Scene,
    classifier: LinearClassifier,
    cameras: &[Camera],
    masks: &[LabelMap],
    cfg: TrainConfig,
) -> Result<TrainOutput> {
    let mut trainer = Trainer::new(scene, classifier, cameras, masks, cfg)?;
    for _ in 0..cfg.iterations {
        trainer.step();
    }
    Ok(trainer.finish(scene))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_camera_list_is_config_error() {
        let res = Trainer::new(
            &Scene::new(0),
            LinearClassifier::zeros(),
            &[],
            &[],
            TrainConfig::default(),
        );
        assert!(matches!(res, Err(Error::Config(_))));
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = TrainConfig {
            iterations: 0,
            ..TrainConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = TrainConfig {
            lr_linear: 0.0,
            ..TrainConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
