use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scene::FEATURE_DIM;

pub const NUM_CLASSES: usize = 256;

/// Affine map from a 16-dim feature to 256 class logits.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearClassifier {
    /// Row-major `NUM_CLASSES × FEATURE_DIM`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl LinearClassifier {
    pub fn zeros() -> Self {
        LinearClassifier {
            weights: vec![0.0; NUM_CLASSES * FEATURE_DIM],
            bias: vec![0.0; NUM_CLASSES],
        }
    }

    /// Weights uniform in `±1/√16`, zero bias.
    pub fn seeded(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let half_width = 1.0 / (FEATURE_DIM as f64).sqrt();
        let weights = (0..NUM_CLASSES * FEATURE_DIM)
            .map(|_| rng.gen_range(-half_width..half_width))
            .collect();
        LinearClassifier {
            weights,
            bias: vec![0.0; NUM_CLASSES],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().chain(&self.bias).all(|v| v.is_finite())
    }

    #[inline]
    pub fn logits_into(&self, feature: &[f64; FEATURE_DIM], out: &mut [f64; NUM_CLASSES]) {
        for (k, o) in out.iter_mut().enumerate() {
            let row = &self.weights[k * FEATURE_DIM..(k + 1) * FEATURE_DIM];
            let mut z = self.bias[k];
            for d in 0..FEATURE_DIM {
                z += row[d] * feature[d];
            }
            *o = z;
        }
    }

    pub fn logits(&self, feature: &[f64; FEATURE_DIM]) -> [f64; NUM_CLASSES] {
        let mut out = [0.0; NUM_CLASSES];
        self.logits_into(feature, &mut out);
        out
    }

    /// Softmax class probabilities for a single feature vector.
    pub fn probabilities(&self, feature: &[f64; FEATURE_DIM]) -> [f64; NUM_CLASSES] {
        let mut z = self.logits(feature);
        softmax(&mut z);
        z
    }
}

/// In-place max-shifted softmax. Returns `ln Σ exp(z - max) + max`.
pub fn softmax(z: &mut [f64]) -> f64 {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in z.iter_mut() {
        *v /= sum;
    }
    max + sum.ln()
}

/// Per-pixel class probabilities, `n_pixels × 256` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassProbabilities {
    pub n_pixels: usize,
    pub data: Vec<f64>,
}

impl ClassProbabilities {
    pub fn pixel(&self, p: usize) -> &[f64] {
        &self.data[p * NUM_CLASSES..(p + 1) * NUM_CLASSES]
    }

    /// Most probable class per pixel, ties to the smaller class.
    pub fn argmax(&self) -> Vec<u8> {
        (0..self.n_pixels).map(|p| argmax(self.pixel(p)) as u8).collect()
    }
}

pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Applies the classifier and softmax to every pixel of a feature image.
pub fn class_probabilities(
    clf: &LinearClassifier,
    features: &[[f64; FEATURE_DIM]],
) -> Result<ClassProbabilities> {
    if features.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("feature image"));
    }
    let mut data = vec![0.0; features.len() * NUM_CLASSES];
    let mut z = [0.0; NUM_CLASSES];
    for (p, f) in features.iter().enumerate() {
        clf.logits_into(f, &mut z);
        softmax(&mut z);
        data[p * NUM_CLASSES..(p + 1) * NUM_CLASSES].copy_from_slice(&z);
    }
    Ok(ClassProbabilities {
        n_pixels: features.len(),
        data,
    })
}
