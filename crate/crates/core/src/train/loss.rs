use super::classifier::{ClassProbabilities, NUM_CLASSES};
use crate::error::{Error, Result};
use crate::mask::LabelMap;

#[derive(Debug, Clone, PartialEq)]
pub struct CrossEntropy {
    pub loss: f64,
    /// ∂loss/∂logits, `n_pixels × 256` row-major.
    pub grad_logits: Vec<f64>,
}

/// Mean negative log-likelihood of the target labels and its gradient with
/// respect to the logits, `(P − onehot(y)) / N`.
pub fn cross_entropy(probs: &ClassProbabilities, target: &LabelMap) -> Result<CrossEntropy> {
    if target.labels.len() != probs.n_pixels {
        return Err(Error::Shape(format!(
            "{} probability rows for a {}x{} target",
            probs.n_pixels, target.width, target.height
        )));
    }
    Ok(cross_entropy_unchecked(
        probs,
        target.labels.iter().map(|&l| l as usize),
    ))
}

/// [`cross_entropy`] over raw integer targets, which must lie in `[0, 255]`.
pub fn cross_entropy_ids(probs: &ClassProbabilities, target: &[i64]) -> Result<CrossEntropy> {
    if target.len() != probs.n_pixels {
        return Err(Error::Shape(format!(
            "{} probability rows for {} targets",
            probs.n_pixels,
            target.len()
        )));
    }
    if let Some(&bad) = target.iter().find(|&&t| !(0..NUM_CLASSES as i64).contains(&t)) {
        return Err(Error::Label(bad));
    }
    Ok(cross_entropy_unchecked(probs, target.iter().map(|&t| t as usize)))
}

fn cross_entropy_unchecked(probs: &ClassProbabilities, target: impl Iterator<Item = usize>) -> CrossEntropy {
    let n = probs.n_pixels;
    let inv_n = 1.0 / n.max(1) as f64;
    let mut loss = 0.0;
    let mut grad_logits: Vec<f64> = probs.data.iter().map(|p| p * inv_n).collect();
    for (p, y) in target.enumerate() {
        loss -= probs.pixel(p)[y].max(f64::MIN_POSITIVE).ln();
        grad_logits[p * NUM_CLASSES + y] -= inv_n;
    }
    CrossEntropy {
        loss: loss * inv_n,
        grad_logits,
    }
}

/// `l_rgb + γ·l_obj`.
pub fn total_loss(l_rgb: f64, l_obj: f64, gamma_obj: f64) -> f64 {
    l_rgb + gamma_obj * l_obj
}
