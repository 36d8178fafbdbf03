use rayon::prelude::*;

use super::KdTree;
use crate::error::{Error, Result};
use crate::raster::ContributionMatrix;
use crate::scene::Scene;
use crate::train::{LinearClassifier, NUM_CLASSES};

/// Default weight of the learned prior in the reassignment vote.
pub const DEFAULT_GAMMA_P: f64 = 0.2;
/// Default neighbor count for point prompts.
pub const DEFAULT_K: usize = 16;

/// Per-Gaussian class probabilities from the classifier applied to each
/// Gaussian's own feature, `N × 256` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorScores {
    data: Vec<f64>,
}

impl PriorScores {
    pub fn from_rows(rows: Vec<f64>) -> Result<Self> {
        if !rows.len().is_multiple_of(NUM_CLASSES) {
            return Err(Error::Shape(format!(
                "{} prior values is not a multiple of {NUM_CLASSES}",
                rows.len()
            )));
        }
        Ok(PriorScores { data: rows })
    }

    pub fn len(&self) -> usize {
        self.data.len() / NUM_CLASSES
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * NUM_CLASSES..(i + 1) * NUM_CLASSES]
    }

    /// The Gaussian's trained label: argmax of its row, ties to the smaller label.
    pub fn label(&self, i: usize) -> u8 {
        crate::train::argmax(self.row(i)) as u8
    }

    pub fn labels(&self) -> Vec<u8> {
        (0..self.len()).map(|i| self.label(i)).collect()
    }
}

pub fn compute_priors(scene: &Scene, clf: &LinearClassifier) -> PriorScores {
    let data = scene
        .gaussians
        .par_iter()
        .flat_map_iter(|g| clf.probabilities(&g.obj_feature.map(f64::from)))
        .collect();
    PriorScores { data }
}

/// Binary 256×N object assignment, stored as one label per Gaussian.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentationMatrix {
    pub labels: Vec<u8>,
}

impl SegmentationMatrix {
    pub fn from_labels(labels: Vec<u8>) -> Self {
        SegmentationMatrix { labels }
    }

    pub fn n_gaussians(&self) -> usize {
        self.labels.len()
    }

    /// Entry `S[l, n]`.
    pub fn get(&self, label: u8, gaussian: usize) -> bool {
        self.labels[gaussian] == label
    }

    /// Column `n` as a 256-entry one-hot vector.
    pub fn column(&self, gaussian: usize) -> [bool; NUM_CLASSES] {
        let mut col = [false; NUM_CLASSES];
        col[self.labels[gaussian] as usize] = true;
        col
    }
}

/// Prior-regularized majority vote.
///
/// For Gaussian i with current label lᵢ,
/// `A'[l,i] = A[l,i] + γ·p[i,lᵢ]·1[l = lᵢ]` and the new label is
/// `argmax_l A'[l,i]` over all 256 labels, ties to the smaller label.
/// Gaussians that never contributed to any mask keep lᵢ.
pub fn reassign_labels(
    contribs: &ContributionMatrix,
    priors: &PriorScores,
    current_labels: &[u8],
    gamma_p: f64,
) -> Result<SegmentationMatrix> {
    let n = contribs.n_gaussians();
    if priors.len() != n || current_labels.len() != n {
        return Err(Error::Shape(format!(
            "contributions cover {n} Gaussians, priors {}, labels {}",
            priors.len(),
            current_labels.len()
        )));
    }
    let labels = (0..n)
        .into_par_iter()
        .map(|i| {
            let column = contribs.column(i);
            let own = current_labels[i];
            if column.is_empty() {
                return own;
            }
            let mut scores = [0.0f64; NUM_CLASSES];
            for &(l, a) in column {
                scores[l as usize] = a;
            }
            scores[own as usize] += gamma_p * priors.row(i)[own as usize];
            crate::train::argmax(&scores) as u8
        })
        .collect();
    Ok(SegmentationMatrix { labels })
}

/// `mask[i] = (label of Gaussian i == k)`.
pub fn object_mask(seg: &SegmentationMatrix, k: u8) -> Vec<bool> {
    seg.labels.iter().map(|&l| l == k).collect()
}

/// K-nearest-neighbor index over Gaussian centers for point prompts.
#[derive(Debug, Clone)]
pub struct PointQuery {
    tree: KdTree,
}

impl PointQuery {
    pub fn new(scene: &Scene) -> Self {
        PointQuery {
            tree: KdTree::new(scene.gaussians.iter().map(|g| g.position_f64()).collect()),
        }
    }

    /// Mode of the labels of the `k` Gaussians nearest to `p`, ties to the
    /// smaller label.
    pub fn query(&self, seg: &SegmentationMatrix, p: [f64; 3], k: usize) -> Result<u8> {
        if self.tree.is_empty() {
            return Err(Error::EmptyScene);
        }
        if k == 0 {
            return Err(Error::Config("K must be at least 1".into()));
        }
        let mut counts = [0usize; NUM_CLASSES];
        for (i, _) in self.tree.nearest(p, k) {
            counts[seg.labels[i as usize] as usize] += 1;
        }
        let mut best = 0;
        for l in 1..NUM_CLASSES {
            if counts[l] > counts[best] {
                best = l;
            }
        }
        Ok(best as u8)
    }
}

/// One-shot [`PointQuery::query`].
pub fn query_point(scene: &Scene, seg: &SegmentationMatrix, p: [f64; 3], k: usize) -> Result<u8> {
    PointQuery::new(scene).query(seg, p, k)
}
