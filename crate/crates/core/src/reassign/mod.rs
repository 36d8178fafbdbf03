//! Prior-guided label reassignment over Gaussians and point-prompt queries.

mod kdtree;
mod vote;

pub use kdtree::KdTree;
pub use vote::{
    compute_priors, object_mask, query_point, reassign_labels, PointQuery, PriorScores, SegmentationMatrix,
    DEFAULT_GAMMA_P, DEFAULT_K,
};
