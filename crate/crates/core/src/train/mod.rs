//! Object-feature training: a 16→256 linear classifier over rendered feature
//! images, softmax cross-entropy against mask labels, and Adam.

mod adam;
mod checkpoint;
mod classifier;
mod loss;
mod trainer;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, Checkpoint};
pub use classifier::{class_probabilities, softmax, ClassProbabilities, LinearClassifier, NUM_CLASSES};
pub use loss::{cross_entropy, cross_entropy_ids, total_loss, CrossEntropy};
pub use trainer::{train, TrainConfig, TrainOutput, Trainer};

pub(crate) use classifier::argmax;
