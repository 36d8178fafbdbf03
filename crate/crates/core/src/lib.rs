//! Segmentation engine for 3D Gaussian splatting scenes.
//!
//! Per-Gaussian object features are trained against multiview 2D label
//! masks, labels are reassigned by prior-regularized multiview voting, and
//! objects can then be selected with a point prompt and removed, extracted
//! or recolored.

pub mod edit;
pub mod error;
pub mod mask;
pub mod metrics;
pub mod raster;
pub mod reassign;
pub mod scene;
pub mod session;
pub mod synthetic;
pub mod train;

pub use error::{Error, Result};
pub use mask::LabelMap;
pub use scene::{Camera, Gaussian, Scene};
