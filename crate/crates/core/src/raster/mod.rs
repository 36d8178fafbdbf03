//! Tile-based forward rendering, the feature backward pass and per-Gaussian
//! contribution accumulation.
//!
//! Constants follow the reference 3D-GS rasterizer: 16×16 tiles, α clamped to
//! 0.99, contributions below 1/255 skipped, blending stops once transmittance
//! would drop below 1e-4, and 0.3 px² is added to every 2D covariance.
//! Pixels are sampled at their integer coordinates.

mod backward;
mod contrib;
mod project;
mod render;
mod tiles;
mod view;

pub use backward::backward_features;
pub use contrib::{accumulate_contributions, ContributionMatrix};
pub use project::{project_gaussian, Splat2D};
pub use render::{gaussian_colors, render, Channels, Framebuffer, RenderOutput, LABEL_COVERAGE_MIN};
pub use tiles::{build_tile_lists, TileBins};
pub use view::{BlendWeights, ViewRaster};

pub const TILE_SIZE: u32 = 16;
pub const ALPHA_MAX: f64 = 0.99;
pub const ALPHA_MIN: f64 = 1.0 / 255.0;
pub const T_MIN: f64 = 1e-4;
pub const COV_DILATION: f64 = 0.3;
/// Splat support radius in standard deviations.
pub const SIGMA_EXTENT: f64 = 3.0;
/// Largest `½ dᵀΣ⁻¹d` inside the support ellipse.
pub const MAX_POWER: f64 = 0.5 * SIGMA_EXTENT * SIGMA_EXTENT;
