//! Seeded synthetic scenes: well-separated colored Gaussian clusters seen
//! from an orbit of cameras, with rendered label maps as ground truth.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::mask::LabelMap;
use crate::raster::{render, Channels};
use crate::scene::{inverse_logistic, Camera, Gaussian, Scene};

const CLUSTER_COLORS: [[f64; 3]; 6] = [
    [0.9, 0.2, 0.2],
    [0.2, 0.8, 0.3],
    [0.2, 0.3, 0.9],
    [0.9, 0.8, 0.2],
    [0.8, 0.3, 0.8],
    [0.2, 0.8, 0.8],
];

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub clusters: usize,
    pub per_cluster: usize,
    /// Distance of each cluster center from the origin.
    pub spacing: f64,
    /// Standard deviation of splat centers around their cluster center.
    pub spread: f64,
    /// Typical per-axis splat standard deviation, jittered by ±30%.
    pub splat_scale: f64,
    pub opacity: f64,
    pub views: usize,
    pub image_size: u32,
    pub orbit_radius: f64,
    pub elevation: f64,
    pub fov_y: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            clusters: 3,
            per_cluster: 100,
            spacing: 1.3,
            spread: 0.22,
            splat_scale: 0.09,
            opacity: 0.85,
            views: 8,
            image_size: 48,
            orbit_radius: 5.0,
            elevation: 0.55,
            fov_y: 0.9,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticScene {
    /// Cluster `k` carries label `k + 1` in [`Gaussian::label`]; features are zero.
    pub scene: Scene,
    pub cameras: Vec<Camera>,
    /// A view between the training cameras, at a different elevation.
    pub holdout: Camera,
}

impl SyntheticScene {
    pub fn generate(cfg: &SyntheticConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut gaussians = Vec::with_capacity(cfg.clusters * cfg.per_cluster);
        for k in 0..cfg.clusters {
            let angle = std::f64::consts::TAU * k as f64 / cfg.clusters as f64;
            let center = [cfg.spacing * angle.cos(), 0.0, cfg.spacing * angle.sin()];
            for _ in 0..cfg.per_cluster {
                let offset: [f64; 3] =
                    std::array::from_fn(|_| rng.sample::<f64, _>(StandardNormal) * cfg.spread);
                let q: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
                let stretch: [f64; 3] = std::array::from_fn(|_| cfg.splat_scale * rng.gen_range(0.7..1.3));
                let mut g = Gaussian {
                    position: std::array::from_fn(|a| (center[a] + offset[a]) as f32),
                    scale: stretch.map(|s| s.ln() as f32),
                    rotation: q.map(|v| v as f32),
                    opacity: inverse_logistic(cfg.opacity) as f32,
                    label: (k + 1) as u8,
                    ..Default::default()
                };
                g.normalize_rotation();
                let base = CLUSTER_COLORS[k % CLUSTER_COLORS.len()];
                g.set_base_color(base.map(|c| (c + rng.gen_range(-0.05..0.05)).clamp(0.0, 1.0)));
                gaussians.push(g);
            }
        }
        let scene = Scene {
            gaussians,
            sh_degree: 0,
        };
        let cameras = orbit_cameras(cfg, cfg.views, 0.0, cfg.elevation, "view");
        let half_step = std::f64::consts::PI / cfg.views.max(1) as f64;
        let holdout = orbit_cameras(cfg, 1, half_step, cfg.elevation * 0.6, "holdout").remove(0);
        SyntheticScene {
            scene,
            cameras,
            holdout,
        }
    }

    /// The ground-truth label map of every training view.
    pub fn label_maps(&self) -> Vec<LabelMap> {
        self.cameras.iter().map(|c| self.label_map(c)).collect()
    }

    pub fn label_map(&self, cam: &Camera) -> LabelMap {
        render(&self.scene, cam, Channels::LABEL)
            .labels
            .expect("label channel requested")
    }

    /// The scene with every label reset to 0, as handed to training.
    pub fn unlabeled_scene(&self) -> Scene {
        let mut scene = self.scene.clone();
        for g in &mut scene.gaussians {
            g.label = 0;
        }
        scene
    }
}

/// `n` cameras evenly spaced in azimuth, all looking at the origin.
pub fn orbit_cameras(
    cfg: &SyntheticConfig,
    n: usize,
    azimuth_offset: f64,
    elevation: f64,
    prefix: &str,
) -> Vec<Camera> {
    (0..n)
        .map(|i| {
            let az = azimuth_offset + std::f64::consts::TAU * i as f64 / n as f64;
            let eye = [
                cfg.orbit_radius * elevation.cos() * az.cos(),
                cfg.orbit_radius * elevation.sin(),
                cfg.orbit_radius * elevation.cos() * az.sin(),
            ];
            Camera::look_at(
                format!("{prefix}_{i:02}"),
                cfg.image_size,
                cfg.image_size,
                cfg.fov_y,
                eye,
                [0.0; 3],
                [0.0, 1.0, 0.0],
            )
            .expect("orbit camera is valid")
        })
        .collect()
}
