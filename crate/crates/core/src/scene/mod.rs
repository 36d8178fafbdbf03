//! Gaussians, scenes and cameras.

mod camera;
pub mod ply;
pub mod sh;

pub use camera::{load_cameras, parse_cameras, save_cameras, BehindCamera, Camera, CameraRecord, Projected};
pub use ply::{load_scene, read_scene, save_scene, scene_to_bytes, write_scene};
pub use sh::{eval_sh_color, SH_C0};

/// Dimension of the per-Gaussian object feature.
pub const FEATURE_DIM: usize = 16;
/// Maximum number of spherical-harmonics coefficients per channel (degree 3).
/// Largest accepted deviation of a quaternion's norm from 1.
pub const UNIT_TOLERANCE: f64 = 1e-6;
pub const MAX_SH_COEFFS: usize = 16;

pub type Feature = [f32; FEATURE_DIM];

/// One 3D Gaussian splat.
///
/// `opacity` is stored pre-logistic and `scale` as log-scale, matching
/// reference 3D-GS exports. `rotation` is `(w, x, y, z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gaussian {
    pub position: [f32; 3],
    pub scale: [f32; 3],
    pub rotation: [f32; 4],
    pub opacity: f32,
    /// RGB SH coefficients, coefficient-major. Entries beyond the scene's
    /// degree are kept at zero.
    pub sh: [[f32; 3]; MAX_SH_COEFFS],
    pub obj_feature: Feature,
    pub label: u8,
}

impl Default for Gaussian {
    fn default() -> Self {
        Gaussian {
            position: [0.0; 3],
            scale: [0.0; 3],
            rotation: [1.0, 0.0, 0.0, 0.0],
            opacity: 0.0,
            sh: [[0.0; 3]; MAX_SH_COEFFS],
            obj_feature: [0.0; FEATURE_DIM],
            label: 0,
        }
    }
}

impl Gaussian {
    /// Opacity mapped through the logistic function.
    pub fn alpha(&self) -> f64 {
        logistic(self.opacity as f64)
    }

    pub fn position_f64(&self) -> [f64; 3] {
        self.position.map(f64::from)
    }

    /// Renormalizes the rotation quaternion. Quaternions already within 1e-6
    /// of unit length are left bit-identical; a zero quaternion becomes identity.
    pub fn normalize_rotation(&mut self) {
        let q = self.rotation.map(f64::from);
        let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (n - 1.0).abs() <= UNIT_TOLERANCE {
            return;
        }
        if n > 0.0 && n.is_finite() {
            self.rotation = q.map(|v| (v / n) as f32);
        } else {
            self.rotation = [1.0, 0.0, 0.0, 0.0];
        }
    }

    /// Sets the degree-0 color so that the rendered base color is `rgb`.
    pub fn set_base_color(&mut self, rgb: [f64; 3]) {
        for c in 0..3 {
            self.sh[0][c] = ((rgb[c] - 0.5) / sh::SH_C0) as f32;
        }
        for coeff in self.sh.iter_mut().skip(1) {
            *coeff = [0.0; 3];
        }
    }

    /// World-space 3×3 covariance `R·diag(exp(scale))²·Rᵀ`.
    pub fn covariance(&self) -> [[f64; 3]; 3] {
        let r = quat_to_matrix(self.rotation.map(f64::from));
        let s = self.scale.map(|v| (v as f64).exp());
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = r[i][j] * s[j];
            }
        }
        let mut cov = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                cov[i][j] = (0..3).map(|k| m[i][k] * m[j][k]).sum();
            }
        }
        cov
    }

    /// Normalized trivariate Gaussian density at `x`.
    ///
    /// The renderer uses the unnormalized exponential; this is only for
    /// density queries.
    pub fn density(&self, x: [f64; 3]) -> f64 {
        let cov = self.covariance();
        let det = det3(&cov);
        if det <= 0.0 {
            return 0.0;
        }
        let inv = inverse3(&cov, det);
        let mu = self.position_f64();
        let d = [x[0] - mu[0], x[1] - mu[1], x[2] - mu[2]];
        let mut q = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                q += d[i] * inv[i][j] * d[j];
            }
        }
        let norm = (2.0 * std::f64::consts::PI).powf(1.5) * det.sqrt();
        (-0.5 * q).exp() / norm
    }
}

/// An ordered collection of Gaussians. Indices are identities.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Scene {
    pub gaussians: Vec<Gaussian>,
    pub sh_degree: u8,
}

impl Scene {
    pub fn new(sh_degree: u8) -> Self {
        Scene {
            gaussians: Vec::new(),
            sh_degree: sh_degree.min(3),
        }
    }

    pub fn len(&self) -> usize {
        self.gaussians.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gaussians.is_empty()
    }

    pub fn labels(&self) -> Vec<u8> {
        self.gaussians.iter().map(|g| g.label).collect()
    }

    /// Object features widened to `f64`.
    pub fn features_f64(&self) -> Vec<[f64; FEATURE_DIM]> {
        self.gaussians
            .iter()
            .map(|g| g.obj_feature.map(f64::from))
            .collect()
    }

    pub fn set_features(&mut self, features: &[[f64; FEATURE_DIM]]) {
        assert_eq!(features.len(), self.gaussians.len());
        for (g, f) in self.gaussians.iter_mut().zip(features) {
            g.obj_feature = f.map(|v| v as f32);
        }
    }
}

pub fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub fn inverse_logistic(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Rotation matrix of a `(w, x, y, z)` quaternion, normalized first.
pub fn quat_to_matrix(q: [f64; 4]) -> [[f64; 3]; 3] {
    let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
    let [w, x, y, z] = if n > 0.0 {
        q.map(|v| v / n)
    } else {
        [1.0, 0.0, 0.0, 0.0]
    };
    [
        [
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
        ],
        [
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
        ],
        [
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        ],
    ]
}

pub(crate) fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn inverse3(m: &[[f64; 3]; 3], det: f64) -> [[f64; 3]; 3] {
    let mut inv = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
            let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
            inv[i][j] = (m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]) / det;
        }
    }
    inv
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isotropic_covariance_ignores_rotation() {
        let mut g = Gaussian {
            scale: [0.1f32.ln(); 3],
            ..Default::default()
        };
        let base = g.covariance();
        g.rotation = [0.3, -0.5, 0.7, 0.2];
        let rotated = g.covariance();
        for i in 0..3 {
            for j in 0..3 {
                assert!((base[i][j] - rotated[i][j]).abs() < 1e-12);
            }
        }
        assert!((base[0][0] - 0.01).abs() < 1e-8);
    }

    #[test]
    fn density_integrates_to_peak_formula() {
        let g = Gaussian {
            scale: [0.0; 3],
            ..Default::default()
        };
        let peak = g.density([0.0; 3]);
        assert!((peak - (2.0 * std::f64::consts::PI).powf(-1.5)).abs() < 1e-12);
    }

    #[test]
    fn inverse3_roundtrip() {
        let m = [[2.0, 0.5, 0.1], [0.5, 1.0, 0.2], [0.1, 0.2, 3.0]];
        let inv = inverse3(&m, det3(&m));
        for i in 0..3 {
            for j in 0..3 {
                let v: f64 = (0..3).map(|k| m[i][k] * inv[k][j]).sum();
                assert!((v - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_quaternion_normalizes_to_identity() {
        let mut g = Gaussian {
            rotation: [0.0; 4],
            ..Default::default()
        };
        g.normalize_rotation();
        assert_eq!(g.rotation, [1.0, 0.0, 0.0, 0.0]);
    }
}
