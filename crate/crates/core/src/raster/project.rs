use super::{COV_DILATION, SIGMA_EXTENT};
use crate::scene::{Camera, Gaussian};

/// A Gaussian projected onto the image plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Splat2D {
    pub mean2d: [f64; 2],
    /// Symmetric 2×2 image-space covariance (pixel²), dilation included.
    pub cov2d: [[f64; 2]; 2],
    /// Inverse of `cov2d` as `(a, b, c)` for `[[a, b], [b, c]]`.
    pub conic: [f64; 3],
    pub depth: f64,
    pub gaussian_index: u32,
    /// Logistic opacity.
    pub opacity: f64,
    /// Half-widths of the axis-aligned box around the 3σ ellipse.
    pub extent: [f64; 2],
}

impl Splat2D {
    /// Half the squared Mahalanobis distance from the splat center to `(x, y)`.
    #[inline]
    pub fn power(&self, x: f64, y: f64) -> f64 {
        let dx = x - self.mean2d[0];
        let dy = y - self.mean2d[1];
        let [a, b, c] = self.conic;
        0.5 * (a * dx * dx + 2.0 * b * dx * dy + c * dy * dy)
    }

    /// Inclusive pixel range `(x0, y0, x1, y1)` of the 3σ box clipped to the
    /// image, or `None` when it misses the image.
    pub fn pixel_bounds(&self, width: u32, height: u32) -> Option<(u32, u32, u32, u32)> {
        const EPS: f64 = 1e-6;
        let lo_x = (self.mean2d[0] - self.extent[0] - EPS).ceil().max(0.0);
        let hi_x = (self.mean2d[0] + self.extent[0] + EPS)
            .floor()
            .min(width as f64 - 1.0);
        let lo_y = (self.mean2d[1] - self.extent[1] - EPS).ceil().max(0.0);
        let hi_y = (self.mean2d[1] + self.extent[1] + EPS)
            .floor()
            .min(height as f64 - 1.0);
        if !(lo_x <= hi_x && lo_y <= hi_y) {
            return None;
        }
        Some((lo_x as u32, lo_y as u32, hi_x as u32, hi_y as u32))
    }
}

/// Projects `g` with the local affine (EWA) approximation of the perspective
/// map. Returns `None` when the Gaussian is behind the near plane, its 2D
/// covariance is degenerate, or its 3σ box misses the image.
pub fn project_gaussian(cam: &Camera, g: &Gaussian, index: u32) -> Option<Splat2D> {
    let proj = cam.project(g.position_f64()).ok()?;
    let [x, y, z] = cam.to_camera_space(g.position_f64());

    let sigma = g.covariance();
    let w = cam.rotation();
    // Σ_cam = W Σ Wᵀ
    let mut ws = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            ws[i][j] = (0..3).map(|k| w[i][k] * sigma[k][j]).sum();
        }
    }
    let mut sigma_cam = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            sigma_cam[i][j] = (0..3).map(|k| ws[i][k] * w[j][k]).sum();
        }
    }
    let jac = [
        [cam.fx / z, 0.0, -cam.fx * x / (z * z)],
        [0.0, cam.fy / z, -cam.fy * y / (z * z)],
    ];
    let mut js = [[0.0; 3]; 2];
    for i in 0..2 {
        for j in 0..3 {
            js[i][j] = (0..3).map(|k| jac[i][k] * sigma_cam[k][j]).sum();
        }
    }
    let mut cov = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            cov[i][j] = (0..3).map(|k| js[i][k] * jac[j][k]).sum();
        }
    }
    let b = 0.5 * (cov[0][1] + cov[1][0]);
    cov[0][1] = b;
    cov[1][0] = b;
    cov[0][0] += COV_DILATION;
    cov[1][1] += COV_DILATION;

    let det = cov[0][0] * cov[1][1] - b * b;
    if !(det > 0.0) || !det.is_finite() {
        return None;
    }
    let conic = [cov[1][1] / det, -b / det, cov[0][0] / det];
    let splat = Splat2D {
        mean2d: proj.pixel,
        cov2d: cov,
        conic,
        depth: proj.depth,
        gaussian_index: index,
        opacity: g.alpha(),
        extent: [SIGMA_EXTENT * cov[0][0].sqrt(), SIGMA_EXTENT * cov[1][1].sqrt()],
    };
    splat.pixel_bounds(cam.width, cam.height)?;
    Some(splat)
}

#[cfg(test)]
mod tests {
    use super::*;

    const IDENTITY: [[f64; 4]; 4] = [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ];

    fn cam(f: f64) -> Camera {
        Camera::new("c", 64, 64, [f, f, 32.0, 32.0], IDENTITY).unwrap()
    }

    #[test]
    fn isotropic_on_axis_closed_form() {
        let sigma = 0.02f64;
        let g = Gaussian {
            position: [0.0, 0.0, 1.0],
            scale: [(sigma as f32).ln(); 3],
            ..Default::default()
        };
        let f = 100.0;
        let s = project_gaussian(&cam(f), &g, 0).unwrap();
        // J at x=y=0 is diag(f/z, f/z) with z=1, so cov2d = (fσ)² I + 0.3 I
        let sig32 = ((sigma as f32).ln() as f64).exp();
        let expect = (f * sig32).powi(2) + 0.3;
        assert!((s.cov2d[0][0] - expect).abs() < 1e-9);
        assert!((s.cov2d[1][1] - expect).abs() < 1e-9);
        assert!(s.cov2d[0][1].abs() < 1e-12);
        assert_eq!(s.mean2d, [32.0, 32.0]);
        assert_eq!(s.depth, 1.0);
    }

    #[test]
    fn off_axis_depth_term_matches_jacobian() {
        // point at (x, 0, z) with isotropic σ: cov_xx = σ²(f²/z² + f²x²/z⁴) + 0.3
        let g = Gaussian {
            position: [0.2, 0.0, 2.0],
            scale: [0.05f32.ln(); 3],
            ..Default::default()
        };
        let s2 = (0.05f32.ln() as f64).exp().powi(2);
        let f = 80.0;
        let s = project_gaussian(&cam(f), &g, 0).unwrap();
        let (x, z) = (0.2f32 as f64, 2.0);
        let expect_xx = s2 * (f * f / (z * z) + f * f * x * x / z.powi(4)) + 0.3;
        let expect_yy = s2 * f * f / (z * z) + 0.3;
        assert!((s.cov2d[0][0] - expect_xx).abs() < 1e-9);
        assert!((s.cov2d[1][1] - expect_yy).abs() < 1e-9);
    }

    #[test]
    fn behind_camera_is_culled() {
        let g = Gaussian {
            position: [0.0, 0.0, -1.0],
            ..Default::default()
        };
        assert!(project_gaussian(&cam(50.0), &g, 0).is_none());
        let g = Gaussian {
            position: [0.0, 0.0, 0.0],
            ..Default::default()
        };
        assert!(project_gaussian(&cam(50.0), &g, 0).is_none());
    }

    #[test]
    fn off_image_is_culled() {
        let g = Gaussian {
            position: [5.0, 0.0, 1.0],
            scale: [0.01f32.ln(); 3],
            ..Default::default()
        };
        assert!(project_gaussian(&cam(50.0), &g, 0).is_none());
    }

    #[test]
    fn rotation_invariant_when_isotropic() {
        let mut g = Gaussian {
            position: [0.1, -0.1, 1.5],
            scale: [0.03f32.ln(); 3],
            ..Default::default()
        };
        let a = project_gaussian(&cam(60.0), &g, 0).unwrap();
        g.rotation = [0.5, 0.5, -0.5, 0.5];
        let b = project_gaussian(&cam(60.0), &g, 0).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((a.cov2d[i][j] - b.cov2d[i][j]).abs() < 1e-9);
            }
        }
    }
}
