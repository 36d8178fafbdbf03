//! Real spherical-harmonics color evaluation (degree 0..3).

use super::Gaussian;

pub const SH_C0: f64 = 0.28209479177387814;
const SH_C1: f64 = 0.4886025119029199;
const SH_C2: [f64; 5] = [
    1.0925484305920792,
    -1.0925484305920792,
    0.31539156525252005,
    -1.0925484305920792,
    0.5462742152960396,
];
const SH_C3: [f64; 7] = [
    -0.5900435899266435,
    2.890611442640554,
    -0.4570457994644658,
    0.3731763325901154,
    -0.4570457994644658,
    1.445305721320277,
    -0.5900435899266435,
];

/// Number of coefficients per channel for an SH degree.
pub fn coeff_count(degree: u8) -> usize {
    let d = degree.min(3) as usize + 1;
    d * d
}

/// Real SH basis values `Y_0 .. Y_{(d+1)²-1}` for a unit direction.
pub fn basis(degree: u8, dir: [f64; 3]) -> [f64; 16] {
    let [x, y, z] = dir;
    let mut b = [0.0; 16];
    b[0] = SH_C0;
    if degree >= 1 {
        b[1] = -SH_C1 * y;
        b[2] = SH_C1 * z;
        b[3] = -SH_C1 * x;
    }
    if degree >= 2 {
        let (xx, yy, zz) = (x * x, y * y, z * z);
        b[4] = SH_C2[0] * x * y;
        b[5] = SH_C2[1] * y * z;
        b[6] = SH_C2[2] * (2.0 * zz - xx - yy);
        b[7] = SH_C2[3] * x * z;
        b[8] = SH_C2[4] * (xx - yy);
        if degree >= 3 {
            b[9] = SH_C3[0] * y * (3.0 * xx - yy);
            b[10] = SH_C3[1] * x * y * z;
            b[11] = SH_C3[2] * y * (4.0 * zz - xx - yy);
            b[12] = SH_C3[3] * z * (2.0 * zz - 3.0 * xx - 3.0 * yy);
            b[13] = SH_C3[4] * x * (4.0 * zz - xx - yy);
            b[14] = SH_C3[5] * z * (xx - yy);
            b[15] = SH_C3[6] * x * (xx - 3.0 * yy);
        }
    }
    b
}

/// RGB color of `g` seen along `view_dir` (unit vector from camera to
/// Gaussian), with the +0.5 offset and clamped to `[0, 1]`.
pub fn eval_sh_color(g: &Gaussian, degree: u8, view_dir: [f64; 3]) -> [f64; 3] {
    let n = coeff_count(degree);
    let b = basis(degree, view_dir);
    let mut rgb = [0.5; 3];
    for (k, coeff) in g.sh.iter().enumerate().take(n) {
        for c in 0..3 {
            rgb[c] += b[k] * coeff[c] as f64;
        }
    }
    rgb.map(|v| v.clamp(0.0, 1.0))
}
