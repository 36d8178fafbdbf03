//! Shared fixtures and independent oracles for the integration tests.
//!
//! The oracles deliberately avoid the crate's projection, tiling and blending
//! code: geometry goes through nalgebra and every pixel walks every Gaussian
//! in one global depth order.

#![allow(dead_code)]

use nalgebra::{Matrix2, Matrix3, Quaternion, UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use splatseg_core::mask::LabelMap;
use splatseg_core::scene::{Camera, Gaussian, Scene, FEATURE_DIM};

pub const IDENTITY: [[f64; 4]; 4] = [
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
];

pub fn front_camera(width: u32, height: u32) -> Camera {
    Camera::new(
        "front",
        width,
        height,
        [60.0, 60.0, width as f64 / 2.0, height as f64 / 2.0],
        IDENTITY,
    )
    .unwrap()
}

/// Cameras on a small arc around the z axis, looking at `(0, 0, 4)`.
pub fn arc_cameras(n: usize, width: u32, height: u32) -> Vec<Camera> {
    (0..n)
        .map(|i| {
            let a = -0.4 + 0.8 * i as f64 / (n.max(2) - 1) as f64;
            let eye = [4.0 * a.sin(), 0.3 * (i as f64 - 1.0), 4.0 - 4.0 * a.cos()];
            Camera::look_at(
                format!("arc{i}"),
                width,
                height,
                1.0,
                eye,
                [0.0, 0.0, 4.0],
                [0.0, -1.0, 0.0],
            )
            .unwrap()
        })
        .collect()
}

/// Random Gaussians in front of the identity camera, plus a few behind it.
pub fn random_scene(seed: u64, n: usize, sh_degree: u8, labels: u8) -> Scene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs = (sh_degree as usize + 1).pow(2);
    let gaussians = (0..n)
        .map(|_| {
            let z = if rng.gen_bool(0.05) {
                rng.gen_range(-1.0..0.0)
            } else {
                rng.gen_range(2.0..7.0)
            };
            let mut g = Gaussian {
                position: [rng.gen_range(-1.2..1.2), rng.gen_range(-1.2..1.2), z],
                scale: std::array::from_fn(|_| rng.gen_range(0.01f32..0.25).ln()),
                rotation: std::array::from_fn(|_| rng.gen_range(-1.0..1.0)),
                opacity: rng.gen_range(-3.0..5.0),
                label: rng.gen_range(0..labels.max(1)),
                ..Default::default()
            };
            g.normalize_rotation();
            for c in g.sh.iter_mut().take(coeffs) {
                *c = std::array::from_fn(|_| rng.gen_range(-1.5..1.5));
            }
            g.obj_feature = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            g
        })
        .collect();
    Scene { gaussians, sh_degree }
}

pub fn random_label_map(seed: u64, width: usize, height: usize, labels: u8) -> LabelMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels = (0..width * height).map(|_| rng.gen_range(0..labels)).collect();
    LabelMap::new(width, height, labels).unwrap()
}

/// A Gaussian projected by the oracle.
#[derive(Debug, Clone)]
pub struct OracleSplat {
    pub index: usize,
    pub depth: f64,
    pub mean: [f64; 2],
    pub inv_cov: Matrix2<f64>,
    pub opacity: f64,
    pub color: [f64; 3],
}

fn camera_parts(cam: &Camera) -> (Matrix3<f64>, Vector3<f64>) {
    let m = &cam.world_to_camera;
    let r = Matrix3::from_fn(|i, j| m[i][j]);
    let t = Vector3::new(m[0][3], m[1][3], m[2][3]);
    (r, t)
}

/// Real spherical harmonics up to degree 3 in the reference splatting sign
/// convention, written out from the associated Legendre functions.
pub fn sh_basis_oracle(dir: [f64; 3]) -> [f64; 16] {
    use std::f64::consts::PI;
    let [x, y, z] = dir;
    let ct = z.clamp(-1.0, 1.0);
    let st = (1.0 - ct * ct).max(0.0).sqrt();
    let phi = y.atan2(x);
    let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
    let legendre = |l: u32, m: u32| -> f64 {
        // P_l^m without the Condon-Shortley phase
        match (l, m) {
            (0, 0) => 1.0,
            (1, 0) => ct,
            (1, 1) => st,
            (2, 0) => 0.5 * (3.0 * ct * ct - 1.0),
            (2, 1) => 3.0 * ct * st,
            (2, 2) => 3.0 * st * st,
            (3, 0) => 0.5 * (5.0 * ct * ct * ct - 3.0 * ct),
            (3, 1) => 1.5 * (5.0 * ct * ct - 1.0) * st,
            (3, 2) => 15.0 * ct * st * st,
            (3, 3) => 15.0 * st * st * st,
            _ => unreachable!(),
        }
    };
    let mut out = [0.0; 16];
    let mut idx = 0;
    for l in 0..=3u32 {
        for m in -(l as i32)..=(l as i32) {
            let am = m.unsigned_abs();
            let k = ((2 * l + 1) as f64 / (4.0 * PI) * fact(l - am) / fact(l + am)).sqrt();
            let y = if m == 0 {
                k * legendre(l, 0)
            } else if m > 0 {
                2f64.sqrt() * k * (am as f64 * phi).cos() * legendre(l, am)
            } else {
                2f64.sqrt() * k * (am as f64 * phi).sin() * legendre(l, am)
            };
            // the splatting convention flips the sign of every odd-order term
            out[idx] = if am % 2 == 1 { -y } else { y };
            idx += 1;
        }
    }
    out
}

pub fn oracle_color(g: &Gaussian, degree: u8, dir: [f64; 3]) -> [f64; 3] {
    let b = sh_basis_oracle(dir);
    let n = (degree as usize + 1).pow(2);
    let mut rgb = [0.5; 3];
    for k in 0..n {
        for c in 0..3 {
            rgb[c] += b[k] * g.sh[k][c] as f64;
        }
    }
    rgb.map(|v| v.clamp(0.0, 1.0))
}

/// Projects every Gaussian in front of the near plane and sorts them
/// globally by `(depth, index)`.
pub fn oracle_splats(scene: &Scene, cam: &Camera) -> Vec<OracleSplat> {
    let (r, t) = camera_parts(cam);
    let eye = -r.transpose() * t;
    let mut out: Vec<OracleSplat> = scene
        .gaussians
        .iter()
        .enumerate()
        .filter_map(|(index, g)| {
            let p = Vector3::from(g.position.map(f64::from));
            let pc = r * p + t;
            if pc.z <= 1e-4 {
                return None;
            }
            let q = g.rotation.map(f64::from);
            let rot = UnitQuaternion::from_quaternion(Quaternion::new(q[0], q[1], q[2], q[3]))
                .to_rotation_matrix()
                .into_inner();
            let s = Matrix3::from_diagonal(&Vector3::from(g.scale.map(|v| (v as f64).exp())));
            let m = rot * s;
            let sigma = m * m.transpose();
            let j = nalgebra::Matrix2x3::new(
                cam.fx / pc.z,
                0.0,
                -cam.fx * pc.x / (pc.z * pc.z),
                0.0,
                cam.fy / pc.z,
                -cam.fy * pc.y / (pc.z * pc.z),
            );
            let cov = j * r * sigma * r.transpose() * j.transpose() + Matrix2::identity() * 0.3;
            let inv_cov = cov.try_inverse()?;
            let dir = (p - eye).normalize();
            Some(OracleSplat {
                index,
                depth: pc.z,
                mean: [cam.fx * pc.x / pc.z + cam.cx, cam.fy * pc.y / pc.z + cam.cy],
                inv_cov,
                opacity: 1.0 / (1.0 + (-(g.opacity as f64)).exp()),
                color: oracle_color(g, scene.sh_degree, [dir.x, dir.y, dir.z]),
            })
        })
        .collect();
    out.sort_by(|a, b| a.depth.total_cmp(&b.depth).then(a.index.cmp(&b.index)));
    out
}

/// `(gaussian index, αᵢTᵢ)` in blend order at pixel `(x, y)`, and the
/// accumulated opacity.
pub fn oracle_pixel(splats: &[OracleSplat], x: u32, y: u32) -> (Vec<(usize, f64)>, f64) {
    let mut t = 1.0;
    let mut acc = 0.0;
    let mut hits = Vec::new();
    for s in splats {
        let d = nalgebra::Vector2::new(x as f64 - s.mean[0], y as f64 - s.mean[1]);
        let mahalanobis = (d.transpose() * s.inv_cov * d)[(0, 0)];
        // outside the 3σ ellipse
        if mahalanobis > 9.0 {
            continue;
        }
        let alpha = (s.opacity * (-0.5 * mahalanobis).exp()).min(0.99);
        if alpha < 1.0 / 255.0 {
            continue;
        }
        if t * (1.0 - alpha) < 1e-4 {
            break;
        }
        hits.push((s.index, alpha * t));
        acc += alpha * t;
        t *= 1.0 - alpha;
    }
    (hits, acc)
}

pub struct OracleFrame {
    pub color: Vec<[f64; 3]>,
    pub feature: Vec<[f64; FEATURE_DIM]>,
    pub alpha: Vec<f64>,
}

pub fn oracle_render(scene: &Scene, cam: &Camera) -> OracleFrame {
    let splats = oracle_splats(scene, cam);
    let mut frame = OracleFrame {
        color: Vec::new(),
        feature: Vec::new(),
        alpha: Vec::new(),
    };
    for y in 0..cam.height {
        for x in 0..cam.width {
            let (hits, acc) = oracle_pixel(&splats, x, y);
            let mut c = [0.0; 3];
            let mut f = [0.0; FEATURE_DIM];
            for &(i, w) in &hits {
                let color = splats.iter().find(|s| s.index == i).unwrap().color;
                for k in 0..3 {
                    c[k] += w * color[k];
                }
                for k in 0..FEATURE_DIM {
                    f[k] += w * scene.gaussians[i].obj_feature[k] as f64;
                }
            }
            frame.color.push(c);
            frame.feature.push(f);
            frame.alpha.push(acc);
        }
    }
    frame
}

/// Dense per-Gaussian label mass `A[i][l]` by walking every pixel of every view.
pub fn oracle_contributions(scene: &Scene, cameras: &[Camera], masks: &[LabelMap]) -> Vec<[f64; 256]> {
    let mut a = vec![[0.0; 256]; scene.len()];
    for (cam, mask) in cameras.iter().zip(masks) {
        let splats = oracle_splats(scene, cam);
        for y in 0..cam.height {
            for x in 0..cam.width {
                let l = mask.get(x as usize, y as usize) as usize;
                for (i, w) in oracle_pixel(&splats, x, y).0 {
                    a[i][l] += w;
                }
            }
        }
    }
    a
}

/// First index of the maximum.
pub fn first_argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i] > v[best] {
            best = i;
        }
    }
    best
}

/// Runs `f` on a dedicated single-thread pool.
pub fn single_threaded<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(f)
}

/// Connected components by flood fill: per-pixel component id, areas, and
/// the set of components adjacent to each one.
pub fn oracle_components(
    map: &LabelMap,
    eight: bool,
) -> (Vec<usize>, Vec<usize>, Vec<std::collections::BTreeSet<usize>>) {
    let (w, h) = (map.width as i64, map.height as i64);
    let steps: &[(i64, i64)] = if eight {
        &[
            (-1, -1),
            (0, -1),
            (1, -1),
            (-1, 0),
            (1, 0),
            (-1, 1),
            (0, 1),
            (1, 1),
        ]
    } else {
        &[(0, -1), (-1, 0), (1, 0), (0, 1)]
    };
    let mut id = vec![usize::MAX; map.labels.len()];
    let mut areas = Vec::new();
    for start in 0..map.labels.len() {
        if id[start] != usize::MAX {
            continue;
        }
        let c = areas.len();
        let label = map.labels[start];
        let mut stack = vec![start];
        id[start] = c;
        let mut area = 0;
        while let Some(p) = stack.pop() {
            area += 1;
            let (x, y) = (p as i64 % w, p as i64 / w);
            for &(dx, dy) in steps {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w || ny >= h {
                    continue;
                }
                let q = (ny * w + nx) as usize;
                if id[q] == usize::MAX && map.labels[q] == label {
                    id[q] = c;
                    stack.push(q);
                }
            }
        }
        areas.push(area);
    }
    let mut adjacent = vec![std::collections::BTreeSet::new(); areas.len()];
    for p in 0..map.labels.len() {
        let (x, y) = (p as i64 % w, p as i64 / w);
        for &(dx, dy) in steps {
            let (nx, ny) = (x + dx, y + dy);
            if nx < 0 || ny < 0 || nx >= w || ny >= h {
                continue;
            }
            let q = (ny * w + nx) as usize;
            if id[q] != id[p] {
                adjacent[id[p]].insert(id[q]);
            }
        }
    }
    (id, areas, adjacent)
}

/// Piecewise-constant label map: background 0 with `objects` rectangles and
/// discs of labels 1..=objects, then speckle of random labels.
pub fn speckled_map(seed: u64, width: usize, height: usize, objects: u8, speckles: usize) -> LabelMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut map = LabelMap::filled(width, height, 0);
    for label in 1..=objects {
        let cx = rng.gen_range(0..width) as i64;
        let cy = rng.gen_range(0..height) as i64;
        let r = rng.gen_range(10..(width.min(height) / 3).max(11)) as i64;
        let disc = rng.gen_bool(0.5);
        for y in 0..height as i64 {
            for x in 0..width as i64 {
                let (dx, dy) = (x - cx, y - cy);
                let inside = if disc {
                    dx * dx + dy * dy <= r * r
                } else {
                    dx.abs() <= r && dy.abs() <= r * 2 / 3
                };
                if inside {
                    map.set(x as usize, y as usize, label);
                }
            }
        }
    }
    for _ in 0..speckles {
        let label = rng.gen_range(0..=objects + 3);
        let (x0, y0) = (rng.gen_range(0..width), rng.gen_range(0..height));
        let (bw, bh) = (rng.gen_range(1..6), rng.gen_range(1..6));
        for y in y0..(y0 + bh).min(height) {
            for x in x0..(x0 + bw).min(width) {
                map.set(x, y, label);
            }
        }
    }
    map
}
