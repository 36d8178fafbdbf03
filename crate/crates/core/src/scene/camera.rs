use std::fs;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};

/// Camera-space depth at or below which a point is considered behind the camera.
pub const NEAR_PLANE: f64 = 1e-4;

/// Pinhole camera. Camera space looks down +z with +y pointing down the image.
#[derive(Debug, Clone, PartialEq)]
pub struct Camera {
    pub id: String,
    pub width: u32,
    pub height: u32,
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    /// Row-major rigid transform.
    pub world_to_camera: [[f64; 4]; 4],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projected {
    pub pixel: [f64; 2],
    pub depth: f64,
}

/// Marker for points at or behind the near plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BehindCamera;

/// JSON form of a camera.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CameraRecord {
    #[serde(deserialize_with = "string_or_number")]
    pub id: String,
    pub width: u32,
    pub height: u32,
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub world_to_camera: Vec<f64>,
}

fn string_or_number<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<String, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Id {
        S(String),
        N(serde_json::Number),
    }
    Ok(match Id::deserialize(d)? {
        Id::S(s) => s,
        Id::N(n) => n.to_string(),
    })
}

impl Camera {
    pub fn new(
        id: impl Into<String>,
        width: u32,
        height: u32,
        [fx, fy, cx, cy]: [f64; 4],
        world_to_camera: [[f64; 4]; 4],
    ) -> Result<Self> {
        let cam = Camera {
            id: id.into(),
            width,
            height,
            fx,
            fy,
            cx,
            cy,
            world_to_camera,
        };
        cam.validate()?;
        Ok(cam)
    }

    /// Camera at `eye` looking at `target`, with a vertical field of view in radians.
    /// `up` is the world up direction; the image y axis points opposite to it.
    pub fn look_at(
        id: impl Into<String>,
        width: u32,
        height: u32,
        fov_y: f64,
        eye: [f64; 3],
        target: [f64; 3],
        up: [f64; 3],
    ) -> Result<Self> {
        let forward = normalize(sub(target, eye));
        let right = normalize(cross(forward, up));
        let down = cross(forward, right);
        let rows = [right, down, forward];
        let mut m = [[0.0; 4]; 4];
        for (r, axis) in rows.iter().enumerate() {
            m[r][..3].copy_from_slice(axis);
            m[r][3] = -dot(*axis, eye);
        }
        m[3][3] = 1.0;
        let f = 0.5 * height as f64 / (0.5 * fov_y).tan();
        Camera::new(
            id,
            width,
            height,
            [f, f, width as f64 / 2.0, height as f64 / 2.0],
            m,
        )
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |message: String| {
            Err(Error::Camera {
                id: self.id.clone(),
                message,
            })
        };
        if self.width == 0 || self.height == 0 {
            return fail("image size must be positive".into());
        }
        if !(self.fx > 0.0 && self.fy > 0.0) {
            return fail(format!(
                "focal lengths must be positive, got {} {}",
                self.fx, self.fy
            ));
        }
        if !(0.0..self.width as f64).contains(&self.cx) || !(0.0..self.height as f64).contains(&self.cy) {
            return fail(format!(
                "principal point ({}, {}) outside image",
                self.cx, self.cy
            ));
        }
        let r = self.rotation();
        for i in 0..3 {
            for j in 0..3 {
                let d: f64 = (0..3).map(|k| r[i][k] * r[j][k]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                if (d - want).abs() > 1e-5 {
                    return fail("rotation block is not orthonormal".into());
                }
            }
        }
        if self.world_to_camera[3] != [0.0, 0.0, 0.0, 1.0] {
            return fail("last row of world_to_camera must be 0 0 0 1".into());
        }
        Ok(())
    }

    pub fn rotation(&self) -> [[f64; 3]; 3] {
        let m = &self.world_to_camera;
        [
            [m[0][0], m[0][1], m[0][2]],
            [m[1][0], m[1][1], m[1][2]],
            [m[2][0], m[2][1], m[2][2]],
        ]
    }

    pub fn to_camera_space(&self, p: [f64; 3]) -> [f64; 3] {
        let m = &self.world_to_camera;
        let mut out = [0.0; 3];
        for (r, o) in out.iter_mut().enumerate() {
            *o = m[r][0] * p[0] + m[r][1] * p[1] + m[r][2] * p[2] + m[r][3];
        }
        out
    }

    /// Camera center in world coordinates, `-Rᵀt`.
    pub fn center(&self) -> [f64; 3] {
        let r = self.rotation();
        let t = [
            self.world_to_camera[0][3],
            self.world_to_camera[1][3],
            self.world_to_camera[2][3],
        ];
        let mut c = [0.0; 3];
        for (j, cj) in c.iter_mut().enumerate() {
            *cj = -(0..3).map(|i| r[i][j] * t[i]).sum::<f64>();
        }
        c
    }

    pub fn project(&self, p: [f64; 3]) -> std::result::Result<Projected, BehindCamera> {
        let [x, y, z] = self.to_camera_space(p);
        if z <= NEAR_PLANE {
            return Err(BehindCamera);
        }
        Ok(Projected {
            pixel: [self.fx * x / z + self.cx, self.fy * y / z + self.cy],
            depth: z,
        })
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn to_record(&self) -> CameraRecord {
        CameraRecord {
            id: self.id.clone(),
            width: self.width,
            height: self.height,
            fx: self.fx,
            fy: self.fy,
            cx: self.cx,
            cy: self.cy,
            world_to_camera: self.world_to_camera.iter().flatten().copied().collect(),
        }
    }
}

impl TryFrom<CameraRecord> for Camera {
    type Error = Error;

    fn try_from(rec: CameraRecord) -> Result<Self> {
        if rec.world_to_camera.len() != 16 {
            return Err(Error::Camera {
                id: rec.id,
                message: format!(
                    "world_to_camera needs 16 values, got {}",
                    rec.world_to_camera.len()
                ),
            });
        }
        let mut m = [[0.0; 4]; 4];
        for (i, v) in rec.world_to_camera.iter().enumerate() {
            m[i / 4][i % 4] = *v;
        }
        Camera::new(rec.id, rec.width, rec.height, [rec.fx, rec.fy, rec.cx, rec.cy], m)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum CameraFile {
    List(Vec<CameraRecord>),
    Wrapped { cameras: Vec<CameraRecord> },
}

pub fn parse_cameras(json: &str) -> Result<Vec<Camera>> {
    let records = match serde_json::from_str::<CameraFile>(json)? {
        CameraFile::List(r) | CameraFile::Wrapped { cameras: r } => r,
    };
    records.into_iter().map(Camera::try_from).collect()
}

/// Reads a camera JSON document: an array of camera records, or an object
/// with a `cameras` array.
pub fn load_cameras(path: impl AsRef<Path>) -> Result<Vec<Camera>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_cameras(&text)
}

pub fn save_cameras(cameras: &[Camera], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let records: Vec<_> = cameras.iter().map(Camera::to_record).collect();
    let text = serde_json::to_string_pretty(&records)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn normalize(a: [f64; 3]) -> [f64; 3] {
    let n = dot(a, a).sqrt();
    a.map(|v| v / n)
}
