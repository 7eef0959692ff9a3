use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::GeometryError;

const ORTHONORMAL_TOL: f64 = 1e-9;

/// Row-major 2-D pixel grid, indexed `(u, v)` with `u` the column.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelGrid<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Clone> PixelGrid<T> {
    pub fn filled(width: usize, height: usize, value: T) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }
}

impl<T> PixelGrid<T> {
    pub fn from_vec(width: usize, height: usize, data: Vec<T>) -> Result<Self, GeometryError> {
        if data.len() != width * height {
            return Err(GeometryError::DimensionMismatch(format!(
                "grid data has {} entries, expected {}x{}",
                data.len(),
                width,
                height
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, u: usize, v: usize) -> &T {
        &self.data[v * self.width + u]
    }

    pub fn set(&mut self, u: usize, v: usize, value: T) {
        self.data[v * self.width + u] = value;
    }
}

/// Rigid camera-to-world transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extrinsic {
    /// Row-major rotation taking camera-frame vectors to the world frame.
    pub rotation: [[f64; 3]; 3],
    pub translation: [f64; 3],
}

impl Extrinsic {
    pub fn identity() -> Self {
        Self {
            rotation: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            translation: [0.0; 3],
        }
    }

    /// A camera at `height` metres above `(x, y)` looking straight down at the table.
    ///
    /// Image `u` grows along world +x and image `v` along world −y.
    pub fn top_down(x: f64, y: f64, height: f64) -> Self {
        Self {
            rotation: [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]],
            translation: [x, y, height],
        }
    }

    fn rotation_matrix(&self) -> Matrix3<f64> {
        let r = &self.rotation;
        Matrix3::new(
            r[0][0], r[0][1], r[0][2], r[1][0], r[1][1], r[1][2], r[2][0], r[2][1], r[2][2],
        )
    }

    fn translation_vector(&self) -> Vector3<f64> {
        Vector3::from(self.translation)
    }
}

/// Pinhole intrinsics plus camera-to-world extrinsic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraModel {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
    pub extrinsic: Extrinsic,
}

impl CameraModel {
    pub fn new(
        fx: f64,
        fy: f64,
        cx: f64,
        cy: f64,
        width: usize,
        height: usize,
        extrinsic: Extrinsic,
    ) -> Result<Self, GeometryError> {
        let cam = Self {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
            extrinsic,
        };
        cam.validate()?;
        Ok(cam)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(self.fx > 0.0 && self.fy > 0.0) {
            return Err(GeometryError::InvalidCamera(
                "focal lengths must be positive".into(),
            ));
        }
        if !(self.cx >= 0.0
            && self.cx < self.width as f64
            && self.cy >= 0.0
            && self.cy < self.height as f64)
        {
            return Err(GeometryError::InvalidCamera(
                "principal point lies outside the image".into(),
            ));
        }
        let r = self.extrinsic.rotation_matrix();
        let err = (r.transpose() * r - Matrix3::identity()).abs().max();
        if err > ORTHONORMAL_TOL {
            return Err(GeometryError::InvalidCamera(format!(
                "extrinsic rotation is not orthonormal (max |RᵀR − I| = {err:e})"
            )));
        }
        Ok(())
    }

    /// Back-projects pixel `(u, v)` at metric `depth` along the optical axis into the world frame.
    pub fn deproject(&self, u: f64, v: f64, depth: f64) -> [f64; 3] {
        let cam = Vector3::new(
            (u - self.cx) / self.fx * depth,
            (v - self.cy) / self.fy * depth,
            depth,
        );
        let world = self.extrinsic.rotation_matrix() * cam + self.extrinsic.translation_vector();
        [world.x, world.y, world.z]
    }

    /// Projects a world point to `(u, v, depth)`. Depth is the camera-frame z.
    pub fn project(&self, point: [f64; 3]) -> (f64, f64, f64) {
        let r = self.extrinsic.rotation_matrix();
        let cam = r.transpose() * (Vector3::from(point) - self.extrinsic.translation_vector());
        let u = self.fx * cam.x / cam.z + self.cx;
        let v = self.fy * cam.y / cam.z + self.cy;
        (u, v, cam.z)
    }
}

/// Lifts every set pixel of `mask` into a world-frame point using `depth`.
pub fn deproject_mask(
    mask: &PixelGrid<bool>,
    depth: &PixelGrid<f64>,
    cam: &CameraModel,
) -> Result<Vec<[f64; 3]>, GeometryError> {
    for (what, w, h) in [
        ("mask", mask.width(), mask.height()),
        ("depth", depth.width(), depth.height()),
    ] {
        if w != cam.width || h != cam.height {
            return Err(GeometryError::DimensionMismatch(format!(
                "{what} is {w}x{h} but the camera image is {}x{}",
                cam.width, cam.height
            )));
        }
    }
    let mut points = Vec::new();
    for v in 0..mask.height() {
        for u in 0..mask.width() {
            if !*mask.get(u, v) {
                continue;
            }
            let d = *depth.get(u, v);
            if d.is_nan() || d <= 0.0 || !d.is_finite() {
                return Err(GeometryError::InvalidDepth { u, v, depth: d });
            }
            points.push(cam.deproject(u as f64, v as f64, d));
        }
    }
    if points.is_empty() {
        return Err(GeometryError::EmptyMask);
    }
    Ok(points)
}
