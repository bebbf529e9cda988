//! Model-based camera pose from 2D/3D point correspondences: pinhole
//! projection, POSIT initialization, and Gauss-Newton refinement of the
//! reprojection error on the rotation manifold.
//!
//! The camera frame is z-optical, x-right, y-down. A pose maps object
//! coordinates into the camera frame: `X_c = R_CO · P_o + t_CO`.

mod posit;
mod refine;

pub use posit::posit_init;
pub use refine::{refine_pose, refine_pose_detailed, reprojection_residuals, residual_jacobian, retract, track_frame, RefineOutcome};

use std::path::Path;

use nalgebra::{Vector2, Vector3};

use crate::error::{Error, Result};
use crate::frames::{FrameId, FrameTransform};
use crate::quat::RotationMatrix;

/// Points closer than this to the camera plane cannot be projected, m.
pub const MIN_DEPTH: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

impl Default for CameraIntrinsics {
    /// 640×480 with a 500 px focal length.
    fn default() -> Self {
        Self { fx: 500.0, fy: 500.0, cx: 320.0, cy: 240.0, width: 640, height: 480 }
    }
}

impl CameraIntrinsics {
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, msg: String| Err(Error::Config { key: key.into(), msg });
        if !(self.fx > 0.0 && self.fx.is_finite()) {
            return bad("camera.fx", format!("must be positive, got {}", self.fx));
        }
        if !(self.fy > 0.0 && self.fy.is_finite()) {
            return bad("camera.fy", format!("must be positive, got {}", self.fy));
        }
        if !(self.cx >= 0.0 && self.cx <= self.width as f64) {
            return bad("camera.cx", format!("{} is outside the image width {}", self.cx, self.width));
        }
        if !(self.cy >= 0.0 && self.cy <= self.height as f64) {
            return bad("camera.cy", format!("{} is outside the image height {}", self.cy, self.height));
        }
        Ok(())
    }

    pub fn contains(&self, p: &Vector2<f64>) -> bool {
        p.x >= 0.0 && p.y >= 0.0 && p.x <= self.width as f64 && p.y <= self.height as f64
    }

    /// Pixel → normalized image coordinates.
    pub fn normalize(&self, p: &Vector2<f64>) -> Vector2<f64> {
        Vector2::new((p.x - self.cx) / self.fx, (p.y - self.cy) / self.fy)
    }
}

/// Object pose in the camera frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseCO {
    pub rotation: RotationMatrix,
    /// Object origin in the camera frame, m.
    pub translation: Vector3<f64>,
}

impl PoseCO {
    pub fn new(rotation: RotationMatrix, translation: Vector3<f64>) -> Self {
        Self { rotation, translation }
    }

    pub fn transform(&self, p_o: &Vector3<f64>) -> Vector3<f64> {
        self.rotation.apply(p_o) + self.translation
    }

    /// The rotation as a labeled object → camera transform.
    pub fn frame_transform(&self) -> FrameTransform {
        FrameTransform::new(self.rotation, FrameId::Object, FrameId::Camera)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correspondence {
    /// Model point, object frame, m.
    pub p_o: Vector3<f64>,
    /// Observed image point, px.
    pub p_i: Vector2<f64>,
}

/// Pinhole projection of a model point.
pub fn project(pose: &PoseCO, p_o: &Vector3<f64>, k: &CameraIntrinsics) -> Result<Vector2<f64>> {
    let x = pose.transform(p_o);
    if !(x.z > MIN_DEPTH) {
        return Err(Error::BehindCamera(x.z));
    }
    Ok(Vector2::new(k.fx * x.x / x.z + k.cx, k.fy * x.y / x.z + k.cy))
}

/// Sum of squared reprojection errors, px².
pub fn reprojection_cost(pose: &PoseCO, corrs: &[Correspondence], k: &CameraIntrinsics) -> Result<f64> {
    Ok(reprojection_residuals(pose, corrs, k)?.norm_squared())
}

/// Root-mean-square reprojection error per point, px.
pub fn reprojection_rms(pose: &PoseCO, corrs: &[Correspondence], k: &CameraIntrinsics) -> Result<f64> {
    if corrs.is_empty() {
        return Err(Error::TooFewPoints { needed: 1, got: 0 });
    }
    Ok((reprojection_cost(pose, corrs, k)? / corrs.len() as f64).sqrt())
}

/// Vertices and edges of the tracked object, in meters.
#[derive(Debug, Clone, PartialEq)]
pub struct WireframeModel {
    pub vertices: Vec<Vector3<f64>>,
    pub edges: Vec<(usize, usize)>,
}

impl WireframeModel {
    /// Axis-aligned box centered on the object origin.
    pub fn cuboid(size: &Vector3<f64>) -> Self {
        let h = size / 2.0;
        let mut vertices = Vec::with_capacity(8);
        for &sx in &[-1.0, 1.0] {
            for &sy in &[-1.0, 1.0] {
                for &sz in &[-1.0, 1.0] {
                    vertices.push(Vector3::new(sx * h.x, sy * h.y, sz * h.z));
                }
            }
        }
        let mut edges = Vec::with_capacity(12);
        for a in 0..8usize {
            for bit in [1usize, 2, 4] {
                if a & bit == 0 {
                    edges.push((a, a | bit));
                }
            }
        }
        Self { vertices, edges }
    }

    /// Parses `v x y z` and `e i j` lines with zero-based vertex indices.
    /// Blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut vertices = Vec::new();
        let mut edges = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let mut fields = body.split_whitespace();
            let tag = fields.next().unwrap_or_default();
            let rest: Vec<&str> = fields.collect();
            let err = |msg: String| Error::Parse { line, msg };
            match tag {
                "v" => {
                    if rest.len() != 3 {
                        return Err(err(format!("vertex needs 3 coordinates, got {}", rest.len())));
                    }
                    let mut c = [0.0; 3];
                    for (slot, s) in c.iter_mut().zip(&rest) {
                        *slot = s.parse::<f64>().map_err(|e| err(format!("bad coordinate `{s}`: {e}")))?;
                        if !slot.is_finite() {
                            return Err(err(format!("non-finite coordinate `{s}`")));
                        }
                    }
                    vertices.push(Vector3::from(c));
                }
                "e" => {
                    if rest.len() != 2 {
                        return Err(err(format!("edge needs 2 indices, got {}", rest.len())));
                    }
                    let idx = |s: &str| s.parse::<usize>().map_err(|e| err(format!("bad index `{s}`: {e}")));
                    edges.push((idx(rest[0])?, idx(rest[1])?));
                }
                other => return Err(err(format!("unknown record `{other}`"))),
            }
        }
        let model = Self { vertices, edges };
        model.validate()?;
        Ok(model)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for v in &self.vertices {
            s.push_str(&format!("v {} {} {}\n", v.x, v.y, v.z));
        }
        for (a, b) in &self.edges {
            s.push_str(&format!("e {a} {b}\n"));
        }
        s
    }

    /// Checks edge indices and that the vertices span three dimensions.
    pub fn validate(&self) -> Result<()> {
        for &(a, b) in &self.edges {
            let n = self.vertices.len();
            if a >= n || b >= n {
                return Err(Error::DegenerateGeometry(format!("edge ({a}, {b}) references a missing vertex (have {n})")));
            }
        }
        posit::check_non_coplanar(&self.vertices)
    }
}
