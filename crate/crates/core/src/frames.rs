//! Camera, body, object and global frames, and the rotations between them.
//!
//! A [`FrameTransform`] with `from = B`, `to = A` maps coordinates expressed in
//! `B` into `A` (written `R_AB`). Composition checks that the inner labels
//! agree, so an inverse in the wrong place is an error rather than a silently
//! wrong rotation.

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::quat::{Quaternion, RotationMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FrameId {
    Camera,
    Body,
    Object,
    Global,
}

/// Drift beyond which accumulated products are projected back onto SO(3).
pub const REORTHO_DRIFT: f64 = 1e-7;
/// Compositions between unconditional re-orthogonalizations.
pub const REORTHO_EVERY: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameTransform {
    pub rotation: RotationMatrix,
    pub from: FrameId,
    pub to: FrameId,
}

impl FrameTransform {
    pub fn new(rotation: RotationMatrix, from: FrameId, to: FrameId) -> Self {
        Self { rotation, from, to }
    }

    pub fn identity(from: FrameId, to: FrameId) -> Self {
        Self::new(RotationMatrix::identity(), from, to)
    }

    pub fn from_quaternion(q: &Quaternion, from: FrameId, to: FrameId) -> Self {
        Self::new(q.to_rotation(), from, to)
    }

    pub fn inverse(&self) -> Self {
        Self::new(self.rotation.transpose(), self.to, self.from)
    }

    /// `self ∘ other`: apply `other` first. Requires `self.from == other.to`.
    pub fn compose(&self, other: &FrameTransform) -> Result<FrameTransform> {
        if self.from != other.to {
            return Err(Error::FrameMismatch { expected: self.from, found: other.to });
        }
        Ok(Self::new(self.rotation * other.rotation, other.from, self.to))
    }

    pub fn apply(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.rotation.apply(v)
    }

    pub fn to_quaternion(&self) -> Result<Quaternion> {
        self.rotation.to_quaternion()
    }

    fn expect(&self, from: FrameId, to: FrameId) -> Result<()> {
        if self.from != from {
            return Err(Error::FrameMismatch { expected: from, found: self.from });
        }
        if self.to != to {
            return Err(Error::FrameMismatch { expected: to, found: self.to });
        }
        Ok(())
    }
}

/// Fixed rotations: camera ← body from offline calibration and global ←
/// object, computed once per session.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationSet {
    pub r_cb: FrameTransform,
    pub r_go: Option<FrameTransform>,
}

impl CalibrationSet {
    pub fn new(r_cb: RotationMatrix, r_go: Option<RotationMatrix>) -> Self {
        Self {
            r_cb: FrameTransform::new(r_cb, FrameId::Body, FrameId::Camera),
            r_go: r_go.map(|r| FrameTransform::new(r, FrameId::Object, FrameId::Global)),
        }
    }

    pub fn is_initialized(&self) -> bool {
        self.r_go.is_some()
    }

    /// Fills `r_go` from one IMU/vision pair if it is not already set.
    /// Returns whether it was computed by this call.
    pub fn initialize_from(&mut self, r_gb_imu: &FrameTransform, r_co: &FrameTransform) -> Result<bool> {
        if self.r_go.is_some() {
            return Ok(false);
        }
        self.r_go = Some(compute_r_go(r_gb_imu, &self.r_cb, r_co)?);
        Ok(true)
    }
}

/// `R_GO = R_GB_imu · (R_CB)⁻¹ · R_CO`.
pub fn compute_r_go(r_gb_imu: &FrameTransform, r_cb: &FrameTransform, r_co: &FrameTransform) -> Result<FrameTransform> {
    r_gb_imu.expect(FrameId::Body, FrameId::Global)?;
    r_cb.expect(FrameId::Body, FrameId::Camera)?;
    r_co.expect(FrameId::Object, FrameId::Camera)?;
    r_gb_imu.compose(&r_cb.inverse())?.compose(r_co)
}

/// Body orientation in the global frame from a vision pose:
/// `R_GB_vision = R_GO · (R_CO)⁻¹ · R_CB`.
pub fn vision_to_global(r_co: &FrameTransform, calib: &CalibrationSet) -> Result<FrameTransform> {
    let r_go = calib.r_go.as_ref().ok_or(Error::CalibrationMissing)?;
    r_co.expect(FrameId::Object, FrameId::Camera)?;
    r_go.compose(&r_co.inverse())?.compose(&calib.r_cb)
}

/// Camera (= body, zero lever arm) position in the global frame from the
/// object origin expressed in the camera frame: `R_GO · (R_CO)⁻¹ · (−t_CO)`.
/// The object origin is taken as the global origin.
pub fn vision_position_to_global(r_co: &FrameTransform, t_co: &Vector3<f64>, calib: &CalibrationSet) -> Result<Vector3<f64>> {
    let r_go = calib.r_go.as_ref().ok_or(Error::CalibrationMissing)?;
    r_co.expect(FrameId::Object, FrameId::Camera)?;
    Ok(r_go.apply(&r_co.inverse().apply(&(-t_co))))
}

/// Inverse of [`vision_to_global`] plus [`vision_position_to_global`]: the
/// object pose in the camera frame that a body pose in the global frame
/// implies. Used to reseed the vision tracker from the filter.
pub fn global_to_vision(
    r_gb: &FrameTransform,
    position_g: &Vector3<f64>,
    calib: &CalibrationSet,
) -> Result<(FrameTransform, Vector3<f64>)> {
    let r_go = calib.r_go.as_ref().ok_or(Error::CalibrationMissing)?;
    r_gb.expect(FrameId::Body, FrameId::Global)?;
    // R_CO = R_CB · R_GBᵀ · R_GO
    let r_co = calib.r_cb.compose(&r_gb.inverse())?.compose(r_go)?;
    let t_co = -r_co.apply(&r_go.inverse().apply(position_g));
    Ok((r_co, t_co))
}

/// Running product of transforms that re-orthogonalizes periodically so long
/// chains stay on SO(3).
#[derive(Debug, Clone)]
pub struct TransformChain {
    current: FrameTransform,
    since_reortho: usize,
}

impl TransformChain {
    pub fn new(start: FrameTransform) -> Self {
        Self { current: start, since_reortho: 0 }
    }

    /// Right-multiplies `next` onto the chain (`current ∘ next`).
    pub fn push(&mut self, next: &FrameTransform) -> Result<()> {
        let mut t = self.current.compose(next)?;
        self.since_reortho += 1;
        if self.since_reortho >= REORTHO_EVERY || t.rotation.orthonormality_error() > REORTHO_DRIFT {
            t.rotation = t.rotation.reorthonormalize();
            self.since_reortho = 0;
        }
        self.current = t;
        Ok(())
    }

    pub fn current(&self) -> &FrameTransform {
        &self.current
    }
}
