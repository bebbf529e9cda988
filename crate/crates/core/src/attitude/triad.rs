use nalgebra::{Matrix3, Vector3};

use super::WorldReference;
use crate::error::{Error, Result};
use crate::quat::{Quaternion, RotationMatrix};

/// Orthonormal `[north, east, down]` columns built from a specific-force and a
/// magnetic-field direction.
fn triad(accel: &Vector3<f64>, mag: &Vector3<f64>) -> Result<Matrix3<f64>> {
    let down = -accel.normalize();
    let east = down.cross(mag);
    let en = east.norm();
    if !(en > mag.norm() * 1f64.to_radians().sin()) {
        return Err(Error::ParallelReferences);
    }
    let east = east / en;
    let north = east.cross(&down);
    Ok(Matrix3::from_columns(&[north, east, down]))
}

/// Body → global orientation from one accelerometer/magnetometer pair.
///
/// Fails when the specific force is outside `[0.5 g, 1.5 g]` (not quasi-static)
/// or when the two vectors are within 1° of parallel.
pub fn accel_mag_orientation(accel: &Vector3<f64>, mag: &Vector3<f64>, reference: &WorldReference) -> Result<Quaternion> {
    let g = reference.gravity_g.norm();
    let a = accel.norm();
    if !(a >= 0.5 * g && a <= 1.5 * g) {
        return Err(Error::NotQuasiStatic(a));
    }
    let body = triad(accel, mag)?;
    let global = triad(&reference.gravity_g, &reference.mag_field_g)?;
    RotationMatrix::from_matrix_unchecked(global * body.transpose()).to_quaternion()
}
