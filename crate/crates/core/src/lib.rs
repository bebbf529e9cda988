//! Marker-less tracking by fusing IMU and vision.
//!
//! The crate is organized bottom-up:
//!
//! - [`quat`]: quaternion and rotation-matrix algebra
//! - [`frames`]: camera/body/object/global rotations and calibration
//! - [`attitude`]: Butterworth prefilter, accel/mag orientation, complementary filter
//! - [`region`]: constant-velocity image-plane region tracker
//! - [`ekf_orient`]: 7-state gyro + accel/mag orientation EKF
//! - [`ekf_fused`]: 13-state IMU + vision pose EKF with occlusion handling
//! - [`vision`]: pinhole projection, POSIT initialization, Gauss-Newton pose refinement
//! - [`sim`]: deterministic ground truth and sensor synthesis
//! - [`config`], [`scenario`], [`metrics`]: the scenario runner behind the CLI

// Comparisons like `!(x > 0.0)` are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod attitude;
pub mod config;
pub mod ekf_fused;
pub mod ekf_orient;
pub mod error;
pub mod frames;
pub mod metrics;
pub mod quat;
pub mod region;
pub mod scenario;
pub mod sim;
pub mod vision;

mod kalman;

pub use kalman::{asymmetry, min_eigenvalue};

pub use error::{Error, Result};
pub use quat::{Quaternion, RotationMatrix};
