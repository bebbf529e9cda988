//! Exercises the C ABI from Rust through the `rlib` build of the crate.

use std::ffi::CStr;
use std::ptr;

use fusetrack_ffi::*;

const ID: FtQuat = FtQuat { w: 1.0, x: 0.0, y: 0.0, z: 0.0 };
const ZERO: FtVec3 = FtVec3 { x: 0.0, y: 0.0, z: 0.0 };

fn last_error() -> String {
    let p = ft_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn frame(t: FtVec3, valid: bool) -> FtFusedMeasurement {
    FtFusedMeasurement { omega_b: ZERO, q_sb: ID, q_sbv: ID, t_o: t, vision_valid: valid, has_q_imu: false, q_imu: ID }
}

#[test]
fn quaternion_helpers_match_hand_values() {
    // 90° about z composed with itself is 180° about z.
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let qz = FtQuat { w: h, x: 0.0, y: 0.0, z: h };
    let mut out = FtQuat::default();
    assert_eq!(unsafe { ft_quat_multiply(&qz, &qz, &mut out) }, FtStatus::Ok);
    assert!((out.w).abs() < 1e-15 && (out.z - 1.0).abs() < 1e-15);

    let mut d = 0.0;
    assert_eq!(unsafe { ft_quat_angular_distance(&qz, &ID, &mut d) }, FtStatus::Ok);
    assert!((d - std::f64::consts::FRAC_PI_2).abs() < 1e-12);

    let big = FtQuat { w: 2.0, x: 0.0, y: 0.0, z: 0.0 };
    assert_eq!(unsafe { ft_quat_normalize(&big, &mut out) }, FtStatus::Ok);
    assert_eq!(out, ID);
    let zero = FtQuat { w: 0.0, x: 0.0, y: 0.0, z: 0.0 };
    assert_eq!(unsafe { ft_quat_normalize(&zero, &mut out) }, FtStatus::InvalidArgument);
    assert!(last_error().contains("zero-norm"));
}

#[test]
fn accel_mag_reports_unobservable_inputs() {
    let mut q = FtQuat::default();
    let mag = FtVec3 { x: 22.0, y: 0.0, z: -42.0 };
    let free_fall = FtVec3 { x: 0.0, y: 0.0, z: 1.0 };
    assert_eq!(unsafe { ft_accel_mag_orientation(&free_fall, &mag, &mut q) }, FtStatus::Unobservable);
    let parallel = FtVec3 { x: 0.0, y: 0.0, z: 9.81 };
    let along = FtVec3 { x: 0.0, y: 0.0, z: 5.0 };
    assert_eq!(unsafe { ft_accel_mag_orientation(&parallel, &along, &mut q) }, FtStatus::Unobservable);
    let nan = FtVec3 { x: f64::NAN, y: 0.0, z: 9.81 };
    assert_eq!(unsafe { ft_accel_mag_orientation(&nan, &mag, &mut q) }, FtStatus::InvalidArgument);
}

#[test]
fn null_pointers_are_rejected_without_crashing() {
    assert_eq!(unsafe { ft_quat_multiply(ptr::null(), &ID, ptr::null_mut()) }, FtStatus::NullPointer);
    assert!(last_error().contains("`a`"));
    assert_eq!(unsafe { ft_orient_new(ptr::null(), ptr::null_mut()) }, FtStatus::NullPointer);
    assert_eq!(unsafe { ft_fused_update(ptr::null_mut(), ptr::null(), ptr::null_mut()) }, FtStatus::NullPointer);
    assert_eq!(unsafe { ft_region_state(ptr::null(), ptr::null_mut()) }, FtStatus::NullPointer);
    unsafe {
        ft_orient_free(ptr::null_mut());
        ft_fused_free(ptr::null_mut());
        ft_region_free(ptr::null_mut());
    }
}

#[test]
fn orientation_handle_lifecycle() {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { ft_orient_new(ptr::null(), &mut h) }, FtStatus::Ok);
    let mut est = FtOrientEstimate::default();
    assert_eq!(unsafe { ft_orient_state(h, &mut est) }, FtStatus::NotReady);

    // Noise-free yaw at 0.3 rad/s, sampled at the default 50 Hz.
    let rate = FtVec3 { x: 0.0, y: 0.0, z: 0.3 };
    let mut truth = ID;
    for k in 0..200 {
        let half = 0.5 * 0.3 * 0.02 * k as f64;
        truth = FtQuat { w: half.cos(), x: 0.0, y: 0.0, z: half.sin() };
        assert_eq!(unsafe { ft_orient_update(h, &rate, &truth, &mut est) }, FtStatus::Ok);
    }
    let mut err = 0.0;
    assert_eq!(unsafe { ft_quat_angular_distance(&est.q, &truth, &mut err) }, FtStatus::Ok);
    assert!(err.to_degrees() < 1.0, "{err}");
    assert!((est.omega.z - 0.3).abs() < 0.05, "{est:?}");
    assert!(est.p_diag.iter().all(|p| *p > 0.0));
    let mut again = FtOrientEstimate::default();
    assert_eq!(unsafe { ft_orient_state(h, &mut again) }, FtStatus::Ok);
    assert_eq!(again, est);
    unsafe { ft_orient_free(h) };
}

#[test]
fn invalid_tuning_leaves_output_untouched() {
    let mut t = FtOrientTuning { tau: 0.0, delta: 0.0, d: 0.0, q_p: 0.0, var_gyro: 0.0, var_q: 0.0 };
    assert_eq!(unsafe { ft_orient_default_tuning(&mut t) }, FtStatus::Ok);
    t.tau = -1.0;
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { ft_orient_new(&t, &mut h) }, FtStatus::InvalidArgument);
    assert!(h.is_null());
    assert!(last_error().contains("tau"), "{}", last_error());
}

#[test]
fn fused_handle_waits_for_vision_and_flags_occlusion() {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { ft_fused_new(ptr::null(), &mut h) }, FtStatus::Ok);
    let mut est = FtFusedEstimate::default();
    assert_eq!(unsafe { ft_fused_update(h, &frame(ZERO, false), &mut est) }, FtStatus::NotReady);

    let at = FtVec3 { x: 0.5, y: 0.0, z: 1.0 };
    for _ in 0..20 {
        assert_eq!(unsafe { ft_fused_update(h, &frame(at, true), &mut est) }, FtStatus::Ok);
        assert!(!est.occluded && !est.occluded_branch);
    }
    assert!((est.t.x - 0.5).abs() < 1e-6 && (est.t.z - 1.0).abs() < 1e-6);
    assert!(est.innovation_min_eig > 0.0);

    // A 1 m jump in the vision position trips occlusion; coasting holds the
    // previous position.
    let jumped = FtVec3 { x: 1.5, y: 0.0, z: 1.0 };
    assert_eq!(unsafe { ft_fused_update(h, &frame(jumped, true), &mut est) }, FtStatus::Ok);
    assert!(est.occluded && est.occluded_branch);
    assert!((est.t.x - 0.5).abs() < 0.05, "{est:?}");

    // Returning to the true position is a second jump and ends the episode.
    assert_eq!(unsafe { ft_fused_update(h, &frame(at, true), &mut est) }, FtStatus::Ok);
    assert!(!est.occluded);

    let mut state = FtFusedEstimate::default();
    assert_eq!(unsafe { ft_fused_state(h, &mut state) }, FtStatus::Ok);
    assert_eq!(state.t, est.t);
    assert!(state.innovation_min_eig.is_nan());
    unsafe { ft_fused_free(h) };
}

#[test]
fn region_tracker_starts_after_two_detections_and_coasts() {
    // The first detection fixes position only; the second fixes velocity.
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { ft_region_new(ptr::null(), &mut h) }, FtStatus::Ok);
    let mut est = FtRegionEstimate::default();
    let dt = 0.1;
    assert_eq!(unsafe { ft_region_step(h, 10.0, 20.0, true, dt, &mut est) }, FtStatus::NotReady);
    assert_eq!(unsafe { ft_region_step(h, 11.0, 20.0, true, dt, &mut est) }, FtStatus::Ok);
    assert!((est.vx - 10.0).abs() < 1e-9, "{est:?}");
    assert_eq!(unsafe { ft_region_step(h, 0.0, 0.0, false, dt, &mut est) }, FtStatus::Ok);
    assert!((est.cx - 12.0).abs() < 1e-9, "{est:?}");
    assert_eq!(unsafe { ft_region_step(h, 0.0, 0.0, true, -1.0, &mut est) }, FtStatus::InvalidArgument);
    unsafe { ft_region_free(h) };

    let bad = FtRegionTuning { meas_sigma: 0.0, accel_sigma: 1.0 };
    let mut h2 = ptr::null_mut();
    assert_eq!(unsafe { ft_region_new(&bad, &mut h2) }, FtStatus::InvalidArgument);
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(ft_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
