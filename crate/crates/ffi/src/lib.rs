//! C ABI over the `fusetrack` filters.
//!
//! Filters live behind opaque handles created by `ft_*_new` and released by
//! `ft_*_free`. Every fallible function returns an [`FtStatus`]; on a
//! negative status a human-readable message is available from
//! [`ft_last_error_message`] on the same thread. Panics never cross the
//! boundary: they are caught and reported as [`FtStatus::Panic`].
//!
//! Quaternions are `(w, x, y, z)` and map body → global. Handles are not
//! thread-safe; use one handle per thread or synchronize externally.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nalgebra::Vector3;

use fusetrack::attitude::{accel_mag_orientation, WorldReference};
use fusetrack::ekf_fused::{FusedEkf, FusedMeasurement14, FusedTuning, TrackingMode};
use fusetrack::ekf_orient::{OrientMeasurement7, OrientTuning, OrientationEkf};
use fusetrack::region::{Detection2D, RegionTracker, RegionTuning};
use fusetrack::{Error, Quaternion};

/// Result code of every fallible call. Zero is success, positive codes are
/// informational, negative codes are errors.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FtStatus {
    Ok = 0,
    /// The call succeeded but the filter has no estimate yet.
    NotReady = 1,
    NullPointer = -1,
    /// A non-finite input or an out-of-range tuning value.
    InvalidArgument = -2,
    /// The sensor data cannot produce an orientation (not quasi-static or
    /// degenerate geometry).
    Unobservable = -3,
    /// The filter produced a non-finite state or a singular innovation.
    Diverged = -4,
    Panic = -99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FtVec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FtQuat {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Default for FtQuat {
    fn default() -> Self {
        FtQuat { w: 1.0, x: 0.0, y: 0.0, z: 0.0 }
    }
}

impl From<FtVec3> for Vector3<f64> {
    fn from(v: FtVec3) -> Self {
        Vector3::new(v.x, v.y, v.z)
    }
}

impl From<Vector3<f64>> for FtVec3 {
    fn from(v: Vector3<f64>) -> Self {
        FtVec3 { x: v.x, y: v.y, z: v.z }
    }
}

impl From<FtQuat> for Quaternion {
    fn from(q: FtQuat) -> Self {
        Quaternion::new(q.w, q.x, q.y, q.z)
    }
}

impl From<Quaternion> for FtQuat {
    fn from(q: Quaternion) -> Self {
        let [w, x, y, z] = q.to_array();
        FtQuat { w, x, y, z }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FtOrientTuning {
    /// Gyro correlation time, s.
    pub tau: f64,
    /// IMU sample interval, s.
    pub delta: f64,
    /// Angular-rate driving noise variance, rad²/s².
    pub d: f64,
    /// Quaternion process noise variance.
    pub q_p: f64,
    /// Gyro measurement variance, rad²/s².
    pub var_gyro: f64,
    /// Accel/mag quaternion measurement variance.
    pub var_q: f64,
}

impl From<OrientTuning> for FtOrientTuning {
    fn from(t: OrientTuning) -> Self {
        FtOrientTuning { tau: t.tau, delta: t.delta, d: t.d, q_p: t.q_p, var_gyro: t.var_gyro, var_q: t.var_q }
    }
}

impl From<FtOrientTuning> for OrientTuning {
    fn from(t: FtOrientTuning) -> Self {
        OrientTuning { tau: t.tau, delta: t.delta, d: t.d, q_p: t.q_p, var_gyro: t.var_gyro, var_q: t.var_q }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FtFusedTuning {
    pub orient: FtOrientTuning,
    /// Frame interval, s.
    pub delta_i: f64,
    /// Constant-velocity process noise scale.
    pub k: f64,
    pub var_q_vision: f64,
    /// m²
    pub var_t_vision: f64,
    /// Occlusion threshold on the vision/estimate position gap, m.
    pub occlusion_t: f64,
    /// Multiplier on the IMU quaternion variance while occluded.
    pub occl_imu_var_factor: f64,
    pub reacquire_jump: bool,
    pub exit_hysteresis: u32,
    /// Initial velocity variance, m²/s².
    pub init_var_v: f64,
}

impl From<FusedTuning> for FtFusedTuning {
    fn from(t: FusedTuning) -> Self {
        FtFusedTuning {
            orient: t.orient.into(),
            delta_i: t.delta_i,
            k: t.k,
            var_q_vision: t.var_q_vision,
            var_t_vision: t.var_t_vision,
            occlusion_t: t.occlusion_t,
            occl_imu_var_factor: t.occl_imu_var_factor,
            reacquire_jump: t.reacquire_jump,
            exit_hysteresis: t.exit_hysteresis as u32,
            init_var_v: t.init_var_v,
        }
    }
}

impl From<FtFusedTuning> for FusedTuning {
    fn from(t: FtFusedTuning) -> Self {
        FusedTuning {
            orient: t.orient.into(),
            delta_i: t.delta_i,
            k: t.k,
            var_q_vision: t.var_q_vision,
            var_t_vision: t.var_t_vision,
            occlusion_t: t.occlusion_t,
            occl_imu_var_factor: t.occl_imu_var_factor,
            reacquire_jump: t.reacquire_jump,
            exit_hysteresis: t.exit_hysteresis as usize,
            init_var_v: t.init_var_v,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FtRegionTuning {
    /// Detection noise, px.
    pub meas_sigma: f64,
    /// White-acceleration process noise, px/s².
    pub accel_sigma: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FtOrientEstimate {
    pub omega: FtVec3,
    pub q: FtQuat,
    /// Diagonal of the 7×7 covariance, `[ω, q]` order.
    pub p_diag: [f64; 7],
}

/// One frame of input to the fused filter.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FtFusedMeasurement {
    /// Gyro rate, rad/s.
    pub omega_b: FtVec3,
    /// IMU-derived orientation used in normal tracking.
    pub q_sb: FtQuat,
    /// Vision-derived orientation.
    pub q_sbv: FtQuat,
    /// Vision-derived global position, m.
    pub t_o: FtVec3,
    pub vision_valid: bool,
    /// When set, `q_imu` replaces the state quaternion on entering occlusion.
    pub has_q_imu: bool,
    pub q_imu: FtQuat,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FtFusedEstimate {
    pub omega: FtVec3,
    pub q: FtQuat,
    pub t: FtVec3,
    pub v: FtVec3,
    /// Diagonal of the 13×13 covariance, `[ω, q, t, v]` order.
    pub p_diag: [f64; 13],
    /// Tracking mode after this frame.
    pub occluded: bool,
    /// Whether this frame was processed by the occluded branch.
    pub occluded_branch: bool,
    /// Smallest eigenvalue of the innovation covariance; NaN when no update ran.
    pub innovation_min_eig: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FtRegionEstimate {
    pub cx: f64,
    pub cy: f64,
    pub vx: f64,
    pub vy: f64,
    /// Diagonal of the 4×4 covariance, `[cx, cy, vx, vy]` order.
    pub p_diag: [f64; 4],
}

/// Opaque seven-state orientation filter.
pub struct FtOrientEkf(OrientationEkf);

/// Opaque thirteen-state IMU + vision filter.
pub struct FtFusedEkf(FusedEkf);

/// Opaque image-plane region tracker.
pub struct FtRegionTracker(RegionTracker);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(FtStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::NotQuasiStatic(_) | Error::ParallelReferences | Error::DegenerateGeometry(_) => FtStatus::Unobservable,
            Error::NonFinite { .. } | Error::NotPositiveDefinite { .. } | Error::Diverged(_) => FtStatus::Diverged,
            _ => FtStatus::InvalidArgument,
        };
        Fail(status, e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(FtStatus::NullPointer, format!("`{what}` is null"))
}

/// Runs `f` with panics and errors converted to a status code.
fn guard(f: impl FnOnce() -> Result<FtStatus, Fail>) -> FtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(status)) => status,
        Ok(Err(Fail(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("panic: {msg}"));
            FtStatus::Panic
        }
    }
}

unsafe fn read<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write<T>(p: *mut T, what: &str, value: T) -> Result<(), Fail> {
    let slot = p.as_mut().ok_or_else(|| null(what))?;
    *slot = value;
    Ok(())
}

fn finite_quat(q: FtQuat, what: &str) -> Result<Quaternion, Fail> {
    let q = Quaternion::from(q);
    if !q.is_finite() {
        return Err(Fail(FtStatus::InvalidArgument, format!("`{what}` is not finite")));
    }
    Ok(q)
}

fn finite_vec(v: FtVec3, what: &str) -> Result<Vector3<f64>, Fail> {
    let v = Vector3::from(v);
    if !v.iter().all(|c| c.is_finite()) {
        return Err(Fail(FtStatus::InvalidArgument, format!("`{what}` is not finite")));
    }
    Ok(v)
}

fn diag<const N: usize>(p: impl Fn(usize) -> f64) -> [f64; N] {
    std::array::from_fn(p)
}

/// Message of the last failed call on this thread, or null if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ft_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ft_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Hamilton product `a ⊗ b`.
///
/// # Safety
/// `a` and `b` must be readable and `out` writable, or null.
#[no_mangle]
pub unsafe extern "C" fn ft_quat_multiply(a: *const FtQuat, b: *const FtQuat, out: *mut FtQuat) -> FtStatus {
    guard(|| {
        let (a, b) = (Quaternion::from(*read(a, "a")?), Quaternion::from(*read(b, "b")?));
        write(out, "out", a.multiply(&b).into())?;
        Ok(FtStatus::Ok)
    })
}

/// Unit quaternion in the direction of `q`.
///
/// # Safety
/// `q` must be readable and `out` writable, or null.
#[no_mangle]
pub unsafe extern "C" fn ft_quat_normalize(q: *const FtQuat, out: *mut FtQuat) -> FtStatus {
    guard(|| {
        let q = finite_quat(*read(q, "q")?, "q")?;
        write(out, "out", q.normalize()?.into())?;
        Ok(FtStatus::Ok)
    })
}

/// Rotation angle between two orientations, rad, in `[0, π]`.
///
/// # Safety
/// `a` and `b` must be readable and `out` writable, or null.
#[no_mangle]
pub unsafe extern "C" fn ft_quat_angular_distance(a: *const FtQuat, b: *const FtQuat, out: *mut f64) -> FtStatus {
    guard(|| {
        let a = finite_quat(*read(a, "a")?, "a")?.normalize()?;
        let b = finite_quat(*read(b, "b")?, "b")?.normalize()?;
        write(out, "out", a.angular_distance(&b))?;
        Ok(FtStatus::Ok)
    })
}

/// Body → global orientation from one accelerometer (m/s²) and magnetometer
/// sample, against the default z-up world reference.
///
/// # Safety
/// `accel` and `mag` must be readable and `out` writable, or null.
#[no_mangle]
pub unsafe extern "C" fn ft_accel_mag_orientation(accel: *const FtVec3, mag: *const FtVec3, out: *mut FtQuat) -> FtStatus {
    guard(|| {
        let a = finite_vec(*read(accel, "accel")?, "accel")?;
        let m = finite_vec(*read(mag, "mag")?, "mag")?;
        write(out, "out", accel_mag_orientation(&a, &m, &WorldReference::default())?.into())?;
        Ok(FtStatus::Ok)
    })
}

/// # Safety
/// `out` must be writable or null.
#[no_mangle]
pub unsafe extern "C" fn ft_orient_default_tuning(out: *mut FtOrientTuning) -> FtStatus {
    guard(|| {
        write(out, "out", OrientTuning::default().into())?;
        Ok(FtStatus::Ok)
    })
}

/// Creates an orientation filter. A null `tuning` selects the defaults.
///
/// # Safety
/// `tuning` must be readable or null; `out` must be writable or null.
#[no_mangle]
pub unsafe extern "C" fn ft_orient_new(tuning: *const FtOrientTuning, out: *mut *mut FtOrientEkf) -> FtStatus {
    guard(|| {
        let tuning = tuning.as_ref().map_or_else(OrientTuning::default, |t| (*t).into());
        tuning.validate()?;
        let handle = Box::into_raw(Box::new(FtOrientEkf(OrientationEkf::new(tuning))));
        if let Err(e) = write(out, "out", handle) {
            drop(Box::from_raw(handle));
            return Err(e);
        }
        Ok(FtStatus::Ok)
    })
}

/// # Safety
/// `handle` must come from [`ft_orient_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ft_orient_free(handle: *mut FtOrientEkf) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

fn orient_estimate(ekf: &OrientationEkf) -> Option<FtOrientEstimate> {
    ekf.state().map(|s| FtOrientEstimate { omega: s.omega.into(), q: s.q.into(), p_diag: diag(|i| s.p[(i, i)]) })
}

/// Feeds one IMU sample: gyro rate and accel/mag orientation. The first call
/// initializes the filter from the measurement.
///
/// # Safety
/// `handle` must be a live handle; `gyro` and `q_sb` readable; `out` writable
/// or null (then the estimate is not returned).
#[no_mangle]
pub unsafe extern "C" fn ft_orient_update(handle: *mut FtOrientEkf, gyro: *const FtVec3, q_sb: *const FtQuat, out: *mut FtOrientEstimate) -> FtStatus {
    guard(|| {
        let ekf = &mut handle.as_mut().ok_or_else(|| null("handle"))?.0;
        let z = OrientMeasurement7 {
            omega_b: finite_vec(*read(gyro, "gyro")?, "gyro")?,
            q_sb: finite_quat(*read(q_sb, "q_sb")?, "q_sb")?,
        };
        ekf.update(&z)?;
        if !out.is_null() {
            *out = orient_estimate(ekf).unwrap_or_default();
        }
        Ok(FtStatus::Ok)
    })
}

/// Current estimate, or [`FtStatus::NotReady`] before the first update.
///
/// # Safety
/// `handle` must be a live handle and `out` writable, or null.
#[no_mangle]
pub unsafe extern "C" fn ft_orient_state(handle: *const FtOrientEkf, out: *mut FtOrientEstimate) -> FtStatus {
    guard(|| {
        let ekf = &read(handle, "handle")?.0;
        match orient_estimate(ekf) {
            Some(est) => {
                write(out, "out", est)?;
                Ok(FtStatus::Ok)
            }
            None => Ok(FtStatus::NotReady),
        }
    })
}

/// # Safety
/// `out` must be writable or null.
#[no_mangle]
pub unsafe extern "C" fn ft_fused_default_tuning(out: *mut FtFusedTuning) -> FtStatus {
    guard(|| {
        write(out, "out", FusedTuning::default().into())?;
        Ok(FtStatus::Ok)
    })
}

/// Creates a fused filter. A null `tuning` selects the defaults.
///
/// # Safety
/// `tuning` must be readable or null; `out` must be writable or null.
#[no_mangle]
pub unsafe extern "C" fn ft_fused_new(tuning: *const FtFusedTuning, out: *mut *mut FtFusedEkf) -> FtStatus {
    guard(|| {
        let tuning = tuning.as_ref().map_or_else(FusedTuning::default, |t| (*t).into());
        tuning.validate()?;
        let handle = Box::into_raw(Box::new(FtFusedEkf(FusedEkf::new(tuning))));
        if let Err(e) = write(out, "out", handle) {
            drop(Box::from_raw(handle));
            return Err(e);
        }
        Ok(FtStatus::Ok)
    })
}

/// # Safety
/// `handle` must come from [`ft_fused_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ft_fused_free(handle: *mut FtFusedEkf) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

fn fused_estimate(ekf: &FusedEkf) -> Option<FtFusedEstimate> {
    ekf.state().map(|s| FtFusedEstimate {
        omega: s.omega.into(),
        q: s.q.into(),
        t: s.t.into(),
        v: s.v.into(),
        p_diag: diag(|i| s.p[(i, i)]),
        occluded: ekf.mode() == TrackingMode::Occluded,
        occluded_branch: false,
        innovation_min_eig: f64::NAN,
    })
}

/// Processes one frame. Returns [`FtStatus::NotReady`] while waiting for the
/// first valid vision frame.
///
/// # Safety
/// `handle` must be a live handle; `z` readable; `out` writable or null.
#[no_mangle]
pub unsafe extern "C" fn ft_fused_update(handle: *mut FtFusedEkf, z: *const FtFusedMeasurement, out: *mut FtFusedEstimate) -> FtStatus {
    guard(|| {
        let ekf = &mut handle.as_mut().ok_or_else(|| null("handle"))?.0;
        let m = *read(z, "z")?;
        let z = FusedMeasurement14 {
            omega_b: finite_vec(m.omega_b, "omega_b")?,
            q_sb: finite_quat(m.q_sb, "q_sb")?,
            q_sbv: finite_quat(m.q_sbv, "q_sbv")?,
            t_o: finite_vec(m.t_o, "t_o")?,
            vision_valid: m.vision_valid,
            q_imu: if m.has_q_imu { Some(finite_quat(m.q_imu, "q_imu")?) } else { None },
        };
        let Some(report) = ekf.update(&z)? else {
            return Ok(FtStatus::NotReady);
        };
        if !out.is_null() {
            let mut est = fused_estimate(ekf).unwrap_or_default();
            est.occluded_branch = report.decision.branch == TrackingMode::Occluded;
            est.innovation_min_eig = report.innovation_min_eig.unwrap_or(f64::NAN);
            *out = est;
        }
        Ok(FtStatus::Ok)
    })
}

/// Current estimate, or [`FtStatus::NotReady`] before initialization. The
/// per-frame fields `occluded_branch` and `innovation_min_eig` are reset.
///
/// # Safety
/// `handle` must be a live handle and `out` writable, or null.
#[no_mangle]
pub unsafe extern "C" fn ft_fused_state(handle: *const FtFusedEkf, out: *mut FtFusedEstimate) -> FtStatus {
    guard(|| {
        let ekf = &read(handle, "handle")?.0;
        match fused_estimate(ekf) {
            Some(est) => {
                write(out, "out", est)?;
                Ok(FtStatus::Ok)
            }
            None => Ok(FtStatus::NotReady),
        }
    })
}

/// # Safety
/// `out` must be writable or null.
#[no_mangle]
pub unsafe extern "C" fn ft_region_default_tuning(out: *mut FtRegionTuning) -> FtStatus {
    guard(|| {
        let t = RegionTuning::default();
        write(out, "out", FtRegionTuning { meas_sigma: t.meas_sigma, accel_sigma: t.accel_sigma })?;
        Ok(FtStatus::Ok)
    })
}

/// Creates a region tracker. A null `tuning` selects the defaults.
///
/// # Safety
/// `tuning` must be readable or null; `out` must be writable or null.
#[no_mangle]
pub unsafe extern "C" fn ft_region_new(tuning: *const FtRegionTuning, out: *mut *mut FtRegionTracker) -> FtStatus {
    guard(|| {
        let tuning = tuning.as_ref().map_or_else(RegionTuning::default, |t| RegionTuning { meas_sigma: t.meas_sigma, accel_sigma: t.accel_sigma });
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if !ok(tuning.meas_sigma) || !ok(tuning.accel_sigma) {
            return Err(Fail(FtStatus::InvalidArgument, "region tuning sigmas must be positive and finite".into()));
        }
        let handle = Box::into_raw(Box::new(FtRegionTracker(RegionTracker::new(tuning))));
        if let Err(e) = write(out, "out", handle) {
            drop(Box::from_raw(handle));
            return Err(e);
        }
        Ok(FtStatus::Ok)
    })
}

/// # Safety
/// `handle` must come from [`ft_region_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ft_region_free(handle: *mut FtRegionTracker) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

fn region_estimate(t: &RegionTracker) -> Option<FtRegionEstimate> {
    t.state().map(|s| FtRegionEstimate { cx: s.cx, cy: s.cy, vx: s.vx, vy: s.vy, p_diag: diag(|i| s.p[(i, i)]) })
}

/// Advances the tracker by `dt` seconds. With `valid` false the detection is
/// ignored and the track only predicts. Returns [`FtStatus::NotReady`] until
/// two detections have started the track.
///
/// # Safety
/// `handle` must be a live handle; `out` writable or null.
#[no_mangle]
pub unsafe extern "C" fn ft_region_step(handle: *mut FtRegionTracker, cx: f64, cy: f64, valid: bool, dt: f64, out: *mut FtRegionEstimate) -> FtStatus {
    guard(|| {
        let tracker = &mut handle.as_mut().ok_or_else(|| null("handle"))?.0;
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Fail(FtStatus::InvalidArgument, format!("dt must be positive, got {dt}")));
        }
        let z = if valid {
            if !(cx.is_finite() && cy.is_finite()) {
                return Err(Fail(FtStatus::InvalidArgument, "detection is not finite".into()));
            }
            Detection2D::new(cx, cy)
        } else {
            Detection2D::missing()
        };
        tracker.step(&z, dt);
        match region_estimate(tracker) {
            Some(est) => {
                if !out.is_null() {
                    *out = est;
                }
                Ok(FtStatus::Ok)
            }
            None => Ok(FtStatus::NotReady),
        }
    })
}

/// Current estimate, or [`FtStatus::NotReady`] before the track has started.
///
/// # Safety
/// `handle` must be a live handle and `out` writable, or null.
#[no_mangle]
pub unsafe extern "C" fn ft_region_state(handle: *const FtRegionTracker, out: *mut FtRegionEstimate) -> FtStatus {
    guard(|| {
        let tracker = &read(handle, "handle")?.0;
        match region_estimate(tracker) {
            Some(est) => {
                write(out, "out", est)?;
                Ok(FtStatus::Ok)
            }
            None => Ok(FtStatus::NotReady),
        }
    })
}
