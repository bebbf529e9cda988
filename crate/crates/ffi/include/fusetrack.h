#ifndef FUSETRACK_H
#define FUSETRACK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call. Zero is success, positive codes are
 * informational, negative codes are errors.
 */
typedef enum FtStatus {
  FT_STATUS_OK = 0,
  /**
   * The call succeeded but the filter has no estimate yet.
   */
  FT_STATUS_NOT_READY = 1,
  FT_STATUS_NULL_POINTER = -1,
  /**
   * A non-finite input or an out-of-range tuning value.
   */
  FT_STATUS_INVALID_ARGUMENT = -2,
  /**
   * The sensor data cannot produce an orientation (not quasi-static or
   * degenerate geometry).
   */
  FT_STATUS_UNOBSERVABLE = -3,
  /**
   * The filter produced a non-finite state or a singular innovation.
   */
  FT_STATUS_DIVERGED = -4,
  FT_STATUS_PANIC = -99,
} FtStatus;

/**
 * Opaque thirteen-state IMU + vision filter.
 */
typedef struct FtFusedEkf FtFusedEkf;

/**
 * Opaque seven-state orientation filter.
 */
typedef struct FtOrientEkf FtOrientEkf;

/**
 * Opaque image-plane region tracker.
 */
typedef struct FtRegionTracker FtRegionTracker;

typedef struct FtQuat {
  double w;
  double x;
  double y;
  double z;
} FtQuat;

typedef struct FtVec3 {
  double x;
  double y;
  double z;
} FtVec3;

typedef struct FtOrientTuning {
  /**
   * Gyro correlation time, s.
   */
  double tau;
  /**
   * IMU sample interval, s.
   */
  double delta;
  /**
   * Angular-rate driving noise variance, rad²/s².
   */
  double d;
  /**
   * Quaternion process noise variance.
   */
  double q_p;
  /**
   * Gyro measurement variance, rad²/s².
   */
  double var_gyro;
  /**
   * Accel/mag quaternion measurement variance.
   */
  double var_q;
} FtOrientTuning;

typedef struct FtOrientEstimate {
  struct FtVec3 omega;
  struct FtQuat q;
  /**
   * Diagonal of the 7×7 covariance, `[ω, q]` order.
   */
  double p_diag[7];
} FtOrientEstimate;

typedef struct FtFusedTuning {
  struct FtOrientTuning orient;
  /**
   * Frame interval, s.
   */
  double delta_i;
  /**
   * Constant-velocity process noise scale.
   */
  double k;
  double var_q_vision;
  /**
   * m²
   */
  double var_t_vision;
  /**
   * Occlusion threshold on the vision/estimate position gap, m.
   */
  double occlusion_t;
  /**
   * Multiplier on the IMU quaternion variance while occluded.
   */
  double occl_imu_var_factor;
  bool reacquire_jump;
  uint32_t exit_hysteresis;
  /**
   * Initial velocity variance, m²/s².
   */
  double init_var_v;
} FtFusedTuning;

/**
 * One frame of input to the fused filter.
 */
typedef struct FtFusedMeasurement {
  /**
   * Gyro rate, rad/s.
   */
  struct FtVec3 omega_b;
  /**
   * IMU-derived orientation used in normal tracking.
   */
  struct FtQuat q_sb;
  /**
   * Vision-derived orientation.
   */
  struct FtQuat q_sbv;
  /**
   * Vision-derived global position, m.
   */
  struct FtVec3 t_o;
  bool vision_valid;
  /**
   * When set, `q_imu` replaces the state quaternion on entering occlusion.
   */
  bool has_q_imu;
  struct FtQuat q_imu;
} FtFusedMeasurement;

typedef struct FtFusedEstimate {
  struct FtVec3 omega;
  struct FtQuat q;
  struct FtVec3 t;
  struct FtVec3 v;
  /**
   * Diagonal of the 13×13 covariance, `[ω, q, t, v]` order.
   */
  double p_diag[13];
  /**
   * Tracking mode after this frame.
   */
  bool occluded;
  /**
   * Whether this frame was processed by the occluded branch.
   */
  bool occluded_branch;
  /**
   * Smallest eigenvalue of the innovation covariance; NaN when no update ran.
   */
  double innovation_min_eig;
} FtFusedEstimate;

typedef struct FtRegionTuning {
  /**
   * Detection noise, px.
   */
  double meas_sigma;
  /**
   * White-acceleration process noise, px/s².
   */
  double accel_sigma;
} FtRegionTuning;

typedef struct FtRegionEstimate {
  double cx;
  double cy;
  double vx;
  double vy;
  /**
   * Diagonal of the 4×4 covariance, `[cx, cy, vx, vy]` order.
   */
  double p_diag[4];
} FtRegionEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null if none. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *ft_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ft_version(void);

/**
 * Hamilton product `a ⊗ b`.
 *
 * # Safety
 * `a` and `b` must be readable and `out` writable, or null.
 */
enum FtStatus ft_quat_multiply(const struct FtQuat *a, const struct FtQuat *b, struct FtQuat *out);

/**
 * Unit quaternion in the direction of `q`.
 *
 * # Safety
 * `q` must be readable and `out` writable, or null.
 */
enum FtStatus ft_quat_normalize(const struct FtQuat *q, struct FtQuat *out);

/**
 * Rotation angle between two orientations, rad, in `[0, π]`.
 *
 * # Safety
 * `a` and `b` must be readable and `out` writable, or null.
 */
enum FtStatus ft_quat_angular_distance(const struct FtQuat *a, const struct FtQuat *b, double *out);

/**
 * Body → global orientation from one accelerometer (m/s²) and magnetometer
 * sample, against the default z-up world reference.
 *
 * # Safety
 * `accel` and `mag` must be readable and `out` writable, or null.
 */
enum FtStatus ft_accel_mag_orientation(const struct FtVec3 *accel,
                                       const struct FtVec3 *mag,
                                       struct FtQuat *out);

/**
 * # Safety
 * `out` must be writable or null.
 */
enum FtStatus ft_orient_default_tuning(struct FtOrientTuning *out);

/**
 * Creates an orientation filter. A null `tuning` selects the defaults.
 *
 * # Safety
 * `tuning` must be readable or null; `out` must be writable or null.
 */
enum FtStatus ft_orient_new(const struct FtOrientTuning *tuning, struct FtOrientEkf **out);

/**
 * # Safety
 * `handle` must come from [`ft_orient_new`] and not be used afterwards.
 */
void ft_orient_free(struct FtOrientEkf *handle);

/**
 * Feeds one IMU sample: gyro rate and accel/mag orientation. The first call
 * initializes the filter from the measurement.
 *
 * # Safety
 * `handle` must be a live handle; `gyro` and `q_sb` readable; `out` writable
 * or null (then the estimate is not returned).
 */
enum FtStatus ft_orient_update(struct FtOrientEkf *handle,
                               const struct FtVec3 *gyro,
                               const struct FtQuat *q_sb,
                               struct FtOrientEstimate *out);

/**
 * Current estimate, or [`FtStatus::NotReady`] before the first update.
 *
 * # Safety
 * `handle` must be a live handle and `out` writable, or null.
 */
enum FtStatus ft_orient_state(const struct FtOrientEkf *handle, struct FtOrientEstimate *out);

/**
 * # Safety
 * `out` must be writable or null.
 */
enum FtStatus ft_fused_default_tuning(struct FtFusedTuning *out);

/**
 * Creates a fused filter. A null `tuning` selects the defaults.
 *
 * # Safety
 * `tuning` must be readable or null; `out` must be writable or null.
 */
enum FtStatus ft_fused_new(const struct FtFusedTuning *tuning, struct FtFusedEkf **out);

/**
 * # Safety
 * `handle` must come from [`ft_fused_new`] and not be used afterwards.
 */
void ft_fused_free(struct FtFusedEkf *handle);

/**
 * Processes one frame. Returns [`FtStatus::NotReady`] while waiting for the
 * first valid vision frame.
 *
 * # Safety
 * `handle` must be a live handle; `z` readable; `out` writable or null.
 */
enum FtStatus ft_fused_update(struct FtFusedEkf *handle,
                              const struct FtFusedMeasurement *z,
                              struct FtFusedEstimate *out);

/**
 * Current estimate, or [`FtStatus::NotReady`] before initialization. The
 * per-frame fields `occluded_branch` and `innovation_min_eig` are reset.
 *
 * # Safety
 * `handle` must be a live handle and `out` writable, or null.
 */
enum FtStatus ft_fused_state(const struct FtFusedEkf *handle, struct FtFusedEstimate *out);

/**
 * # Safety
 * `out` must be writable or null.
 */
enum FtStatus ft_region_default_tuning(struct FtRegionTuning *out);

/**
 * Creates a region tracker. A null `tuning` selects the defaults.
 *
 * # Safety
 * `tuning` must be readable or null; `out` must be writable or null.
 */
enum FtStatus ft_region_new(const struct FtRegionTuning *tuning, struct FtRegionTracker **out);

/**
 * # Safety
 * `handle` must come from [`ft_region_new`] and not be used afterwards.
 */
void ft_region_free(struct FtRegionTracker *handle);

/**
 * Advances the tracker by `dt` seconds. With `valid` false the detection is
 * ignored and the track only predicts. Returns [`FtStatus::NotReady`] until
 * two detections have started the track.
 *
 * # Safety
 * `handle` must be a live handle; `out` writable or null.
 */
enum FtStatus ft_region_step(struct FtRegionTracker *handle,
                             double cx,
                             double cy,
                             bool valid,
                             double dt,
                             struct FtRegionEstimate *out);

/**
 * Current estimate, or [`FtStatus::NotReady`] before the track has started.
 *
 * # Safety
 * `handle` must be a live handle and `out` writable, or null.
 */
enum FtStatus ft_region_state(const struct FtRegionTracker *handle, struct FtRegionEstimate *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FUSETRACK_H */
