//! Thirteen-state IMU + vision EKF with occlusion handling.
//!
//! State layout is `[ω(3) q(4) t(3) v(3)]`: the orientation states of
//! [`crate::ekf_orient`] followed by a constant-velocity position model. The
//! filter steps once per video frame. In `Normal` mode it fuses the stacked
//! 14-dimensional measurement (gyro, accel/mag quaternion, vision quaternion,
//! vision position). When the vision position jumps away from the estimate
//! the filter enters `Occluded` mode: the quaternion is taken from the
//! IMU-only orientation filter, only the seven IMU rows are used, and position
//! coasts on constant velocity.
//!
//! The process, noise and measurement models never couple the orientation
//! block with the translation block, so `P` stays exactly block-diagonal and
//! position is untouched by IMU-only updates.

use nalgebra::{DMatrix, SMatrix, SVector, Vector3};

use crate::ekf_orient::{build_f_q, build_q_q, build_r_q, initial_covariance, process_map, OrientState7, OrientTuning};
use crate::error::{Error, Result};
use crate::kalman::{joseph_update, min_eigenvalue, symmetrize};
use crate::quat::Quaternion;

pub type Vector13 = SVector<f64, 13>;
pub type Matrix13 = SMatrix<f64, 13, 13>;

/// Offsets into the state vector.
pub const OMEGA: usize = 0;
pub const QUAT: usize = 3;
pub const POS: usize = 7;
pub const VEL: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusedTuning {
    /// Orientation-block tuning. Its `delta` is the IMU interval used by the
    /// stand-alone orientation filter; the fused filter propagates the
    /// orientation block over `delta_i`.
    pub orient: OrientTuning,
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
    /// While occluded, also leave occlusion when the vision position jumps
    /// by more than `occlusion_t` from its previous value.
    pub reacquire_jump: bool,
    /// Extra consecutive clear frames required before leaving occlusion.
    pub exit_hysteresis: usize,
    /// Initial velocity variance, m²/s².
    pub init_var_v: f64,
}

impl Default for FusedTuning {
    fn default() -> Self {
        Self {
            orient: OrientTuning::default(),
            delta_i: 0.0333,
            k: 250.0,
            var_q_vision: 0.0001,
            var_t_vision: 0.001,
            occlusion_t: 0.3,
            occl_imu_var_factor: 0.1,
            reacquire_jump: true,
            exit_hysteresis: 0,
            init_var_v: 1.0,
        }
    }
}

impl FusedTuning {
    pub fn validate(&self) -> Result<()> {
        self.orient.validate()?;
        let positive = [
            ("ekf.delta_I", self.delta_i),
            ("ekf.var_q_vision", self.var_q_vision),
            ("ekf.var_t_vision", self.var_t_vision),
            ("ekf.occlusion_T", self.occlusion_t),
            ("ekf.occl_imu_var_factor", self.occl_imu_var_factor),
            ("ekf.init_var_v", self.init_var_v),
        ];
        for (key, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config { key: key.into(), msg: format!("must be positive and finite, got {v}") });
            }
        }
        if !(self.k >= 0.0 && self.k.is_finite()) {
            return Err(Error::Config { key: "ekf.K".into(), msg: format!("must be non-negative, got {}", self.k) });
        }
        Ok(())
    }

    /// Orientation tuning with the propagation interval set to the frame
    /// interval.
    pub fn orient_at_frame_rate(&self) -> OrientTuning {
        OrientTuning { delta: self.delta_i, ..self.orient }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusedState13 {
    pub omega: Vector3<f64>,
    pub q: Quaternion,
    pub t: Vector3<f64>,
    pub v: Vector3<f64>,
    pub p: Matrix13,
}

impl FusedState13 {
    pub fn to_vector(&self) -> Vector13 {
        let mut x = Vector13::zeros();
        x.fixed_rows_mut::<3>(OMEGA).copy_from(&self.omega);
        x.fixed_rows_mut::<4>(QUAT).copy_from(&self.q.to_vector4());
        x.fixed_rows_mut::<3>(POS).copy_from(&self.t);
        x.fixed_rows_mut::<3>(VEL).copy_from(&self.v);
        x
    }

    fn with_vector(x: &Vector13, p: Matrix13) -> Self {
        Self {
            omega: x.fixed_rows::<3>(OMEGA).into_owned(),
            q: Quaternion::from_vector4(&x.fixed_rows::<4>(QUAT).into_owned()),
            t: x.fixed_rows::<3>(POS).into_owned(),
            v: x.fixed_rows::<3>(VEL).into_owned(),
            p,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_vector().iter().chain(self.p.iter()).all(|v| v.is_finite())
    }

    fn orientation(&self) -> OrientState7 {
        OrientState7 { omega: self.omega, q: self.q, p: self.p.fixed_view::<7, 7>(0, 0).into_owned() }
    }

    /// Initial state from the first frame with a valid vision pose.
    pub fn from_measurement(z: &FusedMeasurement14, tuning: &FusedTuning) -> Result<Self> {
        if !z.vision_valid {
            return Err(Error::InvalidDetection);
        }
        let mut p = Matrix13::zeros();
        p.fixed_view_mut::<7, 7>(0, 0).copy_from(&initial_covariance());
        for i in 0..3 {
            p[(POS + i, POS + i)] = tuning.var_t_vision;
            p[(VEL + i, VEL + i)] = tuning.init_var_v;
        }
        Ok(Self { omega: z.omega_b, q: z.q_sbv, t: z.t_o, v: Vector3::zeros(), p })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusedMeasurement14 {
    pub omega_b: Vector3<f64>,
    /// Accel/mag orientation.
    pub q_sb: Quaternion,
    /// Vision orientation, already in the global frame.
    pub q_sbv: Quaternion,
    /// Vision position of the body in the global frame, m.
    pub t_o: Vector3<f64>,
    pub vision_valid: bool,
    /// Output of the IMU-only orientation filter at this frame. Used to
    /// overwrite the quaternion while occluded; `q_sb` is used when absent.
    pub q_imu: Option<Quaternion>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrackingMode {
    Normal,
    Occluded,
}

impl TrackingMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            TrackingMode::Normal => "normal",
            TrackingMode::Occluded => "occluded",
        }
    }
}

/// Per-axis constant-velocity transition with `t' = t + δ_I v`.
pub fn build_f_t(delta_i: f64) -> SMatrix<f64, 6, 6> {
    let mut f = SMatrix::<f64, 6, 6>::identity();
    for i in 0..3 {
        f[(i, 3 + i)] = delta_i;
    }
    f
}

/// `block-diag(F_Q(x), F_T)` with the orientation block taken over `δ_I`.
pub fn build_f_qt(x: &FusedState13, tuning: &FusedTuning) -> Matrix13 {
    let mut f = Matrix13::zeros();
    f.fixed_view_mut::<7, 7>(0, 0).copy_from(&build_f_q(&x.orientation(), &tuning.orient_at_frame_rate()));
    f.fixed_view_mut::<6, 6>(POS, POS).copy_from(&build_f_t(tuning.delta_i));
    f
}

/// Process map before quaternion renormalization.
pub fn fused_process_map(x: &Vector13, tuning: &FusedTuning) -> Vector13 {
    let mut out = Vector13::zeros();
    let orient = process_map(&x.fixed_rows::<7>(0).into_owned(), &tuning.orient_at_frame_rate());
    out.fixed_rows_mut::<7>(0).copy_from(&orient);
    for i in 0..3 {
        out[POS + i] = x[POS + i] + tuning.delta_i * x[VEL + i];
        out[VEL + i] = x[VEL + i];
    }
    out
}

/// `K ·` white-acceleration noise over `δ_I` (per axis
/// `[[δ⁴/4, δ³/2], [δ³/2, δ²]]`).
pub fn build_q_t(tuning: &FusedTuning) -> SMatrix<f64, 6, 6> {
    let d = tuning.delta_i;
    let (a, b, c) = (d.powi(4) / 4.0 * tuning.k, d.powi(3) / 2.0 * tuning.k, d * d * tuning.k);
    let mut q = SMatrix::<f64, 6, 6>::zeros();
    for i in 0..3 {
        q[(i, i)] = a;
        q[(i, 3 + i)] = b;
        q[(3 + i, i)] = b;
        q[(3 + i, 3 + i)] = c;
    }
    q
}

/// `block-diag(Q_Q, K · Q_T)`
pub fn build_q_qt(tuning: &FusedTuning) -> Matrix13 {
    let mut q = Matrix13::zeros();
    q.fixed_view_mut::<7, 7>(0, 0).copy_from(&build_q_q(&tuning.orient_at_frame_rate()));
    q.fixed_view_mut::<6, 6>(POS, POS).copy_from(&build_q_t(tuning));
    q
}

fn r_normal(tuning: &FusedTuning) -> SMatrix<f64, 14, 14> {
    let mut r = SMatrix::<f64, 14, 14>::zeros();
    r.fixed_view_mut::<7, 7>(0, 0).copy_from(&build_r_q(&tuning.orient));
    for i in 7..11 {
        r[(i, i)] = tuning.var_q_vision;
    }
    for i in 11..14 {
        r[(i, i)] = tuning.var_t_vision;
    }
    r
}

fn r_occluded(tuning: &FusedTuning) -> SMatrix<f64, 7, 7> {
    let mut r = build_r_q(&tuning.orient);
    for i in 3..7 {
        r[(i, i)] *= tuning.occl_imu_var_factor;
    }
    r
}

fn h_normal() -> SMatrix<f64, 14, 13> {
    let mut h = SMatrix::<f64, 14, 13>::zeros();
    for i in 0..7 {
        h[(i, i)] = 1.0;
    }
    for i in 0..4 {
        h[(7 + i, QUAT + i)] = 1.0;
    }
    for i in 0..3 {
        h[(11 + i, POS + i)] = 1.0;
    }
    h
}

fn h_occluded() -> SMatrix<f64, 7, 13> {
    let mut h = SMatrix::<f64, 7, 13>::zeros();
    for i in 0..7 {
        h[(i, i)] = 1.0;
    }
    h
}

/// Measurement noise: 14×14 in `Normal`, 7×7 in `Occluded`.
pub fn build_r_qt(tuning: &FusedTuning, mode: TrackingMode) -> DMatrix<f64> {
    match mode {
        TrackingMode::Normal => DMatrix::from_column_slice(14, 14, r_normal(tuning).as_slice()),
        TrackingMode::Occluded => DMatrix::from_column_slice(7, 7, r_occluded(tuning).as_slice()),
    }
}

/// Observation matrix: 14×13 in `Normal`, 7×13 in `Occluded`.
pub fn build_h_qt(mode: TrackingMode) -> DMatrix<f64> {
    match mode {
        TrackingMode::Normal => DMatrix::from_column_slice(14, 13, h_normal().as_slice()),
        TrackingMode::Occluded => DMatrix::from_column_slice(7, 13, h_occluded().as_slice()),
    }
}

/// True when the vision position is farther than `threshold` from the
/// previous position estimate (strict).
pub fn occlusion_detect(t_vision: &Vector3<f64>, t_filter_prev: &Vector3<f64>, threshold: f64) -> bool {
    (t_vision - t_filter_prev).norm() > threshold
}

/// Propagation of state and covariance.
pub fn fused_predict(x: &FusedState13, tuning: &FusedTuning) -> Result<FusedState13> {
    let f = build_f_qt(x, tuning);
    let xv = fused_process_map(&x.to_vector(), tuning);
    let mut pred = FusedState13::with_vector(&xv, symmetrize(&(f * x.p * f.transpose() + build_q_qt(tuning))));
    pred.q = pred.q.normalize().map_err(|_| Error::NonFinite { stage: "fused predict" })?;
    if !pred.is_finite() {
        return Err(Error::NonFinite { stage: "fused predict" });
    }
    Ok(pred)
}

fn check_measurement(z: &FusedMeasurement14) -> Result<()> {
    let imu_ok = z.omega_b.iter().all(|v| v.is_finite()) && z.q_sb.is_finite() && z.q_imu.is_none_or(|q| q.is_finite());
    let vision_ok = !z.vision_valid || (z.q_sbv.is_finite() && z.t_o.iter().all(|v| v.is_finite()));
    if imu_ok && vision_ok {
        Ok(())
    } else {
        Err(Error::NonFinite { stage: "fused measurement" })
    }
}

/// Result of one branch of the filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchOutcome {
    pub state: FusedState13,
    /// Smallest eigenvalue of the innovation covariance `H P Hᵀ + R`.
    pub innovation_min_eig: f64,
}

/// Runs one filter branch. `entering` marks the first occluded step after
/// `Normal`, when the quaternion covariance is reset to its initial value.
pub fn fused_branch(x: &FusedState13, z: &FusedMeasurement14, branch: TrackingMode, entering: bool, tuning: &FusedTuning) -> Result<BranchOutcome> {
    if !x.is_finite() {
        return Err(Error::NonFinite { stage: "fused prior" });
    }
    check_measurement(z)?;
    if branch == TrackingMode::Normal && !z.vision_valid {
        return Err(Error::InvalidDetection);
    }
    let mut prior = *x;
    if branch == TrackingMode::Occluded {
        prior.q = z.q_imu.unwrap_or(z.q_sb).aligned_to(&x.q);
        if entering {
            let p0 = initial_covariance();
            for i in 0..13 {
                for j in QUAT..QUAT + 4 {
                    let v = if (QUAT..QUAT + 4).contains(&i) { p0[(i, j)] } else { 0.0 };
                    prior.p[(i, j)] = v;
                    prior.p[(j, i)] = v;
                }
            }
        }
    }
    let pred = fused_predict(&prior, tuning)?;
    let xv = pred.to_vector();
    let q_imu_meas = z.q_sb.aligned_to(&pred.q).to_vector4();
    let (dx, p, s_min) = match branch {
        TrackingMode::Normal => {
            let mut y = SVector::<f64, 14>::zeros();
            y.fixed_rows_mut::<3>(0).copy_from(&(z.omega_b - pred.omega));
            y.fixed_rows_mut::<4>(3).copy_from(&(q_imu_meas - pred.q.to_vector4()));
            y.fixed_rows_mut::<4>(7).copy_from(&(z.q_sbv.aligned_to(&pred.q).to_vector4() - pred.q.to_vector4()));
            y.fixed_rows_mut::<3>(11).copy_from(&(z.t_o - pred.t));
            let out = joseph_update(&pred.p, &h_normal(), &r_normal(tuning), &y, "fused update")?;
            (out.dx, out.p, min_eigenvalue(&out.s))
        }
        TrackingMode::Occluded => {
            let mut y = SVector::<f64, 7>::zeros();
            y.fixed_rows_mut::<3>(0).copy_from(&(z.omega_b - pred.omega));
            y.fixed_rows_mut::<4>(3).copy_from(&(q_imu_meas - pred.q.to_vector4()));
            let out = joseph_update(&pred.p, &h_occluded(), &r_occluded(tuning), &y, "fused occluded update")?;
            (out.dx, out.p, min_eigenvalue(&out.s))
        }
    };
    let mut post = FusedState13::with_vector(&(xv + dx), p);
    post.q = post.q.normalize().map_err(|_| Error::NonFinite { stage: "fused update" })?;
    if !post.is_finite() {
        return Err(Error::NonFinite { stage: "fused update" });
    }
    Ok(BranchOutcome { state: post, innovation_min_eig: s_min })
}

/// One frame following the detector rule alone: with vision present the mode
/// is `Occluded` iff the detector trips; a frame without vision runs the
/// occluded branch and keeps the mode.
pub fn fused_step(x: &FusedState13, z: &FusedMeasurement14, mode: TrackingMode, tuning: &FusedTuning) -> Result<(FusedState13, TrackingMode)> {
    let next = if z.vision_valid {
        if occlusion_detect(&z.t_o, &x.t, tuning.occlusion_t) {
            TrackingMode::Occluded
        } else {
            TrackingMode::Normal
        }
    } else {
        mode
    };
    let branch = if z.vision_valid { next } else { TrackingMode::Occluded };
    let entering = mode == TrackingMode::Normal && branch == TrackingMode::Occluded;
    Ok((fused_branch(x, z, branch, entering, tuning)?.state, next))
}

/// Mode decision for one frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModeDecision {
    /// Branch to run for this frame.
    pub branch: TrackingMode,
    /// Mode carried to the next frame.
    pub mode: TrackingMode,
    pub entering: bool,
    /// The detector fired on this frame while in `Normal` mode.
    pub tripped: bool,
}

/// Occlusion state machine. Entry follows [`occlusion_detect`]. Exit happens
/// when the detector clears or, with `reacquire_jump`, when the vision
/// position jumps back by more than the threshold; `exit_hysteresis` extra
/// clear frames can be required.
///
/// Frames without vision run the occluded branch without changing the mode.
/// The first valid frame after such a gap is accepted without the detector
/// test, since the coasted estimate it would be compared with may have
/// drifted past the threshold.
#[derive(Debug, Clone, Default)]
pub struct OcclusionMonitor {
    occluded: bool,
    last_vision: Option<Vector3<f64>>,
    reacquired: bool,
    clear_streak: usize,
    in_dropout: bool,
}

impl OcclusionMonitor {
    pub fn mode(&self) -> TrackingMode {
        if self.occluded {
            TrackingMode::Occluded
        } else {
            TrackingMode::Normal
        }
    }

    pub fn decide(&mut self, z: &FusedMeasurement14, t_prev: &Vector3<f64>, tuning: &FusedTuning) -> ModeDecision {
        let was = self.mode();
        if !z.vision_valid {
            let entering = was == TrackingMode::Normal && !self.in_dropout;
            self.in_dropout = true;
            return ModeDecision { branch: TrackingMode::Occluded, mode: was, entering, tripped: false };
        }
        let after_dropout = std::mem::take(&mut self.in_dropout);
        let far = occlusion_detect(&z.t_o, t_prev, tuning.occlusion_t);
        let jumped = self.last_vision.is_some_and(|l| occlusion_detect(&z.t_o, &l, tuning.occlusion_t));
        self.last_vision = Some(z.t_o);
        if !self.occluded {
            if far && !after_dropout {
                self.occluded = true;
                self.reacquired = false;
                self.clear_streak = 0;
                return ModeDecision { branch: TrackingMode::Occluded, mode: TrackingMode::Occluded, entering: true, tripped: true };
            }
            return ModeDecision { branch: TrackingMode::Normal, mode: TrackingMode::Normal, entering: false, tripped: false };
        }
        if tuning.reacquire_jump && jumped {
            self.reacquired = !self.reacquired;
        }
        if !far || self.reacquired {
            self.clear_streak += 1;
        } else {
            self.clear_streak = 0;
        }
        if self.clear_streak > tuning.exit_hysteresis {
            self.occluded = false;
            self.reacquired = false;
            self.clear_streak = 0;
            return ModeDecision { branch: TrackingMode::Normal, mode: TrackingMode::Normal, entering: false, tripped: false };
        }
        ModeDecision { branch: TrackingMode::Occluded, mode: TrackingMode::Occluded, entering: false, tripped: false }
    }
}

/// What happened on one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusedStepReport {
    pub state: FusedState13,
    pub decision: ModeDecision,
    /// `None` on the initializing frame.
    pub innovation_min_eig: Option<f64>,
}

/// Stateful fused filter. It initializes on the first frame with valid
/// vision.
#[derive(Debug, Clone)]
pub struct FusedEkf {
    pub tuning: FusedTuning,
    state: Option<FusedState13>,
    monitor: OcclusionMonitor,
}

impl FusedEkf {
    pub fn new(tuning: FusedTuning) -> Self {
        Self { tuning, state: None, monitor: OcclusionMonitor::default() }
    }

    pub fn state(&self) -> Option<&FusedState13> {
        self.state.as_ref()
    }

    pub fn mode(&self) -> TrackingMode {
        self.monitor.mode()
    }

    /// Returns `None` while waiting for the first valid vision frame.
    pub fn update(&mut self, z: &FusedMeasurement14) -> Result<Option<FusedStepReport>> {
        let Some(x) = self.state else {
            if !z.vision_valid {
                return Ok(None);
            }
            check_measurement(z)?;
            let x0 = FusedState13::from_measurement(z, &self.tuning)?;
            self.state = Some(x0);
            self.monitor.last_vision = Some(z.t_o);
            let decision = ModeDecision { branch: TrackingMode::Normal, mode: TrackingMode::Normal, entering: false, tripped: false };
            return Ok(Some(FusedStepReport { state: x0, decision, innovation_min_eig: None }));
        };
        let decision = self.monitor.decide(z, &x.t, &self.tuning);
        let out = fused_branch(&x, z, decision.branch, decision.entering, &self.tuning)?;
        self.state = Some(out.state);
        Ok(Some(FusedStepReport { state: out.state, decision, innovation_min_eig: Some(out.innovation_min_eig) }))
    }
}
