//! Scenario runner: feeds a packed sensor log through a filter stack and
//! records one row per frame.
//!
//! Per IMU sample the stream passes the Butterworth prefilter, then the
//! accel-mag orientation (the previous one is held when it fails), then the
//! orientation EKF at the IMU rate and the complementary filter. Per frame
//! the fused filter takes the latest prefiltered gyro, the latest accel-mag
//! and orientation-EKF quaternions, and the vision pose converted to the
//! global frame. A frame without IMU samples reuses the previous values.

use std::fmt::Write as _;

use nalgebra::{Vector2, Vector3};

use crate::attitude::{accel_mag_orientation, ComplementaryFilter, ImuPrefilter, ImuSample};
use crate::config::{FilterKind, ScenarioConfig, VisionMode};
use crate::ekf_fused::{FusedEkf, FusedMeasurement14, TrackingMode};
use crate::ekf_orient::{OrientMeasurement7, OrientationEkf};
use crate::error::{Error, Result};
use crate::frames::{global_to_vision, vision_position_to_global, vision_to_global, CalibrationSet, FrameId, FrameTransform};
use crate::quat::Quaternion;
use crate::region::{Detection2D, RegionStep, RegionTracker};
use crate::sim::{format_g9, simulate, FrameRecord, Scene, SensorLog, TruthSample};
use crate::vision::{posit_init, refine_pose, track_frame, PoseCO};

/// Mode column value for frames before the filter has initialized.
pub const MODE_INIT: &str = "init";

/// One output row of a pose run. Missing values are NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    pub t: f64,
    /// `normal`, `occluded` or `init`.
    pub mode: String,
    pub gt_q: Quaternion,
    pub gt_t: Vector3<f64>,
    /// Raw (unfiltered) accel-mag orientation of the latest sample.
    pub q_sb: Quaternion,
    /// Vision orientation of the body in the global frame.
    pub q_vis: Quaternion,
    /// Vision position of the body in the global frame, m.
    pub t_vis: Vector3<f64>,
    pub valid: bool,
    pub est_q: Quaternion,
    pub est_t: Vector3<f64>,
    pub est_v: Vector3<f64>,
    /// Covariance diagonal in the fused layout `[ω, q, t, v]`.
    pub p_diag: [f64; 13],
}

/// One output row of a region run, in pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionRow {
    pub t: f64,
    pub valid: bool,
    pub det: Vector2<f64>,
    pub gt: Vector2<f64>,
    pub est: Vector2<f64>,
    pub est_v: Vector2<f64>,
    pub p_diag: [f64; 4],
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunRows {
    Pose(Vec<RunRow>),
    Region(Vec<RegionRow>),
}

/// Rows produced by a run. When the filter fails, `failure` holds the
/// error and `rows` stops at the failing frame.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub filter: FilterKind,
    pub rows: RunRows,
    pub failure: Option<Error>,
}

const NAN3: Vector3<f64> = Vector3::new(f64::NAN, f64::NAN, f64::NAN);

fn nan_q() -> Quaternion {
    Quaternion::new(f64::NAN, f64::NAN, f64::NAN, f64::NAN)
}

pub const POSE_HEADER: &str = "t,mode,gt_qw,gt_qx,gt_qy,gt_qz,gt_tx,gt_ty,gt_tz,\
q_sb_w,q_sb_x,q_sb_y,q_sb_z,q_vis_w,q_vis_x,q_vis_y,q_vis_z,t_vis_x,t_vis_y,t_vis_z,valid,\
est_qw,est_qx,est_qy,est_qz,est_tx,est_ty,est_tz,est_vx,est_vy,est_vz,\
P0,P1,P2,P3,P4,P5,P6,P7,P8,P9,P10,P11,P12";

pub const REGION_HEADER: &str = "t,valid,det_cx,det_cy,gt_cx,gt_cy,est_cx,est_cy,est_vx,est_vy,P0,P1,P2,P3";

impl RunOutput {
    pub fn to_csv(&self) -> String {
        let g = format_g9;
        let mut s = String::new();
        match &self.rows {
            RunRows::Pose(rows) => {
                s.push_str(POSE_HEADER);
                s.push('\n');
                for r in rows {
                    let mut f: Vec<String> = vec![g(r.t), r.mode.clone()];
                    let q = |q: &Quaternion| [q.w, q.x, q.y, q.z].map(g);
                    let v = |v: &Vector3<f64>| [v.x, v.y, v.z].map(g);
                    f.extend(q(&r.gt_q));
                    f.extend(v(&r.gt_t));
                    f.extend(q(&r.q_sb));
                    f.extend(q(&r.q_vis));
                    f.extend(v(&r.t_vis));
                    f.push(u8::from(r.valid).to_string());
                    f.extend(q(&r.est_q));
                    f.extend(v(&r.est_t));
                    f.extend(v(&r.est_v));
                    f.extend(r.p_diag.map(g));
                    let _ = writeln!(s, "{}", f.join(","));
                }
            }
            RunRows::Region(rows) => {
                s.push_str(REGION_HEADER);
                s.push('\n');
                for r in rows {
                    let mut f = vec![g(r.t), u8::from(r.valid).to_string()];
                    for v in [r.det, r.gt, r.est, r.est_v] {
                        f.extend([v.x, v.y].map(g));
                    }
                    f.extend(r.p_diag.map(g));
                    let _ = writeln!(s, "{}", f.join(","));
                }
            }
        }
        s
    }
}

/// Simulates the configured scenario and runs `filter` on it.
pub fn run_scenario(cfg: &ScenarioConfig, filter: FilterKind) -> Result<RunOutput> {
    cfg.validate()?;
    let sim = simulate(&cfg.sim, cfg.seed)?;
    run_log(cfg, &sim.log, Some(&sim.truth), filter)
}

/// Runs `filter` over a recorded log. Without `truth` the ground-truth
/// columns are NaN.
pub fn run_log(cfg: &ScenarioConfig, log: &SensorLog, truth: Option<&[TruthSample]>, filter: FilterKind) -> Result<RunOutput> {
    cfg.validate()?;
    if let Some(tr) = truth {
        if tr.len() != log.frames.len() {
            return Err(Error::config("truth", format!("{} truth samples for {} frames", tr.len(), log.frames.len())));
        }
    }
    if filter == FilterKind::Region {
        return Ok(run_region(cfg, log, truth));
    }
    if cfg.vision.mode == VisionMode::Correspondences && log.frames.iter().any(|f| f.vision.valid && f.vision.correspondences.is_empty()) {
        return Err(Error::config("vision.mode", "correspondences mode needs a simulated run; the log has no point data"));
    }
    let mut runner = PoseRunner::new(cfg, filter)?;
    let mut rows = Vec::with_capacity(log.frames.len());
    for (k, frame) in log.frames.iter().enumerate() {
        match runner.step(frame, truth.map(|tr| &tr[k])) {
            Ok(row) => rows.push(row),
            Err(e) => return Ok(RunOutput { filter, rows: RunRows::Pose(rows), failure: Some(e) }),
        }
    }
    Ok(RunOutput { filter, rows: RunRows::Pose(rows), failure: None })
}

/// The per-IMU-sample part of the pipeline.
struct ImuFront {
    prefilter: ImuPrefilter,
    orient: OrientationEkf,
    comp: ComplementaryFilter,
    world: crate::attitude::WorldReference,
    imu_dt: f64,
    gyro: Option<Vector3<f64>>,
    q_am: Option<Quaternion>,
    q_raw: Option<Quaternion>,
}

impl ImuFront {
    fn push(&mut self, raw: &ImuSample) -> Result<()> {
        let s = self.prefilter.process(raw);
        if let Ok(q) = accel_mag_orientation(&s.accel, &s.mag, &self.world) {
            self.q_am = Some(q);
        }
        if let Ok(q) = accel_mag_orientation(&raw.accel, &raw.mag, &self.world) {
            self.q_raw = Some(q);
        }
        self.gyro = Some(s.gyro);
        let Some(q_am) = self.q_am else { return Ok(()) };
        self.orient.update(&OrientMeasurement7 { omega_b: s.gyro, q_sb: q_am })?;
        self.comp.update(&s.gyro, &q_am, self.imu_dt);
        Ok(())
    }
}

/// Frame-by-frame pose pipeline behind [`run_log`].
pub struct PoseRunner<'a> {
    cfg: &'a ScenarioConfig,
    filter: FilterKind,
    calib: CalibrationSet,
    front: ImuFront,
    fused: FusedEkf,
    tracker_pose: Option<PoseCO>,
    innovation_min_eig: Option<f64>,
}

impl<'a> PoseRunner<'a> {
    pub fn new(cfg: &'a ScenarioConfig, filter: FilterKind) -> Result<Self> {
        if filter == FilterKind::Region {
            return Err(Error::config("filter", "the region tracker has no pose pipeline"));
        }
        let scene = &cfg.sim.scene;
        let front = ImuFront {
            prefilter: ImuPrefilter::new(cfg.attitude.cutoff_hz, 1.0 / cfg.sim.imu_dt, cfg.attitude.prefilter)?,
            orient: OrientationEkf::new(cfg.ekf.orient),
            comp: ComplementaryFilter::new(cfg.attitude.alpha),
            world: scene.world,
            imu_dt: cfg.sim.imu_dt,
            gyro: None,
            q_am: None,
            q_raw: None,
        };
        Ok(Self {
            cfg,
            filter,
            calib: CalibrationSet::new(scene.r_cb, Some(scene.r_go)),
            front,
            fused: FusedEkf::new(cfg.ekf),
            tracker_pose: None,
            innovation_min_eig: None,
        })
    }

    fn scene(&self) -> &Scene {
        &self.cfg.sim.scene
    }

    /// Vision pose of this frame, from the measurement or recovered from
    /// the correspondences.
    fn vision_pose(&mut self, frame: &FrameRecord) -> Option<PoseCO> {
        let v = &frame.vision;
        if !v.valid {
            return None;
        }
        match self.cfg.vision.mode {
            VisionMode::Pose => v.pose(),
            VisionMode::Correspondences => {
                let k = &self.scene().camera;
                let pose = match &self.tracker_pose {
                    Some(prev) => track_frame(prev, &v.correspondences, k, self.cfg.vision.dropout_rms_px),
                    None => posit_init(&v.correspondences, k).and_then(|p| refine_pose(&v.correspondences, k, &p)),
                };
                self.tracker_pose = pose.ok();
                self.tracker_pose
            }
        }
    }

    /// Reseeds the frame-to-frame tracker from the filter while occluded so
    /// the next clear frame starts from the filter's pose.
    fn reseed_tracker(&mut self) -> Result<()> {
        if self.cfg.vision.mode != VisionMode::Correspondences || self.fused.mode() != TrackingMode::Occluded {
            return Ok(());
        }
        if let Some(x) = self.fused.state() {
            let r_gb = FrameTransform::from_quaternion(&x.q, FrameId::Body, FrameId::Global);
            let (r_co, t_co) = global_to_vision(&r_gb, &x.t, &self.calib)?;
            self.tracker_pose = Some(PoseCO::new(r_co.rotation, t_co));
        }
        Ok(())
    }

    /// The fused filter. It is only stepped for `FilterKind::Fused`.
    pub fn fused(&self) -> &FusedEkf {
        &self.fused
    }

    /// Smallest eigenvalue of the innovation covariance of the last fused
    /// update, if one ran.
    pub fn innovation_min_eig(&self) -> Option<f64> {
        self.innovation_min_eig
    }

    pub fn step(&mut self, frame: &FrameRecord, truth: Option<&TruthSample>) -> Result<RunRow> {
        for s in &frame.imu {
            self.front.push(s)?;
        }
        self.reseed_tracker()?;
        let pose = self.vision_pose(frame);
        let (q_vis, t_vis) = match &pose {
            Some(p) => {
                let r_co = p.frame_transform();
                (vision_to_global(&r_co, &self.calib)?.to_quaternion()?, vision_position_to_global(&r_co, &p.translation, &self.calib)?)
            }
            None => (nan_q(), NAN3),
        };
        let mut row = RunRow {
            t: frame.t,
            mode: MODE_INIT.into(),
            gt_q: truth.map_or_else(nan_q, |s| s.q),
            gt_t: truth.map_or(NAN3, |s| s.position),
            q_sb: self.front.q_raw.unwrap_or_else(nan_q),
            q_vis,
            t_vis,
            valid: pose.is_some(),
            est_q: nan_q(),
            est_t: NAN3,
            est_v: NAN3,
            p_diag: [f64::NAN; 13],
        };
        match self.filter {
            FilterKind::Orient => {
                if let Some(x) = self.front.orient.state() {
                    row.mode = TrackingMode::Normal.as_str().into();
                    row.est_q = x.q;
                    for i in 0..7 {
                        row.p_diag[i] = x.p[(i, i)];
                    }
                }
            }
            FilterKind::Complementary => {
                if let Some(q) = self.front.comp.estimate() {
                    row.mode = TrackingMode::Normal.as_str().into();
                    row.est_q = q;
                }
            }
            FilterKind::Fused => {
                let (Some(gyro), Some(q_am)) = (self.front.gyro, self.front.q_am) else {
                    return Ok(row);
                };
                let z = FusedMeasurement14 {
                    omega_b: gyro,
                    q_sb: q_am,
                    q_sbv: if row.valid { q_vis } else { q_am },
                    t_o: if row.valid { t_vis } else { Vector3::zeros() },
                    vision_valid: row.valid,
                    q_imu: self.front.orient.state().map(|x| x.q),
                };
                if let Some(report) = self.fused.update(&z)? {
                    self.innovation_min_eig = report.innovation_min_eig;
                    let x = &report.state;
                    if !x.is_finite() {
                        return Err(Error::NonFinite { stage: "fused state" });
                    }
                    row.mode = report.decision.branch.as_str().into();
                    row.est_q = x.q;
                    row.est_t = x.t;
                    row.est_v = x.v;
                    for i in 0..13 {
                        row.p_diag[i] = x.p[(i, i)];
                    }
                }
            }
            FilterKind::Region => unreachable!("region runs use run_region"),
        }
        Ok(row)
    }
}

/// Centroid of the noise-free projected model, or NaN when not visible.
fn true_centroid(scene: &Scene, truth: &TruthSample) -> Vector2<f64> {
    let pose = scene.camera_pose(&truth.q, &truth.position);
    let pts: Option<Vec<Vector2<f64>>> = scene.model.vertices.iter().map(|v| crate::vision::project(&pose, v, &scene.camera).ok()).collect();
    match pts {
        Some(p) if !p.is_empty() => p.iter().sum::<Vector2<f64>>() / p.len() as f64,
        _ => Vector2::repeat(f64::NAN),
    }
}

fn run_region(cfg: &ScenarioConfig, log: &SensorLog, truth: Option<&[TruthSample]>) -> RunOutput {
    let mut tracker = RegionTracker::new(cfg.region);
    let mut rows = Vec::with_capacity(log.frames.len());
    let mut prev_t: Option<f64> = None;
    for (k, f) in log.frames.iter().enumerate() {
        let dt = prev_t.map_or(cfg.sim.frame_dt, |p| f.t - p);
        prev_t = Some(f.t);
        let det: Detection2D = f.vision.detection;
        let step = tracker.step(&det, dt);
        let nan2 = Vector2::repeat(f64::NAN);
        let mut row = RegionRow {
            t: f.t,
            valid: det.valid,
            det: if det.valid { Vector2::new(det.cx, det.cy) } else { nan2 },
            gt: truth.map_or(nan2, |tr| true_centroid(&cfg.sim.scene, &tr[k])),
            est: nan2,
            est_v: nan2,
            p_diag: [f64::NAN; 4],
        };
        if !matches!(step, RegionStep::Initializing) {
            if let Some(s) = tracker.state() {
                row.est = Vector2::new(s.cx, s.cy);
                row.est_v = Vector2::new(s.vx, s.vy);
                row.p_diag = [s.p[(0, 0)], s.p[(1, 1)], s.p[(2, 2)], s.p[(3, 3)]];
            }
        }
        rows.push(row);
    }
    RunOutput { filter: FilterKind::Region, rows: RunRows::Region(rows), failure: None }
}
