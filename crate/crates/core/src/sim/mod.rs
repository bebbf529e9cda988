//! Deterministic ground truth and sensor synthesis: a 50 Hz IMU and a 30 fps
//! vision pose stream, packed frame by frame, with optional occlusion windows.
//!
//! The tracked object sits at the global origin. The camera shares the body
//! origin (zero lever arm) and is rotated from the body by `R_CB`. The
//! accelerometer reports specific force, so a level static device reads
//! `(0, 0, +9.81)`.

mod log;
mod trajectory;

pub use log::{format_g9, pack_frames, FrameRecord, SensorLog};
pub use trajectory::{generate_truth, Trajectory, TrajectoryMode, TrajectorySpec, TruthSample, Waypoint};

use nalgebra::{Vector2, Vector3};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::attitude::{ImuSample, WorldReference};
use crate::error::{Error, Result};
use crate::quat::{Quaternion, RotationMatrix};
use crate::region::Detection2D;
use crate::vision::{CameraIntrinsics, Correspondence, PoseCO, WireframeModel, MIN_DEPTH};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    /// rad/s
    pub gyro_sigma: f64,
    /// Constant gyro bias, rad/s.
    pub gyro_bias: Vector3<f64>,
    /// m/s²
    pub accel_sigma: f64,
    /// µT
    pub mag_sigma: f64,
    /// Angle of the random-axis rotation error, rad.
    pub vision_q_sigma: f64,
    /// Per-axis position error of the vision pose, m.
    pub vision_t_sigma: f64,
    /// Per-axis image point error, px.
    pub detection_sigma: f64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            gyro_sigma: 0.1f64.sqrt(),
            gyro_bias: Vector3::zeros(),
            accel_sigma: 0.15,
            mag_sigma: 0.5,
            vision_q_sigma: 0.02,
            vision_t_sigma: 0.001f64.sqrt(),
            detection_sigma: 1.0,
        }
    }
}

impl NoiseSpec {
    pub fn zero() -> Self {
        Self { gyro_sigma: 0.0, gyro_bias: Vector3::zeros(), accel_sigma: 0.0, mag_sigma: 0.0, vision_q_sigma: 0.0, vision_t_sigma: 0.0, detection_sigma: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        for (key, v) in [
            ("noise.gyro_sigma", self.gyro_sigma),
            ("noise.accel_sigma", self.accel_sigma),
            ("noise.mag_sigma", self.mag_sigma),
            ("noise.vision_q_sigma", self.vision_q_sigma),
            ("noise.vision_t_sigma", self.vision_t_sigma),
            ("noise.detection_sigma", self.detection_sigma),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config { key: key.into(), msg: format!("must be a non-negative number, got {v}") });
            }
        }
        if !self.gyro_bias.iter().all(|v| v.is_finite()) {
            return Err(Error::Config { key: "noise.gyro_bias".into(), msg: "must be finite".into() });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Corruption {
    /// No vision measurement.
    Dropout,
    /// Vision position shifted by a fixed global-frame vector, m.
    Offset(Vector3<f64>),
}

/// Vision corruption over the half-open interval `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OcclusionWindow {
    pub start: f64,
    pub end: f64,
    pub corruption: Corruption,
}

impl OcclusionWindow {
    pub fn contains(&self, t: f64) -> bool {
        t >= self.start && t < self.end
    }
}

/// Static geometry shared by every frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub model: WireframeModel,
    pub camera: CameraIntrinsics,
    /// Body → camera rotation.
    pub r_cb: RotationMatrix,
    /// Object → global rotation.
    pub r_go: RotationMatrix,
    pub world: WorldReference,
}

/// Camera x-right, y-down, z-optical on a body that is x-forward, y-left,
/// z-up.
pub fn default_r_cb() -> RotationMatrix {
    RotationMatrix::from_row_slice(&[0.0, -1.0, 0.0, 0.0, 0.0, -1.0, 1.0, 0.0, 0.0], 1e-12).expect("constant rotation")
}

impl Default for Scene {
    fn default() -> Self {
        Self {
            model: WireframeModel::cuboid(&Vector3::new(0.3, 0.2, 0.15)),
            camera: CameraIntrinsics::default(),
            r_cb: default_r_cb(),
            r_go: RotationMatrix::identity(),
            world: WorldReference::default(),
        }
    }
}

impl Scene {
    /// True object pose in the camera for a body at `position` with attitude
    /// `q_gb`.
    pub fn camera_pose(&self, q_gb: &Quaternion, position: &Vector3<f64>) -> PoseCO {
        let r_bg = q_gb.to_rotation().transpose();
        let r_co = self.r_cb * r_bg * self.r_go;
        PoseCO::new(r_co, -(self.r_cb.apply(&r_bg.apply(position))))
    }
}

fn gaussian3(rng: &mut impl Rng, sigma: f64) -> Vector3<f64> {
    let mut n = || -> f64 { rng.sample(StandardNormal) };
    Vector3::new(n(), n(), n()) * sigma
}

/// One IMU reading for the given truth.
pub fn synthesize_imu(truth: &TruthSample, noise: &NoiseSpec, world: &WorldReference, rng: &mut impl Rng) -> ImuSample {
    let r_bg = truth.q.to_rotation().transpose();
    let gyro = truth.omega + noise.gyro_bias + gaussian3(rng, noise.gyro_sigma);
    let accel = r_bg.apply(&(truth.accel + world.gravity_g)) + gaussian3(rng, noise.accel_sigma);
    let mag = r_bg.apply(&world.mag_field_g) + gaussian3(rng, noise.mag_sigma);
    ImuSample { t: truth.t, gyro, accel, mag }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VisionMeasurement {
    pub valid: bool,
    /// Object → camera rotation.
    pub q_co: Quaternion,
    /// Object origin in the camera frame, m.
    pub t_co: Vector3<f64>,
    /// Centroid of the projected model, px.
    pub detection: Detection2D,
    pub correspondences: Vec<Correspondence>,
}

impl VisionMeasurement {
    pub fn dropout() -> Self {
        Self {
            valid: false,
            q_co: Quaternion::new(f64::NAN, f64::NAN, f64::NAN, f64::NAN),
            t_co: Vector3::repeat(f64::NAN),
            detection: Detection2D::missing(),
            correspondences: Vec::new(),
        }
    }

    pub fn pose(&self) -> Option<PoseCO> {
        self.valid.then(|| PoseCO::new(self.q_co.to_rotation(), self.t_co))
    }
}

/// Model vertices projected at `pose`, or `None` when any vertex is behind
/// the camera or outside the image.
fn visible_projection(pose: &PoseCO, scene: &Scene) -> Option<Vec<Vector2<f64>>> {
    scene
        .model
        .vertices
        .iter()
        .map(|v| {
            if pose.transform(v).z <= MIN_DEPTH {
                return None;
            }
            crate::vision::project(pose, v, &scene.camera).ok().filter(|p| scene.camera.contains(p))
        })
        .collect()
}

/// Vision measurement for the given truth.
///
/// Pose noise is a random-axis rotation of angle `N(0, σ_q)` applied to
/// `R_CO`, and a per-axis `N(0, σ_t)` error on the body position in the
/// global frame; `t_CO` is built so that converting it back with the noisy
/// rotation recovers exactly that noisy position. An offset window shifts
/// the apparent body position, affecting pose, detection and
/// correspondences alike.
pub fn synthesize_vision(truth: &TruthSample, scene: &Scene, noise: &NoiseSpec, windows: &[OcclusionWindow], rng: &mut impl Rng) -> VisionMeasurement {
    let mut offset = Vector3::zeros();
    for w in windows.iter().filter(|w| w.contains(truth.t)) {
        match w.corruption {
            Corruption::Dropout => return VisionMeasurement::dropout(),
            Corruption::Offset(d) => offset += d,
        }
    }
    let apparent = truth.position + offset;
    let true_pose = scene.camera_pose(&truth.q, &apparent);
    let Some(projected) = visible_projection(&true_pose, scene) else {
        return VisionMeasurement::dropout();
    };

    let axis: Vector3<f64> = gaussian3(rng, 1.0);
    let angle: f64 = rng.sample::<f64, _>(StandardNormal) * noise.vision_q_sigma;
    let d_rot = if axis.norm() > 0.0 { Quaternion::from_axis_angle(&axis, angle).unwrap_or(Quaternion::IDENTITY) } else { Quaternion::IDENTITY };
    let q_true = true_pose.rotation.to_quaternion().unwrap_or(Quaternion::IDENTITY);
    let q_co = d_rot.multiply(&q_true).normalize().unwrap_or(q_true);
    let noisy_position = apparent + gaussian3(rng, noise.vision_t_sigma);
    // t_CO = −R_CO · R_GOᵀ · p
    let t_co = -(q_co.to_rotation().apply(&scene.r_go.transpose().apply(&noisy_position)));

    let pixel = Normal::new(0.0, noise.detection_sigma.max(0.0)).unwrap_or_else(|_| Normal::new(0.0, 0.0).expect("zero sigma"));
    let correspondences: Vec<Correspondence> = scene
        .model
        .vertices
        .iter()
        .zip(&projected)
        .map(|(v, p)| Correspondence { p_o: *v, p_i: p + Vector2::new(pixel.sample(rng), pixel.sample(rng)) })
        .collect();
    let centroid = correspondences.iter().map(|c| c.p_i).sum::<Vector2<f64>>() / correspondences.len() as f64;
    VisionMeasurement { valid: true, q_co, t_co, detection: Detection2D::new(centroid.x, centroid.y), correspondences }
}

/// Everything needed to synthesize a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub trajectory: TrajectorySpec,
    pub noise: NoiseSpec,
    pub windows: Vec<OcclusionWindow>,
    pub scene: Scene,
    /// s
    pub imu_dt: f64,
    /// s
    pub frame_dt: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            trajectory: TrajectorySpec::default(),
            noise: NoiseSpec::default(),
            windows: Vec::new(),
            scene: Scene::default(),
            imu_dt: 0.02,
            frame_dt: 0.0333,
        }
    }
}

/// Synthesized sensor streams with the truth at every frame time.
#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    pub log: SensorLog,
    pub truth: Vec<TruthSample>,
}

/// Frame times `k·frame_dt` covering `[0, duration]`.
pub fn frame_times(duration: f64, frame_dt: f64) -> Vec<f64> {
    let n = (duration / frame_dt + 1e-9).floor() as usize;
    (0..=n).map(|k| k as f64 * frame_dt).collect()
}

/// Runs the simulator. The IMU and vision noise come from separate streams
/// of one seeded generator, so each is reproducible on its own.
pub fn simulate(cfg: &SimConfig, seed: u64) -> Result<SimOutput> {
    for (key, v) in [("sim.imu_dt", cfg.imu_dt), ("sim.frame_dt", cfg.frame_dt)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Config { key: key.into(), msg: format!("must be positive, got {v}") });
        }
    }
    cfg.noise.validate()?;
    cfg.scene.world.validate()?;
    for w in &cfg.windows {
        if !(w.start < w.end) {
            return Err(Error::Config { key: "occlusion.windows".into(), msg: format!("window [{}, {}) is empty", w.start, w.end) });
        }
    }
    let trajectory = generate_truth(&cfg.trajectory)?;
    let times = frame_times(trajectory.duration(), cfg.frame_dt);
    let last = *times.last().expect("at least one frame");

    let mut imu_rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vision_rng = ChaCha8Rng::seed_from_u64(seed);
    vision_rng.set_stream(1);

    let mut imu = Vec::new();
    for i in 0.. {
        let t = i as f64 * cfg.imu_dt;
        if t > last {
            break;
        }
        imu.push(synthesize_imu(&trajectory.at(t), &cfg.noise, &cfg.scene.world, &mut imu_rng));
    }
    let truth: Vec<TruthSample> = times.iter().map(|&t| trajectory.at(t)).collect();
    let vision = truth.iter().map(|s| synthesize_vision(s, &cfg.scene, &cfg.noise, &cfg.windows, &mut vision_rng)).collect();
    Ok(SimOutput { log: pack_frames(&imu, &times, vision)?, truth })
}
