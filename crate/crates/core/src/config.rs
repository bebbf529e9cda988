//! Scenario configuration: flat `key = value` lines with dotted section keys,
//! `#` comments and blank lines. Every key has a default, unknown keys are
//! rejected, and [`ScenarioConfig::dump`] writes a file that loads back to an
//! identical configuration.
//!
//! List-valued keys separate entries with `;`:
//!
//! ```text
//! occlusion.windows = 5 6 offset 1 0 0; 12 12.5 dropout
//! trajectory.waypoints = 0 2 0 0 3.14159; 5 2 1 0 3.5
//! calib.r_cb = 0 -1 0 0 0 -1 1 0 0
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::Vector3;

use crate::attitude::PrefilterChannels;
use crate::ekf_fused::FusedTuning;
use crate::error::{Error, Result};
use crate::quat::{RotationMatrix, ROTATION_INPUT_TOL};
use crate::region::RegionTuning;
use crate::sim::{Corruption, OcclusionWindow, SimConfig, TrajectoryMode, Waypoint};
use crate::vision::WireframeModel;

/// Filter stacks the runner can drive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterKind {
    /// Stand-alone orientation EKF on the IMU stream.
    Orient,
    /// Fused 13-state pose filter.
    Fused,
    /// Complementary filter on the IMU stream.
    Complementary,
    /// 2D constant-velocity tracker on the detection centroid.
    Region,
}

impl FilterKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            FilterKind::Orient => "orient",
            FilterKind::Fused => "fused",
            FilterKind::Complementary => "complementary",
            FilterKind::Region => "region",
        }
    }
}

impl FromStr for FilterKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "orient" => Ok(FilterKind::Orient),
            "fused" => Ok(FilterKind::Fused),
            "complementary" => Ok(FilterKind::Complementary),
            "region" => Ok(FilterKind::Region),
            other => Err(Error::config("filter", format!("unknown filter `{other}`"))),
        }
    }
}

/// Where the vision pose fed to the fused filter comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VisionMode {
    /// Use the simulated pose measurement directly.
    Pose,
    /// Recover the pose from the 2D/3D correspondences by frame-to-frame
    /// refinement, with POSIT on (re)initialization.
    Correspondences,
}

impl VisionMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            VisionMode::Pose => "pose",
            VisionMode::Correspondences => "correspondences",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttitudeConfig {
    /// Butterworth prefilter cutoff, Hz.
    pub cutoff_hz: f64,
    /// Complementary filter gyro weight.
    pub alpha: f64,
    pub prefilter: PrefilterChannels,
}

impl Default for AttitudeConfig {
    fn default() -> Self {
        Self { cutoff_hz: 5.0, alpha: 0.98, prefilter: PrefilterChannels::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VisionConfig {
    pub mode: VisionMode,
    /// Reprojection RMS above which a refined frame counts as a dropout, px.
    pub dropout_rms_px: f64,
}

impl Default for VisionConfig {
    fn default() -> Self {
        Self { mode: VisionMode::Pose, dropout_rms_px: 10.0 }
    }
}

/// Tracked-object model: a centered box or a wireframe file.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSource {
    Cuboid(Vector3<f64>),
    File(PathBuf),
}

/// Complete effective configuration of one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub seed: u64,
    /// Simulator settings. `sim.scene.model` is resolved from `model`.
    pub sim: SimConfig,
    pub model: ModelSource,
    pub attitude: AttitudeConfig,
    pub ekf: FusedTuning,
    pub region: RegionTuning,
    pub vision: VisionConfig,
    pub output_dir: PathBuf,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let sim = SimConfig::default();
        Self {
            seed: 1,
            model: ModelSource::Cuboid(Vector3::new(0.3, 0.2, 0.15)),
            sim,
            attitude: AttitudeConfig::default(),
            ekf: FusedTuning::default(),
            region: RegionTuning::default(),
            vision: VisionConfig::default(),
            output_dir: PathBuf::from("out"),
        }
    }
}

fn num<T: FromStr>(key: &str, s: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.trim().parse::<T>().map_err(|e| Error::config(key, format!("cannot parse `{}`: {e}", s.trim())))
}

fn floats(key: &str, s: &str) -> Result<Vec<f64>> {
    s.split_whitespace().map(|t| num::<f64>(key, t)).collect()
}

fn floats_n<const N: usize>(key: &str, s: &str) -> Result<[f64; N]> {
    let v = floats(key, s)?;
    v.try_into().map_err(|v: Vec<f64>| Error::config(key, format!("expected {N} numbers, got {}", v.len())))
}

fn vec3(key: &str, s: &str) -> Result<Vector3<f64>> {
    Ok(Vector3::from(floats_n::<3>(key, s)?))
}

fn rotation(key: &str, s: &str) -> Result<RotationMatrix> {
    RotationMatrix::from_row_slice(&floats_n::<9>(key, s)?, ROTATION_INPUT_TOL).map_err(|e| Error::config(key, e.to_string()))
}

fn boolean(key: &str, s: &str) -> Result<bool> {
    match s.trim() {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(Error::config(key, format!("expected true or false, got `{other}`"))),
    }
}

fn entries(s: &str) -> impl Iterator<Item = &str> {
    s.split(';').map(str::trim).filter(|e| !e.is_empty())
}

fn parse_windows(key: &str, s: &str) -> Result<Vec<OcclusionWindow>> {
    entries(s)
        .map(|e| {
            let f: Vec<&str> = e.split_whitespace().collect();
            if f.len() < 3 {
                return Err(Error::config(key, format!("window `{e}` needs `start end kind`")));
            }
            let (start, end) = (num::<f64>(key, f[0])?, num::<f64>(key, f[1])?);
            let corruption = match (f[2], f.len()) {
                ("dropout", 3) => Corruption::Dropout,
                ("offset", 6) => Corruption::Offset(vec3(key, &f[3..].join(" "))?),
                _ => return Err(Error::config(key, format!("window `{e}`: kind must be `dropout` or `offset dx dy dz`"))),
            };
            Ok(OcclusionWindow { start, end, corruption })
        })
        .collect()
}

fn parse_waypoints(key: &str, s: &str) -> Result<Vec<Waypoint>> {
    entries(s)
        .map(|e| {
            let [t, x, y, z, yaw] = floats_n::<5>(key, e)?;
            Ok(Waypoint { t, position: Vector3::new(x, y, z), yaw })
        })
        .collect()
}

fn parse_prefilter(key: &str, s: &str) -> Result<PrefilterChannels> {
    let mut ch = PrefilterChannels { gyro: false, accel: false, mag: false };
    let s = s.trim();
    if s == "none" {
        return Ok(ch);
    }
    for name in s.split(',').map(str::trim) {
        match name {
            "gyro" => ch.gyro = true,
            "accel" => ch.accel = true,
            "mag" => ch.mag = true,
            other => return Err(Error::config(key, format!("unknown channel `{other}` (use gyro, accel, mag or none)"))),
        }
    }
    Ok(ch)
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

impl ScenarioConfig {
    /// Parses configuration text on top of the defaults. Relative model
    /// paths are resolved against `base_dir` when given.
    pub fn parse(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let mut cfg = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let Some((key, value)) = body.split_once('=') else {
                return Err(Error::Parse { line: n + 1, msg: format!("expected `key = value`, got `{body}`") });
            };
            cfg.set(key.trim(), value.trim(), base_dir)?;
        }
        cfg.finish()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text, path.parent())
    }

    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, v: &str, base_dir: Option<&Path>) -> Result<()> {
        let tr = &mut self.sim.trajectory;
        let noise = &mut self.sim.noise;
        let cam = &mut self.sim.scene.camera;
        let ekf = &mut self.ekf;
        match key {
            "seed" => self.seed = num(key, v)?,
            "trajectory.mode" => tr.mode = TrajectoryMode::parse(v).ok_or_else(|| Error::config(key, format!("unknown mode `{v}` (static, orbit, waypoint)")))?,
            "trajectory.duration" => tr.duration = num(key, v)?,
            "trajectory.radius" => tr.radius = num(key, v)?,
            "trajectory.rate" => tr.rate = num(key, v)?,
            "trajectory.height" => tr.height = num(key, v)?,
            "trajectory.wobble_amp" => tr.wobble_amp = num(key, v)?,
            "trajectory.wobble_rate" => tr.wobble_rate = num(key, v)?,
            "trajectory.waypoints" => tr.waypoints = parse_waypoints(key, v)?,
            "sim.imu_dt" => self.sim.imu_dt = num(key, v)?,
            "sim.frame_dt" => self.sim.frame_dt = num(key, v)?,
            "noise.gyro_sigma" => noise.gyro_sigma = num(key, v)?,
            "noise.gyro_bias" => noise.gyro_bias = vec3(key, v)?,
            "noise.accel_sigma" => noise.accel_sigma = num(key, v)?,
            "noise.mag_sigma" => noise.mag_sigma = num(key, v)?,
            "noise.vision_q_sigma" => noise.vision_q_sigma = num(key, v)?,
            "noise.vision_t_sigma" => noise.vision_t_sigma = num(key, v)?,
            "noise.detection_sigma" => noise.detection_sigma = num(key, v)?,
            "occlusion.windows" => self.sim.windows = parse_windows(key, v)?,
            "calib.r_cb" => self.sim.scene.r_cb = rotation(key, v)?,
            "calib.r_go" => self.sim.scene.r_go = rotation(key, v)?,
            "camera.fx" => cam.fx = num(key, v)?,
            "camera.fy" => cam.fy = num(key, v)?,
            "camera.cx" => cam.cx = num(key, v)?,
            "camera.cy" => cam.cy = num(key, v)?,
            "camera.width" => cam.width = num(key, v)?,
            "camera.height" => cam.height = num(key, v)?,
            "model.size" => self.model = ModelSource::Cuboid(vec3(key, v)?),
            "model.file" => {
                let p = PathBuf::from(v);
                self.model = ModelSource::File(match base_dir {
                    Some(dir) if p.is_relative() => dir.join(p),
                    _ => p,
                });
            }
            "world.gravity" => self.sim.scene.world.gravity_g = vec3(key, v)?,
            "world.mag_field" => self.sim.scene.world.mag_field_g = vec3(key, v)?,
            "attitude.cutoff_hz" => self.attitude.cutoff_hz = num(key, v)?,
            "attitude.alpha" => self.attitude.alpha = num(key, v)?,
            "attitude.prefilter" => self.attitude.prefilter = parse_prefilter(key, v)?,
            "ekf.tau" => ekf.orient.tau = num(key, v)?,
            "ekf.delta" => ekf.orient.delta = num(key, v)?,
            "ekf.D" => ekf.orient.d = num(key, v)?,
            "ekf.q_p" => ekf.orient.q_p = num(key, v)?,
            "ekf.var_gyro" => ekf.orient.var_gyro = num(key, v)?,
            "ekf.var_q" => ekf.orient.var_q = num(key, v)?,
            "ekf.delta_I" => ekf.delta_i = num(key, v)?,
            "ekf.K" => ekf.k = num(key, v)?,
            "ekf.var_q_vision" => ekf.var_q_vision = num(key, v)?,
            "ekf.var_t_vision" => ekf.var_t_vision = num(key, v)?,
            "ekf.occlusion_T" => ekf.occlusion_t = num(key, v)?,
            "ekf.occl_imu_var_factor" => ekf.occl_imu_var_factor = num(key, v)?,
            "ekf.reacquire_jump" => ekf.reacquire_jump = boolean(key, v)?,
            "ekf.exit_hysteresis" => ekf.exit_hysteresis = num(key, v)?,
            "ekf.init_var_v" => ekf.init_var_v = num(key, v)?,
            "region.meas_sigma" => self.region.meas_sigma = num(key, v)?,
            "region.accel_sigma" => self.region.accel_sigma = num(key, v)?,
            "vision.mode" => {
                self.vision.mode = match v {
                    "pose" => VisionMode::Pose,
                    "correspondences" => VisionMode::Correspondences,
                    other => return Err(Error::config(key, format!("unknown mode `{other}` (pose, correspondences)"))),
                }
            }
            "vision.dropout_rms_px" => self.vision.dropout_rms_px = num(key, v)?,
            "output.dir" => self.output_dir = PathBuf::from(v),
            other => return Err(Error::config(other, "unknown key")),
        }
        Ok(())
    }

    /// Loads the model and validates every block.
    pub fn finish(&mut self) -> Result<()> {
        self.sim.scene.model = match &self.model {
            ModelSource::Cuboid(size) => {
                if !size.iter().all(|s| *s > 0.0 && s.is_finite()) {
                    return Err(Error::config("model.size", "all sides must be positive"));
                }
                WireframeModel::cuboid(size)
            }
            ModelSource::File(p) => WireframeModel::from_file(p).map_err(|e| Error::config("model.file", format!("{}: {e}", p.display())))?,
        };
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        self.ekf.validate()?;
        self.sim.noise.validate()?;
        self.sim.scene.camera.validate()?;
        self.sim.scene.world.validate()?;
        let tr = &self.sim.trajectory;
        if !(tr.duration > 0.0 && tr.duration.is_finite()) {
            return Err(Error::config("trajectory.duration", "must be positive"));
        }
        for (key, v) in [("sim.imu_dt", self.sim.imu_dt), ("sim.frame_dt", self.sim.frame_dt), ("attitude.cutoff_hz", self.attitude.cutoff_hz), ("vision.dropout_rms_px", self.vision.dropout_rms_px)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(key, format!("must be positive, got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.attitude.alpha) {
            return Err(Error::config("attitude.alpha", format!("must lie in [0, 1], got {}", self.attitude.alpha)));
        }
        if self.attitude.cutoff_hz >= 0.5 / self.sim.imu_dt {
            return Err(Error::config("attitude.cutoff_hz", "must be below the IMU Nyquist frequency"));
        }
        for (key, v) in [("region.meas_sigma", self.region.meas_sigma), ("region.accel_sigma", self.region.accel_sigma)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(key, format!("must be positive, got {v}")));
            }
        }
        for w in &self.sim.windows {
            if !(w.start < w.end) || w.start < 0.0 || w.end > tr.duration + self.sim.frame_dt {
                return Err(Error::config("occlusion.windows", format!("window [{}, {}) must be non-empty and inside the scenario", w.start, w.end)));
            }
        }
        Ok(())
    }

    /// Writes every key with its effective value.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let tr = &self.sim.trajectory;
        let n = &self.sim.noise;
        let cam = &self.sim.scene.camera;
        let e = &self.ekf;
        let o = &e.orient;
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("seed", self.seed.to_string());
        kv("trajectory.mode", tr.mode.as_str().into());
        kv("trajectory.duration", tr.duration.to_string());
        kv("trajectory.radius", tr.radius.to_string());
        kv("trajectory.rate", tr.rate.to_string());
        kv("trajectory.height", tr.height.to_string());
        kv("trajectory.wobble_amp", tr.wobble_amp.to_string());
        kv("trajectory.wobble_rate", tr.wobble_rate.to_string());
        let wps: Vec<String> = tr.waypoints.iter().map(|w| join(&[w.t, w.position.x, w.position.y, w.position.z, w.yaw])).collect();
        kv("trajectory.waypoints", wps.join("; "));
        kv("sim.imu_dt", self.sim.imu_dt.to_string());
        kv("sim.frame_dt", self.sim.frame_dt.to_string());
        kv("noise.gyro_sigma", n.gyro_sigma.to_string());
        kv("noise.gyro_bias", join(n.gyro_bias.as_slice()));
        kv("noise.accel_sigma", n.accel_sigma.to_string());
        kv("noise.mag_sigma", n.mag_sigma.to_string());
        kv("noise.vision_q_sigma", n.vision_q_sigma.to_string());
        kv("noise.vision_t_sigma", n.vision_t_sigma.to_string());
        kv("noise.detection_sigma", n.detection_sigma.to_string());
        let windows: Vec<String> = self
            .sim
            .windows
            .iter()
            .map(|w| match w.corruption {
                Corruption::Dropout => format!("{} {} dropout", w.start, w.end),
                Corruption::Offset(d) => format!("{} {} offset {}", w.start, w.end, join(d.as_slice())),
            })
            .collect();
        kv("occlusion.windows", windows.join("; "));
        kv("calib.r_cb", join(&self.sim.scene.r_cb.to_row_array()));
        kv("calib.r_go", join(&self.sim.scene.r_go.to_row_array()));
        kv("camera.fx", cam.fx.to_string());
        kv("camera.fy", cam.fy.to_string());
        kv("camera.cx", cam.cx.to_string());
        kv("camera.cy", cam.cy.to_string());
        kv("camera.width", cam.width.to_string());
        kv("camera.height", cam.height.to_string());
        match &self.model {
            ModelSource::Cuboid(size) => kv("model.size", join(size.as_slice())),
            ModelSource::File(p) => kv("model.file", p.display().to_string()),
        }
        kv("world.gravity", join(self.sim.scene.world.gravity_g.as_slice()));
        kv("world.mag_field", join(self.sim.scene.world.mag_field_g.as_slice()));
        kv("attitude.cutoff_hz", self.attitude.cutoff_hz.to_string());
        kv("attitude.alpha", self.attitude.alpha.to_string());
        let pf = self.attitude.prefilter;
        let ch: Vec<&str> = [(pf.gyro, "gyro"), (pf.accel, "accel"), (pf.mag, "mag")].iter().filter(|c| c.0).map(|c| c.1).collect();
        kv("attitude.prefilter", if ch.is_empty() { "none".into() } else { ch.join(",") });
        kv("ekf.tau", o.tau.to_string());
        kv("ekf.delta", o.delta.to_string());
        kv("ekf.D", o.d.to_string());
        kv("ekf.q_p", o.q_p.to_string());
        kv("ekf.var_gyro", o.var_gyro.to_string());
        kv("ekf.var_q", o.var_q.to_string());
        kv("ekf.delta_I", e.delta_i.to_string());
        kv("ekf.K", e.k.to_string());
        kv("ekf.var_q_vision", e.var_q_vision.to_string());
        kv("ekf.var_t_vision", e.var_t_vision.to_string());
        kv("ekf.occlusion_T", e.occlusion_t.to_string());
        kv("ekf.occl_imu_var_factor", e.occl_imu_var_factor.to_string());
        kv("ekf.reacquire_jump", e.reacquire_jump.to_string());
        kv("ekf.exit_hysteresis", e.exit_hysteresis.to_string());
        kv("ekf.init_var_v", e.init_var_v.to_string());
        kv("region.meas_sigma", self.region.meas_sigma.to_string());
        kv("region.accel_sigma", self.region.accel_sigma.to_string());
        kv("vision.mode", self.vision.mode.as_str().into());
        kv("vision.dropout_rms_px", self.vision.dropout_rms_px.to_string());
        kv("output.dir", self.output_dir.display().to_string());
        s
    }
}
