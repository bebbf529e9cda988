use std::f64::consts::PI;

use nalgebra::{Vector3, Vector4};

use crate::error::{Error, Result};
use crate::quat::Quaternion;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryMode {
    /// Fixed pose at `(radius, 0, height)` facing the origin.
    Static,
    /// Circle of `radius` at `height`, body facing the origin, with a
    /// sinusoidal pitch wobble.
    Orbit,
    /// Cubic Hermite spline through waypoints, body level.
    Waypoint,
}

impl TrajectoryMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            TrajectoryMode::Static => "static",
            TrajectoryMode::Orbit => "orbit",
            TrajectoryMode::Waypoint => "waypoint",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "static" => Some(TrajectoryMode::Static),
            "orbit" => Some(TrajectoryMode::Orbit),
            "waypoint" => Some(TrajectoryMode::Waypoint),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waypoint {
    pub t: f64,
    pub position: Vector3<f64>,
    /// Heading about global z, rad.
    pub yaw: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySpec {
    pub mode: TrajectoryMode,
    /// s
    pub duration: f64,
    /// m
    pub radius: f64,
    /// Orbit angular rate, rad/s.
    pub rate: f64,
    /// m
    pub height: f64,
    /// Pitch wobble amplitude, rad.
    pub wobble_amp: f64,
    /// Pitch wobble angular frequency, rad/s.
    pub wobble_rate: f64,
    pub waypoints: Vec<Waypoint>,
}

impl Default for TrajectorySpec {
    fn default() -> Self {
        Self {
            mode: TrajectoryMode::Orbit,
            duration: 20.0,
            radius: 2.0,
            rate: 0.2,
            height: 0.0,
            wobble_amp: 0.1,
            wobble_rate: 0.5,
            waypoints: Vec::new(),
        }
    }
}

/// Ground truth at one instant. `q` maps body → global; `omega` is the body
/// rate in the body frame; `accel` is the kinematic acceleration in the
/// global frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruthSample {
    pub t: f64,
    pub q: Quaternion,
    pub position: Vector3<f64>,
    pub omega: Vector3<f64>,
    pub velocity: Vector3<f64>,
    pub accel: Vector3<f64>,
}

/// A validated trajectory that can be sampled at any time.
#[derive(Debug, Clone)]
pub struct Trajectory {
    spec: TrajectorySpec,
}

/// Body orientation from heading and pitch: `Rz(ψ) · Ry(β)`.
fn attitude(yaw: f64, pitch: f64) -> Quaternion {
    Quaternion::from_rotation_vector(&Vector3::new(0.0, 0.0, yaw)).multiply(&Quaternion::from_rotation_vector(&Vector3::new(0.0, pitch, 0.0)))
}

/// Body rate for `Rz(ψ) · Ry(β)`: `Ry(β)ᵀ (0, 0, ψ̇) + (0, β̇, 0)`.
fn body_rate(pitch: f64, yaw_rate: f64, pitch_rate: f64) -> Vector3<f64> {
    Vector3::new(-pitch.sin() * yaw_rate, pitch_rate, pitch.cos() * yaw_rate)
}

impl Trajectory {
    pub fn spec(&self) -> &TrajectorySpec {
        &self.spec
    }

    pub fn duration(&self) -> f64 {
        self.spec.duration
    }

    pub fn at(&self, t: f64) -> TruthSample {
        let s = &self.spec;
        match s.mode {
            TrajectoryMode::Static => TruthSample {
                t,
                q: attitude(PI, 0.0),
                position: Vector3::new(s.radius, 0.0, s.height),
                omega: Vector3::zeros(),
                velocity: Vector3::zeros(),
                accel: Vector3::zeros(),
            },
            TrajectoryMode::Orbit => {
                let th = s.rate * t;
                let (st, ct) = th.sin_cos();
                let pitch = s.wobble_amp * (s.wobble_rate * t).sin();
                let pitch_rate = s.wobble_amp * s.wobble_rate * (s.wobble_rate * t).cos();
                TruthSample {
                    t,
                    q: attitude(th + PI, pitch),
                    position: Vector3::new(s.radius * ct, s.radius * st, s.height),
                    omega: body_rate(pitch, s.rate, pitch_rate),
                    velocity: Vector3::new(-s.radius * s.rate * st, s.radius * s.rate * ct, 0.0),
                    accel: Vector3::new(-s.radius * s.rate * s.rate * ct, -s.radius * s.rate * s.rate * st, 0.0),
                }
            }
            TrajectoryMode::Waypoint => {
                let (p, d, dd) = self.spline(t);
                TruthSample {
                    t,
                    q: attitude(p[3], 0.0),
                    position: p.xyz(),
                    omega: Vector3::new(0.0, 0.0, d[3]),
                    velocity: d.xyz(),
                    accel: dd.xyz(),
                }
            }
        }
    }

    /// Value, first and second derivative of `(x, y, z, yaw)`.
    fn spline(&self, t: f64) -> (Vector4<f64>, Vector4<f64>, Vector4<f64>) {
        let w = &self.spec.waypoints;
        let key = |k: usize| Vector4::new(w[k].position.x, w[k].position.y, w[k].position.z, w[k].yaw);
        let n = w.len();
        if t <= w[0].t {
            return (key(0), Vector4::zeros(), Vector4::zeros());
        }
        if t >= w[n - 1].t {
            return (key(n - 1), Vector4::zeros(), Vector4::zeros());
        }
        // zero tangents at the ends, Catmull-Rom tangents inside
        let tangent = |k: usize| {
            if k == 0 || k == n - 1 {
                Vector4::zeros()
            } else {
                (key(k + 1) - key(k - 1)) / (w[k + 1].t - w[k - 1].t)
            }
        };
        let k = w.partition_point(|p| p.t <= t) - 1;
        let h = w[k + 1].t - w[k].t;
        let s = (t - w[k].t) / h;
        let (p0, p1, m0, m1) = (key(k), key(k + 1), tangent(k) * h, tangent(k + 1) * h);
        let (s2, s3) = (s * s, s * s * s);
        let value = p0 * (2.0 * s3 - 3.0 * s2 + 1.0) + m0 * (s3 - 2.0 * s2 + s) + p1 * (-2.0 * s3 + 3.0 * s2) + m1 * (s3 - s2);
        let d1 = (p0 * (6.0 * s2 - 6.0 * s) + m0 * (3.0 * s2 - 4.0 * s + 1.0) + p1 * (-6.0 * s2 + 6.0 * s) + m1 * (3.0 * s2 - 2.0 * s)) / h;
        let d2 = (p0 * (12.0 * s - 6.0) + m0 * (6.0 * s - 4.0) + p1 * (-12.0 * s + 6.0) + m1 * (6.0 * s - 2.0)) / (h * h);
        (value, d1, d2)
    }
}

/// Validates the spec and returns a sampler for it.
pub fn generate_truth(spec: &TrajectorySpec) -> Result<Trajectory> {
    let bad = |key: &str, msg: String| Err(Error::Config { key: key.into(), msg });
    if !(spec.duration > 0.0 && spec.duration.is_finite()) {
        return bad("trajectory.duration", format!("must be positive, got {}", spec.duration));
    }
    for (key, v) in [
        ("trajectory.radius", spec.radius),
        ("trajectory.rate", spec.rate),
        ("trajectory.height", spec.height),
        ("trajectory.wobble_amp", spec.wobble_amp),
        ("trajectory.wobble_rate", spec.wobble_rate),
    ] {
        if !v.is_finite() {
            return bad(key, format!("must be finite, got {v}"));
        }
    }
    if spec.mode == TrajectoryMode::Waypoint {
        if spec.waypoints.len() < 2 {
            return bad("trajectory.waypoints", format!("need at least 2 waypoints, got {}", spec.waypoints.len()));
        }
        for pair in spec.waypoints.windows(2) {
            if !(pair[1].t > pair[0].t) {
                return bad("trajectory.waypoints", format!("waypoint times must increase ({} then {})", pair[0].t, pair[1].t));
            }
        }
    }
    Ok(Trajectory { spec: spec.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn waypoint_spec() -> TrajectorySpec {
        let wp = |t: f64, x: f64, y: f64, z: f64, yaw: f64| Waypoint { t, position: Vector3::new(x, y, z), yaw };
        TrajectorySpec {
            mode: TrajectoryMode::Waypoint,
            duration: 12.0,
            waypoints: vec![wp(0.0, 2.0, 0.0, 0.0, PI), wp(4.0, 1.5, 1.0, 0.1, 3.6), wp(8.0, 0.5, 2.0, 0.0, 4.2), wp(12.0, -1.0, 1.8, -0.1, 4.9)],
            ..Default::default()
        }
    }

    fn specs() -> Vec<TrajectorySpec> {
        vec![TrajectorySpec { mode: TrajectoryMode::Static, ..Default::default() }, TrajectorySpec::default(), waypoint_spec()]
    }

    #[test]
    fn static_pose_is_constant() {
        let tr = generate_truth(&TrajectorySpec { mode: TrajectoryMode::Static, ..Default::default() }).unwrap();
        let (a, b) = (tr.at(0.0), tr.at(7.3));
        assert_eq!((a.q, a.position), (b.q, b.position));
        assert_eq!(b.omega, Vector3::zeros());
        assert_eq!(b.velocity, Vector3::zeros());
        // facing the origin: body x axis points along −x
        assert!((a.q.rotate(&Vector3::x()) + Vector3::x()).norm() < 1e-12);
    }

    #[test]
    fn orbit_speed_is_constant() {
        let tr = generate_truth(&TrajectorySpec::default()).unwrap();
        for k in 0..200 {
            let s = tr.at(k as f64 * 0.1);
            assert!((s.velocity.norm() - 0.4).abs() < 1e-12);
            let forward = s.q.rotate(&Vector3::x());
            let to_origin = -s.position.normalize();
            assert!(forward.xy().normalize().dot(&to_origin.xy()) > 1.0 - 1e-12);
        }
    }

    /// Central differences at 1 kHz against the analytic rates.
    #[test]
    fn derivatives_are_consistent() {
        let h = 1e-3;
        for spec in specs() {
            let tr = generate_truth(&spec).unwrap();
            for k in 1..200 {
                let t = k as f64 * spec.duration / 200.0;
                let (a, s, b) = (tr.at(t - h), tr.at(t), tr.at(t + h));
                let dq = a.q.conjugate().multiply(&b.q);
                let omega_fd = dq.aligned_to(&Quaternion::IDENTITY).to_rotation_vector() / (2.0 * h);
                assert!((omega_fd - s.omega).norm() < 1e-4, "{:?} t={t} {}", spec.mode, (omega_fd - s.omega).norm());
                let v_fd = (b.position - a.position) / (2.0 * h);
                assert!((v_fd - s.velocity).norm() < 1e-5, "{:?} t={t}", spec.mode);
                let a_fd = (b.velocity - a.velocity) / (2.0 * h);
                assert!((a_fd - s.accel).norm() < 1e-4, "{:?} t={t}", spec.mode);
            }
        }
    }

    #[test]
    fn waypoints_are_interpolated() {
        let spec = waypoint_spec();
        let tr = generate_truth(&spec).unwrap();
        for w in &spec.waypoints {
            let s = tr.at(w.t);
            assert!((s.position - w.position).norm() < 1e-12);
        }
        assert_eq!(tr.at(-1.0).position, spec.waypoints[0].position);
        assert_eq!(tr.at(20.0).velocity, Vector3::zeros());
    }

    #[test]
    fn invalid_specs() {
        assert!(generate_truth(&TrajectorySpec { duration: 0.0, ..Default::default() }).is_err());
        let mut w = waypoint_spec();
        w.waypoints.swap(1, 2);
        assert!(generate_truth(&w).is_err());
        w.waypoints.truncate(1);
        assert!(generate_truth(&w).is_err());
    }
}
