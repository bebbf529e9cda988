//! Image-plane region tracker: a constant-velocity Kalman filter over the
//! region centroid. With a detection it corrects; without one (occlusion) it
//! only predicts.

use nalgebra::{Matrix2, Matrix2x4, Matrix4, Vector2, Vector4};

use crate::error::{Error, Result};
use crate::kalman::joseph_update;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionTuning {
    /// Detection noise, px.
    pub meas_sigma: f64,
    /// White-acceleration process noise, px/s².
    pub accel_sigma: f64,
}

impl Default for RegionTuning {
    fn default() -> Self {
        Self { meas_sigma: 2.0, accel_sigma: 50.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region2D {
    pub cx: f64,
    pub cy: f64,
    pub vx: f64,
    pub vy: f64,
    /// Covariance over `[cx, cy, vx, vy]`.
    pub p: Matrix4<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection2D {
    pub cx: f64,
    pub cy: f64,
    pub valid: bool,
}

impl Detection2D {
    pub fn new(cx: f64, cy: f64) -> Self {
        Self { cx, cy, valid: true }
    }

    pub fn missing() -> Self {
        Self { cx: f64::NAN, cy: f64::NAN, valid: false }
    }
}

impl Region2D {
    fn vector(&self) -> Vector4<f64> {
        Vector4::new(self.cx, self.cy, self.vx, self.vy)
    }

    fn from_parts(x: Vector4<f64>, p: Matrix4<f64>) -> Self {
        Self { cx: x[0], cy: x[1], vx: x[2], vy: x[3], p }
    }
}

fn transition(dt: f64) -> Matrix4<f64> {
    let mut f = Matrix4::identity();
    f[(0, 2)] = dt;
    f[(1, 3)] = dt;
    f
}

fn process_noise(dt: f64, accel_sigma: f64) -> Matrix4<f64> {
    let q = accel_sigma * accel_sigma;
    let (a, b, c) = (dt.powi(4) / 4.0 * q, dt.powi(3) / 2.0 * q, dt * dt * q);
    Matrix4::new(a, 0.0, b, 0.0, 0.0, a, 0.0, b, b, 0.0, c, 0.0, 0.0, b, 0.0, c)
}

pub fn region_predict(state: &Region2D, dt: f64, tuning: &RegionTuning) -> Region2D {
    let f = transition(dt);
    Region2D::from_parts(f * state.vector(), f * state.p * f.transpose() + process_noise(dt, tuning.accel_sigma))
}

pub fn region_correct(state: &Region2D, z: &Detection2D, tuning: &RegionTuning) -> Result<Region2D> {
    if !z.valid {
        return Err(Error::InvalidDetection);
    }
    let h = Matrix2x4::new(1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0);
    let r = Matrix2::identity() * tuning.meas_sigma.powi(2);
    let innovation = Vector2::new(z.cx - state.cx, z.cy - state.cy);
    let out = joseph_update(&state.p, &h, &r, &innovation, "region correct")?;
    Ok(Region2D::from_parts(state.vector() + out.dx, out.p))
}

/// What a tracker step did.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegionStep {
    /// Not enough detections yet to start the track.
    Initializing,
    Corrected { innovation: Vector2<f64> },
    Predicted,
}

/// Stateful tracker. The track starts by two-point differencing: the first
/// detection fixes position, the second fixes velocity.
#[derive(Debug, Clone)]
pub struct RegionTracker {
    pub tuning: RegionTuning,
    first: Option<Detection2D>,
    state: Option<Region2D>,
}

impl RegionTracker {
    pub fn new(tuning: RegionTuning) -> Self {
        Self { tuning, first: None, state: None }
    }

    pub fn state(&self) -> Option<&Region2D> {
        self.state.as_ref()
    }

    /// Advances by `dt`; an invalid detection means prediction only.
    pub fn step(&mut self, z: &Detection2D, dt: f64) -> RegionStep {
        let Some(state) = self.state else {
            if !z.valid {
                return RegionStep::Initializing;
            }
            match self.first {
                None => {
                    self.first = Some(*z);
                }
                Some(first) => {
                    let r = self.tuning.meas_sigma.powi(2);
                    let (a, b, c) = (r, r / dt, 2.0 * r / (dt * dt));
                    let p = Matrix4::new(a, 0.0, b, 0.0, 0.0, a, 0.0, b, b, 0.0, c, 0.0, 0.0, b, 0.0, c);
                    self.state = Some(Region2D {
                        cx: z.cx,
                        cy: z.cy,
                        vx: (z.cx - first.cx) / dt,
                        vy: (z.cy - first.cy) / dt,
                        p,
                    });
                }
            }
            return RegionStep::Initializing;
        };
        let predicted = region_predict(&state, dt, &self.tuning);
        if !z.valid {
            self.state = Some(predicted);
            return RegionStep::Predicted;
        }
        let innovation = Vector2::new(z.cx - predicted.cx, z.cy - predicted.cy);
        // z.valid was checked, so the correction cannot reject the detection
        self.state = Some(region_correct(&predicted, z, &self.tuning).unwrap_or(predicted));
        RegionStep::Corrected { innovation }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn state(cx: f64, cy: f64, vx: f64, vy: f64) -> Region2D {
        Region2D { cx, cy, vx, vy, p: Matrix4::from_diagonal(&Vector4::new(4.0, 4.0, 100.0, 100.0)) }
    }

    #[test]
    fn predict_cases() {
        let t = RegionTuning::default();
        let s = state(100.0, 50.0, 0.0, 0.0);
        let p = region_predict(&s, 0.1, &t);
        assert_eq!((p.cx, p.cy), (100.0, 50.0));
        let p = region_predict(&state(100.0, 50.0, 30.0, 0.0), 1.0 / 30.0, &t);
        assert!((p.cx - 101.0).abs() < 1e-12);
        assert!(p.p.trace() > s.p.trace());
    }

    #[test]
    fn correct_cases() {
        let t = RegionTuning::default();
        let s = state(100.0, 50.0, 3.0, 0.0);
        let same = region_correct(&s, &Detection2D::new(100.0, 50.0), &t).unwrap();
        assert_eq!((same.cx, same.cy, same.vx, same.vy), (100.0, 50.0, 3.0, 0.0));
        assert!(same.p.trace() < s.p.trace());

        let moved = region_correct(&s, &Detection2D::new(110.0, 40.0), &t).unwrap();
        assert!(moved.cx > 100.0 && moved.cx < 110.0);
        assert!(moved.cy < 50.0 && moved.cy > 40.0);

        let deaf = RegionTuning { meas_sigma: 1e6, ..t };
        let ignored = region_correct(&s, &Detection2D::new(500.0, -500.0), &deaf).unwrap();
        assert!((ignored.cx - s.cx).abs() < 1e-6 && (ignored.cy - s.cy).abs() < 1e-6);

        assert_eq!(region_correct(&s, &Detection2D::missing(), &t), Err(Error::InvalidDetection));
    }

    #[test]
    fn beats_raw_detections() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let noise = Normal::new(0.0, 2.0).unwrap();
        let dt = 1.0 / 30.0;
        let mut tr = RegionTracker::new(RegionTuning::default());
        let (mut raw, mut filt) = (0.0, 0.0);
        for k in 0..100 {
            let (tx, ty) = (50.0 + 60.0 * k as f64 * dt, 200.0 - 25.0 * k as f64 * dt);
            let z = Detection2D::new(tx + noise.sample(&mut rng), ty + noise.sample(&mut rng));
            tr.step(&z, dt);
            raw += (z.cx - tx).powi(2) + (z.cy - ty).powi(2);
            let s = tr.state().map(|s| (s.cx, s.cy)).unwrap_or((z.cx, z.cy));
            filt += (s.0 - tx).powi(2) + (s.1 - ty).powi(2);
        }
        assert!(filt < raw, "filter {filt} vs raw {raw}");
    }

    #[test]
    fn noise_free_track_locks() {
        let dt = 1.0 / 30.0;
        let mut tr = RegionTracker::new(RegionTuning::default());
        for k in 0..40 {
            let z = Detection2D::new(10.0 + 45.0 * k as f64 * dt, 300.0 - 12.0 * k as f64 * dt);
            if let RegionStep::Corrected { innovation } = tr.step(&z, dt) {
                assert!((2..=5).contains(&k) || innovation.norm() < 1e-6, "k={k} {innovation}");
            }
        }
    }

    #[test]
    fn occlusion_extrapolates_straight_line() {
        let dt = 1.0 / 30.0;
        let mut tr = RegionTracker::new(RegionTuning::default());
        for k in 0..20 {
            tr.step(&Detection2D::new(10.0 + 45.0 * k as f64 * dt, 300.0 - 12.0 * k as f64 * dt), dt);
        }
        let s0 = *tr.state().unwrap();
        for n in 1..=10 {
            assert_eq!(tr.step(&Detection2D::missing(), dt), RegionStep::Predicted);
            let s = tr.state().unwrap();
            assert_eq!((s.vx, s.vy), (s0.vx, s0.vy));
            assert!((s.cx - (s0.cx + s0.vx * dt * n as f64)).abs() < 1e-9);
            assert!((s.cy - (s0.cy + s0.vy * dt * n as f64)).abs() < 1e-9);
        }
    }

    #[test]
    fn covariance_stays_psd() {
        let dt = 1.0 / 30.0;
        let mut tr = RegionTracker::new(RegionTuning::default());
        for k in 0..200 {
            let z = if k % 7 == 3 { Detection2D::missing() } else { Detection2D::new(k as f64, 2.0 * k as f64) };
            tr.step(&z, dt);
            if let Some(s) = tr.state() {
                assert!(crate::kalman::min_eigenvalue(&s.p) > -1e-9);
            }
        }
    }
}
