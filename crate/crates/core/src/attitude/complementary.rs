use nalgebra::Vector3;

use crate::quat::Quaternion;

/// One complementary-filter update.
///
/// The previous estimate is propagated with the body rate over `dt` and then
/// blended toward the absolute orientation `q_am`: `alpha = 1` is pure gyro
/// integration, `alpha = 0` returns `q_am`. The blend keeps the hemisphere of
/// the propagated estimate.
pub fn complementary_step(prev: &Quaternion, gyro: &Vector3<f64>, q_am: &Quaternion, alpha: f64, dt: f64) -> Quaternion {
    if alpha <= 0.0 {
        return *q_am;
    }
    let propagated = prev.multiply(&Quaternion::from_rotation_vector(&(gyro * dt)));
    let blended = if alpha >= 1.0 { propagated } else { Quaternion::slerp(&propagated, q_am, 1.0 - alpha) };
    // unit inputs stay bit-identical; accumulated drift is removed
    if (blended.norm() - 1.0).abs() > 1e-12 {
        blended.normalize().unwrap_or(*q_am)
    } else {
        blended
    }
}

/// Stateful wrapper around [`complementary_step`].
#[derive(Debug, Clone)]
pub struct ComplementaryFilter {
    pub alpha: f64,
    estimate: Option<Quaternion>,
}

impl ComplementaryFilter {
    pub fn new(alpha: f64) -> Self {
        Self { alpha, estimate: None }
    }

    pub fn estimate(&self) -> Option<Quaternion> {
        self.estimate
    }

    /// First call adopts `q_am`.
    pub fn update(&mut self, gyro: &Vector3<f64>, q_am: &Quaternion, dt: f64) -> Quaternion {
        let next = match self.estimate {
            None => *q_am,
            Some(prev) => complementary_step(&prev, gyro, q_am, self.alpha, dt),
        };
        self.estimate = Some(next);
        next
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attitude::{accel_mag_orientation, WorldReference};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn alpha_limits_are_exact() {
        let prev = Quaternion::new(0.3, -0.1, 0.5, 0.8).normalize().unwrap();
        let q_am = Quaternion::new(-0.6, 0.2, 0.1, 0.7).normalize().unwrap();
        assert_eq!(complementary_step(&prev, &Vector3::zeros(), &q_am, 1.0, 0.02), prev);
        assert_eq!(complementary_step(&prev, &Vector3::new(0.4, 0.1, -1.0), &q_am, 0.0, 0.02), q_am);
    }

    #[test]
    fn output_stays_unit() {
        let mut f = ComplementaryFilter::new(0.98);
        let q_am = Quaternion::from_axis_angle(&Vector3::new(1.0, 2.0, 3.0), 0.7).unwrap();
        for k in 0..5000 {
            let q = f.update(&Vector3::new(0.3, -0.2, (k as f64 * 0.01).sin()), &q_am, 0.02);
            assert!((q.norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn smooths_noisy_static_orientation() {
        let r = WorldReference::default();
        let truth = Quaternion::from_axis_angle(&Vector3::new(0.3, -0.4, 1.0), 0.8).unwrap();
        let rt = truth.to_rotation().transpose();
        let (acc0, mag0) = (rt.apply(&r.gravity_g), rt.apply(&r.mag_field_g));
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let (na, nm, ng) = (Normal::new(0.0, 0.3).unwrap(), Normal::new(0.0, 1.0).unwrap(), Normal::new(0.0, 0.01).unwrap());
        let mut noise = |d: &Normal<f64>| Vector3::new(d.sample(&mut rng), d.sample(&mut rng), d.sample(&mut rng));
        let mut f = ComplementaryFilter::new(0.98);
        let mut raw_sq = 0.0;
        let n = 500;
        let mut last = Quaternion::IDENTITY;
        for _ in 0..n {
            let q_am = accel_mag_orientation(&(acc0 + noise(&na)), &(mag0 + noise(&nm)), &r).unwrap();
            raw_sq += q_am.angular_distance(&truth).powi(2);
            last = f.update(&noise(&ng), &q_am, 0.02);
        }
        let raw_rms = (raw_sq / n as f64).sqrt();
        let err = last.angular_distance(&truth);
        assert!(err < raw_rms, "filtered {err} vs raw rms {raw_rms}");
    }
}
