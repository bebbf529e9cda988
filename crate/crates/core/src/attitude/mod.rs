//! Device-side orientation: Butterworth prefiltering, absolute orientation
//! from accelerometer and magnetometer, and gyro/absolute blending with a
//! complementary filter.
//!
//! Axis convention: the global frame is z-up. A level, static device measures
//! specific force `(0, 0, +9.81)`. Attitude quaternions map body → global.

mod complementary;
mod iir;
mod triad;

pub use complementary::{complementary_step, ComplementaryFilter};
pub use iir::{butterworth4_design, IirCoefficients, IirFilter};
pub use triad::accel_mag_orientation;

use nalgebra::Vector3;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImuSample {
    /// seconds
    pub t: f64,
    /// rad/s, body frame
    pub gyro: Vector3<f64>,
    /// m/s², specific force in body frame
    pub accel: Vector3<f64>,
    /// µT, body frame
    pub mag: Vector3<f64>,
}

/// Reference vectors in the global frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorldReference {
    /// Specific force of a static device, m/s².
    pub gravity_g: Vector3<f64>,
    /// Local magnetic field, µT.
    pub mag_field_g: Vector3<f64>,
}

impl Default for WorldReference {
    fn default() -> Self {
        Self { gravity_g: Vector3::new(0.0, 0.0, 9.81), mag_field_g: Vector3::new(22.0, 0.0, -42.0) }
    }
}

impl WorldReference {
    pub fn validate(&self) -> Result<()> {
        let (g, m) = (self.gravity_g.norm(), self.mag_field_g.norm());
        if !(g > 0.0) || !(m > 0.0) {
            return Err(Error::ParallelReferences);
        }
        let sin_angle = self.gravity_g.cross(&self.mag_field_g).norm() / (g * m);
        if sin_angle < 1f64.to_radians().sin() {
            return Err(Error::ParallelReferences);
        }
        Ok(())
    }
}

/// Which sensors pass through the low-pass prefilter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrefilterChannels {
    pub gyro: bool,
    pub accel: bool,
    pub mag: bool,
}

impl Default for PrefilterChannels {
    fn default() -> Self {
        Self { gyro: true, accel: true, mag: true }
    }
}

/// Nine-channel Butterworth prefilter for an IMU stream. The first sample
/// primes every channel at its steady state.
#[derive(Debug, Clone)]
pub struct ImuPrefilter {
    channels: PrefilterChannels,
    filters: Vec<IirFilter>,
    primed: bool,
}

impl ImuPrefilter {
    pub fn new(cutoff_hz: f64, sample_hz: f64, channels: PrefilterChannels) -> Result<Self> {
        let coeffs = butterworth4_design(cutoff_hz, sample_hz)?;
        Ok(Self { channels, filters: vec![IirFilter::new(coeffs); 9], primed: false })
    }

    pub fn process(&mut self, s: &ImuSample) -> ImuSample {
        let raw = [s.gyro, s.accel, s.mag];
        let enabled = [self.channels.gyro, self.channels.accel, self.channels.mag];
        let mut out = [Vector3::zeros(); 3];
        for (k, v) in raw.iter().enumerate() {
            for i in 0..3 {
                let f = &mut self.filters[3 * k + i];
                if !self.primed {
                    f.prime(v[i]);
                }
                out[k][i] = if enabled[k] { f.step(v[i]) } else { v[i] };
            }
        }
        self.primed = true;
        ImuSample { t: s.t, gyro: out[0], accel: out[1], mag: out[2] }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_reference_is_valid() {
        assert!(WorldReference::default().validate().is_ok());
        let bad = WorldReference { gravity_g: Vector3::new(0.0, 0.0, 9.81), mag_field_g: Vector3::new(0.0, 0.1, 40.0) };
        assert_eq!(bad.validate(), Err(Error::ParallelReferences));
    }

    #[test]
    fn prefilter_passes_constant_and_respects_channel_mask() {
        let mut pf = ImuPrefilter::new(5.0, 50.0, PrefilterChannels { gyro: false, accel: true, mag: true }).unwrap();
        let s = ImuSample { t: 0.0, gyro: Vector3::new(0.1, 0.2, 0.3), accel: Vector3::new(0.0, 0.0, 9.81), mag: Vector3::new(22.0, 0.0, -42.0) };
        let out = pf.process(&s);
        assert!((out.accel - s.accel).norm() < 1e-12);
        let spike = ImuSample { accel: Vector3::new(5.0, 0.0, 9.81), gyro: Vector3::new(5.0, 0.0, 0.0), ..s };
        let out = pf.process(&spike);
        assert_eq!(out.gyro, spike.gyro);
        assert!(out.accel.x < 1.0);
    }
}
