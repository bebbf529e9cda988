//! Fourth-order Butterworth low-pass, designed by the bilinear transform with
//! frequency prewarping and run as a transposed direct-form II section.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Numerator `b0..b4` and denominator `1, a1..a4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IirCoefficients {
    pub b: [f64; 5],
    pub a: [f64; 5],
}

impl IirCoefficients {
    /// Schur–Cohn step-down test: all poles strictly inside the unit circle.
    pub fn is_stable(&self) -> bool {
        let mut poly: Vec<f64> = self.a.to_vec();
        while poly.len() > 1 {
            let m = poly.len() - 1;
            let k = poly[m] / poly[0];
            if !(k.abs() < 1.0) {
                return false;
            }
            let scale = 1.0 - k * k;
            poly = (0..m).map(|i| (poly[i] - k * poly[m - i]) / scale).collect();
        }
        true
    }

    /// `|H(e^{jω})|` at frequency `f_hz` for sampling rate `fs_hz`.
    pub fn magnitude_at(&self, f_hz: f64, fs_hz: f64) -> f64 {
        let w = 2.0 * PI * f_hz / fs_hz;
        let eval = |c: &[f64; 5]| {
            let (mut re, mut im) = (0.0, 0.0);
            for (n, &cn) in c.iter().enumerate() {
                re += cn * (w * n as f64).cos();
                im -= cn * (w * n as f64).sin();
            }
            (re * re + im * im).sqrt()
        };
        eval(&self.b) / eval(&self.a)
    }
}

/// Designs a unit-DC-gain 4th-order Butterworth low-pass with −3 dB at
/// `cutoff_hz`.
pub fn butterworth4_design(cutoff_hz: f64, sample_hz: f64) -> Result<IirCoefficients> {
    if !(sample_hz > 0.0) || !sample_hz.is_finite() {
        return Err(Error::FilterDesign(format!("sample rate must be positive, got {sample_hz}")));
    }
    if !(cutoff_hz > 0.0 && cutoff_hz < 0.5 * sample_hz) {
        return Err(Error::FilterDesign(format!(
            "cutoff {cutoff_hz} Hz must lie in (0, {}) Hz",
            0.5 * sample_hz
        )));
    }
    let c = 1.0 / (PI * cutoff_hz / sample_hz).tan();
    let mut b = vec![1.0];
    let mut a = vec![1.0];
    // analog prototype s² + r s + 1 for the two conjugate pole pairs
    for k in 1..=2 {
        let r = 2.0 * (PI * (2 * k - 1) as f64 / 8.0).sin();
        let d = c * c + r * c + 1.0;
        let sb = [1.0 / d, 2.0 / d, 1.0 / d];
        let sa = [1.0, 2.0 * (1.0 - c * c) / d, (c * c - r * c + 1.0) / d];
        b = convolve(&b, &sb);
        a = convolve(&a, &sa);
    }
    let mut out = IirCoefficients { b: [0.0; 5], a: [0.0; 5] };
    out.b.copy_from_slice(&b);
    out.a.copy_from_slice(&a);
    Ok(out)
}

fn convolve(x: &[f64], y: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; x.len() + y.len() - 1];
    for (i, xi) in x.iter().enumerate() {
        for (j, yj) in y.iter().enumerate() {
            out[i + j] += xi * yj;
        }
    }
    out
}

/// One channel: coefficients plus its delay line.
#[derive(Debug, Clone, PartialEq)]
pub struct IirFilter {
    coeffs: IirCoefficients,
    z: [f64; 4],
}

impl IirFilter {
    pub fn new(coeffs: IirCoefficients) -> Self {
        Self { coeffs, z: [0.0; 4] }
    }

    pub fn coefficients(&self) -> &IirCoefficients {
        &self.coeffs
    }

    pub fn reset(&mut self) {
        self.z = [0.0; 4];
    }

    /// Loads the delay line with the steady state for a constant input `x`, so
    /// the first outputs do not ramp up from zero.
    pub fn prime(&mut self, x: f64) {
        let (b, a) = (&self.coeffs.b, &self.coeffs.a);
        let dc = b.iter().sum::<f64>() / a.iter().sum::<f64>();
        let y = dc * x;
        let mut acc = 0.0;
        for i in (0..4).rev() {
            acc += b[i + 1] * x - a[i + 1] * y;
            self.z[i] = acc;
        }
    }

    pub fn step(&mut self, x: f64) -> f64 {
        let (b, a) = (&self.coeffs.b, &self.coeffs.a);
        let y = b[0] * x + self.z[0];
        self.z[0] = b[1] * x - a[1] * y + self.z[1];
        self.z[1] = b[2] * x - a[2] * y + self.z[2];
        self.z[2] = b[3] * x - a[3] * y + self.z[3];
        self.z[3] = b[4] * x - a[4] * y;
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn impulse_response(c: &IirCoefficients, n: usize) -> Vec<f64> {
        let mut f = IirFilter::new(*c);
        (0..n).map(|i| f.step(if i == 0 { 1.0 } else { 0.0 })).collect()
    }

    // |DFT of the impulse response| at frequency f; independent of the
    // closed-form transfer function.
    fn response_from_impulse(h: &[f64], f: f64, fs: f64) -> f64 {
        let w = 2.0 * PI * f / fs;
        let (re, im) = h.iter().enumerate().fold((0.0, 0.0), |(re, im), (n, &hn)| {
            (re + hn * (w * n as f64).cos(), im - hn * (w * n as f64).sin())
        });
        (re * re + im * im).sqrt()
    }

    #[test]
    fn rejects_cutoff_at_or_above_nyquist() {
        assert!(butterworth4_design(25.0, 50.0).is_err());
        assert!(butterworth4_design(30.0, 50.0).is_err());
        assert!(butterworth4_design(0.0, 50.0).is_err());
        assert!(butterworth4_design(5.0, 50.0).is_ok());
    }

    #[test]
    fn step_settles_to_one() {
        for (fc, fs) in [(5.0, 50.0), (1.0, 100.0), (20.0, 50.0)] {
            let mut f = IirFilter::new(butterworth4_design(fc, fs).unwrap());
            let mut y = 0.0;
            for _ in 0..2000 {
                y = f.step(1.0);
            }
            assert!((y - 1.0).abs() < 1e-6, "fc={fc}: {y}");
        }
    }

    #[test]
    fn dc_gain_is_unity() {
        let c = butterworth4_design(5.0, 50.0).unwrap();
        let dc = c.b.iter().sum::<f64>() / c.a.iter().sum::<f64>();
        assert!((dc - 1.0).abs() < 1e-9);
        assert!(c.is_stable());
    }

    #[test]
    fn cutoff_gain_from_impulse_response() {
        let c = butterworth4_design(5.0, 50.0).unwrap();
        let h = impulse_response(&c, 4000);
        let g = response_from_impulse(&h, 5.0, 50.0);
        assert!((g - std::f64::consts::FRAC_1_SQRT_2).abs() / std::f64::consts::FRAC_1_SQRT_2 < 0.01, "{g}");
        assert!((h.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        // closed-form magnitude agrees with the impulse-response route
        for f in [0.5, 2.0, 5.0, 10.0, 20.0] {
            assert!((c.magnitude_at(f, 50.0) - response_from_impulse(&h, f, 50.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn magnitude_is_monotone() {
        let c = butterworth4_design(5.0, 50.0).unwrap();
        let mut prev = f64::INFINITY;
        for i in 0..=250 {
            let g = c.magnitude_at(25.0 * i as f64 / 250.0, 50.0);
            assert!(g <= prev + 1e-12);
            prev = g;
        }
    }

    #[test]
    fn zero_in_zero_out() {
        let mut f = IirFilter::new(butterworth4_design(5.0, 50.0).unwrap());
        assert!((0..100).all(|_| f.step(0.0) == 0.0));
    }

    #[test]
    fn attenuates_twenty_hz() {
        let mut f = IirFilter::new(butterworth4_design(5.0, 50.0).unwrap());
        let mut peak: f64 = 0.0;
        for n in 0..1000 {
            let y = f.step((2.0 * PI * 20.0 * n as f64 / 50.0).sin());
            if n > 500 {
                peak = peak.max(y.abs());
            }
        }
        assert!(peak < 0.05, "{peak}");
    }

    #[test]
    fn cascade_squares_cutoff_gain() {
        let c = butterworth4_design(5.0, 50.0).unwrap();
        let mut f1 = IirFilter::new(c);
        let mut f2 = IirFilter::new(c);
        let h: Vec<f64> = (0..4000).map(|i| f2.step(f1.step(if i == 0 { 1.0 } else { 0.0 }))).collect();
        let g = response_from_impulse(&h, 5.0, 50.0);
        assert!((g - 0.5).abs() / 0.5 < 0.02, "{g}");
    }

    #[test]
    fn primed_filter_holds_constant() {
        let mut f = IirFilter::new(butterworth4_design(5.0, 50.0).unwrap());
        f.prime(9.81);
        for _ in 0..50 {
            assert!((f.step(9.81) - 9.81).abs() < 1e-12);
        }
    }

    #[test]
    fn schur_cohn_flags_unstable() {
        let c = IirCoefficients { b: [1.0, 0.0, 0.0, 0.0, 0.0], a: [1.0, -2.5, 0.0, 0.0, 0.0] };
        assert!(!c.is_stable());
    }
}
