use std::fmt::Write as _;

use nalgebra::{Vector2, Vector3};

use super::VisionMeasurement;
use crate::attitude::ImuSample;
use crate::error::{Error, Result};
use crate::quat::Quaternion;
use crate::region::Detection2D;

/// Decimal rendering with nine significant digits, in the style of C's
/// `%.9g`: fixed notation for exponents in `[-5, 9)`, scientific otherwise,
/// trailing zeros removed.
pub fn format_g9(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if (-5..9).contains(&exp) {
        trim(&format!("{:.*}", (8 - exp) as usize, x))
    } else {
        format!("{}e{}{:02}", trim(mantissa), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

/// One video frame with the IMU samples captured since the previous frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameRecord {
    pub index: usize,
    pub t: f64,
    pub imu: Vec<ImuSample>,
    pub vision: VisionMeasurement,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SensorLog {
    pub frames: Vec<FrameRecord>,
}

impl SensorLog {
    pub fn imu_count(&self) -> usize {
        self.frames.iter().map(|f| f.imu.len()).sum()
    }

    /// CSV with `I` and `F` records; each frame's IMU samples precede it.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        s.push_str("# fusetrack sensor log\n");
        s.push_str("# I,t,gx,gy,gz,ax,ay,az,mx,my,mz  (s, rad/s, m/s^2, uT; body frame)\n");
        s.push_str("# F,idx,t,valid,qw,qx,qy,qz,tx,ty,tz,det_cx,det_cy  (vision pose R_CO/t_CO in m; detection in px)\n");
        let g = format_g9;
        for f in &self.frames {
            for i in &f.imu {
                let _ = writeln!(
                    s,
                    "I,{},{},{},{},{},{},{},{},{},{}",
                    g(i.t),
                    g(i.gyro.x),
                    g(i.gyro.y),
                    g(i.gyro.z),
                    g(i.accel.x),
                    g(i.accel.y),
                    g(i.accel.z),
                    g(i.mag.x),
                    g(i.mag.y),
                    g(i.mag.z)
                );
            }
            let v = &f.vision;
            let (dx, dy) = if v.detection.valid { (v.detection.cx, v.detection.cy) } else { (f64::NAN, f64::NAN) };
            let _ = writeln!(
                s,
                "F,{},{},{},{},{},{},{},{},{},{},{},{}",
                f.index,
                g(f.t),
                u8::from(v.valid),
                g(v.q_co.w),
                g(v.q_co.x),
                g(v.q_co.y),
                g(v.q_co.z),
                g(v.t_co.x),
                g(v.t_co.y),
                g(v.t_co.z),
                g(dx),
                g(dy)
            );
        }
        s
    }

    /// Parses [`SensorLog::to_csv`] output. Correspondences are not stored
    /// in the log and come back empty.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut frames = Vec::new();
        let mut pending = Vec::new();
        let mut last_t = f64::NEG_INFINITY;
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let body = raw.trim();
            if body.is_empty() || body.starts_with('#') {
                continue;
            }
            let err = |msg: String| Error::Parse { line, msg };
            let fields: Vec<&str> = body.split(',').map(str::trim).collect();
            let num = |i: usize| -> Result<f64> { fields[i].parse::<f64>().map_err(|e| err(format!("field {i} `{}`: {e}", fields[i]))) };
            let v3 = |i: usize| -> Result<Vector3<f64>> { Ok(Vector3::new(num(i)?, num(i + 1)?, num(i + 2)?)) };
            match fields[0] {
                "I" => {
                    if fields.len() != 11 {
                        return Err(err(format!("IMU record needs 11 fields, got {}", fields.len())));
                    }
                    let t = num(1)?;
                    if t < last_t {
                        return Err(err(format!("time {t} goes backwards")));
                    }
                    last_t = t;
                    pending.push(ImuSample { t, gyro: v3(2)?, accel: v3(5)?, mag: v3(8)? });
                }
                "F" => {
                    if fields.len() != 13 {
                        return Err(err(format!("frame record needs 13 fields, got {}", fields.len())));
                    }
                    let index = fields[1].parse::<usize>().map_err(|e| err(format!("frame index: {e}")))?;
                    let t = num(2)?;
                    if t < last_t {
                        return Err(err(format!("time {t} goes backwards")));
                    }
                    last_t = t;
                    let valid = match fields[3] {
                        "1" => true,
                        "0" => false,
                        other => return Err(err(format!("valid flag must be 0 or 1, got `{other}`"))),
                    };
                    let det = Vector2::new(num(11)?, num(12)?);
                    let detection = if det.iter().all(|v| v.is_finite()) { Detection2D::new(det.x, det.y) } else { Detection2D::missing() };
                    let vision = VisionMeasurement {
                        valid,
                        q_co: Quaternion::new(num(4)?, num(5)?, num(6)?, num(7)?),
                        t_co: v3(8)?,
                        detection,
                        correspondences: Vec::new(),
                    };
                    frames.push(FrameRecord { index, t, imu: std::mem::take(&mut pending), vision });
                }
                other => return Err(err(format!("unknown record type `{other}`"))),
            }
        }
        if !pending.is_empty() {
            return Err(Error::TrailingImu { count: pending.len() });
        }
        Ok(Self { frames })
    }
}

/// Assigns each IMU sample to the first frame at or after it: frame `k`
/// receives the samples with `t_{k−1} < t ≤ t_k`.
pub fn pack_frames(imu: &[ImuSample], frame_times: &[f64], vision: Vec<VisionMeasurement>) -> Result<SensorLog> {
    if frame_times.len() != vision.len() {
        return Err(Error::Config { key: "vision".into(), msg: format!("{} frame times but {} vision records", frame_times.len(), vision.len()) });
    }
    if let Some(i) = imu.windows(2).position(|w| !(w[1].t >= w[0].t)) {
        return Err(Error::Unsorted(i + 1));
    }
    if let Some(i) = frame_times.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(Error::Unsorted(i + 1));
    }
    let mut frames = Vec::with_capacity(frame_times.len());
    let mut next = 0;
    for (index, (&t, v)) in frame_times.iter().zip(vision).enumerate() {
        let start = next;
        while next < imu.len() && imu[next].t <= t {
            next += 1;
        }
        frames.push(FrameRecord { index, t, imu: imu[start..next].to_vec(), vision: v });
    }
    if next < imu.len() {
        return Err(Error::TrailingImu { count: imu.len() - next });
    }
    Ok(SensorLog { frames })
}
