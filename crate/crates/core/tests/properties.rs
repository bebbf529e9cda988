//! Property tests across module boundaries.

use nalgebra::Vector3;
use proptest::prelude::*;

use fusetrack::attitude::ImuSample;
use fusetrack::config::ScenarioConfig;
use fusetrack::frames::{compute_r_go, global_to_vision, vision_position_to_global, vision_to_global, CalibrationSet, FrameId, FrameTransform};
use fusetrack::sim::{pack_frames, simulate, SensorLog, SimConfig, TrajectorySpec, VisionMeasurement};
use fusetrack::Quaternion;

fn unit() -> impl Strategy<Value = Quaternion> {
    (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
        .prop_filter("non-degenerate", |(w, x, y, z)| w * w + x * x + y * y + z * z > 1e-3)
        .prop_map(|(w, x, y, z)| Quaternion::new(w, x, y, z).normalize().unwrap())
}

fn vec3(r: f64) -> impl Strategy<Value = Vector3<f64>> {
    (-r..r, -r..r, -r..r).prop_map(|(x, y, z)| Vector3::new(x, y, z))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn calibration_round_trip(q_gb in unit(), q_cb in unit(), q_co in unit()) {
        let r_gb = FrameTransform::from_quaternion(&q_gb, FrameId::Body, FrameId::Global);
        let r_cb = FrameTransform::from_quaternion(&q_cb, FrameId::Body, FrameId::Camera);
        let r_co = FrameTransform::from_quaternion(&q_co, FrameId::Object, FrameId::Camera);
        let r_go = compute_r_go(&r_gb, &r_cb, &r_co).unwrap();
        let calib = CalibrationSet::new(r_cb.rotation, Some(r_go.rotation));
        let back = vision_to_global(&r_co, &calib).unwrap().to_quaternion().unwrap();
        prop_assert!(back.angular_distance(&q_gb) < 1e-9);
    }

    #[test]
    fn vision_pose_inverts(q_gb in unit(), q_cb in unit(), q_go in unit(), p in vec3(5.0)) {
        let calib = CalibrationSet::new(q_cb.to_rotation(), Some(q_go.to_rotation()));
        let r_gb = FrameTransform::from_quaternion(&q_gb, FrameId::Body, FrameId::Global);
        let (r_co, t_co) = global_to_vision(&r_gb, &p, &calib).unwrap();
        prop_assert!((vision_position_to_global(&r_co, &t_co, &calib).unwrap() - p).norm() < 1e-12);
        prop_assert!(vision_to_global(&r_co, &calib).unwrap().to_quaternion().unwrap().angular_distance(&q_gb) < 1e-9);
    }

    #[test]
    fn packing_conserves_samples(imu_dt in 0.005f64..0.05, frame_dt in 0.01f64..0.1, n_frames in 1usize..40) {
        let frames: Vec<f64> = (0..n_frames).map(|k| k as f64 * frame_dt).collect();
        let last = *frames.last().unwrap();
        let imu: Vec<ImuSample> = (0..)
            .map(|i| i as f64 * imu_dt)
            .take_while(|t| *t <= last)
            .map(|t| ImuSample { t, gyro: Vector3::zeros(), accel: Vector3::z() * 9.81, mag: Vector3::x() })
            .collect();
        let vision = vec![VisionMeasurement::dropout(); n_frames];
        let log = pack_frames(&imu, &frames, vision).unwrap();
        let packed: Vec<f64> = log.frames.iter().flat_map(|f| f.imu.iter().map(|s| s.t)).collect();
        let original: Vec<f64> = imu.iter().map(|s| s.t).collect();
        prop_assert_eq!(packed, original);
        for (k, f) in log.frames.iter().enumerate() {
            for s in &f.imu {
                prop_assert!(s.t <= f.t);
                if k > 0 {
                    prop_assert!(s.t > log.frames[k - 1].t);
                }
            }
        }
    }

    #[test]
    fn simulation_is_a_function_of_seed(seed in any::<u64>()) {
        let cfg = SimConfig { trajectory: TrajectorySpec { duration: 0.5, ..Default::default() }, ..Default::default() };
        let a = simulate(&cfg, seed).unwrap();
        let b = simulate(&cfg, seed).unwrap();
        prop_assert_eq!(a.log.to_csv(), b.log.to_csv());
        // Sensor logs survive their own CSV encoding.
        let back = SensorLog::from_csv(&a.log.to_csv()).unwrap();
        prop_assert_eq!(back.to_csv(), a.log.to_csv());
    }

    #[test]
    fn config_dump_round_trips(seed in any::<u64>(), tau in 0.01f64..10.0, k in 0.0f64..1000.0, alpha in 0.0f64..=1.0, offset in vec3(3.0)) {
        let text = format!(
            "seed = {seed}\nekf.tau = {tau}\nekf.K = {k}\nattitude.alpha = {alpha}\nocclusion.windows = 2 3 offset {} {} {}\n",
            offset.x, offset.y, offset.z
        );
        let cfg = ScenarioConfig::parse(&text, None).unwrap();
        prop_assert_eq!(ScenarioConfig::parse(&cfg.dump(), None).unwrap(), cfg);
    }
}
