//! End-to-end runs of the bundled scenarios and the runner's contract.

use std::path::{Path, PathBuf};

use fusetrack::config::{FilterKind, ScenarioConfig};
use fusetrack::metrics::compute_metrics;
use fusetrack::scenario::{run_scenario, RunRows};
use fusetrack::sim::NoiseSpec;

fn bundled(name: &str) -> ScenarioConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name);
    ScenarioConfig::load(&path).unwrap()
}

#[test]
fn no_occlusion_scenario_beats_raw_sensors() {
    let out = run_scenario(&bundled("no_occlusion.cfg"), FilterKind::Fused).unwrap();
    assert!(out.failure.is_none());
    let m = compute_metrics(&out.to_csv()).unwrap();
    assert_eq!(m.occluded_rows, 0);
    assert!(m.orient_rmse_deg <= 2.0 && m.orient_rmse_deg < m.raw_q_sb_rmse_deg, "{m:?}");
    assert!(m.pos_rmse_m < m.vision_t_rmse_m, "{m:?}");
}

#[test]
fn occlusion_scenario_marks_exactly_the_corrupted_frames() {
    let cfg = bundled("occlusion.cfg");
    let out = run_scenario(&cfg, FilterKind::Fused).unwrap();
    let RunRows::Pose(rows) = &out.rows else { panic!("pose rows expected") };
    for r in rows {
        let corrupted = (5.0..6.0).contains(&r.t);
        assert_eq!(r.mode == "occluded", corrupted, "t = {}", r.t);
    }
    assert_eq!(rows.iter().filter(|r| r.mode == "occluded").count(), 30);
}

#[test]
fn zero_noise_orientation_is_nearly_exact() {
    let mut cfg = bundled("no_occlusion.cfg");
    cfg.sim.noise = NoiseSpec::zero();
    let m = compute_metrics(&run_scenario(&cfg, FilterKind::Fused).unwrap().to_csv()).unwrap();
    assert!(m.orient_rmse_deg < 0.2, "{}", m.orient_rmse_deg);
}

#[test]
fn orientation_only_filters_report_no_position() {
    let mut cfg = ScenarioConfig::default();
    cfg.sim.trajectory.duration = 4.0;
    for f in [FilterKind::Orient, FilterKind::Complementary] {
        let m = compute_metrics(&run_scenario(&cfg, f).unwrap().to_csv()).unwrap();
        assert!(m.orient_rmse_deg.is_finite() && m.pos_rmse_m.is_nan(), "{f:?}");
    }
}

#[test]
fn region_run_beats_raw_detections() {
    let mut cfg = ScenarioConfig::default();
    cfg.sim.trajectory.duration = 10.0;
    cfg.sim.noise.detection_sigma = 3.0;
    let csv = run_scenario(&cfg, FilterKind::Region).unwrap().to_csv();
    let fusetrack::metrics::Metrics::Region(m) = fusetrack::metrics::compute_any(&csv).unwrap() else { panic!() };
    assert!(m.est_rmse_px < m.det_rmse_px, "{m:?}");
}

#[test]
fn bundled_configs_round_trip_through_dump() {
    for name in ["no_occlusion.cfg", "occlusion.cfg"] {
        let cfg = bundled(name);
        assert_eq!(ScenarioConfig::parse(&cfg.dump(), Some(Path::new("."))).unwrap(), cfg, "{name}");
    }
}
