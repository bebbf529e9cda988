//! Summary metrics computed from run CSV files.
//!
//! Undefined metrics (for example position errors of an orientation-only
//! run, or recovery time of a run without occlusion) are NaN.

use std::collections::HashMap;
use std::fmt::Write as _;

use nalgebra::{Vector2, Vector3};

use crate::error::{Error, Result};
use crate::quat::Quaternion;
use crate::scenario::MODE_INIT;
use crate::sim::format_g9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunMetrics {
    pub rows: usize,
    pub occluded_rows: usize,
    pub orient_rmse_deg: f64,
    pub pos_rmse_m: f64,
    pub normal_orient_rmse_deg: f64,
    pub normal_pos_rmse_m: f64,
    pub occluded_orient_rmse_deg: f64,
    pub occluded_pos_rmse_m: f64,
    /// Largest position error on an occluded row.
    pub max_occlusion_dev_m: f64,
    /// Worst time, over occlusion episodes, from the first row after the
    /// episode until the position error drops below twice the RMSE of the
    /// normal rows before it. Infinite if it never does.
    pub recovery_time_s: f64,
    /// Mean position NEES `Σ e_i² / P_ii` over rows with an estimate.
    pub nees_mean: f64,
    /// Raw accel-mag orientation against truth.
    pub raw_q_sb_rmse_deg: f64,
    pub vision_q_rmse_deg: f64,
    pub vision_t_rmse_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionMetrics {
    pub rows: usize,
    pub det_rmse_px: f64,
    pub est_rmse_px: f64,
}

fn rmse(errors: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut n) = (0.0, 0usize);
    for e in errors {
        sum += e * e;
        n += 1;
    }
    if n == 0 {
        f64::NAN
    } else {
        (sum / n as f64).sqrt()
    }
}

struct Table {
    header: HashMap<String, usize>,
    rows: Vec<(usize, Vec<String>)>,
}

impl Table {
    fn parse(csv: &str) -> Result<Self> {
        let mut lines = csv.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'));
        let (_, head) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty file".into() })?;
        let header: HashMap<String, usize> = head.split(',').enumerate().map(|(i, h)| (h.trim().to_string(), i)).collect();
        let width = header.len();
        let mut rows = Vec::new();
        for (n, l) in lines {
            let f: Vec<String> = l.split(',').map(|s| s.trim().to_string()).collect();
            if f.len() != width {
                return Err(Error::Parse { line: n + 1, msg: format!("expected {width} fields, got {}", f.len()) });
            }
            rows.push((n + 1, f));
        }
        Ok(Self { header, rows })
    }

    fn require(&self, cols: &[&str]) -> Result<Vec<usize>> {
        cols.iter()
            .map(|c| self.header.get(*c).copied().ok_or_else(|| Error::Parse { line: 1, msg: format!("missing column `{c}`") }))
            .collect()
    }

    fn num(line: usize, s: &str) -> Result<f64> {
        s.parse::<f64>().map_err(|e| Error::Parse { line, msg: format!("bad number `{s}`: {e}") })
    }

    fn nums<const N: usize>(line: usize, f: &[String], idx: &[usize]) -> Result<[f64; N]> {
        let mut out = [0.0; N];
        for (o, &i) in out.iter_mut().zip(idx) {
            *o = Self::num(line, &f[i])?;
        }
        Ok(out)
    }
}

fn quat(a: [f64; 4]) -> Quaternion {
    Quaternion::new(a[0], a[1], a[2], a[3])
}

fn all_finite(a: &[f64]) -> bool {
    a.iter().all(|v| v.is_finite())
}

struct PoseRecord {
    t: f64,
    occluded: bool,
    gt_q: Quaternion,
    gt_t: Vector3<f64>,
    q_sb: Option<Quaternion>,
    vis: Option<(Quaternion, Vector3<f64>)>,
    est_q: Option<Quaternion>,
    est_t: Option<Vector3<f64>>,
    p_t: [f64; 3],
}

impl PoseRecord {
    fn orient_err_deg(&self) -> Option<f64> {
        self.est_q.map(|q| q.angular_distance(&self.gt_q).to_degrees())
    }

    fn pos_err(&self) -> Option<f64> {
        self.est_t.map(|t| (t - self.gt_t).norm())
    }
}

const GT: [&str; 7] = ["gt_qw", "gt_qx", "gt_qy", "gt_qz", "gt_tx", "gt_ty", "gt_tz"];

fn parse_pose(csv: &str) -> Result<Vec<PoseRecord>> {
    let table = Table::parse(csv)?;
    let t = table.require(&["t", "mode", "valid"])?;
    let gt = table.require(&GT)?;
    let q_sb = table.require(&["q_sb_w", "q_sb_x", "q_sb_y", "q_sb_z"])?;
    let vis = table.require(&["q_vis_w", "q_vis_x", "q_vis_y", "q_vis_z", "t_vis_x", "t_vis_y", "t_vis_z"])?;
    let est = table.require(&["est_qw", "est_qx", "est_qy", "est_qz", "est_tx", "est_ty", "est_tz"])?;
    let p_t = table.require(&["P7", "P8", "P9"])?;
    let mut out = Vec::with_capacity(table.rows.len());
    for (line, f) in &table.rows {
        let line = *line;
        let mode = f[t[1]].as_str();
        let g = Table::nums::<7>(line, f, &gt)?;
        if !all_finite(&g) {
            return Err(Error::Parse { line, msg: "ground truth is missing".into() });
        }
        let qs = Table::nums::<4>(line, f, &q_sb)?;
        let v = Table::nums::<7>(line, f, &vis)?;
        let e = Table::nums::<7>(line, f, &est)?;
        let valid = f[t[2]] == "1";
        let has_est = mode != MODE_INIT;
        out.push(PoseRecord {
            t: Table::num(line, &f[t[0]])?,
            occluded: mode == "occluded",
            gt_q: quat([g[0], g[1], g[2], g[3]]),
            gt_t: Vector3::new(g[4], g[5], g[6]),
            q_sb: all_finite(&qs).then(|| quat(qs)),
            vis: (valid && all_finite(&v)).then(|| (quat([v[0], v[1], v[2], v[3]]), Vector3::new(v[4], v[5], v[6]))),
            est_q: (has_est && all_finite(&e[..4])).then(|| quat([e[0], e[1], e[2], e[3]])),
            est_t: (has_est && all_finite(&e[4..])).then(|| Vector3::new(e[4], e[5], e[6])),
            p_t: Table::nums::<3>(line, f, &p_t)?,
        });
    }
    Ok(out)
}

/// Metrics of a pose-run CSV.
pub fn compute_metrics(csv: &str) -> Result<RunMetrics> {
    let recs = parse_pose(csv)?;
    let orient = |occ: Option<bool>| rmse(recs.iter().filter(|r| occ.is_none_or(|o| r.occluded == o)).filter_map(PoseRecord::orient_err_deg));
    let pos = |occ: Option<bool>| rmse(recs.iter().filter(|r| occ.is_none_or(|o| r.occluded == o)).filter_map(PoseRecord::pos_err));

    let max_occlusion_dev_m = recs.iter().filter(|r| r.occluded).filter_map(PoseRecord::pos_err).fold(f64::NAN, f64::max);

    let mut recovery_time_s = f64::NAN;
    let mut i = 0;
    while i < recs.len() {
        if !recs[i].occluded {
            i += 1;
            continue;
        }
        let start = i;
        while i < recs.len() && recs[i].occluded {
            i += 1;
        }
        if i == recs.len() {
            break;
        }
        let before = rmse(recs[..start].iter().filter(|r| !r.occluded).filter_map(PoseRecord::pos_err));
        let t_end = recs[i].t;
        let rec = recs[i..].iter().find(|r| r.pos_err().is_some_and(|e| e < 2.0 * before)).map_or(f64::INFINITY, |r| r.t - t_end);
        recovery_time_s = if recovery_time_s.is_nan() { rec } else { recovery_time_s.max(rec) };
    }

    let nees: Vec<f64> = recs
        .iter()
        .filter_map(|r| {
            let e = r.est_t? - r.gt_t;
            r.p_t.iter().all(|p| *p > 0.0).then(|| (0..3).map(|k| e[k] * e[k] / r.p_t[k]).sum())
        })
        .collect();
    let nees_mean = if nees.is_empty() { f64::NAN } else { nees.iter().sum::<f64>() / nees.len() as f64 };

    Ok(RunMetrics {
        rows: recs.len(),
        occluded_rows: recs.iter().filter(|r| r.occluded).count(),
        orient_rmse_deg: orient(None),
        pos_rmse_m: pos(None),
        normal_orient_rmse_deg: orient(Some(false)),
        normal_pos_rmse_m: pos(Some(false)),
        occluded_orient_rmse_deg: orient(Some(true)),
        occluded_pos_rmse_m: pos(Some(true)),
        max_occlusion_dev_m,
        recovery_time_s,
        nees_mean,
        raw_q_sb_rmse_deg: rmse(recs.iter().filter_map(|r| r.q_sb.map(|q| q.angular_distance(&r.gt_q).to_degrees()))),
        vision_q_rmse_deg: rmse(recs.iter().filter_map(|r| r.vis.map(|(q, _)| q.angular_distance(&r.gt_q).to_degrees()))),
        vision_t_rmse_m: rmse(recs.iter().filter_map(|r| r.vis.map(|(_, t)| (t - r.gt_t).norm()))),
    })
}

/// Metrics of a region-run CSV, in pixels.
pub fn compute_region_metrics(csv: &str) -> Result<RegionMetrics> {
    let table = Table::parse(csv)?;
    let idx = table.require(&["gt_cx", "gt_cy", "det_cx", "det_cy", "est_cx", "est_cy"])?;
    let (mut det, mut est) = (Vec::new(), Vec::new());
    for (line, f) in &table.rows {
        let v = Table::nums::<6>(*line, f, &idx)?;
        if !all_finite(&v[..2]) {
            return Err(Error::Parse { line: *line, msg: "ground truth is missing".into() });
        }
        let gt = Vector2::new(v[0], v[1]);
        if all_finite(&v[2..4]) {
            det.push((Vector2::new(v[2], v[3]) - gt).norm());
        }
        if all_finite(&v[4..]) {
            est.push((Vector2::new(v[4], v[5]) - gt).norm());
        }
    }
    Ok(RegionMetrics { rows: table.rows.len(), det_rmse_px: rmse(det), est_rmse_px: rmse(est) })
}

/// Pose or region metrics, chosen by the CSV header.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metrics {
    Pose(RunMetrics),
    Region(RegionMetrics),
}

pub fn compute_any(csv: &str) -> Result<Metrics> {
    if csv.lines().next().is_some_and(|h| h.split(',').any(|c| c == "det_cx")) {
        Ok(Metrics::Region(compute_region_metrics(csv)?))
    } else {
        Ok(Metrics::Pose(compute_metrics(csv)?))
    }
}

impl Metrics {
    /// `key = value` summary lines.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: f64| {
            let _ = writeln!(s, "{k} = {}", format_g9(v));
        };
        match self {
            Metrics::Pose(m) => {
                kv("rows", m.rows as f64);
                kv("occluded_rows", m.occluded_rows as f64);
                kv("orient_rmse_deg", m.orient_rmse_deg);
                kv("pos_rmse_m", m.pos_rmse_m);
                kv("normal_orient_rmse_deg", m.normal_orient_rmse_deg);
                kv("normal_pos_rmse_m", m.normal_pos_rmse_m);
                kv("occluded_orient_rmse_deg", m.occluded_orient_rmse_deg);
                kv("occluded_pos_rmse_m", m.occluded_pos_rmse_m);
                kv("max_occlusion_dev_m", m.max_occlusion_dev_m);
                kv("recovery_time_s", m.recovery_time_s);
                kv("nees_mean", m.nees_mean);
                kv("raw_q_sb_rmse_deg", m.raw_q_sb_rmse_deg);
                kv("vision_q_rmse_deg", m.vision_q_rmse_deg);
                kv("vision_t_rmse_m", m.vision_t_rmse_m);
            }
            Metrics::Region(m) => {
                kv("rows", m.rows as f64);
                kv("det_rmse_px", m.det_rmse_px);
                kv("est_rmse_px", m.est_rmse_px);
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::POSE_HEADER;

    struct Row {
        t: f64,
        mode: &'static str,
        gt_q: [f64; 4],
        gt_t: [f64; 3],
        est_q: [f64; 4],
        est_t: [f64; 3],
        p_t: [f64; 3],
    }

    fn csv(rows: &[Row]) -> String {
        let mut s = format!("{POSE_HEADER}\n");
        for r in rows {
            let mut f: Vec<String> = vec![r.t.to_string(), r.mode.into()];
            f.extend(r.gt_q.iter().chain(&r.gt_t).map(|v| v.to_string()));
            f.extend(r.gt_q.iter().chain(&r.gt_q).chain(&r.gt_t).map(|v| v.to_string()));
            f.push("1".into());
            f.extend(r.est_q.iter().chain(&r.est_t).map(|v| v.to_string()));
            f.extend(["0", "0", "0"].map(String::from));
            let mut p = [1.0; 13];
            p[7..10].copy_from_slice(&r.p_t);
            f.extend(p.iter().map(|v| v.to_string()));
            s.push_str(&f.join(","));
            s.push('\n');
        }
        s
    }

    const I: [f64; 4] = [1.0, 0.0, 0.0, 0.0];

    #[test]
    fn perfect_estimate_has_zero_error() {
        let rows: Vec<Row> = (0..5).map(|k| Row { t: k as f64, mode: "normal", gt_q: I, gt_t: [k as f64, 1.0, 0.0], est_q: I, est_t: [k as f64, 1.0, 0.0], p_t: [1.0; 3] }).collect();
        let m = compute_metrics(&csv(&rows)).unwrap();
        assert_eq!((m.orient_rmse_deg, m.pos_rmse_m, m.nees_mean), (0.0, 0.0, 0.0));
        assert_eq!(m.raw_q_sb_rmse_deg, 0.0);
        assert!(m.recovery_time_s.is_nan() && m.max_occlusion_dev_m.is_nan());
    }

    #[test]
    fn constant_one_degree_offset() {
        let h = 0.5f64.to_radians();
        let q = [h.cos(), 0.0, 0.0, h.sin()];
        let rows: Vec<Row> = (0..4).map(|k| Row { t: k as f64, mode: "normal", gt_q: I, gt_t: [0.0; 3], est_q: q, est_t: [0.0; 3], p_t: [1.0; 3] }).collect();
        let m = compute_metrics(&csv(&rows)).unwrap();
        assert!((m.orient_rmse_deg - 1.0).abs() < 1e-12);
    }

    #[test]
    fn three_row_hand_computation() {
        // Position errors 0.1, 0.3 (occluded) and 0.05 along x; variances 0.01.
        let mk = |t: f64, mode, e: f64| Row { t, mode, gt_q: I, gt_t: [0.0; 3], est_q: I, est_t: [e, 0.0, 0.0], p_t: [0.01; 3] };
        let rows = [mk(0.0, "normal", 0.1), mk(0.5, "occluded", 0.3), mk(1.0, "normal", 0.05)];
        let m = compute_metrics(&csv(&rows)).unwrap();
        assert!((m.pos_rmse_m - ((0.01 + 0.09 + 0.0025) / 3.0f64).sqrt()).abs() < 1e-15);
        assert!((m.normal_pos_rmse_m - ((0.01 + 0.0025) / 2.0f64).sqrt()).abs() < 1e-15);
        assert_eq!(m.occluded_rows, 1);
        assert!((m.occluded_pos_rmse_m - 0.3).abs() < 1e-15);
        assert!((m.max_occlusion_dev_m - 0.3).abs() < 1e-15);
        // 0.05 < 2 × 0.1 at the first row after the episode.
        assert_eq!(m.recovery_time_s, 0.0);
        assert!((m.nees_mean - (1.0 + 9.0 + 0.25) / 3.0).abs() < 1e-12);
    }

    #[test]
    fn missing_ground_truth_is_an_error() {
        let rows = [Row { t: 0.0, mode: "normal", gt_q: [f64::NAN; 4], gt_t: [0.0; 3], est_q: I, est_t: [0.0; 3], p_t: [1.0; 3] }];
        assert!(matches!(compute_metrics(&csv(&rows)), Err(Error::Parse { line: 2, .. })));
        let no_cols = "t,mode,valid\n0,normal,1\n";
        assert!(matches!(compute_metrics(no_cols), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn region_metrics_from_header() {
        let text = "t,valid,det_cx,det_cy,gt_cx,gt_cy,est_cx,est_cy,est_vx,est_vy,P0,P1,P2,P3\n\
                    0,1,3,4,0,0,nan,nan,nan,nan,nan,nan,nan,nan\n\
                    1,1,0,0,0,0,1,0,0,0,1,1,1,1\n";
        let Metrics::Region(m) = compute_any(text).unwrap() else { panic!() };
        assert!((m.det_rmse_px - (25.0f64 / 2.0).sqrt()).abs() < 1e-12);
        assert_eq!(m.est_rmse_px, 1.0);
    }
}
