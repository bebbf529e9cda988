use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use super::{CameraIntrinsics, Correspondence, PoseCO};
use crate::error::{Error, Result};
use crate::quat::RotationMatrix;

const MAX_CONDITION: f64 = 1e6;
const MAX_ITERATIONS: usize = 50;
const TOLERANCE: f64 = 1e-6;

fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.singular_values();
    let (max, min) = (sv.max(), sv.min());
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

/// Rejects point sets that do not span three dimensions.
pub(crate) fn check_non_coplanar(points: &[Vector3<f64>]) -> Result<()> {
    if points.len() < 4 {
        return Err(Error::TooFewPoints { needed: 4, got: points.len() });
    }
    let mean = points.iter().sum::<Vector3<f64>>() / points.len() as f64;
    let centered = DMatrix::from_fn(points.len(), 3, |r, c| points[r][c] - mean[c]);
    let cond = condition_number(&centered);
    if cond > MAX_CONDITION {
        return Err(Error::DegenerateGeometry(format!("model points are coplanar or collinear (condition number {cond:.3e})")));
    }
    Ok(())
}

/// Pose from orthography and scaling with iterations. Point 0 is the
/// reference point.
pub fn posit_init(corrs: &[Correspondence], k: &CameraIntrinsics) -> Result<PoseCO> {
    let model: Vec<Vector3<f64>> = corrs.iter().map(|c| c.p_o).collect();
    check_non_coplanar(&model)?;
    let n = corrs.len();
    let image: Vec<_> = corrs.iter().map(|c| k.normalize(&c.p_i)).collect();
    let m0 = model[0];
    let a = DMatrix::from_fn(n - 1, 3, |r, c| model[r + 1][c] - m0[c]);
    let cond = condition_number(&a);
    if cond > MAX_CONDITION {
        return Err(Error::DegenerateGeometry(format!("reference-relative points are coplanar (condition number {cond:.3e})")));
    }
    let b = a.clone().pseudo_inverse(1e-12).map_err(|e| Error::DegenerateGeometry(e.to_string()))?;

    let mut eps = vec![0.0; n - 1];
    let mut pose = None;
    for _ in 0..MAX_ITERATIONS {
        let xs = DVector::from_fn(n - 1, |r, _| image[r + 1].x * (1.0 + eps[r]) - image[0].x);
        let ys = DVector::from_fn(n - 1, |r, _| image[r + 1].y * (1.0 + eps[r]) - image[0].y);
        let i_vec: Vector3<f64> = Vector3::from_iterator((&b * xs).iter().copied());
        let j_vec: Vector3<f64> = Vector3::from_iterator((&b * ys).iter().copied());
        let (ni, nj) = (i_vec.norm(), j_vec.norm());
        if !(ni > 0.0 && nj > 0.0) || !ni.is_finite() || !nj.is_finite() {
            return Err(Error::Diverged("POSIT scale collapsed".into()));
        }
        let scale = (ni * nj).sqrt();
        let z0 = 1.0 / scale;
        let (ri, rj) = (i_vec / ni, j_vec / nj);
        let rk = ri.cross(&rj);
        if !(rk.norm() > 1e-9) {
            return Err(Error::Diverged("POSIT row vectors became parallel".into()));
        }
        let rotation = RotationMatrix::from_matrix_unchecked(Matrix3::from_rows(&[ri.transpose(), rj.transpose(), (rk / rk.norm()).transpose()]))
            .reorthonormalize();
        let t0 = Vector3::new(image[0].x * z0, image[0].y * z0, z0);
        let candidate = PoseCO::new(rotation, t0 - rotation.apply(&m0));

        let rk = rotation.matrix().row(2).transpose();
        let new_eps: Vec<f64> = (0..n - 1).map(|r| (model[r + 1] - m0).dot(&rk) / z0).collect();
        let change = new_eps.iter().zip(&eps).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let pose_change = pose.map_or(f64::INFINITY, |p: PoseCO| {
            (p.rotation.matrix() - candidate.rotation.matrix()).abs().max().max((p.translation - candidate.translation).abs().max())
        });
        eps = new_eps;
        pose = Some(candidate);
        if change < TOLERANCE || pose_change < TOLERANCE {
            break;
        }
    }
    let pose = pose.ok_or_else(|| Error::Diverged("POSIT produced no estimate".into()))?;
    if !pose.translation.iter().all(|v| v.is_finite()) || !(pose.translation.z > 0.0) {
        return Err(Error::Diverged(format!("POSIT depth {:.3e} is not in front of the camera", pose.translation.z)));
    }
    Ok(pose)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quat::Quaternion;
    use crate::vision::{project, WireframeModel};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn synth(pose: &PoseCO, model: &WireframeModel, k: &CameraIntrinsics) -> Vec<Correspondence> {
        model.vertices.iter().map(|v| Correspondence { p_o: *v, p_i: project(pose, v, k).unwrap() }).collect()
    }

    fn pose(axis: Vector3<f64>, deg: f64, t: Vector3<f64>) -> PoseCO {
        PoseCO::new(Quaternion::from_axis_angle(&axis, deg.to_radians()).unwrap().to_rotation(), t)
    }

    fn rotation_error(a: &PoseCO, b: &PoseCO) -> f64 {
        a.rotation.to_quaternion().unwrap().angular_distance(&b.rotation.to_quaternion().unwrap())
    }

    #[test]
    fn noise_free_cube() {
        let k = CameraIntrinsics::default();
        let cube = WireframeModel::cuboid(&Vector3::repeat(0.2));
        for (axis, deg) in [(Vector3::new(1.0, 0.0, 0.0), 30.0), (Vector3::new(0.3, 1.0, -0.2), 25.0), (Vector3::new(0.0, 0.0, 1.0), 10.0)] {
            let truth = pose(axis, deg, Vector3::new(0.05, -0.03, 2.0));
            let est = posit_init(&synth(&truth, &cube, &k), &k).unwrap();
            assert!(rotation_error(&est, &truth) < 0.5f64.to_radians(), "{}", rotation_error(&est, &truth).to_degrees());
            assert!((est.translation - truth.translation).norm() < 0.01 * 2.0);
        }
    }

    #[test]
    fn noisy_cube() {
        let k = CameraIntrinsics::default();
        let cube = WireframeModel::cuboid(&Vector3::repeat(0.2));
        let truth = pose(Vector3::new(1.0, 1.0, 0.0), 20.0, Vector3::new(0.0, 0.0, 2.0));
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let n = Normal::new(0.0, 1.0).unwrap();
        let mut corrs = synth(&truth, &cube, &k);
        for c in &mut corrs {
            c.p_i.x += n.sample(&mut rng);
            c.p_i.y += n.sample(&mut rng);
        }
        let est = posit_init(&corrs, &k).unwrap();
        assert!(rotation_error(&est, &truth) < 3f64.to_radians());
    }

    #[test]
    fn coplanar_and_short_inputs_fail() {
        let k = CameraIntrinsics::default();
        let square: Vec<_> = [(0.0, 0.0), (0.1, 0.0), (0.0, 0.1), (0.1, 0.1)]
            .iter()
            .map(|&(x, y)| Vector3::new(x, y, 0.0))
            .collect();
        let truth = pose(Vector3::x(), 10.0, Vector3::new(0.0, 0.0, 2.0));
        let corrs: Vec<_> = square.iter().map(|v| Correspondence { p_o: *v, p_i: project(&truth, v, &k).unwrap() }).collect();
        assert!(matches!(posit_init(&corrs, &k), Err(Error::DegenerateGeometry(_))));
        assert_eq!(posit_init(&corrs[..3], &k), Err(Error::TooFewPoints { needed: 4, got: 3 }));
    }
}
