use nalgebra::{DMatrix, DVector, Matrix2x3, Matrix6, Vector3, Vector6};

use super::{reprojection_rms, CameraIntrinsics, Correspondence, PoseCO, MIN_DEPTH};
use crate::error::{Error, Result};
use crate::quat::{skew, Quaternion};

const MAX_ITERATIONS: usize = 50;
const STEP_TOLERANCE: f64 = 1e-8;
/// Eigenvalue ratio of `JᵀJ` below which the normal equations are treated as
/// rank deficient.
const RANK_TOLERANCE: f64 = 1e-12;

/// Residuals `p_i − pr(R P_o + t)`, stacked as `[u₀ v₀ u₁ v₁ …]`.
pub fn reprojection_residuals(pose: &PoseCO, corrs: &[Correspondence], k: &CameraIntrinsics) -> Result<DVector<f64>> {
    let mut r = DVector::zeros(2 * corrs.len());
    for (i, c) in corrs.iter().enumerate() {
        let p = super::project(pose, &c.p_o, k)?;
        r[2 * i] = c.p_i.x - p.x;
        r[2 * i + 1] = c.p_i.y - p.y;
    }
    Ok(r)
}

/// Jacobian of [`reprojection_residuals`] with respect to the increment
/// `[δθ δt]`, where the pose is updated as `R ← exp(δθ) R`, `t ← t + δt`.
pub fn residual_jacobian(pose: &PoseCO, corrs: &[Correspondence], k: &CameraIntrinsics) -> Result<DMatrix<f64>> {
    let mut j = DMatrix::zeros(2 * corrs.len(), 6);
    for (i, c) in corrs.iter().enumerate() {
        let rp = pose.rotation.apply(&c.p_o);
        let x = rp + pose.translation;
        if !(x.z > MIN_DEPTH) {
            return Err(Error::BehindCamera(x.z));
        }
        let iz = 1.0 / x.z;
        let d_proj = Matrix2x3::new(k.fx * iz, 0.0, -k.fx * x.x * iz * iz, 0.0, k.fy * iz, -k.fy * x.y * iz * iz);
        // ∂X/∂δθ = −[R P]×, ∂X/∂δt = I, and the residual carries a minus sign
        let d_rot = d_proj * skew(&rp);
        let d_trans = -d_proj;
        j.view_mut((2 * i, 0), (2, 3)).copy_from(&d_rot);
        j.view_mut((2 * i, 3), (2, 3)).copy_from(&d_trans);
    }
    Ok(j)
}

/// Applies a manifold increment to a pose.
pub fn retract(pose: &PoseCO, delta: &Vector6<f64>) -> PoseCO {
    let d_theta = Vector3::new(delta[0], delta[1], delta[2]);
    let d_t = Vector3::new(delta[3], delta[4], delta[5]);
    let rotation = (Quaternion::from_rotation_vector(&d_theta).to_rotation() * pose.rotation).reorthonormalize();
    PoseCO::new(rotation, pose.translation + d_t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefineOutcome {
    pub pose: PoseCO,
    /// px²
    pub initial_cost: f64,
    /// px²
    pub final_cost: f64,
    /// Accepted steps.
    pub iterations: usize,
    /// Root-mean-square reprojection error per point at the final pose, px.
    pub rms: f64,
}

/// Gauss-Newton minimization of the squared reprojection error, with
/// Levenberg damping whenever a step would increase the cost.
pub fn refine_pose_detailed(corrs: &[Correspondence], k: &CameraIntrinsics, init: &PoseCO) -> Result<RefineOutcome> {
    if corrs.len() < 3 {
        return Err(Error::TooFewPoints { needed: 3, got: corrs.len() });
    }
    let mut pose = *init;
    let mut r = reprojection_residuals(&pose, corrs, k)?;
    let initial_cost = r.norm_squared();
    let mut cost = initial_cost;
    let mut lambda = 0.0;
    let mut iterations = 0;
    for _ in 0..MAX_ITERATIONS * 4 {
        if iterations >= MAX_ITERATIONS {
            break;
        }
        let j = residual_jacobian(&pose, corrs, k)?;
        let jtj: Matrix6<f64> = Matrix6::from_iterator((j.transpose() * &j).iter().copied());
        let jtr: Vector6<f64> = Vector6::from_iterator((j.transpose() * &r).iter().copied());
        let eig = jtj.symmetric_eigenvalues();
        if !(eig.min() > RANK_TOLERANCE * eig.max()) {
            return Err(Error::DegenerateGeometry(format!(
                "normal equations are rank deficient (eigenvalue ratio {:.3e}); correspondences do not constrain all six pose parameters",
                eig.min() / eig.max()
            )));
        }
        let damped = jtj + Matrix6::from_diagonal(&jtj.diagonal()) * lambda;
        let step = damped.cholesky().ok_or_else(|| Error::DegenerateGeometry("damped normal equations not positive definite".into()))?.solve(&-jtr);
        if !step.iter().all(|v| v.is_finite()) {
            return Err(Error::Diverged("non-finite Gauss-Newton step".into()));
        }
        let candidate = retract(&pose, &step);
        let trial = reprojection_residuals(&candidate, corrs, k);
        match trial {
            Ok(rt) if rt.norm_squared() <= cost => {
                pose = candidate;
                cost = rt.norm_squared();
                r = rt;
                iterations += 1;
                lambda = if lambda < 1e-6 { 0.0 } else { lambda / 10.0 };
                if step.norm() < STEP_TOLERANCE {
                    break;
                }
            }
            _ => {
                if step.norm() < STEP_TOLERANCE {
                    break;
                }
                lambda = if lambda == 0.0 { 1e-4 } else { lambda * 10.0 };
                if lambda > 1e12 {
                    break;
                }
            }
        }
    }
    let rms = (cost / corrs.len() as f64).sqrt();
    Ok(RefineOutcome { pose, initial_cost, final_cost: cost, iterations, rms })
}

pub fn refine_pose(corrs: &[Correspondence], k: &CameraIntrinsics, init: &PoseCO) -> Result<PoseCO> {
    Ok(refine_pose_detailed(corrs, k, init)?.pose)
}

/// Incremental tracking: refinement seeded with the previous pose. A final
/// RMS reprojection above `dropout_rms_px` is reported as a dropout.
pub fn track_frame(prev_pose: &PoseCO, corrs: &[Correspondence], k: &CameraIntrinsics, dropout_rms_px: f64) -> Result<PoseCO> {
    let out = refine_pose_detailed(corrs, k, prev_pose)?;
    let rms = reprojection_rms(&out.pose, corrs, k)?;
    if rms > dropout_rms_px {
        return Err(Error::VisionDropout { rms, limit: dropout_rms_px });
    }
    Ok(out.pose)
}
