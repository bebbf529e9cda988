//! Linear measurement update shared by the filters.

use nalgebra::{DMatrix, SMatrix, SVector};

use crate::error::{Error, Result};

pub(crate) struct UpdateOutcome<const N: usize, const M: usize> {
    pub dx: SVector<f64, N>,
    pub p: SMatrix<f64, N, N>,
    pub s: SMatrix<f64, M, M>,
}

/// Kalman update in Joseph form, followed by symmetrization.
pub(crate) fn joseph_update<const N: usize, const M: usize>(
    p: &SMatrix<f64, N, N>,
    h: &SMatrix<f64, M, N>,
    r: &SMatrix<f64, M, M>,
    innovation: &SVector<f64, M>,
    stage: &'static str,
) -> Result<UpdateOutcome<N, M>> {
    let ph_t = p * h.transpose();
    let s = h * ph_t + r;
    let chol = s.cholesky().ok_or(Error::NotPositiveDefinite { stage })?;
    // K = P Hᵀ S⁻¹  ⇔  Kᵀ = S⁻¹ H P
    let k = chol.solve(&ph_t.transpose()).transpose();
    let dx = k * innovation;
    let i_kh = SMatrix::<f64, N, N>::identity() - k * h;
    let p_new = i_kh * p * i_kh.transpose() + k * r * k.transpose();
    let p_new = (p_new + p_new.transpose()) * 0.5;
    if !dx.iter().all(|v| v.is_finite()) || !p_new.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite { stage });
    }
    Ok(UpdateOutcome { dx, p: p_new, s })
}

pub(crate) fn symmetrize<const N: usize>(p: &SMatrix<f64, N, N>) -> SMatrix<f64, N, N> {
    (p + p.transpose()) * 0.5
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue<const N: usize>(p: &SMatrix<f64, N, N>) -> f64 {
    let s = symmetrize(p);
    DMatrix::from_column_slice(N, N, s.as_slice()).symmetric_eigenvalues().min()
}

/// Largest absolute asymmetry `|P − Pᵀ|`.
pub fn asymmetry<const N: usize>(p: &SMatrix<f64, N, N>) -> f64 {
    (p - p.transpose()).abs().max()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Matrix2, Vector2};

    #[test]
    fn scalar_update_matches_closed_form() {
        let p = Matrix2::new(4.0, 0.0, 0.0, 1.0);
        let h = SMatrix::<f64, 1, 2>::new(1.0, 0.0);
        let r = SMatrix::<f64, 1, 1>::new(1.0);
        let y = SVector::<f64, 1>::new(2.0);
        let out = joseph_update(&p, &h, &r, &y, "test").unwrap();
        // gain 4/5
        assert!((out.dx - Vector2::new(1.6, 0.0)).norm() < 1e-15);
        assert!((out.p[(0, 0)] - 0.8).abs() < 1e-15);
        assert_eq!(out.p[(1, 1)], 1.0);
        assert_eq!(out.s[(0, 0)], 5.0);
    }

    #[test]
    fn indefinite_innovation_is_reported() {
        let p = Matrix2::zeros();
        let h = SMatrix::<f64, 1, 2>::new(1.0, 0.0);
        let r = SMatrix::<f64, 1, 1>::new(-1.0);
        let y = SVector::<f64, 1>::new(0.0);
        assert!(matches!(joseph_update(&p, &h, &r, &y, "x"), Err(Error::NotPositiveDefinite { stage: "x" })));
    }
}
