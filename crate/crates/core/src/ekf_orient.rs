//! Seven-state orientation EKF: body rate `ω` (first-order Gauss–Markov) and
//! body → global quaternion `q`, observed directly by the gyro and by the
//! accel/mag quaternion.
//!
//! State layout is `[ω₁ ω₂ ω₃ q₀ q₁ q₂ q₃]`.

use nalgebra::{SMatrix, SVector, Vector3};

use crate::error::{Error, Result};
use crate::kalman::{joseph_update, symmetrize};
use crate::quat::Quaternion;

pub type Vector7 = SVector<f64, 7>;
pub type Matrix7 = SMatrix<f64, 7, 7>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientTuning {
    /// Gyro correlation time, s.
    pub tau: f64,
    /// Propagation interval, s.
    pub delta: f64,
    /// Angular-rate driving noise variance, rad²/s².
    pub d: f64,
    /// Quaternion process noise variance.
    pub q_p: f64,
    /// Gyro measurement variance, rad²/s².
    pub var_gyro: f64,
    /// Accel/mag quaternion measurement variance.
    pub var_q: f64,
}

impl Default for OrientTuning {
    fn default() -> Self {
        Self { tau: 0.5, delta: 0.02, d: 0.4, q_p: 0.01, var_gyro: 0.1, var_q: 0.001 }
    }
}

impl OrientTuning {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("ekf.tau", self.tau),
            ("ekf.delta", self.delta),
            ("ekf.D", self.d),
            ("ekf.q_p", self.q_p),
            ("ekf.var_gyro", self.var_gyro),
            ("ekf.var_q", self.var_q),
        ];
        for (key, v) in fields {
            // tau may be +inf (no rate decay)
            if !(v > 0.0) || v.is_nan() || (key != "ekf.tau" && !v.is_finite()) {
                return Err(Error::Config { key: key.into(), msg: format!("must be positive and finite, got {v}") });
            }
        }
        Ok(())
    }

    /// `e^{−δ/τ}`
    pub fn decay(&self) -> f64 {
        (-self.delta / self.tau).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientState7 {
    pub omega: Vector3<f64>,
    pub q: Quaternion,
    pub p: Matrix7,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientMeasurement7 {
    pub omega_b: Vector3<f64>,
    pub q_sb: Quaternion,
}

/// Initial covariance `diag(0.1·I₃, 0.01·I₄)`.
pub fn initial_covariance() -> Matrix7 {
    Matrix7::from_diagonal(&Vector7::from_column_slice(&[0.1, 0.1, 0.1, 0.01, 0.01, 0.01, 0.01]))
}

impl OrientState7 {
    /// Starts from the first measurement with the default initial covariance.
    pub fn from_measurement(z: &OrientMeasurement7) -> Self {
        Self { omega: z.omega_b, q: z.q_sb, p: initial_covariance() }
    }

    pub fn to_vector(&self) -> Vector7 {
        pack(&self.omega, &self.q)
    }

    pub fn is_finite(&self) -> bool {
        self.omega.iter().all(|v| v.is_finite()) && self.q.is_finite() && self.p.iter().all(|v| v.is_finite())
    }
}

fn pack(omega: &Vector3<f64>, q: &Quaternion) -> Vector7 {
    Vector7::from_column_slice(&[omega.x, omega.y, omega.z, q.w, q.x, q.y, q.z])
}

fn unpack(x: &Vector7) -> (Vector3<f64>, Quaternion) {
    (Vector3::new(x[0], x[1], x[2]), Quaternion::new(x[3], x[4], x[5], x[6]))
}

/// Discretized process map before quaternion renormalization:
/// `ω' = e^{−δ/τ} ω`, `q' = q + (δ/2) q ⊗ (0, ω)`.
pub fn process_map(x: &Vector7, tuning: &OrientTuning) -> Vector7 {
    let (omega, q) = unpack(x);
    let dq = q.multiply(&Quaternion::pure(&omega)).scale(0.5 * tuning.delta);
    let q_next = Quaternion::new(q.w + dq.w, q.x + dq.x, q.y + dq.y, q.z + dq.z);
    pack(&(omega * tuning.decay()), &q_next)
}

/// State propagation over one interval; `q` is renormalized and `P` is left
/// untouched.
pub fn process_propagate(x: &OrientState7, tuning: &OrientTuning) -> OrientState7 {
    let (omega, q) = unpack(&process_map(&x.to_vector(), tuning));
    OrientState7 { omega, q: q.normalize().unwrap_or(x.q), p: x.p }
}

/// Jacobian of [`process_map`] at `x`.
pub fn build_f_q(x: &OrientState7, tuning: &OrientTuning) -> Matrix7 {
    let h = 0.5 * tuning.delta;
    let (w, q) = (x.omega, x.q);
    let mut f = Matrix7::zeros();
    f.fixed_view_mut::<3, 3>(0, 0).fill_diagonal(tuning.decay());
    // q ⊗ (0, ω) = Ξ(q) ω
    let d_q_d_omega = SMatrix::<f64, 4, 3>::new(
        -q.x, -q.y, -q.z, //
        q.w, -q.z, q.y, //
        q.z, q.w, -q.x, //
        -q.y, q.x, q.w,
    );
    f.fixed_view_mut::<4, 3>(3, 0).copy_from(&(d_q_d_omega * h));
    let omega_mat = SMatrix::<f64, 4, 4>::new(
        0.0, -w.x, -w.y, -w.z, //
        w.x, 0.0, w.z, -w.y, //
        w.y, -w.z, 0.0, w.x, //
        w.z, w.y, -w.x, 0.0,
    );
    f.fixed_view_mut::<4, 4>(3, 3).copy_from(&(SMatrix::<f64, 4, 4>::identity() + omega_mat * h));
    f
}

/// `diag(I₃ · (D/2τ)(1 − e^{−2δ/τ}), I₄ · q_p)`
pub fn build_q_q(tuning: &OrientTuning) -> Matrix7 {
    let q11 = tuning.d / (2.0 * tuning.tau) * (1.0 - (-2.0 * tuning.delta / tuning.tau).exp());
    let mut q = Matrix7::zeros();
    for i in 0..3 {
        q[(i, i)] = q11;
    }
    for i in 3..7 {
        q[(i, i)] = tuning.q_p;
    }
    q
}

/// `diag(I₃ · σ²_ω, I₄ · σ²_q)`
pub fn build_r_q(tuning: &OrientTuning) -> Matrix7 {
    let mut r = Matrix7::zeros();
    for i in 0..3 {
        r[(i, i)] = tuning.var_gyro;
    }
    for i in 3..7 {
        r[(i, i)] = tuning.var_q;
    }
    r
}

/// Covariance prediction `F P Fᵀ + Q`, with `F` evaluated at the prior.
pub(crate) fn predict_covariance(x: &OrientState7, tuning: &OrientTuning) -> Matrix7 {
    let f = build_f_q(x, tuning);
    symmetrize(&(f * x.p * f.transpose() + build_q_q(tuning)))
}

/// One predict/update cycle with `H = I₇`.
pub fn ekf_orient_step(x: &OrientState7, z: &OrientMeasurement7, tuning: &OrientTuning) -> Result<OrientState7> {
    if !x.is_finite() {
        return Err(Error::NonFinite { stage: "orientation prior" });
    }
    if !z.omega_b.iter().all(|v| v.is_finite()) || !z.q_sb.is_finite() {
        return Err(Error::NonFinite { stage: "orientation measurement" });
    }
    let mut pred = process_propagate(x, tuning);
    pred.p = predict_covariance(x, tuning);
    if !pred.is_finite() {
        return Err(Error::NonFinite { stage: "orientation predict" });
    }
    let q_meas = z.q_sb.aligned_to(&pred.q);
    let innovation = pack(&z.omega_b, &q_meas) - pred.to_vector();
    let out = joseph_update(&pred.p, &Matrix7::identity(), &build_r_q(tuning), &innovation, "orientation update")?;
    let (omega, q) = unpack(&(pred.to_vector() + out.dx));
    let q = q.normalize().map_err(|_| Error::NonFinite { stage: "orientation update" })?;
    Ok(OrientState7 { omega, q, p: out.p })
}

/// Stateful filter. The first measurement initializes the state.
#[derive(Debug, Clone)]
pub struct OrientationEkf {
    pub tuning: OrientTuning,
    state: Option<OrientState7>,
}

impl OrientationEkf {
    pub fn new(tuning: OrientTuning) -> Self {
        Self { tuning, state: None }
    }

    pub fn state(&self) -> Option<&OrientState7> {
        self.state.as_ref()
    }

    pub fn update(&mut self, z: &OrientMeasurement7) -> Result<OrientState7> {
        let next = match &self.state {
            None => OrientState7::from_measurement(z),
            Some(x) => ekf_orient_step(x, z, &self.tuning)?,
        };
        self.state = Some(next);
        Ok(next)
    }
}

/// Central finite-difference Jacobian of `f` at `x`.
#[cfg(test)]
pub(crate) fn numeric_jacobian<const N: usize>(f: impl Fn(&SVector<f64, N>) -> SVector<f64, N>, x: &SVector<f64, N>, h: f64) -> SMatrix<f64, N, N> {
    let mut j = SMatrix::<f64, N, N>::zeros();
    for c in 0..N {
        let mut xp = *x;
        let mut xm = *x;
        xp[c] += h;
        xm[c] -= h;
        j.set_column(c, &((f(&xp) - f(&xm)) / (2.0 * h)));
    }
    j
}
