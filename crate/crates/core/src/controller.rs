//! Geometric tracking control on SE(3) and thrust allocation.
//!
//! The configuration error is `H_e = H_D⁻¹ H_B`, the error twist
//! `T_e = T_B − Ad_{H_e⁻¹} T_D`, and the error function
//!
//! ```text
//! φ = ½ tr(K_p1 (I − R_e)) + ½ k_p2 ‖ξ_e‖²
//! ```
//!
//! The control wrench is the sum of a feedforward term that makes the error
//! dynamics autonomous, the negative gradient of `φ`, and a twist-error damper.

use nalgebra::{Matrix3, Matrix6, Vector3, Vector6};

use crate::error::{Error, Result};
use crate::se3::{adjoint_algebra, adjoint_group, coadjoint_algebra, Pose, Twist, Wrench};
use crate::tolerances;
use crate::vehicle::{AllocationMatrix, RigidBodyState, VehicleParams};

/// Proportional and derivative gains.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GainSet {
    rotational: Matrix3<f64>,
    translational: f64,
    damping: Matrix6<f64>,
}

fn check_spd<const N: usize>(name: &str, m: &nalgebra::SMatrix<f64, N, N>) -> Result<()>
where
    nalgebra::Const<N>: nalgebra::DimMin<nalgebra::Const<N>, Output = nalgebra::Const<N>>,
{
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidGains(format!("{name} has non-finite entries")));
    }
    let asym = (m - m.transpose()).abs().max();
    if asym > tolerances::MATRIX_SYMMETRY * m.abs().max().max(1.0) {
        return Err(Error::InvalidGains(format!("{name} is not symmetric (defect {asym:e})")));
    }
    if m.cholesky().is_none() {
        return Err(Error::InvalidGains(format!("{name} is not positive definite")));
    }
    Ok(())
}

impl GainSet {
    /// Validates `K_p1` and `K_d` as symmetric positive definite and `k_p2 > 0`.
    pub fn new(rotational: Matrix3<f64>, translational: f64, damping: Matrix6<f64>) -> Result<Self> {
        check_spd("K_p1", &rotational)?;
        check_spd("K_d", &damping)?;
        if !(translational > 0.0 && translational.is_finite()) {
            return Err(Error::InvalidGains(format!("k_p2 = {translational} must be positive")));
        }
        Ok(Self { rotational, translational, damping })
    }

    pub fn from_diagonals(rotational: [f64; 3], translational: f64, damping: [f64; 6]) -> Result<Self> {
        Self::new(
            Matrix3::from_diagonal(&Vector3::from(rotational)),
            translational,
            Matrix6::from_diagonal(&Vector6::from(damping)),
        )
    }

    /// All gains zero: the controller reduces to feedforward only.
    ///
    /// Bypasses validation; intended for open-loop comparisons.
    pub fn open_loop() -> Self {
        Self {
            rotational: Matrix3::zeros(),
            translational: 0.0,
            damping: Matrix6::zeros(),
        }
    }

    pub fn rotational(&self) -> &Matrix3<f64> {
        &self.rotational
    }

    pub fn translational(&self) -> f64 {
        self.translational
    }

    pub fn damping(&self) -> &Matrix6<f64> {
        &self.damping
    }
}

impl Default for GainSet {
    /// `K_p1 = 10 I`, `k_p2 = 3`, `K_d = diag(5, 5, 5, 2, 2, 2)`.
    fn default() -> Self {
        Self::from_diagonals([10.0; 3], 3.0, [5.0, 5.0, 5.0, 2.0, 2.0, 2.0]).expect("default gains are SPD")
    }
}

/// Desired pose, body twist and body twist rate at one instant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReferencePoint {
    pub pose: Pose,
    pub twist: Twist,
    pub twist_rate: Twist,
}

impl ReferencePoint {
    /// A motionless reference at `pose`.
    pub fn stationary(pose: Pose) -> Self {
        Self { pose, twist: Twist::zero(), twist_rate: Twist::zero() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrackingError {
    /// `H_D⁻¹ H_B`.
    pub pose_error: Pose,
    /// `T_B − Ad_{H_e⁻¹} T_D`, expressed in the body frame.
    pub twist_error: Twist,
    pub phi_rotational: f64,
    pub phi_translational: f64,
}

impl TrackingError {
    pub fn phi(&self) -> f64 {
        self.phi_rotational + self.phi_translational
    }

    /// `ξ_e = R_Dᵀ (ξ_B − ξ_D)`.
    pub fn position_error(&self) -> Vector3<f64> {
        self.pose_error.position
    }
}

/// The reference twist expressed in the body frame, `Ad_{H_e⁻¹} T_D`.
pub fn transported_reference(pose_error: &Pose, reference_twist: &Twist) -> Twist {
    adjoint_group(&pose_error.inverse()) * *reference_twist
}

pub fn tracking_error(state: &RigidBodyState, reference: &ReferencePoint, gains: &GainSet) -> TrackingError {
    let pose_error = reference.pose.inverse() * state.pose;
    let twist_error = state.twist - transported_reference(&pose_error, &reference.twist);
    let r = pose_error.rotation.matrix();
    let phi_rotational = 0.5 * (gains.rotational * (Matrix3::identity() - r)).trace();
    let phi_translational = 0.5 * gains.translational * pose_error.position.norm_squared();
    TrackingError { pose_error, twist_error, phi_rotational, phi_translational }
}

/// `(as(A))^∨` with `as(A) = ½(A − Aᵀ)`.
fn skew_vee(a: &Matrix3<f64>) -> Vector3<f64> {
    0.5 * Vector3::new(a[(2, 1)] - a[(1, 2)], a[(0, 2)] - a[(2, 0)], a[(1, 0)] - a[(0, 1)])
}

/// Differential of `φ` as a wrench: `[as(K_p1 R_e)^∨; k_p2 R_eᵀ ξ_e]`, so that `φ̇ = dφ · T_e`.
pub fn error_gradient(err: &TrackingError, gains: &GainSet) -> Wrench {
    let r = err.pose_error.rotation.matrix();
    Wrench::new(
        skew_vee(&(gains.rotational * r)),
        gains.translational * (r.transpose() * err.pose_error.position),
    )
}

/// `φ̇` along the error flow `Ḣ_e = H_e T̃_e`.
pub fn error_function_rate(err: &TrackingError, gains: &GainSet) -> f64 {
    error_gradient(err, gains).power(&err.twist_error)
}

/// Components of the commanded body wrench.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ControlWrench {
    pub feedforward: Wrench,
    pub proportional: Wrench,
    pub derivative: Wrench,
}

impl ControlWrench {
    pub fn total(&self) -> Wrench {
        self.feedforward + self.proportional + self.derivative
    }
}

/// Feedforward, proportional and derivative wrenches for the current state.
pub fn control_wrench(
    state: &RigidBodyState,
    reference: &ReferencePoint,
    gains: &GainSet,
    params: &VehicleParams,
) -> (TrackingError, ControlWrench) {
    let err = tracking_error(state, reference, gains);
    let transport = adjoint_group(&err.pose_error.inverse());
    let carried = transport * reference.twist;
    let desired_rate = transport * reference.twist_rate - adjoint_algebra(&err.twist_error) * carried;
    let inertia = &params.inertia;
    let feedforward = -params.gravity_wrench(&state.pose.rotation)
        - coadjoint_algebra(&state.twist, &inertia.momentum(&state.twist))
        + inertia.momentum(&desired_rate);
    let proportional = -error_gradient(&err, gains);
    let derivative = Wrench::from_vector(&-(gains.damping * err.twist_error.to_vector()));
    (err, ControlWrench { feedforward, proportional, derivative })
}

/// What to do when the allocated thrusts leave the box `|λ_i| ≤ λ_max`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SaturationPolicy {
    /// Keep the exact solution and flag the violation.
    #[default]
    Report,
    /// Scale the whole thrust vector uniformly back into the box.
    Scale,
}

/// A thrust demand that exceeded the per-rotor bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SaturationWarning {
    /// `max_i |λ_i| / λ_max` of the unclipped demand (> 1).
    pub ratio: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Allocation {
    pub thrusts: Vector6<f64>,
    pub saturation: Option<SaturationWarning>,
    /// True when the thrusts were scaled and no longer reproduce the requested wrench.
    pub scaled: bool,
}

impl Allocation {
    pub fn peak(&self) -> f64 {
        self.thrusts.amax()
    }
}

/// Solves `M λ = W` by LU factorization after a condition-number gate.
pub fn allocate(
    wrench: &Wrench,
    matrix: &AllocationMatrix,
    max_thrust: f64,
    policy: SaturationPolicy,
) -> Result<Allocation> {
    let condition = matrix.condition_number();
    if !(condition < tolerances::ALLOCATION_CONDITION_MAX) {
        return Err(Error::SingularAllocation { condition });
    }
    let thrusts = matrix
        .matrix()
        .lu()
        .solve(&wrench.to_vector())
        .ok_or(Error::SingularAllocation { condition })?;
    let ratio = thrusts.amax() / max_thrust;
    if ratio <= 1.0 {
        return Ok(Allocation { thrusts, saturation: None, scaled: false });
    }
    let saturation = Some(SaturationWarning { ratio });
    Ok(match policy {
        SaturationPolicy::Report => Allocation { thrusts, saturation, scaled: false },
        SaturationPolicy::Scale => Allocation { thrusts: thrusts / ratio, saturation, scaled: true },
    })
}
