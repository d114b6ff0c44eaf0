//! Tilted hexarotor geometry, thrust allocation and rigid-body dynamics.
//!
//! Rotors sit on a planar hexagon at azimuth `ψ_i = (i − 1)π/3` and radius `L`.
//! Each propeller frame is `R_z(ψ_i) R_x(α_i) R_y(β_i)` with the alternating
//! tilt pattern `α_i = (−1)^{i+1} α`, `β_i = (−1)^{i+1} β`. Rotor indices in
//! the public API are 1-based.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3};

use nalgebra::{Matrix3, Matrix6, SVD, Vector3, Vector6};

use crate::error::{Error, Result};
use crate::se3::{coadjoint_algebra, co_adjoint_wrench, Pose, Rotation, SpatialInertia, Twist, Wrench};
use crate::tolerances;

pub const ROTOR_COUNT: usize = 6;

/// Conventional alternating spin pattern.
pub const ALTERNATING_SPIN: [i8; ROTOR_COUNT] = [1, -1, 1, -1, 1, -1];

pub const STANDARD_GRAVITY: f64 = 9.81;

fn check_index(i: usize) -> Result<()> {
    if (1..=ROTOR_COUNT).contains(&i) {
        Ok(())
    } else {
        Err(Error::IndexOutOfRange(i))
    }
}

/// `(−1)^{i+1}` for a 1-based rotor index.
fn alternation(i: usize) -> f64 {
    if i % 2 == 1 {
        1.0
    } else {
        -1.0
    }
}

fn azimuth(i: usize) -> f64 {
    (i - 1) as f64 * FRAC_PI_3
}

/// Attachment point of rotor `i` in the body frame.
pub fn rotor_position(i: usize, arm_length: f64) -> Result<Vector3<f64>> {
    check_index(i)?;
    Ok(Rotation::about_z(azimuth(i)) * Vector3::new(arm_length, 0.0, 0.0))
}

/// Orientation of propeller frame `i` relative to the body.
pub fn rotor_orientation(i: usize, alpha: f64, beta: f64) -> Result<Rotation> {
    check_index(i)?;
    let s = alternation(i);
    Ok(Rotation::about_z(azimuth(i)) * Rotation::about_x(s * alpha) * Rotation::about_y(s * beta))
}

/// Unit thrust direction `u_i = R_{p_i} ê₃`.
pub fn thrust_axis(i: usize, alpha: f64, beta: f64) -> Result<Vector3<f64>> {
    Ok(rotor_orientation(i, alpha, beta)?.matrix().column(2).into_owned())
}

/// Reaction drag torque of a single propeller.
pub fn drag_torque(thrust: f64, drag_ratio: f64, spin: i8) -> f64 {
    drag_ratio * f64::from(spin) * thrust
}

/// Geometric and actuator description of the hexarotor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotorLayout {
    arm_length: f64,
    drag_ratio: f64,
    max_thrust: f64,
    spin_signs: [i8; ROTOR_COUNT],
    alpha: f64,
    beta: f64,
}

impl RotorLayout {
    /// Layout with `γ = 0` and the alternating spin pattern.
    pub fn new(arm_length: f64, max_thrust: f64, alpha: f64, beta: f64) -> Result<Self> {
        Self::with_all(arm_length, 0.0, max_thrust, ALTERNATING_SPIN, alpha, beta)
    }

    pub fn with_all(
        arm_length: f64,
        drag_ratio: f64,
        max_thrust: f64,
        spin_signs: [i8; ROTOR_COUNT],
        alpha: f64,
        beta: f64,
    ) -> Result<Self> {
        if !(arm_length.is_finite() && arm_length > 0.0) {
            return Err(Error::InvalidLayout(format!("arm length must be positive, got {arm_length}")));
        }
        if !(max_thrust.is_finite() && max_thrust > 0.0) {
            return Err(Error::InvalidLayout(format!("max thrust must be positive, got {max_thrust}")));
        }
        if !drag_ratio.is_finite() {
            return Err(Error::InvalidLayout("drag ratio must be finite".into()));
        }
        if let Some(s) = spin_signs.iter().find(|s| s.abs() != 1) {
            return Err(Error::InvalidLayout(format!("spin sign must be ±1, got {s}")));
        }
        check_tilt(alpha, "alpha")?;
        check_tilt(beta, "beta")?;
        Ok(Self {
            arm_length,
            drag_ratio,
            max_thrust,
            spin_signs,
            alpha,
            beta,
        })
    }

    /// Unit-scale design template: `L = 1`, `λ_max = 1`, `γ = 0`, untilted.
    pub fn unit() -> Self {
        Self::new(1.0, 1.0, 0.0, 0.0).expect("unit layout is valid")
    }

    pub fn with_tilt(&self, alpha: f64, beta: f64) -> Result<Self> {
        check_tilt(alpha, "alpha")?;
        check_tilt(beta, "beta")?;
        Ok(Self { alpha, beta, ..*self })
    }

    pub fn with_drag_ratio(&self, drag_ratio: f64) -> Result<Self> {
        Self::with_all(self.arm_length, drag_ratio, self.max_thrust, self.spin_signs, self.alpha, self.beta)
    }

    pub fn with_arm_length(&self, arm_length: f64) -> Result<Self> {
        Self::with_all(arm_length, self.drag_ratio, self.max_thrust, self.spin_signs, self.alpha, self.beta)
    }

    pub fn arm_length(&self) -> f64 {
        self.arm_length
    }
    pub fn drag_ratio(&self) -> f64 {
        self.drag_ratio
    }
    pub fn max_thrust(&self) -> f64 {
        self.max_thrust
    }
    pub fn spin_signs(&self) -> [i8; ROTOR_COUNT] {
        self.spin_signs
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Per-rotor `(α_i, β_i)`.
    pub fn rotor_tilts(&self) -> [(f64, f64); ROTOR_COUNT] {
        std::array::from_fn(|k| {
            let s = alternation(k + 1);
            (s * self.alpha, s * self.beta)
        })
    }

    pub fn positions(&self) -> [Vector3<f64>; ROTOR_COUNT] {
        std::array::from_fn(|k| rotor_position(k + 1, self.arm_length).expect("index in range"))
    }

    /// The `u_i`, columns of the force map `U`.
    pub fn thrust_axes(&self) -> [Vector3<f64>; ROTOR_COUNT] {
        std::array::from_fn(|k| thrust_axis(k + 1, self.alpha, self.beta).expect("index in range"))
    }

    /// The `t_i = r_i ∧ u_i + γσ_i u_i`, columns of the torque map `T`.
    pub fn torque_axes(&self) -> [Vector3<f64>; ROTOR_COUNT] {
        let r = self.positions();
        let u = self.thrust_axes();
        std::array::from_fn(|k| {
            r[k].cross(&u[k]) + u[k] * drag_torque(1.0, self.drag_ratio, self.spin_signs[k])
        })
    }

    /// Wrench produced by a single rotor at thrust `λ_i`.
    pub fn rotor_wrench(&self, i: usize, thrust: f64) -> Result<Wrench> {
        check_index(i)?;
        let r = rotor_position(i, self.arm_length)?;
        let u = thrust_axis(i, self.alpha, self.beta)?;
        let drag = drag_torque(thrust, self.drag_ratio, self.spin_signs[i - 1]);
        Ok(Wrench::new(r.cross(&u) * thrust + u * drag, u * thrust))
    }
}

fn check_tilt(angle: f64, name: &str) -> Result<()> {
    // a hair of slack so values converted from degrees at the box edge are accepted
    if angle.is_finite() && (-1e-12..=FRAC_PI_2 + 1e-12).contains(&angle) {
        Ok(())
    } else {
        Err(Error::InvalidLayout(format!("{name} = {angle} rad outside [0, π/2]")))
    }
}

/// Thrust-to-wrench map `M = [T; U]`, one column per rotor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AllocationMatrix(Matrix6<f64>);

impl AllocationMatrix {
    pub fn from_matrix(m: Matrix6<f64>) -> Self {
        Self(m)
    }

    pub fn matrix(&self) -> &Matrix6<f64> {
        &self.0
    }

    pub fn torque_map(&self) -> nalgebra::Matrix3x6<f64> {
        self.0.fixed_rows::<3>(0).into_owned()
    }

    pub fn force_map(&self) -> nalgebra::Matrix3x6<f64> {
        self.0.fixed_rows::<3>(3).into_owned()
    }

    pub fn apply(&self, thrusts: &Vector6<f64>) -> Wrench {
        Wrench::from_vector(&(self.0 * thrusts))
    }

    pub fn singular_values(&self) -> Vector6<f64> {
        SVD::new(self.0, false, false).singular_values
    }

    /// Numerical rank with a relative singular-value cutoff.
    pub fn rank(&self) -> usize {
        let sv = self.singular_values();
        let cutoff = sv.max() * tolerances::RANK_RELATIVE;
        sv.iter().filter(|&&s| s > cutoff).count()
    }

    pub fn condition_number(&self) -> f64 {
        let sv = self.singular_values();
        let min = sv.min();
        if min == 0.0 {
            f64::INFINITY
        } else {
            sv.max() / min
        }
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank() == ROTOR_COUNT
    }
}

pub fn allocation_matrix(layout: &RotorLayout) -> AllocationMatrix {
    let t = layout.torque_axes();
    let u = layout.thrust_axes();
    let mut m = Matrix6::zeros();
    for k in 0..ROTOR_COUNT {
        m.fixed_view_mut::<3, 1>(0, k).copy_from(&t[k]);
        m.fixed_view_mut::<3, 1>(3, k).copy_from(&u[k]);
    }
    AllocationMatrix(m)
}

/// Gravity expressed in the body frame: `Ad_{H_B^Ḃ}ᵀ [0 0 0 0 0 −mg]ᵀ`, `H_B^Ḃ = [R 0; 0 1]`.
pub fn gravity_wrench(attitude: &Rotation, mass: f64, gravity: f64) -> Wrench {
    let inertial = Wrench::new(Vector3::zeros(), Vector3::new(0.0, 0.0, -mass * gravity));
    co_adjoint_wrench(&Pose::from_rotation(*attitude), &inertial)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VehicleParams {
    pub inertia: SpatialInertia,
    pub layout: RotorLayout,
    pub gravity: f64,
}

impl VehicleParams {
    pub fn new(inertia: SpatialInertia, layout: RotorLayout, gravity: f64) -> Self {
        Self { inertia, layout, gravity }
    }

    /// `m = 0.6 kg`, `J = diag(0.5, 0.5, 2)`, `g = 9.81`, with the given rotor layout.
    pub fn reference_airframe(layout: RotorLayout) -> Self {
        let inertia = SpatialInertia::from_diagonal(Vector3::new(0.5, 0.5, 2.0), 0.6)
            .expect("reference inertia is positive definite");
        Self::new(inertia, layout, STANDARD_GRAVITY)
    }

    pub fn gravity_wrench(&self, attitude: &Rotation) -> Wrench {
        gravity_wrench(attitude, self.inertia.mass(), self.gravity)
    }
}

/// Configuration and body twist of the vehicle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RigidBodyState {
    pub pose: Pose,
    pub twist: Twist,
}

impl RigidBodyState {
    pub fn new(pose: Pose, twist: Twist) -> Self {
        Self { pose, twist }
    }

    pub fn at_rest(pose: Pose) -> Self {
        Self::new(pose, Twist::zero())
    }

    pub fn is_finite(&self) -> bool {
        self.twist.is_finite()
            && self.pose.position.iter().all(|x| x.is_finite())
            && self.pose.rotation.matrix().iter().all(|x| x.is_finite())
    }
}

/// Time derivative of a [`RigidBodyState`]: `Ḣ = H T̃` is represented by the body twist itself.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateRate {
    pub pose_rate: Twist,
    pub twist_rate: Twist,
}

/// Euler–Poincaré equations `I Ṫ = ad_Tᵀ(I T) + W_g + W_p`.
pub fn dynamics(state: &RigidBodyState, applied: &Wrench, params: &VehicleParams) -> StateRate {
    let momentum = params.inertia.momentum(&state.twist);
    let total = coadjoint_algebra(&state.twist, &momentum)
        + params.gravity_wrench(&state.pose.rotation)
        + *applied;
    StateRate {
        pose_rate: state.twist,
        twist_rate: params.inertia.solve(&total),
    }
}

/// Spatial momentum expressed in the inertial frame, conserved without external wrenches.
pub fn inertial_momentum(state: &RigidBodyState, inertia: &SpatialInertia) -> Wrench {
    co_adjoint_wrench(&state.pose.inverse(), &inertia.momentum(&state.twist))
}

/// `Ḣ = H T̃` as a 4×4 matrix.
pub fn pose_rate_matrix(state: &RigidBodyState) -> nalgebra::Matrix4<f64> {
    state.pose.matrix() * state.twist.hat()
}

/// Inertia from a diagonal of `J`, for convenience in configs and bindings.
pub fn diagonal_inertia(j: [f64; 3], mass: f64) -> Result<SpatialInertia> {
    SpatialInertia::new(Matrix3::from_diagonal(&Vector3::from(j)), mass)
}
