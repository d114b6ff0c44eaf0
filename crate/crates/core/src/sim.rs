//! Closed-loop simulation: reference trajectory, disturbances, a fourth-order
//! Lie-group integrator and logging.

use nalgebra::{Vector3, Vector6};

use crate::controller::{allocate, control_wrench, GainSet, ReferencePoint, SaturationPolicy};
use crate::error::{Error, Result};
use crate::se3::{exp_se3, hat, Pose, Rotation, Twist, Wrench};
use crate::tolerances;
use crate::vehicle::{allocation_matrix, dynamics, RigidBodyState, RotorLayout, StateRate, VehicleParams};

/// Circular-helix position reference with a sinusoidal angular-acceleration profile.
///
/// `ξ_D = [r cos wt, r sin wt, r sin wt + z]` and `ω̇_D = g sin t` with `ω_D(0) = 0`,
/// `R_D(0) = I`. Because `ω_D` keeps the fixed direction `g`, the attitude has the
/// closed form `R_D = exp((t − sin t) ĝ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectorySpec {
    pub radius: f64,
    pub angular_frequency: f64,
    pub height_offset: f64,
    pub rate_gain: Vector3<f64>,
}

impl Default for TrajectorySpec {
    fn default() -> Self {
        Self {
            radius: 1.0,
            angular_frequency: 0.5,
            height_offset: 1.0,
            rate_gain: Vector3::new(1.0, 2.0, 1.0),
        }
    }
}

impl TrajectorySpec {
    pub fn position(&self, t: f64) -> Vector3<f64> {
        let (r, w) = (self.radius, self.angular_frequency);
        let (s, c) = (w * t).sin_cos();
        Vector3::new(r * c, r * s, r * s + self.height_offset)
    }

    pub fn velocity(&self, t: f64) -> Vector3<f64> {
        let (r, w) = (self.radius, self.angular_frequency);
        let (s, c) = (w * t).sin_cos();
        r * w * Vector3::new(-s, c, c)
    }

    pub fn acceleration(&self, t: f64) -> Vector3<f64> {
        let (r, w) = (self.radius, self.angular_frequency);
        let (s, c) = (w * t).sin_cos();
        -r * w * w * Vector3::new(c, s, s)
    }

    pub fn angular_velocity(&self, t: f64) -> Vector3<f64> {
        self.rate_gain * (1.0 - t.cos())
    }

    pub fn angular_acceleration(&self, t: f64) -> Vector3<f64> {
        self.rate_gain * t.sin()
    }

    pub fn attitude(&self, t: f64) -> Rotation {
        exp_se3(&Twist::new(self.rate_gain, Vector3::zeros()), t - t.sin()).rotation
    }

    /// Desired pose, body twist `[ω_D; R_Dᵀ ξ̇_D]` and its time derivative.
    pub fn reference(&self, t: f64) -> ReferencePoint {
        let rotation = self.attitude(t);
        let rt = rotation.transpose();
        let omega = self.angular_velocity(t);
        let linear = rt * self.velocity(t);
        let linear_rate = rt * self.acceleration(t) - hat(&omega) * linear;
        ReferencePoint {
            pose: Pose::new(rotation, self.position(t)),
            twist: Twist::new(omega, linear),
            twist_rate: Twist::new(self.angular_acceleration(t), linear_rate),
        }
    }
}

/// A body-frame wrench impulse spread evenly over `[time, time + duration)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DisturbanceEvent {
    pub time: f64,
    /// Integrated wrench, N·m·s and N·s.
    pub impulse: Wrench,
    pub duration: f64,
}

impl DisturbanceEvent {
    /// Torque impulse `[0.5, 0, 0]` N·m·s at `t = 7 s`, delivered over 1 ms.
    pub fn default_impulse() -> Self {
        Self {
            time: 7.0,
            impulse: Wrench::new(Vector3::new(0.5, 0.0, 0.0), Vector3::zeros()),
            duration: 1e-3,
        }
    }

    /// Mean wrench over `[t, t + dt)`, so the step-integrated impulse is exact for any `dt`.
    pub fn mean_wrench(&self, t: f64, dt: f64) -> Wrench {
        let overlap = (t + dt).min(self.time + self.duration) - t.max(self.time);
        if overlap <= 0.0 {
            Wrench::zero()
        } else {
            self.impulse * (overlap / (self.duration * dt))
        }
    }
}

/// Everything needed for one closed-loop run.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub params: VehicleParams,
    pub gains: GainSet,
    pub trajectory: TrajectorySpec,
    pub initial: RigidBodyState,
    pub disturbances: Vec<DisturbanceEvent>,
    pub dt: f64,
    pub duration: f64,
    /// Log every `decimation`-th step.
    pub decimation: usize,
    pub saturation: SaturationPolicy,
}

impl Default for Scenario {
    fn default() -> Self {
        let layout = RotorLayout::new(0.25, 35.0, 47.7f64.to_radians(), 0.0).expect("valid default layout");
        let tilt_axis = Vector3::new(1.0, 1.0, 0.0);
        Self {
            params: VehicleParams::reference_airframe(layout),
            gains: GainSet::default(),
            trajectory: TrajectorySpec::default(),
            initial: RigidBodyState::at_rest(Pose::from_rotation(Rotation::from_axis_angle(
                &tilt_axis,
                30f64.to_radians(),
            ))),
            disturbances: vec![DisturbanceEvent::default_impulse()],
            dt: 1e-3,
            duration: 15.0,
            decimation: 10,
            saturation: SaturationPolicy::Report,
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt <= 0.01) {
            return Err(Error::InvalidScenario(format!("dt = {} must be in (0, 0.01]", self.dt)));
        }
        if !(self.duration >= 0.0 && self.duration.is_finite()) {
            return Err(Error::InvalidScenario(format!("duration = {} must be non-negative", self.duration)));
        }
        if self.decimation == 0 {
            return Err(Error::InvalidScenario("decimation must be at least 1".into()));
        }
        for d in &self.disturbances {
            if !(d.duration > 0.0) || !d.time.is_finite() || !d.impulse.is_finite() {
                return Err(Error::InvalidScenario(format!("bad disturbance {d:?}")));
            }
        }
        if !self.initial.is_finite() {
            return Err(Error::InvalidScenario("initial state is not finite".into()));
        }
        Ok(())
    }

    /// Sum of all disturbances averaged over `[t, t + dt)`.
    pub fn disturbance(&self, t: f64, dt: f64) -> Wrench {
        self.disturbances
            .iter()
            .fold(Wrench::zero(), |acc, d| acc + d.mean_wrench(t, dt))
    }

    /// Closed-loop state derivative under the commanded wrench plus `disturbance`.
    pub fn closed_loop_rate(&self, state: &RigidBodyState, t: f64, disturbance: &Wrench) -> StateRate {
        let reference = self.trajectory.reference(t);
        let (_, w) = control_wrench(state, &reference, &self.gains, &self.params);
        dynamics(state, &(w.total() + *disturbance), &self.params)
    }
}

fn advance(state: &RigidBodyState, rate: &StateRate, h: f64) -> RigidBodyState {
    RigidBodyState::new(
        state.pose * exp_se3(&rate.pose_rate, h),
        state.twist + rate.twist_rate * h,
    )
}

fn combine(weights: &[f64], rates: &[StateRate]) -> StateRate {
    let mut pose_rate = Twist::zero();
    let mut twist_rate = Twist::zero();
    for (w, r) in weights.iter().zip(rates) {
        pose_rate = pose_rate + r.pose_rate * *w;
        twist_rate = twist_rate + r.twist_rate * *w;
    }
    StateRate { pose_rate, twist_rate }
}

/// One step of a fourth-order commutator-free Lie-group Runge–Kutta method.
///
/// The pose is advanced by right multiplication with exponentials of body
/// twists, so it stays on SE(3) up to rounding. `rate` is evaluated at `t`,
/// `t + h/2` (twice) and `t + h`.
pub fn integrate_step<F>(state: &RigidBodyState, t: f64, h: f64, mut rate: F) -> RigidBodyState
where
    F: FnMut(&RigidBodyState, f64) -> StateRate,
{
    let k1 = rate(state, t);
    let y2 = advance(state, &k1, 0.5 * h);
    let k2 = rate(&y2, t + 0.5 * h);
    let y3 = advance(state, &k2, 0.5 * h);
    let k3 = rate(&y3, t + 0.5 * h);
    let y4 = advance(&y2, &combine(&[-0.5, 1.0], &[k1, k3]), h);
    let k4 = rate(&y4, t + h);
    let ks = [k1, k2, k3, k4];
    let mid = advance(state, &combine(&[3.0 / 12.0, 2.0 / 12.0, 2.0 / 12.0, -1.0 / 12.0], &ks), h);
    advance(&mid, &combine(&[-1.0 / 12.0, 2.0 / 12.0, 2.0 / 12.0, 3.0 / 12.0], &ks), h)
}

/// Advances the closed loop by one step of size `dt` starting at time `t`.
pub fn step(state: &RigidBodyState, t: f64, dt: f64, scenario: &Scenario) -> Result<RigidBodyState> {
    let disturbance = scenario.disturbance(t, dt);
    let next = integrate_step(state, t, dt, |s, tau| scenario.closed_loop_rate(s, tau, &disturbance));
    if next.is_finite() {
        Ok(next)
    } else {
        Err(Error::NonFiniteState { time: t + dt })
    }
}

/// One logged sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogRow {
    pub time: f64,
    pub pose: Pose,
    pub twist: Twist,
    pub phi_rotational: f64,
    pub phi_translational: f64,
    pub twist_error: Twist,
    pub thrusts: Vector6<f64>,
    pub feedforward: Wrench,
    pub proportional: Wrench,
    pub derivative: Wrench,
    pub saturated: bool,
}

impl LogRow {
    pub fn phi(&self) -> f64 {
        self.phi_rotational + self.phi_translational
    }

    /// Commanded body wrench.
    pub fn wrench(&self) -> Wrench {
        self.feedforward + self.proportional + self.derivative
    }

    /// Values in [`SimLog::COLUMNS`] order.
    pub fn values(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(SimLog::COLUMNS.len());
        v.push(self.time);
        let r = self.pose.rotation.matrix();
        for i in 0..3 {
            v.extend([r[(i, 0)], r[(i, 1)], r[(i, 2)], self.pose.position[i]]);
        }
        v.extend(self.twist.to_array());
        v.extend([self.phi_rotational, self.phi_translational]);
        v.extend(self.twist_error.to_array());
        let w = self.wrench();
        v.extend([w.torque.norm(), w.force.norm()]);
        v.extend(self.thrusts.iter());
        for part in [self.feedforward, self.proportional, self.derivative] {
            v.extend(part.to_array());
        }
        v
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunStatus {
    /// Final error function below the convergence threshold.
    Converged,
    NotConverged,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimLog {
    pub rows: Vec<LogRow>,
    pub status: RunStatus,
    pub final_state: RigidBodyState,
    /// Largest `max_i |λ_i|` over every step, not just logged ones.
    pub peak_thrust: f64,
    /// Number of steps whose thrust demand exceeded `λ_max`.
    pub saturation_count: usize,
    pub max_rotation_defect: f64,
}

impl SimLog {
    pub const COLUMNS: [&'static str; 53] = [
        "t", "r11", "r12", "r13", "x", "r21", "r22", "r23", "y", "r31", "r32", "r33", "z",
        "wx", "wy", "wz", "vx", "vy", "vz", "phi_rot", "phi_pos",
        "ewx", "ewy", "ewz", "evx", "evy", "evz", "torque_norm", "force_norm",
        "lambda1", "lambda2", "lambda3", "lambda4", "lambda5", "lambda6",
        "ff_tx", "ff_ty", "ff_tz", "ff_fx", "ff_fy", "ff_fz",
        "p_tx", "p_ty", "p_tz", "p_fx", "p_fy", "p_fz",
        "d_tx", "d_ty", "d_tz", "d_fx", "d_fy", "d_fz",
    ];

    pub fn final_phi(&self) -> f64 {
        self.rows.last().map_or(f64::NAN, LogRow::phi)
    }
}

/// Runs `scenario` from `t = 0` to its duration.
pub fn run(scenario: &Scenario) -> Result<SimLog> {
    scenario.validate()?;
    let matrix = allocation_matrix(&scenario.params.layout);
    let max_thrust = scenario.params.layout.max_thrust();
    let steps = (scenario.duration / scenario.dt).round() as usize;

    let sample = |state: &RigidBodyState, t: f64| -> Result<LogRow> {
        let reference = scenario.trajectory.reference(t);
        let (err, w) = control_wrench(state, &reference, &scenario.gains, &scenario.params);
        let allocation = allocate(&w.total(), &matrix, max_thrust, scenario.saturation)?;
        Ok(LogRow {
            time: t,
            pose: state.pose,
            twist: state.twist,
            phi_rotational: err.phi_rotational,
            phi_translational: err.phi_translational,
            twist_error: err.twist_error,
            thrusts: allocation.thrusts,
            feedforward: w.feedforward,
            proportional: w.proportional,
            derivative: w.derivative,
            saturated: allocation.saturation.is_some(),
        })
    };

    let mut rows = Vec::with_capacity(steps / scenario.decimation + 2);
    let mut state = scenario.initial;
    let mut peak_thrust: f64 = 0.0;
    let mut saturation_count = 0;
    let mut max_rotation_defect = state.pose.rotation.orthonormality_defect();

    for k in 0..=steps {
        let t = k as f64 * scenario.dt;
        let row = sample(&state, t)?;
        if !row.phi().is_finite() {
            return Err(Error::NonFiniteState { time: t });
        }
        peak_thrust = peak_thrust.max(row.thrusts.amax());
        if row.saturated {
            saturation_count += 1;
        }
        if k % scenario.decimation == 0 || k == steps {
            rows.push(row);
        }
        if k == steps {
            break;
        }
        state = match scenario.saturation {
            SaturationPolicy::Report => step(&state, t, scenario.dt, scenario)?,
            SaturationPolicy::Scale => step_saturated(&state, t, scenario, &matrix, max_thrust)?,
        };
        max_rotation_defect = max_rotation_defect.max(state.pose.rotation.orthonormality_defect());
    }

    let final_phi = rows.last().map_or(f64::NAN, LogRow::phi);
    let status = if final_phi < tolerances::CONVERGED_ERROR_FUNCTION {
        RunStatus::Converged
    } else {
        RunStatus::NotConverged
    };
    Ok(SimLog { rows, status, final_state: state, peak_thrust, saturation_count, max_rotation_defect })
}

fn step_saturated(
    state: &RigidBodyState,
    t: f64,
    scenario: &Scenario,
    matrix: &crate::vehicle::AllocationMatrix,
    max_thrust: f64,
) -> Result<RigidBodyState> {
    let dt = scenario.dt;
    let disturbance = scenario.disturbance(t, dt);
    let mut failure = None;
    let next = integrate_step(state, t, dt, |s, tau| {
        let reference = scenario.trajectory.reference(tau);
        let (_, w) = control_wrench(s, &reference, &scenario.gains, &scenario.params);
        let applied = match allocate(&w.total(), matrix, max_thrust, SaturationPolicy::Scale) {
            Ok(a) => matrix.apply(&a.thrusts),
            Err(e) => {
                failure.get_or_insert(e);
                w.total()
            }
        };
        dynamics(s, &(applied + disturbance), &scenario.params)
    });
    if let Some(e) = failure {
        return Err(e);
    }
    if next.is_finite() {
        Ok(next)
    } else {
        Err(Error::NonFiniteState { time: t + dt })
    }
}
