//! TOML configuration: vehicle, gains, simulation scenario and optimizer settings.
//!
//! Every section and field is optional and falls back to the defaults of the
//! reference airframe and tracking scenario. Angles are in degrees in the file
//! and converted to radians when building library types. Unknown keys are rejected.
//!
//! ```toml
//! [vehicle]
//! mass = 0.6
//! inertia_diag = [0.5, 0.5, 2.0]
//! arm_length = 0.25
//! max_thrust = 35.0
//! alpha_deg = 47.7
//!
//! [gains]
//! kp_rot_diag = [10.0, 10.0, 10.0]
//! kp_pos = 3.0
//! kd_diag = [5.0, 5.0, 5.0, 2.0, 2.0, 2.0]
//!
//! [scenario]
//! dt = 0.001
//! duration = 15.0
//!
//! [[scenario.disturbances]]
//! time = 7.0
//! impulse = [0.5, 0.0, 0.0, 0.0, 0.0, 0.0]
//! duration = 0.001
//!
//! [optimizer]
//! c_f = 0.5
//! grid_step_deg = 0.25
//! ```

use std::path::Path;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::ForceMeasure;
use crate::controller::{GainSet, SaturationPolicy};
use crate::error::{Error, Result};
use crate::optimize::OptimizerSettings;
use crate::se3::{Pose, Rotation, Twist, Wrench};
use crate::sim::{DisturbanceEvent, Scenario, TrajectorySpec};
use crate::vehicle::{diagonal_inertia, RigidBodyState, RotorLayout, VehicleParams, ALTERNATING_SPIN, STANDARD_GRAVITY};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VehicleConfig {
    pub mass: f64,
    pub inertia_diag: [f64; 3],
    pub gravity: f64,
    pub arm_length: f64,
    pub drag_ratio: f64,
    pub max_thrust: f64,
    pub spin: [i8; 6],
    pub alpha_deg: f64,
    pub beta_deg: f64,
}

impl Default for VehicleConfig {
    fn default() -> Self {
        Self {
            mass: 0.6,
            inertia_diag: [0.5, 0.5, 2.0],
            gravity: STANDARD_GRAVITY,
            arm_length: 0.25,
            drag_ratio: 0.0,
            max_thrust: 35.0,
            spin: ALTERNATING_SPIN,
            alpha_deg: 47.7,
            beta_deg: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GainsConfig {
    pub kp_rot_diag: [f64; 3],
    pub kp_pos: f64,
    pub kd_diag: [f64; 6],
}

impl Default for GainsConfig {
    fn default() -> Self {
        Self {
            kp_rot_diag: [10.0; 3],
            kp_pos: 3.0,
            kd_diag: [5.0, 5.0, 5.0, 2.0, 2.0, 2.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrajectoryConfig {
    pub radius: f64,
    pub angular_frequency: f64,
    pub height_offset: f64,
    pub rate_gain: [f64; 3],
}

impl Default for TrajectoryConfig {
    fn default() -> Self {
        Self {
            radius: 1.0,
            angular_frequency: 0.5,
            height_offset: 1.0,
            rate_gain: [1.0, 2.0, 1.0],
        }
    }
}

/// Initial pose as position plus axis-angle rotation, and initial body twist `[ω; v]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialStateConfig {
    pub position: [f64; 3],
    pub rotation_axis: [f64; 3],
    pub rotation_deg: f64,
    pub twist: [f64; 6],
}

impl Default for InitialStateConfig {
    fn default() -> Self {
        Self {
            position: [0.0; 3],
            rotation_axis: [1.0, 1.0, 0.0],
            rotation_deg: 30.0,
            twist: [0.0; 6],
        }
    }
}

/// Body-frame impulse `[τ; f]` in N·m·s and N·s, spread over `duration` seconds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisturbanceConfig {
    pub time: f64,
    pub impulse: [f64; 6],
    pub duration: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub dt: f64,
    pub duration: f64,
    pub decimation: usize,
    pub saturation: SaturationPolicy,
    pub trajectory: TrajectoryConfig,
    pub initial: InitialStateConfig,
    pub disturbances: Vec<DisturbanceConfig>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            duration: 15.0,
            decimation: 10,
            saturation: SaturationPolicy::Report,
            trajectory: TrajectoryConfig::default(),
            initial: InitialStateConfig::default(),
            disturbances: vec![DisturbanceConfig {
                time: 7.0,
                impulse: [0.5, 0.0, 0.0, 0.0, 0.0, 0.0],
                duration: 1e-3,
            }],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub c_f: f64,
    pub grid_step_deg: f64,
    pub refine: bool,
    pub force_measure: ForceMeasure,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            c_f: 0.5,
            grid_step_deg: 0.25,
            refine: true,
            force_measure: ForceMeasure::InscribedRadius,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub vehicle: VehicleConfig,
    pub gains: GainsConfig,
    pub scenario: ScenarioConfig,
    pub optimizer: OptimizerConfig,
}

fn field_error(path: &str, message: impl Into<String>) -> Error {
    Error::Config { path: path.into(), message: message.into() }
}

fn positive(path: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(field_error(path, format!("must be positive and finite, got {value}")))
    }
}

fn non_negative(path: &str, value: f64) -> Result<()> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(field_error(path, format!("must be non-negative and finite, got {value}")))
    }
}

fn finite(path: &str, values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        None => Ok(()),
        Some(i) => Err(field_error(&format!("{path}[{i}]"), "must be finite")),
    }
}

impl Config {
    /// Parses TOML text; errors carry the dotted path of the offending field.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| field_error("", e.message().to_string()))?;
        let config: Config = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            field_error(&path, e.into_inner().message().to_string())
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| field_error("", format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    /// First 12 hex digits of the SHA-256 of the canonical serialization.
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.to_toml_string().as_bytes());
        hash.iter().take(6).map(|b| format!("{b:02x}")).collect()
    }

    /// Checks ranges that the type system does not.
    pub fn validate(&self) -> Result<()> {
        let v = &self.vehicle;
        positive("vehicle.mass", v.mass)?;
        for (i, j) in v.inertia_diag.iter().enumerate() {
            positive(&format!("vehicle.inertia_diag[{i}]"), *j)?;
        }
        non_negative("vehicle.gravity", v.gravity)?;
        positive("vehicle.arm_length", v.arm_length)?;
        non_negative("vehicle.drag_ratio", v.drag_ratio)?;
        positive("vehicle.max_thrust", v.max_thrust)?;
        if let Some(i) = v.spin.iter().position(|s| s.abs() != 1) {
            return Err(field_error(&format!("vehicle.spin[{i}]"), "must be +1 or -1"));
        }
        for (name, angle) in [("vehicle.alpha_deg", v.alpha_deg), ("vehicle.beta_deg", v.beta_deg)] {
            if !(0.0..=90.0).contains(&angle) {
                return Err(field_error(name, format!("must be within [0, 90] degrees, got {angle}")));
            }
        }

        let g = &self.gains;
        for (i, k) in g.kp_rot_diag.iter().enumerate() {
            positive(&format!("gains.kp_rot_diag[{i}]"), *k)?;
        }
        positive("gains.kp_pos", g.kp_pos)?;
        for (i, k) in g.kd_diag.iter().enumerate() {
            positive(&format!("gains.kd_diag[{i}]"), *k)?;
        }

        let s = &self.scenario;
        if !(s.dt > 0.0 && s.dt <= 0.01) {
            return Err(field_error("scenario.dt", format!("must be in (0, 0.01], got {}", s.dt)));
        }
        non_negative("scenario.duration", s.duration)?;
        if s.decimation == 0 {
            return Err(field_error("scenario.decimation", "must be at least 1"));
        }
        let t = &s.trajectory;
        finite("scenario.trajectory.rate_gain", &t.rate_gain)?;
        finite(
            "scenario.trajectory",
            &[t.radius, t.angular_frequency, t.height_offset],
        )?;
        finite("scenario.initial.position", &s.initial.position)?;
        finite("scenario.initial.twist", &s.initial.twist)?;
        finite("scenario.initial.rotation_axis", &s.initial.rotation_axis)?;
        if !s.initial.rotation_deg.is_finite() {
            return Err(field_error("scenario.initial.rotation_deg", "must be finite"));
        }
        if s.initial.rotation_deg != 0.0 && Vector3::from(s.initial.rotation_axis).norm() == 0.0 {
            return Err(field_error("scenario.initial.rotation_axis", "must be non-zero for a non-zero angle"));
        }
        for (i, d) in s.disturbances.iter().enumerate() {
            non_negative(&format!("scenario.disturbances[{i}].time"), d.time)?;
            positive(&format!("scenario.disturbances[{i}].duration"), d.duration)?;
            finite(&format!("scenario.disturbances[{i}].impulse"), &d.impulse)?;
        }

        let o = &self.optimizer;
        if !(0.0..=1.0).contains(&o.c_f) {
            return Err(field_error("optimizer.c_f", format!("must be within [0, 1], got {}", o.c_f)));
        }
        if !(o.grid_step_deg > 0.0 && o.grid_step_deg <= 90.0) {
            return Err(field_error(
                "optimizer.grid_step_deg",
                format!("must be in (0, 90], got {}", o.grid_step_deg),
            ));
        }
        Ok(())
    }

    pub fn layout(&self) -> Result<RotorLayout> {
        let v = &self.vehicle;
        RotorLayout::with_all(
            v.arm_length,
            v.drag_ratio,
            v.max_thrust,
            v.spin,
            v.alpha_deg.to_radians(),
            v.beta_deg.to_radians(),
        )
    }

    pub fn vehicle_params(&self) -> Result<VehicleParams> {
        let v = &self.vehicle;
        let inertia = diagonal_inertia(v.inertia_diag, v.mass)?;
        Ok(VehicleParams::new(inertia, self.layout()?, v.gravity))
    }

    pub fn gains(&self) -> Result<GainSet> {
        let g = &self.gains;
        GainSet::from_diagonals(g.kp_rot_diag, g.kp_pos, g.kd_diag)
    }

    pub fn optimizer_settings(&self) -> OptimizerSettings {
        OptimizerSettings {
            grid_step: self.optimizer.grid_step_deg.to_radians(),
            refine: self.optimizer.refine,
            force_measure: self.optimizer.force_measure,
        }
    }

    pub fn scenario(&self) -> Result<Scenario> {
        let s = &self.scenario;
        let t = &s.trajectory;
        let init = &s.initial;
        let rotation = if init.rotation_deg == 0.0 {
            Rotation::identity()
        } else {
            Rotation::from_axis_angle(&Vector3::from(init.rotation_axis), init.rotation_deg.to_radians())
        };
        let scenario = Scenario {
            params: self.vehicle_params()?,
            gains: self.gains()?,
            trajectory: TrajectorySpec {
                radius: t.radius,
                angular_frequency: t.angular_frequency,
                height_offset: t.height_offset,
                rate_gain: Vector3::from(t.rate_gain),
            },
            initial: RigidBodyState::new(
                Pose::new(rotation, Vector3::from(init.position)),
                Twist::from_array(init.twist),
            ),
            disturbances: s
                .disturbances
                .iter()
                .map(|d| DisturbanceEvent {
                    time: d.time,
                    impulse: Wrench::from_array(d.impulse),
                    duration: d.duration,
                })
                .collect(),
            dt: s.dt,
            duration: s.duration,
            decimation: s.decimation,
            saturation: s.saturation,
        };
        scenario.validate()?;
        Ok(scenario)
    }
}
