//! Design, dynamics and geometric tracking control of a fully actuated
//! hexarotor with fixed tilted propellers.
//!
//! - [`se3`]: rigid-body math (poses, twists, wrenches, adjoints, exponential map).
//! - [`vehicle`]: rotor geometry, allocation matrix, gravity and Euler–Poincaré dynamics.
//! - [`analysis`] and [`optimize`]: control force/torque sets, minimum guaranteed wrench,
//!   and the tilt-angle design optimizer.
//! - [`controller`]: SE(3) tracking controller and thrust allocation.
//! - [`sim`]: reference trajectory, fixed-step integrator and closed-loop runs.
//! - [`config`] and [`report`]: configuration files and CSV outputs used by the CLI.

pub mod analysis;
pub mod config;
pub mod controller;
pub mod error;
pub mod optimize;
pub mod report;
pub mod se3;
pub mod sim;
pub mod tolerances;
pub mod vehicle;

pub use error::{Error, Result};
