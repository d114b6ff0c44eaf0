use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not skew-symmetric (‖M + Mᵀ‖ = {defect:e})")]
    NotSkewSymmetric { defect: f64 },

    #[error("matrix is not a rotation: {0}")]
    InvalidRotation(String),

    #[error("invalid inertia: {0}")]
    InvalidInertia(String),

    #[error("invalid gains: {0}")]
    InvalidGains(String),

    #[error("rotor index {0} out of range 1..=6")]
    IndexOutOfRange(usize),

    #[error("invalid rotor layout: {0}")]
    InvalidLayout(String),

    #[error("degenerate design: {0}")]
    DegenerateDesign(String),

    #[error("singular allocation matrix (condition number {condition:e})")]
    SingularAllocation { condition: f64 },

    #[error("non-finite state at t = {time:.6} s")]
    NonFiniteState { time: f64 },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
