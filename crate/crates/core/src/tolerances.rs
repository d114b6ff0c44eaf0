//! Numerical tolerances shared across the crate.
//!
//! Every threshold used for validation or branching lives here so tests and
//! library code agree on the same numbers.

/// Frobenius norm bound on `RᵀR − I` and on `|det R − 1|` for a valid rotation.
pub const ROTATION_ORTHONORMALITY: f64 = 1e-9;

/// Defect above which a rotation is pushed back onto SO(3) with a polar Newton step.
pub const REORTHONORMALIZE_ABOVE: f64 = 1e-9;

/// Bound on `‖M + Mᵀ‖` accepted by the vee map.
pub const SKEW_SYMMETRY: f64 = 1e-9;

/// Symmetry bound for inertia and gain matrices.
pub const MATRIX_SYMMETRY: f64 = 1e-12;

/// Rotation angle below which the se(3) exponential switches to its Taylor series.
/// The closed form of `(θ − sin θ)/θ³` cancels catastrophically well above 1e-6;
/// at 1e-2 the truncated series error is below 1e-16.
pub const EXP_SERIES_ANGLE: f64 = 1e-2;

/// Generator pairs with `‖a ∧ b‖` below this are skipped in inscribed-radius computations.
pub const DEGENERATE_PAIR: f64 = 1e-9;

/// Relative singular-value cutoff used for numerical rank.
pub const RANK_RELATIVE: f64 = 1e-10;

/// Maximum accepted condition number of the allocation matrix.
pub const ALLOCATION_CONDITION_MAX: f64 = 1e6;

/// Residual bound `‖Mλ − W‖` asserted for allocation.
pub const ALLOCATION_RESIDUAL: f64 = 1e-9;

/// Refined row or column maxima within this relative margin of the overall maximum
/// count as attaining it when deciding whether the optimum is a plateau.
pub const PLATEAU_VALUE_MARGIN: f64 = 1e-7;

/// Angular spread (radians) of the near-optimal set beyond which the optimum is flagged as a plateau.
pub const PLATEAU_ANGULAR_SPREAD: f64 = 5.0 * std::f64::consts::PI / 180.0;

/// Convergence threshold on the error function used to classify a simulation run.
pub const CONVERGED_ERROR_FUNCTION: f64 = 1e-3;
