//! Frame-change identities for twists and adjoints, the error-twist formula,
//! the trace identity behind the error-function rate, and the transport term
//! of the feedforward wrench.

use super::*;
use hexarotor::controller::transported_reference;
use hexarotor::se3::{adjoint_algebra, adjoint_group, hat, Pose, Rotation, Twist};
use nalgebra::{Matrix3, Matrix6, Vector3};
use proptest::test_runner::{Config, TestCaseError, TestError, TestRunner};

pub const FD_STEP: f64 = 1e-5;
pub const FD_TOL: f64 = 1e-6;
pub const ALGEBRAIC_TOL: f64 = 1e-10;
pub const CASES: u32 = 100;

type Outcome = Result<(), TestCaseError>;

fn check(ok: bool, what: &str, residual: f64) -> Outcome {
    if ok {
        Ok(())
    } else {
        Err(TestCaseError::fail(format!("{what}: residual {residual:e}")))
    }
}

/// The twist of `i` relative to `j` is minus the twist of `j` relative to `i`,
/// both expressed in `j`.
pub fn reversed_relative_twist(path: &PosePath, t: f64) -> Outcome {
    let h = FD_STEP;
    let inv_rate = (path.pose(t + h).inverse().matrix() - path.pose(t - h).inverse().matrix()) / (2.0 * h);
    let m = inv_rate * path.pose(t).matrix();
    let reverse = Twist::new(
        Vector3::new(m[(2, 1)], m[(0, 2)], m[(1, 0)]),
        Vector3::new(m[(0, 3)], m[(1, 3)], m[(2, 3)]),
    );
    let r = (reverse + path.twist(t)).norm();
    check(r < FD_TOL, "reversed twist", r)
}

/// Changing the expression frame is conjugation in matrix form and `Ad` in vector form.
pub fn frame_change(h: &Pose, t: &Twist) -> Outcome {
    let conj = h.matrix() * t.hat() * h.inverse().matrix();
    let via_adjoint = adjoint_group(h) * *t;
    let r = (conj - via_adjoint.hat()).norm();
    check(r < ALGEBRAIC_TOL, "conjugation", r)
}

/// `d/dt Ad_H = Ad_H ad_T` with `T` the body twist of `H`.
pub fn adjoint_derivative(path: &PosePath, t: f64) -> Outcome {
    let h = FD_STEP;
    let fd = (adjoint_group(&path.pose(t + h)) - adjoint_group(&path.pose(t - h))) / (2.0 * h);
    let analytic = adjoint_group(&path.pose(t)) * adjoint_algebra(&path.twist(t));
    let r = (fd - analytic).norm() / analytic.norm().max(1.0);
    check(r < FD_TOL, "adjoint derivative", r)
}

pub fn adjoint_inverse(h: &Pose) -> Outcome {
    let r = (adjoint_group(h) * adjoint_group(&h.inverse()) - Matrix6::identity()).norm();
    check(r < ALGEBRAIC_TOL, "adjoint inverse", r)
}

pub fn algebra_adjoint_conjugation(h: &Pose, t: &Twist) -> Outcome {
    let lhs = adjoint_algebra(&(adjoint_group(h) * *t));
    let rhs = adjoint_group(h) * adjoint_algebra(t) * adjoint_group(&h.inverse());
    let r = (lhs - rhs).norm();
    check(r < ALGEBRAIC_TOL, "ad conjugation", r)
}

/// `−½ tr(K R ω̃) = as(K R)^∨ · ω`.
pub fn trace_identity(k: &Matrix3<f64>, r: &Rotation, w: &Vector3<f64>) -> Outcome {
    let lhs = -0.5 * (k * r.matrix() * hat(w)).trace();
    let a = k * r.matrix();
    let skew = 0.5 * (a - a.transpose());
    let vee = Vector3::new(skew[(2, 1)], skew[(0, 2)], skew[(1, 0)]);
    let res = (lhs - vee.dot(w)).abs();
    check(res < ALGEBRAIC_TOL, "trace identity", res)
}

/// `H_e⁻¹ Ḣ_e = T_B − Ad_{H_e⁻¹} T_D` for `H_e = H_D⁻¹ H_B`.
pub fn error_twist(body: &PosePath, desired: &PosePath, t: f64) -> Outcome {
    let error = |s: f64| desired.pose(s).inverse() * body.pose(s);
    let fd = fd_twist(error, t, FD_STEP);
    let closed = body.twist(t) - transported_reference(&error(t), &desired.twist(t));
    let r = (fd - closed).norm();
    check(r < FD_TOL, "error twist", r)
}

/// `(d/dt Ad_{H_e⁻¹}) T_D = −ad_{T_e} Ad_{H_e⁻¹} T_D` with `T_D` held fixed.
pub fn transport(body: &PosePath, desired: &PosePath, t: f64) -> Outcome {
    let error = |s: f64| desired.pose(s).inverse() * body.pose(s);
    let td = desired.twist(t);
    let h = FD_STEP;
    let fd = (adjoint_group(&error(t + h).inverse()) - adjoint_group(&error(t - h).inverse())) / (2.0 * h)
        * td.to_vector();
    let te = body.twist(t) - transported_reference(&error(t), &td);
    let analytic = -(adjoint_algebra(&te) * (adjoint_group(&error(t).inverse()) * td.to_vector()));
    let r = (fd - analytic).norm() / analytic.norm().max(1.0);
    check(r < FD_TOL, "transport", r)
}

fn report<T: std::fmt::Debug>(r: Result<(), TestError<T>>) -> Result<(), String> {
    r.map_err(|e| format!("{e}"))
}

/// Runs every identity over [`CASES`] random inputs, returning `(name, outcome)` pairs.
pub fn run_all() -> Vec<(&'static str, Result<(), String>)> {
    let runner = || TestRunner::new(Config { cases: CASES, failure_persistence: None, ..Config::default() });
    let tau = -1.0..1.0f64;
    vec![
        ("reversed relative twist", report(runner().run(&(pose_path(), tau.clone()), |(p, t)| reversed_relative_twist(&p, t)))),
        ("frame change by conjugation", report(runner().run(&(pose(), twist(2.0)), |(h, t)| frame_change(&h, &t)))),
        ("adjoint derivative", report(runner().run(&(pose_path(), tau.clone()), |(p, t)| adjoint_derivative(&p, t)))),
        ("adjoint inverse", report(runner().run(&pose(), |h| adjoint_inverse(&h)))),
        ("algebra adjoint conjugation", report(runner().run(&(pose(), twist(2.0)), |(h, t)| algebra_adjoint_conjugation(&h, &t)))),
        ("trace identity", report(runner().run(&(spd3(), rotation(), vec3(2.0)), |(k, r, w)| trace_identity(&k, &r, &w)))),
        ("error twist", report(runner().run(&(pose_path(), pose_path(), tau.clone()), |(b, d, t)| error_twist(&b, &d, t)))),
        ("transport identity", report(runner().run(&(pose_path(), pose_path(), tau), |(b, d, t)| transport(&b, &d, t)))),
    ]
}
