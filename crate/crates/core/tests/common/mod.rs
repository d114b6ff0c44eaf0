#![allow(dead_code)]

pub mod identities;

use hexarotor::analysis::Zonotope;
use hexarotor::se3::{exp_se3, Pose, Rotation, Twist};
use nalgebra::{Matrix3, Vector3};
use proptest::prelude::*;

pub fn vec3(scale: f64) -> impl Strategy<Value = Vector3<f64>> {
    prop::array::uniform3(-scale..scale).prop_map(Vector3::from)
}

pub fn rotation() -> impl Strategy<Value = Rotation> {
    (vec3(1.0), 0.0..std::f64::consts::PI).prop_map(|(axis, angle)| {
        if axis.norm() < 1e-3 {
            Rotation::identity()
        } else {
            Rotation::from_axis_angle(&axis, angle)
        }
    })
}

pub fn pose() -> impl Strategy<Value = Pose> {
    (rotation(), vec3(3.0)).prop_map(|(r, p)| Pose::new(r, p))
}

pub fn twist(scale: f64) -> impl Strategy<Value = Twist> {
    (vec3(scale), vec3(scale)).prop_map(|(w, v)| Twist::new(w, v))
}

/// Symmetric positive definite matrix `AᵀA + εI`.
pub fn spd3() -> impl Strategy<Value = Matrix3<f64>> {
    prop::array::uniform9(-2.0..2.0f64).prop_map(|a| {
        let m = Matrix3::from_row_slice(&a);
        m.transpose() * m + Matrix3::identity() * 0.1
    })
}

/// Smooth pose path `H(t) = H₀ exp(tA) exp(½t² B)` with its analytic body twist.
#[derive(Clone, Copy, Debug)]
pub struct PosePath {
    pub start: Pose,
    pub a: Twist,
    pub b: Twist,
}

impl PosePath {
    pub fn pose(&self, t: f64) -> Pose {
        self.start * exp_se3(&self.a, t) * exp_se3(&self.b, 0.5 * t * t)
    }

    /// `H⁻¹Ḣ = Ad_{exp(sB)⁻¹} A + ṡ B` with `s = ½t²`.
    pub fn twist(&self, t: f64) -> Twist {
        let inner = exp_se3(&self.b, 0.5 * t * t).inverse();
        inner.adjoint() * self.a + self.b * t
    }
}

pub fn pose_path() -> impl Strategy<Value = PosePath> {
    (pose(), twist(1.5), twist(1.0)).prop_map(|(start, a, b)| PosePath { start, a, b })
}

/// Body twist from central differences of a pose path.
pub fn fd_twist(path: impl Fn(f64) -> Pose, t: f64, h: f64) -> Twist {
    let d = (path(t + h).matrix() - path(t - h).matrix()) / (2.0 * h);
    let body = path(t).inverse().matrix() * d;
    Twist::new(
        Vector3::new(body[(2, 1)], body[(0, 2)], body[(1, 0)]),
        Vector3::new(body[(0, 3)], body[(1, 3)], body[(2, 3)]),
    )
}

/// Inscribed radius from an explicit convex hull of the `2^k` extreme points:
/// every vertex triple whose plane leaves all points on one side is a facet.
pub fn hull_inscribed_radius(z: &Zonotope) -> f64 {
    let mut points: Vec<Vector3<f64>> = Vec::new();
    for (_, p) in z.extreme_points() {
        if !points.iter().any(|q| (q - p).norm() < 1e-12) {
            points.push(p);
        }
    }
    let scale = points.iter().map(|p| p.norm()).fold(0.0, f64::max);
    let eps = 1e-10 * scale;
    let mut best = f64::INFINITY;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            for k in j + 1..points.len() {
                let n = (points[j] - points[i]).cross(&(points[k] - points[i]));
                if n.norm() < 1e-9 * scale * scale {
                    continue;
                }
                let n = n.normalize();
                let d = n.dot(&points[i]);
                let (mut above, mut below) = (false, false);
                for p in &points {
                    let s = n.dot(p) - d;
                    above |= s > eps;
                    below |= s < -eps;
                    if above && below {
                        break;
                    }
                }
                if !(above && below) {
                    best = best.min(d.abs());
                }
            }
        }
    }
    best
}

