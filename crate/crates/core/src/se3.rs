//! Rigid-body math on SE(3).
//!
//! Twists and wrenches are stored angular-first: a [`Twist`] is `[ω; v]` and a
//! [`Wrench`] is `[τ; f]`, so the power pairing is the plain 6-vector dot product.
//! The group adjoint follows the body-to-parent convention
//! `Ad_H = [R 0; ξ̃R R]`, and the algebra adjoint is `ad_T = [ω̃ 0; ṽ ω̃]`.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Matrix3, Matrix4, Matrix6, Vector3, Vector6};

use crate::error::{Error, Result};
use crate::tolerances;

/// Skew-symmetric matrix such that `hat(v) * x == v.cross(x)`.
pub fn hat(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Inverse of [`hat`]. Rejects matrices whose symmetric part exceeds the skew tolerance.
pub fn vee(m: &Matrix3<f64>) -> Result<Vector3<f64>> {
    let defect = (m + m.transpose()).norm();
    if defect > tolerances::SKEW_SYMMETRY {
        return Err(Error::NotSkewSymmetric { defect });
    }
    Ok(Vector3::new(m[(2, 1)], m[(0, 2)], m[(1, 0)]))
}

/// Skew-symmetric part `½(A − Aᵀ)`.
pub fn skew_part(m: &Matrix3<f64>) -> Matrix3<f64> {
    0.5 * (m - m.transpose())
}

/// An element of SO(3).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rotation(Matrix3<f64>);

impl Rotation {
    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    /// Validates orthonormality and handedness.
    pub fn new(m: Matrix3<f64>) -> Result<Self> {
        let defect = orthonormality_defect(&m);
        if !defect.is_finite() || defect > tolerances::ROTATION_ORTHONORMALITY {
            return Err(Error::InvalidRotation(format!(
                "‖RᵀR − I‖ = {defect:e}"
            )));
        }
        let det = m.determinant();
        if (det - 1.0).abs() > tolerances::ROTATION_ORTHONORMALITY {
            return Err(Error::InvalidRotation(format!("det R = {det}")));
        }
        Ok(Self(m))
    }

    /// Wraps a matrix the caller knows to be a rotation.
    pub fn from_matrix_unchecked(m: Matrix3<f64>) -> Self {
        Self(m)
    }

    /// Rodrigues rotation. A zero axis yields the identity.
    pub fn from_axis_angle(axis: &Vector3<f64>, angle: f64) -> Self {
        let n = axis.norm();
        if n == 0.0 {
            return Self::identity();
        }
        Self(so3_exp(&(axis * (angle / n))))
    }

    pub fn about_x(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self(Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c))
    }

    pub fn about_y(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self(Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c))
    }

    pub fn about_z(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self(Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    /// `‖RᵀR − I‖_F`.
    pub fn orthonormality_defect(&self) -> f64 {
        orthonormality_defect(&self.0)
    }

    /// One polar-decomposition Newton step `R ← ½(R + R⁻ᵀ)` when the defect
    /// exceeds [`tolerances::REORTHONORMALIZE_ABOVE`].
    pub fn reorthonormalized(&self) -> Self {
        if self.orthonormality_defect() <= tolerances::REORTHONORMALIZE_ABOVE {
            return *self;
        }
        match self.0.try_inverse() {
            Some(inv) => Self(0.5 * (self.0 + inv.transpose())),
            None => *self,
        }
    }
}

fn orthonormality_defect(m: &Matrix3<f64>) -> f64 {
    (m.transpose() * m - Matrix3::identity()).norm()
}

impl Mul for Rotation {
    type Output = Rotation;
    fn mul(self, rhs: Rotation) -> Rotation {
        Rotation(self.0 * rhs.0).reorthonormalized()
    }
}

impl Mul<Vector3<f64>> for Rotation {
    type Output = Vector3<f64>;
    fn mul(self, rhs: Vector3<f64>) -> Vector3<f64> {
        self.0 * rhs
    }
}

impl Mul<&Vector3<f64>> for &Rotation {
    type Output = Vector3<f64>;
    fn mul(self, rhs: &Vector3<f64>) -> Vector3<f64> {
        self.0 * rhs
    }
}

/// Homogeneous transform `[R ξ; 0 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose {
    pub rotation: Rotation,
    pub position: Vector3<f64>,
}

impl Pose {
    pub fn identity() -> Self {
        Self {
            rotation: Rotation::identity(),
            position: Vector3::zeros(),
        }
    }

    pub fn new(rotation: Rotation, position: Vector3<f64>) -> Self {
        Self { rotation, position }
    }

    pub fn from_rotation(rotation: Rotation) -> Self {
        Self::new(rotation, Vector3::zeros())
    }

    pub fn from_translation(position: Vector3<f64>) -> Self {
        Self::new(Rotation::identity(), position)
    }

    /// Parses a 4×4 homogeneous matrix, checking the bottom row and the rotation block.
    pub fn from_matrix(m: &Matrix4<f64>) -> Result<Self> {
        let bottom = m.fixed_view::<1, 4>(3, 0);
        if (bottom - nalgebra::RowVector4::new(0.0, 0.0, 0.0, 1.0)).norm()
            > tolerances::ROTATION_ORTHONORMALITY
        {
            return Err(Error::InvalidRotation(
                "homogeneous matrix bottom row is not [0 0 0 1]".into(),
            ));
        }
        let rotation = Rotation::new(m.fixed_view::<3, 3>(0, 0).into_owned())?;
        Ok(Self::new(rotation, m.fixed_view::<3, 1>(0, 3).into_owned()))
    }

    pub fn matrix(&self) -> Matrix4<f64> {
        let mut h = Matrix4::identity();
        h.fixed_view_mut::<3, 3>(0, 0).copy_from(self.rotation.matrix());
        h.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.position);
        h
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self::new(rt, -(rt.matrix() * self.position))
    }

    pub fn compose(&self, other: &Pose) -> Pose {
        Pose::new(
            self.rotation * other.rotation,
            self.rotation.matrix() * other.position + self.position,
        )
    }

    pub fn transform_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation.matrix() * p + self.position
    }

    /// Group adjoint, see [`adjoint_group`].
    pub fn adjoint(&self) -> Matrix6<f64> {
        adjoint_group(self)
    }
}

impl Mul for Pose {
    type Output = Pose;
    fn mul(self, rhs: Pose) -> Pose {
        self.compose(&rhs)
    }
}

/// Body velocity `[ω; v]`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Twist {
    pub angular: Vector3<f64>,
    pub linear: Vector3<f64>,
}

/// Generalized force `[τ; f]`, dual to [`Twist`].
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Wrench {
    pub torque: Vector3<f64>,
    pub force: Vector3<f64>,
}

macro_rules! six_vector {
    ($ty:ident, $a:ident, $b:ident) => {
        impl $ty {
            pub fn new($a: Vector3<f64>, $b: Vector3<f64>) -> Self {
                Self { $a, $b }
            }

            pub fn zero() -> Self {
                Self::default()
            }

            pub fn from_vector(v: &Vector6<f64>) -> Self {
                Self {
                    $a: v.fixed_rows::<3>(0).into_owned(),
                    $b: v.fixed_rows::<3>(3).into_owned(),
                }
            }

            pub fn from_array(a: [f64; 6]) -> Self {
                Self::from_vector(&Vector6::from_row_slice(&a))
            }

            pub fn to_vector(&self) -> Vector6<f64> {
                let mut v = Vector6::zeros();
                v.fixed_rows_mut::<3>(0).copy_from(&self.$a);
                v.fixed_rows_mut::<3>(3).copy_from(&self.$b);
                v
            }

            pub fn to_array(&self) -> [f64; 6] {
                let v = self.to_vector();
                [v[0], v[1], v[2], v[3], v[4], v[5]]
            }

            pub fn norm(&self) -> f64 {
                self.to_vector().norm()
            }

            pub fn is_finite(&self) -> bool {
                self.$a.iter().chain(self.$b.iter()).all(|x| x.is_finite())
            }
        }

        impl Add for $ty {
            type Output = $ty;
            fn add(self, rhs: $ty) -> $ty {
                $ty::new(self.$a + rhs.$a, self.$b + rhs.$b)
            }
        }

        impl Sub for $ty {
            type Output = $ty;
            fn sub(self, rhs: $ty) -> $ty {
                $ty::new(self.$a - rhs.$a, self.$b - rhs.$b)
            }
        }

        impl Neg for $ty {
            type Output = $ty;
            fn neg(self) -> $ty {
                $ty::new(-self.$a, -self.$b)
            }
        }

        impl Mul<f64> for $ty {
            type Output = $ty;
            fn mul(self, s: f64) -> $ty {
                $ty::new(self.$a * s, self.$b * s)
            }
        }

        impl Mul<$ty> for Matrix6<f64> {
            type Output = $ty;
            fn mul(self, rhs: $ty) -> $ty {
                $ty::from_vector(&(self * rhs.to_vector()))
            }
        }
    };
}

six_vector!(Twist, angular, linear);
six_vector!(Wrench, torque, force);

impl Twist {
    /// The se(3) matrix `[ω̃ v; 0 0]`.
    pub fn hat(&self) -> Matrix4<f64> {
        let mut m = Matrix4::zeros();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&hat(&self.angular));
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.linear);
        m
    }

    /// Inverse of [`Twist::hat`].
    pub fn vee(m: &Matrix4<f64>) -> Result<Self> {
        let angular = vee(&m.fixed_view::<3, 3>(0, 0).into_owned())?;
        Ok(Self::new(angular, m.fixed_view::<3, 1>(0, 3).into_owned()))
    }
}

impl Wrench {
    /// Power `Wᵀ T`.
    pub fn power(&self, twist: &Twist) -> f64 {
        self.torque.dot(&twist.angular) + self.force.dot(&twist.linear)
    }
}

/// Generalized inertia `[J 0; 0 mI₃]` expressed in a principal body frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpatialInertia {
    rotational: Matrix3<f64>,
    rotational_inv: Matrix3<f64>,
    mass: f64,
}

impl SpatialInertia {
    pub fn new(rotational: Matrix3<f64>, mass: f64) -> Result<Self> {
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::InvalidInertia(format!("mass must be positive, got {mass}")));
        }
        let asym = (rotational - rotational.transpose()).norm();
        if asym > tolerances::MATRIX_SYMMETRY {
            return Err(Error::InvalidInertia(format!(
                "rotational inertia not symmetric (‖J − Jᵀ‖ = {asym:e})"
            )));
        }
        let min_eig = rotational.symmetric_eigenvalues().min();
        if !(min_eig > 0.0) {
            return Err(Error::InvalidInertia(format!(
                "rotational inertia not positive definite (min eigenvalue {min_eig})"
            )));
        }
        let rotational_inv = rotational
            .cholesky()
            .map(|c| c.inverse())
            .ok_or_else(|| Error::InvalidInertia("Cholesky factorization failed".into()))?;
        Ok(Self {
            rotational,
            rotational_inv,
            mass,
        })
    }

    pub fn from_diagonal(j: Vector3<f64>, mass: f64) -> Result<Self> {
        Self::new(Matrix3::from_diagonal(&j), mass)
    }

    pub fn rotational(&self) -> &Matrix3<f64> {
        &self.rotational
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn matrix(&self) -> Matrix6<f64> {
        let mut m = Matrix6::zeros();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotational);
        m.fixed_view_mut::<3, 3>(3, 3)
            .copy_from(&(Matrix3::identity() * self.mass));
        m
    }

    /// Momentum `I T`.
    pub fn momentum(&self, twist: &Twist) -> Wrench {
        Wrench::new(self.rotational * twist.angular, twist.linear * self.mass)
    }

    /// `I⁻¹ W`.
    pub fn solve(&self, wrench: &Wrench) -> Twist {
        Twist::new(self.rotational_inv * wrench.torque, wrench.force / self.mass)
    }

    /// `½ Tᵀ I T`.
    pub fn kinetic_energy(&self, twist: &Twist) -> f64 {
        0.5 * self.momentum(twist).power(twist)
    }
}

/// `Ad_H = [R 0; ξ̃R R]`: maps a twist expressed in the child frame of `H` to its parent frame.
pub fn adjoint_group(pose: &Pose) -> Matrix6<f64> {
    let r = pose.rotation.matrix();
    let mut ad = Matrix6::zeros();
    ad.fixed_view_mut::<3, 3>(0, 0).copy_from(r);
    ad.fixed_view_mut::<3, 3>(3, 3).copy_from(r);
    ad.fixed_view_mut::<3, 3>(3, 0)
        .copy_from(&(hat(&pose.position) * r));
    ad
}

/// `ad_T = [ω̃ 0; ṽ ω̃]`.
pub fn adjoint_algebra(twist: &Twist) -> Matrix6<f64> {
    let w = hat(&twist.angular);
    let mut ad = Matrix6::zeros();
    ad.fixed_view_mut::<3, 3>(0, 0).copy_from(&w);
    ad.fixed_view_mut::<3, 3>(3, 3).copy_from(&w);
    ad.fixed_view_mut::<3, 3>(3, 0).copy_from(&hat(&twist.linear));
    ad
}

/// `ad_Tᵀ W`, the coadjoint action appearing in the Euler–Poincaré equations.
pub fn coadjoint_algebra(twist: &Twist, wrench: &Wrench) -> Wrench {
    // [ω̃ᵀ ṽᵀ; 0 ω̃ᵀ] [τ; f] = [τ × ω + f × v; f × ω]
    Wrench::new(
        wrench.torque.cross(&twist.angular) + wrench.force.cross(&twist.linear),
        wrench.force.cross(&twist.angular),
    )
}

/// `Ad_Pᵀ W`: the wrench seen in the child frame of `P` given `W` in its parent frame.
pub fn co_adjoint_wrench(pose: &Pose, wrench: &Wrench) -> Wrench {
    let rt = pose.rotation.matrix().transpose();
    Wrench::new(
        rt * (wrench.torque + wrench.force.cross(&pose.position)),
        rt * wrench.force,
    )
}

fn so3_exp(w: &Vector3<f64>) -> Matrix3<f64> {
    let (a, b, _) = exp_coefficients(w.norm());
    let k = hat(w);
    Matrix3::identity() + k * a + k * k * b
}

/// `(sin θ/θ, (1 − cos θ)/θ², (θ − sin θ)/θ³)` with a series branch near zero.
fn exp_coefficients(theta: f64) -> (f64, f64, f64) {
    if theta < tolerances::EXP_SERIES_ANGLE {
        let t2 = theta * theta;
        (
            1.0 - t2 / 6.0 + t2 * t2 / 120.0,
            0.5 - t2 / 24.0 + t2 * t2 / 720.0,
            1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0,
        )
    } else {
        let s = theta.sin();
        let half = (0.5 * theta).sin() / theta;
        let t2 = theta * theta;
        (s / theta, 2.0 * half * half, (theta - s) / (t2 * theta))
    }
}

/// Pose reached after following the constant body twist `T` for `dt` seconds from the identity.
pub fn exp_se3(twist: &Twist, dt: f64) -> Pose {
    let w = twist.angular * dt;
    let u = twist.linear * dt;
    let (a, b, c) = exp_coefficients(w.norm());
    let k = hat(&w);
    let k2 = k * k;
    let rotation = Matrix3::identity() + k * a + k2 * b;
    let v = Matrix3::identity() + k * b + k2 * c;
    Pose::new(Rotation::from_matrix_unchecked(rotation), v * u)
}
