//! Rotation-group primitives.
//!
//! Rotations are stored as plain 3×3 matrices (body to inertial). Quaternions
//! and Euler angles are deliberately absent: every controller in this crate
//! works on the matrix directly.

use std::ops::Mul;

use nalgebra::{Matrix3, Vector3};
use rand::Rng;

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Orthonormality tolerance `‖RᵀR − I‖_F` accepted by [`Rotation::from_matrix`].
pub const ORTHONORMAL_TOL: f64 = 1e-9;

/// Below this rotation angle `exp_so3` switches to its Taylor expansion.
pub const SMALL_ANGLE: f64 = 1e-8;

const ASYMMETRY_TOL: f64 = 1e-6;
const SINGULAR_DET: f64 = 1e-12;

pub const E1: Vec3 = Vector3::new(1.0, 0.0, 0.0);
pub const E2: Vec3 = Vector3::new(0.0, 1.0, 0.0);
pub const E3: Vec3 = Vector3::new(0.0, 0.0, 1.0);

/// An element of SO(3).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation(Mat3);

impl Rotation {
    pub fn identity() -> Self {
        Rotation(Mat3::identity())
    }

    /// Wraps `m` after checking `‖mᵀm − I‖_F ≤ 1e-9` and `det(m) > 0`.
    pub fn from_matrix(m: Mat3) -> Result<Self> {
        let residual = orthonormality_residual(&m);
        let det = m.determinant();
        if !residual.is_finite() || residual > ORTHONORMAL_TOL || det <= 0.0 {
            return Err(Error::InvalidParameter(format!("not a rotation: |R^T R - I|_F = {residual:e}, det = {det}")));
        }
        Ok(Rotation(m))
    }

    /// Wraps `m` without validation. Callers guarantee the invariant.
    pub fn from_matrix_unchecked(m: Mat3) -> Self {
        Rotation(m)
    }

    /// Rotation by `angle` radians about `axis` (normalized internally).
    pub fn about_axis(axis: &Vec3, angle: f64) -> Self {
        let n = axis.norm();
        if n == 0.0 {
            return Self::identity();
        }
        exp_so3(&(axis * (angle / n)))
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    pub fn into_matrix(self) -> Mat3 {
        self.0
    }

    pub fn transpose(&self) -> Self {
        Rotation(self.0.transpose())
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    /// Body third axis expressed in the inertial frame, `R e₃`.
    pub fn thrust_axis(&self) -> Vec3 {
        self.0.column(2).into_owned()
    }

    pub fn orthonormality_residual(&self) -> f64 {
        orthonormality_residual(&self.0)
    }
}

impl Mul for Rotation {
    type Output = Rotation;
    fn mul(self, rhs: Rotation) -> Rotation {
        Rotation(self.0 * rhs.0)
    }
}

impl Mul<&Rotation> for &Rotation {
    type Output = Rotation;
    fn mul(self, rhs: &Rotation) -> Rotation {
        Rotation(self.0 * rhs.0)
    }
}

impl Mul<Vec3> for &Rotation {
    type Output = Vec3;
    fn mul(self, rhs: Vec3) -> Vec3 {
        self.0 * rhs
    }
}

impl Mul<Vec3> for Rotation {
    type Output = Vec3;
    fn mul(self, rhs: Vec3) -> Vec3 {
        self.0 * rhs
    }
}

/// A 3×3 antisymmetric matrix, the image of [`hat`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkewMatrix(Mat3);

impl SkewMatrix {
    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    pub fn into_matrix(self) -> Mat3 {
        self.0
    }

    /// Inverse of [`hat`]; exact because the matrix is antisymmetric by construction.
    pub fn vee(&self) -> Vec3 {
        Vec3::new(self.0[(2, 1)], self.0[(0, 2)], self.0[(1, 0)])
    }
}

fn orthonormality_residual(m: &Mat3) -> f64 {
    (m.transpose() * m - Mat3::identity()).norm()
}

/// Cross-product map: `hat(r) · w = r × w`.
pub fn hat(r: &Vec3) -> SkewMatrix {
    SkewMatrix(Mat3::new(
        0.0, -r.z, r.y, //
        r.z, 0.0, -r.x, //
        -r.y, r.x, 0.0,
    ))
}

/// Antisymmetric part `(M − Mᵀ)/2` mapped back to a vector, with no symmetry check.
pub fn vee_antisym(m: &Mat3) -> Vec3 {
    Vec3::new(0.5 * (m[(2, 1)] - m[(1, 2)]), 0.5 * (m[(0, 2)] - m[(2, 0)]), 0.5 * (m[(1, 0)] - m[(0, 1)]))
}

/// Inverse of [`hat`] for a general matrix. The input is antisymmetrized first;
/// a symmetric part larger than 1e-6 relative to `‖M‖_F` is rejected.
pub fn vee(m: &Mat3) -> Result<Vec3> {
    let residual = (m + m.transpose()).norm();
    let scale = m.norm();
    if !residual.is_finite() || residual > ASYMMETRY_TOL * scale {
        return Err(Error::Asymmetry { residual: if scale > 0.0 { residual / scale } else { residual } });
    }
    Ok(vee_antisym(m))
}

/// Exponential map so(3) → SO(3) (Rodrigues).
pub fn exp_so3(w: &Vec3) -> Rotation {
    let theta = w.norm();
    let k = hat(w).into_matrix();
    let k2 = k * k;
    if theta < SMALL_ANGLE {
        return Rotation(Mat3::identity() + k + 0.5 * k2);
    }
    let a = theta.sin() / theta;
    let b = (1.0 - theta.cos()) / (theta * theta);
    Rotation(Mat3::identity() + a * k + b * k2)
}

/// Nearest rotation to `m` in the Frobenius sense (orthogonal polar factor).
pub fn project_so3(m: &Mat3) -> Result<Rotation> {
    let det = m.determinant();
    if !det.is_finite() || det <= SINGULAR_DET {
        return Err(Error::Singular { det });
    }
    let svd = m.svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::Singular { det }),
    };
    Ok(Rotation(u * v_t))
}

/// Uniform random axis times uniform angle in `[0, π)`.
///
/// This is not the Haar measure on SO(3); it over-weights small angles, which
/// is what the property tests want near the identity.
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R) -> Rotation {
    let axis = random_unit_vector(rng);
    let angle = rng.random_range(0.0..std::f64::consts::PI);
    exp_so3(&(axis * angle))
}

pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let rho = (1.0 - z * z).max(0.0).sqrt();
    Vec3::new(rho * phi.cos(), rho * phi.sin(), z)
}
