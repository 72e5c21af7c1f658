//! Attitude tracking errors on SO(3) × SO(3).
//!
//! Two error sets are supported:
//!
//! * [`ErrorSetKind::SetOne`]: `Ψ = ½ tr[I − R_dᵀR]`, `e_R = ½ (R_dᵀR − RᵀR_d)^∨`.
//! * [`ErrorSetKind::SetTwo`]: `Ψ = 2 − √(1 + tr[R_dᵀR])`, with `e_R` the SetOne
//!   vector scaled by `(1 + tr[R_dᵀR])^{-1/2}`. Undefined at antipodal attitudes.
//!
//! `Ψ` is evaluated through `‖R − R_d‖²_F / 4`, which equals `½ tr[I − R_dᵀR]`
//! on SO(3) but keeps full relative precision as the error goes to zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::so3::{hat, vee_antisym, Mat3, Rotation, Vec3};

/// `1 + tr[R_dᵀR]` at or below this value is treated as antipodal by SetTwo.
pub const ANTIPODAL_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorSetKind {
    #[serde(alias = "one", alias = "1")]
    SetOne,
    #[serde(alias = "two", alias = "2")]
    SetTwo,
}

impl std::fmt::Display for ErrorSetKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ErrorSetKind::SetOne => f.write_str("one"),
            ErrorSetKind::SetTwo => f.write_str("two"),
        }
    }
}

impl std::str::FromStr for ErrorSetKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "one" | "1" | "setone" | "set_one" => Ok(ErrorSetKind::SetOne),
            "two" | "2" | "settwo" | "set_two" => Ok(ErrorSetKind::SetTwo),
            other => Err(Error::Config(format!("unknown error set '{other}' (expected one|two)"))),
        }
    }
}

/// Configuration and velocity errors for one (R, ω, R_d, ω_d) sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttitudeError {
    pub psi: f64,
    pub e_r: Vec3,
    pub e_omega: Vec3,
    pub kind: ErrorSetKind,
}

impl AttitudeError {
    pub fn new(r: &Rotation, w: &Vec3, rd: &Rotation, wd: &Vec3, kind: ErrorSetKind) -> Result<Self> {
        Ok(AttitudeError {
            psi: psi_of(r, rd, kind)?,
            e_r: e_r_of(r, rd, kind)?,
            e_omega: e_omega_of(r, w, rd, wd),
            kind,
        })
    }
}

/// `½ tr[I − R_dᵀR]` computed without cancellation.
fn psi_set_one(r: &Rotation, rd: &Rotation) -> f64 {
    0.25 * (r.matrix() - rd.matrix()).norm_squared()
}

/// `1 + tr[R_dᵀR]`, rejected when at or below [`ANTIPODAL_MARGIN`].
fn antipodal_margin(r: &Rotation, rd: &Rotation) -> Result<f64> {
    let c = 1.0 + (rd.matrix().transpose() * r.matrix()).trace();
    if c.is_nan() || c <= ANTIPODAL_MARGIN {
        return Err(Error::Antipodal { margin: c });
    }
    Ok(c)
}

pub fn psi_of(r: &Rotation, rd: &Rotation, kind: ErrorSetKind) -> Result<f64> {
    let psi1 = psi_set_one(r, rd);
    match kind {
        ErrorSetKind::SetOne => Ok(psi1.min(2.0)),
        ErrorSetKind::SetTwo => {
            let c = antipodal_margin(r, rd)?;
            // 2 − √c rewritten as 2Ψ₁/(2 + √c) since c = 4 − 2Ψ₁.
            Ok((2.0 * psi1 / (2.0 + c.sqrt())).min(2.0))
        }
    }
}

pub fn e_r_of(r: &Rotation, rd: &Rotation, kind: ErrorSetKind) -> Result<Vec3> {
    let base = vee_antisym(&(rd.matrix().transpose() * r.matrix()));
    match kind {
        ErrorSetKind::SetOne => Ok(base),
        ErrorSetKind::SetTwo => Ok(base / antipodal_margin(r, rd)?.sqrt()),
    }
}

pub fn e_omega_of(r: &Rotation, w: &Vec3, rd: &Rotation, wd: &Vec3) -> Vec3 {
    w - r.matrix().transpose() * (rd.matrix() * wd)
}

/// The matrix `E(R, R_d)` with `ė_R = E e_ω`.
pub fn transport_matrix(r: &Rotation, rd: &Rotation, kind: ErrorSetKind) -> Result<Mat3> {
    let q = r.matrix().transpose() * rd.matrix();
    let base = q.trace() * Mat3::identity() - q;
    match kind {
        ErrorSetKind::SetOne => Ok(0.5 * base),
        ErrorSetKind::SetTwo => {
            let c = antipodal_margin(r, rd)?;
            let e_r = e_r_of(r, rd, kind)?;
            Ok((base + 2.0 * e_r * e_r.transpose()) / (2.0 * c.sqrt()))
        }
    }
}

/// Feed-forward term of `ė_ω = ω̇ + a_d`.
pub fn a_d_of(r: &Rotation, w: &Vec3, rd: &Rotation, wd: &Vec3, wd_dot: &Vec3) -> Vec3 {
    let q = r.matrix().transpose() * rd.matrix();
    hat(w).matrix() * (q * wd) - q * wd_dot
}

/// Cosine between `R e₃` and `R_x e₃`.
pub fn thrust_axis_cosine(r: &Rotation, rx: &Rotation) -> f64 {
    rx.thrust_axis().dot(&r.thrust_axis())
}

/// Largest `‖e_R‖` compatible with `Ψ ≤ ψ` for the given error set.
pub fn e_r_bound_for_psi(psi: f64, kind: ErrorSetKind) -> f64 {
    match kind {
        ErrorSetKind::SetOne => (psi * (2.0 - psi)).max(0.0).sqrt(),
        ErrorSetKind::SetTwo => (psi * (1.0 - psi / 4.0)).max(0.0).sqrt(),
    }
}

/// Inverse of [`e_r_bound_for_psi`] on `ψ ∈ [0, 1]` (SetOne) or `ψ ∈ [0, 2]` (SetTwo).
pub fn psi_for_e_r_bound(theta: f64, kind: ErrorSetKind) -> f64 {
    let t2 = (theta * theta).min(1.0);
    match kind {
        ErrorSetKind::SetOne => t2 / (1.0 + (1.0 - t2).sqrt()),
        ErrorSetKind::SetTwo => 2.0 * t2 / (1.0 + (1.0 - t2).sqrt()),
    }
}
