//! Gain conditions, regions of attraction and Lyapunov monitors.
//!
//! All 2×2 eigenvalues and spectral norms are closed form.

use std::fmt::Write as _;

use nalgebra::Matrix2;

use crate::attitude_errors::{psi_for_e_r_bound, psi_of, ErrorSetKind};
use crate::control::{AttitudeGains, PositionGains};
use crate::error::{Error, GainViolation, Result};
use crate::so3::{Rotation, Vec3};

pub type Mat2 = Matrix2<f64>;

/// Upper clamp applied to every θ_max.
pub const THETA_CLAMP: f64 = 1.0 - 1e-9;

/// Eigenvalues `(λ_min, λ_max)` of the symmetric part of `m`.
pub fn sym_eigenvalues(m: &Mat2) -> (f64, f64) {
    let a = m[(0, 0)];
    let d = m[(1, 1)];
    let b = 0.5 * (m[(0, 1)] + m[(1, 0)]);
    let mean = 0.5 * (a + d);
    let radius = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    // min eigenvalue via det/max to avoid cancellation when both are positive
    let max = mean + radius;
    let min = if mean > 0.0 && max > 0.0 { (a * d - b * b) / max } else { mean - radius };
    (min, max)
}

pub fn lambda_min(m: &Mat2) -> f64 {
    sym_eigenvalues(m).0
}

pub fn lambda_max(m: &Mat2) -> f64 {
    sym_eigenvalues(m).1
}

/// Largest singular value.
pub fn spectral_norm(m: &Mat2) -> f64 {
    lambda_max(&(m.transpose() * m)).max(0.0).sqrt()
}

/// Strict `η > k_R/k_ω²`.
pub fn check_attitude_gains(g: &AttitudeGains) -> bool {
    g.eta > g.eta_bound()
}

/// Squared admissible initial angular-velocity error, `2 η k_R (cap − Ψ₀)`.
pub fn e_omega0_bound_sq(g: &AttitudeGains, cap: f64, psi0: f64) -> f64 {
    2.0 * g.eta * g.k_r * (cap - psi0)
}

fn psi_or_max(r0: &Rotation, rd0: &Rotation, kind: ErrorSetKind) -> f64 {
    psi_of(r0, rd0, kind).unwrap_or(2.0)
}

/// `Ψ(0) < 2` and `‖e_ω(0)‖² < 2 η k_R (2 − Ψ(0))`.
pub fn attitude_roa_contains(
    r0: &Rotation,
    rd0: &Rotation,
    e_omega0: &Vec3,
    g: &AttitudeGains,
    kind: ErrorSetKind,
) -> bool {
    let psi = psi_or_max(r0, rd0, kind);
    psi < 2.0 && e_omega0.norm_squared() < e_omega0_bound_sq(g, 2.0, psi)
}

/// `Ψ(0) < ψ_p < 1` and `‖e_ω(0)‖² < 2 η k_R (ψ_p − Ψ(0))`.
pub fn position_roa_contains(
    r0: &Rotation,
    rx0: &Rotation,
    e_omega0: &Vec3,
    g: &AttitudeGains,
    kind: ErrorSetKind,
    psi_p: f64,
) -> bool {
    let psi = psi_or_max(r0, rx0, kind);
    psi_p < 1.0 && psi < psi_p && e_omega0.norm_squared() < e_omega0_bound_sq(g, psi_p, psi)
}

/// The complementary band `ψ_p ≤ Ψ(0) < 2` with the attitude-mode `e_ω` bound.
pub fn attractiveness_contains(
    r0: &Rotation,
    rx0: &Rotation,
    e_omega0: &Vec3,
    g: &AttitudeGains,
    kind: ErrorSetKind,
    psi_p: f64,
) -> bool {
    let psi = psi_or_max(r0, rx0, kind);
    psi_p <= psi && psi < 2.0 && e_omega0.norm_squared() < e_omega0_bound_sq(g, 2.0, psi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaMax {
    /// `min{first, δ₁ + δ₂}` after clamping.
    pub value: f64,
    /// `a k_v² / (a k_v² + m k_x)`.
    pub first: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub clamped: bool,
}

fn theta_first(g: &PositionGains, m: f64) -> f64 {
    let ak2 = g.a * g.k_v * g.k_v;
    ak2 / (ak2 + m * g.k_x)
}

pub fn theta_max_no_xv(g: &PositionGains, m: f64) -> ThetaMax {
    let (kx, kv, a) = (g.k_x, g.k_v, g.a);
    let first = theta_first(g, m);
    let radicand = 4.0 * kx.powi(4) * kv.powi(4) * a.powi(4)
        + 4.0 * kx.powi(5) * kv.powi(2) * a.powi(3) * m
        + 2.0 * kx.powi(6) * m * m * a * a;
    let delta1 = 2.0 * kv * kv * radicand.sqrt() / (kx.powi(4) * m * m);
    let ratio = a * kv * kv / (m * kx);
    let delta2 = -4.0 * ratio * ratio - 2.0 * ratio;
    let raw = first.min(delta1 + delta2);
    ThetaMax { value: raw.min(THETA_CLAMP), first, delta1, delta2, clamped: raw > THETA_CLAMP }
}

pub fn theta_max_bounded(g: &PositionGains, m: f64) -> f64 {
    theta_first(g, m).min(THETA_CLAMP)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoaVariant {
    AttitudeMode,
    PositionNoXV,
    PositionBoundedX,
    PositionBoundedV,
    AttractivenessOnly,
}

/// `(Π₁, Π₂)` for the position-mode variants.
///
/// `e_bound` is `e_x_max` or `e_v_max` for the bounded variants and ignored otherwise.
pub fn build_pi_matrices(
    g: &PositionGains,
    m: f64,
    b: f64,
    theta: f64,
    variant: RoaVariant,
    e_bound: f64,
) -> Result<(Mat2, Mat2)> {
    let (kx, kv, a) = (g.k_x, g.k_v, g.a);
    let theta_max = match variant {
        RoaVariant::PositionNoXV => theta_max_no_xv(g, m).value,
        RoaVariant::PositionBoundedX | RoaVariant::PositionBoundedV => theta_max_bounded(g, m),
        _ => return Err(Error::InvalidParameter(format!("{variant:?} has no Pi matrices"))),
    };
    if !(theta >= 0.0 && theta < theta_max) {
        return Err(Error::ThetaTooLarge { theta, theta_max });
    }
    let d11 = a * kx * kx * (1.0 - theta);
    let d22 = a * kv * kv - theta * (m * kx + a * kv * kv);
    let extra = (2.0 * a * kx * kv + m * kx * kx / kv) * e_bound;
    Ok(match variant {
        RoaVariant::PositionNoXV => {
            let off = -a * kx * kv * theta - m * kx * kx * theta / (2.0 * kv);
            (Mat2::new(d11, off, off, d22), Mat2::new(b * kx, 0.0, b * kv, 0.0))
        }
        RoaVariant::PositionBoundedX => (Mat2::new(d11, 0.0, 0.0, d22), Mat2::new(b * kx, 0.0, b * kv + extra, 0.0)),
        _ => (Mat2::new(d11, 0.0, 0.0, d22), Mat2::new(b * kx + extra, 0.0, b * kv, 0.0)),
    })
}

pub fn w3(g: &AttitudeGains) -> Mat2 {
    Mat2::new(g.k_r * g.k_r, 0.0, 0.0, g.k_omega * g.k_omega)
}

/// Required `λ_min(W₃)` lower bound `‖Π₂‖² / (4 η λ_min(Π₁))`.
pub fn w3_requirement(g: &AttitudeGains, pi1: &Mat2, pi2: &Mat2) -> Result<f64> {
    let l1 = lambda_min(pi1);
    if !(l1 > 0.0) {
        return Err(Error::NotPositiveDefinite { min_eig: l1 });
    }
    let n = spectral_norm(pi2);
    Ok(n * n / (4.0 * g.eta * l1))
}

/// Strict `λ_min(W₃) > ‖Π₂‖² / (4 η λ_min(Π₁))`.
pub fn check_w3_condition(g: &AttitudeGains, pi1: &Mat2, pi2: &Mat2) -> Result<bool> {
    Ok(lambda_min(&w3(g)) > w3_requirement(g, pi1, pi2)?)
}

/// Like [`check_w3_condition`] but as a gate.
pub fn require_w3_condition(g: &AttitudeGains, pi1: &Mat2, pi2: &Mat2) -> Result<()> {
    let rhs = w3_requirement(g, pi1, pi2)?;
    let lhs = lambda_min(&w3(g));
    if lhs > rhs {
        Ok(())
    } else {
        Err(GainViolation::W3Condition { lhs, rhs }.into())
    }
}

pub fn pi3(g: &PositionGains, m: f64) -> Mat2 {
    let d = g.a * g.k_x * g.k_v + m * g.k_x * g.k_x / (2.0 * g.k_v);
    let off = -0.5 * m * g.k_x;
    Mat2::new(d, off, off, 0.5 * m * g.k_v)
}

pub fn pi4(g: &PositionGains, m: f64) -> Mat2 {
    let d = g.a * g.k_x * g.k_v + m * g.k_x * g.k_x / (2.0 * g.k_v);
    let off = 0.5 * m * g.k_x;
    Mat2::new(d, off, off, 0.5 * m * g.k_v)
}

pub fn pi5(g: &AttitudeGains, pi1: &Mat2, pi2: &Mat2) -> Mat2 {
    let off = -0.5 * spectral_norm(pi2);
    Mat2::new(lambda_min(pi1), off, off, g.eta * lambda_min(&w3(g)))
}

/// Lower sandwich matrix of `V`.
pub fn w1(g: &AttitudeGains, kind: ErrorSetKind) -> Mat2 {
    let base = g.k_r * g.k_r / (2.0 * g.k_omega);
    let w = match kind {
        ErrorSetKind::SetOne => base + g.eta * g.k_r * g.k_omega,
        ErrorSetKind::SetTwo => base + 2.0 * g.eta * g.k_r * g.k_omega,
    };
    Mat2::new(w, -0.5 * g.k_r, -0.5 * g.k_r, 0.5 * g.k_omega)
}

/// Upper sandwich matrix of `V`; `psi_a` only matters for SetOne.
pub fn w2(g: &AttitudeGains, kind: ErrorSetKind, psi_a: f64) -> Mat2 {
    let base = g.k_r * g.k_r / (2.0 * g.k_omega);
    let w = match kind {
        ErrorSetKind::SetOne => base + 2.0 / (2.0 - psi_a) * g.eta * g.k_r * g.k_omega,
        ErrorSetKind::SetTwo => base + 4.0 * g.eta * g.k_r * g.k_omega,
    };
    Mat2::new(w, 0.5 * g.k_r, 0.5 * g.k_r, 0.5 * g.k_omega)
}

/// Exponential rate `η λ_min(W₃) / λ_max(W₂)`.
pub fn decay_rate(g: &AttitudeGains, kind: ErrorSetKind, psi_a: f64) -> f64 {
    g.eta * lambda_min(&w3(g)) / lambda_max(&w2(g, kind, psi_a))
}

/// Surface Lyapunov function `s_Rᵀs_R/(2k_ω) + 2ηk_Rk_ωΨ`.
pub fn lyapunov_v(g: &AttitudeGains, psi: f64, e_r: &Vec3, e_omega: &Vec3) -> f64 {
    let s = g.k_r * e_r + g.k_omega * e_omega;
    s.norm_squared() / (2.0 * g.k_omega) + 2.0 * g.eta * g.k_r * g.k_omega * psi
}

/// `½‖e_ω‖² + ηk_RΨ`.
pub fn lyapunov_v_psi(g: &AttitudeGains, psi: f64, e_omega: &Vec3) -> f64 {
    0.5 * e_omega.norm_squared() + g.eta * g.k_r * psi
}

/// `(m/(2k_v)) s_xᵀs_x + a k_x k_v ‖e_x‖²`.
pub fn lyapunov_v_x(g: &PositionGains, m: f64, e_x: &Vec3, e_v: &Vec3) -> f64 {
    let s = g.k_x * e_x + g.k_v * e_v;
    m / (2.0 * g.k_v) * s.norm_squared() + g.a * g.k_x * g.k_v * e_x.norm_squared()
}

/// Upper bound on Ψ along the trajectory: `V_Ψ(0)/(ηk_R)`.
pub fn psi_a(g: &AttitudeGains, psi0: f64, e_omega0: &Vec3) -> f64 {
    lyapunov_v_psi(g, psi0, e_omega0) / (g.eta * g.k_r)
}

/// Envelope prefactor μ with `Ψ(t) ≤ μ e^{−τt}`.
pub fn envelope_mu(g: &AttitudeGains, kind: ErrorSetKind, v0: f64, psi_a: f64) -> f64 {
    let l1 = lambda_min(&w1(g, kind));
    match kind {
        ErrorSetKind::SetOne => v0 / ((2.0 - psi_a) * l1),
        ErrorSetKind::SetTwo => 2.0 * v0 / l1,
    }
}

/// Region-of-attraction parameters for one variant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoaSpec {
    pub variant: RoaVariant,
    pub psi_p: f64,
    pub theta: f64,
    pub e_bound: f64,
    pub b: f64,
}

impl RoaSpec {
    /// Position-mode request with `ψ_p` derived from the variant's θ_max.
    pub fn position(
        g: &PositionGains,
        m: f64,
        kind: ErrorSetKind,
        variant: RoaVariant,
        theta: f64,
        e_bound: f64,
        b: f64,
    ) -> Result<Self> {
        let theta_max = match variant {
            RoaVariant::PositionNoXV | RoaVariant::AttractivenessOnly => theta_max_no_xv(g, m).value,
            RoaVariant::PositionBoundedX | RoaVariant::PositionBoundedV => theta_max_bounded(g, m),
            RoaVariant::AttitudeMode => {
                return Err(Error::InvalidParameter("attitude mode has no position ROA".into()))
            }
        };
        if !(theta < theta_max) {
            return Err(Error::ThetaTooLarge { theta, theta_max });
        }
        let psi_p = psi_for_e_r_bound(theta_max, kind);
        Ok(RoaSpec { variant, psi_p, theta, e_bound, b })
    }
}

/// Inputs for [`stability_report`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportRequest {
    pub attitude: AttitudeGains,
    pub position: Option<PositionGains>,
    pub kind: ErrorSetKind,
    pub mass: f64,
    pub b: f64,
    pub theta: f64,
    pub e_x_max: f64,
    pub e_v_max: f64,
    /// Initial Ψ for the admissible-`e_ω(0)` bounds.
    pub psi0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositionReport {
    pub variant: RoaVariant,
    pub theta_max: f64,
    pub psi_p: f64,
    pub pi1: Mat2,
    pub pi2: Mat2,
    pub pi1_eig: (f64, f64),
    pub pi2_norm: f64,
    pub pi5_eig: (f64, f64),
    pub w3_ok: bool,
    pub w3_required: f64,
    pub e_omega0_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub eta_ok: bool,
    pub eta_bound: f64,
    pub kind: ErrorSetKind,
    pub psi0: f64,
    pub psi_a: f64,
    pub w1_eig: (f64, f64),
    pub w2_eig: (f64, f64),
    pub w3_eig: (f64, f64),
    pub tau: f64,
    pub attitude_e_omega0_max: f64,
    pub theta: f64,
    pub theta_max: Option<ThetaMax>,
    pub theta_max_bounded: Option<f64>,
    pub pi3_eig: Option<(f64, f64)>,
    pub pi4_eig: Option<(f64, f64)>,
    pub position: Vec<std::result::Result<PositionReport, String>>,
}

impl StabilityReport {
    /// Every gain condition that was evaluated holds.
    pub fn all_ok(&self) -> bool {
        self.eta_ok && self.position.iter().all(|p| p.as_ref().map(|r| r.w3_ok).unwrap_or(false))
    }

    /// Flat `key = value` rendering.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        let pair = |p: (f64, f64)| format!("{:.9e} {:.9e}", p.0, p.1);
        kv("error_set", self.kind.to_string());
        kv("eta_condition", format!("{} (eta > k_R/k_omega^2 = {:.9e})", pass(self.eta_ok), self.eta_bound));
        kv("psi0", format!("{:.9e}", self.psi0));
        kv("psi_a", format!("{:.9e}", self.psi_a));
        kv("attitude_e_omega0_max", format!("{:.9e}", self.attitude_e_omega0_max));
        kv("w1_eigenvalues", pair(self.w1_eig));
        kv("w2_eigenvalues", pair(self.w2_eig));
        kv("w3_eigenvalues", pair(self.w3_eig));
        kv("tau", format!("{:.9e}", self.tau));
        if let Some(t) = &self.theta_max {
            kv("theta", format!("{:.9e}", self.theta));
            kv("theta_max_no_xv", format!("{:.9e}", t.value));
            kv("theta_max_first_argument", format!("{:.9e}", t.first));
            kv("delta1", format!("{:.9e}", t.delta1));
            kv("delta2", format!("{:.9e}", t.delta2));
            kv("theta_max_clamped", t.clamped.to_string());
        }
        if let Some(t) = self.theta_max_bounded {
            kv("theta_max_bounded", format!("{t:.9e}"));
        }
        if let Some(p) = self.pi3_eig {
            kv("pi3_eigenvalues", pair(p));
        }
        if let Some(p) = self.pi4_eig {
            kv("pi4_eigenvalues", pair(p));
        }
        for entry in &self.position {
            match entry {
                Ok(r) => {
                    let tag = variant_tag(r.variant);
                    kv(&format!("{tag}.theta_max"), format!("{:.9e}", r.theta_max));
                    kv(&format!("{tag}.psi_p"), format!("{:.9e}", r.psi_p));
                    kv(&format!("{tag}.pi1_eigenvalues"), pair(r.pi1_eig));
                    kv(&format!("{tag}.pi2_norm"), format!("{:.9e}", r.pi2_norm));
                    kv(&format!("{tag}.pi5_eigenvalues"), pair(r.pi5_eig));
                    kv(
                        &format!("{tag}.w3_condition"),
                        format!(
                            "{} (lambda_min(W3) > ||Pi2||^2/(4 eta lambda_min(Pi1)) = {:.9e})",
                            pass(r.w3_ok),
                            r.w3_required
                        ),
                    );
                    kv(&format!("{tag}.e_omega0_max"), format!("{:.9e}", r.e_omega0_max));
                }
                Err(e) => kv("position_error", e.clone()),
            }
        }
        s
    }
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "fail"
    }
}

fn variant_tag(v: RoaVariant) -> &'static str {
    match v {
        RoaVariant::AttitudeMode => "attitude",
        RoaVariant::PositionNoXV => "no_xv",
        RoaVariant::PositionBoundedX => "bounded_x",
        RoaVariant::PositionBoundedV => "bounded_v",
        RoaVariant::AttractivenessOnly => "attractiveness",
    }
}

/// Evaluates every condition for the given gains. Fails only on non-positive gains.
pub fn stability_report(req: &ReportRequest) -> Result<StabilityReport> {
    let g = &req.attitude;
    for (name, v) in [("k_R", g.k_r), ("k_omega", g.k_omega), ("eta", g.eta)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(GainViolation::NonPositive { name, value: v }.into());
        }
    }
    let psi_a = psi_a(g, req.psi0, &Vec3::zeros());
    let attitude_bound = e_omega0_bound_sq(g, 2.0, req.psi0).max(0.0).sqrt();
    let mut report = StabilityReport {
        eta_ok: check_attitude_gains(g),
        eta_bound: g.eta_bound(),
        kind: req.kind,
        psi0: req.psi0,
        psi_a,
        w1_eig: sym_eigenvalues(&w1(g, req.kind)),
        w2_eig: sym_eigenvalues(&w2(g, req.kind, psi_a)),
        w3_eig: sym_eigenvalues(&w3(g)),
        tau: decay_rate(g, req.kind, psi_a),
        attitude_e_omega0_max: attitude_bound,
        theta: req.theta,
        theta_max: None,
        theta_max_bounded: None,
        pi3_eig: None,
        pi4_eig: None,
        position: Vec::new(),
    };
    let Some(p) = req.position else {
        return Ok(report);
    };
    p.validate().or_else(|e| match e {
        GainViolation::EtaBound { .. } => Ok(()),
        other => Err(other),
    })?;
    let m = req.mass;
    report.theta_max = Some(theta_max_no_xv(&p, m));
    report.theta_max_bounded = Some(theta_max_bounded(&p, m));
    report.pi3_eig = Some(sym_eigenvalues(&pi3(&p, m)));
    report.pi4_eig = Some(sym_eigenvalues(&pi4(&p, m)));
    for (variant, bound) in [
        (RoaVariant::PositionNoXV, 0.0),
        (RoaVariant::PositionBoundedX, req.e_x_max),
        (RoaVariant::PositionBoundedV, req.e_v_max),
    ] {
        let entry = (|| -> Result<PositionReport> {
            let spec = RoaSpec::position(&p, m, req.kind, variant, req.theta, bound, req.b)?;
            let (pi1, pi2) = build_pi_matrices(&p, m, req.b, req.theta, variant, bound)?;
            let w3_required = w3_requirement(g, &pi1, &pi2)?;
            Ok(PositionReport {
                variant,
                theta_max: match variant {
                    RoaVariant::PositionNoXV => theta_max_no_xv(&p, m).value,
                    _ => theta_max_bounded(&p, m),
                },
                psi_p: spec.psi_p,
                pi1,
                pi2,
                pi1_eig: sym_eigenvalues(&pi1),
                pi2_norm: spectral_norm(&pi2),
                pi5_eig: sym_eigenvalues(&pi5(g, &pi1, &pi2)),
                w3_ok: lambda_min(&w3(g)) > w3_required,
                w3_required,
                e_omega0_max: e_omega0_bound_sq(g, spec.psi_p, req.psi0).max(0.0).sqrt(),
            })
        })();
        report.position.push(entry.map_err(|e| format!("{}: {e}", variant_tag(variant))));
    }
    Ok(report)
}

/// One sample of tracking errors fed to [`lyapunov_monitors`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorSample {
    pub t: f64,
    pub psi: f64,
    pub e_r: Vec3,
    pub e_omega: Vec3,
    pub e_x: Vec3,
    pub e_v: Vec3,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MonitorMode {
    Attitude,
    Position { gains: PositionGains, mass: f64, pi1: Mat2, pi2: Mat2 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonitorCheck {
    /// Discrete `V̇` above its bound.
    Derivative,
    SandwichLower,
    SandwichUpper,
    Envelope,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub t: f64,
    pub check: MonitorCheck,
    pub residual: f64,
}

/// Tolerances for [`lyapunov_monitors`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorTolerance {
    /// Relative slack on the derivative bound (fixed-step and zero-order-hold error).
    pub derivative_rel: f64,
    /// Relative slack on the sandwich and envelope checks.
    pub bound_rel: f64,
    /// Roundoff resolution of the error vectors, in units of machine epsilon.
    pub resolution_ulps: f64,
}

impl Default for MonitorTolerance {
    fn default() -> Self {
        MonitorTolerance { derivative_rel: 0.1, bound_rel: 1e-9, resolution_ulps: 1e3 }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MonitorSeries {
    pub t: Vec<f64>,
    pub v: Vec<f64>,
    pub v_psi: Vec<f64>,
    pub v_x: Vec<f64>,
    pub v_g: Vec<f64>,
    /// `V̇ + bound` per sample (central difference; one-sided at the ends).
    pub derivative_residual: Vec<f64>,
    /// `min{2, μ e^{−τ(t−t₀)}}`.
    pub envelope: Vec<f64>,
    pub psi_a: f64,
    pub mu: f64,
    pub tau: f64,
    /// Below this value the monitored function is at roundoff level.
    pub resolution_floor: f64,
    /// Steps whose previous value lies above the floor.
    pub resolved_steps: usize,
    /// Resolved steps on which the monitored function strictly decreased.
    pub decreasing_steps: usize,
    /// Strictly decreasing steps over all steps, regardless of the floor.
    pub raw_decreasing_fraction: f64,
    pub violations: Vec<Violation>,
}

impl MonitorSeries {
    /// Fraction of resolved steps with a strict decrease (1 when none are resolved).
    pub fn decreasing_fraction(&self) -> f64 {
        if self.resolved_steps == 0 {
            1.0
        } else {
            self.decreasing_steps as f64 / self.resolved_steps as f64
        }
    }

    pub fn violations_of(&self, check: MonitorCheck) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(move |v| v.check == check)
    }
}

fn quad(m: &Mat2, a: f64, b: f64) -> f64 {
    m[(0, 0)] * a * a + (m[(0, 1)] + m[(1, 0)]) * a * b + m[(1, 1)] * b * b
}

/// Lyapunov values and bound residuals along a fixed-step trajectory.
///
/// In attitude mode the strict-decrease count and derivative check apply to
/// `V`; in position mode to `V_g`. Violations are collected, never raised.
pub fn lyapunov_monitors(
    samples: &[MonitorSample],
    g: &AttitudeGains,
    kind: ErrorSetKind,
    mode: &MonitorMode,
    tol: &MonitorTolerance,
) -> MonitorSeries {
    let mut out = MonitorSeries::default();
    let Some(first) = samples.first() else {
        return out;
    };
    let n = samples.len();
    let pa = psi_a(g, first.psi, &first.e_omega).min(2.0 - 1e-12);
    let w1m = w1(g, kind);
    let w2m = w2(g, kind, pa);
    let w3m = w3(g);
    let v0 = lyapunov_v(g, first.psi, &first.e_r, &first.e_omega);
    out.psi_a = pa;
    out.tau = decay_rate(g, kind, pa);
    out.mu = envelope_mu(g, kind, v0, pa);

    let res = tol.resolution_ulps * f64::EPSILON;
    let mut floor = lambda_max(&w2m) * res * res;
    let pi5m = if let MonitorMode::Position { gains, mass, pi1, pi2 } = mode {
        floor += lambda_max(&pi4(gains, *mass)) * res * res;
        Some(pi5(g, pi1, pi2))
    } else {
        None
    };
    out.resolution_floor = floor;

    let mut bound = Vec::with_capacity(n);
    for s in samples {
        let (er, ew) = (s.e_r.norm(), s.e_omega.norm());
        let v = lyapunov_v(g, s.psi, &s.e_r, &s.e_omega);
        out.t.push(s.t);
        out.v.push(v);
        out.v_psi.push(lyapunov_v_psi(g, s.psi, &s.e_omega));
        let lo = quad(&w1m, er, ew);
        let hi = quad(&w2m, er, ew);
        let slack = tol.bound_rel * v.abs().max(floor);
        if v < lo - slack {
            out.violations.push(Violation { t: s.t, check: MonitorCheck::SandwichLower, residual: lo - v });
        }
        if v > hi + slack {
            out.violations.push(Violation { t: s.t, check: MonitorCheck::SandwichUpper, residual: v - hi });
        }
        let env = (out.mu * (-out.tau * (s.t - first.t)).exp()).min(2.0);
        out.envelope.push(env);
        if s.psi > env * (1.0 + tol.bound_rel) + floor {
            out.violations.push(Violation { t: s.t, check: MonitorCheck::Envelope, residual: s.psi - env });
        }
        match (mode, &pi5m) {
            (MonitorMode::Position { gains, mass, .. }, Some(p5)) => {
                let vx = lyapunov_v_x(gains, *mass, &s.e_x, &s.e_v);
                out.v_x.push(vx);
                out.v_g.push(vx + v);
                let zx = (s.e_x.norm_squared() + s.e_v.norm_squared()).sqrt();
                let zr = (er * er + ew * ew).sqrt();
                bound.push(quad(p5, zx, zr));
            }
            _ => {
                out.v_x.push(0.0);
                out.v_g.push(v);
                bound.push(g.eta * quad(&w3m, er, ew));
            }
        }
    }

    let monitored = &out.v_g;
    let mut raw = 0usize;
    for k in 1..n {
        let decreased = monitored[k] < monitored[k - 1];
        raw += decreased as usize;
        if monitored[k - 1] > floor {
            out.resolved_steps += 1;
            out.decreasing_steps += decreased as usize;
        }
    }
    out.raw_decreasing_fraction = if n > 1 { raw as f64 / (n - 1) as f64 } else { 1.0 };

    for k in 0..n {
        let deriv = if n < 2 {
            0.0
        } else if k == 0 {
            (monitored[1] - monitored[0]) / (out.t[1] - out.t[0])
        } else if k == n - 1 {
            (monitored[k] - monitored[k - 1]) / (out.t[k] - out.t[k - 1])
        } else {
            (monitored[k + 1] - monitored[k - 1]) / (out.t[k + 1] - out.t[k - 1])
        };
        let r = deriv + bound[k];
        out.derivative_residual.push(r);
        let dt = if n > 1 { out.t[1] - out.t[0] } else { 1.0 };
        if r > tol.derivative_rel * bound[k].abs() + floor / dt {
            out.violations.push(Violation { t: out.t[k], check: MonitorCheck::Derivative, residual: r });
        }
    }
    out
}
