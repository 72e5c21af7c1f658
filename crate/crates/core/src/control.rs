//! Surface-based attitude and position controllers.

use serde::{Deserialize, Serialize};

use crate::attitude_errors::{a_d_of, transport_matrix, AttitudeError, ErrorSetKind};
use crate::error::{Error, GainViolation, Result};
use crate::plant::{QuadParams, RigidBodyState, Wrench};
use crate::reference::{FlightMode, ReferenceSignal, Trajectory};
use crate::so3::{exp_so3, vee_antisym, Mat3, Rotation, Vec3, E3};

/// Guard on `‖U‖` below which the thrust direction is undefined (N).
pub const EPS_THRUST: f64 = 1e-6;
/// Guard on `‖e₃ₓ × e₁d‖` below which the heading is undefined.
pub const EPS_HEADING: f64 = 1e-6;
/// Finite-difference step for `ω_x`, `ω̇_x` (s).
pub const DEFAULT_FD_STEP: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttitudeGains {
    pub k_r: f64,
    pub k_omega: f64,
    pub eta: f64,
}

impl AttitudeGains {
    pub const fn new(k_r: f64, k_omega: f64, eta: f64) -> Self {
        AttitudeGains { k_r, k_omega, eta }
    }

    /// Hover-tuning set used for the attitude step and centimetre-step runs.
    pub const TUNED: AttitudeGains = AttitudeGains::new(5625.0, 150.0, 0.8);
    /// Set used for the aggressive recovery manoeuvre.
    pub const AGGRESSIVE: AttitudeGains = AttitudeGains::new(400.0, 40.0, 1.002);

    /// `k_R / k_ω²`, the lower bound on η.
    pub fn eta_bound(&self) -> f64 {
        self.k_r / (self.k_omega * self.k_omega)
    }

    pub fn validate(&self) -> Result<(), GainViolation> {
        positive("k_R", self.k_r)?;
        positive("k_omega", self.k_omega)?;
        positive("eta", self.eta)?;
        let bound = self.eta_bound();
        if self.eta <= bound {
            return Err(GainViolation::EtaBound { eta: self.eta, bound });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositionGains {
    pub k_x: f64,
    pub k_v: f64,
    pub a: f64,
    pub att: AttitudeGains,
}

impl PositionGains {
    pub const TUNED: PositionGains = PositionGains { k_x: 894.62, k_v: 59.82, a: 0.5071, att: AttitudeGains::TUNED };
    pub const AGGRESSIVE: PositionGains =
        PositionGains { k_x: 12.46, k_v: 7.06, a: 0.5081, att: AttitudeGains::AGGRESSIVE };

    pub fn validate(&self) -> Result<(), GainViolation> {
        positive("k_x", self.k_x)?;
        positive("k_v", self.k_v)?;
        positive("a", self.a)?;
        self.att.validate()
    }
}

fn positive(name: &'static str, value: f64) -> Result<(), GainViolation> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(GainViolation::NonPositive { name, value })
    }
}

pub fn surface_r(e_r: &Vec3, e_omega: &Vec3, g: &AttitudeGains) -> Vec3 {
    g.k_r * e_r + g.k_omega * e_omega
}

pub fn surface_x(e_x: &Vec3, e_v: &Vec3, g: &PositionGains) -> Vec3 {
    g.k_x * e_x + g.k_v * e_v
}

/// Attitude-loop quantities produced alongside the moment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttitudeTerms {
    pub error: AttitudeError,
    pub s_r: Vec3,
}

/// Body moment `ω×Jω − J((k_R/k_ω) E e_ω + a_d + η s_R)` tracking `(R_d, ω_d, ω̇_d)`.
pub fn attitude_control(
    state: &RigidBodyState,
    reference: &ReferenceSignal,
    g: &AttitudeGains,
    kind: ErrorSetKind,
    inertia: &Mat3,
) -> Result<(Vec3, AttitudeTerms)> {
    g.validate()?;
    attitude_moment(state, &reference.rd, &reference.wd, &reference.wd_dot, g, kind, inertia)
}

fn attitude_moment(
    state: &RigidBodyState,
    rd: &Rotation,
    wd: &Vec3,
    wd_dot: &Vec3,
    g: &AttitudeGains,
    kind: ErrorSetKind,
    inertia: &Mat3,
) -> Result<(Vec3, AttitudeTerms)> {
    let w = &state.w;
    let error = AttitudeError::new(&state.r, w, rd, wd, kind)?;
    let e_dot = transport_matrix(&state.r, rd, kind)? * error.e_omega;
    let a_d = a_d_of(&state.r, w, rd, wd, wd_dot);
    let s_r = surface_r(&error.e_r, &error.e_omega, g);
    let inner = (g.k_r / g.k_omega) * e_dot + a_d + g.eta * s_r;
    let u = w.cross(&(inertia * w)) - inertia * inner;
    Ok((u, AttitudeTerms { error, s_r }))
}

/// `U = m g E₃ − m (k_x/k_v) e_v − a s_x + m ẍ_d`.
pub fn thrust_vector(e_x: &Vec3, e_v: &Vec3, xdd_d: &Vec3, g: &PositionGains, m: f64, gravity: f64) -> Vec3 {
    m * gravity * E3 - m * (g.k_x / g.k_v) * e_v - g.a * surface_x(e_x, e_v, g) + m * xdd_d
}

/// Unit direction of [`thrust_vector`].
pub fn desired_thrust_axis(
    e_x: &Vec3,
    e_v: &Vec3,
    xdd_d: &Vec3,
    g: &PositionGains,
    m: f64,
    gravity: f64,
) -> Result<Vec3> {
    unit_thrust(&thrust_vector(e_x, e_v, xdd_d, g, m, gravity))
}

fn unit_thrust(u: &Vec3) -> Result<Vec3> {
    let norm = u.norm();
    if !(norm > EPS_THRUST) {
        return Err(Error::DegenerateThrust { norm });
    }
    Ok(u / norm)
}

/// Rotation whose third column is `e3x` and whose first column is the
/// projection of `e1d` onto the plane normal to `e3x`.
pub fn position_induced_attitude(e3x: &Vec3, e1d: &Vec3) -> Result<Rotation> {
    let c = e3x.cross(e1d);
    let cross = c.norm();
    if !(cross > EPS_HEADING) {
        return Err(Error::ParallelHeading { cross });
    }
    let e1h = c.cross(e3x);
    let e1h = e1h / e1h.norm();
    let e2 = e3x.cross(&e1h);
    let e2 = e2 / e2.norm();
    Ok(Rotation::from_matrix_unchecked(Mat3::from_columns(&[e1h, e2, *e3x])))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionInducedAttitude {
    pub r_x: Rotation,
    pub omega_x: Vec3,
    pub omega_x_dot: Vec3,
}

/// Predicts `(e_x, e_v)` over `tau` with RK4 substeps no longer than `h`.
///
/// The translational dynamics are integrated with the thrust the position law
/// would command, `(Uᵀ R e₃) R e₃`, while the attitude turns at the current body rate.
#[allow(clippy::too_many_arguments)]
fn predict_errors(
    state: &RigidBodyState,
    e_x: &Vec3,
    e_v: &Vec3,
    reference: &dyn Trajectory,
    t: f64,
    tau: f64,
    h: f64,
    g: &PositionGains,
    m: f64,
    gravity: f64,
) -> (Vec3, Vec3) {
    let f = |s: f64, ex: &Vec3, ev: &Vec3| {
        let ad = reference.sample(t + s).ad;
        let b3 = (state.r * exp_so3(&(state.w * s))).thrust_axis();
        let u = thrust_vector(ex, ev, &ad, g, m, gravity);
        (*ev, u.dot(&b3) / m * b3 - gravity * E3 - ad)
    };
    let n = (tau.abs() / h).ceil().max(1.0) as usize;
    let dt = tau / n as f64;
    let (mut x, mut v) = (*e_x, *e_v);
    for i in 0..n {
        let s = i as f64 * dt;
        let (k1x, k1v) = f(s, &x, &v);
        let (k2x, k2v) = f(s + 0.5 * dt, &(x + 0.5 * dt * k1x), &(v + 0.5 * dt * k1v));
        let (k3x, k3v) = f(s + 0.5 * dt, &(x + 0.5 * dt * k2x), &(v + 0.5 * dt * k2v));
        let (k4x, k4v) = f(s + dt, &(x + dt * k3x), &(v + dt * k3v));
        x += dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    }
    (x, v)
}

/// Position errors `(x − x_d, v − v_d)`.
pub fn position_errors(state: &RigidBodyState, reference: &ReferenceSignal) -> (Vec3, Vec3) {
    (state.x - reference.xd, state.v - reference.vd)
}

fn fd_rate(r_minus: &Rotation, r_mid: &Rotation, r_plus: &Rotation, h: f64) -> Vec3 {
    vee_antisym(&(r_mid.matrix().transpose() * (r_plus.matrix() - r_minus.matrix()))) / (2.0 * h)
}

/// `R_x` at `t` together with `ω_x`, `ω̇_x` from central differences of step `h`.
pub fn pia_with_derivatives(
    state: &RigidBodyState,
    reference: &dyn Trajectory,
    t: f64,
    g: &PositionGains,
    m: f64,
    gravity: f64,
    h: f64,
) -> Result<PositionInducedAttitude> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("finite-difference step must be positive (got {h})")));
    }
    let now = reference.sample(t);
    let (e_x, e_v) = position_errors(state, &now);
    let attitude_at = |k: i32| -> Result<Rotation> {
        let tau = k as f64 * h;
        let r = if k == 0 { now } else { reference.sample(t + tau) };
        let (ex, ev) =
            if k == 0 { (e_x, e_v) } else { predict_errors(state, &e_x, &e_v, reference, t, tau, h, g, m, gravity) };
        let e3x = desired_thrust_axis(&ex, &ev, &r.ad, g, m, gravity)?;
        position_induced_attitude(&e3x, &r.e1d)
    };
    let r = [attitude_at(-2)?, attitude_at(-1)?, attitude_at(0)?, attitude_at(1)?, attitude_at(2)?];
    let w_minus = fd_rate(&r[0], &r[1], &r[2], h);
    let w_mid = fd_rate(&r[1], &r[2], &r[3], h);
    let w_plus = fd_rate(&r[2], &r[3], &r[4], h);
    Ok(PositionInducedAttitude { r_x: r[2], omega_x: w_mid, omega_x_dot: (w_plus - w_minus) / (2.0 * h) })
}

/// Everything a controller computed on the way to its wrench.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlTerms {
    pub attitude: AttitudeError,
    pub s_r: Vec3,
    pub e_x: Vec3,
    pub e_v: Vec3,
    pub s_x: Vec3,
    /// Attitude actually tracked: `R_d` in attitude mode, `R_x` in position mode.
    pub target: Rotation,
    pub target_rate: Vec3,
    pub reference: ReferenceSignal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlCommand {
    pub wrench: Wrench,
    pub terms: ControlTerms,
}

/// Thrust `Uᵀ R e₃` and moment tracking `R_x` for the position loop.
pub fn position_control(
    state: &RigidBodyState,
    reference: &dyn Trajectory,
    t: f64,
    g: &PositionGains,
    kind: ErrorSetKind,
    p: &QuadParams,
    h: f64,
) -> Result<ControlCommand> {
    g.validate()?;
    position_command(state, reference, t, g, kind, p, h)
}

fn position_command(
    state: &RigidBodyState,
    reference: &dyn Trajectory,
    t: f64,
    g: &PositionGains,
    kind: ErrorSetKind,
    p: &QuadParams,
    h: f64,
) -> Result<ControlCommand> {
    let sig = reference.sample(t);
    let (e_x, e_v) = position_errors(state, &sig);
    let u_vec = thrust_vector(&e_x, &e_v, &sig.ad, g, p.mass, p.gravity);
    let pia = pia_with_derivatives(state, reference, t, g, p.mass, p.gravity, h)?;
    let thrust = u_vec.dot(&state.r.thrust_axis());
    let (moment, att) = attitude_moment(state, &pia.r_x, &pia.omega_x, &pia.omega_x_dot, &g.att, kind, &p.inertia)?;
    Ok(ControlCommand {
        wrench: Wrench { thrust, moment },
        terms: ControlTerms {
            attitude: att.error,
            s_r: att.s_r,
            e_x,
            e_v,
            s_x: surface_x(&e_x, &e_v, g),
            target: pia.r_x,
            target_rate: pia.omega_x,
            reference: sig,
        },
    })
}

/// A feedback law mapping (time, state, reference) to a body wrench.
pub trait Controller: Send + Sync {
    fn command(&self, t: f64, state: &RigidBodyState, reference: &dyn Trajectory) -> Result<ControlCommand>;
}

/// Attitude-mode controller with a constant collective thrust.
#[derive(Debug, Clone, PartialEq)]
pub struct AttitudeController {
    gains: AttitudeGains,
    kind: ErrorSetKind,
    inertia: Mat3,
    thrust: f64,
}

impl AttitudeController {
    pub fn new(gains: AttitudeGains, kind: ErrorSetKind, params: &QuadParams) -> Result<Self> {
        gains.validate()?;
        Ok(AttitudeController { gains, kind, inertia: params.inertia, thrust: params.hover_thrust() })
    }

    pub fn with_thrust(mut self, thrust: f64) -> Self {
        self.thrust = thrust;
        self
    }

    pub fn gains(&self) -> &AttitudeGains {
        &self.gains
    }
}

impl Controller for AttitudeController {
    fn command(&self, t: f64, state: &RigidBodyState, reference: &dyn Trajectory) -> Result<ControlCommand> {
        let sig = reference.sample(t);
        let (moment, att) =
            attitude_moment(state, &sig.rd, &sig.wd, &sig.wd_dot, &self.gains, self.kind, &self.inertia)?;
        let z = Vec3::zeros();
        Ok(ControlCommand {
            wrench: Wrench { thrust: self.thrust, moment },
            terms: ControlTerms {
                attitude: att.error,
                s_r: att.s_r,
                e_x: z,
                e_v: z,
                s_x: z,
                target: sig.rd,
                target_rate: sig.wd,
                reference: sig,
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositionController {
    gains: PositionGains,
    kind: ErrorSetKind,
    params: QuadParams,
    fd_step: f64,
}

impl PositionController {
    pub fn new(gains: PositionGains, kind: ErrorSetKind, params: &QuadParams) -> Result<Self> {
        gains.validate()?;
        Ok(PositionController { gains, kind, params: params.clone(), fd_step: DEFAULT_FD_STEP })
    }

    pub fn with_fd_step(mut self, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidParameter(format!("finite-difference step must be positive (got {h})")));
        }
        self.fd_step = h;
        Ok(self)
    }

    pub fn gains(&self) -> &PositionGains {
        &self.gains
    }
}

impl Controller for PositionController {
    fn command(&self, t: f64, state: &RigidBodyState, reference: &dyn Trajectory) -> Result<ControlCommand> {
        position_command(state, reference, t, &self.gains, self.kind, &self.params, self.fd_step)
    }
}

/// Diagonal PD gains for the benchmark slot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdGains {
    pub k_x: f64,
    pub k_v: f64,
    pub k_r: [f64; 3],
    pub k_omega: [f64; 3],
}

impl Default for PdGains {
    fn default() -> Self {
        PdGains { k_x: 375.61, k_v: 38.71, k_r: [65.16, 70.56, 98.28], k_omega: [2.1720, 2.3520, 3.2760] }
    }
}

/// Plain PD placeholder for the benchmark slot: `u = −K_R e_R − K_ω e_ω + ω×Jω`,
/// thrust along `−k_x e_x − k_v e_v + m g E₃ + m ẍ_d` in position mode.
#[derive(Debug, Clone, PartialEq)]
pub struct PdController {
    gains: PdGains,
    mode: FlightMode,
    kind: ErrorSetKind,
    params: QuadParams,
}

impl PdController {
    pub fn new(gains: PdGains, mode: FlightMode, kind: ErrorSetKind, params: &QuadParams) -> Result<Self> {
        for (name, v) in [("k_x", gains.k_x), ("k_v", gains.k_v)]
            .into_iter()
            .chain(gains.k_r.iter().map(|&v| ("k_R", v)))
            .chain(gains.k_omega.iter().map(|&v| ("k_omega", v)))
        {
            positive(name, v)?;
        }
        Ok(PdController { gains, mode, kind, params: params.clone() })
    }
}

impl Controller for PdController {
    fn command(&self, t: f64, state: &RigidBodyState, reference: &dyn Trajectory) -> Result<ControlCommand> {
        let sig = reference.sample(t);
        let p = &self.params;
        let (e_x, e_v, thrust, target) = match self.mode {
            FlightMode::Attitude => (Vec3::zeros(), Vec3::zeros(), p.hover_thrust(), sig.rd),
            FlightMode::Position => {
                let (e_x, e_v) = position_errors(state, &sig);
                let a = -self.gains.k_x * e_x - self.gains.k_v * e_v + p.mass * p.gravity * E3 + p.mass * sig.ad;
                let rc = position_induced_attitude(&unit_thrust(&a)?, &sig.e1d)?;
                (e_x, e_v, a.dot(&state.r.thrust_axis()), rc)
            }
        };
        let target_rate = if self.mode == FlightMode::Attitude { sig.wd } else { Vec3::zeros() };
        let error = AttitudeError::new(&state.r, &state.w, &target, &target_rate, self.kind)?;
        let k_r = Vec3::from(self.gains.k_r);
        let k_w = Vec3::from(self.gains.k_omega);
        let w = &state.w;
        let moment = -k_r.component_mul(&error.e_r) - k_w.component_mul(&error.e_omega) + w.cross(&(p.inertia * w));
        Ok(ControlCommand {
            wrench: Wrench { thrust, moment },
            terms: ControlTerms {
                attitude: error,
                s_r: k_r.component_mul(&error.e_r) + k_w.component_mul(&error.e_omega),
                e_x,
                e_v,
                s_x: self.gains.k_x * e_x + self.gains.k_v * e_v,
                target,
                target_rate,
                reference: sig,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::{AttitudeHold, PositionHold};
    use crate::so3::{hat, E1, E2};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn params() -> QuadParams {
        QuadParams::default()
    }

    #[test]
    fn surface_cases() {
        let g = AttitudeGains::TUNED;
        assert_eq!(surface_r(&Vec3::zeros(), &Vec3::zeros(), &g), Vec3::zeros());
        assert_eq!(surface_r(&E1, &Vec3::zeros(), &g), Vec3::new(5625.0, 0.0, 0.0));
        let (er, ew) = (Vec3::new(0.1, -0.2, 0.3), Vec3::new(-1.0, 0.5, 2.0));
        let s = surface_r(&er, &ew, &g);
        for i in 0..3 {
            assert!((s[i] - (5625.0 * er[i] + 150.0 * ew[i])).abs() < 1e-9);
        }
    }

    #[test]
    fn gain_validation() {
        assert!(AttitudeGains::TUNED.validate().is_ok());
        assert!(AttitudeGains::AGGRESSIVE.validate().is_ok());
        assert!(matches!(AttitudeGains::new(1.0, 1.0, 1.0).validate(), Err(GainViolation::EtaBound { .. })));
        assert!(matches!(AttitudeGains::new(-1.0, 1.0, 5.0).validate(), Err(GainViolation::NonPositive { .. })));
        assert!(AttitudeController::new(AttitudeGains::new(1.0, 1.0, 1.0), ErrorSetKind::SetOne, &params()).is_err());
        assert!(PositionGains::TUNED.validate().is_ok());
    }

    #[test]
    fn zero_error_gives_zero_moment() {
        let ctl = AttitudeController::new(AttitudeGains::TUNED, ErrorSetKind::SetOne, &params()).unwrap();
        let cmd = ctl.command(0.0, &RigidBodyState::default(), &AttitudeHold { rd: Rotation::identity() }).unwrap();
        assert_eq!(cmd.wrench.moment, Vec3::zeros());
    }

    #[test]
    fn hover_spin_term_by_term() {
        let p = params();
        let w = E3;
        let state = RigidBodyState { w, ..Default::default() };
        let sig = ReferenceSignal { wd: w, ..Default::default() };
        let (u, _) = attitude_control(&state, &sig, &AttitudeGains::TUNED, ErrorSetKind::SetOne, &p.inertia).unwrap();
        let a_d = hat(&w).matrix() * w;
        let expected = w.cross(&(p.inertia * w)) - p.inertia * a_d;
        assert!((u - expected).norm() < 1e-15);
    }

    #[test]
    fn thrust_axis_cases() {
        let g = PositionGains::TUNED;
        let (m, grav) = (1.225, 9.81);
        let z = Vec3::zeros();
        assert_eq!(desired_thrust_axis(&z, &z, &z, &g, m, grav).unwrap(), E3);
        let d = desired_thrust_axis(&z, &z, &(grav * E1), &g, m, grav).unwrap();
        assert!((d - (E1 + E3) * FRAC_1_SQRT_2).norm() < 1e-15);
        assert!(matches!(desired_thrust_axis(&z, &z, &(-grav * E3), &g, m, grav), Err(Error::DegenerateThrust { .. })));
    }

    #[test]
    fn induced_attitude_cases() {
        assert_eq!(*position_induced_attitude(&E3, &E1).unwrap().matrix(), Mat3::identity());
        let r = position_induced_attitude(&E3, &((E1 + E3) * FRAC_1_SQRT_2)).unwrap();
        assert!((r.matrix() - Mat3::identity()).amax() < 1e-15);
        assert!(matches!(position_induced_attitude(&E3, &E3), Err(Error::ParallelHeading { .. })));
        let e3x = Vec3::new(0.3, -0.4, 0.866).normalize();
        let r = position_induced_attitude(&e3x, &E2).unwrap();
        assert!(r.orthonormality_residual() < 1e-14);
        assert!((r.thrust_axis() - e3x).norm() < 1e-15);
    }

    #[test]
    fn hover_position_control() {
        let p = params();
        let hold = PositionHold { xd: Vec3::zeros(), e1d: E1 };
        let cmd = position_control(
            &RigidBodyState::default(),
            &hold,
            0.0,
            &PositionGains::TUNED,
            ErrorSetKind::SetOne,
            &p,
            DEFAULT_FD_STEP,
        )
        .unwrap();
        assert!((cmd.wrench.thrust - 12.01725).abs() < 1e-9);
        assert_eq!(cmd.wrench.moment, Vec3::zeros());
        let pia = pia_with_derivatives(
            &RigidBodyState::default(),
            &hold,
            0.0,
            &PositionGains::TUNED,
            p.mass,
            p.gravity,
            1e-4,
        )
        .unwrap();
        assert_eq!(pia.omega_x, Vec3::zeros());
        assert_eq!(pia.omega_x_dot, Vec3::zeros());
    }

    #[test]
    fn sideways_body_gets_no_thrust() {
        let p = params();
        let state = RigidBodyState { r: Rotation::about_axis(&E1, std::f64::consts::FRAC_PI_2), ..Default::default() };
        let hold = PositionHold { xd: Vec3::zeros(), e1d: E1 };
        let cmd = position_control(&state, &hold, 0.0, &PositionGains::TUNED, ErrorSetKind::SetOne, &p, 1e-4).unwrap();
        assert!(cmd.wrench.thrust.abs() < 1e-12);
    }

    #[test]
    fn pd_placeholder_holds_hover() {
        let p = params();
        let ctl = PdController::new(PdGains::default(), FlightMode::Position, ErrorSetKind::SetOne, &p).unwrap();
        let cmd = ctl.command(0.0, &RigidBodyState::default(), &PositionHold { xd: Vec3::zeros(), e1d: E1 }).unwrap();
        assert!((cmd.wrench.thrust - p.mass * p.gravity).abs() < 1e-12);
        assert_eq!(cmd.wrench.moment, Vec3::zeros());
    }
}
