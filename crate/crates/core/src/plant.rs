//! Quadrotor rigid-body model, actuator mixing and wind disturbances.

use std::path::Path;

use nalgebra::{Matrix3, Matrix4, Vector4};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::so3::{exp_so3, hat, project_so3, Mat3, Rotation, Vec3, E3};

/// Orthonormality residual above which `step` re-projects the attitude.
pub const REPROJECT_TOL: f64 = 1e-10;

/// Air density used by the drag model (sea level, kg/m³).
pub const AIR_DENSITY: f64 = 1.225;

/// Physical parameters of the airframe.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadParams {
    pub inertia: Mat3,
    pub mass: f64,
    /// Distance from the centre of mass to each motor axis (m).
    pub arm: f64,
    /// Reaction-torque to thrust ratio (m).
    pub torque_coeff: f64,
    pub gravity: f64,
    pub f_min: f64,
    pub f_max: f64,
}

impl Default for QuadParams {
    fn default() -> Self {
        QuadParams {
            inertia: Matrix3::from_diagonal(&Vec3::new(0.0181, 0.0196, 0.0273)),
            mass: 1.225,
            arm: 0.23,
            torque_coeff: 0.0121,
            gravity: 9.81,
            f_min: 0.0,
            f_max: 6.9939,
        }
    }
}

impl QuadParams {
    pub fn validate(&self) -> Result<()> {
        let j = &self.inertia;
        if (j - j.transpose()).amax() > 1e-12 * j.amax() {
            return Err(Error::InvalidParameter("inertia must be symmetric".into()));
        }
        let eig = j.symmetric_eigenvalues();
        if eig.min() <= 0.0 || !eig.iter().all(|e| e.is_finite()) {
            return Err(Error::InvalidParameter("inertia must be positive definite".into()));
        }
        for (name, v) in [("mass", self.mass), ("arm", self.arm), ("torque_coeff", self.torque_coeff)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive (got {v})")));
            }
        }
        if !(self.f_min < self.f_max) {
            return Err(Error::InvalidParameter(format!(
                "motor limits must satisfy f_min < f_max (got [{}, {}])",
                self.f_min, self.f_max
            )));
        }
        if !self.gravity.is_finite() {
            return Err(Error::InvalidParameter("gravity must be finite".into()));
        }
        Ok(())
    }

    pub fn hover_thrust(&self) -> f64 {
        self.mass * self.gravity
    }

    /// Maps motor thrusts to (f, u₁, u₂, u₃).
    pub fn mixer_matrix(&self) -> Matrix4<f64> {
        let (d, b) = (self.arm, self.torque_coeff);
        Matrix4::new(
            1.0, 1.0, 1.0, 1.0, //
            0.0, d, 0.0, -d, //
            -d, 0.0, d, 0.0, //
            -b, b, -b, b,
        )
    }

    /// Total thrust and body moment produced by the motor thrusts `f`.
    pub fn forward(&self, f: &[f64; 4]) -> Wrench {
        let w = self.mixer_matrix() * Vector4::from_column_slice(f);
        Wrench { thrust: w[0], moment: Vec3::new(w[1], w[2], w[3]) }
    }

    /// Motor thrusts that realise `wrench` exactly (closed-form mixer inverse).
    pub fn allocate(&self, wrench: &Wrench) -> [f64; 4] {
        let (d, b) = (self.arm, self.torque_coeff);
        let q = wrench.thrust / 4.0;
        let u = &wrench.moment;
        let yaw = u.z / (4.0 * b);
        [q - u.y / (2.0 * d) - yaw, q + u.x / (2.0 * d) + yaw, q + u.y / (2.0 * d) - yaw, q - u.x / (2.0 * d) + yaw]
    }

    /// Clamps each motor into `[f_min, f_max]`; flags mark clamped motors.
    pub fn saturate(&self, f: &[f64; 4]) -> ([f64; 4], [bool; 4]) {
        let mut out = *f;
        let mut flags = [false; 4];
        for i in 0..4 {
            if f[i] < self.f_min {
                out[i] = self.f_min;
                flags[i] = true;
            } else if f[i] > self.f_max {
                out[i] = self.f_max;
                flags[i] = true;
            }
        }
        (out, flags)
    }

    /// Allocates `commanded`, optionally saturates, and returns what the airframe produces.
    pub fn actuate(&self, commanded: &Wrench, saturation: bool) -> ControlOutput {
        let motors = self.allocate(commanded);
        if !saturation {
            return ControlOutput { wrench: *commanded, motors, saturated: [false; 4] };
        }
        let (clamped, saturated) = self.saturate(&motors);
        let wrench = if saturated.iter().any(|&s| s) { self.forward(&clamped) } else { *commanded };
        ControlOutput { wrench, motors: clamped, saturated }
    }
}

/// Total thrust (N) along the body third axis and body moment (N·m).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Wrench {
    pub thrust: f64,
    pub moment: Vec3,
}

/// What the actuators actually deliver during one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlOutput {
    pub wrench: Wrench,
    pub motors: [f64; 4],
    pub saturated: [bool; 4],
}

impl ControlOutput {
    pub fn any_saturated(&self) -> bool {
        self.saturated.iter().any(|&s| s)
    }

    pub fn saturation_mask(&self) -> u8 {
        self.saturated.iter().enumerate().fold(0, |m, (i, &s)| m | ((s as u8) << i))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidBodyState {
    pub x: Vec3,
    pub v: Vec3,
    pub r: Rotation,
    /// Body-frame angular velocity.
    pub w: Vec3,
}

impl Default for RigidBodyState {
    fn default() -> Self {
        RigidBodyState { x: Vec3::zeros(), v: Vec3::zeros(), r: Rotation::identity(), w: Vec3::zeros() }
    }
}

impl RigidBodyState {
    pub fn at_rest(x: Vec3) -> Self {
        RigidBodyState { x, ..Default::default() }
    }
}

/// Force (inertial frame) and moment (body frame) disturbances.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Disturbance {
    pub force: Vec3,
    pub moment: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDerivative {
    pub x_dot: Vec3,
    pub v_dot: Vec3,
    pub r_dot: Mat3,
    pub w_dot: Vec3,
}

/// Right-hand sides of the translational and rotational equations of motion.
pub fn derivative(state: &RigidBodyState, wrench: &Wrench, dist: &Disturbance, p: &QuadParams) -> StateDerivative {
    let j = &p.inertia;
    let jw = j * state.w;
    let v_dot = -p.gravity * E3 + (state.r.thrust_axis() * wrench.thrust + dist.force) / p.mass;
    let torque = wrench.moment - state.w.cross(&jw) + dist.moment;
    let w_dot = j.lu().solve(&torque).unwrap_or_else(Vec3::zeros);
    StateDerivative { x_dot: state.v, v_dot, r_dot: state.r.matrix() * hat(&state.w).into_matrix(), w_dot }
}

/// Anything that produces a disturbance given time and state.
pub trait DisturbanceSource: Send + Sync {
    fn disturbance(&self, t: f64, state: &RigidBodyState) -> Disturbance;
}

/// No disturbance at all.
#[derive(Debug, Clone, Copy, Default)]
pub struct Calm;

impl DisturbanceSource for Calm {
    fn disturbance(&self, _t: f64, _state: &RigidBodyState) -> Disturbance {
        Disturbance::default()
    }
}

/// One fixed step of length `dt` with the wrench held constant.
///
/// Position, velocity and angular velocity use classical RK4. The attitude is
/// advanced on the group, `R ← R·exp(ω̄ dt)` with `ω̄` the RK4-weighted mean of
/// the stage angular velocities, and re-projected only if it drifts.
pub fn step(
    state: &RigidBodyState,
    wrench: &Wrench,
    source: &dyn DisturbanceSource,
    t: f64,
    dt: f64,
    p: &QuadParams,
) -> RigidBodyState {
    let eval = |s: &RigidBodyState, tau: f64| derivative(s, wrench, &source.disturbance(tau, s), p);
    let stage = |k: &StateDerivative, w_prev: &Vec3, h: f64| RigidBodyState {
        x: state.x + k.x_dot * h,
        v: state.v + k.v_dot * h,
        r: state.r * exp_so3(&(w_prev * h)),
        w: state.w + k.w_dot * h,
    };

    let k1 = eval(state, t);
    let s2 = stage(&k1, &state.w, 0.5 * dt);
    let k2 = eval(&s2, t + 0.5 * dt);
    let s3 = stage(&k2, &s2.w, 0.5 * dt);
    let k3 = eval(&s3, t + 0.5 * dt);
    let s4 = stage(&k3, &s3.w, dt);
    let k4 = eval(&s4, t + dt);

    let sixth = dt / 6.0;
    let w_avg = (state.w + 2.0 * s2.w + 2.0 * s3.w + s4.w) / 6.0;
    let mut r = state.r * exp_so3(&(w_avg * dt));
    if r.orthonormality_residual() > REPROJECT_TOL {
        if let Ok(p) = project_so3(r.matrix()) {
            r = p;
        }
    }
    RigidBodyState {
        x: state.x + sixth * (k1.x_dot + 2.0 * k2.x_dot + 2.0 * k3.x_dot + k4.x_dot),
        v: state.v + sixth * (k1.v_dot + 2.0 * k2.v_dot + 2.0 * k3.v_dot + k4.v_dot),
        r,
        w: state.w + sixth * (k1.w_dot + 2.0 * k2.w_dot + 2.0 * k3.w_dot + k4.w_dot),
    }
}

/// Wind velocity as a function of time.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum WindProfile {
    #[default]
    Calm,
    Constant(Vec3),
    /// Piecewise-linear table, strictly increasing in time; endpoints are held.
    Table(Vec<(f64, Vec3)>),
    /// One-minus-cosine gust on top of a mean wind.
    Gust {
        mean: Vec3,
        amplitude: Vec3,
        start: f64,
        duration: f64,
    },
}

#[derive(Debug, Deserialize)]
struct WindRow {
    t: f64,
    wx: f64,
    wy: f64,
    wz: f64,
}

impl WindProfile {
    pub fn table(points: Vec<(f64, Vec3)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParameter("wind table is empty".into()));
        }
        if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::InvalidParameter("wind table times must be strictly increasing".into()));
        }
        Ok(WindProfile::Table(points))
    }

    /// Reads a `t,wx,wy,wz` CSV with a header row; `#` lines are comments.
    pub fn from_csv_reader<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(reader);
        let mut points = Vec::new();
        for row in rdr.deserialize::<WindRow>() {
            let row = row?;
            points.push((row.t, Vec3::new(row.wx, row.wy, row.wz)));
        }
        Self::table(points)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(file)
    }

    pub fn velocity(&self, t: f64) -> Vec3 {
        match self {
            WindProfile::Calm => Vec3::zeros(),
            WindProfile::Constant(w) => *w,
            WindProfile::Table(points) => {
                let first = points[0];
                let last = points[points.len() - 1];
                if t <= first.0 {
                    return first.1;
                }
                if t >= last.0 {
                    return last.1;
                }
                let i = points.partition_point(|p| p.0 <= t);
                let (t0, w0) = points[i - 1];
                let (t1, w1) = points[i];
                w0 + (w1 - w0) * ((t - t0) / (t1 - t0))
            }
            WindProfile::Gust { mean, amplitude, start, duration } => {
                if *duration <= 0.0 || t < *start || t > start + duration {
                    return *mean;
                }
                let phase = (t - start) / duration;
                mean + amplitude * (0.5 * (1.0 - (std::f64::consts::TAU * phase).cos()))
            }
        }
    }
}

/// Quadratic drag from the relative air velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct WindModel {
    pub profile: WindProfile,
    /// Diagonal of the drag-coefficient matrix.
    pub drag_coeff: Vec3,
    /// Diagonal of the reference-area matrix (m²).
    pub ref_area: Vec3,
    pub rho: f64,
    /// Lever arm along body e₃ at which the drag force acts (m).
    pub torque_arm: f64,
}

impl WindModel {
    pub fn new(profile: WindProfile) -> Self {
        WindModel {
            profile,
            drag_coeff: Vec3::new(0.2, 0.22, 0.5),
            ref_area: Vec3::new(0.0907, 0.0907, 0.4004),
            rho: AIR_DENSITY,
            torque_arm: 0.04,
        }
    }
}

pub fn wind_disturbance(state: &RigidBodyState, wind: &WindModel, t: f64) -> Disturbance {
    let v_rel = wind.profile.velocity(t) - state.v;
    let speed = v_rel.norm();
    let force = (0.5 * wind.rho * speed) * wind.drag_coeff.component_mul(&wind.ref_area).component_mul(&v_rel);
    let body_force = state.r.matrix().transpose() * force;
    let moment = (wind.torque_arm * E3).cross(&body_force);
    Disturbance { force, moment }
}

impl DisturbanceSource for WindModel {
    fn disturbance(&self, t: f64, state: &RigidBodyState) -> Disturbance {
        wind_disturbance(state, self, t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn allocation_examples() {
        let p = QuadParams::default();
        let f = p.allocate(&Wrench { thrust: 4.0, moment: Vec3::zeros() });
        for fi in f {
            assert!((fi - 1.0).abs() < 1e-15);
        }
        let hover = p.allocate(&Wrench { thrust: p.hover_thrust(), moment: Vec3::zeros() });
        for fi in hover {
            assert!((fi - 3.0043125).abs() < 1e-12);
        }
        let w = p.forward(&[0.0, 1.0, 0.0, 0.0]);
        assert!((w.thrust - 1.0).abs() < 1e-15);
        assert!((w.moment - Vec3::new(0.23, 0.0, 0.0121)).norm() < 1e-15);
    }

    #[test]
    fn allocation_matches_matrix_inverse() {
        let p = QuadParams::default();
        let inv = p.mixer_matrix().try_inverse().unwrap();
        let wrench = Wrench { thrust: 11.0, moment: Vec3::new(0.3, -0.2, 0.05) };
        let oracle = inv * Vector4::new(11.0, 0.3, -0.2, 0.05);
        let f = p.allocate(&wrench);
        for i in 0..4 {
            assert!((f[i] - oracle[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn saturation_examples() {
        let p = QuadParams::default();
        assert_eq!(p.saturate(&[1.0; 4]), ([1.0; 4], [false; 4]));
        let (f, flags) = p.saturate(&[8.0, -1.0, 3.0, 3.0]);
        assert_eq!(f, [6.9939, 0.0, 3.0, 3.0]);
        assert_eq!(flags, [true, true, false, false]);
        let (f, flags) = p.saturate(&[6.9939, 0.0, 1.0, 2.0]);
        assert_eq!(f, [6.9939, 0.0, 1.0, 2.0]);
        assert_eq!(flags, [false; 4]);
    }

    #[test]
    fn actuate_reports_achieved_wrench() {
        let p = QuadParams::default();
        let cmd = Wrench { thrust: 12.0, moment: Vec3::new(0.0, 2.0, 0.0) };
        let out = p.actuate(&cmd, true);
        assert!(out.any_saturated());
        let w = p.forward(&out.motors);
        assert_eq!(w, out.wrench);
        assert!(out.wrench.moment.y < 2.0);
        let out = p.actuate(&cmd, false);
        assert_eq!(out.wrench, cmd);
    }

    #[test]
    fn wind_examples() {
        let state = RigidBodyState::default();
        let calm = WindModel::new(WindProfile::Calm);
        assert_eq!(wind_disturbance(&state, &calm, 0.0), Disturbance::default());

        let wind = WindModel::new(WindProfile::Constant(Vec3::new(10.0, 0.0, 0.0)));
        let d = wind_disturbance(&state, &wind, 0.0);
        let expected = 0.5 * 1.225 * 0.2 * 0.0907 * 100.0;
        assert!((d.force - Vec3::new(expected, 0.0, 0.0)).norm() < 1e-14);
        assert!((expected - 1.111).abs() < 1e-3);
        // 0.04 e3 × (δ E1) = 0.04 δ E2
        assert!((d.moment - Vec3::new(0.0, 0.04 * expected, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn wind_table_interpolates_and_holds() {
        let prof = WindProfile::table(vec![(0.0, Vec3::zeros()), (2.0, Vec3::new(4.0, 0.0, -2.0))]).unwrap();
        assert_eq!(prof.velocity(-1.0), Vec3::zeros());
        assert!((prof.velocity(1.0) - Vec3::new(2.0, 0.0, -1.0)).norm() < 1e-15);
        assert_eq!(prof.velocity(5.0), Vec3::new(4.0, 0.0, -2.0));
        assert!(WindProfile::table(vec![(1.0, Vec3::zeros()), (1.0, Vec3::zeros())]).is_err());
    }

    #[test]
    fn wind_csv_parses() {
        let text = "# gusty\nt,wx,wy,wz\n0,0,0,0\n1.5, 3, 0, 0\n";
        let prof = WindProfile::from_csv_reader(text.as_bytes()).unwrap();
        assert!((prof.velocity(0.75) - Vec3::new(1.5, 0.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn gust_profile_shape() {
        let g = WindProfile::Gust {
            mean: Vec3::new(1.0, 0.0, 0.0),
            amplitude: Vec3::new(2.0, 0.0, 0.0),
            start: 1.0,
            duration: 2.0,
        };
        assert_eq!(g.velocity(0.5), Vec3::new(1.0, 0.0, 0.0));
        assert!((g.velocity(2.0) - Vec3::new(3.0, 0.0, 0.0)).norm() < 1e-15);
        assert_eq!(g.velocity(3.5), Vec3::new(1.0, 0.0, 0.0));
    }

    #[test]
    fn derivative_at_hover_and_free_fall() {
        let p = QuadParams::default();
        let s = RigidBodyState::default();
        let hover = Wrench { thrust: p.hover_thrust(), moment: Vec3::zeros() };
        let d = derivative(&s, &hover, &Disturbance::default(), &p);
        assert!(d.v_dot.norm() < 1e-15 && d.w_dot.norm() == 0.0 && d.x_dot.norm() == 0.0);
        assert_eq!(d.r_dot, Mat3::zeros());
        let d = derivative(&s, &Wrench::default(), &Disturbance::default(), &p);
        assert_eq!(d.v_dot, Vec3::new(0.0, 0.0, -9.81));
    }

    #[test]
    fn derivative_matches_term_by_term() {
        let p = QuadParams::default();
        let s = RigidBodyState {
            x: Vec3::new(1.0, 2.0, 3.0),
            v: Vec3::new(-0.5, 0.2, 0.1),
            r: Rotation::about_axis(&Vec3::new(1.0, -2.0, 0.5), 0.7),
            w: Vec3::new(0.4, -1.2, 2.0),
        };
        let wr = Wrench { thrust: 9.0, moment: Vec3::new(0.01, -0.02, 0.005) };
        let dist = Disturbance { force: Vec3::new(0.3, 0.0, -0.1), moment: Vec3::new(0.0, 0.002, 0.0) };
        let d = derivative(&s, &wr, &dist, &p);
        let re3 = s.r.matrix() * Vec3::new(0.0, 0.0, 1.0);
        let v_dot = (-p.mass * p.gravity * Vec3::new(0.0, 0.0, 1.0) + re3 * 9.0 + dist.force) / p.mass;
        assert!((d.v_dot - v_dot).norm() < 1e-14);
        let jw = Vec3::new(0.0181 * 0.4, 0.0196 * -1.2, 0.0273 * 2.0);
        let rhs = wr.moment - s.w.cross(&jw) + dist.moment;
        let w_dot = Vec3::new(rhs.x / 0.0181, rhs.y / 0.0196, rhs.z / 0.0273);
        assert!((d.w_dot - w_dot).norm() < 1e-12);
        assert_eq!(d.x_dot, s.v);
    }

    #[test]
    fn hover_is_an_equilibrium_of_step() {
        let p = QuadParams::default();
        let s0 = RigidBodyState::at_rest(Vec3::new(0.0, 0.0, 5.0));
        let hover = Wrench { thrust: p.hover_thrust(), moment: Vec3::zeros() };
        let mut s = s0;
        for k in 0..1000 {
            s = step(&s, &hover, &Calm, k as f64 * 1e-3, 1e-3, &p);
        }
        assert!((s.x - s0.x).norm() < 1e-12);
        assert!(s.v.norm() < 1e-12);
        assert!((s.r.matrix() - s0.r.matrix()).norm() < 1e-12);
    }

    #[test]
    fn constant_spin_reaches_quarter_turn() {
        let p = QuadParams { inertia: Mat3::identity() * 0.02, ..Default::default() };
        let n = 1571;
        let dt = FRAC_PI_2 / n as f64;
        let mut s = RigidBodyState { w: E3, ..Default::default() };
        for k in 0..n {
            s = step(&s, &Wrench::default(), &Calm, k as f64 * dt, dt, &p);
        }
        let expected = Mat3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
        assert!((s.r.matrix() - expected).amax() < 1e-9);
    }
}
