//! Reference trajectories and flight scenarios.
//!
//! Position references are eighth-degree polynomials fitted to value and
//! derivatives 1–4 at the start and value and derivatives 1–3 at the end, which
//! pins all nine coefficients and makes every handoff C³.

use std::f64::consts::PI;

use nalgebra::{Matrix4, Vector4};

use crate::error::{Error, Result};
use crate::plant::RigidBodyState;
use crate::so3::{Rotation, Vec3, E1, E2, E3};

const FIT_RESIDUAL_TOL: f64 = 1e-6;

/// Everything a controller may ask of a reference at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceSignal {
    pub xd: Vec3,
    pub vd: Vec3,
    pub ad: Vec3,
    /// Desired direction of body e₁ (position mode).
    pub e1d: Vec3,
    pub rd: Rotation,
    pub wd: Vec3,
    pub wd_dot: Vec3,
}

impl Default for ReferenceSignal {
    fn default() -> Self {
        ReferenceSignal {
            xd: Vec3::zeros(),
            vd: Vec3::zeros(),
            ad: Vec3::zeros(),
            e1d: E1,
            rd: Rotation::identity(),
            wd: Vec3::zeros(),
            wd_dot: Vec3::zeros(),
        }
    }
}

/// A reference that can be sampled at any time.
pub trait Trajectory: Send + Sync {
    fn sample(&self, t: f64) -> ReferenceSignal;
}

impl<F> Trajectory for F
where
    F: Fn(f64) -> ReferenceSignal + Send + Sync,
{
    fn sample(&self, t: f64) -> ReferenceSignal {
        self(t)
    }
}

/// Scalar eighth-degree polynomial on `[t0, t1]`, stored in normalized time
/// `τ = (t − t0)/(t1 − t0)`.
///
/// Outside its interval the segment continues as the Taylor polynomial of its
/// boundary conditions (fourth order before `t0`, third order after `t1`).
#[derive(Debug, Clone, PartialEq)]
pub struct Sp8 {
    coeffs: [f64; 9],
    t0: f64,
    t1: f64,
    start: [f64; 5],
    end: [f64; 4],
}

fn falling(k: usize, n: usize) -> f64 {
    // k! / (k-n)!
    (0..n).fold(1.0, |acc, i| acc * (k - i) as f64)
}

fn taylor(derivs: &[f64], dt: f64) -> [f64; 5] {
    let mut out = [0.0; 5];
    for (n, o) in out.iter_mut().enumerate() {
        let mut term = 1.0;
        let mut acc = 0.0;
        for (j, d) in derivs.iter().enumerate().skip(n) {
            if j > n {
                term *= dt / (j - n) as f64;
            }
            acc += d * term;
        }
        *o = acc;
    }
    out
}

impl Sp8 {
    /// Fits `start = [p, p′, p″, p‴, p⁗](t0)` and `end = [p, p′, p″, p‴](t1)`.
    pub fn fit(start: [f64; 5], end: [f64; 4], t0: f64, t1: f64) -> Result<Self> {
        if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
            return Err(Error::InvalidParameter(format!("segment needs t1 > t0 (got [{t0}, {t1}])")));
        }
        let span = t1 - t0;
        let mut coeffs = [0.0; 9];
        let mut fact = 1.0;
        for k in 0..5 {
            if k > 0 {
                fact *= k as f64;
            }
            coeffs[k] = start[k] * span.powi(k as i32) / fact;
        }
        let mut a = Matrix4::zeros();
        let mut rhs = Vector4::zeros();
        for n in 0..4 {
            let mut known = 0.0;
            for (k, c) in coeffs.iter().enumerate().take(5).skip(n) {
                known += c * falling(k, n);
            }
            rhs[n] = end[n] * span.powi(n as i32) - known;
            for j in 0..4 {
                a[(n, j)] = falling(5 + j, n);
            }
        }
        let sol = a.lu().solve(&rhs).ok_or(Error::IllConditioned { residual: f64::INFINITY })?;
        let residual = (a * sol - rhs).amax() / (1.0 + rhs.amax());
        if !residual.is_finite() || residual > FIT_RESIDUAL_TOL {
            return Err(Error::IllConditioned { residual });
        }
        coeffs[5..9].copy_from_slice(sol.as_slice());
        Ok(Sp8 { coeffs, t0, t1, start, end })
    }

    /// Rest-to-rest move from `p0` to `p1`.
    pub fn rest_to_rest(p0: f64, p1: f64, t0: f64, t1: f64) -> Result<Self> {
        Self::fit([p0, 0.0, 0.0, 0.0, 0.0], [p1, 0.0, 0.0, 0.0], t0, t1)
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.t0, self.t1)
    }

    pub fn coefficients(&self) -> &[f64; 9] {
        &self.coeffs
    }

    /// Value and derivatives 1–4 at `t`.
    pub fn eval(&self, t: f64) -> [f64; 5] {
        if t < self.t0 {
            return taylor(&self.start, t - self.t0);
        }
        if t > self.t1 {
            return taylor(&self.end, t - self.t1);
        }
        let span = self.t1 - self.t0;
        let tau = (t - self.t0) / span;
        let mut out = [0.0; 5];
        for (n, o) in out.iter_mut().enumerate() {
            // Horner on the n-th derivative in τ.
            let mut acc = 0.0;
            for k in (n..9).rev() {
                acc = acc * tau + self.coeffs[k] * falling(k, n);
            }
            *o = acc / span.powi(n as i32);
        }
        out
    }
}

/// Three independent [`Sp8`] axes.
#[derive(Debug, Clone, PartialEq)]
pub struct Sp8Segment {
    axes: [Sp8; 3],
}

impl Sp8Segment {
    pub fn fit(start: [Vec3; 5], end: [Vec3; 4], t0: f64, t1: f64) -> Result<Self> {
        let axis = |i: usize| {
            Sp8::fit(
                [start[0][i], start[1][i], start[2][i], start[3][i], start[4][i]],
                [end[0][i], end[1][i], end[2][i], end[3][i]],
                t0,
                t1,
            )
        };
        Ok(Sp8Segment { axes: [axis(0)?, axis(1)?, axis(2)?] })
    }

    pub fn axis(&self, i: usize) -> &Sp8 {
        &self.axes[i]
    }

    /// Position and derivatives 1–4.
    pub fn eval(&self, t: f64) -> [Vec3; 5] {
        let e = [self.axes[0].eval(t), self.axes[1].eval(t), self.axes[2].eval(t)];
        std::array::from_fn(|n| Vec3::new(e[0][n], e[1][n], e[2][n]))
    }
}

/// Constant position command.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionHold {
    pub xd: Vec3,
    pub e1d: Vec3,
}

impl Trajectory for PositionHold {
    fn sample(&self, _t: f64) -> ReferenceSignal {
        ReferenceSignal { xd: self.xd, e1d: self.e1d, ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositionPolynomial {
    pub segment: Sp8Segment,
    pub e1d: Vec3,
}

impl Trajectory for PositionPolynomial {
    fn sample(&self, t: f64) -> ReferenceSignal {
        let [x, v, a, _, _] = self.segment.eval(t);
        ReferenceSignal { xd: x, vd: v, ad: a, e1d: self.e1d, ..Default::default() }
    }
}

/// Constant attitude command (ω_d = ω̇_d = 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttitudeHold {
    pub rd: Rotation,
}

impl Trajectory for AttitudeHold {
    fn sample(&self, _t: f64) -> ReferenceSignal {
        ReferenceSignal { rd: self.rd, ..Default::default() }
    }
}

/// Attitude reference that pitches about body e₂ following a scalar profile.
#[derive(Debug, Clone, PartialEq)]
pub struct PitchTrajectory {
    pub profile: Sp8,
}

impl Trajectory for PitchTrajectory {
    fn sample(&self, t: f64) -> ReferenceSignal {
        let [theta, rate, accel, _, _] = self.profile.eval(t);
        ReferenceSignal {
            rd: Rotation::about_axis(&E2, theta),
            wd: E2 * rate,
            wd_dot: E2 * accel,
            ..Default::default()
        }
    }
}

pub fn attitude_ref_from_pitch(profile: Sp8) -> PitchTrajectory {
    PitchTrajectory { profile }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlightMode {
    Attitude,
    Position,
}

impl std::fmt::Display for FlightMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FlightMode::Attitude => "attitude",
            FlightMode::Position => "position",
        })
    }
}

/// How a phase builds its reference when it becomes active.
#[derive(Debug, Clone, PartialEq)]
pub enum PhaseReference {
    PositionStep {
        target: Vec3,
        heading: Vec3,
    },
    /// Polynomial from the state at phase start to `target` with the given end velocity.
    PositionSp8 {
        target: Vec3,
        target_velocity: Vec3,
        heading: Vec3,
    },
    AttitudeStep {
        rotation: Rotation,
    },
    /// Rest-to-rest pitch from `from` to `to` radians over the phase.
    PitchSp8 {
        from: f64,
        to: f64,
    },
}

impl PhaseReference {
    pub fn mode(&self) -> FlightMode {
        match self {
            PhaseReference::PositionStep { .. } | PhaseReference::PositionSp8 { .. } => FlightMode::Position,
            PhaseReference::AttitudeStep { .. } | PhaseReference::PitchSp8 { .. } => FlightMode::Attitude,
        }
    }
}

/// Translational state a phase starts from: position and its first three derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Handoff {
    pub x: Vec3,
    pub v: Vec3,
    pub a: Vec3,
    pub jerk: Vec3,
}

impl Handoff {
    pub fn at_rest(x: Vec3) -> Self {
        Handoff { x, ..Default::default() }
    }

    /// Acceleration and jerk implied by a constant collective `thrust` at the current attitude and rate.
    pub fn from_state(state: &RigidBodyState, thrust: f64, mass: f64, gravity: f64) -> Self {
        let b3 = state.r.thrust_axis();
        Handoff {
            x: state.x,
            v: state.v,
            a: thrust / mass * b3 - gravity * E3,
            jerk: thrust / mass * (state.r * state.w.cross(&E3)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Phase {
    pub start: f64,
    pub end: f64,
    pub reference: PhaseReference,
}

impl Phase {
    pub fn mode(&self) -> FlightMode {
        self.reference.mode()
    }

    /// Builds this phase's trajectory from the state it starts in.
    pub fn instantiate(&self, start: &Handoff) -> Result<Box<dyn Trajectory>> {
        Ok(match &self.reference {
            PhaseReference::PositionStep { target, heading } => {
                Box::new(PositionHold { xd: *target, e1d: unit(heading)? })
            }
            PhaseReference::PositionSp8 { target, target_velocity, heading } => {
                let z = Vec3::zeros();
                let segment = Sp8Segment::fit(
                    [start.x, start.v, start.a, start.jerk, z],
                    [*target, *target_velocity, z, z],
                    self.start,
                    self.end,
                )?;
                Box::new(PositionPolynomial { segment, e1d: unit(heading)? })
            }
            PhaseReference::AttitudeStep { rotation } => Box::new(AttitudeHold { rd: *rotation }),
            PhaseReference::PitchSp8 { from, to } => {
                Box::new(attitude_ref_from_pitch(Sp8::rest_to_rest(*from, *to, self.start, self.end)?))
            }
        })
    }
}

fn unit(v: &Vec3) -> Result<Vec3> {
    let n = v.norm();
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::InvalidScenario("heading must be a non-zero vector".into()));
    }
    Ok(v / n)
}

/// Ordered, contiguous list of phases.
#[derive(Debug, Clone, PartialEq)]
pub struct FlightScenario {
    pub phases: Vec<Phase>,
}

impl FlightScenario {
    pub fn new(phases: Vec<Phase>) -> Result<Self> {
        let s = FlightScenario { phases };
        s.validate()?;
        Ok(s)
    }

    pub fn single(reference: PhaseReference, horizon: f64) -> Self {
        FlightScenario { phases: vec![Phase { start: 0.0, end: horizon, reference }] }
    }

    pub fn validate(&self) -> Result<()> {
        if self.phases.is_empty() {
            return Err(Error::InvalidScenario("no phases".into()));
        }
        for (i, p) in self.phases.iter().enumerate() {
            if !(p.end > p.start) {
                return Err(Error::InvalidScenario(format!("phase {i} has end <= start")));
            }
            if let Some(next) = self.phases.get(i + 1) {
                if (next.start - p.end).abs() > 1e-12 {
                    return Err(Error::InvalidScenario(format!(
                        "phases {i} and {} are not contiguous ({} vs {})",
                        i + 1,
                        p.end,
                        next.start
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn start(&self) -> f64 {
        self.phases[0].start
    }

    pub fn end(&self) -> f64 {
        self.phases[self.phases.len() - 1].end
    }

    /// Index of the phase active at `t`; phases are half-open except the last.
    pub fn phase_index(&self, t: f64) -> usize {
        self.phases.iter().position(|p| t < p.end).unwrap_or(self.phases.len() - 1)
    }
}

/// The four-phase recovery manoeuvre: climb, flip, recover, translate.
pub fn scenario_iv_b() -> FlightScenario {
    let heading = E1;
    FlightScenario {
        phases: vec![
            Phase {
                start: 0.0,
                end: 4.0,
                reference: PhaseReference::PositionSp8 {
                    target: Vec3::new(0.0, 1.0, 10.0),
                    target_velocity: Vec3::new(0.0, 0.0, 7.0),
                    heading,
                },
            },
            Phase { start: 4.0, end: 4.4, reference: PhaseReference::PitchSp8 { from: 0.0, to: PI } },
            Phase { start: 4.4, end: 4.9, reference: PhaseReference::AttitudeStep { rotation: Rotation::identity() } },
            Phase {
                start: 4.9,
                end: 10.0,
                reference: PhaseReference::PositionSp8 {
                    target: Vec3::new(-1.0, 1.5, 10.0),
                    target_velocity: Vec3::zeros(),
                    heading,
                },
            },
        ],
    }
}

/// `1.01 · max ‖m g E₃ + m ẍ_d(t)‖` over a grid of spacing `dt` on `[t0, t1]`.
pub fn bound_b(reference: &dyn Trajectory, t0: f64, t1: f64, dt: f64, mass: f64, gravity: f64) -> f64 {
    let n = ((t1 - t0) / dt).round().max(0.0) as usize;
    (0..=n)
        .map(|k| {
            let t = (t0 + k as f64 * dt).min(t1);
            (mass * gravity * E3 + mass * reference.sample(t).ad).norm()
        })
        .fold(0.0, f64::max)
        * 1.01
}
