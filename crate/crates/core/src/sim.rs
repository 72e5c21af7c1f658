//! Fixed-step closed-loop simulation of a [`FlightScenario`].

use crate::attitude_errors::ErrorSetKind;
use crate::control::{
    AttitudeController, AttitudeGains, ControlCommand, Controller, PdController, PdGains, PositionController,
    PositionGains, DEFAULT_FD_STEP,
};
use crate::error::{Error, Result};
use crate::metrics::{Telemetry, TelemetrySample};
use crate::plant::{step, DisturbanceSource, QuadParams, RigidBodyState};
use crate::reference::{FlightMode, FlightScenario, Handoff, Trajectory};
use crate::stability::{lyapunov_v, lyapunov_v_psi, lyapunov_v_x};

/// Which feedback law drives the vehicle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ControlLaw {
    Surface,
    Pd(PdGains),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub params: QuadParams,
    pub kind: ErrorSetKind,
    /// Gains for attitude-mode phases.
    pub attitude: AttitudeGains,
    /// Gains for position-mode phases.
    pub position: PositionGains,
    pub law: ControlLaw,
    pub dt: f64,
    pub saturation: bool,
    pub fd_step: f64,
    /// Collective thrust in attitude mode; defaults to hover thrust.
    pub attitude_thrust: Option<f64>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            params: QuadParams::default(),
            kind: ErrorSetKind::SetOne,
            attitude: AttitudeGains::TUNED,
            position: PositionGains::TUNED,
            law: ControlLaw::Surface,
            dt: 1e-3,
            saturation: false,
            fd_step: DEFAULT_FD_STEP,
            attitude_thrust: None,
        }
    }
}

impl SimConfig {
    pub fn controller(&self, mode: FlightMode) -> Result<Box<dyn Controller>> {
        let p = &self.params;
        Ok(match (self.law, mode) {
            (ControlLaw::Surface, FlightMode::Attitude) => {
                let c = AttitudeController::new(self.attitude, self.kind, p)?;
                Box::new(match self.attitude_thrust {
                    Some(f) => c.with_thrust(f),
                    None => c,
                })
            }
            (ControlLaw::Surface, FlightMode::Position) => {
                Box::new(PositionController::new(self.position, self.kind, p)?.with_fd_step(self.fd_step)?)
            }
            (ControlLaw::Pd(g), mode) => Box::new(PdController::new(g, mode, self.kind, p)?),
        })
    }
}

/// A controller error that stopped the run.
#[derive(Debug)]
pub struct SimFailure {
    pub t: f64,
    pub error: Error,
}

#[derive(Debug)]
pub struct SimOutcome {
    pub telemetry: Telemetry,
    pub final_state: RigidBodyState,
    pub failure: Option<SimFailure>,
}

impl SimOutcome {
    pub fn completed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Number of `dt` steps in `span`, rejecting spans that are not a whole number of steps.
fn steps_in(span: f64, dt: f64) -> Result<usize> {
    let n = span / dt;
    let k = n.round();
    if !(k >= 0.0) || (n - k).abs() > 1e-6 {
        return Err(Error::InvalidScenario(format!("span {span} is not a multiple of dt = {dt}")));
    }
    Ok(k as usize)
}

fn record(
    t: f64,
    phase: usize,
    mode: FlightMode,
    state: &RigidBodyState,
    cmd: &ControlCommand,
    out: &crate::plant::ControlOutput,
    cfg: &SimConfig,
) -> TelemetrySample {
    let terms = &cmd.terms;
    let att = &terms.attitude;
    let gains = match mode {
        FlightMode::Attitude => cfg.attitude,
        FlightMode::Position => cfg.position.att,
    };
    let v = lyapunov_v(&gains, att.psi, &att.e_r, &att.e_omega);
    let v_x = match mode {
        FlightMode::Attitude => 0.0,
        FlightMode::Position => lyapunov_v_x(&cfg.position, cfg.params.mass, &terms.e_x, &terms.e_v),
    };
    TelemetrySample {
        t,
        phase,
        mode,
        x: state.x,
        v: state.v,
        r: state.r,
        w: state.w,
        xd: terms.reference.xd,
        vd: terms.reference.vd,
        target: terms.target,
        psi: att.psi,
        e_r: att.e_r,
        e_omega: att.e_omega,
        e_x: terms.e_x,
        e_v: terms.e_v,
        s_r: terms.s_r,
        s_x: terms.s_x,
        thrust_cmd: cmd.wrench.thrust,
        moment_cmd: cmd.wrench.moment,
        thrust: out.wrench.thrust,
        moment: out.wrench.moment,
        motors: out.motors,
        saturated: out.saturated,
        v_lyap: v,
        v_psi: lyapunov_v_psi(&gains, att.psi, &att.e_omega),
        v_x,
        v_g: v + v_x,
    }
}

/// Runs `scenario` from `initial`. Controller errors end the run early and are
/// returned in [`SimOutcome::failure`]; configuration errors are returned as `Err`.
pub fn simulate(
    cfg: &SimConfig,
    scenario: &FlightScenario,
    initial: RigidBodyState,
    disturbance: &dyn DisturbanceSource,
) -> Result<SimOutcome> {
    scenario.validate()?;
    cfg.params.validate()?;
    if !(cfg.dt > 0.0 && cfg.dt.is_finite()) {
        return Err(Error::Config(format!("dt must be positive (got {})", cfg.dt)));
    }
    let t0 = scenario.start();
    let dt = cfg.dt;
    let total = steps_in(scenario.end() - t0, dt)?;
    let phase_starts: Vec<usize> = scenario.phases.iter().map(|p| steps_in(p.start - t0, dt)).collect::<Result<_>>()?;
    let controllers: Vec<Box<dyn Controller>> =
        scenario.phases.iter().map(|p| cfg.controller(p.mode())).collect::<Result<_>>()?;

    let mut telemetry = Telemetry::new(dt);
    telemetry.samples.reserve(total + 1);
    let mut state = initial;
    let mut phase = usize::MAX;
    let mut reference: Option<Box<dyn Trajectory>> = None;
    let mut last_thrust: Option<f64> = None;

    for k in 0..=total {
        let t = t0 + k as f64 * dt;
        let active = phase_starts.iter().rposition(|&s| s <= k).unwrap_or(0);
        if active != phase {
            phase = active;
            let start = match last_thrust {
                Some(f) => Handoff::from_state(&state, f, cfg.params.mass, cfg.params.gravity),
                None => Handoff { x: state.x, v: state.v, ..Default::default() },
            };
            match scenario.phases[phase].instantiate(&start) {
                Ok(r) => reference = Some(r),
                Err(error) => {
                    return Ok(SimOutcome { telemetry, final_state: state, failure: Some(SimFailure { t, error }) })
                }
            }
        }
        let traj = reference.as_deref().expect("reference set on phase entry");
        let cmd = match controllers[phase].command(t, &state, traj) {
            Ok(c) => c,
            Err(error) => {
                return Ok(SimOutcome { telemetry, final_state: state, failure: Some(SimFailure { t, error }) })
            }
        };
        let out = cfg.params.actuate(&cmd.wrench, cfg.saturation);
        last_thrust = Some(out.wrench.thrust);
        telemetry.samples.push(record(t, phase, scenario.phases[phase].mode(), &state, &cmd, &out, cfg));
        if k < total {
            state = step(&state, &out.wrench, disturbance, t, dt, &cfg.params);
            if !(state.x.iter().chain(state.v.iter()).chain(state.w.iter()).all(|x| x.is_finite())) {
                return Ok(SimOutcome {
                    telemetry,
                    final_state: state,
                    failure: Some(SimFailure { t: t + dt, error: Error::InvalidParameter("state diverged".into()) }),
                });
            }
        }
    }
    Ok(SimOutcome { telemetry, final_state: state, failure: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plant::Calm;
    use crate::reference::PhaseReference;
    use crate::so3::{Vec3, E1};

    #[test]
    fn hover_stays_put() {
        let scenario = FlightScenario::single(PhaseReference::PositionStep { target: Vec3::zeros(), heading: E1 }, 0.1);
        let out = simulate(&SimConfig::default(), &scenario, RigidBodyState::default(), &Calm).unwrap();
        assert!(out.completed());
        assert_eq!(out.telemetry.len(), 101);
        for s in &out.telemetry.samples {
            assert!(s.e_x.norm() < 1e-12 && s.psi < 1e-12);
        }
    }

    #[test]
    fn rejects_fractional_horizon() {
        let scenario =
            FlightScenario::single(PhaseReference::PositionStep { target: Vec3::zeros(), heading: E1 }, 0.10005);
        assert!(simulate(&SimConfig::default(), &scenario, RigidBodyState::default(), &Calm).is_err());
    }
}
