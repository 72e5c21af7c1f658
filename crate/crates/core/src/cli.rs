//! Run configuration, builtin scenarios and the command implementations behind
//! the `quadsurf` binary.
//!
//! A run config is TOML:
//!
//! ```toml
//! scenario = "step90"        # builtin name or path to a scenario file
//! error_set = "one"
//! controller = "surface"     # or "pd"
//! dt = 1e-3
//! horizon = 2.0
//! output = "step90.csv"
//! seed = 7
//! saturation = false
//! wind = "none"              # or a t,wx,wy,wz CSV
//!
//! [quad]
//! mass = 1.225
//!
//! [gains.attitude]
//! k_r = 5625.0
//! k_omega = 150.0
//! eta = 0.8
//!
//! [gains.position]
//! k_x = 894.62
//! k_v = 59.82
//! a = 0.5071
//!
//! [initial]
//! position = [0.0, 0.0, 0.0]
//! random_tilt = 0.0          # rad; random axis drawn from `seed`
//!
//! [check]
//! b = 12.2
//! theta = 0.1
//! ```
//!
//! Every key is optional; builtin scenarios supply their own defaults, and
//! relative paths are resolved against the config file's directory.
//!
//! A scenario file lists phases:
//!
//! ```toml
//! [[phase]]
//! start = 0.0
//! end = 2.0
//! type = "attitude_step"
//! rotation = [0.0, 1.5707963267948966, 0.0]   # rotation vector (rad)
//! ```
//!
//! with `type` one of `position_step` (`target`, `heading`), `position_sp8`
//! (`target`, `target_velocity`, `heading`), `attitude_step` (`rotation`) or
//! `pitch_sp8` (`from`, `to`).

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::attitude_errors::ErrorSetKind;
use crate::control::{AttitudeGains, PdGains, PositionGains, DEFAULT_FD_STEP};
use crate::error::{Error, Result};
use crate::metrics::{delta_f_rms_series, f_rms, f_rms_series, Telemetry};
use crate::plant::{Calm, QuadParams, RigidBodyState, WindModel, WindProfile};
use crate::reference::{scenario_iv_b, FlightMode, FlightScenario, Phase, PhaseReference};
use crate::sim::{simulate, ControlLaw, SimConfig, SimOutcome};
use crate::so3::{exp_so3, random_unit_vector, Rotation, Vec3, E1, E2};
use crate::stability::{stability_report, ReportRequest};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_CONTROLLER: u8 = 2;

pub const BUILTINS: [&str; 4] = ["hover", "step90", "cmstep", "aggressive"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ControllerChoice {
    Surface,
    Pd,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct QuadSection {
    mass: Option<f64>,
    /// Diagonal of the inertia matrix.
    inertia: Option<[f64; 3]>,
    arm: Option<f64>,
    torque_coeff: Option<f64>,
    gravity: Option<f64>,
    f_min: Option<f64>,
    f_max: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PositionSection {
    k_x: f64,
    k_v: f64,
    a: f64,
    /// Inner attitude gains; default to `[gains.attitude]`.
    attitude: Option<AttitudeGains>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GainsSection {
    attitude: Option<AttitudeGains>,
    position: Option<PositionSection>,
    pd: Option<PdGains>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct InitialSection {
    position: Option<[f64; 3]>,
    velocity: Option<[f64; 3]>,
    omega: Option<[f64; 3]>,
    /// Rotation vector of the initial attitude.
    rotation: Option<[f64; 3]>,
    random_tilt: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GustSection {
    mean: [f64; 3],
    amplitude: [f64; 3],
    start: f64,
    duration: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CheckSection {
    b: Option<f64>,
    theta: Option<f64>,
    e_x_max: Option<f64>,
    e_v_max: Option<f64>,
    psi0: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: Option<String>,
    error_set: Option<ErrorSetKind>,
    controller: Option<ControllerChoice>,
    dt: Option<f64>,
    horizon: Option<f64>,
    output: Option<PathBuf>,
    seed: Option<u64>,
    saturation: Option<bool>,
    wind: Option<String>,
    fd_step: Option<f64>,
    attitude_thrust: Option<f64>,
    #[serde(default)]
    quad: QuadSection,
    #[serde(default)]
    gains: GainsSection,
    #[serde(default)]
    initial: InitialSection,
    gust: Option<GustSection>,
    #[serde(default)]
    check: CheckSection,
}

/// Command-line flags that take precedence over config keys.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// Builtin scenario name or scenario file.
    #[arg(long)]
    pub scenario: Option<String>,
    /// Attitude error set: one or two.
    #[arg(long)]
    pub error_set: Option<ErrorSetKind>,
    #[arg(long, value_enum)]
    pub controller: Option<ControllerChoice>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Telemetry CSV path.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Clamp motor thrusts to [f_min, f_max].
    #[arg(long)]
    pub saturation: Option<bool>,
    /// Wind CSV path or "none".
    #[arg(long)]
    pub wind: Option<String>,
    /// Thrust-vector bound B for check-gains (N).
    #[arg(long)]
    pub b: Option<f64>,
    /// θ for check-gains.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Initial Ψ for the admissible e_ω(0) bounds.
    #[arg(long)]
    pub psi0: Option<f64>,
}

/// Settings for `check-gains`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckSettings {
    pub b: f64,
    pub theta: f64,
    pub e_x_max: f64,
    pub e_v_max: f64,
    pub psi0: f64,
}

/// A fully resolved run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Builtin name or scenario file path.
    pub scenario_name: String,
    pub scenario: FlightScenario,
    pub initial: RigidBodyState,
    pub sim: SimConfig,
    pub wind: WindProfile,
    pub horizon: f64,
    pub output: Option<PathBuf>,
    pub seed: u64,
    pub check: CheckSettings,
}

struct Builtin {
    scenario: FlightScenario,
    initial: RigidBodyState,
    kind: ErrorSetKind,
    attitude: AttitudeGains,
    position: PositionGains,
    saturation: bool,
}

fn builtin(name: &str) -> Option<Builtin> {
    let tuned = |scenario, initial| Builtin {
        scenario,
        initial,
        kind: ErrorSetKind::SetOne,
        attitude: AttitudeGains::TUNED,
        position: PositionGains::TUNED,
        saturation: false,
    };
    Some(match name {
        "hover" => tuned(
            FlightScenario::single(PhaseReference::PositionStep { target: Vec3::zeros(), heading: E1 }, 1.0),
            RigidBodyState::default(),
        ),
        "step90" => tuned(
            FlightScenario::single(
                PhaseReference::AttitudeStep { rotation: Rotation::about_axis(&E2, FRAC_PI_2) },
                2.0,
            ),
            RigidBodyState::default(),
        ),
        "cmstep" => tuned(
            FlightScenario::single(
                PhaseReference::PositionStep { target: Vec3::new(0.01, 0.01, 0.01), heading: E1 },
                10.0,
            ),
            RigidBodyState::default(),
        ),
        "aggressive" => Builtin {
            scenario: scenario_iv_b(),
            initial: RigidBodyState::at_rest(Vec3::new(0.0, 0.0, 5.0)),
            kind: ErrorSetKind::SetTwo,
            attitude: AttitudeGains::AGGRESSIVE,
            position: PositionGains::AGGRESSIVE,
            saturation: true,
        },
        _ => return None,
    })
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum PhaseKind {
    PositionStep {
        target: [f64; 3],
        #[serde(default = "default_heading")]
        heading: [f64; 3],
    },
    PositionSp8 {
        target: [f64; 3],
        #[serde(default)]
        target_velocity: [f64; 3],
        #[serde(default = "default_heading")]
        heading: [f64; 3],
    },
    AttitudeStep {
        rotation: [f64; 3],
    },
    PitchSp8 {
        from: f64,
        to: f64,
    },
}

fn default_heading() -> [f64; 3] {
    [1.0, 0.0, 0.0]
}

#[derive(Debug, Deserialize)]
struct PhaseSpec {
    start: f64,
    end: f64,
    #[serde(flatten)]
    kind: PhaseKind,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    phase: Vec<PhaseSpec>,
}

fn v3(a: [f64; 3]) -> Vec3 {
    Vec3::from(a)
}

/// Parses a scenario file body.
pub fn parse_scenario(text: &str) -> Result<FlightScenario> {
    let file: ScenarioFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    let phases = file
        .phase
        .into_iter()
        .map(|p| {
            let reference = match p.kind {
                PhaseKind::PositionStep { target, heading } => {
                    PhaseReference::PositionStep { target: v3(target), heading: v3(heading) }
                }
                PhaseKind::PositionSp8 { target, target_velocity, heading } => PhaseReference::PositionSp8 {
                    target: v3(target),
                    target_velocity: v3(target_velocity),
                    heading: v3(heading),
                },
                PhaseKind::AttitudeStep { rotation } => {
                    PhaseReference::AttitudeStep { rotation: exp_so3(&v3(rotation)) }
                }
                PhaseKind::PitchSp8 { from, to } => PhaseReference::PitchSp8 { from, to },
            };
            Phase { start: p.start, end: p.end, reference }
        })
        .collect();
    FlightScenario::new(phases)
}

/// Clips or extends the last phase so the scenario ends at `start + horizon`.
fn fit_horizon(scenario: &FlightScenario, horizon: f64) -> FlightScenario {
    let end = scenario.start() + horizon;
    let mut phases: Vec<Phase> = scenario.phases.iter().filter(|p| p.start < end - 1e-12).cloned().collect();
    if let Some(last) = phases.last_mut() {
        last.end = end;
    }
    FlightScenario { phases }
}

fn resolve_path(base: Option<&Path>, p: &str) -> PathBuf {
    let path = PathBuf::from(p);
    match base {
        Some(dir) if path.is_relative() => dir.join(path),
        _ => path,
    }
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Config(format!("{name} must be positive (got {v})")))
    }
}

impl RunConfig {
    /// Loads `path` (if any) and applies `overrides`.
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<Self> {
        let (text, base) = match path {
            Some(p) => (
                std::fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?,
                p.parent().map(Path::to_path_buf),
            ),
            None => (String::new(), None),
        };
        Self::from_toml(&text, base.as_deref(), overrides)
    }

    /// Builds a run from config text; relative paths resolve against `base`.
    pub fn from_toml(text: &str, base: Option<&Path>, overrides: &Overrides) -> Result<Self> {
        let mut raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let o = overrides.clone();
        raw.scenario = o.scenario.or(raw.scenario);
        raw.error_set = o.error_set.or(raw.error_set);
        raw.controller = o.controller.or(raw.controller);
        raw.dt = o.dt.or(raw.dt);
        raw.horizon = o.horizon.or(raw.horizon);
        raw.output = o.output.or(raw.output);
        raw.seed = o.seed.or(raw.seed);
        raw.saturation = o.saturation.or(raw.saturation);
        raw.wind = o.wind.or(raw.wind);
        raw.check.b = o.b.or(raw.check.b);
        raw.check.theta = o.theta.or(raw.check.theta);
        raw.check.psi0 = o.psi0.or(raw.check.psi0);
        Self::resolve(raw, base)
    }

    fn resolve(raw: RawConfig, base: Option<&Path>) -> Result<Self> {
        let scenario_name = raw.scenario.unwrap_or_else(|| "hover".to_string());
        let defaults = match builtin(&scenario_name) {
            Some(b) => b,
            None => {
                let path = resolve_path(base, &scenario_name);
                if !path.is_file() {
                    return Err(Error::Config(format!(
                        "scenario {scenario_name:?} is neither a builtin ({}) nor a file",
                        BUILTINS.join(", ")
                    )));
                }
                let text = std::fs::read_to_string(&path)?;
                let scenario = parse_scenario(&text)?;
                Builtin {
                    scenario,
                    initial: RigidBodyState::default(),
                    kind: ErrorSetKind::SetOne,
                    attitude: AttitudeGains::TUNED,
                    position: PositionGains::TUNED,
                    saturation: false,
                }
            }
        };

        let d = QuadParams::default();
        let q = raw.quad;
        let params = QuadParams {
            inertia: q.inertia.map_or(d.inertia, |j| nalgebra::Matrix3::from_diagonal(&v3(j))),
            mass: q.mass.unwrap_or(d.mass),
            arm: q.arm.unwrap_or(d.arm),
            torque_coeff: q.torque_coeff.unwrap_or(d.torque_coeff),
            gravity: q.gravity.unwrap_or(d.gravity),
            f_min: q.f_min.unwrap_or(d.f_min),
            f_max: q.f_max.unwrap_or(d.f_max),
        };
        params.validate().map_err(|e| Error::Config(e.to_string()))?;

        let attitude = raw.gains.attitude.unwrap_or(defaults.attitude);
        let position = match raw.gains.position {
            Some(p) => PositionGains {
                k_x: p.k_x,
                k_v: p.k_v,
                a: p.a,
                att: p.attitude.or(raw.gains.attitude).unwrap_or(defaults.position.att),
            },
            None => PositionGains { att: raw.gains.attitude.unwrap_or(defaults.position.att), ..defaults.position },
        };
        let law = match raw.controller.unwrap_or(ControllerChoice::Surface) {
            ControllerChoice::Surface => ControlLaw::Surface,
            ControllerChoice::Pd => ControlLaw::Pd(raw.gains.pd.unwrap_or_default()),
        };
        let dt = positive("dt", raw.dt.unwrap_or(1e-3))?;
        let fd_step = positive("fd_step", raw.fd_step.unwrap_or(DEFAULT_FD_STEP))?;
        let horizon = positive("horizon", raw.horizon.unwrap_or(defaults.scenario.end() - defaults.scenario.start()))?;
        let scenario = fit_horizon(&defaults.scenario, horizon);
        scenario.validate()?;

        let seed = raw.seed.unwrap_or(0);
        let i = raw.initial;
        let mut initial = defaults.initial;
        if let Some(x) = i.position {
            initial.x = v3(x);
        }
        if let Some(v) = i.velocity {
            initial.v = v3(v);
        }
        if let Some(w) = i.omega {
            initial.w = v3(w);
        }
        if let Some(r) = i.rotation {
            initial.r = exp_so3(&v3(r));
        }
        let tilt = i.random_tilt.unwrap_or(0.0);
        if !(tilt >= 0.0 && tilt.is_finite()) {
            return Err(Error::Config(format!("random_tilt must be non-negative (got {tilt})")));
        }
        if tilt > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let axis = random_unit_vector(&mut rng);
            initial.r = initial.r * exp_so3(&(axis * tilt));
        }

        let mut wind = match raw.wind.as_deref() {
            None | Some("none") => WindProfile::Calm,
            Some(p) => {
                let path = resolve_path(base, p);
                WindProfile::from_csv_path(&path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
            }
        };
        if let Some(g) = raw.gust {
            if !matches!(wind, WindProfile::Calm) {
                return Err(Error::Config("wind file and [gust] are mutually exclusive".into()));
            }
            positive("gust.duration", g.duration)?;
            wind = WindProfile::Gust {
                mean: v3(g.mean),
                amplitude: v3(g.amplitude),
                start: g.start,
                duration: g.duration,
            };
        }

        let c = raw.check;
        let check = CheckSettings {
            b: c.b.unwrap_or(1.01 * params.hover_thrust()),
            theta: c.theta.unwrap_or(0.1),
            e_x_max: c.e_x_max.unwrap_or(0.0),
            e_v_max: c.e_v_max.unwrap_or(0.0),
            psi0: c.psi0.unwrap_or(0.0),
        };

        Ok(RunConfig {
            scenario_name,
            scenario,
            initial,
            sim: SimConfig {
                params,
                kind: raw.error_set.unwrap_or(defaults.kind),
                attitude,
                position,
                law,
                dt,
                saturation: raw.saturation.unwrap_or(defaults.saturation),
                fd_step,
                attitude_thrust: raw.attitude_thrust,
            },
            wind,
            horizon,
            output: raw.output.map(|p| match base {
                Some(dir) if p.is_relative() => dir.join(p),
                _ => p,
            }),
            seed,
            check,
        })
    }

    /// Runs the scenario. Without a wind profile the plant sees no aerodynamic disturbance.
    pub fn run(&self) -> Result<SimOutcome> {
        match self.wind {
            WindProfile::Calm => simulate(&self.sim, &self.scenario, self.initial, &Calm),
            _ => simulate(&self.sim, &self.scenario, self.initial, &WindModel::new(self.wind.clone())),
        }
    }
}

/// One group of telemetry columns: name prefix, width and meaning.
const COLUMNS: &[(&str, usize, &str)] = &[
    ("t", 1, "time (s)"),
    ("phase", 1, "active phase index"),
    ("mode", 1, "flight mode: attitude or position"),
    ("x", 3, "position in the inertial frame (m)"),
    ("v", 3, "velocity in the inertial frame (m/s)"),
    ("r", 9, "rotation matrix, row-major r_11..r_33"),
    ("w", 3, "body angular velocity (rad/s)"),
    ("xd", 3, "desired position (m)"),
    ("vd", 3, "desired velocity (m/s)"),
    ("psi", 1, "attitude error function"),
    ("e_r", 3, "attitude error vector"),
    ("e_omega", 3, "angular velocity error (rad/s)"),
    ("e_x", 3, "position error (m)"),
    ("e_v", 3, "velocity error (m/s)"),
    ("s_r", 3, "attitude surface"),
    ("s_x", 3, "position surface"),
    ("f_cmd", 1, "commanded collective thrust (N)"),
    ("m_cmd", 3, "commanded body moment (N m)"),
    ("f", 1, "applied collective thrust after motor limits (N)"),
    ("m", 3, "applied body moment (N m)"),
    ("motor", 4, "applied motor thrusts (N)"),
    ("sat_mask", 1, "bit i set when motor i+1 was clamped"),
    ("v_lyap", 1, "attitude Lyapunov function"),
    ("v_psi", 1, "attitude Lyapunov function in Psi form"),
    ("v_x", 1, "translational Lyapunov function (0 in attitude mode)"),
    ("v_g", 1, "v_lyap + v_x"),
];

const FORMAT_VERSION: u32 = 1;

/// Column names in file order.
pub fn telemetry_columns() -> Vec<String> {
    let mut names = Vec::new();
    for &(name, n, _) in COLUMNS {
        match (name, n) {
            (_, 1) => names.push(name.to_string()),
            ("r", 9) => {
                for i in 1..=3 {
                    for j in 1..=3 {
                        names.push(format!("r_{i}{j}"));
                    }
                }
            }
            _ => names.extend((1..=n).map(|i| format!("{name}_{i}"))),
        }
    }
    names
}

fn push_vec(row: &mut Vec<String>, v: &Vec3) {
    row.extend(v.iter().map(|x| x.to_string()));
}

/// Writes telemetry as CSV preceded by a `#` comment block documenting the run and every column.
pub fn write_telemetry<W: Write>(mut w: W, cfg: &RunConfig, tel: &Telemetry) -> Result<()> {
    writeln!(w, "# quadsurf telemetry v{FORMAT_VERSION}")?;
    writeln!(w, "# scenario = {}", cfg.scenario_name)?;
    writeln!(w, "# error_set = {}", cfg.sim.kind)?;
    writeln!(w, "# dt = {}", cfg.sim.dt)?;
    writeln!(w, "# horizon = {}", cfg.horizon)?;
    writeln!(w, "# seed = {}", cfg.seed)?;
    writeln!(w, "# saturation = {}", cfg.sim.saturation)?;
    writeln!(w, "# columns:")?;
    for &(name, n, doc) in COLUMNS {
        if n == 1 {
            writeln!(w, "#   {name}: {doc}")?;
        } else {
            writeln!(w, "#   {name}_*: {doc} ({n} columns)")?;
        }
    }
    let mut out = csv::Writer::from_writer(w);
    out.write_record(telemetry_columns())?;
    let mut row = Vec::with_capacity(80);
    for s in &tel.samples {
        row.clear();
        row.push(s.t.to_string());
        row.push(s.phase.to_string());
        row.push(s.mode.to_string());
        push_vec(&mut row, &s.x);
        push_vec(&mut row, &s.v);
        let r = s.r.matrix();
        for i in 0..3 {
            for j in 0..3 {
                row.push(r[(i, j)].to_string());
            }
        }
        push_vec(&mut row, &s.w);
        push_vec(&mut row, &s.xd);
        push_vec(&mut row, &s.vd);
        row.push(s.psi.to_string());
        for v in [&s.e_r, &s.e_omega, &s.e_x, &s.e_v, &s.s_r, &s.s_x] {
            push_vec(&mut row, v);
        }
        row.push(s.thrust_cmd.to_string());
        push_vec(&mut row, &s.moment_cmd);
        row.push(s.thrust.to_string());
        push_vec(&mut row, &s.moment);
        row.extend(s.motors.iter().map(|f| f.to_string()));
        let mask: u8 = s.saturated.iter().enumerate().map(|(i, &b)| (b as u8) << i).sum();
        row.push(mask.to_string());
        for v in [s.v_lyap, s.v_psi, s.v_x, s.v_g] {
            row.push(v.to_string());
        }
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// End-of-run numbers printed by `simulate`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimSummary {
    pub completed: bool,
    pub failure: Option<(f64, String)>,
    pub t_end: f64,
    pub e_x: f64,
    pub e_v: f64,
    pub psi: f64,
    pub e_omega: f64,
    pub max_psi: f64,
    pub f_rms: Option<f64>,
    pub saturated_steps: usize,
}

impl SimSummary {
    pub fn of(outcome: &SimOutcome) -> Self {
        let tel = &outcome.telemetry;
        let last = tel.samples.last();
        SimSummary {
            completed: outcome.completed(),
            failure: outcome.failure.as_ref().map(|f| (f.t, f.error.to_string())),
            t_end: tel.end(),
            e_x: last.map_or(f64::NAN, |s| s.e_x.norm()),
            e_v: last.map_or(f64::NAN, |s| s.e_v.norm()),
            psi: last.map_or(f64::NAN, |s| s.psi),
            e_omega: last.map_or(f64::NAN, |s| s.e_omega.norm()),
            max_psi: tel.max_psi(),
            f_rms: f_rms(tel, tel.end()).ok(),
            saturated_steps: tel.saturated_steps(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("completed = {}\n", self.completed);
        if let Some((t, msg)) = &self.failure {
            s += &format!("failure_time = {t}\nfailure = {msg}\n");
        }
        s += &format!(
            "t_end = {}\nfinal_e_x = {:.9e}\nfinal_e_v = {:.9e}\nfinal_psi = {:.9e}\nfinal_e_omega = {:.9e}\nmax_psi = {:.9e}\n",
            self.t_end, self.e_x, self.e_v, self.psi, self.e_omega, self.max_psi
        );
        match self.f_rms {
            Some(f) => s += &format!("f_rms = {f:.9e}\n"),
            None => s += "f_rms = n/a\n",
        }
        s += &format!("saturated_steps = {}\n", self.saturated_steps);
        s
    }
}

fn write_output(cfg: &RunConfig, tel: &Telemetry) -> Result<()> {
    if let Some(path) = &cfg.output {
        let file = std::fs::File::create(path)?;
        write_telemetry(std::io::BufWriter::new(file), cfg, tel)?;
    }
    Ok(())
}

/// Runs the configured scenario, writes the CSV (also for failed runs) and
/// prints the summary. Returns the exit code.
pub fn cmd_simulate(cfg: &RunConfig, out: &mut dyn Write) -> Result<u8> {
    let outcome = cfg.run()?;
    write_output(cfg, &outcome.telemetry)?;
    let summary = SimSummary::of(&outcome);
    write!(out, "{}", summary.to_text())?;
    Ok(if summary.completed { EXIT_OK } else { EXIT_CONTROLLER })
}

/// Prints the stability report. Returns [`EXIT_CONFIG`] when `η > k_R/k_ω²` fails;
/// region-of-attraction conditions are reported but do not change the exit code.
pub fn cmd_check_gains(cfg: &RunConfig, out: &mut dyn Write) -> Result<u8> {
    let c = &cfg.check;
    let req = ReportRequest {
        attitude: cfg.sim.attitude,
        position: Some(cfg.sim.position),
        kind: cfg.sim.kind,
        mass: cfg.sim.params.mass,
        b: c.b,
        theta: c.theta,
        e_x_max: c.e_x_max,
        e_v_max: c.e_v_max,
        psi0: c.psi0,
    };
    let report = stability_report(&req)?;
    writeln!(out, "b = {:.9e}", c.b)?;
    write!(out, "{}", report.to_text())?;
    let inner = cfg.sim.position.att;
    let mut failed = Vec::new();
    if !report.eta_ok {
        failed.push(format!("eta > k_R/k_omega^2 ({} <= {})", cfg.sim.attitude.eta, report.eta_bound));
    }
    if inner != cfg.sim.attitude && inner.eta <= inner.eta_bound() {
        failed.push(format!("position-mode eta > k_R/k_omega^2 ({} <= {})", inner.eta, inner.eta_bound()));
    }
    if failed.is_empty() {
        return Ok(EXIT_OK);
    }
    for f in &failed {
        writeln!(out, "violated = {f}")?;
    }
    Ok(EXIT_CONFIG)
}

/// Outcome of a controller A/B run: `a` is the proposed controller, `b` the benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Tie,
    /// `a` has no larger final error and no larger effort, strictly better in one.
    Proposed,
    Benchmark,
    /// Less error at more effort, or the reverse.
    Mixed,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Tie => "tie",
            Verdict::Proposed => "proposed",
            Verdict::Benchmark => "benchmark",
            Verdict::Mixed => "mixed",
        })
    }
}

/// Final tracking error: `‖e_x‖` in position mode, `Ψ` in attitude mode.
pub fn final_error(tel: &Telemetry) -> f64 {
    match tel.samples.last() {
        Some(s) if s.mode == FlightMode::Position => s.e_x.norm(),
        Some(s) => s.psi,
        None => f64::NAN,
    }
}

pub fn verdict(error_a: f64, error_b: f64, delta_f_rms: f64, scale: f64) -> Verdict {
    let tol = 1e-12 * scale.max(1.0);
    let err = if (error_a - error_b).abs() <= 1e-12 {
        0
    } else if error_a < error_b {
        -1
    } else {
        1
    };
    let eff = if delta_f_rms.abs() <= tol {
        0
    } else if delta_f_rms < 0.0 {
        -1
    } else {
        1
    };
    match (err, eff) {
        (0, 0) => Verdict::Tie,
        (e, f) if e <= 0 && f <= 0 => Verdict::Proposed,
        (e, f) if e >= 0 && f >= 0 => Verdict::Benchmark,
        _ => Verdict::Mixed,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub t: Vec<f64>,
    pub f_rms_a: Vec<f64>,
    pub f_rms_b: Vec<f64>,
    pub delta: Vec<f64>,
    pub error_a: f64,
    pub error_b: f64,
    pub verdict: Verdict,
}

/// Compares two completed runs on the same grid.
pub fn compare(a: &Telemetry, b: &Telemetry) -> Result<Comparison> {
    let delta = delta_f_rms_series(a, b)?;
    let f_rms_a = f_rms_series(a);
    let f_rms_b = f_rms_series(b);
    let (error_a, error_b) = (final_error(a), final_error(b));
    let last = delta.last().copied().unwrap_or(0.0);
    let scale = f_rms_a.last().copied().unwrap_or(0.0).max(f_rms_b.last().copied().unwrap_or(0.0));
    Ok(Comparison {
        t: a.times(),
        verdict: verdict(error_a, error_b, last, scale),
        f_rms_a,
        f_rms_b,
        delta,
        error_a,
        error_b,
    })
}

pub fn write_comparison<W: Write>(mut w: W, c: &Comparison) -> Result<()> {
    writeln!(w, "# quadsurf comparison v{FORMAT_VERSION}")?;
    writeln!(w, "# verdict = {}", c.verdict)?;
    writeln!(w, "# columns: t (s), f_rms_a and f_rms_b running motor-thrust RMS (N), delta_f_rms = f_rms_a - f_rms_b")?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["t", "f_rms_a", "f_rms_b", "delta_f_rms"])?;
    for k in 0..c.t.len() {
        out.write_record([&c.t[k], &c.f_rms_a[k], &c.f_rms_b[k], &c.delta[k]].map(|x| x.to_string()))?;
    }
    out.flush()?;
    Ok(())
}

/// Runs both configs concurrently and reports `Δf_RMS` and the verdict.
/// `output` receives the per-sample CSV.
pub fn cmd_compare(a: &RunConfig, b: &RunConfig, output: Option<&Path>, out: &mut dyn Write) -> Result<u8> {
    let (ra, rb) = std::thread::scope(|s| {
        let ha = s.spawn(|| a.run());
        let hb = s.spawn(|| b.run());
        (ha.join().expect("simulation thread panicked"), hb.join().expect("simulation thread panicked"))
    });
    let (ra, rb) = (ra?, rb?);
    for (tag, r) in [("a", &ra), ("b", &rb)] {
        if let Some(f) = &r.failure {
            writeln!(out, "failed = {tag}\nfailure_time = {}\nfailure = {}", f.t, f.error)?;
            return Ok(EXIT_CONTROLLER);
        }
    }
    let c = compare(&ra.telemetry, &rb.telemetry)?;
    if let Some(path) = output {
        write_comparison(std::io::BufWriter::new(std::fs::File::create(path)?), &c)?;
    }
    writeln!(out, "final_error_a = {:.9e}", c.error_a)?;
    writeln!(out, "final_error_b = {:.9e}", c.error_b)?;
    writeln!(out, "f_rms_a = {:.9e}", c.f_rms_a.last().copied().unwrap_or(f64::NAN))?;
    writeln!(out, "f_rms_b = {:.9e}", c.f_rms_b.last().copied().unwrap_or(f64::NAN))?;
    writeln!(out, "delta_f_rms = {:.9e}", c.delta.last().copied().unwrap_or(f64::NAN))?;
    writeln!(out, "verdict = {}", c.verdict)?;
    Ok(EXIT_OK)
}
